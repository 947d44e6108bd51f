#include "windsr/schedule.hpp"

#include <stdexcept>

namespace windsr {

NoiseSchedule make_linear_schedule(int T, double beta_start, double beta_end) {
    if (T < 2) throw std::invalid_argument("make_linear_schedule: T must be >= 2");
    if (!(beta_start > 0.0) || !(beta_start <= beta_end) || !(beta_end < 1.0))
        throw std::invalid_argument("make_linear_schedule: need 0 < beta_start <= beta_end < 1");

    NoiseSchedule s;
    s.T = T;
    s.beta.resize(T);
    s.alpha.resize(T);
    s.alpha_bar.resize(T);
    s.posterior_var.resize(T);

    const double step = (beta_end - beta_start) / (T - 1);
    double prod = 1.0;
    for (int i = 0; i < T; ++i) {
        s.beta[i] = beta_start + step * i;
        s.alpha[i] = 1.0 - s.beta[i];
        prod *= s.alpha[i];
        s.alpha_bar[i] = prod;
        s.posterior_var[i] =
            i == 0 ? 0.0 : (1.0 - s.alpha_bar[i - 1]) / (1.0 - s.alpha_bar[i]) * s.beta[i];
    }
    return s;
}

}  // namespace windsr
