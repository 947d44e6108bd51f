#pragma once

namespace windsr {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace windsr
