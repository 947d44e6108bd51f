"""Smoke tests for the python bindings."""

import math

import numpy as np
import pytest

import windsr


@pytest.fixture(scope="module")
def small_world():
    cfg = windsr.SynthConfig()
    cfg.seed = 3
    cfg.size = 32
    terrain = windsr.gen_terrain(cfg)
    truth = windsr.gen_truth_wind(terrain, cfg)
    sim = windsr.make_biased_sim(truth, cfg)
    return cfg, terrain, truth, sim


def test_version():
    assert windsr.__version__


def test_field_numpy_round_trip():
    arr = np.arange(12, dtype=float).reshape(3, 4)
    f = windsr.Field2D(arr, cell_size_km=2.0)
    assert f.rows == 3 and f.cols == 4
    back = f.to_numpy()
    np.testing.assert_array_equal(arr, back)


def test_coarsen_upsample_shapes(small_world):
    _, _, truth, _ = small_world
    lr = windsr.coarsen(truth, 4)
    assert (lr.rows, lr.cols) == (8, 8)
    assert lr.cell_size_km == pytest.approx(truth.cell_size_km * 4)
    up = windsr.upsample_bilinear(lr, 4)
    assert (up.rows, up.cols) == (32, 32)
    # Block-mean coarsening preserves the mean exactly.
    assert lr.mean() == pytest.approx(truth.mean(), abs=1e-12)


def test_generators_deterministic(small_world):
    cfg, terrain, truth, _ = small_world
    t2 = windsr.gen_terrain(cfg)
    np.testing.assert_array_equal(terrain.to_numpy(), t2.to_numpy())
    assert truth.min() >= 0.0


def test_metrics_identity(small_world):
    _, _, truth, sim = small_world
    mae, rmse = windsr.mae_rmse(truth, truth)
    assert mae == 0.0 and rmse == 0.0
    assert windsr.ssim(truth, truth, truth.max() - truth.min()) == 1.0
    assert math.isinf(windsr.psnr(truth, truth, 10.0))
    rep = windsr.evaluate(sim, truth)
    assert rep.rmse >= rep.mae > 0.0


def test_mask_and_blend(small_world):
    _, terrain, truth, sim = small_world
    stations = windsr.sample_stations(truth, 5, seed=7)
    assert len(stations) == 5
    cfg = windsr.RadiusConfig()
    radii = [windsr.dynamic_impact_radius(s.row, s.col, terrain, sim, cfg) for s in stations]
    assert all(cfg.min_radius <= r <= cfg.max_radius for r in radii)
    weights = windsr.build_soft_mask(stations, radii, 32, 32, 2.0, cfg)
    w = weights.to_numpy()
    assert w.min() >= 0.0 and w.max() <= 1.0
    for s in stations:
        assert w[s.row, s.col] == 1.0
    composite, out_radii = windsr.assimilation_composite(sim, terrain, stations, cfg)
    assert out_radii == radii
    c = composite.to_numpy()
    for s in stations:
        assert c[s.row, s.col] == pytest.approx(s.speed_mps, abs=1e-9)


def test_power_law():
    assert windsr.power_law(5.0, 10.0, 80.0) == pytest.approx(6.7297, abs=1e-3)
    lifted = windsr.lift_stations([windsr.StationObs("a", 0, 0, 10.0, 5.0)], 80.0)
    assert lifted[0].height_m == 80.0


def test_tiny_train_and_downscale(small_world, tmp_path):
    cfg, terrain, truth, sim = small_world
    pair = windsr.PatchPair(truth, windsr.coarsen(truth, 4), terrain)
    tc = windsr.TrainConfig()
    tc.iterations = 10
    tc.batch_size = 2
    tc.T = 8
    tc.beta_end = 0.2
    tc.n_layers = 2
    tc.hidden = 4
    model, losses = windsr.train_denoiser([pair], tc)
    assert len(losses) == 10
    assert model.parameter_count() > 0

    sched = windsr.make_linear_schedule(8, 1e-4, 0.2)
    lr_sim = windsr.coarsen(sim, 4)
    out = windsr.downscale(model, sched, lr_sim, terrain, seed=5)
    assert (out.rows, out.cols) == (32, 32)
    assert out.min() >= 0.0
    out2 = windsr.downscale(model, sched, lr_sim, terrain, seed=5)
    np.testing.assert_array_equal(out.to_numpy(), out2.to_numpy())

    # Checkpoint round trip through the filesystem.
    ckpt = tmp_path / "m.ckpt"
    windsr.save_checkpoint(model, ckpt)
    model2 = windsr.load_checkpoint(ckpt)
    out3 = windsr.downscale(model2, sched, lr_sim, terrain, seed=5)
    np.testing.assert_array_equal(out.to_numpy(), out3.to_numpy())

    # Grid round trip at 32-bit precision.
    gp = tmp_path / "f.wsrg"
    windsr.write_grid(truth, gp)
    back = windsr.read_grid(gp)
    np.testing.assert_allclose(back.to_numpy(), truth.to_numpy(), rtol=1e-6)


def test_assimilation_changes_output(small_world):
    cfg, terrain, truth, sim = small_world
    pair = windsr.PatchPair(truth, windsr.coarsen(truth, 4), terrain)
    tc = windsr.TrainConfig()
    tc.iterations = 5
    tc.batch_size = 1
    tc.T = 8
    tc.beta_end = 0.2
    tc.n_layers = 2
    tc.hidden = 4
    model, _ = windsr.train_denoiser([pair], tc)
    sched = windsr.make_linear_schedule(8, 1e-4, 0.2)
    lr_sim = windsr.coarsen(sim, 4)

    rcfg = windsr.RadiusConfig()
    plain = windsr.downscale(model, sched, lr_sim, terrain, seed=11)
    empty = windsr.assimilated_downscale(model, sched, lr_sim, terrain, [], rcfg, seed=11)
    np.testing.assert_array_equal(plain.to_numpy(), empty.to_numpy())

    stations = windsr.sample_stations(truth, 6, seed=13)
    da = windsr.assimilated_downscale(model, sched, lr_sim, terrain, stations, rcfg, seed=11)
    assert not np.array_equal(plain.to_numpy(), da.to_numpy())
