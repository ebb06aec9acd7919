"""Honest metric evaluation: SINR decomposition, sSNR, beampattern, fronthaul."""
import numpy as np
import pytest

from cfisac.config import default_config
from cfisac.metrics import (
    CENTRALIZED,
    TSDBA,
    beampattern,
    default_grid_deg,
    evaluate,
    fronthaul_load,
    sinr_per_ue,
    ssnr,
)
from cfisac.model import draw_channels, sensing_geometry, steering
from cfisac.nullspace import project
from cfisac.twostage import run_two_stage


def _final_precoders(cfg, trial=0):
    state, rec = run_two_stage(cfg, trial=trial)
    ch = draw_channels(cfg, trial)
    geo = sensing_geometry(cfg)
    data = project(ch, geo, cfg)
    return ch, geo, state.lift(data), rec


class TestSinr:
    def test_matched_filter_single_link(self):
        rng = np.random.default_rng(0)
        h = rng.standard_normal(8) + 1j * rng.standard_normal(8)
        P = 2.0
        F = [np.sqrt(P) * (h / np.linalg.norm(h)).reshape(-1, 1)]
        sinr, p_ds, p_mui = sinr_per_ue([[h]], F, sigma_k2=1.0)
        assert sinr[0] == pytest.approx(P * np.vdot(h, h).real, rel=1e-12)
        assert p_mui[0] == pytest.approx(0.0, abs=1e-20)

    def test_zero_precoder(self):
        h = np.ones(4, dtype=complex)
        sinr, p_ds, p_mui = sinr_per_ue([[h]], [np.zeros((4, 1), dtype=complex)],
                                        1.0)
        assert sinr[0] == 0.0 and p_ds[0] == 0.0

    def test_identity_relation(self):
        cfg = default_config()
        ch, geo, F, _ = _final_precoders(cfg)
        sinr, p_ds, p_mui = sinr_per_ue(ch, F, cfg.sigma_k2)
        np.testing.assert_allclose(sinr, p_ds / (p_mui + cfg.sigma_k2),
                                   rtol=0, atol=0)

    def test_nullspace_precoders_have_negligible_interference(self):
        cfg = default_config()
        ch, geo, F, _ = _final_precoders(cfg)
        _, p_ds, p_mui = sinr_per_ue(ch, F, cfg.sigma_k2)
        scale = cfg.p_max * max(np.vdot(ch[m][k], ch[m][k]).real
                                for m in range(cfg.M) for k in range(cfg.K))
        assert p_mui.max() <= 1e-18 * scale

    def test_common_phase_rotation_of_one_stream_invariant(self):
        cfg = default_config()
        ch, geo, F, _ = _final_precoders(cfg)
        sinr1, _, _ = sinr_per_ue(ch, F, cfg.sigma_k2)
        rot = np.exp(1j * 0.7)
        for k in range(cfg.K):
            F2 = [Fm.copy() for Fm in F]
            for Fm in F2:
                Fm[:, k] *= rot
            sinr2, _, _ = sinr_per_ue(ch, F2, cfg.sigma_k2)
            np.testing.assert_allclose(sinr1, sinr2, rtol=1e-12)


class TestSsnr:
    def test_zero_precoders(self):
        cfg = default_config()
        geo = sensing_geometry(cfg)
        F = [np.zeros((cfg.n_tx, cfg.K), dtype=complex)] * cfg.M
        assert ssnr(F, geo, cfg.sigma_n2) == 0.0

    def test_steered_closed_form(self):
        cfg = default_config().with_overrides(
            M=1, N=1, K=1, theta_deg=(17.0,), phi_deg=(-4.0,), n_tx=16, n_rx=8)
        geo = sensing_geometry(cfg)
        P = 1.5
        F = [np.sqrt(P / cfg.n_tx) * steering(17.0, cfg.n_tx).reshape(-1, 1)]
        got = ssnr(F, geo, cfg.sigma_n2)
        expect = cfg.sigma_mn2 * cfg.n_rx * cfg.n_tx * P / cfg.sigma_n2
        assert got == pytest.approx(expect, rel=1e-12)

    def test_quadratic_homogeneity(self):
        cfg = default_config()
        ch, geo, F, _ = _final_precoders(cfg)
        s1 = ssnr(F, geo, cfg.sigma_n2)
        s2 = ssnr([2.0 * Fm for Fm in F], geo, cfg.sigma_n2)
        assert s2 == pytest.approx(4.0 * s1, rel=1e-12)

    def test_agrees_with_run_record(self):
        cfg = default_config()
        ch, geo, F, rec = _final_precoders(cfg)
        assert ssnr(F, geo, cfg.sigma_n2) == pytest.approx(
            rec.iterations[-1].ssnr, rel=1e-9)


class TestBeampattern:
    def test_grid_shape(self):
        grid = default_grid_deg()
        assert grid.shape == (721,)
        assert grid[0] == -90.0 and grid[-1] == 90.0
        assert grid[1] - grid[0] == pytest.approx(0.25)

    def test_zero_precoder_clamps_to_floor(self):
        F = np.zeros((8, 2), dtype=complex)
        pat = beampattern(F, default_grid_deg())
        assert np.all(pat == -120.0)

    def test_steered_precoder_peaks_at_target(self):
        n = 32
        F = steering(25.0, n).reshape(-1, 1) / np.sqrt(n)
        grid = default_grid_deg(0.1)
        pat = beampattern(F, grid)
        assert grid[np.argmax(pat)] == pytest.approx(25.0, abs=0.1)
        assert pat.max() == pytest.approx(10.0 * np.log10(n), abs=0.05)


class TestFronthaul:
    def test_reference_counts(self):
        assert fronthaul_load(TSDBA, 4, 2, 32, 3) == 144
        assert fronthaul_load(CENTRALIZED, 4, 2, 32, 3) == 512

    def test_distributed_independent_of_antennas(self):
        assert (fronthaul_load(TSDBA, 4, 2, 8, 3)
                == fronthaul_load(TSDBA, 4, 2, 1024, 3))

    def test_centralized_linear_in_antennas(self):
        l8 = fronthaul_load(CENTRALIZED, 4, 2, 8, 3)
        l16 = fronthaul_load(CENTRALIZED, 4, 2, 16, 3)
        assert l16 == 2 * l8

    def test_matches_measured_exchange(self):
        cfg = default_config()
        _, rec = run_two_stage(cfg, trial=0)
        assert rec.fronthaul_scalars == fronthaul_load(
            TSDBA, cfg.M, cfg.K, cfg.n_tx, cfg.n_iter)

    def test_unknown_method_rejected(self):
        with pytest.raises(ValueError):
            fronthaul_load("psychic", 4, 2, 32, 3)


class TestEvaluate:
    def test_report_is_consistent(self):
        cfg = default_config()
        ch, geo, F, rec = _final_precoders(cfg)
        rep = evaluate(ch, F, geo, cfg.sigma_k2, cfg.sigma_n2,
                       fronthaul=rec.fronthaul_scalars)
        assert rep.sum_sinr == pytest.approx(float(np.sum(rep.sinr)))
        assert len(rep.beampattern) == cfg.M
        assert rep.beampattern[0].shape == (721,)
        assert rep.fronthaul == 144
        np.testing.assert_allclose(
            rep.sinr, rep.p_ds / (rep.p_mui + cfg.sigma_k2), rtol=0, atol=0)
