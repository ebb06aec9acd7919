"""Null-space bases, projections and the zero-interference guarantee."""
import numpy as np
import pytest

from cfisac.config import default_config
from cfisac.errors import NullspaceEmpty
from cfisac.model import draw_channels, sensing_geometry
from cfisac.nullspace import (
    interference_matrix,
    nullspace_basis,
    project,
)


def _rand_channels(rng, M, K, n_tx):
    return [[rng.standard_normal(n_tx) + 1j * rng.standard_normal(n_tx)
             for _ in range(K)] for _ in range(M)]


class TestInterferenceMatrix:
    def test_single_ue_empty(self):
        ch = _rand_channels(np.random.default_rng(0), 1, 1, 8)
        H = interference_matrix(ch, 0, 0)
        assert H.shape == (0, 8)

    def test_two_ues_single_row(self):
        ch = _rand_channels(np.random.default_rng(1), 1, 2, 8)
        H = interference_matrix(ch, 0, 0)
        np.testing.assert_array_equal(H[0], ch[0][1].conj())

    def test_three_ues_ordering(self):
        ch = _rand_channels(np.random.default_rng(2), 1, 3, 8)
        H = interference_matrix(ch, 0, 1)
        np.testing.assert_array_equal(H[0], ch[0][0].conj())
        np.testing.assert_array_equal(H[1], ch[0][2].conj())


class TestNullspaceBasis:
    def test_coordinate_row(self):
        H = np.zeros((1, 4), dtype=complex)
        H[0, 0] = 1.0
        P = nullspace_basis(H)
        assert P.shape == (4, 3)
        np.testing.assert_allclose(H @ P, 0.0, atol=1e-12)
        np.testing.assert_allclose(P.conj().T @ P, np.eye(3), atol=1e-12)

    def test_empty_matrix_identity(self):
        P = nullspace_basis(np.zeros((0, 5)))
        np.testing.assert_array_equal(P, np.eye(5))

    def test_random_row_dimension(self):
        rng = np.random.default_rng(3)
        H = (rng.standard_normal((1, 32)) + 1j * rng.standard_normal((1, 32)))
        P = nullspace_basis(H)
        assert P.shape == (32, 31)
        assert np.abs(H @ P).max() <= 1e-10
        np.testing.assert_allclose(P.conj().T @ P, np.eye(31), atol=1e-10)

    def test_full_rank_square_raises(self):
        with pytest.raises(NullspaceEmpty):
            nullspace_basis(np.eye(4, dtype=complex))

    def test_column_count_validation(self):
        with pytest.raises(ValueError):
            nullspace_basis(np.zeros((1, 4), dtype=complex), n=8)


class TestProject:
    def test_single_ue_identity(self):
        cfg = default_config().with_overrides(K=1, phi_deg=(10.0, -20.0))
        ch = draw_channels(cfg, 0)
        data = project(ch, sensing_geometry(cfg), cfg)
        np.testing.assert_allclose(data.h_hat[0][0], ch[0][0], atol=1e-12)

    def test_projection_contracts_norm(self):
        cfg = default_config()
        ch = draw_channels(cfg, 1)
        data = project(ch, sensing_geometry(cfg), cfg)
        for m in range(cfg.M):
            for k in range(cfg.K):
                assert (np.linalg.norm(data.h_hat[m][k])
                        <= np.linalg.norm(ch[m][k]) + 1e-12)
                assert data.basis[m][k].shape == (cfg.n_tx, cfg.n_tx - cfg.K + 1)

    def test_lifted_precoders_create_no_interference(self):
        cfg = default_config().with_overrides(n_tx=8)
        ch = draw_channels(cfg, 2)
        data = project(ch, sensing_geometry(cfg), cfg)
        rng = np.random.default_rng(5)
        for m in range(cfg.M):
            for k in range(cfg.K):
                w_hat = (rng.standard_normal(data.basis[m][k].shape[1])
                         + 1j * rng.standard_normal(data.basis[m][k].shape[1]))
                w = data.basis[m][k] @ w_hat
                for i in range(cfg.K):
                    if i == k:
                        continue
                    leak = abs(np.vdot(ch[m][i], w))
                    assert leak <= 1e-10 * np.linalg.norm(ch[m][i]) * np.linalg.norm(w)

    def test_projection_idempotent(self):
        cfg = default_config()
        ch = draw_channels(cfg, 3)
        data = project(ch, sensing_geometry(cfg), cfg)
        P = data.basis[1][0]
        lifted = P @ data.h_hat[1][0]
        np.testing.assert_allclose(P.conj().T @ lifted, data.h_hat[1][0],
                                   atol=1e-10)
