"""Interference null-space projection for per-UE zero-forcing."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import SystemConfig
from .errors import NullspaceEmpty
from .model import SensingGeometry


def interference_matrix(channels: list[list[np.ndarray]], m: int,
                        k: int) -> np.ndarray:
    """Stacked conjugate-transposed channels of every UE except k at AP m.

    Rows are h_{m,i}^H for i != k in ascending i order, shape (K-1, n_tx).
    """
    K = len(channels[m])
    n_tx = channels[m][k].shape[0]
    others = [channels[m][i].conj() for i in range(K) if i != k]
    return np.array(others, dtype=complex).reshape(K - 1, n_tx)


def nullspace_basis(H: np.ndarray, n: int | None = None) -> np.ndarray:
    """Orthonormal basis of the null space of H (columns span {x: Hx = 0}).

    H has shape (rows, n); rows may be 0, in which case the identity is
    returned. Rank is determined by the SVD with threshold
    max(rows, n) * eps * sigma_max. Raises NullspaceEmpty when the null
    space is {0}.
    """
    H = np.asarray(H)
    if H.ndim != 2:
        raise ValueError("H must be a 2-D array")
    rows, cols = H.shape
    if n is not None and cols != n:
        raise ValueError(f"H has {cols} columns, expected {n}")
    if rows == 0:
        return np.eye(cols, dtype=complex)
    _, s, vh = np.linalg.svd(H, full_matrices=True)
    tol = max(rows, cols) * np.finfo(float).eps * (s[0] if s.size else 0.0)
    rank = int(np.count_nonzero(s > tol))
    if rank >= cols:
        raise NullspaceEmpty(f"null space of a {rows}x{cols} matrix is empty")
    return vh[rank:].conj().T


@dataclass(frozen=True)
class NullspaceData:
    """Per-(m,k) null-space bases and projected channel/steering vectors.

    basis[m][k]: orthonormal columns spanning the null space of the other
        UEs' channels at AP m; precoders lift back as w = basis @ w_hat.
    h_hat[m][k]: projected own channel, basis^H h.
    a_hat[m][k]: projected target steering, basis^H a_tx.
    """

    basis: list[list[np.ndarray]]
    h_hat: list[list[np.ndarray]]
    a_hat: list[list[np.ndarray]]

    @property
    def M(self) -> int:
        return len(self.basis)

    @property
    def K(self) -> int:
        return len(self.basis[0])


def project(channels: list[list[np.ndarray]], geometry: SensingGeometry,
            config: SystemConfig) -> NullspaceData:
    """Project channels and steering vectors into per-(m,k) null spaces.

    The basis for UE k at AP m spans the null space of the matrix whose rows
    are the conjugated channels of every other UE at that AP, so any lifted
    precoder w = basis @ w_hat creates exactly zero multiuser interference.
    """
    M, K, n_tx = config.M, config.K, config.n_tx
    basis: list[list[np.ndarray]] = []
    h_hat: list[list[np.ndarray]] = []
    a_hat: list[list[np.ndarray]] = []
    for m in range(M):
        brow, hrow, arow = [], [], []
        for k in range(K):
            P = nullspace_basis(interference_matrix(channels, m, k), n_tx)
            brow.append(P)
            hrow.append(P.conj().T @ channels[m][k])
            arow.append(P.conj().T @ geometry.a_tx[m])
        basis.append(brow)
        h_hat.append(hrow)
        a_hat.append(arow)
    return NullspaceData(basis, h_hat, a_hat)
