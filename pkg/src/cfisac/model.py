"""System model: array responses, multipath channels, sensing geometry.

Covers the physical layer shared by every experiment: uniform linear array
steering, narrowband L-path downlink channels with counter-based RNG
substreams, MRC receive combining toward the target, and the linear sensing
threshold derived from the configured dB margin.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import SystemConfig, db_to_linear

# substream ids for counter-based RNG derivation
STREAM_CHANNEL = 1
STREAM_PRECODER_INIT = 2


def substream(seed: int, stream: int, *path: int) -> np.random.Generator:
    """Independent generator for (seed, stream, path...), reproducible per trial."""
    return np.random.default_rng([seed, stream, *path])


def steering(angle_deg: float, n_elem: int, spacing: float = 0.5) -> np.ndarray:
    """Array response of an n_elem ULA toward angle_deg.

    Entry q (0-based) is exp(j 2 pi spacing q sin(angle)); entry 0 is 1 and
    every entry has unit modulus, so the squared norm equals n_elem.
    """
    q = np.arange(n_elem)
    phase = 2.0 * np.pi * spacing * q * np.sin(np.deg2rad(angle_deg))
    return np.exp(1j * phase)


def gen_comm_channel(rng: np.random.Generator, L: int, n_elem: int,
                     spacing: float = 0.5) -> np.ndarray:
    """One narrowband L-path channel between a transmit AP and a UE.

    Sum of L steering vectors with i.i.d. CN(0,1) path gains and path angles
    uniform on (-90, 90) degrees, scaled by 1/sqrt(L) so the expected squared
    norm equals n_elem.
    """
    gains = (rng.standard_normal(L) + 1j * rng.standard_normal(L)) / np.sqrt(2.0)
    angles = rng.uniform(-90.0, 90.0, size=L)
    q = np.arange(n_elem)
    A = np.exp(1j * 2.0 * np.pi * spacing * np.outer(np.sin(np.deg2rad(angles)), q))
    return (gains @ A) / np.sqrt(L)


def draw_channels(config: SystemConfig, trial: int) -> list[list[np.ndarray]]:
    """All M x K downlink channels for one trial, h[m][k] of length n_tx."""
    return [
        [
            gen_comm_channel(
                substream(config.seed, STREAM_CHANNEL, trial, m, k),
                config.L, config.n_tx, config.spacing,
            )
            for k in range(config.K)
        ]
        for m in range(config.M)
    ]


def mrc_combiner(phi_deg: float, n_rx: int, spacing: float = 0.5) -> np.ndarray:
    """Unit-norm receive combiner matched to the target direction."""
    a = steering(phi_deg, n_rx, spacing)
    return a / np.sqrt(n_rx)


def delta_tilde(delta_dB: float, combiners, sigma_n2: float) -> float:
    """Linear sensing threshold sum_n ||g_n||^2 sigma_n^2 10^(delta_dB/10)."""
    comb_pow = sum(float(np.vdot(g, g).real) for g in combiners)
    return comb_pow * sigma_n2 * db_to_linear(delta_dB)


@dataclass(frozen=True)
class SensingGeometry:
    """Target-related quantities fixed by the config.

    a_tx[m]: transmit steering toward the target from AP m (length n_tx).
    combiner[n]: unit-norm receive combiner of rx AP n (MRC toward the target).
    gamma[n]: combiner response combiner[n]^H a_rx(phi_n), equal to sqrt(n_rx).
    sigma_mn: reflection-gain standard deviations, shape (M, N).
    delta_tilde: linear sensing threshold sum_n ||combiner[n]||^2 sigma_n^2 Delta.
    """

    a_tx: tuple[np.ndarray, ...]
    combiner: tuple[np.ndarray, ...]
    gamma: np.ndarray
    sigma_mn: np.ndarray
    delta_tilde: float

    @property
    def sense_weight(self) -> np.ndarray:
        """Per-AP constraint weights sum_n sigma_mn gamma_n, shape (M,)."""
        return self.sigma_mn @ self.gamma.real


def sensing_geometry(config: SystemConfig) -> SensingGeometry:
    """Build steering vectors, MRC combiners and the sensing threshold."""
    a_tx = tuple(steering(t, config.n_tx, config.spacing) for t in config.theta_deg)
    a_rx = [steering(p, config.n_rx, config.spacing) for p in config.phi_deg]
    combiner = tuple(mrc_combiner(p, config.n_rx, config.spacing)
                     for p in config.phi_deg)
    gamma = np.array([np.vdot(g, a) for g, a in zip(combiner, a_rx)])
    sigma_mn = np.full((config.M, config.N), np.sqrt(config.sigma_mn2))
    dt = delta_tilde(config.delta_dB, combiner, config.sigma_n2)
    return SensingGeometry(a_tx, combiner, gamma, sigma_mn, dt)


