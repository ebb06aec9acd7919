"""Centralized MM beamforming baseline: all precoders optimized jointly.

Solves the same null-space-projected design as the two-stage exchange, but
with the per-(m,k) precoders f_hat unfactored (the central weight absorbed,
delta = 1) and every variable updated in one joint surrogate solve per MM
iteration. Serves as the performance and fronthaul reference: it needs the
full projected CSI at the central unit, so its fronthaul cost scales with
the antenna count.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import SystemConfig
from .errors import GlobalInfeasible
from .model import draw_channels, sensing_geometry
from .nullspace import NullspaceData, project
from .solver import (
    INFEASIBLE,
    LinearConstraint,
    QuadGroup,
    SubproblemSpec,
    solve,
)
from .twostage import RunRecord, init_state, iteration_metrics

CONVERGE_REL_TOL = 1e-9
MAX_MM_ITER = 200


@dataclass
class CentralizedState:
    """Joint precoders in null-space coordinates, f_hat[m][k] (delta = 1)."""

    f_hat: list

    def lift(self, data: NullspaceData) -> list:
        out = []
        for m in range(len(self.f_hat)):
            cols = [data.basis[m][k] @ self.f_hat[m][k]
                    for k in range(len(self.f_hat[m]))]
            out.append(np.stack(cols, axis=1))
        return out


def _build_spec(f_hat, data: NullspaceData, sense_w, p_max, t_sens, sqrt_q):
    """Joint surrogate: MK blocks, M power groups, one sensing halfspace."""
    M, K = data.M, data.K
    totals = [sum(np.vdot(data.h_hat[i][k], f_hat[i][k]) for i in range(M))
              for k in range(K)]
    c_blocks, a_blocks, groups = [], [], []
    for m in range(M):
        for k in range(K):
            c_blocks.append(totals[k] * data.h_hat[m][k])
            a_blocks.append((sense_w[m] / sqrt_q) * data.a_hat[m][k])
        groups.append(QuadGroup(tuple(m * K + k for k in range(K)),
                                (1.0,) * K, p_max))
    lin = LinearConstraint(a=a_blocks, t=t_sens, const=0.0)
    return SubproblemSpec(c=c_blocks, quad_groups=groups, lin=lin)


def run_centralized(config: SystemConfig, trial: int = 0,
                    n_mm_iter: int | None = None):
    """Joint MM design; returns (CentralizedState, RunRecord).

    With n_mm_iter=None the MM loop runs until the delivered-signal power
    stops improving by more than a 1e-9 relative step (capped at 200
    iterations), giving the strongest centralized reference; an explicit
    count reproduces a fixed-depth run. The feasible set does not depend on
    the iterate, so infeasibility can only surface at the first solve and
    raises GlobalInfeasible.
    """
    channels = draw_channels(config, trial)
    geometry = sensing_geometry(config)
    data = project(channels, geometry, config)
    init, _ = init_state(config, data, geometry, trial)
    f_hat = [list(row) for row in init.w_hat]
    M, K = config.M, config.K
    t_sens = float(np.sqrt(geometry.delta_tilde))
    sqrt_q = float(np.sqrt(config.M * config.N * config.K))
    sw = geometry.sense_weight
    record = RunRecord(fronthaul_scalars=2 * config.n_tx * M * K,
                       method="centralized")
    delta_one = np.ones((M, K), dtype=complex)
    cap = MAX_MM_ITER if n_mm_iter is None else n_mm_iter
    prev_obj = None
    for it in range(cap):
        spec = _build_spec(f_hat, data, sw, config.p_max, t_sens, sqrt_q)
        rep = solve(spec)
        if rep.status == INFEASIBLE:
            raise GlobalInfeasible(
                f"sensing threshold {config.delta_dB} dB unreachable for this draw")
        for m in range(M):
            for k in range(K):
                f_hat[m][k] = rep.x[m * K + k]
        z = np.array([[np.vdot(data.h_hat[m][k], f_hat[m][k])
                       for k in range(K)] for m in range(M)])
        g = np.array([[np.vdot(data.a_hat[m][k], f_hat[m][k])
                       for k in range(K)] for m in range(M)])
        wpow = np.array([[float(np.vdot(f_hat[m][k], f_hat[m][k]).real)
                          for k in range(K)] for m in range(M)])
        record.iterations.append(iteration_metrics(
            config, geometry, delta_one, z, g, wpow,
            cu_status=rep.status, cu_objective=rep.objective))
        obj = float(np.sum(np.abs(np.sum(z, axis=0)) ** 2))
        if (n_mm_iter is None and prev_obj is not None
                and obj - prev_obj <= CONVERGE_REL_TOL * max(prev_obj, 1e-300)):
            break
        prev_obj = obj
    return CentralizedState(f_hat=f_hat), record
