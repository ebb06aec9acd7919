"""Two-stage distributed beamforming: local AP solves, central weights, exchange.

Each exchange iteration runs M independent local updates (one per transmit
AP, consuming only that AP's projected channels plus the central feedback)
followed by one central update of the cross-AP weights. Both stages maximize
the same delivered-signal surrogate under per-AP power and a linearized
sensing constraint; messages are counted so fronthaul load is measured, not
assumed.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .config import SystemConfig
from .errors import GlobalInfeasible
from .model import (
    STREAM_PRECODER_INIT,
    SensingGeometry,
    draw_channels,
    sensing_geometry,
    substream,
)
from .nullspace import NullspaceData, project
from .solver import (
    INFEASIBLE,
    LinearConstraint,
    QuadGroup,
    SubproblemSpec,
    max_linear_point,
    solve,
)


@dataclass
class PrecoderState:
    """Design variables of the two-stage factorization.

    w_hat[m][k]: local precoder in null-space coordinates.
    delta: (M, K) complex central weights; the transmitted precoder is
    f_{m,k} = delta[m,k] * basis[m][k] @ w_hat[m][k].
    """

    w_hat: list
    delta: np.ndarray

    def lift(self, data: NullspaceData) -> list:
        """Full-dimension per-AP precoding matrices F_m of shape (n_tx, K)."""
        out = []
        for m in range(len(self.w_hat)):
            cols = [self.delta[m, k] * (data.basis[m][k] @ self.w_hat[m][k])
                    for k in range(len(self.w_hat[m]))]
            out.append(np.stack(cols, axis=1))
        return out


@dataclass(frozen=True)
class APReport:
    """Uplink message of one AP: equivalent channels and precoder powers.

    z[k] = h_hat^H w_hat (communication), g[k] = a_hat^H w_hat (sensing),
    wpow[k] = ||w_hat||^2. Three complex scalars per (m, k) on the wire.
    """

    z: np.ndarray
    g: np.ndarray
    wpow: np.ndarray
    status: str
    fallback: bool
    objective: float


@dataclass(frozen=True)
class CUReport:
    """Downlink message for one AP: its weight row plus network-wide terms.

    alpha_all[i, k] = delta[i, k] * z[i, k] and beta_all[i, k] =
    delta[i, k] * g[i, k] are recomputed from the freshest uplink values;
    the unique scalar content per iteration is delta, alpha, beta (3MK).
    """

    delta: np.ndarray
    alpha_all: np.ndarray
    beta_all: np.ndarray
    status: str
    fallback: bool
    objective: float


@dataclass(frozen=True)
class IterationRecord:
    """Metrics taken after the central stage of one exchange iteration."""

    sinr: np.ndarray
    sum_sinr: float
    ssnr: float
    local_status: tuple
    local_fallback: tuple
    local_objective: tuple
    cu_status: str
    cu_fallback: bool
    cu_objective: float
    power_slack: np.ndarray
    sensing_slack: float

    @property
    def any_fallback(self) -> bool:
        return self.cu_fallback or any(self.local_fallback)


@dataclass
class RunRecord:
    """Per-iteration metrics plus measured fronthaul load of one run."""

    iterations: list = field(default_factory=list)
    fronthaul_scalars: int = 0
    method: str = "tsdba"

    @property
    def n_iter(self) -> int:
        return len(self.iterations)

    @property
    def any_fallback(self) -> bool:
        return any(rec.any_fallback for rec in self.iterations)

    def series(self, name: str) -> np.ndarray:
        return np.array([getattr(rec, name) for rec in self.iterations])


@dataclass(frozen=True)
class APLocalView:
    """Everything AP m may consume: own projections and config constants.

    sense_w_all is config-derived (target geometry), available everywhere;
    no other AP's channels or precoders appear here.
    """

    m: int
    h_hat: list
    a_hat: list
    sense_w_all: np.ndarray
    p_max: float
    t_sens: float
    sqrt_q: float

    @property
    def K(self) -> int:
        return len(self.h_hat)


def _norm_q(config: SystemConfig) -> float:
    return float(np.sqrt(config.M * config.N * config.K))


def init_credit_value(config: SystemConfig, geometry: SensingGeometry) -> np.ndarray:
    """First-iteration sensing credit per (m, k): the assumed g cache.

    "balanced" splits the linearized sensing budget equally over the M*K
    precoders, so the assumed network contribution meets the threshold with
    equality under delta = 1. "nominal" applies the flat credit
    (1/M)*sqrt(delta_tilde/K) regardless of the constraint weights, which
    over-promises whenever sum_n sigma_mn gamma_n deviates from sqrt(M N)
    and can start the exchange from an unrecoverable deficit.
    """
    t_sens = np.sqrt(geometry.delta_tilde)
    if config.init_credit == "nominal":
        value = np.full((config.M, config.K),
                        t_sens / (config.M * np.sqrt(config.K)))
    else:
        sw = geometry.sense_weight
        value = np.repeat(
            (t_sens * _norm_q(config) / (config.M * config.K * sw))[:, None],
            config.K, axis=1)
    return value.astype(complex)


def init_state(config: SystemConfig, data: NullspaceData,
               geometry: SensingGeometry, trial: int = 0):
    """Random feasible starting point plus the assumed first CU feedback.

    w_hat entries are i.i.d. complex Gaussian, jointly scaled per AP so the
    AP transmits exactly at its budget under delta = 1; the z cache starts
    at zero and the g cache at the configured first-iteration credit.
    """
    w_hat = []
    for m in range(config.M):
        row = []
        for k in range(config.K):
            rng = substream(config.seed, STREAM_PRECODER_INIT, trial, m, k)
            dim = data.basis[m][k].shape[1]
            row.append((rng.standard_normal(dim) + 1j * rng.standard_normal(dim))
                       / np.sqrt(2.0))
        pw = sum(float(np.vdot(w, w).real) for w in row)
        scale = np.sqrt(config.p_max / pw)
        w_hat.append([w * scale for w in row])
    delta = np.ones((config.M, config.K), dtype=complex)
    g0 = init_credit_value(config, geometry)
    z0 = np.zeros((config.M, config.K), dtype=complex)
    state = PrecoderState(w_hat=w_hat, delta=delta)
    feedback = [
        CUReport(delta=delta[m].copy(), alpha_all=delta * z0,
                 beta_all=delta * g0, status="Init", fallback=False,
                 objective=0.0)
        for m in range(config.M)
    ]
    return state, feedback


def build_local_spec(view: APLocalView, w_prev: list, fb: CUReport) -> SubproblemSpec:
    """Surrogate subproblem of AP m: blocks w_hat_{m,k}, k = 0..K-1.

    c_k is the delivered-signal gradient with respect to w_hat_{m,k} at the
    previous iterate; the quadratic group carries weights |delta_{m,k}|^2;
    the linear constraint is the local slice of the linearized sensing
    bound, with the other APs' contribution folded into the constant.
    """
    m, K = view.m, view.K
    delta_m = fb.delta
    sw = view.sense_w_all
    c_blocks, a_blocks = [], []
    weights = []
    for k in range(K):
        h = view.h_hat[k]
        z_prev = np.vdot(h, w_prev[k])
        cross = np.sum(fb.alpha_all[:, k]) - fb.alpha_all[m, k]
        c_blocks.append(abs(delta_m[k]) ** 2 * h * z_prev
                        + np.conj(delta_m[k]) * cross * h)
        a_blocks.append((sw[m] / view.sqrt_q) * np.conj(delta_m[k])
                        * view.a_hat[k])
        weights.append(abs(delta_m[k]) ** 2)
    cross_sense = float(np.sum(sw[:, None] * fb.beta_all).real
                        - np.sum(sw[m] * fb.beta_all[m]).real)
    const = cross_sense / view.sqrt_q
    lin = LinearConstraint(a=a_blocks, t=view.t_sens, const=const)
    group = QuadGroup(tuple(range(K)), tuple(weights), view.p_max)
    return SubproblemSpec(c=c_blocks, quad_groups=[group], lin=lin)


def local_update(view: APLocalView, w_prev: list, fb: CUReport):
    """Solve AP m's surrogate; returns (new w_hat row, APReport).

    When the local surrogate is infeasible (the sensing slice demanded from
    this AP exceeds what its budget can deliver), the AP falls back to the
    point maximizing its sensing contribution at full power and flags the
    iteration, leaving recovery to the central stage.
    """
    spec = build_local_spec(view, w_prev, fb)
    rep = solve(spec)
    if rep.status == INFEASIBLE:
        w_new = max_linear_point(spec)
        fallback = True
    else:
        w_new = rep.x
        fallback = False
    z = np.array([np.vdot(view.h_hat[k], w_new[k]) for k in range(view.K)])
    g = np.array([np.vdot(view.a_hat[k], w_new[k]) for k in range(view.K)])
    wpow = np.array([float(np.vdot(w, w).real) for w in w_new])
    report = APReport(z=z, g=g, wpow=wpow, status=rep.status,
                      fallback=fallback, objective=rep.objective)
    return w_new, report


def build_cu_spec(delta_prev: np.ndarray, reports: list, sense_w_all: np.ndarray,
                  p_max: float, t_sens: float, sqrt_q: float) -> SubproblemSpec:
    """Central surrogate over weight rows delta_{m,.} from fresh uplinks.

    Block m has length K; c_{m,k} is the delivered-signal gradient with
    respect to delta_{m,k}; group m bounds the reported transmit power of
    AP m; the linear constraint is the full linearized sensing bound.
    """
    M, K = delta_prev.shape
    z = np.stack([rep.z for rep in reports])
    wpow = np.stack([rep.wpow for rep in reports])
    g = np.stack([rep.g for rep in reports])
    tot = np.sum(delta_prev * z, axis=0)
    c_blocks, a_blocks = [], []
    for m in range(M):
        cross = tot - delta_prev[m] * z[m]
        c_blocks.append(delta_prev[m] * np.abs(z[m]) ** 2
                        + np.conj(z[m]) * cross)
        a_blocks.append((sense_w_all[m] / sqrt_q) * np.conj(g[m]))
    spec_groups = [QuadGroup((m,), (1.0,), p_max) for m in range(M)]
    # weights wpow_{m,k} vary per entry within a block, so absorb them into
    # the variable: x_{m,k} = sqrt(wpow) * delta_{m,k}
    scale = np.sqrt(wpow)
    live = scale > 0
    c_s = [np.where(live[m], c_blocks[m] / np.where(live[m], scale[m], 1.0), 0.0)
           for m in range(M)]
    a_s = [np.where(live[m], a_blocks[m] / np.where(live[m], scale[m], 1.0), 0.0)
           for m in range(M)]
    lin = LinearConstraint(a=a_s, t=t_sens, const=0.0)
    return SubproblemSpec(c=c_s, quad_groups=spec_groups, lin=lin)


def cu_update(delta_prev: np.ndarray, reports: list, sense_w_all: np.ndarray,
              p_max: float, t_sens: float, sqrt_q: float):
    """Solve the central stage; returns (delta, per-AP CUReports).

    On an infeasible central surrogate the previous weights are kept and
    flagged; alpha/beta are recomputed from the fresh uplink values either
    way so the next local stage linearizes at the true current point.
    """
    spec = build_cu_spec(delta_prev, reports, sense_w_all, p_max, t_sens, sqrt_q)
    rep = solve(spec)
    M, K = delta_prev.shape
    wpow = np.stack([r.wpow for r in reports])
    if rep.status == INFEASIBLE:
        delta = delta_prev.copy()
        fallback = True
    else:
        scale = np.sqrt(wpow)
        delta = np.stack([
            np.where(scale[m] > 0, rep.x[m] / np.where(scale[m] > 0, scale[m], 1.0), 0.0)
            for m in range(M)
        ])
        fallback = False
    z = np.stack([r.z for r in reports])
    g = np.stack([r.g for r in reports])
    alpha = delta * z
    beta = delta * g
    feedback = [
        CUReport(delta=delta[m].copy(), alpha_all=alpha, beta_all=beta,
                 status=rep.status, fallback=fallback, objective=rep.objective)
        for m in range(M)
    ]
    return delta, feedback


def iteration_metrics(config, geometry, delta, z, g, wpow, *,
                      local_status=(), local_fallback=(), local_objective=(),
                      cu_status="", cu_fallback=False, cu_objective=0.0):
    """Assemble one IterationRecord from equivalent-channel quantities.

    Interference is structurally nulled by the projection, so the per-UE
    SINR reduces to the delivered-signal power over the UE noise; the sSNR
    is the true quadratic metric (variances and squared combiner gains).
    """
    ds = np.abs(np.sum(delta * z, axis=0)) ** 2
    sinr = ds / config.sigma_k2
    gam2 = np.abs(geometry.gamma) ** 2
    s2g2 = (geometry.sigma_mn ** 2) @ gam2  # (M,)
    num = float(np.sum(s2g2 * np.sum(np.abs(delta * g) ** 2, axis=1)))
    den = sum(float(np.vdot(c, c).real) for c in geometry.combiner) * config.sigma_n2
    ssnr = num / den
    used = np.sum(np.abs(delta) ** 2 * wpow, axis=1)
    sw = geometry.sense_weight
    lin_val = float(np.sum(sw[:, None] * (delta * g)).real) / _norm_q(config)
    return IterationRecord(
        sinr=sinr,
        sum_sinr=float(np.sum(sinr)),
        ssnr=ssnr,
        local_status=tuple(local_status),
        local_fallback=tuple(local_fallback),
        local_objective=tuple(local_objective),
        cu_status=cu_status,
        cu_fallback=cu_fallback,
        cu_objective=cu_objective,
        power_slack=config.p_max - used,
        sensing_slack=lin_val - np.sqrt(geometry.delta_tilde),
    )


def run_two_stage(config: SystemConfig, trial: int = 0):
    """Full exchange: channels, projection, init, n_iter two-stage rounds.

    Returns (PrecoderState, RunRecord). Raises GlobalInfeasible when the
    central surrogate is infeasible at every iteration, meaning the sensing
    threshold cannot be certified under the power budgets for this draw.
    """
    channels = draw_channels(config, trial)
    geometry = sensing_geometry(config)
    data = project(channels, geometry, config)
    state, feedback = init_state(config, data, geometry, trial)
    record = RunRecord()
    t_sens = float(np.sqrt(geometry.delta_tilde))
    sqrt_q = _norm_q(config)
    views = [
        APLocalView(m=m, h_hat=data.h_hat[m], a_hat=data.a_hat[m],
                    sense_w_all=geometry.sense_weight, p_max=config.p_max,
                    t_sens=t_sens, sqrt_q=sqrt_q)
        for m in range(config.M)
    ]
    cu_feasible_any = False
    for _ in range(config.n_iter):
        reports = []
        for m in range(config.M):
            w_new, rep = local_update(views[m], state.w_hat[m], feedback[m])
            state.w_hat[m] = w_new
            reports.append(rep)
        record.fronthaul_scalars += 3 * config.M * config.K  # z, g, wpow up
        state.delta, feedback = cu_update(
            state.delta, reports, geometry.sense_weight, config.p_max,
            t_sens, sqrt_q)
        record.fronthaul_scalars += 3 * config.M * config.K  # delta, alpha, beta down
        if not feedback[0].fallback:
            cu_feasible_any = True
        record.iterations.append(iteration_metrics(
            config, geometry, state.delta,
            np.stack([r.z for r in reports]),
            np.stack([r.g for r in reports]),
            np.stack([r.wpow for r in reports]),
            local_status=(r.status for r in reports),
            local_fallback=(r.fallback for r in reports),
            local_objective=(r.objective for r in reports),
            cu_status=feedback[0].status,
            cu_fallback=feedback[0].fallback,
            cu_objective=feedback[0].objective))
    if config.n_iter > 0 and not cu_feasible_any:
        raise GlobalInfeasible(
            f"sensing threshold {config.delta_dB} dB unreachable for this draw")
    return state, record
