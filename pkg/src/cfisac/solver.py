"""Blockwise QCQP solver for the convex MM surrogate subproblems.

Maximizes a real-linear objective ``2 Re(sum_b c_b^H x_b)`` over complex
variable blocks subject to disjoint weighted power groups
``sum_b q_b ||x_b||^2 <= P_g`` and at most one real-linear inequality
``Re(sum_b a_b^H x_b) + const >= t``.

The structure admits a direct KKT method: stationarity gives
``x_b = (c_b + nu a_b) / (mu_g q_b)`` with per-group ``mu_g`` available in
closed form from the power equalities, leaving a one-dimensional bisection
on ``nu``. The hot bisection loop lives in a compiled extension
(``_solver_core``) with a pure NumPy twin (``_solver_numpy``); the import
below picks the compiled one when available, or honours ``CFISAC_PURE=1``.
"""
import os
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import _solver_numpy

if os.environ.get("CFISAC_PURE") == "1":
    _core = None
else:
    try:
        from . import _solver_core as _core
    except ImportError:
        _core = None

OPTIMAL = "Optimal"
INFEASIBLE = "Infeasible"
DEGENERATE = "Degenerate"

DUAL_GAP_TOL = 1e-10
CERT_TOL = 1e-9
ACTIVE_TOL = 1e-9


def core_backend():
    """Name of the kernel backend selected at import ('cython' or 'numpy')."""
    return "numpy" if _core is None else "cython"


@dataclass(frozen=True)
class QuadGroup:
    """One power constraint sum_b q_b ||x_b||^2 <= bound over its blocks."""

    blocks: tuple
    weights: tuple
    bound: float


@dataclass(frozen=True)
class LinearConstraint:
    """Re(sum_b a_b^H x_b) + const >= t over all blocks."""

    a: list
    t: float
    const: float = 0.0


@dataclass(frozen=True)
class SubproblemSpec:
    """Instance data: objective blocks, power groups, optional linear bound."""

    c: list
    quad_groups: list
    lin: Optional[LinearConstraint] = None


@dataclass
class SolverReport:
    x: list
    objective: float
    status: str
    kkt_residual: float
    active_constraints: frozenset
    nu: float
    mu: tuple


class _Packed:
    """Flat-array view of a SubproblemSpec plus block bookkeeping."""

    def __init__(self, spec):
        c_blocks = [np.ascontiguousarray(np.asarray(cb).ravel(), dtype=complex)
                    for cb in spec.c]
        n_blocks = len(c_blocks)
        if n_blocks == 0:
            raise ValueError("spec has no variable blocks")
        dims = np.array([cb.shape[0] for cb in c_blocks], dtype=np.int64)
        self.dims = dims
        self.starts = np.concatenate(([0], np.cumsum(dims[:-1]))).astype(np.int64)
        self.c_flat = np.concatenate(c_blocks)
        self.q = np.zeros(n_blocks)
        self.group = np.full(n_blocks, -1, dtype=np.int64)
        self.bounds = np.array([g.bound for g in spec.quad_groups], dtype=float)
        for g_idx, g in enumerate(spec.quad_groups):
            if len(g.blocks) != len(g.weights):
                raise ValueError("group blocks and weights length mismatch")
            if not g.bound > 0:
                raise ValueError("power bound must be positive")
            for b, w in zip(g.blocks, g.weights):
                if w < 0:
                    raise ValueError("quadratic weights must be nonnegative")
                if self.group[b] != -1:
                    raise ValueError(f"block {b} appears in multiple groups")
                self.group[b] = g_idx
                self.q[b] = w
        if np.any(self.group < 0):
            raise ValueError("every block must belong to a quadratic group")
        if spec.lin is not None:
            a_blocks = [np.ascontiguousarray(np.asarray(ab).ravel(), dtype=complex)
                        for ab in spec.lin.a]
            if len(a_blocks) != n_blocks:
                raise ValueError("linear constraint must cover every block")
            if any(ab.shape[0] != d for ab, d in zip(a_blocks, dims)):
                raise ValueError("linear constraint block dims mismatch")
            self.a_flat = np.concatenate(a_blocks)
            self.t = float(spec.lin.t)
            self.const = float(spec.lin.const)
            self.has_lin = True
        else:
            self.a_flat = np.zeros_like(self.c_flat)
            self.t = 0.0
            self.const = 0.0
            self.has_lin = False
        self.blk_of_elem = np.repeat(np.arange(n_blocks), dims)
        self.inv_q = np.zeros(n_blocks)
        pos = self.q > 0
        self.inv_q[pos] = 1.0 / self.q[pos]
        # zero-weight blocks carry no objective or constraint data
        for b in np.nonzero(~pos)[0]:
            sl = slice(self.starts[b], self.starts[b] + dims[b])
            if np.any(self.c_flat[sl] != 0) or np.any(self.a_flat[sl] != 0):
                raise ValueError(
                    f"block {b} has zero quadratic weight but nonzero data")

    def block_norms(self, flat):
        mags = flat.real ** 2 + flat.imag ** 2
        return np.sqrt(np.add.reduceat(mags, self.starts))

    def matched_point(self, v_flat):
        """Power-scaled matched filter of an arbitrary coefficient vector.

        Returns (x_flat, t_grp) with x_b = t_g v_b / q_b and each group with
        nonzero coefficients on its power boundary.
        """
        norm2_b = np.add.reduceat(v_flat.real ** 2 + v_flat.imag ** 2,
                                  self.starts)
        s_grp = np.bincount(self.group, weights=norm2_b * self.inv_q,
                            minlength=self.bounds.shape[0])
        t_grp = np.zeros_like(s_grp)
        live = s_grp > 0
        t_grp[live] = np.sqrt(self.bounds[live] / s_grp[live])
        scale_b = t_grp[self.group] * self.inv_q
        return v_flat * scale_b[self.blk_of_elem], t_grp

    def lin_value(self, x_flat):
        return self.const + float(np.vdot(self.a_flat, x_flat).real)

    def split(self, x_flat):
        return [x_flat[s:s + d].copy()
                for s, d in zip(self.starts, self.dims)]


def _mu_from(packed, nu):
    """Closed-form group multipliers at a given nu (1/t_g on live groups)."""
    ct = packed.c_flat + nu * packed.a_flat
    _, t_grp = packed.matched_point(ct)
    mu = np.zeros_like(t_grp)
    live = t_grp > 0
    mu[live] = 1.0 / t_grp[live]
    return tuple(mu)


def _active_set(packed, x_flat, nu):
    names = set()
    pw_b = packed.q * np.add.reduceat(
        x_flat.real ** 2 + x_flat.imag ** 2, packed.starts)
    pw_grp = np.bincount(packed.group, weights=pw_b,
                         minlength=packed.bounds.shape[0])
    for g_idx, (pw, bound) in enumerate(zip(pw_grp, packed.bounds)):
        if pw >= bound * (1.0 - ACTIVE_TOL):
            names.add(f"quad[{g_idx}]")
    if packed.has_lin:
        val = packed.lin_value(x_flat)
        tight = abs(val - packed.t) <= ACTIVE_TOL * max(1.0, abs(packed.t))
        if nu > 0 or tight:
            names.add("lin")
    return frozenset(names)


def _report(spec, packed, x_flat, status, nu, mu):
    x = packed.split(x_flat)
    objective = 2.0 * float(np.vdot(packed.c_flat, x_flat).real)
    if status == INFEASIBLE or not np.isfinite(nu):
        kkt = float("nan")
    else:
        kkt = kkt_residual(spec, x, mu, nu)
    return SolverReport(
        x=x, objective=objective, status=status, kkt_residual=kkt,
        active_constraints=_active_set(packed, x_flat, nu),
        nu=nu, mu=mu,
    )


def solve(spec, force_numpy=False):
    """Global maximizer of the linear objective over the feasible set.

    Returns a SolverReport whose status is Optimal, Degenerate (zero
    objective vectors; minimum-norm feasible point returned) or Infeasible
    (linear threshold exceeds its analytic maximum over the power ball).
    """
    packed = _Packed(spec)
    cmax = float(packed.block_norms(packed.c_flat).max())
    zeros = np.zeros_like(packed.c_flat)

    if not packed.has_lin:
        if cmax == 0.0:
            return _report(spec, packed, zeros, DEGENERATE, 0.0,
                           (0.0,) * len(packed.bounds))
        x_flat, _ = packed.matched_point(packed.c_flat)
        return _report(spec, packed, x_flat, OPTIMAL, 0.0, _mu_from(packed, 0.0))

    # linear constraint present: check the unconstrained point first
    if cmax == 0.0:
        x0 = zeros
    else:
        x0, _ = packed.matched_point(packed.c_flat)
    v0 = packed.lin_value(x0)
    if v0 >= packed.t:
        status = DEGENERATE if cmax == 0.0 else OPTIMAL
        return _report(spec, packed, x0, status, 0.0, _mu_from(packed, 0.0))

    # need the constraint: certificate bound first
    x_max, _ = packed.matched_point(packed.a_flat)
    v_max = packed.lin_value(x_max)
    if v_max < packed.t - CERT_TOL * max(1.0, abs(packed.t)):
        return _report(spec, packed, x_max, INFEASIBLE, float("inf"),
                       (0.0,) * len(packed.bounds))

    if cmax == 0.0:
        # zero objective, constraint requires a nonzero point: scale the
        # maximum-attainment direction down to the minimum satisfying it
        rho = (packed.t - packed.const) / (v_max - packed.const)
        x_flat = rho * x_max
        return _report(spec, packed, x_flat, DEGENERATE, 0.0,
                       (0.0,) * len(packed.bounds))

    kernel = _solver_numpy.solve_packed if (force_numpy or _core is None) \
        else _core.solve_packed
    x_flat, nu, ok = kernel(
        packed.c_flat, packed.a_flat, packed.starts, packed.q, packed.group,
        packed.bounds, packed.const, packed.t, DUAL_GAP_TOL)
    if not ok:
        # threshold sits at the supremum: return the attaining point
        return _report(spec, packed, x_max, OPTIMAL, float("inf"),
                       _mu_from_max(packed))
    return _report(spec, packed, x_flat, OPTIMAL, nu, _mu_from(packed, nu))


def _mu_from_max(packed):
    _, t_grp = packed.matched_point(packed.a_flat)
    mu = np.zeros_like(t_grp)
    live = t_grp > 0
    mu[live] = 1.0 / t_grp[live]
    return tuple(mu)


def max_linear_point(spec):
    """Feasible point attaining the analytic maximum of the linear form.

    Each group is the power-scaled matched filter of its a-blocks; this is
    the best-effort target when the threshold itself is unreachable.
    """
    packed = _Packed(spec)
    if not packed.has_lin:
        raise ValueError("spec has no linear constraint")
    x_flat, _ = packed.matched_point(packed.a_flat)
    return packed.split(x_flat)


def kkt_residual(spec, x, mu, nu=0.0):
    """Max blockwise stationarity norm plus feasibility and slackness terms.

    Stationarity per block is ``c_b + nu a_b - mu_g q_b x_b``; the returned
    value also folds in primal violations, complementary slackness and dual
    sign violations, so an exact KKT point scores ~0.
    """
    lin = spec.lin
    nu = float(nu)
    res = max(0.0, -nu)
    for g_idx, g in enumerate(spec.quad_groups):
        mg = float(mu[g_idx])
        res = max(res, -mg)
        pw = 0.0
        for b, w in zip(g.blocks, g.weights):
            xb = np.asarray(x[b]).ravel()
            cb = np.asarray(spec.c[b]).ravel()
            ab = np.asarray(lin.a[b]).ravel() if lin is not None else 0.0
            grad = cb + nu * ab - mg * w * xb
            res = max(res, float(np.linalg.norm(grad)))
            pw += w * float(np.vdot(xb, xb).real)
        res = max(res, pw - g.bound, abs(mg * (pw - g.bound)))
    if lin is not None:
        val = lin.const + sum(float(np.vdot(np.asarray(lin.a[b]).ravel(),
                                            np.asarray(x[b]).ravel()).real)
                              for b in range(len(x)))
        res = max(res, lin.t - val, abs(nu * (val - lin.t)))
    return res
