"""Independent first-order oracle for the linear-objective QCQP.

Maximizes 2 Re(sum_b c_b^H x_b) over complex blocks x_b subject to disjoint
weighted power groups sum_{b in g} q_b ||x_b||^2 <= P_g and one halfspace
Re(sum_b a_b^H x_b) + const >= t.

Method: projected-gradient ascent with Krasnoselskii-Mann averaging. For a
linear objective, fixed points of x -> P_C(x + eta c) are exactly the
maximizers over the convex set C for every eta > 0, so the averaged
iteration converges without step-size tuning subtleties. The projection
onto C (intersection of group ellipsoids and the halfspace) is computed by
Dykstra's algorithm from exact per-set projections:

- group ellipsoid: x_b = y_b / (1 + lam q_b) with lam >= 0 solving
  sum q_b ||y_b||^2 / (1 + lam q_b)^2 = P_g (monotone scalar root, bisection);
- halfspace: y + a (tau - Re(a^H y)) / ||a||^2 when violated.

Deliberately shares no code or algebra with the production solver: no dual
variables, no KKT system, no closed-form matched-filter structure.
"""
from __future__ import annotations

import numpy as np


def _project_group(y: np.ndarray, q: np.ndarray, offsets: list[tuple[int, int]],
                   bound: float) -> np.ndarray:
    """Exact projection onto sum_b q_b ||x_b||^2 <= bound (blocks of y)."""
    norms2 = np.array([np.vdot(y[s:e], y[s:e]).real for s, e in offsets])
    if float(q @ norms2) <= bound:
        return y
    # root-find lam: phi(lam) = sum q ||y_b||^2/(1+lam q)^2 = bound, phi decreasing
    lo, hi = 0.0, 1.0
    def phi(lam):
        return float(np.sum(q * norms2 / (1.0 + lam * q) ** 2))
    while phi(hi) > bound:
        hi *= 2.0
        if hi > 1e18:
            break
    for _ in range(72):
        mid = 0.5 * (lo + hi)
        if phi(mid) > bound:
            lo = mid
        else:
            hi = mid
    lam = hi
    out = y.copy()
    for (s, e), qb in zip(offsets, q):
        out[s:e] = y[s:e] / (1.0 + lam * qb)
    return out


def _project_halfspace(y: np.ndarray, a: np.ndarray, tau: float) -> np.ndarray:
    """Exact projection onto Re(a^H x) >= tau."""
    val = float(np.vdot(a, y).real)
    if val >= tau:
        return y
    an2 = float(np.vdot(a, a).real)
    if an2 == 0.0:
        return y  # unreachable halfspace handled by the caller's feasibility check
    return y + a * ((tau - val) / an2)


class OracleProblem:
    """Flat-vector view of one subproblem instance.

    c, a: concatenated complex vectors (a may be None for no linear constraint).
    block_offsets: (start, end) per block in the flat vector.
    groups: list of (block index list, weight array, bound).
    const, t: linear constraint constant and threshold.
    """

    def __init__(self, c_blocks, groups, a_blocks=None, t=None, const=0.0):
        self.block_offsets = []
        pos = 0
        for c in c_blocks:
            self.block_offsets.append((pos, pos + len(c)))
            pos += len(c)
        self.dim = pos
        self.c = np.concatenate([np.asarray(c, dtype=complex) for c in c_blocks])
        if a_blocks is None:
            self.a = None
        else:
            self.a = np.concatenate([np.asarray(a, dtype=complex) for a in a_blocks])
        self.groups = []
        for idxs, weights, bound in groups:
            offs = [self.block_offsets[b] for b in idxs]
            self.groups.append((offs, np.asarray(weights, dtype=float), float(bound)))
        self.t = t
        self.const = const

    def objective(self, x: np.ndarray) -> float:
        return 2.0 * float(np.vdot(self.c, x).real)

    def feasibility_violation(self, x: np.ndarray) -> float:
        viol = 0.0
        for offs, q, bound in self.groups:
            pw = sum(qb * float(np.vdot(x[s:e], x[s:e]).real)
                     for (s, e), qb in zip(offs, q))
            viol = max(viol, pw - bound)
        if self.t is not None and self.a is not None:
            viol = max(viol, self.t - (float(np.vdot(self.a, x).real) + self.const))
        return viol

    def project(self, y: np.ndarray, cycles: int = 300, tol: float = 1e-12) -> np.ndarray:
        """Dykstra projection onto the intersection of all constraint sets."""
        sets: list = [("group", g) for g in self.groups]
        if self.t is not None and self.a is not None:
            sets.append(("half", None))
        x = y.copy()
        corrections = [np.zeros_like(y) for _ in sets]
        for _ in range(cycles):
            x_prev = x.copy()
            for i, (kind, payload) in enumerate(sets):
                z = x + corrections[i]
                if kind == "group":
                    offs, q, bound = payload
                    x_new = _project_group(z, q, offs, bound)
                else:
                    x_new = _project_halfspace(z, self.a, self.t - self.const)
                corrections[i] = z - x_new
                x = x_new
            if np.linalg.norm(x - x_prev) <= tol * max(1.0, np.linalg.norm(x)):
                break
        return x


def solve_oracle(c_blocks, groups, a_blocks=None, t=None, const=0.0,
                 max_iter: int = 100_000, seed: int = 0):
    """Run the averaged projected-gradient oracle; returns (x_blocks, objective).

    Step sizes decrease over stages; each stage runs KM-averaged iterations
    x <- x/2 + P_C(x + eta c)/2 until the update stalls.
    """
    prob = OracleProblem(c_blocks, groups, a_blocks, t, const)
    rng = np.random.default_rng(seed)
    x = prob.project(rng.standard_normal(prob.dim) * 1e-3
                     + 1j * rng.standard_normal(prob.dim) * 1e-3)
    scale = np.sqrt(sum(b for _, _, b in prob.groups))
    cnorm = np.linalg.norm(prob.c)
    eta0 = scale / (cnorm + 1e-30) if cnorm > 0 else 1.0
    iters_left = max_iter
    for stage in range(6):
        eta = eta0 * (0.25 ** stage)
        stall = 0
        while iters_left > 0:
            iters_left -= 1
            x_new = 0.5 * x + 0.5 * prob.project(x + eta * prob.c)
            moved = np.linalg.norm(x_new - x)
            x = x_new
            if moved <= 3e-11 * max(1.0, np.linalg.norm(x)):
                stall += 1
                if stall >= 2:
                    break
            else:
                stall = 0
        if iters_left <= 0:
            break
    x = prob.project(x)
    blocks = [x[s:e].copy() for s, e in prob.block_offsets]
    return blocks, prob.objective(x)
