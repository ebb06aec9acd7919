"""Pure NumPy kernel for the dual search of the blockwise subproblem.

This is the fallback twin of the compiled extension ``_solver_core``.
Both expose ``solve_packed`` with identical semantics; the public module
``cfisac.solver`` picks one at import time.
"""
import numpy as np


def solve_packed(c_flat, a_flat, starts, q_block, group_block, bounds,
                 const, t, tol=1e-12, max_grow=400, max_bisect=200):
    """Smallest nu >= 0 whose matched-filter point meets the linear bound.

    The caller certifies V(0) < t <= V_max, where V(nu) is the value of
    the Re-linear functional at the per-group power-scaled matched filter
    of c + nu*a. Returns ``(x_flat, nu, ok)``; ``ok`` is False when the
    bracket never reached t (threshold at the supremum), in which case
    ``x_flat`` is None.

    Parameters
    ----------
    c_flat, a_flat : ndarray of complex128
        Concatenated objective and linear-constraint blocks.
    starts : ndarray of int64
        Offset of each block inside the flat vectors.
    q_block : ndarray of float64
        Quadratic weight of each block (zero-weight blocks carry no data).
    group_block : ndarray of int64
        Index of the power group each block belongs to.
    bounds : ndarray of float64
        Power budget of each group.
    const, t : float
        Affine offset and threshold of the linear constraint.
    """
    n_groups = bounds.shape[0]
    n_blocks = starts.shape[0]
    lens = np.diff(np.append(starts, c_flat.shape[0]))
    blk_of_elem = np.repeat(np.arange(n_blocks), lens)
    pos = q_block > 0.0
    inv_q = np.zeros(n_blocks)
    inv_q[pos] = 1.0 / q_block[pos]

    def eval_nu(nu, want_x=False):
        ct = c_flat + nu * a_flat
        norm2_b = np.add.reduceat(ct.real ** 2 + ct.imag ** 2, starts)
        s_grp = np.bincount(group_block, weights=norm2_b * inv_q,
                            minlength=n_groups)
        t_grp = np.zeros(n_groups)
        live = s_grp > 0.0
        t_grp[live] = np.sqrt(bounds[live] / s_grp[live])
        scale_b = t_grp[group_block] * inv_q
        rea_b = np.add.reduceat((np.conj(a_flat) * ct).real, starts)
        value = const + float(scale_b @ rea_b)
        if want_x:
            return value, ct * scale_b[blk_of_elem]
        return value, None

    lo, hi = 0.0, 1.0
    ok = False
    for _ in range(max_grow):
        value, _ = eval_nu(hi)
        if value >= t:
            ok = True
            break
        lo = hi
        hi *= 4.0
    if not ok:
        return None, float("inf"), False
    for _ in range(max_bisect):
        if hi - lo <= tol * max(1.0, hi):
            break
        mid = 0.5 * (lo + hi)
        value, _ = eval_nu(mid)
        if value >= t:
            hi = mid
        else:
            lo = mid
    _, x_flat = eval_nu(hi, want_x=True)
    return x_flat, hi, True
