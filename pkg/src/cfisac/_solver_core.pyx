# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled kernel for the dual bisection of the blockwise subproblem.

Twin of ``_solver_numpy.solve_packed``; identical contract, explicit loops.
"""
import numpy as np

cimport numpy as cnp
from libc.math cimport sqrt

cnp.import_array()


cdef double _eval(const double complex[::1] c, const double complex[::1] a,
                  const cnp.int64_t[::1] starts, const cnp.int64_t[::1] ends,
                  const double[::1] inv_q, const cnp.int64_t[::1] grp,
                  const double[::1] bounds, double const_term, double nu,
                  double[::1] s_grp, double[::1] t_grp, double[::1] rea_b,
                  double complex[::1] x_out, bint want_x):
    cdef Py_ssize_t b, i, g
    cdef Py_ssize_t n_blocks = starts.shape[0]
    cdef Py_ssize_t n_groups = bounds.shape[0]
    cdef double complex ct
    cdef double n2, re, value, scale
    for g in range(n_groups):
        s_grp[g] = 0.0
    for b in range(n_blocks):
        n2 = 0.0
        re = 0.0
        for i in range(starts[b], ends[b]):
            ct = c[i] + nu * a[i]
            n2 += ct.real * ct.real + ct.imag * ct.imag
            re += a[i].real * ct.real + a[i].imag * ct.imag
        rea_b[b] = re
        s_grp[grp[b]] += n2 * inv_q[b]
    for g in range(n_groups):
        if s_grp[g] > 0.0:
            t_grp[g] = sqrt(bounds[g] / s_grp[g])
        else:
            t_grp[g] = 0.0
    value = const_term
    for b in range(n_blocks):
        value += t_grp[grp[b]] * inv_q[b] * rea_b[b]
    if want_x:
        for b in range(n_blocks):
            scale = t_grp[grp[b]] * inv_q[b]
            for i in range(starts[b], ends[b]):
                x_out[i] = scale * (c[i] + nu * a[i])
    return value


def solve_packed(const double complex[::1] c_flat,
                 const double complex[::1] a_flat,
                 const cnp.int64_t[::1] starts,
                 const double[::1] q_block,
                 const cnp.int64_t[::1] group_block,
                 const double[::1] bounds,
                 double const, double t, double tol=1e-10,
                 int max_grow=400, int max_bisect=200):
    """Smallest nu >= 0 whose matched-filter point meets the linear bound.

    Same contract as the NumPy twin: assumes V(0) < t <= V_max and returns
    ``(x_flat, nu, ok)``.
    """
    cdef Py_ssize_t n_elem = c_flat.shape[0]
    cdef Py_ssize_t n_blocks = starts.shape[0]
    cdef Py_ssize_t n_groups = bounds.shape[0]
    cdef Py_ssize_t b
    cdef cnp.ndarray ends_arr = np.empty(n_blocks, dtype=np.int64)
    cdef cnp.int64_t[::1] ends = ends_arr
    for b in range(n_blocks - 1):
        ends[b] = starts[b + 1]
    ends[n_blocks - 1] = n_elem
    cdef cnp.ndarray inv_q_arr = np.zeros(n_blocks)
    cdef double[::1] inv_q = inv_q_arr
    for b in range(n_blocks):
        if q_block[b] > 0.0:
            inv_q[b] = 1.0 / q_block[b]
    cdef cnp.ndarray x_arr = np.empty(n_elem, dtype=np.complex128)
    cdef double complex[::1] x_out = x_arr
    cdef cnp.ndarray s_arr = np.empty(n_groups)
    cdef cnp.ndarray tg_arr = np.empty(n_groups)
    cdef cnp.ndarray rea_arr = np.empty(n_blocks)
    cdef double[::1] s_grp = s_arr
    cdef double[::1] t_grp = tg_arr
    cdef double[::1] rea_b = rea_arr

    cdef double lo = 0.0
    cdef double hi = 1.0
    cdef double value, mid
    cdef bint ok = False
    cdef int it
    for it in range(max_grow):
        value = _eval(c_flat, a_flat, starts, ends, inv_q, group_block,
                      bounds, const, hi, s_grp, t_grp, rea_b, x_out, False)
        if value >= t:
            ok = True
            break
        lo = hi
        hi *= 4.0
    if not ok:
        return None, float("inf"), False
    for it in range(max_bisect):
        if hi - lo <= tol * max(1.0, hi):
            break
        mid = 0.5 * (lo + hi)
        value = _eval(c_flat, a_flat, starts, ends, inv_q, group_block,
                      bounds, const, mid, s_grp, t_grp, rea_b, x_out, False)
        if value >= t:
            hi = mid
        else:
            lo = mid
    _eval(c_flat, a_flat, starts, ends, inv_q, group_block,
          bounds, const, hi, s_grp, t_grp, rea_b, x_out, True)
    return x_arr, hi, True
