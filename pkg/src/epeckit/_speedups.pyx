# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels for sparse-monomial evaluation.

These are the hot inner loops of the piece solvers and the brute-force
oracles: single-point evaluation, batched evaluation over many points, and
gradient evaluation. Semantics must match epeckit._fallback exactly.
"""

import numpy as np

cimport numpy as cnp


def eval_point(double[::1] coeffs, long[:, ::1] exps, double[::1] point):
    """Evaluate sum_t coeffs[t] * prod_v point[v]**exps[t, v]."""
    cdef Py_ssize_t t, v, e, k
    cdef Py_ssize_t nt = coeffs.shape[0]
    cdef Py_ssize_t nv = exps.shape[1]
    cdef double acc = 0.0, mono, base, pw
    for t in range(nt):
        mono = coeffs[t]
        for v in range(nv):
            e = exps[t, v]
            if e == 0:
                continue
            base = point[v]
            pw = 1.0
            for k in range(e):
                pw *= base
            mono *= pw
            if mono == 0.0:
                break
        acc += mono
    return acc


def eval_batch(double[::1] coeffs, long[:, ::1] exps,
               double[:, ::1] points, double[::1] out):
    """Evaluate the polynomial at each row of `points` into `out`."""
    cdef Py_ssize_t t, v, e, k, i
    cdef Py_ssize_t nt = coeffs.shape[0]
    cdef Py_ssize_t nv = exps.shape[1]
    cdef Py_ssize_t np_ = points.shape[0]
    cdef double acc, mono, base, pw
    for i in range(np_):
        acc = 0.0
        for t in range(nt):
            mono = coeffs[t]
            for v in range(nv):
                e = exps[t, v]
                if e == 0:
                    continue
                base = points[i, v]
                pw = 1.0
                for k in range(e):
                    pw *= base
                mono *= pw
                if mono == 0.0:
                    break
            acc += mono
        out[i] = acc


def eval_grad(double[::1] coeffs, long[:, ::1] exps,
              double[::1] point, double[::1] out):
    """Gradient of the polynomial at `point` into `out` (length = arity).

    Zero components of `point` are handled exactly: a term contributes to
    grad[v] iff every other variable with positive exponent is nonzero and
    exps[t, v] >= 1 (with the z**0 = 1 convention).
    """
    cdef Py_ssize_t t, v, u, e, k
    cdef Py_ssize_t nt = coeffs.shape[0]
    cdef Py_ssize_t nv = exps.shape[1]
    cdef double prod_nz, base, pw, contrib
    cdef Py_ssize_t nzeros, zero_var
    for v in range(nv):
        out[v] = 0.0
    for t in range(nt):
        # product over nonzero-valued variables; count zero-valued ones
        prod_nz = coeffs[t]
        nzeros = 0
        zero_var = -1
        for v in range(nv):
            e = exps[t, v]
            if e == 0:
                continue
            base = point[v]
            if base == 0.0:
                nzeros += 1
                zero_var = v
                if nzeros > 1:
                    break
                continue
            pw = 1.0
            for k in range(e):
                pw *= base
            prod_nz *= pw
        if nzeros > 1:
            continue  # every partial keeps at least one zero factor
        if nzeros == 1:
            # only d/d(zero_var) survives, and only when its exponent is 1
            if exps[t, zero_var] == 1:
                out[zero_var] += prod_nz
            continue
        for v in range(nv):
            e = exps[t, v]
            if e == 0:
                continue
            base = point[v]
            # prod_nz includes base**e; divide one power out
            contrib = e * prod_nz / base
            out[v] += contrib
