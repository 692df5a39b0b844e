"""Polyhedral computations shared by the LCP, solver, and certificate layers.

All polyhedra here are in inequality form A z >= b, optionally with an
equality block E z = f. scipy's HiGHS LPs and Lawson-Hanson NNLS do the
heavy lifting; everything is desk scale.
"""

from __future__ import annotations

import itertools

import numpy as np
from scipy.linalg import null_space
from scipy.optimize import linprog, nnls

_BIG = 1e8


def _as_2d(A, ncols):
    A = np.asarray(A, dtype=float)
    if A.size == 0:
        return np.zeros((0, ncols))
    return A.reshape(-1, ncols)


def solve_lp(c, A_ineq, b_ineq, A_eq=None, b_eq=None, bounds=None):
    """min c'z  s.t.  A_ineq z >= b_ineq, A_eq z = b_eq. Returns scipy result."""
    n = len(c)
    A_ub = -_as_2d(A_ineq, n) if A_ineq is not None and len(A_ineq) else None
    b_ub = -np.asarray(b_ineq, dtype=float) if A_ub is not None else None
    kw = {}
    if A_eq is not None and len(A_eq):
        kw["A_eq"] = _as_2d(A_eq, n)
        kw["b_eq"] = np.asarray(b_eq, dtype=float)
    return linprog(
        c,
        A_ub=A_ub,
        b_ub=b_ub,
        bounds=bounds if bounds is not None else [(None, None)] * n,
        method="highs",
        **kw,
    )


def feasible_point(A, b, A_eq=None, b_eq=None):
    """Some point with A z >= b (and equalities), or None if empty."""
    n = A.shape[1] if len(A) else (A_eq.shape[1] if A_eq is not None else 0)
    res = solve_lp(np.zeros(n), A, b, A_eq, b_eq, bounds=[(-_BIG, _BIG)] * n)
    if res.status == 0:
        return res.x
    return None


def chebyshev_center(A, b, box=1e6):
    """(center, radius) of the largest ball inside {A z >= b} with the center
    confined to [-box, box]^n. Keeps the LP bounded and well scaled on
    unbounded regions; the radius is a lower bound on the true inradius.
    """
    A = np.asarray(A, dtype=float)
    m, n = A.shape if A.size else (0, 0)
    if m == 0:
        if n == 0:
            return np.zeros(0), np.inf
        return np.zeros(n), np.inf
    norms = np.linalg.norm(A, axis=1)
    norms[norms == 0] = 1.0
    # variables (z, r): A z - r * ||row|| >= b, 0 <= r <= box
    Ar = np.hstack([A, -norms[:, None]])
    c = np.zeros(n + 1)
    c[-1] = -1.0
    bounds = [(-box, box)] * n + [(0, box)]
    res = linprog(c, A_ub=-Ar, b_ub=-np.asarray(b, dtype=float), bounds=bounds, method="highs")
    if res.status != 0:
        return None, -1.0
    return res.x[:n], float(res.x[n])


def project_point(z0, A, b, A_eq=None, b_eq=None):
    """Euclidean projection of z0 onto {A z >= b, A_eq z = b_eq}.

    Equalities are eliminated first; the inequality-only least-distance
    problem is reduced to NNLS (Lawson & Hanson, ch. 23). Returns None when
    the set is empty.
    """
    z0 = np.asarray(z0, dtype=float)
    n = z0.size
    A = _as_2d(A, n)
    b = np.asarray(b, dtype=float)
    if A_eq is not None and len(A_eq):
        zp, basis = eliminate_equalities(_as_2d(A_eq, n), np.asarray(b_eq, float))
        if zp is None:
            return None
        if basis.shape[1] == 0:
            ok = (A @ zp >= b - 1e-9) if len(A) else True
            return zp if np.all(ok) else None
        # ||z0 - (zp + B u)||: optimal unconstrained u0 = B'(z0 - zp); shift
        # coordinates so the LDP is centered there.
        u0 = basis.T @ (z0 - zp)
        Au = A @ basis if len(A) else np.zeros((0, basis.shape[1]))
        bu = b - A @ zp if len(A) else b
        u = _ldp(Au, bu - Au @ u0) if len(A) else np.zeros(basis.shape[1])
        if u is None:
            return None
        return zp + basis @ (u0 + u)
    if not len(A):
        return z0.copy()
    shift = _ldp(A, b - A @ z0)
    if shift is None:
        return None
    return z0 + shift


def _ldp(G, h):
    """min ||u|| s.t. G u >= h  (Lawson-Hanson LDP-to-NNLS reduction)."""
    m, n = G.shape
    if m == 0:
        return np.zeros(n)
    if np.all(h <= 1e-13):
        return np.zeros(n)
    scale = np.maximum(np.linalg.norm(np.hstack([G, h[:, None]]), axis=1), 1e-12)
    Gs = G / scale[:, None]
    hs = h / scale
    E = np.vstack([Gs.T, hs[None, :]])
    f = np.zeros(n + 1)
    f[n] = 1.0
    u_nnls, _ = nnls(E, f)
    r = E @ u_nnls - f
    if abs(r[n]) < 1e-12:
        return None  # incompatible constraints
    return -r[:n] / r[n]


def eliminate_equalities(E, f, tol=1e-9):
    """Particular solution + orthonormal nullspace basis for E z = f.

    Returns (None, None) when the system is inconsistent.
    """
    E = np.asarray(E, dtype=float)
    f = np.asarray(f, dtype=float)
    if E.size == 0 or E.shape[0] == 0:
        n = E.shape[1] if E.ndim == 2 else 0
        return np.zeros(n), np.eye(n)
    zp, *_ = np.linalg.lstsq(E, f, rcond=None)
    scale = max(1.0, np.abs(f).max(), np.abs(E).max() * max(1.0, np.abs(zp).max()))
    if np.linalg.norm(E @ zp - f, ord=np.inf) > tol * scale:
        return None, None
    basis = null_space(E)
    return zp, basis


def extreme_rays(A, max_subsets=300_000):
    """Extreme rays of the pointed cone {v : A v >= 0} in R^d.

    Combinatorial enumeration: a ray is determined by d-1 independent tight
    rows. Suitable for d <= 8 and a few dozen rows; returns None if the
    subset budget is exceeded. Rays are normalized and deduplicated.
    """
    A = np.asarray(A, dtype=float)
    m, d = A.shape
    if d == 0:
        return []
    if d == 1:
        rays = []
        for v in (np.array([1.0]), np.array([-1.0])):
            if np.all(A @ v >= -1e-10):
                rays.append(v)
        return rays
    from math import comb

    if comb(m, d - 1) > max_subsets:
        return None
    rays = []
    seen = []
    for rows in itertools.combinations(range(m), d - 1):
        sub = A[list(rows)]
        if np.linalg.matrix_rank(sub, tol=1e-10) != d - 1:
            continue
        null = null_space(sub, rcond=1e-10)
        if null.shape[1] != 1:
            continue
        v = null[:, 0]
        for cand in (v, -v):
            if np.all(A @ cand >= -1e-10 * max(1.0, np.abs(A).max())):
                cand = cand / np.linalg.norm(cand)
                if not any(np.linalg.norm(cand - s) < 1e-8 for s in seen):
                    seen.append(cand)
                    rays.append(cand)
    return rays
