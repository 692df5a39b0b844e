"""Parametric affine LCP: solve S(x) at fixed x, enumerate the solution map's
polyhedral pieces, and certify single-valuedness.

S(x) = { y >= 0 : M y + N x + q >= 0, y'(M y + N x + q) = 0 }.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .defaults import P_MAX, PIVOT_TOL, TAU_FEAS
from .errors import CapabilityError, SemanticError
from .geometry import chebyshev_center, feasible_point, solve_lp
from .model import Polyhedron


@dataclass(frozen=True)
class ParametricLcp:
    M: np.ndarray
    Nmat: np.ndarray
    q: np.ndarray

    def __init__(self, M, Nmat, q):
        M = np.atleast_2d(np.asarray(M, dtype=float))
        q = np.asarray(q, dtype=float).reshape(-1)
        p = q.shape[0]
        Nmat = np.asarray(Nmat, dtype=float)
        if Nmat.size == 0:
            Nmat = np.zeros((p, 0))
        Nmat = Nmat.reshape(p, -1)
        if p < 1:
            raise SemanticError("LCP dimension must be at least 1")
        if M.shape != (p, p):
            raise SemanticError("LCP matrix M must be p x p")
        if not (np.all(np.isfinite(M)) and np.all(np.isfinite(Nmat)) and np.all(np.isfinite(q))):
            raise SemanticError("LCP data must be finite")
        object.__setattr__(self, "M", M)
        object.__setattr__(self, "Nmat", Nmat)
        object.__setattr__(self, "q", q)

    @property
    def p(self) -> int:
        return self.q.shape[0]

    @property
    def xdim(self) -> int:
        return self.Nmat.shape[1]

    def w(self, y, x) -> np.ndarray:
        return self.M @ y + self.Nmat @ x + self.q

    def residual(self, y, x) -> float:
        """max of nonnegativity and complementarity violations at (y, x)."""
        y = np.asarray(y, dtype=float)
        w = self.w(y, np.asarray(x, dtype=float))
        return float(
            max(
                max(0.0, -np.min(y, initial=0.0)),
                max(0.0, -np.min(w, initial=0.0)),
                abs(float(y @ w)),
            )
        )

    def restrict_x(self, keep_cols, fixed_cols, fixed_vals) -> "ParametricLcp":
        """Fold fixed x-columns into q, keeping the listed columns free."""
        q = self.q.copy()
        if len(fixed_cols):
            q = q + self.Nmat[:, list(fixed_cols)] @ np.asarray(fixed_vals, dtype=float)
        return ParametricLcp(self.M, self.Nmat[:, list(keep_cols)], q)


def _patterns(p):
    for mask in range(1 << p):
        yield tuple(j for j in range(p) if mask >> j & 1)


@dataclass(frozen=True)
class Piece:
    """One complementarity pattern of the solution map.

    On the piece, y restricted to alpha solves the tight rows and the
    complement is zero; when M_aa is invertible this gives y = C x + d.
    Singular-but-consistent patterns carry a nullspace basis (set-valued S)
    and are flagged; inconsistent patterns are dropped by enumerate_pieces.
    """

    alpha: tuple
    C: np.ndarray
    d: np.ndarray
    validity: Polyhedron
    degenerate: bool = False
    nullspace: np.ndarray | None = None

    @property
    def set_valued(self) -> bool:
        return self.nullspace is not None and self.nullspace.shape[1] > 0

    def solution_at(self, x) -> np.ndarray:
        return self.C @ np.asarray(x, dtype=float) + self.d


@dataclass
class LcpSolutions:
    points: list
    continuum: bool = False

    def __iter__(self):
        return iter(self.points)

    def __len__(self):
        return len(self.points)


def _pattern_solution(lcp, alpha, x, tol=TAU_FEAS):
    """Solve one pattern at fixed x. Returns (list of y, continuum flag)."""
    p = lcp.p
    rhs_full = lcp.Nmat @ x + lcp.q
    alpha = list(alpha)
    comp = [j for j in range(p) if j not in alpha]
    y = np.zeros(p)
    continuum = False
    if alpha:
        Maa = lcp.M[np.ix_(alpha, alpha)]
        rhs = -rhs_full[alpha]
        if len(alpha) == Maa.shape[0] and abs(np.linalg.det(Maa)) > PIVOT_TOL:
            ya = np.linalg.solve(Maa, rhs)
        else:
            ya, *_ = np.linalg.lstsq(Maa, rhs, rcond=None)
            scale = max(1.0, float(np.abs(rhs).max(initial=0.0)))
            if np.linalg.norm(Maa @ ya - rhs, ord=np.inf) > 1e-9 * scale:
                return [], False
            nullity = len(alpha) - np.linalg.matrix_rank(Maa, tol=PIVOT_TOL)
            if nullity > 0:
                continuum = True
                if np.min(ya) < -tol:
                    # min-norm representative infeasible; look for any member
                    from scipy.linalg import null_space

                    Z = null_space(Maa, rcond=PIVOT_TOL)
                    A_t = Z
                    b_t = -ya
                    res = solve_lp(np.zeros(Z.shape[1]), A_t, b_t)
                    if res.status != 0:
                        return [], False
                    ya = ya + Z @ res.x
        y[alpha] = ya
    w = lcp.w(y, x)
    if np.min(y, initial=0.0) < -tol or np.min(w, initial=0.0) < -tol:
        return [], False
    if abs(float(y @ w)) > tol:
        return [], False
    return [y], continuum


def lcp_solve(lcp: ParametricLcp, x, tol: float = TAU_FEAS) -> LcpSolutions:
    """All solutions of the LCP at fixed x by exhaustive pattern enumeration."""
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.shape[0] != lcp.xdim:
        raise SemanticError("x dimension does not match the LCP")
    if lcp.p > P_MAX:
        raise CapabilityError(
            f"p={lcp.p} exceeds the exhaustive-enumeration cap {P_MAX}; use lemke_solve"
        )
    points = []
    continuum = False
    for alpha in _patterns(lcp.p):
        sols, cont = _pattern_solution(lcp, alpha, x, tol)
        continuum = continuum or cont
        for y in sols:
            if not any(np.linalg.norm(y - z, ord=np.inf) <= 1e-9 for z in points):
                points.append(y)
    points.sort(key=lambda v: tuple(v))
    return LcpSolutions(points=points, continuum=continuum)


@dataclass
class LemkeResult:
    y: np.ndarray | None
    ray_termination: bool
    iterations: int


def lemke_solve(lcp: ParametricLcp, x, tol: float = TAU_FEAS) -> LemkeResult:
    """Lemke's complementary pivoting with lexicographic anti-cycling.

    Single-solution fallback for larger p. Returns either one complementary
    solution or a secondary-ray report.
    """
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.shape[0] != lcp.xdim:
        raise SemanticError("x dimension does not match the LCP")
    p = lcp.p
    q = lcp.Nmat @ x + lcp.q
    if np.min(q) >= -tol:
        return LemkeResult(y=np.zeros(p), ray_termination=False, iterations=0)

    # Tableau columns: [w_0..w_{p-1} | z_0..z_{p-1} | z0 | rhs | lex block].
    # Lexicographic comparisons use (rhs, B^{-1} rows) ratios, which rules
    # out cycling (the lex block starts as I and tracks B^{-1}).
    T = np.hstack([np.eye(p), -lcp.M, -np.ones((p, 1)), q[:, None], np.eye(p)])
    basis = list(range(p))  # basic variable per row; w_j = j, z_j = p + j
    Z0 = 2 * p
    RHS = 2 * p + 1

    def pivot(row, col):
        T[row] /= T[row, col]
        for i in range(p):
            if i != row and T[i, col] != 0.0:
                T[i] -= T[i, col] * T[row]
        leaving = basis[row]
        basis[row] = col
        return leaving

    def lex_min_row(col):
        best, best_key = None, None
        for i in range(p):
            a = T[i, col]
            if a <= 1e-11:
                continue
            key = tuple(T[i, RHS:] / a)
            if best is None or key < best_key:
                best, best_key = i, key
        return best

    it = 1
    leaving = pivot(int(np.argmin(q)), Z0)
    entering = leaving + p if leaving < p else leaving - p
    while True:
        it += 1
        if it > 10_000:
            raise AssertionError("Lemke pivot cap hit despite lexicographic rule")
        row = lex_min_row(entering)
        if row is None:
            return LemkeResult(y=None, ray_termination=True, iterations=it)
        leaving = pivot(row, entering)
        if leaving == Z0:
            break
        entering = leaving + p if leaving < p else leaving - p

    y = np.zeros(p)
    for i, b in enumerate(basis):
        if p <= b < Z0:
            y[b - p] = T[i, RHS]
    y = np.maximum(y, 0.0)
    assert lcp.residual(y, x) <= max(tol, 1e-7), "Lemke produced an invalid point"
    return LemkeResult(y=y, ray_termination=False, iterations=it)


def enumerate_pieces(lcp: ParametricLcp) -> list:
    """All consistent complementarity pieces with their affine maps and
    validity polyhedra in x. Pieces whose validity region is empty are
    dropped; zero-interior regions are kept but flagged degenerate."""
    if lcp.p > P_MAX:
        raise CapabilityError(f"p={lcp.p} exceeds the enumeration cap {P_MAX}")
    from scipy.linalg import null_space

    p, mtot = lcp.p, lcp.xdim
    pieces = []
    for alpha in _patterns(p):
        comp = [j for j in range(p) if j not in alpha]
        C = np.zeros((p, mtot))
        d = np.zeros(p)
        nullspace = None
        extra_eq_rows = []
        inconsistent = False
        if alpha:
            idx = list(alpha)
            Maa = lcp.M[np.ix_(idx, idx)]
            Na = lcp.Nmat[idx]
            qa = lcp.q[idx]
            if abs(np.linalg.det(Maa)) > PIVOT_TOL:
                Ca = -np.linalg.solve(Maa, Na)
                da = -np.linalg.solve(Maa, qa)
            else:
                # consistency conditions: rows of the left-nullspace of Maa
                # must annihilate (Na x + qa); x-dependent ones restrict the
                # validity region, constant nonzero ones kill the piece.
                U = null_space(Maa.T, rcond=PIVOT_TOL)
                for k in range(U.shape[1]):
                    u = U[:, k]
                    a_row = u @ Na
                    b_val = -float(u @ qa)
                    if np.max(np.abs(a_row), initial=0.0) < 1e-12:
                        if abs(b_val) > 1e-10:
                            inconsistent = True
                            break
                    else:
                        extra_eq_rows.append((a_row, b_val))
                if inconsistent:
                    continue
                Minv = np.linalg.pinv(Maa, rcond=PIVOT_TOL)
                Ca = -Minv @ Na
                da = -Minv @ qa
                ns = null_space(Maa, rcond=PIVOT_TOL)
                if ns.shape[1]:
                    lifted = np.zeros((p, ns.shape[1]))
                    lifted[idx] = ns
                    nullspace = lifted
            C[idx] = Ca
            d[idx] = da
        rows_A, rows_b = [], []
        for j in alpha:  # y_j(x) >= 0
            rows_A.append(C[j])
            rows_b.append(-d[j])
        if comp:  # w rows on the complement must stay nonnegative
            Wc = lcp.M[comp] @ C + lcp.Nmat[comp]
            wc = lcp.M[comp] @ d + lcp.q[comp]
            for r in range(len(comp)):
                rows_A.append(Wc[r])
                rows_b.append(-wc[r])
        for a_row, b_val in extra_eq_rows:
            rows_A.append(a_row)
            rows_b.append(b_val)
            rows_A.append(-a_row)
            rows_b.append(-b_val)
        A = np.array(rows_A) if rows_A else np.zeros((0, mtot))
        b = np.array(rows_b) if rows_b else np.zeros(0)
        if mtot == 0:
            if len(b) and np.min(-b) < -TAU_FEAS:
                continue
            validity = Polyhedron(np.zeros((0, 0)), np.zeros(0))
            degenerate = False
        else:
            if feasible_point(A, b) is None:
                continue
            _, radius = chebyshev_center(A, b)
            validity = Polyhedron(A, b, dim=mtot)
            # LP feasibility tolerances put a ~1e-7 floor on computed radii,
            # so the zero-interior cutoff sits above it.
            degenerate = bool(radius < 1e-6)
        pieces.append(
            Piece(alpha=alpha, C=C, d=d, validity=validity,
                  degenerate=degenerate, nullspace=nullspace)
        )
    pieces.sort(key=lambda pc: (len(pc.alpha), pc.alpha))
    return pieces


@dataclass
class SingleValuedReport:
    certified: bool
    reason: str

    def __bool__(self):
        return self.certified


def is_single_valued(lcp: ParametricLcp, x_region: Polyhedron | None = None) -> SingleValuedReport:
    """P-matrix certificate: all principal minors of M strictly positive.

    Sufficient for S(x) to be a singleton for every x (the region argument is
    accepted for interface symmetry; the certificate is global).
    """
    if lcp.p > P_MAX:
        raise CapabilityError(f"p={lcp.p} exceeds the principal-minor cap {P_MAX}")
    for size in range(1, lcp.p + 1):
        for rows in itertools.combinations(range(lcp.p), size):
            minor = float(np.linalg.det(lcp.M[np.ix_(rows, rows)]))
            if minor <= PIVOT_TOL:
                return SingleValuedReport(
                    certified=False,
                    reason=f"principal minor {rows} = {minor:.3e} is not positive",
                )
    return SingleValuedReport(certified=True, reason="all principal minors positive")
