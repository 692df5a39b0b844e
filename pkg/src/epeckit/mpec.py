"""MPEC reformulations and the desk-scale global solver.

An MpecInstance is a single minimization of a polynomial over polyhedral
constraints plus complementarity ties (0 <= y_B  perp  C z + q >= 0). The
global solver enumerates complementarity patterns, eliminates the pattern's
equalities, and solves each piece by multistart projected gradient with
Armijo line search, refined by a KKT correction step for quadratic
objectives; linear pieces go through an LP, which also certifies
unboundedness. Results are merged by value with deterministic tie-breaks.
"""

from __future__ import annotations

import itertools
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.stats import qmc

from .defaults import MAX_ITERS, MULTISTART, P_MAX, TAU_FEAS, TAU_STAT, TIE_TOL
from .errors import CapabilityError, ContractViolation, PreconditionError
from .geometry import chebyshev_center, eliminate_equalities, project_point, solve_lp
from .model import Game, Polyhedron
from .poly import Polynomial
from .structure import StructureReport, quasi_layout

_SEED_BOX = 1e3


@dataclass(frozen=True)
class Block:
    name: str
    kind: str  # 'x' | 'y' | 'w'
    start: int
    size: int
    leader: int | None = None

    @property
    def sl(self) -> slice:
        return slice(self.start, self.start + self.size)


@dataclass(frozen=True)
class LcpTie:
    """0 <= z[y_slice]  perp  C z + q >= 0."""

    y_start: int
    p: int
    C: np.ndarray
    q: np.ndarray

    @property
    def y_sl(self) -> slice:
        return slice(self.y_start, self.y_start + self.p)

    def w(self, z) -> np.ndarray:
        return self.C @ z + self.q


@dataclass
class MpecInstance:
    objective: Polynomial
    blocks: list
    A_ineq: np.ndarray
    b_ineq: np.ndarray
    A_eq: np.ndarray
    b_eq: np.ndarray
    ties: list
    kind: str = "custom"
    game: Game | None = None
    meta: dict = field(default_factory=dict)
    names: list = field(default_factory=list)

    @property
    def n(self) -> int:
        return self.objective.arity

    def feasible(self, z, tol: float = TAU_FEAS) -> bool:
        z = np.asarray(z, dtype=float)
        if len(self.A_ineq) and np.min(self.A_ineq @ z - self.b_ineq) < -tol:
            return False
        if len(self.A_eq) and np.max(np.abs(self.A_eq @ z - self.b_eq)) > tol:
            return False
        for tie in self.ties:
            y = z[tie.y_sl]
            w = tie.w(z)
            if np.min(y, initial=0.0) < -tol or np.min(w, initial=0.0) < -tol:
                return False
            if abs(float(y @ w)) > tol:
                return False
        return True

    def pattern_at(self, z, tol: float = TAU_FEAS):
        """Point-induced pattern per tie; biactive rows land outside alpha
        (the lexicographically smallest admissible choice)."""
        out = []
        z = np.asarray(z, dtype=float)
        for tie in self.ties:
            y = z[tie.y_sl]
            out.append(tuple(j for j in range(tie.p) if y[j] > tol))
        return tuple(out)


@dataclass
class SolveResult:
    status: str  # optimal | infeasible | unbounded | incomplete
    point: np.ndarray | None
    value: float
    piece: tuple | None
    stationarity_residual: float
    solver_log: list = field(default_factory=list)


@dataclass
class SolveOptions:
    multistart: int = MULTISTART
    tol: float = TAU_STAT
    feas_tol: float = TAU_FEAS
    max_iters: int = MAX_ITERS
    threads: int = 1
    seed: int = 0


# ----------------------------------------------------------------------------
# builders


def _poly_rows(A, b, cols, n):
    """Lift polyhedron rows acting on `cols` into the global z space."""
    A = np.asarray(A, dtype=float)
    if A.size == 0:
        return np.zeros((0, n)), np.zeros(0)
    G = np.zeros((A.shape[0], n))
    G[:, cols] = A
    return G, np.asarray(b, dtype=float)


def _stack(rows):
    As = [r[0] for r in rows if len(r[0])]
    bs = [r[1] for r in rows if len(r[0])]
    if not As:
        return None
    return np.vstack(As), np.concatenate(bs)


def _assemble(n, row_list):
    stacked = _stack(row_list)
    if stacked is None:
        return np.zeros((0, n)), np.zeros(0)
    return stacked


def build_quasi(game: Game, report: StructureReport) -> MpecInstance:
    """Minimize pi(x) + h(x, w) over x_i in X_i, w in the common Y, w in S(x)."""
    if report.kind != "quasi_potential":
        raise ContractViolation("build_quasi needs a quasi_potential report")
    lay = game.layout
    wlay = quasi_layout(game)
    n = wlay.n
    obj = report.pi.rename({v: v for v in range(lay.mtot)}, n) + report.h
    blocks = [
        Block(name=f"x{i+1}", kind="x", start=lay.x_slice(i).start,
              size=lay.m[i], leader=i)
        for i in range(lay.nleaders)
    ]
    blocks.append(Block(name="w", kind="w", start=lay.mtot, size=lay.p))
    rows = []
    for i, leader in enumerate(game.leaders):
        rows.append(_poly_rows(leader.x_set.A, leader.x_set.b, lay.x_indices(i), n))
    ybar = game.leaders[0].y_set
    wcols = list(range(lay.mtot, n))
    rows.append(_poly_rows(ybar.A, ybar.b, wcols, n))
    A, b = _assemble(n, rows)
    C = np.zeros((lay.p, n))
    C[:, : lay.mtot] = game.follower.Nmat
    C[:, lay.mtot:] = game.follower.M
    tie = LcpTie(y_start=lay.mtot, p=lay.p, C=C, q=game.follower.q.copy())
    return MpecInstance(
        objective=obj, blocks=blocks, A_ineq=A, b_ineq=b,
        A_eq=np.zeros((0, n)), b_eq=np.zeros(0), ties=[tie],
        kind="quasi", game=game, names=wlay.names(),
    )


def build_ae(game: Game, report: StructureReport) -> MpecInstance:
    """Minimize pi(x, y) over the shared feasible set (every conjecture is
    constrained by the follower LCP)."""
    if report.kind != "potential":
        raise ContractViolation("build_ae needs a potential report")
    lay = game.layout
    n = lay.n
    blocks = [
        Block(name=f"x{i+1}", kind="x", start=lay.x_slice(i).start,
              size=lay.m[i], leader=i)
        for i in range(lay.nleaders)
    ] + [
        Block(name=f"y{i+1}", kind="y", start=lay.y_slice(i).start,
              size=lay.p, leader=i)
        for i in range(lay.nleaders)
    ]
    rows = []
    for i, leader in enumerate(game.leaders):
        rows.append(_poly_rows(leader.x_set.A, leader.x_set.b, lay.x_indices(i), n))
        rows.append(_poly_rows(leader.y_set.A, leader.y_set.b, lay.y_indices(i), n))
    A, b = _assemble(n, rows)
    ties = []
    for i in range(lay.nleaders):
        C = np.zeros((lay.p, n))
        C[:, : lay.mtot] = game.follower.Nmat
        C[:, lay.y_slice(i)] = game.follower.M
        ties.append(LcpTie(y_start=lay.y_slice(i).start, p=lay.p, C=C,
                           q=game.follower.q.copy()))
    return MpecInstance(
        objective=report.pi, blocks=blocks, A_ineq=A, b_ineq=b,
        A_eq=np.zeros((0, n)), b_eq=np.zeros(0), ties=ties,
        kind="ae", game=game, names=lay.names(),
    )


def build_imp(game: Game, report: StructureReport) -> list:
    """One x-space instance per solution-map piece; minimize the piecewise
    potential (the caller takes the minimum across the returned instances)."""
    if report.kind != "implicit_potential":
        raise ContractViolation("build_imp needs an implicit_potential report")
    lay = game.layout
    n = lay.mtot
    out = []
    for piece, pik in report.pieces:
        blocks = [
            Block(name=f"x{i+1}", kind="x", start=lay.x_slice(i).start,
                  size=lay.m[i], leader=i)
            for i in range(lay.nleaders)
        ]
        rows = []
        for i, leader in enumerate(game.leaders):
            rows.append(_poly_rows(leader.x_set.A, leader.x_set.b, lay.x_indices(i), n))
        rows.append((piece.validity.A, piece.validity.b))
        A, b = _assemble(n, rows)
        out.append(
            MpecInstance(
                objective=pik, blocks=blocks, A_ineq=A, b_ineq=b,
                A_eq=np.zeros((0, n)), b_eq=np.zeros(0), ties=[],
                kind="imp_piece", game=game,
                meta={"piece": piece},
                names=lay.names()[: lay.mtot],
            )
        )
    return out


def build_best_response(game: Game, leader: int, rivals) -> MpecInstance:
    """Leader's parametrized problem given fixed rival decisions.

    rivals = (x_blocks, y_blocks) with the leader's own entries ignored.
    Under the all-equilibrium-constraints formulation the rivals' conjectures
    become linear membership rows parametrized by the leader's decision.
    """
    lay = game.layout
    x_rivals, y_rivals = rivals
    i = leader
    mi = lay.m[i]
    n = mi + lay.p
    ld = game.leaders[i]

    own_x = lay.x_indices(i)
    fixed_cols, fixed_vals = [], []
    for j in range(lay.nleaders):
        if j == i:
            continue
        xj = np.asarray(x_rivals[j], dtype=float).reshape(-1)
        if xj.shape != (lay.m[j],):
            raise PreconditionError(f"rival {j+1} decision has wrong dimension")
        fixed_cols += lay.x_indices(j)
        fixed_vals += list(xj)
    red = game.follower.restrict_x(own_x, fixed_cols, fixed_vals)

    assign = dict(zip(fixed_cols, fixed_vals))
    obj = ld.objective.fix(assign).compress(own_x + lay.y_indices(i))

    blocks = [
        Block(name=f"x{i+1}", kind="x", start=0, size=mi, leader=i),
        Block(name=f"y{i+1}", kind="y", start=mi, size=lay.p, leader=i),
    ]
    rows = [
        _poly_rows(ld.x_set.A, ld.x_set.b, list(range(mi)), n),
        _poly_rows(ld.y_set.A, ld.y_set.b, list(range(mi, n)), n),
    ]
    eq_rows = []
    if game.formulation == "ae":
        for j in range(lay.nleaders):
            if j == i:
                continue
            yj = np.asarray(y_rivals[j], dtype=float).reshape(-1)
            if yj.shape != (lay.p,):
                raise PreconditionError(f"rival {j+1} conjecture has wrong dimension")
            w_lin = np.zeros((lay.p, n))
            w_lin[:, :mi] = red.Nmat
            w_const = red.M @ yj + red.q
            if np.min(yj, initial=0.0) < -TAU_FEAS:
                rows.append((np.zeros((1, n)), np.array([1.0])))  # infeasible
                continue
            for k in range(lay.p):
                if yj[k] > TAU_FEAS:
                    eq_rows.append((w_lin[k], -w_const[k]))
                else:
                    rows.append((w_lin[k][None, :], np.array([-w_const[k]])))
    A, b = _assemble(n, rows)
    if eq_rows:
        A_eq = np.vstack([r[0] for r in eq_rows])
        b_eq = np.array([r[1] for r in eq_rows])
    else:
        A_eq, b_eq = np.zeros((0, n)), np.zeros(0)
    C = np.zeros((lay.p, n))
    C[:, :mi] = red.Nmat
    C[:, mi:] = red.M
    tie = LcpTie(y_start=mi, p=lay.p, C=C, q=red.q.copy())
    return MpecInstance(
        objective=obj, blocks=blocks, A_ineq=A, b_ineq=b,
        A_eq=A_eq, b_eq=b_eq, ties=[tie],
        kind="best_response", game=game,
        meta={"leader": i, "rivals": rivals},
        names=[f"x{i+1}_{k+1}" if mi > 1 else f"x{i+1}" for k in range(mi)]
        + [f"y{i+1}_{k+1}" if lay.p > 1 else f"y{i+1}" for k in range(lay.p)],
    )


# ----------------------------------------------------------------------------
# expansion back to the game's (x, y) space


def expand_point(instance: MpecInstance, z):
    """Map a solver point to per-leader (x_blocks, y_blocks)."""
    game = instance.game
    lay = game.layout
    z = np.asarray(z, dtype=float)
    if instance.kind == "ae":
        xs = [z[lay.x_slice(i)].copy() for i in range(lay.nleaders)]
        ys = [z[lay.y_slice(i)].copy() for i in range(lay.nleaders)]
        return xs, ys
    if instance.kind == "quasi":
        xs = [z[lay.x_slice(i)].copy() for i in range(lay.nleaders)]
        w = z[lay.mtot:].copy()
        return xs, [w.copy() for _ in range(lay.nleaders)]
    if instance.kind == "imp_piece":
        xs = [z[lay.x_slice(i)].copy() for i in range(lay.nleaders)]
        y = instance.meta["piece"].solution_at(z)
        return xs, [y.copy() for _ in range(lay.nleaders)]
    raise ContractViolation(f"no game-space expansion for kind={instance.kind}")


# ----------------------------------------------------------------------------
# the per-piece machinery


class _Piecework:
    """One complementarity pattern of an instance, reduced to inequality-only
    coordinates u with z = zp + B u."""

    def __init__(self, instance, pattern):
        self.pattern = pattern
        n = instance.n
        eqs = [(instance.A_eq, instance.b_eq)]
        ineqs = [(instance.A_ineq, instance.b_ineq)]
        for tie, alpha in zip(instance.ties, pattern):
            aset = set(alpha)
            for j in range(tie.p):
                y_row = np.zeros(n)
                y_row[tie.y_start + j] = 1.0
                w_row = tie.C[j]
                wq = -tie.q[j]
                if j in aset:
                    eqs.append((w_row[None, :], np.array([wq])))
                    ineqs.append((y_row[None, :], np.array([0.0])))
                else:
                    eqs.append((y_row[None, :], np.array([0.0])))
                    ineqs.append((w_row[None, :], np.array([wq])))
        self.A_eq, self.b_eq = _assemble(n, eqs)
        self.A, self.b = _assemble(n, ineqs)
        self.consistent = True
        if len(self.A_eq):
            zp, basis = eliminate_equalities(self.A_eq, self.b_eq)
            if zp is None:
                self.consistent = False
                return
        else:
            zp, basis = np.zeros(n), np.eye(n)
        self.zp = zp
        self.basis = basis
        self.dim = basis.shape[1]
        if self.dim:
            self.Ar = self.A @ basis if len(self.A) else np.zeros((0, self.dim))
            self.br = (self.b - self.A @ zp) if len(self.A) else np.zeros(0)
        else:
            self.Ar = np.zeros((0, 0))
            self.br = np.zeros(0)

    def lift(self, u):
        return self.zp + (self.basis @ u if self.dim else 0.0)

    def project(self, u):
        return project_point(u, self.Ar, self.br)


def _pgd(f, grad, proj, u0, tol, max_iters):
    """Projected gradient with Armijo backtracking and BB step seeding.

    Returns (u, value, residual, iterations, diverged).
    """
    u = proj(u0)
    if u is None:
        return None
    fu = f(u)
    t = 1.0
    prev_u = None
    prev_g = None
    it = 0
    for it in range(1, max_iters + 1):
        g = grad(u)
        if prev_u is not None:
            s = u - prev_u
            yv = g - prev_g
            sy = float(s @ yv)
            if sy > 1e-16:
                t = float(s @ s) / sy
        t = min(max(t, 1e-10), 1e10)
        prev_u, prev_g = u, g
        step = t
        accepted = False
        for _ in range(60):
            v = proj(u - step * g)
            if v is None:
                return None
            d = v - u
            dn = float(np.linalg.norm(d, ord=np.inf))
            if dn <= 1e-18:
                accepted = True
                break
            if f(v) <= fu + 1e-4 * float(g @ d):
                accepted = True
                break
            step *= 0.5
        if not accepted:
            v = u
            d = np.zeros_like(u)
        resid = float(np.linalg.norm(u - _safe_proj(proj, u - g, u), ord=np.inf))
        if resid <= tol:
            return u, fu, resid, it, False
        u = v
        fu = f(u)
        if np.linalg.norm(u, ord=np.inf) > 1e8:
            return u, fu, np.inf, it, True
        if float(np.linalg.norm(d, ord=np.inf)) <= 1e-18 and resid > tol:
            # stuck: projection arc gives no progress
            return u, fu, resid, it, False
    g = grad(u)
    resid = float(np.linalg.norm(u - _safe_proj(proj, u - g, u), ord=np.inf))
    return u, fu, resid, max_iters, False


def _safe_proj(proj, pt, fallback):
    v = proj(pt)
    return v if v is not None else fallback


def _kkt_polish(Q, c, A, b, u, feas_tol):
    """Solve the active-set KKT system at u for a quadratic objective and
    return the refined point when it is feasible with nonnegative multipliers."""
    scale = max(1.0, float(np.abs(u).max(initial=0.0)))
    if len(A):
        slack = A @ u - b
        act = np.where(slack <= 1e-7 * scale)[0]
    else:
        act = np.array([], dtype=int)
    na = len(act)
    dim = len(u)
    K = np.zeros((dim + na, dim + na))
    K[:dim, :dim] = Q
    rhs = np.zeros(dim + na)
    rhs[:dim] = -c
    if na:
        K[:dim, dim:] = -A[act].T
        K[dim:, :dim] = A[act]
        rhs[dim:] = b[act]
    sol, *_ = np.linalg.lstsq(K, rhs, rcond=None)
    u_new = sol[:dim]
    mus = sol[dim:]
    if np.linalg.norm(K @ sol - rhs, ord=np.inf) > 1e-7 * max(1.0, np.abs(rhs).max()):
        return None
    if len(A) and np.min(A @ u_new - b) < -10 * feas_tol:
        return None
    if na and np.min(mus) < -1e-7:
        return None
    return u_new


def _piece_solve(instance, work, options, rng_seed):
    """Best point on one piece. Returns a record dict or None if infeasible."""
    rec = {"pattern": work.pattern, "status": "infeasible", "value": np.inf,
           "point": None, "residual": np.inf, "iters": 0, "certified": False}
    if not work.consistent:
        return rec
    if work.dim == 0:
        z = work.zp
        if len(work.A) and np.min(work.A @ z - work.b) < -options.feas_tol:
            return rec
        rec.update(status="solved", value=float(instance.objective(z)),
                   point=z.copy(), residual=0.0, certified=True)
        return rec
    center, radius = chebyshev_center(work.Ar, work.br, box=_SEED_BOX)
    if center is None:
        return rec
    f = lambda u: float(instance.objective(work.lift(u)))
    grad = lambda u: work.basis.T @ instance.objective.grad_at(work.lift(u))
    degree = instance.objective.degree()

    if degree <= 2:
        Q, c, k0 = instance.objective.quadratic_parts()
        Qr = work.basis.T @ Q @ work.basis
        cr = work.basis.T @ (Q @ work.zp + c)
        eigs = np.linalg.eigvalsh(Qr) if work.dim else np.zeros(0)
        scale = max(1.0, float(np.abs(eigs).max(initial=0.0)))
        convex = bool(np.all(eigs >= -1e-9 * scale))
        linear = bool(np.abs(Qr).max(initial=0.0) <= 1e-13)
    else:
        convex = False
        linear = False

    if linear:
        res = solve_lp(cr, work.Ar, work.br)
        if res.status == 3:
            rec.update(status="unbounded", value=-np.inf, certified=True)
            return rec
        if res.status != 0:
            return rec
        u = res.x
        u_ref = _kkt_polish(np.zeros((work.dim, work.dim)), cr, work.Ar, work.br,
                            u, options.feas_tol)
        if u_ref is not None and f(u_ref) <= f(u) + 1e-10:
            u = u_ref
        resid = float(np.linalg.norm(u - _safe_proj(work.project, u - grad(u), u),
                                     ord=np.inf))
        rec.update(status="solved", value=f(u), point=work.lift(u),
                   residual=resid, certified=True)
        return rec

    # seeds: piece center plus scrambled-Sobol points in the piece's box hull
    seeds = [center]
    count = max(1, options.multistart)
    if count > 1 and work.dim:
        lo, hi = _piece_box(work, center)
        sob = qmc.Sobol(d=work.dim, scramble=True, seed=rng_seed)
        pow2 = 1 << max(0, (count - 2)).bit_length()
        raw = sob.random(pow2)[: count - 1]
        for row in raw:
            seeds.append(lo + row * (hi - lo))
    best = None
    values = []
    hit_cap = False
    for s_idx, s in enumerate(seeds):
        out = _pgd(f, grad, work.project, np.asarray(s, float),
                   options.tol, options.max_iters)
        if out is None:
            continue
        u, fu, resid, iters, diverged = out
        if diverged:
            rec.update(status="diverged", certified=False)
            continue
        if degree <= 2:
            u_ref = _kkt_polish(Qr, cr, work.Ar, work.br, u, options.feas_tol)
            if u_ref is not None and f(u_ref) <= fu + 1e-10:
                u, fu = u_ref, f(u_ref)
                resid = float(np.linalg.norm(
                    u - _safe_proj(work.project, u - grad(u), u), ord=np.inf))
        if resid > options.tol and iters >= options.max_iters:
            hit_cap = True
        values.append(fu)
        cand = (fu, tuple(u), u, resid, iters)
        if best is None or (fu, tuple(np.round(u, 12))) < (best[0], tuple(np.round(best[2], 12))):
            best = cand
        if convex:
            break  # one certified run suffices on a convex piece
    if best is None:
        if rec["status"] == "diverged":
            rec.update(status="incomplete")
        return rec
    fu, _, u, resid, iters = best
    spread = max(values) - min(values) if values else np.inf
    certified = convex or spread <= TIE_TOL
    status = "solved"
    if hit_cap and resid > options.tol:
        status = "incomplete"
        certified = False
    rec.update(status=status, value=fu, point=work.lift(u), residual=resid,
               iters=iters, certified=certified)
    return rec


def _piece_box(work, center):
    """Per-coordinate LP bounds of the piece, clipped around the center."""
    lo = np.empty(work.dim)
    hi = np.empty(work.dim)
    for j in range(work.dim):
        c = np.zeros(work.dim)
        c[j] = 1.0
        res = solve_lp(c, work.Ar, work.br, bounds=[(-_SEED_BOX, _SEED_BOX)] * work.dim)
        lo[j] = res.x[j] if res.status == 0 else center[j] - 1.0
        res = solve_lp(-c, work.Ar, work.br, bounds=[(-_SEED_BOX, _SEED_BOX)] * work.dim)
        hi[j] = res.x[j] if res.status == 0 else center[j] + 1.0
    span = hi - lo
    hi = hi + 1e-6 * np.maximum(1.0, span)
    return lo, hi


def _merge(records):
    feasible = [r for r in records if r["status"] in ("solved", "incomplete")
                and r["point"] is not None]
    unbounded = [r for r in records if r["status"] == "unbounded"]
    if unbounded:
        win = min(unbounded, key=lambda r: r["pattern"])
        return win, "unbounded"
    if not feasible:
        return None, "infeasible"
    best_val = min(r["value"] for r in feasible)
    near = [r for r in feasible if r["value"] <= best_val + TIE_TOL]
    near.sort(key=lambda r: (r["pattern"], tuple(r["point"])))
    win = near[0]
    if any(r["status"] == "incomplete" for r in records):
        return win, "incomplete"
    if not all(r["certified"] for r in feasible):
        return win, "incomplete"
    return win, "optimal"


def solve_global(instance: MpecInstance, options: SolveOptions | None = None) -> SolveResult:
    """Enumerate complementarity patterns and take the best piece optimum."""
    options = options or SolveOptions()
    for tie in instance.ties:
        if tie.p > P_MAX:
            raise CapabilityError(f"tie dimension {tie.p} exceeds p_max={P_MAX}")
    pattern_lists = [
        [tuple(j for j in range(tie.p) if mask >> j & 1) for mask in range(1 << tie.p)]
        for tie in instance.ties
    ]
    combos = sorted(itertools.product(*pattern_lists)) if pattern_lists else [()]

    def run(idx_combo):
        idx, combo = idx_combo
        work = _Piecework(instance, combo)
        return idx, _piece_solve(instance, work, options, rng_seed=options.seed + idx)

    tasks = list(enumerate(combos))
    if options.threads > 1 and len(tasks) > 1:
        with ThreadPoolExecutor(max_workers=options.threads) as pool:
            results = list(pool.map(run, tasks))
    else:
        results = [run(t) for t in tasks]
    results.sort(key=lambda pair: pair[0])
    records = [r for _, r in results]
    win, status = _merge(records)
    log = [
        {k: rec[k] for k in ("pattern", "status", "value", "residual", "iters", "certified")}
        for rec in records
    ]
    if win is None:
        return SolveResult(status="infeasible", point=None, value=np.inf,
                           piece=None, stationarity_residual=np.inf, solver_log=log)
    return SolveResult(
        status=status,
        point=win["point"],
        value=win["value"],
        piece=win["pattern"],
        stationarity_residual=win["residual"],
        solver_log=log,
    )


def solve_pieces(instances: list, options: SolveOptions | None = None):
    """Solve a family of instances (the implicit formulation's pieces) and
    merge deterministically by value, then piece order, then point."""
    options = options or SolveOptions()
    best = None
    best_idx = None
    logs = []
    statuses = []
    for idx, inst in enumerate(instances):
        res = solve_global(inst, options)
        logs.append({"piece_index": idx, "log": res.solver_log})
        statuses.append(res.status)
        if res.status in ("optimal", "incomplete") and res.point is not None:
            key = (res.value, idx, tuple(res.point))
            if best is None or res.value < best[0].value - TIE_TOL or (
                abs(res.value - best[0].value) <= TIE_TOL and key < (best[0].value, best_idx, tuple(best[0].point))
            ):
                best = (res, inst)
                best_idx = idx
    if best is None:
        status = "unbounded" if "unbounded" in statuses else "infeasible"
        return SolveResult(status=status, point=None, value=np.inf, piece=None,
                           stationarity_residual=np.inf, solver_log=logs), None
    res, inst = best
    status = res.status
    if "incomplete" in statuses:
        status = "incomplete"
    merged = replace(res, status=status, solver_log=logs)
    return merged, inst


def solve_local(instance: MpecInstance, start, options: SolveOptions | None = None) -> SolveResult:
    """Single-piece descent on the piece containing `start` (biactive rows
    resolve to the lexicographically smallest pattern)."""
    options = options or SolveOptions()
    start = np.asarray(start, dtype=float)
    if start.shape != (instance.n,):
        raise PreconditionError("start point has wrong dimension")
    pattern = instance.pattern_at(start, options.feas_tol)
    work = _Piecework(instance, pattern)
    if not work.consistent:
        raise PreconditionError("start not attributable to any piece")
    if work.dim == 0:
        z = work.zp
        if (len(work.A) and np.min(work.A @ z - work.b) < -options.feas_tol) or \
                np.linalg.norm(z - start, ord=np.inf) > 1e3:
            raise PreconditionError("start not attributable to any piece")
        return SolveResult(status="optimal", point=z.copy(),
                           value=float(instance.objective(z)), piece=pattern,
                           stationarity_residual=0.0,
                           solver_log=[{"pattern": pattern, "status": "solved"}])
    u0 = work.basis.T @ (start - work.zp)
    u0p = work.project(u0)
    if u0p is None:
        raise PreconditionError("start not attributable to any piece")
    lifted = work.lift(u0p)
    if np.linalg.norm(lifted - start, ord=np.inf) > max(1e-6, 1e3 * options.feas_tol):
        raise PreconditionError("start not attributable to any piece")
    sub = replace(options, multistart=1)
    rec = _piece_solve_from(instance, work, sub, u0p)
    status = "optimal" if rec["status"] == "solved" else rec["status"]
    return SolveResult(status=status, point=rec["point"], value=rec["value"],
                       piece=pattern, stationarity_residual=rec["residual"],
                       solver_log=[{k: rec[k] for k in ("pattern", "status", "value",
                                                        "residual", "iters")}])


def _piece_solve_from(instance, work, options, u0):
    f = lambda u: float(instance.objective(work.lift(u)))
    grad = lambda u: work.basis.T @ instance.objective.grad_at(work.lift(u))
    degree = instance.objective.degree()
    out = _pgd(f, grad, work.project, u0, options.tol, options.max_iters)
    rec = {"pattern": work.pattern, "status": "incomplete", "value": np.inf,
           "point": None, "residual": np.inf, "iters": 0, "certified": False}
    if out is None:
        return rec
    u, fu, resid, iters, diverged = out
    if diverged:
        return rec
    if degree <= 2:
        Q, c, _ = instance.objective.quadratic_parts()
        Qr = work.basis.T @ Q @ work.basis
        cr = work.basis.T @ (Q @ work.zp + c)
        u_ref = _kkt_polish(Qr, cr, work.Ar, work.br, u, options.feas_tol)
        if u_ref is not None and f(u_ref) <= fu + 1e-10:
            u, fu = u_ref, f(u_ref)
            resid = float(np.linalg.norm(
                u - _safe_proj(work.project, u - grad(u), u), ord=np.inf))
    status = "solved" if resid <= options.tol else "incomplete"
    rec.update(status=status, value=fu, point=work.lift(u), residual=resid, iters=iters)
    return rec
