"""Certificates for computed points: global/local equilibrium via best
responses, Nash B-stationarity via branch tangent LPs, (Nash) strong and
second-order strong stationarity via multiplier systems, and the
multiplier characterization separating original-game equilibria from
modified-game-only ones.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .defaults import DEFAULT_EPS, RAY_DIM_MAX, RAY_SAMPLES, TAU_FEAS, TAU_STAT
from .errors import (
    CapabilityError,
    ContractViolation,
    InternalConsistencyError,
    PreconditionError,
)
from .geometry import extreme_rays, solve_lp
from .model import Game, membership_F
from .mpec import (
    MpecInstance,
    SolveOptions,
    build_best_response,
    solve_global,
)
from scipy.linalg import null_space


@dataclass
class Multipliers:
    """Per-leader multiplier family for the relaxed-NLP KKT systems.

    eta: X_i rows, mu: Y_i rows, lam: the y_i >= 0 bound, beta: the LCP rows.
    For per-leader (Nash) systems, beta_matrix[i][k] is leader i's multiplier
    on leader k's equilibrium constraint.
    """

    eta: list
    mu: list
    lam: list
    beta: list
    beta_matrix: list | None = None


@dataclass
class Certificate:
    claim: str
    gaps: list = field(default_factory=list)
    deviations: list = field(default_factory=list)
    multipliers: Multipliers | None = None
    branches_checked: int = 0
    tolerance: float = 0.0
    flags: dict = field(default_factory=dict)


def _explain_infeasibility(game, x_blocks, y_blocks, tol=TAU_FEAS):
    lay = game.layout
    xflat = np.concatenate([np.asarray(v, float).reshape(-1) for v in x_blocks])
    for i in range(lay.nleaders):
        xi = np.asarray(x_blocks[i], float).reshape(-1)
        yi = np.asarray(y_blocks[i], float).reshape(-1)
        if not game.leaders[i].x_set.contains(xi, tol):
            return f"x_{i+1} violates X_{i+1} by {game.leaders[i].x_set.residual(xi):.3e}"
        if not game.leaders[i].y_set.contains(yi, tol):
            return f"y_{i+1} violates Y_{i+1} by {game.leaders[i].y_set.residual(yi):.3e}"
        w = game.follower.M @ yi + game.follower.Nmat @ xflat + game.follower.q
        if np.min(yi, initial=0.0) < -tol:
            return f"y_{i+1} has a negative component"
        if np.min(w, initial=0.0) < -tol:
            return f"LCP rows of leader {i+1}'s conjecture go negative"
        if abs(float(yi @ w)) > tol:
            return f"complementarity residual of y_{i+1} is {abs(float(yi @ w)):.3e}"
    return None


def _leader_value(game, i, x_blocks, y_blocks):
    z = game.pack_point(x_blocks, y_blocks)
    return float(game.leaders[i].objective(z))


def verify_global(game: Game, x_blocks, y_blocks, eps: float = DEFAULT_EPS,
                  options: SolveOptions | None = None) -> Certificate:
    """Best-response certificate: the point is a global equilibrium iff no
    leader can improve by more than eps."""
    reason = _explain_infeasibility(game, x_blocks, y_blocks)
    if reason is not None:
        raise PreconditionError(f"point is not in the feasible set: {reason}")
    options = options or SolveOptions()
    gaps, deviations = [], []
    inconclusive = False
    for i in range(game.layout.nleaders):
        inst = build_best_response(game, i, (x_blocks, y_blocks))
        res = solve_global(inst, options)
        if res.status not in ("optimal",):
            if res.status == "incomplete" and res.point is not None:
                inconclusive = True
            else:
                inconclusive = True
                gaps.append(float("nan"))
                continue
        current = _leader_value(game, i, x_blocks, y_blocks)
        gap = current - res.value
        gaps.append(gap)
        if gap > eps and res.point is not None:
            mi = game.layout.m[i]
            deviations.append(
                {"leader": i, "x": res.point[:mi].tolist(),
                 "y": res.point[mi:].tolist(), "value": res.value}
            )
    if inconclusive:
        return Certificate(claim="inconclusive", gaps=gaps, tolerance=eps,
                           flags={"reason": "a best-response solve was incomplete"})
    worst = max(gaps)
    claim = "global_eq" if worst <= eps else "not_global_eq"
    return Certificate(claim=claim, gaps=gaps, deviations=deviations, tolerance=eps)


def verify_local(game: Game, x_blocks, y_blocks, radius: float,
                 options: SolveOptions | None = None) -> Certificate:
    """Equilibrium restricted to an inf-norm box of the given radius around
    each leader's own decision (boxes keep every subproblem polyhedral)."""
    reason = _explain_infeasibility(game, x_blocks, y_blocks)
    if reason is not None:
        raise PreconditionError(f"point is not in the feasible set: {reason}")
    options = options or SolveOptions()
    gaps, deviations = [], []
    inconclusive = False
    for i in range(game.layout.nleaders):
        inst = build_best_response(game, i, (x_blocks, y_blocks))
        z0 = np.concatenate([
            np.asarray(x_blocks[i], float).reshape(-1),
            np.asarray(y_blocks[i], float).reshape(-1),
        ])
        n = inst.n
        box_A = np.vstack([np.eye(n), -np.eye(n)])
        box_b = np.concatenate([z0 - radius, -(z0 + radius)])
        inst.A_ineq = np.vstack([inst.A_ineq, box_A]) if len(inst.A_ineq) else box_A
        inst.b_ineq = np.concatenate([inst.b_ineq, box_b]) if len(inst.b_ineq) else box_b
        res = solve_global(inst, options)
        if res.status != "optimal":
            inconclusive = True
            gaps.append(float("nan"))
            continue
        gap = _leader_value(game, i, x_blocks, y_blocks) - res.value
        gaps.append(gap)
        if gap > TAU_STAT and res.point is not None:
            mi = game.layout.m[i]
            deviations.append(
                {"leader": i, "x": res.point[:mi].tolist(),
                 "y": res.point[mi:].tolist(), "value": res.value}
            )
    if inconclusive:
        return Certificate(claim="inconclusive", gaps=gaps, tolerance=TAU_STAT,
                           flags={"radius": radius})
    worst = max(gaps)
    claim = "local_eq" if worst <= TAU_STAT else "not_local_eq"
    return Certificate(claim=claim, gaps=gaps, deviations=deviations,
                       tolerance=TAU_STAT, flags={"radius": radius})


# ----------------------------------------------------------------------------
# B-stationarity


def _instance_branch_lps(instance: MpecInstance, z, tol=TAU_FEAS):
    """Tangent-cone branch LPs at z. Yields (branch_id, lp_value, direction)."""
    z = np.asarray(z, dtype=float)
    n = instance.n
    g = instance.objective.grad_at(z)
    base_eq = [instance.A_eq] if len(instance.A_eq) else []
    act_rows = []
    if len(instance.A_ineq):
        slack = instance.A_ineq @ z - instance.b_ineq
        act_rows = [instance.A_ineq[k] for k in np.where(slack <= tol)[0]]
    tie_info = []
    nbiactive = 0
    for tie in instance.ties:
        y = z[tie.y_sl]
        w = tie.w(z)
        pos_y = [j for j in range(tie.p) if y[j] > tol]
        pos_w = [j for j in range(tie.p) if w[j] > tol and y[j] <= tol]
        biact = [j for j in range(tie.p) if y[j] <= tol and w[j] <= tol]
        nbiactive += len(biact)
        tie_info.append((tie, pos_y, pos_w, biact))
    if nbiactive > 20:
        raise CapabilityError(f"{nbiactive} biactive indices exceed the branch cap (20)")
    branch_sets = []
    for tie, pos_y, pos_w, biact in tie_info:
        branch_sets.append(list(itertools.product((0, 1), repeat=len(biact))))
    for combo in itertools.product(*branch_sets):
        eqs = list(base_eq)
        ineqs = list(act_rows)
        for (tie, pos_y, pos_w, biact), choice in zip(tie_info, combo):
            for j in pos_y:  # w-row stays tight, dy free
                eqs.append(tie.C[j][None, :])
            for j in pos_w:  # y stays at zero
                row = np.zeros(n)
                row[tie.y_start + j] = 1.0
                eqs.append(row[None, :])
            for j, side in zip(biact, choice):
                yrow = np.zeros(n)
                yrow[tie.y_start + j] = 1.0
                if side == 0:  # y-side branch: dw = 0, dy >= 0
                    eqs.append(tie.C[j][None, :])
                    ineqs.append(yrow)
                else:  # w-side branch: dy = 0, dw >= 0
                    eqs.append(yrow[None, :])
                    ineqs.append(tie.C[j])
        A_eq = np.vstack(eqs) if eqs else None
        b_eq = np.zeros(A_eq.shape[0]) if eqs else None
        A = np.vstack(ineqs) if ineqs else np.zeros((0, n))
        b = np.zeros(A.shape[0])
        res = solve_lp(g, A, b, A_eq, b_eq, bounds=[(-1.0, 1.0)] * n)
        if res.status == 0:
            yield combo, float(res.fun), res.x
        else:
            yield combo, 0.0, None


def check_b_stationary(target, point, tol: float = TAU_STAT,
                       options: SolveOptions | None = None) -> Certificate:
    """Bouligand stationarity by branch decomposition of the tangent cone.

    For an MpecInstance the check runs at the given z; for a Game it runs
    per leader over the tangent cone of that leader's feasible set (Nash
    B-stationarity), with point = (x_blocks, y_blocks).
    """
    if isinstance(target, Game):
        game = target
        x_blocks, y_blocks = point
        reason = _explain_infeasibility(game, x_blocks, y_blocks)
        if reason is not None:
            raise PreconditionError(f"point is not feasible: {reason}")
        total = 0
        worst = 0.0
        witness = None
        for i in range(game.layout.nleaders):
            inst = build_best_response(game, i, (x_blocks, y_blocks))
            z0 = np.concatenate([
                np.asarray(x_blocks[i], float).reshape(-1),
                np.asarray(y_blocks[i], float).reshape(-1),
            ])
            for branch, val, d in _instance_branch_lps(inst, z0):
                total += 1
                if val < worst:
                    worst = val
                    witness = {"leader": i, "branch": branch,
                               "direction": None if d is None else d.tolist()}
        ok = worst >= -tol
        return Certificate(
            claim="nash_b_stationary" if ok else "not_b_stationary",
            branches_checked=total, tolerance=tol,
            flags={"worst_branch_value": worst, "descent": witness},
        )
    instance = target
    z = np.asarray(point, dtype=float)
    if not instance.feasible(z):
        raise PreconditionError("point is not feasible for the instance")
    total = 0
    worst = 0.0
    witness = None
    for branch, val, d in _instance_branch_lps(instance, z):
        total += 1
        if val < worst:
            worst = val
            witness = {"branch": branch,
                       "direction": None if d is None else d.tolist()}
    ok = worst >= -tol
    return Certificate(
        claim="b_stationary" if ok else "not_b_stationary",
        branches_checked=total, tolerance=tol,
        flags={"worst_branch_value": worst, "descent": witness},
    )


# ----------------------------------------------------------------------------
# strong stationarity for the shared-constraint potential MPEC


class _VarTable:
    """Bookkeeping for a structured linear feasibility system."""

    def __init__(self):
        self.names = []
        self.signs = []  # '+' nonnegative, 'f' free

    def add(self, name, count, sign):
        start = len(self.names)
        for k in range(count):
            self.names.append((name, k))
            self.signs.append(sign)
        return list(range(start, start + count))

    @property
    def size(self):
        return len(self.names)


def _solve_structured_feasibility(nvars, signs, rows_A, rows_b):
    """Find v with A v = b, sign constraints per variable; canonical solution
    minimizes the l1 norm of the free variables. Returns None if infeasible."""
    if not rows_A:
        return np.zeros(nvars)
    A = np.vstack(rows_A)
    b = np.asarray(rows_b, dtype=float)
    m = A.shape[0]
    # variables: v (split free into +/- parts) plus equality slacks s+/s-
    pos_idx = [k for k in range(nvars) if signs[k] == "+"]
    free_idx = [k for k in range(nvars) if signs[k] == "f"]
    ncols = len(pos_idx) + 2 * len(free_idx)
    Ab = np.zeros((m, ncols + 2 * m))
    col = 0
    colmap_pos = {}
    for k in pos_idx:
        Ab[:, col] = A[:, k]
        colmap_pos[k] = col
        col += 1
    colmap_free = {}
    for k in free_idx:
        Ab[:, col] = A[:, k]
        Ab[:, col + 1] = -A[:, k]
        colmap_free[k] = (col, col + 1)
        col += 2
    Ab[:, ncols:ncols + m] = np.eye(m)
    Ab[:, ncols + m:] = -np.eye(m)
    # phase 1: minimize slack mass
    c1 = np.zeros(Ab.shape[1])
    c1[ncols:] = 1.0
    res = solve_lp(c1, None, None, A_eq=Ab, b_eq=b,
                   bounds=[(0, None)] * Ab.shape[1])
    scale = max(1.0, float(np.abs(b).max(initial=0.0)), float(np.abs(A).max(initial=0.0)))
    if res.status != 0 or res.fun > 1e-8 * scale:
        return None
    # phase 2: canonical multipliers, minimizing total l1 mass with slacks out
    c2 = np.ones(ncols)
    res2 = solve_lp(c2, None, None, A_eq=Ab[:, :ncols], b_eq=b,
                    bounds=[(0, None)] * ncols)
    if res2.status != 0:
        return None
    v = np.zeros(nvars)
    for k in pos_idx:
        v[k] = res2.x[colmap_pos[k]]
    for k in free_idx:
        cp, cn = colmap_free[k]
        v[k] = res2.x[cp] - res2.x[cn]
    return v


def _ae_pattern_classification(game, z, tol=TAU_FEAS):
    """Per-leader row activities at z for the shared-constraint system."""
    lay = game.layout
    xflat = z[: lay.mtot]
    info = []
    for i in range(lay.nleaders):
        xi = z[lay.x_slice(i)]
        yi = z[lay.y_slice(i)]
        ld = game.leaders[i]
        x_act = (ld.x_set.A @ xi - ld.x_set.b <= tol) if ld.x_set.nrows else np.zeros(0, bool)
        y_act = (ld.y_set.A @ yi - ld.y_set.b <= tol) if ld.y_set.nrows else np.zeros(0, bool)
        w = game.follower.M @ yi + game.follower.Nmat @ xflat + game.follower.q
        y_zero = yi <= tol
        w_zero = w <= tol
        info.append({"x_act": x_act, "y_act": y_act, "y_zero": y_zero,
                     "w_zero": w_zero, "w": w})
    return info


def check_strong_stationary(instance: MpecInstance, point,
                            tol: float = TAU_FEAS) -> Certificate:
    """Multiplier existence for the relaxed-NLP KKT system of the
    shared-constraint potential MPEC at the point-induced pattern.

    Sign conditions: inequality multipliers vanish on inactive rows and are
    nonnegative on active ones; complementarity multipliers vanish on the
    strictly inactive side, are free on the strictly active side, and must
    be nonnegative at biactive indices.
    """
    if instance.kind != "ae" or instance.game is None:
        raise ContractViolation("strong stationarity runs on the shared-constraint instance")
    game = instance.game
    lay = game.layout
    z = np.asarray(point, dtype=float)
    if not instance.feasible(z, tol):
        raise PreconditionError("point is not feasible for the instance")
    info = _ae_pattern_classification(game, z, tol)
    grad = instance.objective.grad_at(z)

    table = _VarTable()
    eta_idx, mu_idx, lam_idx, beta_idx = [], [], [], []
    for i in range(lay.nleaders):
        ld = game.leaders[i]
        e = table.add(f"eta{i}", ld.x_set.nrows, "+")
        m_ = table.add(f"mu{i}", ld.y_set.nrows, "+")
        l_ = table.add(f"lam{i}", lay.p, "f")
        b_ = table.add(f"beta{i}", lay.p, "f")
        eta_idx.append(e)
        mu_idx.append(m_)
        lam_idx.append(l_)
        beta_idx.append(b_)

    rows_A, rows_b = [], []
    fixed_zero = set()
    signs = list(table.signs)
    for i in range(lay.nleaders):
        ld = game.leaders[i]
        rec = info[i]
        for k in range(ld.x_set.nrows):
            if not rec["x_act"][k]:
                fixed_zero.add(eta_idx[i][k])
        for k in range(ld.y_set.nrows):
            if not rec["y_act"][k]:
                fixed_zero.add(mu_idx[i][k])
        for j in range(lay.p):
            yz, wz = rec["y_zero"][j], rec["w_zero"][j]
            if not yz:
                fixed_zero.add(lam_idx[i][j])
            if not wz:
                fixed_zero.add(beta_idx[i][j])
            if yz and wz:  # biactive: both signs constrained
                signs[lam_idx[i][j]] = "+"
                signs[beta_idx[i][j]] = "+"
    # x_i rows: grad_xi pi = X_i' eta_i + N_i' (sum_k beta_k)
    for i in range(lay.nleaders):
        ld = game.leaders[i]
        Ni = game.follower.Nmat[:, lay.x_slice(i)]
        for r, a in enumerate(lay.x_indices(i)):
            row = np.zeros(table.size)
            for k in range(ld.x_set.nrows):
                row[eta_idx[i][k]] = ld.x_set.A[k, r]
            for kk in range(lay.nleaders):
                for j in range(lay.p):
                    row[beta_idx[kk][j]] += Ni[j, r]
            rows_A.append(row[None, :])
            rows_b.append(grad[a])
    # y_i rows: grad_yi pi = Y_i' mu_i + lam_i + M' beta_i
    for i in range(lay.nleaders):
        ld = game.leaders[i]
        for r, a in enumerate(lay.y_indices(i)):
            row = np.zeros(table.size)
            for k in range(ld.y_set.nrows):
                row[mu_idx[i][k]] = ld.y_set.A[k, r]
            row[lam_idx[i][r]] = 1.0
            for j in range(lay.p):
                row[beta_idx[i][j]] += game.follower.M[j, r]
            rows_A.append(row[None, :])
            rows_b.append(grad[a])
    for k in fixed_zero:
        row = np.zeros(table.size)
        row[k] = 1.0
        rows_A.append(row[None, :])
        rows_b.append(0.0)
    sol = _solve_structured_feasibility(table.size, signs, rows_A, rows_b)
    pattern = instance.pattern_at(z)
    if sol is None:
        return Certificate(
            claim="not_strong_stationary", tolerance=tol,
            flags={"pattern": pattern,
                   "reason": "multiplier system infeasible at the tested pattern"},
        )
    mults = Multipliers(
        eta=[sol[eta_idx[i]] for i in range(lay.nleaders)],
        mu=[sol[mu_idx[i]] for i in range(lay.nleaders)],
        lam=[sol[lam_idx[i]] for i in range(lay.nleaders)],
        beta=[sol[beta_idx[i]] for i in range(lay.nleaders)],
    )
    # Equality-normalized multiplier of the reaction rows (the multiplier one
    # gets when writing the tight LCP rows as y = reaction(x)).
    reaction = [
        (-(game.follower.M.T @ mults.beta[i]) - mults.lam[i]).tolist()
        for i in range(lay.nleaders)
    ]
    return Certificate(claim="strong_stationary", multipliers=mults,
                       tolerance=tol,
                       flags={"pattern": pattern, "reaction_multipliers": reaction})


def transfer_multipliers(cert: Certificate, instance: MpecInstance, point,
                         tol: float = 1e-8) -> Certificate:
    """Per-leader (Nash) strong stationarity from the aggregate certificate:
    leader i reuses (eta_i, mu_i, lam_i) and takes beta_i^k = beta_k for all
    k. The per-leader systems are re-verified; failure here would be an
    implementation bug, since the potential identity guarantees them."""
    if cert.claim != "strong_stationary" or cert.multipliers is None:
        raise ContractViolation("transfer needs a strong_stationary certificate")
    game = instance.game
    lay = game.layout
    z = np.asarray(point, dtype=float)
    info = _ae_pattern_classification(game, z)
    mult = cert.multipliers
    beta_matrix = [[mult.beta[k].copy() for k in range(lay.nleaders)]
                   for _ in range(lay.nleaders)]
    worst = 0.0
    for i in range(lay.nleaders):
        ld = game.leaders[i]
        own_grad = ld.objective.grad_at(z)
        Ni = game.follower.Nmat[:, lay.x_slice(i)]
        beta_sum = np.sum([beta_matrix[i][k] for k in range(lay.nleaders)], axis=0)
        for r, a in enumerate(lay.x_indices(i)):
            lhs = own_grad[a]
            rhs = 0.0
            if ld.x_set.nrows:
                rhs += float(ld.x_set.A[:, r] @ mult.eta[i])
            rhs += float(Ni[:, r] @ beta_sum)
            worst = max(worst, abs(lhs - rhs))
        for r, a in enumerate(lay.y_indices(i)):
            lhs = own_grad[a]
            rhs = float(mult.lam[i][r])
            if ld.y_set.nrows:
                rhs += float(ld.y_set.A[:, r] @ mult.mu[i])
            rhs += float(game.follower.M[:, r] @ beta_matrix[i][i])
            worst = max(worst, abs(lhs - rhs))
        rec = info[i]
        for j in range(lay.p):
            if rec["y_zero"][j] and rec["w_zero"][j]:
                if mult.lam[i][j] < -tol:
                    worst = max(worst, -float(mult.lam[i][j]))
                for k in range(lay.nleaders):
                    if beta_matrix[i][k][j] < -tol:
                        worst = max(worst, -float(beta_matrix[i][k][j]))
    if worst > tol:
        raise InternalConsistencyError(
            f"multiplier transfer residual {worst:.3e} exceeds {tol:.1e}"
        )
    mults = Multipliers(eta=mult.eta, mu=mult.mu, lam=mult.lam,
                        beta=mult.beta, beta_matrix=beta_matrix)
    return Certificate(claim="nash_strong_stationary", multipliers=mults,
                       tolerance=tol, flags={"residual": worst})


# ----------------------------------------------------------------------------
# second-order strong stationarity


def _hessian_at(poly, z):
    n = poly.arity
    H = np.zeros((n, n))
    for a in range(n):
        da = poly.diff(a)
        H[a] = da.grad_at(z)
    return 0.5 * (H + H.T)


def _rnlp_rows(instance, z, tol=TAU_FEAS):
    """(active rows, inactive rows) of the point-pattern relaxed NLP."""
    n = instance.n
    act, inact = [], []
    if len(instance.A_ineq):
        slack = instance.A_ineq @ z - instance.b_ineq
        for k in range(len(slack)):
            (act if slack[k] <= tol else inact).append(instance.A_ineq[k])
    for tie in instance.ties:
        y = z[tie.y_sl]
        w = tie.w(z)
        for j in range(tie.p):
            yrow = np.zeros(n)
            yrow[tie.y_start + j] = 1.0
            wrow = tie.C[j]
            if y[j] > tol:  # w-row equality, y bound inactive
                act.append(wrow)
                inact.append(yrow)
            elif w[j] > tol:  # y equality, w row inactive
                act.append(yrow)
                inact.append(wrow)
            else:  # biactive: both rows active
                act.append(yrow)
                act.append(wrow)
    if len(instance.A_eq):
        for k in range(len(instance.b_eq)):
            act.append(instance.A_eq[k])
    return act, inact


def check_second_order_ss(instance: MpecInstance, point, cert: Certificate,
                          tol: float = 1e-10) -> Certificate:
    """Positive curvature of the Lagrangian Hessian over the critical cone.

    All constraints are affine, so the Lagrangian Hessian equals the
    objective Hessian. The cone is handled exactly through extreme-ray
    enumeration up to dimension RAY_DIM_MAX and by sampling beyond that
    (the certificate is flagged accordingly).
    """
    if cert.claim != "strong_stationary":
        raise ContractViolation("second-order check needs strong stationarity first")
    z = np.asarray(point, dtype=float)
    H = _hessian_at(instance.objective, z)
    g = instance.objective.grad_at(z)
    act, inact = _rnlp_rows(instance, z)
    eq_rows = [g] + act
    E = np.vstack(eq_rows)
    Z = null_space(E, rcond=1e-12)
    flags = {"method": "exact"}
    scale = max(1.0, float(np.abs(H).max(initial=0.0)))
    if Z.shape[1] == 0:
        return Certificate(claim="second_order_ss", tolerance=tol,
                           flags={**flags, "note": "critical cone is trivial"})
    R = (np.vstack(inact) @ Z) if inact else np.zeros((0, Z.shape[1]))
    # lineality space of the reduced cone
    L = null_space(R, rcond=1e-12) if len(R) else np.eye(Z.shape[1])
    if L.shape[1]:
        basis = Z @ L
        Hl = basis.T @ H @ basis
        eigs = np.linalg.eigvalsh(Hl)
        if np.min(eigs) <= tol * scale:
            v = basis @ np.linalg.eigh(Hl)[1][:, 0]
            return Certificate(
                claim="not_second_order_ss", tolerance=tol,
                flags={**flags, "witness": v.tolist(),
                       "curvature": float(np.min(eigs))},
            )
    # pointed part: restrict to the orthogonal complement of the lineality
    if L.shape[1] < Z.shape[1]:
        W = null_space(L.T, rcond=1e-12) if L.shape[1] else np.eye(Z.shape[1])
        Rp = R @ W
        dim = W.shape[1]
        rays = extreme_rays(Rp) if dim <= RAY_DIM_MAX else None
        if rays is None:
            flags["method"] = "sampled"
            rng = np.random.default_rng(0)
            count = 0
            for _ in range(RAY_SAMPLES * 3):
                v = rng.normal(size=dim)
                if len(Rp) and np.min(Rp @ v) < 0:
                    continue
                count += 1
                s = Z @ (W @ v)
                if float(s @ H @ s) <= tol * scale * float(s @ s):
                    return Certificate(claim="not_second_order_ss", tolerance=tol,
                                       flags={**flags, "witness": s.tolist()})
                if count >= RAY_SAMPLES:
                    break
        else:
            for v in rays:
                s = Z @ (W @ v)
                if float(s @ H @ s) <= tol * scale * float(s @ s):
                    return Certificate(claim="not_second_order_ss", tolerance=tol,
                                       flags={**flags, "witness": s.tolist()})
    return Certificate(claim="second_order_ss", tolerance=tol, flags=flags)


# ----------------------------------------------------------------------------
# multiplier characterization of original-game equilibria (shared constraints)


def check_shared_multiplier_form(game: Game, x_blocks, y_blocks,
                                 multipliers: Multipliers | None = None,
                                 tol: float = 1e-8) -> Certificate:
    """Which shared-constraint equilibria are equilibria of the original
    game: the cross multipliers on rivals' equilibrium constraints must
    vanish. Equality multipliers are recovered per leader on the
    point-induced pattern (free signs on active reaction rows)."""
    lay = game.layout
    z = game.pack_point(x_blocks, y_blocks)
    reason = _explain_infeasibility(game, x_blocks, y_blocks)
    if reason is not None:
        raise PreconditionError(f"point is not feasible: {reason}")
    info = _ae_pattern_classification(game, z)
    # convexity of each leader problem on its piece: own-block Hessian
    # restricted to the tangent of the active reaction equalities
    for i, ld in enumerate(game.leaders):
        own = lay.x_indices(i) + lay.y_indices(i)
        Hi = _hessian_at(ld.objective, z)[np.ix_(own, own)]
        ni = len(own)
        eq_rows = []
        Ni = game.follower.Nmat[:, lay.x_slice(i)]
        rec = info[i]
        for j in range(lay.p):
            if rec["w_zero"][j]:
                eq_rows.append(np.concatenate([Ni[j], game.follower.M[j]]))
            elif rec["y_zero"][j]:
                row = np.zeros(ni)
                row[lay.m[i] + j] = 1.0
                eq_rows.append(row)
        basis = null_space(np.vstack(eq_rows), rcond=1e-12) if eq_rows else np.eye(ni)
        if basis.shape[1]:
            Hr = basis.T @ Hi @ basis
            eigs = np.linalg.eigvalsh(Hr)
            if np.min(eigs) < -1e-9 * max(1.0, float(np.abs(eigs).max(initial=0.0))):
                return Certificate(claim="inconclusive", tolerance=tol,
                                   flags={"reason": f"leader {i+1} problem is nonconvex "
                                          "on the point's piece"})
    if multipliers is not None and multipliers.beta_matrix is not None:
        residual = max(
            float(np.abs(multipliers.beta_matrix[i][k]).max(initial=0.0))
            for i in range(lay.nleaders)
            for k in range(lay.nleaders)
            if k != i
        )
        claim = "consistent_with_original" if residual <= tol else "modified_game_only"
        return Certificate(claim=claim, tolerance=tol,
                           flags={"cross_multiplier_residual": residual,
                                  "source": "given multipliers"})

    def leader_system(i, allow_cross):
        ld = game.leaders[i]
        rec = info[i]
        table = _VarTable()
        e_idx = table.add("eta", ld.x_set.nrows, "+")
        m_idx = table.add("mu", ld.y_set.nrows, "+")
        l_idx = table.add("lam", lay.p, "+")
        nu_idx = [table.add(f"nu{k}", lay.p, "f") for k in range(lay.nleaders)]
        rows_A, rows_b = [], []
        fixed_zero = set()
        signs = list(table.signs)
        for k in range(ld.x_set.nrows):
            if not rec["x_act"][k]:
                fixed_zero.add(e_idx[k])
        for k in range(ld.y_set.nrows):
            if not rec["y_act"][k]:
                fixed_zero.add(m_idx[k])
        for j in range(lay.p):
            if not rec["y_zero"][j]:
                fixed_zero.add(l_idx[j])
        for k in range(lay.nleaders):
            w_k = info[k]["w_zero"]
            for j in range(lay.p):
                if not w_k[j]:
                    fixed_zero.add(nu_idx[k][j])
                if k != i and not allow_cross:
                    fixed_zero.add(nu_idx[k][j])
        own_grad = ld.objective.grad_at(z)
        Ni = game.follower.Nmat[:, lay.x_slice(i)]
        for r in range(lay.m[i]):
            row = np.zeros(table.size)
            for k in range(ld.x_set.nrows):
                row[e_idx[k]] = ld.x_set.A[k, r]
            for kk in range(lay.nleaders):
                for j in range(lay.p):
                    row[nu_idx[kk][j]] += Ni[j, r]
            rows_A.append(row[None, :])
            rows_b.append(own_grad[lay.x_indices(i)[r]])
        for r in range(lay.p):
            row = np.zeros(table.size)
            for k in range(ld.y_set.nrows):
                row[m_idx[k]] = ld.y_set.A[k, r]
            row[l_idx[r]] = 1.0
            for j in range(lay.p):
                row[nu_idx[i][j]] += game.follower.M[j, r]
            rows_A.append(row[None, :])
            rows_b.append(own_grad[lay.y_indices(i)[r]])
        for k in fixed_zero:
            row = np.zeros(table.size)
            row[k] = 1.0
            rows_A.append(row[None, :])
            rows_b.append(0.0)
        sol = _solve_structured_feasibility(table.size, signs, rows_A, rows_b)
        if sol is None:
            return None
        return [sol[nu_idx[k]] for k in range(lay.nleaders)]

    all_diag = True
    residual = 0.0
    nus = []
    for i in range(lay.nleaders):
        sol = leader_system(i, allow_cross=False)
        if sol is None:
            all_diag = False
            sol = leader_system(i, allow_cross=True)
            if sol is None:
                return Certificate(claim="inconclusive", tolerance=tol,
                                   flags={"reason": f"leader {i+1} KKT system infeasible "
                                          "even with cross multipliers"})
            residual = max(residual, max(
                float(np.abs(sol[k]).max(initial=0.0))
                for k in range(lay.nleaders) if k != i
            ))
        nus.append(sol)
    claim = "consistent_with_original" if all_diag else "modified_game_only"
    return Certificate(
        claim=claim, tolerance=tol,
        flags={"cross_multiplier_residual": residual,
               "reaction_multipliers": [[v.tolist() for v in row] for row in nus]},
    )
