"""Potential, quasi-potential, and implicit-potential structure detection,
plus symbolic construction of the (quasi-)potential itself.

The central object is the stacked own-block gradient field F, one component
per ambient variable, whose Jacobian symmetry characterizes potential games;
the potential is rebuilt from F by an exact monomial line integral from the
origin (so pi(0) = 0 before any anchoring offset).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .defaults import COEFF_TOL
from .errors import CapabilityError, ContractViolation, InternalConsistencyError
from .geometry import feasible_point, solve_lp
from .lcp import enumerate_pieces, is_single_valued
from .model import Game, VariableLayout
from .poly import Polynomial

BOUNDARY_TOL = 1e-8


@dataclass
class Witness:
    """Why detection returned kind=none."""

    kind: str  # jacobian | h_mismatch | y_sets | boundary
    var_pair: tuple | None = None
    monomial: tuple | None = None
    detail: str = ""


@dataclass
class StructureReport:
    kind: str  # potential | quasi_potential | implicit_potential | none
    pi: Polynomial | None = None
    h: Polynomial | None = None
    witness: Witness | None = None
    # implicit case: per-piece potentials with boundary-consistent offsets
    pieces: list = field(default_factory=list)
    sampled: bool = False

    @property
    def detected(self) -> bool:
        return self.kind != "none"


def _own_gradient_field(polys_by_var: dict) -> list:
    """F ordered by ambient variable index."""
    arity = next(iter(polys_by_var.values())).arity if polys_by_var else 0
    return [polys_by_var[a].diff(a) for a in sorted(polys_by_var)]


def _symmetry_witness(F: list) -> Witness | None:
    """First ambient pair where dF_a/dz_b differs from dF_b/dz_a."""
    n = len(F)
    scale = max([1.0] + [f.max_coeff() for f in F])
    for a in range(n):
        for b in range(a + 1, n):
            dab = F[a].diff(b)
            dba = F[b].diff(a)
            diff = dab - dba
            if diff.max_coeff() > COEFF_TOL * scale:
                mono = max(diff.terms, key=lambda e: abs(diff.terms[e]))
                return Witness(
                    kind="jacobian",
                    var_pair=(a, b),
                    monomial=mono,
                    detail=f"dF_{a}/dz_{b} != dF_{b}/dz_{a}",
                )
    return None


def construct_potential(F, layout: VariableLayout | None = None) -> Polynomial:
    """Exact line integral of a symmetric polynomial field from the origin.

    A monomial c z^e in F_a integrates to c/(|e|+1) z^(e + 1_a); symmetry of
    the Jacobian of F makes the result path independent with grad pi = F.
    """
    F = list(F)
    if _symmetry_witness(F) is not None:
        raise ContractViolation("construct_potential requires a symmetric Jacobian")
    arity = F[0].arity if F else 0
    terms = {}
    for a, Fa in enumerate(F):
        for e, c in Fa.terms.items():
            ne = list(e)
            ne[a] += 1
            key = tuple(ne)
            terms[key] = terms.get(key, 0.0) + c / (sum(e) + 1)
    pi = Polynomial(arity, terms)
    for a, Fa in enumerate(F):
        if not pi.diff(a).equals(Fa):
            raise InternalConsistencyError("line integral failed to invert the field")
    return pi


def detect_potential(game: Game) -> StructureReport:
    """Potential structure over the full (x, y) ambient space."""
    lay = game.layout
    by_var = {}
    for i, leader in enumerate(game.leaders):
        for a in lay.x_indices(i) + lay.y_indices(i):
            by_var[a] = leader.objective
    F = _own_gradient_field(by_var)
    w = _symmetry_witness(F)
    if w is not None:
        return StructureReport(kind="none", witness=w)
    return StructureReport(kind="potential", pi=construct_potential(F, lay))


def quasi_layout(game: Game) -> VariableLayout:
    return VariableLayout(m=game.layout.m, p=game.layout.p, shared_w=True)


def detect_quasi_potential(game: Game) -> StructureReport:
    """Objectives of the form phi_i(x) + h(x, y_i) with a common h and a
    potential x-part. The split is syntactic on monomial support."""
    lay = game.layout
    wlay = quasi_layout(game)
    y0 = game.leaders[0].y_set
    for i, leader in enumerate(game.leaders[1:], start=2):
        if not leader.y_set.same_as(y0):
            return StructureReport(
                kind="none",
                witness=Witness(kind="y_sets", var_pair=(1, i),
                                detail=f"Y_1 and Y_{i} differ"),
            )
    x_parts, h_parts = [], []
    w_slots = {lay.mtot + k: lay.mtot + k for k in range(lay.p)}  # unused slots
    for i, leader in enumerate(game.leaders):
        yvars = set(lay.y_indices(i))
        hx = {e: c for e, c in leader.objective.terms.items()
              if any(e[v] for v in yvars)}
        xx = {e: c for e, c in leader.objective.terms.items()
              if not any(e[v] for v in yvars)}
        mapping = {v: v for v in range(lay.mtot)}
        for k, v in enumerate(lay.y_indices(i)):
            mapping[v] = lay.mtot + k
        h_parts.append(Polynomial(lay.n, hx).rename(mapping, wlay.n))
        x_parts.append(Polynomial(lay.n, xx).compress(range(lay.mtot)))
    scale = max([1.0] + [h.max_coeff() for h in h_parts])
    for i, h in enumerate(h_parts[1:], start=2):
        diff = h - h_parts[0]
        if diff.max_coeff() > COEFF_TOL * scale:
            mono = max(diff.terms, key=lambda e: abs(diff.terms[e]))
            return StructureReport(
                kind="none",
                witness=Witness(kind="h_mismatch", var_pair=(1, i), monomial=mono,
                                detail=f"h-part of leader {i} differs from leader 1"),
            )
    by_var = {}
    for i in range(lay.nleaders):
        for a in lay.x_indices(i):
            by_var[a] = x_parts[i]
    F = _own_gradient_field(by_var)
    w = _symmetry_witness(F)
    if w is not None:
        return StructureReport(kind="none", witness=w)
    pi = construct_potential(F)
    return StructureReport(kind="quasi_potential", pi=pi, h=h_parts[0])


def _substituted_objectives(game: Game, piece) -> list:
    """Each leader's objective with its y-block replaced by the piece's
    affine solution map; result polynomials live over the x variables."""
    lay = game.layout
    out = []
    passthrough = {v: v for v in range(lay.mtot)}
    for i, leader in enumerate(game.leaders):
        rows = {}
        for k, v in enumerate(lay.y_indices(i)):
            rows[v] = (piece.C[k], piece.d[k])
        out.append(leader.objective.substitute_affine(rows, lay.mtot, passthrough))
    return out


def _boundary_samples(validity_a, validity_b, mtot, max_dirs=None):
    """A handful of distinct points on the intersection of two piece
    validity polyhedra (empty list when they do not touch)."""
    A = np.vstack([validity_a.A, validity_b.A]) if (validity_a.nrows or validity_b.nrows) \
        else np.zeros((0, mtot))
    b = np.concatenate([validity_a.b, validity_b.b])
    if feasible_point(A, b) is None:
        return []
    pts = []
    bounds = [(-1e3, 1e3)] * mtot
    dirs = []
    for j in range(mtot):
        e = np.zeros(mtot)
        e[j] = 1.0
        dirs += [e, -e]
    dirs.append(np.ones(mtot))
    # seeded skew directions so symmetric boundaries yield asymmetric samples
    rng = np.random.default_rng(0)
    dirs += list(rng.normal(size=(6, mtot)))
    for c in dirs:
        res = solve_lp(c, A, b, bounds=bounds)
        if res.status == 0:
            pt = res.x
            if not any(np.linalg.norm(pt - other, ord=np.inf) < 1e-10 for other in pts):
                pts.append(pt)
    # vertices of a symmetric slice can all share one coordinate multiset;
    # random convex combinations stay on the boundary and break the symmetry
    if len(pts) >= 2:
        base = list(pts)
        for _ in range(6):
            wts = rng.dirichlet(np.ones(len(base)))
            mix = sum(w * p for w, p in zip(wts, base))
            if not any(np.linalg.norm(mix - other, ord=np.inf) < 1e-10 for other in pts):
                pts.append(mix)
    return pts


def detect_implicit_potential(game: Game) -> StructureReport:
    """Potential structure of the implicit game obtained by substituting the
    (single-valued, piecewise-affine) solution map into each objective.

    Boundary consistency of the per-piece potentials is sampled, not proved;
    the report is flagged accordingly.
    """
    sv = is_single_valued(game.follower)
    if not sv:
        raise CapabilityError(f"solution map may be multivalued: {sv.reason}")
    lay = game.layout
    pieces = enumerate_pieces(game.follower)
    per_piece = []
    for piece in pieces:
        subs = _substituted_objectives(game, piece)
        by_var = {}
        for i in range(lay.nleaders):
            for a in lay.x_indices(i):
                by_var[a] = subs[i]
        F = _own_gradient_field(by_var)
        w = _symmetry_witness(F)
        if w is not None:
            w.detail += f" (piece alpha={piece.alpha})"
            return StructureReport(kind="none", witness=w, sampled=True)
        pi0 = construct_potential(F)
        per_piece.append([piece, pi0, subs[0].constant_term(), False])

    # Offsets: anchor the first piece of each connected component so that
    # pi - (leader 1 substituted objective) vanishes at the origin, then
    # propagate across shared boundaries and cross-check every sample.
    scale = max([1.0] + [rec[1].max_coeff() for rec in per_piece])
    npieces = len(per_piece)
    samples = {}
    for a in range(npieces):
        for b in range(a + 1, npieces):
            pts = _boundary_samples(per_piece[a][0].validity,
                                    per_piece[b][0].validity, lay.mtot)
            if pts:
                samples[(a, b)] = pts
    offsets = [None] * npieces
    order = []
    for root in range(npieces):
        if offsets[root] is not None:
            continue
        offsets[root] = per_piece[root][2]
        stack = [root]
        while stack:
            k = stack.pop()
            order.append(k)
            for (a, b), pts in samples.items():
                other = None
                if a == k and offsets[b] is None:
                    other = b
                elif b == k and offsets[a] is None:
                    other = a
                if other is None:
                    continue
                pk = per_piece[k][1]
                po = per_piece[other][1]
                vals = [pk(pt) + offsets[k] - po(pt) for pt in pts]
                offsets[other] = vals[0]
                stack.append(other)
    # full cross-check on every shared boundary sample
    for (a, b), pts in samples.items():
        pa, pb = per_piece[a][1], per_piece[b][1]
        for pt in pts:
            va = pa(pt) + offsets[a]
            vb = pb(pt) + offsets[b]
            if abs(va - vb) > BOUNDARY_TOL * max(1.0, scale, abs(va), abs(vb)):
                return StructureReport(
                    kind="none",
                    witness=Witness(
                        kind="boundary",
                        var_pair=(a, b),
                        detail=(
                            f"piece potentials disagree at boundary point "
                            f"{pt.tolist()}: {va:.12g} vs {vb:.12g}"
                        ),
                    ),
                    sampled=True,
                )
    piece_pots = [
        (rec[0], rec[1] + Polynomial.constant(lay.mtot, off))
        for rec, off in zip(per_piece, offsets)
    ]
    return StructureReport(
        kind="implicit_potential",
        pi=piece_pots[0][1],
        pieces=piece_pots,
        sampled=True,
    )
