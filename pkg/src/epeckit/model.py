"""Core data model: layouts, polyhedra, leader problems, the game container,
and the game-file parser/serializer.

Ambient variable order is canonical: x_1, ..., x_N, then y_1, ..., y_N
(or a single shared w block in quasi-form layouts). All types are immutable
after construction.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .defaults import TAU_FEAS
from .errors import ParseError, SemanticError
from .poly import Polynomial

FORMULATIONS = ("original", "ae", "bl", "ind")


@dataclass(frozen=True)
class Polyhedron:
    """Rows A z >= b. Zero rows mean the whole space."""

    A: np.ndarray
    b: np.ndarray

    def __init__(self, A, b, dim=None):
        A = np.asarray(A, dtype=float)
        b = np.asarray(b, dtype=float).reshape(-1)
        if A.size == 0:
            A = np.zeros((0, dim if dim is not None else 0))
        if A.ndim != 2:
            raise SemanticError("constraint matrix must be 2-D")
        if A.shape[0] != b.shape[0]:
            raise SemanticError("constraint rows and rhs length differ")
        if not (np.all(np.isfinite(A)) and np.all(np.isfinite(b))):
            raise SemanticError("constraint data must be finite")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)

    @property
    def nrows(self) -> int:
        return self.A.shape[0]

    @property
    def dim(self) -> int:
        return self.A.shape[1]

    def contains(self, z, tol=TAU_FEAS) -> bool:
        if self.nrows == 0:
            return True
        return bool(np.all(self.A @ np.asarray(z, float) >= self.b - tol))

    def residual(self, z) -> float:
        if self.nrows == 0:
            return 0.0
        return float(max(0.0, np.max(self.b - self.A @ np.asarray(z, float))))

    def same_as(self, other: "Polyhedron", tol=1e-12) -> bool:
        return (
            self.A.shape == other.A.shape
            and np.allclose(self.A, other.A, atol=tol, rtol=0)
            and np.allclose(self.b, other.b, atol=tol, rtol=0)
        )

    def to_spec(self):
        return {"A": self.A.tolist(), "b": self.b.tolist()}


@dataclass(frozen=True)
class VariableLayout:
    """Index bookkeeping for the ambient space.

    m: per-leader x sizes; p: follower block size; shared_w: True when the
    follower side is a single shared block (quasi-form instances).
    """

    m: tuple
    p: int
    shared_w: bool = False

    def __post_init__(self):
        if any(mi < 1 for mi in self.m) or self.p < 1:
            raise SemanticError("block sizes must be positive")

    @property
    def nleaders(self) -> int:
        return len(self.m)

    @property
    def mtot(self) -> int:
        return sum(self.m)

    @property
    def n(self) -> int:
        blocks = 1 if self.shared_w else self.nleaders
        return self.mtot + blocks * self.p

    def x_slice(self, i) -> slice:
        start = sum(self.m[:i])
        return slice(start, start + self.m[i])

    def y_slice(self, i=0) -> slice:
        if self.shared_w and i != 0:
            raise IndexError("shared layout has a single w block")
        start = self.mtot + i * self.p
        return slice(start, start + self.p)

    def x_indices(self, i):
        return list(range(*self.x_slice(i).indices(self.n)))

    def y_indices(self, i=0):
        return list(range(*self.y_slice(i).indices(self.n)))

    def all_x_indices(self):
        return list(range(self.mtot))

    def leader_of(self, var: int):
        """(kind, leader index) owning ambient variable `var`."""
        if var < self.mtot:
            acc = 0
            for i, mi in enumerate(self.m):
                if var < acc + mi:
                    return ("x", i)
                acc += mi
        else:
            j = (var - self.mtot) // self.p
            return ("w", 0) if self.shared_w else ("y", j)
        raise IndexError(var)

    def names(self):
        out = []
        for i, mi in enumerate(self.m):
            out += [f"x{i+1}"] if mi == 1 else [f"x{i+1}_{j+1}" for j in range(mi)]
        if self.shared_w:
            out += ["w"] if self.p == 1 else [f"w_{j+1}" for j in range(self.p)]
        else:
            for i in range(self.nleaders):
                out += [f"y{i+1}"] if self.p == 1 else [f"y{i+1}_{j+1}" for j in range(self.p)]
        return out


@dataclass(frozen=True)
class LeaderProblem:
    """One leader's objective and strategy sets (objective over the full
    ambient space; allowed variables are enforced by the Game validator)."""

    objective: Polynomial
    x_set: Polyhedron
    y_set: Polyhedron


@dataclass(frozen=True)
class Game:
    leaders: tuple
    follower: object  # ParametricLcp
    formulation: str
    layout: VariableLayout

    def __post_init__(self):
        lay = self.layout
        if lay.shared_w:
            raise SemanticError("game layouts use per-leader follower blocks")
        if self.formulation not in FORMULATIONS:
            raise SemanticError(f"unknown formulation {self.formulation!r}")
        if len(self.leaders) != lay.nleaders:
            raise SemanticError("leader count does not match layout")
        if len(self.leaders) == 0:
            raise SemanticError("game must have at least one leader")
        M, Nmat, q = self.follower.M, self.follower.Nmat, self.follower.q
        p = lay.p
        if M.shape != (p, p) or q.shape != (p,):
            raise SemanticError("follower LCP dimensions do not match layout p")
        if Nmat.shape != (p, lay.mtot):
            raise SemanticError("follower LCP N must be p x (sum of m_i)")
        for i, leader in enumerate(self.leaders):
            if leader.objective.arity != lay.n:
                raise SemanticError(f"leader {i+1} objective arity mismatch")
            allowed = set(lay.all_x_indices()) | set(lay.y_indices(i))
            bad = leader.objective.used_vars() - allowed
            if bad:
                v = min(bad)
                kind, j = lay.leader_of(v)
                raise SemanticError(
                    f"leader {i+1} objective references {kind}-block of leader "
                    f"{j+1} under formulation={self.formulation}"
                )
            if leader.x_set.nrows and leader.x_set.dim != lay.m[i]:
                raise SemanticError(f"leader {i+1} X set has wrong dimension")
            if leader.y_set.nrows and leader.y_set.dim != p:
                raise SemanticError(f"leader {i+1} Y set has wrong dimension")
        if self.formulation == "ind":
            for i, leader in enumerate(self.leaders):
                if leader.objective.used_vars() & set(lay.y_indices(i)):
                    raise SemanticError(
                        f"formulation=ind forbids leader {i+1} objective from "
                        "referencing its follower block"
                    )
        if self.formulation == "bl":
            self._check_bilevel_structure()

    def _check_bilevel_structure(self):
        lay = self.layout
        N = lay.nleaders
        p = lay.p
        if p % N:
            raise SemanticError("formulation=bl needs p divisible by the leader count")
        g = p // N
        M, Nmat = self.follower.M, self.follower.Nmat
        for i in range(N):
            rows = slice(i * g, (i + 1) * g)
            off = M[rows].copy()
            off[:, rows] = 0.0
            if np.any(off != 0.0):
                raise SemanticError("formulation=bl needs a block-diagonal LCP matrix")
            cols = np.ones(lay.mtot, dtype=bool)
            cols[lay.x_slice(i)] = False
            if np.any(Nmat[rows][:, cols] != 0.0):
                raise SemanticError(
                    "formulation=bl couples leader conjectures to rival decisions"
                )
            own = self.leaders[i].objective.used_vars() & set(lay.y_indices(i))
            allowed = set(lay.y_indices(i)[i * g:(i + 1) * g])
            if own - allowed:
                raise SemanticError(
                    f"formulation=bl: leader {i+1} objective uses follower rows "
                    "outside its own block"
                )

    # -- points ---------------------------------------------------------------

    def pack_point(self, x_blocks, y_blocks) -> np.ndarray:
        lay = self.layout
        z = np.zeros(lay.n)
        for i in range(lay.nleaders):
            xi = np.asarray(x_blocks[i], dtype=float).reshape(-1)
            if xi.shape != (lay.m[i],):
                raise SemanticError(f"x block {i+1} has wrong length")
            z[lay.x_slice(i)] = xi
            yi = np.asarray(y_blocks[i], dtype=float).reshape(-1)
            if yi.shape != (lay.p,):
                raise SemanticError(f"y block {i+1} has wrong length")
            z[lay.y_slice(i)] = yi
        return z

    def split_point(self, z):
        lay = self.layout
        z = np.asarray(z, dtype=float)
        xs = [z[lay.x_slice(i)].copy() for i in range(lay.nleaders)]
        ys = [z[lay.y_slice(i)].copy() for i in range(lay.nleaders)]
        return xs, ys


def membership_F(game: Game, x_blocks, y_blocks, tol: float = TAU_FEAS) -> bool:
    """Point membership in the common feasible set: x_i in X_i, y_i in Y_i and
    y_i in S(x) for every leader. By Prop-style fixed-point equality the same
    predicate serves the original and all-equilibrium-constraint formulations.
    """
    lay = game.layout
    xflat = np.concatenate([np.asarray(xi, float).reshape(-1) for xi in x_blocks])
    if xflat.shape != (lay.mtot,):
        raise SemanticError("x blocks do not match layout")
    M, Nmat, q = game.follower.M, game.follower.Nmat, game.follower.q
    for i in range(lay.nleaders):
        xi = np.asarray(x_blocks[i], float).reshape(-1)
        yi = np.asarray(y_blocks[i], float).reshape(-1)
        if not game.leaders[i].x_set.contains(xi, tol):
            return False
        if not game.leaders[i].y_set.contains(yi, tol):
            return False
        w = M @ yi + Nmat @ xflat + q
        if np.min(yi, initial=0.0) < -tol or np.min(w, initial=0.0) < -tol:
            return False
        if abs(float(yi @ w)) > tol:
            return False
    return True


# -- game files ----------------------------------------------------------------


def parse_game(text: str) -> Game:
    """Parse a UTF-8 game file (JSON tree, see README for the schema)."""
    from .lcp import ParametricLcp

    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, line=exc.lineno, column=exc.colno) from exc
    try:
        m = tuple(int(v) for v in doc["layout"]["m"])
        p = int(doc["layout"]["p"])
        formulation = str(doc["formulation"])
        fol = doc["follower"]
        leaders_doc = doc["leaders"]
    except (KeyError, TypeError) as exc:
        raise SemanticError(f"missing or malformed game-file key: {exc}") from exc
    if len(leaders_doc) == 0:
        raise SemanticError("game file lists no leaders")
    if len(m) != len(leaders_doc):
        raise SemanticError("layout.m length does not match the leader list")
    layout = VariableLayout(m=m, p=p)
    lcp = ParametricLcp(fol["M"], fol["N"], fol["q"])
    leaders = []
    for i, ld in enumerate(leaders_doc):
        try:
            obj = Polynomial.from_spec(layout.n, ld["objective"])
        except (KeyError, TypeError, ValueError) as exc:
            raise SemanticError(f"leader {i+1} objective malformed: {exc}") from exc
        xs = Polyhedron(ld["X"]["A"], ld["X"]["b"], dim=m[i])
        ys = Polyhedron(ld["Y"]["A"], ld["Y"]["b"], dim=p)
        leaders.append(LeaderProblem(objective=obj, x_set=xs, y_set=ys))
    return Game(leaders=tuple(leaders), follower=lcp, formulation=formulation, layout=layout)


def serialize_game(game: Game) -> str:
    """Canonical text form: sorted monomials, lossless float repr."""
    doc = {
        "layout": {"m": list(game.layout.m), "p": game.layout.p},
        "formulation": game.formulation,
        "follower": {
            "M": game.follower.M.tolist(),
            "N": game.follower.Nmat.tolist(),
            "q": game.follower.q.tolist(),
        },
        "leaders": [
            {
                "objective": ld.objective.to_spec(),
                "X": ld.x_set.to_spec(),
                "Y": ld.y_set.to_spec(),
            }
            for ld in game.leaders
        ],
    }
    return json.dumps(doc, indent=1, sort_keys=True)


def parse_point(text: str, game: Game):
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, line=exc.lineno, column=exc.colno) from exc
    try:
        xs = [np.asarray(v, dtype=float).reshape(-1) for v in doc["x"]]
        ys = [np.asarray(v, dtype=float).reshape(-1) for v in doc["y"]]
    except (KeyError, TypeError, ValueError) as exc:
        raise SemanticError(f"point file malformed: {exc}") from exc
    lay = game.layout
    if len(xs) != lay.nleaders or len(ys) != lay.nleaders:
        raise SemanticError("point file block count does not match the game")
    game.pack_point(xs, ys)  # dimension validation
    return xs, ys
