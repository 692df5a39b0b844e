"""Built-in example games: the symmetric hierarchical Cournot family and the
two-leader one-follower game of Pang and Fukushima with its variants."""

from __future__ import annotations

import numpy as np

from .errors import SemanticError
from .lcp import ParametricLcp
from .model import Game, LeaderProblem, Polyhedron, VariableLayout
from .poly import Polynomial

PF_VARIANTS = ("original", "quasi-plus", "quasi-minus", "shared")


def pang_fukushima(variant: str = "original") -> Game:
    """Two leaders on [0,1] with one follower solving
    min_{y>=0} y(x1+x2-1) + y^2/2, i.e. y = max(0, 1-x1-x2).

    original:    phi1 = x1/2 + y1,  phi2 = -x2/2 - y2
    quasi-plus:  h(y) = +y applied to both leaders' follower terms
    quasi-minus: h(y) = -y applied to both
    shared:      original objectives, all-equilibrium-constraints formulation
    """
    if variant not in PF_VARIANTS:
        raise SemanticError(f"unknown Pang-Fukushima variant {variant!r}")
    s1, s2 = {
        "original": (1.0, -1.0),
        "shared": (1.0, -1.0),
        "quasi-plus": (1.0, 1.0),
        "quasi-minus": (-1.0, -1.0),
    }[variant]
    layout = VariableLayout(m=(1, 1), p=1)
    phi1 = Polynomial(4, {(1, 0, 0, 0): 0.5, (0, 0, 1, 0): s1})
    phi2 = Polynomial(4, {(0, 1, 0, 0): -0.5, (0, 0, 0, 1): s2})
    unit = Polyhedron([[1.0], [-1.0]], [0.0, -1.0])
    free = Polyhedron(np.zeros((0, 1)), [])
    follower = ParametricLcp([[1.0]], [[1.0, 1.0]], [-1.0])
    formulation = "ae" if variant == "shared" else "original"
    return Game(
        leaders=(
            LeaderProblem(objective=phi1, x_set=unit, y_set=free),
            LeaderProblem(objective=phi2, x_set=unit, y_set=free),
        ),
        follower=follower,
        formulation=formulation,
        layout=layout,
    )


def cournot(a: float, b: float, c: float, leaders: int, followers: int,
            full_followers: bool = False) -> Game:
    """Symmetric hierarchical Cournot game with N identical leaders and n
    identical followers (price a - b * total quantity, quadratic costs c/2).

    The default emits the reduced form: one scalar conjecture per leader
    tied by the aggregated follower optimality row
        0 <= yhat  perp  (c + b(n+1)) yhat + b*sum(x) - a >= 0.
    With full_followers=True the n-dimensional follower LCP
        M = b(I + ee') + cI is emitted instead.
    """
    if not (a > 0 and b > 0 and c > 0):
        raise SemanticError("a, b, c must be positive")
    if leaders < 1 or followers < 1:
        raise SemanticError("leader and follower counts must be at least 1")
    N, n = int(leaders), int(followers)
    p = n if full_followers else 1
    layout = VariableLayout(m=tuple([1] * N), p=p)
    ar = layout.n
    orthant_x = Polyhedron([[1.0]], [0.0])
    orthant_y = Polyhedron(np.eye(p), np.zeros(p))
    leaders_list = []
    for i in range(N):
        terms = {}

        def add(e, coeff):
            terms[tuple(e)] = terms.get(tuple(e), 0.0) + coeff

        e = [0] * ar
        e[i] = 2
        add(e, 0.5 * c + b)  # c/2 x_i^2 plus the own square from b x_i sum(x)
        e = [0] * ar
        e[i] = 1
        add(e, -a)
        for j in range(N):
            if j == i:
                continue
            e = [0] * ar
            e[i] = 1
            e[j] = 1
            add(e, b)
        for k in range(p):
            e = [0] * ar
            e[i] = 1
            e[layout.y_indices(i)[k]] = 1
            add(e, b * (n if not full_followers else 1))
        leaders_list.append(
            LeaderProblem(objective=Polynomial(ar, terms), x_set=orthant_x,
                          y_set=orthant_y)
        )
    if full_followers:
        M = b * (np.eye(n) + np.ones((n, n))) + c * np.eye(n)
        Nmat = b * np.ones((n, N))
        q = -a * np.ones(n)
    else:
        M = np.array([[c + b * (n + 1)]])
        Nmat = b * np.ones((1, N))
        q = np.array([-a])
    return Game(
        leaders=tuple(leaders_list),
        follower=ParametricLcp(M, Nmat, q),
        formulation="original",
        layout=layout,
    )


def cournot_equilibrium_formula(a, b, c, N, n):
    """Closed-form symmetric equilibrium of the original Cournot game."""
    return a * (b + c) / (b * (b + c) * (N + 1) + c * (b + c) + b * c * n)


def cournot_follower_reaction(a, b, c, n, xsum):
    """Aggregate follower best response: the unique yhat for given sum(x)."""
    return max(0.0, (a - b * xsum) / (c + b * (n + 1)))
