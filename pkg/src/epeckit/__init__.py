"""Multi-leader multi-follower game toolkit.

Models games whose followers' equilibrium is a parametric LCP, detects
potential / quasi-potential structure in the leaders' objectives, solves the
associated MPEC reformulations globally at desk scale, and certifies computed
points against the equilibrium and stationarity hierarchy.
"""

from .errors import (
    CapabilityError,
    ContractViolation,
    EpecError,
    InternalConsistencyError,
    ParseError,
    PreconditionError,
    SemanticError,
)
from .kernels import backend_name
from .lcp import (
    LcpSolutions,
    LemkeResult,
    ParametricLcp,
    Piece,
    enumerate_pieces,
    is_single_valued,
    lcp_solve,
    lemke_solve,
)
from .model import (
    Game,
    LeaderProblem,
    Polyhedron,
    VariableLayout,
    membership_F,
    parse_game,
    parse_point,
    serialize_game,
)
from .poly import Polynomial

__version__ = "0.1.0"

__all__ = [
    "backend_name",
    "CapabilityError",
    "ContractViolation",
    "EpecError",
    "Game",
    "InternalConsistencyError",
    "LcpSolutions",
    "LeaderProblem",
    "LemkeResult",
    "ParametricLcp",
    "ParseError",
    "Piece",
    "Polyhedron",
    "Polynomial",
    "PreconditionError",
    "SemanticError",
    "VariableLayout",
    "enumerate_pieces",
    "is_single_valued",
    "lcp_solve",
    "lemke_solve",
    "membership_F",
    "parse_game",
    "parse_point",
    "serialize_game",
]
