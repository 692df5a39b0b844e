"""Sparse multivariate polynomials over a fixed ambient variable list.

Terms map exponent tuples (one slot per ambient variable) to float
coefficients. Coefficients with magnitude <= COEFF_PRUNE are dropped so
that symbolic identity tests stay stable.
"""

from __future__ import annotations

import numpy as np

from .defaults import COEFF_PRUNE, COEFF_TOL
from . import kernels


class Polynomial:
    __slots__ = ("arity", "terms", "_coeffs", "_exps")

    def __init__(self, arity: int, terms=None):
        self.arity = int(arity)
        clean = {}
        if terms:
            for exps, coeff in terms.items():
                exps = tuple(int(e) for e in exps)
                if len(exps) != self.arity:
                    raise ValueError(
                        f"exponent vector {exps} has length {len(exps)}, expected {self.arity}"
                    )
                if any(e < 0 for e in exps):
                    raise ValueError(f"negative exponent in {exps}")
                c = clean.get(exps, 0.0) + float(coeff)
                if abs(c) > COEFF_PRUNE:
                    clean[exps] = c
                elif exps in clean:
                    del clean[exps]
        self.terms = clean
        self._coeffs = None
        self._exps = None

    # -- constructors ------------------------------------------------------

    @classmethod
    def zero(cls, arity: int) -> "Polynomial":
        return cls(arity, {})

    @classmethod
    def constant(cls, arity: int, value: float) -> "Polynomial":
        return cls(arity, {tuple([0] * arity): value})

    @classmethod
    def variable(cls, arity: int, index: int, coeff: float = 1.0) -> "Polynomial":
        e = [0] * arity
        e[index] = 1
        return cls(arity, {tuple(e): coeff})

    # -- array cache for the kernels ---------------------------------------

    def _arrays(self):
        if self._coeffs is None:
            items = sorted(self.terms.items())
            self._coeffs = np.array([c for _, c in items], dtype=np.float64)
            if items:
                self._exps = np.array([e for e, _ in items], dtype=np.int64)
            else:
                self._exps = np.zeros((0, self.arity), dtype=np.int64)
            self._coeffs = np.ascontiguousarray(self._coeffs)
            self._exps = np.ascontiguousarray(self._exps)
        return self._coeffs, self._exps

    # -- evaluation ---------------------------------------------------------

    def __call__(self, point) -> float:
        point = np.ascontiguousarray(point, dtype=np.float64)
        if point.shape != (self.arity,):
            raise ValueError(f"point has shape {point.shape}, expected ({self.arity},)")
        coeffs, exps = self._arrays()
        return float(kernels.eval_point(coeffs, exps, point))

    def eval_many(self, points) -> np.ndarray:
        points = np.ascontiguousarray(points, dtype=np.float64)
        if points.ndim != 2 or points.shape[1] != self.arity:
            raise ValueError("points must be (k, arity)")
        out = np.empty(points.shape[0], dtype=np.float64)
        coeffs, exps = self._arrays()
        kernels.eval_batch(coeffs, exps, points, out)
        return out

    def grad_at(self, point) -> np.ndarray:
        point = np.ascontiguousarray(point, dtype=np.float64)
        if point.shape != (self.arity,):
            raise ValueError(f"point has shape {point.shape}, expected ({self.arity},)")
        out = np.empty(self.arity, dtype=np.float64)
        coeffs, exps = self._arrays()
        kernels.eval_grad(coeffs, exps, point, out)
        return out

    # -- algebra -------------------------------------------------------------

    def _binop(self, other, sign):
        if isinstance(other, (int, float)):
            other = Polynomial.constant(self.arity, float(other))
        if other.arity != self.arity:
            raise ValueError("arity mismatch")
        terms = dict(self.terms)
        for e, c in other.terms.items():
            terms[e] = terms.get(e, 0.0) + sign * c
        return Polynomial(self.arity, terms)

    def __add__(self, other):
        return self._binop(other, 1.0)

    __radd__ = __add__

    def __sub__(self, other):
        return self._binop(other, -1.0)

    def __rsub__(self, other):
        return (-self) + other

    def __neg__(self):
        return Polynomial(self.arity, {e: -c for e, c in self.terms.items()})

    def __mul__(self, other):
        if isinstance(other, (int, float)):
            return Polynomial(self.arity, {e: c * other for e, c in self.terms.items()})
        if other.arity != self.arity:
            raise ValueError("arity mismatch")
        out = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                out[e] = out.get(e, 0.0) + c1 * c2
        return Polynomial(self.arity, out)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            raise ValueError("negative power")
        out = Polynomial.constant(self.arity, 1.0)
        for _ in range(k):
            out = out * self
        return out

    # -- calculus -------------------------------------------------------------

    def diff(self, var: int) -> "Polynomial":
        if not 0 <= var < self.arity:
            raise IndexError(f"variable {var} out of range for arity {self.arity}")
        out = {}
        for e, c in self.terms.items():
            k = e[var]
            if k == 0:
                continue
            de = list(e)
            de[var] = k - 1
            out[tuple(de)] = out.get(tuple(de), 0.0) + c * k
        return Polynomial(self.arity, out)

    def grad(self, block) -> list:
        """Partial derivatives for each variable index in `block` (iterable)."""
        return [self.diff(v) for v in block]

    # -- structure helpers -----------------------------------------------------

    def degree(self) -> int:
        return max((sum(e) for e in self.terms), default=0)

    def used_vars(self) -> set:
        used = set()
        for e in self.terms:
            for v, k in enumerate(e):
                if k:
                    used.add(v)
        return used

    def constant_term(self) -> float:
        return self.terms.get(tuple([0] * self.arity), 0.0)

    def max_coeff(self) -> float:
        return max((abs(c) for c in self.terms.values()), default=0.0)

    def rename(self, mapping: dict, new_arity: int) -> "Polynomial":
        """Move variables to new slots: mapping old index -> new index.

        Every variable actually used must be mapped; slots may collide only
        if no term uses both preimages.
        """
        out = {}
        for e, c in self.terms.items():
            ne = [0] * new_arity
            for v, k in enumerate(e):
                if k == 0:
                    continue
                if v not in mapping:
                    raise ValueError(f"variable {v} used but not mapped")
                ne[mapping[v]] += k
            key = tuple(ne)
            out[key] = out.get(key, 0.0) + c
        return Polynomial(new_arity, out)

    def fix(self, assignments: dict) -> "Polynomial":
        """Substitute constants for the given variables (same arity; the
        fixed slots no longer appear in any term)."""
        out = {}
        for e, c in self.terms.items():
            for v, val in assignments.items():
                k = e[v]
                if k:
                    c = c * (val ** k)
                    de = list(e)
                    de[v] = 0
                    e = tuple(de)
            if c != 0.0:
                out[e] = out.get(e, 0.0) + c
        return Polynomial(self.arity, out)

    def compress(self, keep) -> "Polynomial":
        """Project onto the listed variables (which must cover every used
        variable); result arity = len(keep)."""
        keep = list(keep)
        mapping = {old: new for new, old in enumerate(keep)}
        return self.rename(mapping, len(keep))

    def substitute_affine(self, rows: dict, new_arity: int, passthrough: dict) -> "Polynomial":
        """Compose: each var in `rows` becomes an affine map (w, const) over
        the new space; each var in `passthrough` maps to a new slot."""
        cache = {}

        def image(v):
            if v in cache:
                return cache[v]
            if v in rows:
                w, const = rows[v]
                terms = {tuple([0] * new_arity): float(const)}
                for j, coeff in enumerate(w):
                    if coeff != 0.0:
                        e = [0] * new_arity
                        e[j] = 1
                        terms[tuple(e)] = float(coeff)
                p = Polynomial(new_arity, terms)
            else:
                p = Polynomial.variable(new_arity, passthrough[v])
            cache[v] = p
            return p

        acc = Polynomial.zero(new_arity)
        for e, c in self.terms.items():
            mono = Polynomial.constant(new_arity, c)
            for v, k in enumerate(e):
                if k:
                    mono = mono * (image(v) ** k)
            acc = acc + mono
        return acc

    def quadratic_parts(self):
        """Return (Q, c, k) with p(z) = 0.5 z'Qz + c'z + k; error if degree > 2."""
        n = self.arity
        Q = np.zeros((n, n))
        c = np.zeros(n)
        k = 0.0
        for e, coeff in self.terms.items():
            nz = [(v, p) for v, p in enumerate(e) if p]
            deg = sum(p for _, p in nz)
            if deg == 0:
                k += coeff
            elif deg == 1:
                c[nz[0][0]] += coeff
            elif deg == 2:
                if len(nz) == 1:
                    v = nz[0][0]
                    Q[v, v] += 2.0 * coeff
                else:
                    (u, _), (v, _) = nz
                    Q[u, v] += coeff
                    Q[v, u] += coeff
            else:
                raise ValueError("polynomial degree exceeds 2")
        return Q, c, k

    # -- comparison and display -------------------------------------------------

    def coeff_distance(self, other: "Polynomial") -> float:
        keys = set(self.terms) | set(other.terms)
        return max(
            (abs(self.terms.get(e, 0.0) - other.terms.get(e, 0.0)) for e in keys),
            default=0.0,
        )

    def equals(self, other: "Polynomial", tol: float = COEFF_TOL) -> bool:
        scale = max(1.0, self.max_coeff(), other.max_coeff())
        return self.coeff_distance(other) <= tol * scale

    def is_zero(self, tol: float = COEFF_TOL) -> bool:
        return all(abs(c) <= tol for c in self.terms.values())

    def to_spec(self) -> list:
        """Game-file monomial list form."""
        return [
            {"coeff": c, "exps": list(e)} for e, c in sorted(self.terms.items())
        ]

    @classmethod
    def from_spec(cls, arity: int, items) -> "Polynomial":
        terms = {}
        for it in items:
            e = tuple(int(v) for v in it["exps"])
            terms[e] = terms.get(e, 0.0) + float(it["coeff"])
        return cls(arity, terms)

    def pretty(self, names=None) -> str:
        if not self.terms:
            return "0"
        if names is None:
            names = [f"z{i}" for i in range(self.arity)]
        parts = []
        for e, c in sorted(self.terms.items()):
            factors = [
                names[v] if k == 1 else f"{names[v]}^{k}"
                for v, k in enumerate(e)
                if k
            ]
            mono = "*".join(factors)
            if mono:
                parts.append(f"{c:+g}*{mono}")
            else:
                parts.append(f"{c:+g}")
        return " ".join(parts)

    def __repr__(self):
        return f"Polynomial(arity={self.arity}, {self.pretty()})"

    def __eq__(self, other):
        return (
            isinstance(other, Polynomial)
            and self.arity == other.arity
            and self.terms == other.terms
        )

    def __hash__(self):
        return hash((self.arity, tuple(sorted(self.terms.items()))))
