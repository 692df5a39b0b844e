import numpy as np
import pytest

from epeckit import Polynomial
from epeckit.defaults import COEFF_PRUNE


def fd_gradient(poly, point, h=1e-5):
    """Central finite differences; the independent oracle for grad_at."""
    g = np.zeros(poly.arity)
    for v in range(poly.arity):
        up = point.copy()
        dn = point.copy()
        up[v] += h
        dn[v] -= h
        g[v] = (poly(up) - poly(dn)) / (2 * h)
    return g


def test_zero_polynomial_evaluates_to_zero():
    z = Polynomial.zero(3)
    assert z(np.array([1.0, -2.0, 7.5])) == 0.0


def test_pf_leader_objective_value():
    # phi1 = x1/2 + y1 at (x1, y1) = (1, 0.5)
    p = Polynomial(2, {(1, 0): 0.5, (0, 1): 1.0})
    assert p(np.array([1.0, 0.5])) == pytest.approx(1.0, abs=1e-15)


def test_quadratic_cost_minus_revenue_value():
    # (c/2) x^2 - x (a - b x) with a = b = c = 1 expands to (3/2)x^2 - x,
    # so the value at x = 1 is 0.5.
    p = Polynomial(1, {(2,): 1.5, (1,): -1.0})
    assert p(np.array([1.0])) == pytest.approx(0.5, abs=1e-15)


def test_gradient_of_constant_is_zero_polynomial():
    p = Polynomial.constant(2, 7.0)
    d = p.diff(0)
    assert d.terms == {}
    assert d(np.array([3.0, 4.0])) == 0.0


def test_gradient_of_pf_objective():
    p = Polynomial(2, {(1, 0): 0.5, (0, 1): 1.0})
    d = p.diff(0)
    assert d.terms == {(0, 0): 0.5}


def test_cournot_stationarity_row():
    # d/dx_i of (c/2) x_i^2 - x_i (a - b (sum_j x_j + n yhat_i)) must equal
    # (b + c) x_i - a + b (sum_j x_j + n yhat_i) as a polynomial identity.
    a, b, c, n, N = 10.0, 1.0, 1.0, 2, 3
    ar = 2 * N
    i = 0
    terms = {}

    def add(e, coeff):
        terms[tuple(e)] = terms.get(tuple(e), 0.0) + coeff

    e = [0] * ar
    e[i] = 2
    add(e, 0.5 * c + b)
    e = [0] * ar
    e[i] = 1
    add(e, -a)
    for j in range(N):
        if j != i:
            e = [0] * ar
            e[i] = 1
            e[j] = 1
            add(e, b)
    e = [0] * ar
    e[i] = 1
    e[N + i] = 1
    add(e, n * b)
    phi = Polynomial(ar, terms)

    expect = {}
    e = [0] * ar
    e[i] = 1
    expect[tuple(e)] = b + c + b  # (b+c) x_i plus the x_i inside b*sum x_j
    for j in range(N):
        if j != i:
            e = [0] * ar
            e[j] = 1
            expect[tuple(e)] = b
    e = [0] * ar
    e[N + i] = 1
    expect[tuple(e)] = n * b
    e = [0] * ar
    expect[tuple(e)] = -a
    assert phi.diff(i).equals(Polynomial(ar, expect))


def test_gradient_matches_finite_differences():
    rng = np.random.default_rng(7)
    for _ in range(10):
        arity = rng.integers(1, 5)
        nterms = rng.integers(1, 8)
        terms = {}
        for _ in range(nterms):
            e = tuple(rng.integers(0, 3, size=arity).tolist())
            terms[e] = terms.get(e, 0.0) + float(rng.uniform(-2, 2))
        p = Polynomial(int(arity), terms)
        for _ in range(100):
            z = rng.uniform(-1.5, 1.5, size=int(arity))
            g = p.grad_at(z)
            fd = fd_gradient(p, z)
            denom = max(1.0, float(np.abs(fd).max()))
            assert np.abs(g - fd).max() / denom <= 1e-6


def test_gradient_block_returns_polynomials():
    p = Polynomial(3, {(1, 1, 0): 2.0, (0, 0, 2): 1.0})
    gx = p.grad([0, 1])
    assert gx[0].terms == {(0, 1, 0): 2.0}
    assert gx[1].terms == {(1, 0, 0): 2.0}


def test_out_of_range_variable_rejected():
    p = Polynomial(2, {(1, 0): 1.0})
    with pytest.raises(IndexError):
        p.diff(5)
    with pytest.raises(ValueError):
        p(np.array([1.0, 2.0, 3.0]))


def test_coefficient_pruning():
    p = Polynomial(1, {(1,): 1e-16})
    assert p.terms == {}
    q = Polynomial(1, {(1,): 1.0}) + Polynomial(1, {(1,): -1.0})
    assert q.terms == {}
    assert COEFF_PRUNE == 1e-15


def test_arithmetic_identities():
    rng = np.random.default_rng(3)
    a = Polynomial(2, {(1, 0): 2.0, (0, 2): -1.0, (0, 0): 0.5})
    b = Polynomial(2, {(1, 1): 1.0, (0, 1): 3.0})
    pts = rng.uniform(-2, 2, size=(50, 2))
    for z in pts:
        assert (a + b)(z) == pytest.approx(a(z) + b(z), rel=1e-12, abs=1e-12)
        assert (a - b)(z) == pytest.approx(a(z) - b(z), rel=1e-12, abs=1e-12)
        assert (a * b)(z) == pytest.approx(a(z) * b(z), rel=1e-12, abs=1e-12)
        assert (a ** 2)(z) == pytest.approx(a(z) ** 2, rel=1e-12, abs=1e-12)


def test_fix_and_compress():
    p = Polynomial(3, {(1, 1, 0): 2.0, (0, 0, 1): 1.0})
    fixed = p.fix({1: 3.0})
    assert fixed.terms == {(1, 0, 0): 6.0, (0, 0, 1): 1.0}
    small = fixed.compress([0, 2])
    assert small.terms == {(1, 0): 6.0, (0, 1): 1.0}


def test_substitute_affine():
    # p(x, y) = x*y + y^2 with y = 2x + 1 gives 6x^2 + 5x + 1
    p = Polynomial(2, {(1, 1): 1.0, (0, 2): 1.0})
    q = p.substitute_affine({1: (np.array([2.0]), 1.0)}, 1, {0: 0})
    assert q.equals(Polynomial(1, {(2,): 6.0, (1,): 5.0, (0,): 1.0}))


def test_quadratic_parts_roundtrip():
    rng = np.random.default_rng(11)
    p = Polynomial(3, {(2, 0, 0): 1.5, (1, 1, 0): -2.0, (0, 0, 1): 4.0, (0, 0, 0): 3.0})
    Q, c, k = p.quadratic_parts()
    for _ in range(20):
        z = rng.uniform(-2, 2, 3)
        assert p(z) == pytest.approx(0.5 * z @ Q @ z + c @ z + k, rel=1e-12, abs=1e-12)
    cubic = Polynomial(1, {(3,): 1.0})
    with pytest.raises(ValueError):
        cubic.quadratic_parts()


def test_batch_evaluation_matches_pointwise():
    rng = np.random.default_rng(5)
    p = Polynomial(4, {(1, 0, 2, 0): 1.0, (0, 1, 0, 1): -0.5, (0, 0, 0, 0): 2.0})
    pts = rng.uniform(-1, 1, size=(64, 4))
    batch = p.eval_many(pts)
    single = np.array([p(z) for z in pts])
    assert np.abs(batch - single).max() <= 1e-14


def test_spec_monomial_roundtrip():
    p = Polynomial(2, {(1, 0): 0.1 + 0.2, (0, 2): -1.75})
    q = Polynomial.from_spec(2, p.to_spec())
    assert p == q
