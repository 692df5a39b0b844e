"""The compiled extension and the numpy fallback must agree exactly."""

import numpy as np
import pytest

from epeckit import _fallback, kernels


def random_poly_arrays(rng, arity, nterms):
    exps = rng.integers(0, 4, size=(nterms, arity)).astype(np.int64)
    coeffs = rng.uniform(-3, 3, size=nterms)
    return np.ascontiguousarray(coeffs), np.ascontiguousarray(exps)


@pytest.mark.parametrize("arity", [1, 2, 5])
def test_eval_point_agreement(arity):
    rng = np.random.default_rng(arity)
    coeffs, exps = random_poly_arrays(rng, arity, 9)
    for _ in range(50):
        z = np.ascontiguousarray(rng.uniform(-2, 2, arity))
        a = kernels.eval_point(coeffs, exps, z)
        b = _fallback.eval_point(coeffs, exps, z)
        assert a == pytest.approx(b, rel=1e-13, abs=1e-13)


def test_eval_batch_agreement():
    rng = np.random.default_rng(0)
    coeffs, exps = random_poly_arrays(rng, 3, 7)
    pts = np.ascontiguousarray(rng.uniform(-2, 2, size=(257, 3)))
    out_a = np.empty(257)
    out_b = np.empty(257)
    kernels.eval_batch(coeffs, exps, pts, out_a)
    _fallback.eval_batch(coeffs, exps, pts, out_b)
    assert np.abs(out_a - out_b).max() <= 1e-12


def test_eval_grad_agreement_including_zeros():
    rng = np.random.default_rng(1)
    coeffs, exps = random_poly_arrays(rng, 4, 11)
    pts = [
        rng.uniform(-2, 2, 4),
        np.array([0.0, 1.0, -1.0, 2.0]),
        np.array([0.0, 0.0, 3.0, 1.0]),
        np.zeros(4),
    ]
    for z in pts:
        z = np.ascontiguousarray(z)
        ga = np.empty(4)
        gb = np.empty(4)
        kernels.eval_grad(coeffs, exps, z, ga)
        _fallback.eval_grad(coeffs, exps, z, gb)
        assert np.abs(ga - gb).max() <= 1e-12


def test_empty_polynomial():
    coeffs = np.zeros(0)
    exps = np.zeros((0, 2), dtype=np.int64)
    z = np.array([1.0, 2.0])
    assert kernels.eval_point(coeffs, exps, z) == 0.0
    out = np.empty(3)
    kernels.eval_batch(coeffs, exps, np.zeros((3, 2)), out)
    assert np.all(out == 0.0)


def test_backend_reports_a_name():
    assert kernels.backend_name() in ("compiled", "fallback")
