import math

import numpy as np
import pytest

from helpers import fd_grad, fd_hess, rel_ok
from tensionlab.jets import (
    JetDomainError,
    constant,
    jet_apply,
    jet_seed,
    jexp,
    jlog,
    jpow,
    jsqrt,
    seed,
)
from tensionlab.exprlang import parse


def test_seed_basics():
    j = jet_seed((3.0, 0.0), 0)
    assert j.value == 3.0
    assert np.array_equal(j.grad, [1.0, 0.0])
    assert np.array_equal(j.hess, np.zeros((2, 2)))
    k = jet_seed((0.0, 2.0), 1)
    assert k.value == 2.0
    assert np.array_equal(k.grad, [0.0, 1.0])


def test_seed_index_out_of_range():
    with pytest.raises(IndexError):
        jet_seed((1.0, 2.0), 5)


def test_sin_of_seed_at_zero():
    j = jet_apply("sin", seed((0.0,), 0))
    assert j.value == 0.0
    assert np.allclose(j.grad, [1.0])
    assert np.allclose(j.hess, [[0.0]])


def test_exp_x_times_y():
    x = seed((0.0, 2.0), 0)
    y = seed((0.0, 2.0), 1)
    j = jexp(x) * y
    assert j.value == 2.0
    assert np.allclose(j.grad, [2.0, 1.0])
    assert np.isclose(j.hess[0, 1], 1.0)
    assert np.isclose(j.hess[1, 0], 1.0)


def test_log_domain_error():
    with pytest.raises(JetDomainError):
        jlog(constant(-1.0, 1))
    with pytest.raises(JetDomainError):
        jet_apply("log", constant(0.0, 2))


def test_sqrt_domain_error():
    with pytest.raises(JetDomainError):
        jsqrt(constant(-4.0, 1))


def test_div_by_tiny_value_is_domain_error():
    with pytest.raises(JetDomainError):
        constant(1.0, 1) / constant(1e-320, 1)


def test_pow_integer_negative_base():
    j = jpow(constant(-2.0, 1), 3)
    assert j.value == -8.0
    j = jpow(seed((-2.0,), 0), 2)
    assert j.value == 4.0
    assert np.allclose(j.grad, [-4.0])
    assert np.allclose(j.hess, [[2.0]])


def test_pow_negative_integer_exponent():
    j = jpow(seed((2.0,), 0), -2)
    assert np.isclose(j.value, 0.25)
    assert np.allclose(j.grad, [-0.25])  # d(x^-2) = -2 x^-3


def test_pow_non_integer_requires_positive_base():
    with pytest.raises(JetDomainError):
        jpow(constant(-1.0, 1), 0.5)
    j = jpow(seed((4.0,), 0), 0.5)
    assert np.isclose(j.value, 2.0)
    assert np.allclose(j.grad, [0.25])


def test_pow_jet_exponent_matches_exp_log():
    a = seed((1.3, 0.4), 0) + 1.0
    b = seed((1.3, 0.4), 1)
    direct = jpow(a, b)
    via = jexp(b * jlog(a))
    assert np.isclose(direct.value, via.value)
    assert np.allclose(direct.grad, via.grad)
    assert np.allclose(direct.hess, via.hess)


def test_constant_jets_reduce_to_plain_arithmetic():
    # Bit-for-bit agreement with the same operations on raw floats.
    pairs = [(0.3, 1.7), (2.0, -0.25), (5.5, 3.0), (-1.5, 0.7)]
    for a, b in pairs:
        ja, jb = constant(a, 2), constant(b, 2)
        assert (ja + jb).value == a + b
        assert (ja - jb).value == a - b
        assert (ja * jb).value == a * b
        assert (ja / jb).value == a / b
        assert (-ja).value == -a
        assert jexp(ja).value == math.exp(a)
        assert jet_apply("sin", ja).value == math.sin(a)
        assert jet_apply("cos", ja).value == math.cos(a)
    assert jlog(constant(2.5, 2)).value == math.log(2.5)
    assert jsqrt(constant(2.5, 2)).value == math.sqrt(2.5)


COMPOSITES = [
    "exp(0.3*x)*sin(y)+x*y",
    "log(1.5+x^2+y^2)",
    "sqrt(1.2+x^2)*cos(0.7*y)",
    "(x-y)/(1.5+x^2)",
    "sin(x*y)+cos(x)^3",
    "pow(1.1+x^2, 1.5)+y",
    "exp(x*y/4)-x^3",
    "x^2*y - y^2/(2+sin(x))",
    "sqrt(1.1+(x+y)^2)",
    "log(2+cos(x)*sin(y))",
]

POINTS = [(0.4, -0.9), (1.2, 0.5)]


@pytest.mark.parametrize("src", COMPOSITES)
@pytest.mark.parametrize("pt", POINTS)
def test_jets_match_finite_differences(src, pt):
    f = parse(src, ("x", "y"))
    x = np.asarray(pt)
    jet = f.evaluate(x)
    assert rel_ok(jet.grad, fd_grad(f.value, x, 1e-5), 1e-5)
    assert rel_ok(jet.hess, fd_hess(f.value, x, 1e-4), 1e-3)


@pytest.mark.parametrize("src", COMPOSITES)
def test_hessian_symmetric(src):
    f = parse(src, ("x", "y"))
    jet = f.evaluate(np.array([0.7, 1.3]))
    assert np.array_equal(jet.hess, jet.hess.T)


def test_jet_apply_arities():
    with pytest.raises(ValueError):
        jet_apply("add", constant(1.0, 1))
    with pytest.raises(ValueError):
        jet_apply("neg", constant(1.0, 1), constant(1.0, 1))
    with pytest.raises(ValueError):
        jet_apply("nonsense", constant(1.0, 1))


def test_product_rule_exact():
    x = seed((1.5, -0.5), 0)
    y = seed((1.5, -0.5), 1)
    f = x * x * y
    assert np.isclose(f.value, 1.5 * 1.5 * -0.5)
    assert np.allclose(f.grad, [2 * 1.5 * -0.5, 1.5 * 1.5])
    assert np.allclose(f.hess, [[2 * -0.5, 2 * 1.5], [2 * 1.5, 0.0]])
