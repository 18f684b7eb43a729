"""Second-order forward-mode derivative tower in n chart variables.

A ``Jet2`` bundles a value with its gradient and (symmetric) Hessian with
respect to the chart coordinates.  Arithmetic propagates exact product and
chain rules, so any quantity composed from the supported operations carries
machine-precision first and second derivatives.  Everything downstream
(metric entries, frame fields, conformal factors) evaluates through this
type; no numerical differentiation is involved anywhere in the main path.

The tower is fixed at order two on purpose: every identity checked by the
package can be arranged to need at most second derivatives of the input
fields (see the projector-commutator trick in :mod:`tensionlab.conformal`).
"""

from __future__ import annotations

import math

import numpy as np

__all__ = [
    "Jet2",
    "JetDomainError",
    "seed",
    "constant",
    "jet_seed",
    "jet_apply",
    "jexp",
    "jlog",
    "jsin",
    "jcos",
    "jsqrt",
    "jpow",
]

# Division by a jet whose value is smaller than this is a domain error:
# deterministic failure instead of silent infinities.
DIV_FLOOR = 1e-300


class JetDomainError(ArithmeticError):
    """A jet operation left its domain (log of a non-positive value, ...).

    Carries the offending operation name and the value that broke it so
    callers can annotate the error with source context.
    """

    def __init__(self, op: str, value, message: str | None = None):
        self.op = op
        self.value = value
        super().__init__(message or f"{op}: value {value!r} outside domain")


class Jet2:
    """Value, gradient and symmetric Hessian at a point.

    Instances are immutable by convention and safe to share across
    concurrent evaluations.  Scalars (int/float) mix freely with jets and
    are lifted to constants.
    """

    __slots__ = ("value", "grad", "hess")

    def __init__(self, value: float, grad, hess):
        self.value = float(value)
        self.grad = np.asarray(grad, dtype=float)
        self.hess = np.asarray(hess, dtype=float)

    @property
    def n(self) -> int:
        return self.grad.shape[0]

    def is_constant(self, tol: float = 0.0) -> bool:
        return bool(np.all(np.abs(self.grad) <= tol) and np.all(np.abs(self.hess) <= tol))

    def __repr__(self) -> str:
        return f"Jet2({self.value!r}, grad={self.grad.tolist()!r})"

    # -- lifting ----------------------------------------------------------

    def _lift(self, other) -> "Jet2":
        if isinstance(other, Jet2):
            return other
        return constant(other, self.n)

    # -- ring operations ---------------------------------------------------

    def __add__(self, other) -> "Jet2":
        o = self._lift(other)
        return Jet2(self.value + o.value, self.grad + o.grad, self.hess + o.hess)

    __radd__ = __add__

    def __sub__(self, other) -> "Jet2":
        o = self._lift(other)
        return Jet2(self.value - o.value, self.grad - o.grad, self.hess - o.hess)

    def __rsub__(self, other) -> "Jet2":
        o = self._lift(other)
        return Jet2(o.value - self.value, o.grad - self.grad, o.hess - self.hess)

    def __neg__(self) -> "Jet2":
        return Jet2(-self.value, -self.grad, -self.hess)

    def __mul__(self, other) -> "Jet2":
        o = self._lift(other)
        cross = np.outer(self.grad, o.grad)
        return Jet2(
            self.value * o.value,
            self.value * o.grad + o.value * self.grad,
            self.value * o.hess + o.value * self.hess + cross + cross.T,
        )

    __rmul__ = __mul__

    def __truediv__(self, other) -> "Jet2":
        o = self._lift(other)
        if abs(o.value) < DIV_FLOOR:
            raise JetDomainError("div", o.value, f"div: divisor {o.value!r} below {DIV_FLOOR}")
        b = o.value
        # d(a/b) = da/b - a db/b^2
        # d2(a/b) = d2a/b - (da x db + db x da)/b^2 - a d2b/b^2 + 2a (db x db)/b^3
        cross = np.outer(self.grad, o.grad)
        grad = self.grad / b - self.value * o.grad / (b * b)
        hess = (
            self.hess / b
            - (cross + cross.T) / (b * b)
            - self.value * o.hess / (b * b)
            + 2.0 * self.value * np.outer(o.grad, o.grad) / (b * b * b)
        )
        return Jet2(self.value / b, grad, hess)

    def __rtruediv__(self, other) -> "Jet2":
        return self._lift(other).__truediv__(self)

    def __pow__(self, other) -> "Jet2":
        return jpow(self, other)


def constant(c: float, n: int) -> Jet2:
    """Constant jet: all derivatives vanish."""
    return Jet2(float(c), np.zeros(n), np.zeros((n, n)))


def seed(x, i: int) -> Jet2:
    """Jet of the i-th coordinate function at the point x."""
    x = np.asarray(x, dtype=float)
    n = x.shape[0]
    if not 0 <= i < n:
        raise IndexError(f"seed index {i} out of range for {n} coordinates")
    grad = np.zeros(n)
    grad[i] = 1.0
    return Jet2(x[i], grad, np.zeros((n, n)))


jet_seed = seed


def _compose(a: Jet2, value: float, d1: float, d2: float) -> Jet2:
    """Chain rule for a scalar function u applied to the jet a.

    value = u(a), d1 = u'(a), d2 = u''(a) at a.value.
    """
    return Jet2(value, d1 * a.grad, d1 * a.hess + d2 * np.outer(a.grad, a.grad))


def jexp(a: Jet2) -> Jet2:
    try:
        e = math.exp(a.value)
    except OverflowError:
        raise JetDomainError("exp", a.value, f"exp: overflow at {a.value!r}") from None
    return _compose(a, e, e, e)


def jlog(a: Jet2) -> Jet2:
    if a.value <= 0.0:
        raise JetDomainError("log", a.value)
    v = a.value
    return _compose(a, math.log(v), 1.0 / v, -1.0 / (v * v))


def jsin(a: Jet2) -> Jet2:
    s, c = math.sin(a.value), math.cos(a.value)
    return _compose(a, s, c, -s)


def jcos(a: Jet2) -> Jet2:
    s, c = math.sin(a.value), math.cos(a.value)
    return _compose(a, c, -s, -c)


def jsqrt(a: Jet2) -> Jet2:
    if a.value <= 0.0:
        raise JetDomainError("sqrt", a.value)
    r = math.sqrt(a.value)
    return _compose(a, r, 0.5 / r, -0.25 / (r * a.value))


def _int_pow(a: Jet2, k: int) -> Jet2:
    # Repeated multiplication; negative exponents via one division.
    if k == 0:
        return constant(1.0, a.n)
    if k < 0:
        return constant(1.0, a.n) / _int_pow(a, -k)
    out = a
    for _ in range(k - 1):
        out = out * a
    return out


def jpow(a: Jet2, e) -> Jet2:
    """a**e.  Integer exponents use repeated multiplication and work for any
    base; non-integer exponents require a positive base (no branch cuts)."""
    if isinstance(e, Jet2):
        if e.is_constant():
            e = e.value
        else:
            if a.value <= 0.0:
                raise JetDomainError("pow", a.value, f"pow: base {a.value!r} not positive for jet exponent")
            return jexp(e * jlog(a))
    e = float(e)
    if e == int(e):
        return _int_pow(a, int(e))
    if a.value <= 0.0:
        raise JetDomainError("pow", a.value, f"pow: base {a.value!r} not positive for exponent {e!r}")
    v = a.value
    return _compose(a, math.pow(v, e), e * math.pow(v, e - 1.0), e * (e - 1.0) * math.pow(v, e - 2.0))


_UNARY = {"neg": lambda a: -a, "exp": jexp, "log": jlog, "sin": jsin, "cos": jcos, "sqrt": jsqrt}
_BINARY = {
    "add": lambda a, b: a + b,
    "sub": lambda a, b: a - b,
    "mul": lambda a, b: a * b,
    "div": lambda a, b: a / b,
    "pow": jpow,
}


def jet_apply(op: str, a: Jet2, b=None) -> Jet2:
    """Apply a named operation to jets; the dispatch table mirrors the
    operations available to the expression language."""
    if op in _UNARY:
        if b is not None:
            raise ValueError(f"{op} takes one operand")
        return _UNARY[op](a)
    if op in _BINARY:
        if b is None:
            raise ValueError(f"{op} takes two operands")
        return _BINARY[op](a, b)
    raise ValueError(f"unknown jet operation {op!r}")
