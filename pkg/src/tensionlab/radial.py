"""Radial harmonic-factor machinery on the punctured-plane chart.

For radial conformal factors mu = mu(r) on the constant-curvature-one chart,
the half-dimension tension law reduces to the first-order implicit ODE

    0 = 2r(r^2-1)(1-f^2) + ((r^2-1)^2 - 4r^2) f - r(r^4-1) f' + 2r^2(r^2+1) f f'

for f = ((r^2+1)/2) mu'(r).  It factors into two branches: the singular
branch f = (r^2-1)/(2r), which is exactly the vanishing locus of the
f'-coefficient, and a one-parameter family f = (C(r^2+1)-1)/r solving
r(r^2+1) f' = (r^2-1) f + 2r.  The family integrates to

    mu = log(D (r^2+1) r^{2(C-1)}),    D > 0,

and the numerical companion integrates the explicit form of the ODE with
classical fourth-order Runge-Kutta against the closed form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .exprlang import ScalarField, parse

__all__ = [
    "RadialSolution",
    "RadialRow",
    "SingularBranchError",
    "ode_residual",
    "closed_form_f",
    "closed_form_fprime",
    "mu_family",
    "mu_family_field",
    "ode_rhs",
    "integrate_radial",
    "radial_solution",
]

DENOM_FLOOR = 1e-8


class SingularBranchError(ArithmeticError):
    """The trajectory touched the singular branch, where the implicit ODE
    degenerates (the f'-coefficient vanishes)."""


def _check_radius(r: float) -> float:
    r = float(r)
    if r <= 0.0:
        raise ValueError(f"radius must be positive, got {r!r}")
    return r


def ode_residual(r: float, f: float, fprime: float) -> float:
    """Residual of the radial ODE at (r, f, f')."""
    r = _check_radius(r)
    return (
        2.0 * r * (r * r - 1.0) * (1.0 - f * f)
        + ((r * r - 1.0) ** 2 - 4.0 * r * r) * f
        - r * (r**4 - 1.0) * fprime
        + 2.0 * r * r * (r * r + 1.0) * f * fprime
    )


def closed_form_f(branch: str, C: float, r: float) -> float:
    r = _check_radius(r)
    if branch == "singular":
        return (r * r - 1.0) / (2.0 * r)
    if branch == "family":
        return (C * (r * r + 1.0) - 1.0) / r
    raise ValueError(f"branch must be 'singular' or 'family', got {branch!r}")


def closed_form_fprime(branch: str, C: float, r: float) -> float:
    r = _check_radius(r)
    if branch == "singular":
        return (r * r + 1.0) / (2.0 * r * r)
    if branch == "family":
        # f = C r + (C - 1)/r
        return C - (C - 1.0) / (r * r)
    raise ValueError(f"branch must be 'singular' or 'family', got {branch!r}")


def mu_family(C: float, D: float, r: float) -> float:
    """mu = log(D (r^2+1) r^{2(C-1)})."""
    r = _check_radius(r)
    if D <= 0.0:
        raise ValueError(f"D must be positive, got {D!r}")
    return math.log(D) + math.log(r * r + 1.0) + (C - 1.0) * math.log(r * r)


def mu_family_field(C: float, D: float) -> ScalarField:
    """The same factor as a chart scalar field (r^2 = x^2 + y^2); composes
    with the conformal-metric builder."""
    if D <= 0.0:
        raise ValueError(f"D must be positive, got {D!r}")
    return parse(f"log({D!r}*(1+x^2+y^2)) + ({C!r}-1)*log(x^2+y^2)", ("x", "y"))


@dataclass(frozen=True)
class RadialSolution:
    """One closed-form branch with its factor mu (family branch only for mu;
    the singular branch carries no closed-form mu here)."""

    branch: str
    C: float
    D: float

    def f(self, r: float) -> float:
        return closed_form_f(self.branch, self.C, r)

    def fprime(self, r: float) -> float:
        return closed_form_fprime(self.branch, self.C, r)

    def mu(self, r: float) -> float:
        if self.branch != "family":
            raise ValueError("mu is defined on the family branch")
        return mu_family(self.C, self.D, r)

    @staticmethod
    def coefficient(r: float) -> float:
        """A(r) = (r^2 - 1)/(2r)."""
        r = _check_radius(r)
        return (r * r - 1.0) / (2.0 * r)


def radial_solution(branch: str, C: float = 1.0, D: float = 1.0) -> RadialSolution:
    if branch not in ("singular", "family"):
        raise ValueError(f"branch must be 'singular' or 'family', got {branch!r}")
    if D <= 0.0:
        raise ValueError(f"D must be positive, got {D!r}")
    return RadialSolution(branch, float(C), float(D))


def ode_rhs(r: float, f: float) -> float:
    """f' solved from the ODE; fails deterministically when the denominator
    (which vanishes exactly on the singular branch) gets too small."""
    r = _check_radius(r)
    denom = r * (r**4 - 1.0) - 2.0 * r * r * (r * r + 1.0) * f
    if abs(denom) < DENOM_FLOOR:
        raise SingularBranchError(
            f"f'-coefficient {denom!r} below {DENOM_FLOOR} at r={r!r} (singular branch contact)"
        )
    numer = 2.0 * r * (r * r - 1.0) * (1.0 - f * f) + ((r * r - 1.0) ** 2 - 4.0 * r * r) * f
    return numer / denom


@dataclass(frozen=True)
class RadialRow:
    r: float
    f_numeric: float
    f_closed: float
    abs_error: float
    ode_residual: float


def integrate_radial(C: float, r0: float, r1: float, step: float) -> list[RadialRow]:
    """Classical RK4 on the family branch from f(r0) = closed form.

    Rows carry the numeric value, the closed form, their difference and the
    closed-form ODE residual at each grid radius.
    """
    r0 = _check_radius(r0)
    r1 = float(r1)
    if r1 <= r0:
        raise ValueError(f"need r1 > r0, got [{r0!r}, {r1!r}]")
    step = float(step)
    if step <= 0.0:
        raise ValueError(f"step must be positive, got {step!r}")
    nsteps = max(1, int(math.ceil((r1 - r0) / step)))
    h = (r1 - r0) / nsteps

    def closed(r):
        return closed_form_f("family", C, r)

    def row(r, f):
        fc = closed(r)
        return RadialRow(r, f, fc, abs(f - fc), ode_residual(r, fc, closed_form_fprime("family", C, r)))

    f = closed(r0)
    rows = [row(r0, f)]
    r = r0
    for k in range(nsteps):
        k1 = ode_rhs(r, f)
        k2 = ode_rhs(r + 0.5 * h, f + 0.5 * h * k1)
        k3 = ode_rhs(r + 0.5 * h, f + 0.5 * h * k2)
        k4 = ode_rhs(r + h, f + h * k3)
        f = f + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        r = r0 + (k + 1) * h
        rows.append(row(r, f))
    return rows
