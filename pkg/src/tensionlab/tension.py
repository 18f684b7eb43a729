"""Second fundamental forms, mean curvatures and tension fields.

The horizontal tension field is assembled from curvature terms,

    tau_h = sum_{a,b} R((nabla_{e_b} e_a)^perp, e_a) e_b
          + sum_{i,j} R((nabla_{e_i} e_j)^top, e_j) e_i,

and the vertical tension field is the matrix of pairings, for each frame
index a in the distribution and i in the complement,

    tau_v[a,i] = sum_b g((nabla^2 e_a)(e_b, e_b), e_i)
               - sum_j g((nabla^2 e_i)(e_j, e_j), e_a)
               + 2 sum_{b,c} g(e_a, nabla_{e_b} e_c) g(nabla_{e_b} e_c, e_i)
               - 2 sum_{j,k} g(e_a, nabla_{e_j} e_k) g(nabla_{e_j} e_k, e_i),

with (nabla^2 X)(Y, Z) = nabla_Y nabla_Z X - nabla_{nabla_Y Z} X.  Both
fields can also be computed in their unreworked forms (single sum over the
whole frame); the two routes agree pointwise and that equality is one of
the shipped checks.  tau_v entries are reported against the canonical
Gram-Schmidt frame; vanishing of all entries is the frame-independent
statement.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import (
    Distribution,
    Frame,
    GeometryCache,
    GeometryError,
    MetricField,
    VecJet,
    adapted_frame,
    project,
    project_field,
    sub_fields,
)

__all__ = [
    "PointContext",
    "point_context",
    "TensionReport",
    "second_fundamental",
    "mean_curvatures",
    "ricci_along",
    "tau_h",
    "tau_v",
    "w_reflect",
    "tension_report",
]

TANGENCY_TOL = 1e-8


@dataclass
class PointContext:
    """Geometry cache, adapted frame and frame fields at one point.

    Built once per (metric, distribution, point) and reused by every
    operation evaluated there; immutable after construction.
    """

    geom: GeometryCache
    frame: Frame

    @property
    def n(self) -> int:
        return self.geom.n

    @property
    def p(self) -> int:
        return self.frame.p

    @property
    def q(self) -> int:
        return self.frame.q

    def nabla_values(self) -> np.ndarray:
        """nv[alpha, beta] = chart components of nabla_{e_alpha} e_beta."""
        if not hasattr(self, "_nv"):
            e = self.frame.fields()
            n = self.n
            nv = np.empty((n, n, n))
            for alpha in range(n):
                for beta in range(n):
                    nv[alpha, beta] = self.geom.cov_dir(e[beta], e[alpha].val)
            self._nv = nv
        return self._nv


def point_context(g: MetricField, dist: Distribution, x) -> PointContext:
    geom = GeometryCache(g, x)
    frame = adapted_frame(g, dist, x, geom=geom)
    return PointContext(geom, frame)


# -- second fundamental form and mean curvature ---------------------------------


def _extend_in_span(ctx: PointContext, v, rng) -> VecJet:
    """Extend a value vector as a constant-coefficient combination of the
    frame fields with indices in rng."""
    e = ctx.frame.fields()
    vals = ctx.frame.values()
    n = ctx.n
    out = VecJet(np.zeros(n), np.zeros((n, n)), np.zeros((n, n, n)))
    for a in rng:
        c = ctx.geom.inner(v, vals[a])
        out.val = out.val + c * e[a].val
        out.jac = out.jac + c * e[a].jac
        out.hess = out.hess + c * e[a].hess
    return out


def second_fundamental(
    g: MetricField, dist: Distribution, x, xv, yv, symmetrized: bool = False
) -> np.ndarray:
    """A(X, Y) = (nabla_X Y)^perp for X, Y tangent to the distribution at x.

    X and Y are extended inside the distribution as constant-coefficient
    combinations of the canonical frame fields; the result does not depend
    on that choice.
    """
    ctx = point_context(g, dist, x)
    xv = np.asarray(xv, dtype=float)
    yv = np.asarray(yv, dtype=float)
    for v in (xv, yv):
        residual = np.linalg.norm(project(ctx.frame, v, "normal"))
        if residual > TANGENCY_TOL * (1.0 + np.linalg.norm(v)):
            raise GeometryError(f"vector {v.tolist()} is not tangent to the distribution")
    yfield = _extend_in_span(ctx, yv, ctx.frame.sigma_range())
    a_xy = project(ctx.frame, ctx.geom.cov_dir(yfield, xv), "normal")
    if not symmetrized:
        return a_xy
    xfield = _extend_in_span(ctx, xv, ctx.frame.sigma_range())
    a_yx = project(ctx.frame, ctx.geom.cov_dir(xfield, yv), "normal")
    return 0.5 * (a_xy + a_yx)


def _mean_curvatures(ctx: PointContext) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    nv = ctx.nabla_values()
    n = ctx.n
    h_sigma = np.zeros(n)
    for a in ctx.frame.sigma_range():
        h_sigma = h_sigma + project(ctx.frame, nv[a, a], "normal")
    h_perp = np.zeros(n)
    for i in ctx.frame.perp_range():
        h_perp = h_perp + project(ctx.frame, nv[i, i], "tangent")
    return h_sigma, h_perp, h_sigma + h_perp


def mean_curvatures(g: MetricField, dist: Distribution, x):
    """(H_sigma, H_perp, H) with H = H_sigma + H_perp."""
    return _mean_curvatures(point_context(g, dist, x))


def _ricci_along(ctx: PointContext, xv: np.ndarray, which: str) -> np.ndarray:
    vals = ctx.frame.values()
    if which == "sigma":
        rng = ctx.frame.sigma_range()
    elif which == "perp":
        rng = ctx.frame.perp_range()
    else:
        raise ValueError(f"which must be 'sigma' or 'perp', got {which!r}")
    out = np.zeros(ctx.n)
    for a in rng:
        out = out + ctx.geom.curvature(xv, vals[a], vals[a])
    return out


def ricci_along(g: MetricField, dist: Distribution, x, xv, which: str = "sigma") -> np.ndarray:
    """sum_a R(X, e_a) e_a over the chosen sub-frame."""
    return _ricci_along(point_context(g, dist, x), np.asarray(xv, dtype=float), which)


# -- tension fields --------------------------------------------------------------


def _tau_h(ctx: PointContext, form: str = "primed") -> np.ndarray:
    nv = ctx.nabla_values()
    vals = ctx.frame.values()
    out = np.zeros(ctx.n)
    if form == "primed":
        for a in ctx.frame.sigma_range():
            for b in ctx.frame.sigma_range():
                v = project(ctx.frame, nv[b, a], "normal")
                out = out + ctx.geom.curvature(v, vals[a], vals[b])
        for i in ctx.frame.perp_range():
            for j in ctx.frame.perp_range():
                v = project(ctx.frame, nv[i, j], "tangent")
                out = out + ctx.geom.curvature(v, vals[j], vals[i])
        return out
    if form == "original":
        for alpha in range(ctx.n):
            for a in ctx.frame.sigma_range():
                v = project(ctx.frame, nv[alpha, a], "normal")
                out = out + ctx.geom.curvature(v, vals[a], vals[alpha])
        return out
    raise ValueError(f"form must be 'primed' or 'original', got {form!r}")


def tau_h(g: MetricField, dist: Distribution, x, form: str = "primed") -> np.ndarray:
    """Horizontal tension field in chart components."""
    return _tau_h(point_context(g, dist, x), form)


def _second_cov(ctx: PointContext, target: VecJet, yfield: VecJet) -> np.ndarray:
    """(nabla^2 target)(Y, Y) = nabla_Y nabla_Y target - nabla_{nabla_Y Y} target."""
    inner = ctx.geom.cov_field(target, yfield)
    first = ctx.geom.cov_dir(inner, yfield.val)
    w = ctx.geom.cov_dir(yfield, yfield.val)
    second = ctx.geom.cov_dir(target, w)
    return first - second


def _tau_v(ctx: PointContext, form: str = "primed") -> np.ndarray:
    e = ctx.frame.fields()
    vals = ctx.frame.values()
    nv = ctx.nabla_values()
    g0 = ctx.geom.g0
    p, q, n = ctx.p, ctx.q, ctx.n
    out = np.zeros((p, q))
    if form == "primed":
        sum2_sigma = {}
        for a in ctx.frame.sigma_range():
            acc = np.zeros(n)
            for b in ctx.frame.sigma_range():
                acc = acc + _second_cov(ctx, e[a], e[b])
            sum2_sigma[a] = acc
        sum2_perp = {}
        for i in ctx.frame.perp_range():
            acc = np.zeros(n)
            for j in ctx.frame.perp_range():
                acc = acc + _second_cov(ctx, e[i], e[j])
            sum2_perp[i] = acc
        for a in ctx.frame.sigma_range():
            for col, i in enumerate(ctx.frame.perp_range()):
                entry = float(sum2_sigma[a] @ g0 @ vals[i]) - float(sum2_perp[i] @ g0 @ vals[a])
                for b in ctx.frame.sigma_range():
                    for c in ctx.frame.sigma_range():
                        entry += 2.0 * float(vals[a] @ g0 @ nv[b, c]) * float(nv[b, c] @ g0 @ vals[i])
                for j in ctx.frame.perp_range():
                    for k in ctx.frame.perp_range():
                        entry -= 2.0 * float(vals[a] @ g0 @ nv[j, k]) * float(nv[j, k] @ g0 @ vals[i])
                out[a, col] = entry
        return out
    if form == "original":
        for a in ctx.frame.sigma_range():
            acc = np.zeros(n)
            for alpha in range(n):
                inner = ctx.geom.cov_field(e[a], e[alpha])
                inner_perp = project_field(ctx.geom, ctx.frame, inner, "normal")
                inner_top = sub_fields(inner, inner_perp)
                acc = acc + ctx.geom.cov_dir(inner_perp, vals[alpha])
                acc = acc - ctx.geom.cov_dir(inner_top, vals[alpha])
                acc = acc - ctx.geom.cov_dir(e[a], nv[alpha, alpha])
            for col, i in enumerate(ctx.frame.perp_range()):
                out[a, col] = float(acc @ g0 @ vals[i])
        return out
    raise ValueError(f"form must be 'primed' or 'original', got {form!r}")


def tau_v(g: MetricField, dist: Distribution, x, form: str = "primed") -> np.ndarray:
    """Vertical tension field entries against the canonical frame (p x q)."""
    return _tau_v(point_context(g, dist, x), form)


def w_reflect(frame: Frame, xv) -> np.ndarray:
    """Reflection across the distribution: X^top - X^perp."""
    xv = np.asarray(xv, dtype=float)
    top = project(frame, xv, "tangent")
    return 2.0 * top - xv


# -- reports ---------------------------------------------------------------------


@dataclass
class TensionReport:
    """Per-point summary of the mean curvatures and both tension fields."""

    point: np.ndarray
    h_sigma: np.ndarray
    h_perp: np.ndarray
    h: np.ndarray
    tau_h: np.ndarray
    tau_v: np.ndarray
    h_sigma_norm: float
    h_perp_norm: float
    h_norm: float
    tau_h_norm: float
    tau_v_norm: float


def tension_report(g: MetricField, dist: Distribution, x) -> TensionReport:
    ctx = point_context(g, dist, x)
    h_sigma, h_perp, h = _mean_curvatures(ctx)
    th = _tau_h(ctx)
    tv = _tau_v(ctx)
    gn = ctx.geom.norm
    return TensionReport(
        point=ctx.geom.x,
        h_sigma=h_sigma,
        h_perp=h_perp,
        h=h,
        tau_h=th,
        tau_v=tv,
        h_sigma_norm=gn(h_sigma),
        h_perp_norm=gn(h_perp),
        h_norm=gn(h),
        tau_h_norm=gn(th),
        tau_v_norm=float(np.sqrt(np.sum(tv * tv))),
    )
