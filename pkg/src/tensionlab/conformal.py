"""Conformal deformation laws for the metric rescaling g~ = e^{2 mu} g.

Each operation here computes the *predicted* side of a transformation law
from quantities of the base metric and derivatives of mu; the matching
direct side is obtained by running the ordinary geometry/tension pipeline
on the composed metric returned by :func:`conformal_metric`.  The checks
module pairs the two routes.

The two trace terms appearing in the horizontal law,

    tr (nabla_* (nabla_* grad mu)^perp)^top   and its top/perp twin,

are evaluated in projector-commutator form

    sum_alpha ((nabla_{e_alpha} P)(Hess_mu(e_alpha)))^(other part),

where (nabla_X P)(V) = nabla_X(V proj) - (nabla_X V) proj on any field
extension of V.  The commutator is tensorial in V, so a constant-component
extension suffices and only second derivatives of mu are ever required.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exprlang import ScalarField, parse
from .geometry import (
    Distribution,
    GeometryCache,
    GeometryError,
    MetricField,
    VecJet,
    VectorFieldSpec,
    bracket,
    project,
    project_field,
)
from .tension import PointContext, _mean_curvatures, _ricci_along, _tau_h, _tau_v, point_context, w_reflect

__all__ = [
    "ConformalScene",
    "conformal_metric",
    "conformal_scene",
    "predicted_connection",
    "predicted_curvature",
    "frame_coefficient_check",
    "mixed_projection_trace",
    "predicted_tau_h",
    "predicted_tau_v",
    "predicted_tau_h_halfdim",
]


def conformal_metric(g: MetricField, mu: ScalarField) -> MetricField:
    """Metric with components e^{2 mu} g_ij as composed expressions, usable
    by every chart operation."""
    rows = []
    for row in g.components:
        new_row = []
        for entry in row:
            if entry.coordinates != mu.coordinates:
                raise GeometryError("conformal factor and metric use different coordinates")
            source = f"exp(2*({mu.source}))*({entry.source})"
            new_row.append(parse(source, entry.coordinates))
        rows.append(tuple(new_row))
    return MetricField(tuple(rows))


@dataclass(frozen=True)
class ConformalScene:
    """A base metric, a conformal factor and the composed metric."""

    base: MetricField
    mu: ScalarField
    tilde: MetricField


def conformal_scene(g: MetricField, mu: ScalarField) -> ConformalScene:
    return ConformalScene(g, mu, conformal_metric(g, mu))


# -- pointwise mu data -----------------------------------------------------------


class _MuData:
    """Gradient, Hessian and partial Laplacians of mu at one point, split
    along the frame."""

    def __init__(self, ctx: PointContext, mu: ScalarField):
        geom = ctx.geom
        self.mu_jet = mu.evaluate(geom.x)
        self.grad = geom.grad_field(self.mu_jet)
        self.grad_top = project_field(geom, ctx.frame, self.grad, "tangent")
        self.grad_perp = VecJet(
            self.grad.val - self.grad_top.val, self.grad.jac - self.grad_top.jac, None
        )
        self.norm2 = float(self.mu_jet.grad @ self.grad.val)
        self.norm2_top = geom.inner(self.grad_top.val, self.grad_top.val)
        self.norm2_perp = geom.inner(self.grad_perp.val, self.grad_perp.val)
        vals = ctx.frame.values()
        self.mu_alpha = vals @ self.mu_jet.grad
        hess = [geom.hess_apply(self.mu_jet, vals[alpha]) for alpha in range(ctx.n)]
        self.delta_sigma = sum(geom.inner(hess[a], vals[a]) for a in ctx.frame.sigma_range())
        self.delta_perp = sum(geom.inner(hess[i], vals[i]) for i in ctx.frame.perp_range())
        self.hess_frame = hess

    def hess(self, geom: GeometryCache, v) -> np.ndarray:
        return geom.hess_apply(self.mu_jet, v)


def _trace_terms(ctx: PointContext, mu_data: _MuData) -> tuple[np.ndarray, np.ndarray]:
    geom, frame = ctx.geom, ctx.frame
    vals = frame.values()
    t_perp_top = np.zeros(ctx.n)
    t_top_perp = np.zeros(ctx.n)
    for alpha in range(ctx.n):
        vc = VecJet.constant(mu_data.hess_frame[alpha])
        vc_perp = project_field(geom, frame, vc, "normal")
        vc_top = project_field(geom, frame, vc, "tangent")
        nabla_vc = geom.cov_dir(vc, vals[alpha])
        comm_perp = geom.cov_dir(vc_perp, vals[alpha]) - project(frame, nabla_vc, "normal")
        comm_top = geom.cov_dir(vc_top, vals[alpha]) - project(frame, nabla_vc, "tangent")
        t_perp_top = t_perp_top + project(frame, comm_perp, "tangent")
        t_top_perp = t_top_perp + project(frame, comm_top, "normal")
    return t_perp_top, t_top_perp


def mixed_projection_trace(g: MetricField, dist: Distribution, mu: ScalarField, x):
    """The pair (tr(nabla_*(nabla_* grad mu)^perp)^top,
    tr(nabla_*(nabla_* grad mu)^top)^perp)."""
    ctx = point_context(g, dist, x)
    return _trace_terms(ctx, _MuData(ctx, mu))


# -- predicted transformation laws ------------------------------------------------


def predicted_connection(g: MetricField, mu: ScalarField, x, xf, yf: VectorFieldSpec) -> np.ndarray:
    """nabla_X Y + (Y mu) X + (X mu) Y - g(X, Y) grad mu, the connection of
    the rescaled metric expressed through base quantities."""
    geom = GeometryCache(g, x)
    yj = yf.vecjet(geom.x)
    xval = xf.vecjet(geom.x).val if isinstance(xf, VectorFieldSpec) else np.asarray(xf, dtype=float)
    return _predicted_connection(geom, mu.evaluate(geom.x), xval, yj)


def _predicted_connection(geom: GeometryCache, mu_jet, xval, yj: VecJet) -> np.ndarray:
    cov = geom.cov_dir(yj, xval)
    xmu = float(mu_jet.grad @ xval)
    ymu = float(mu_jet.grad @ yj.val)
    gxy = geom.inner(xval, yj.val)
    return cov + ymu * xval + xmu * yj.val - gxy * geom.grad_field(mu_jet).val


def predicted_curvature(g: MetricField, mu: ScalarField, x, xv, yv, zv) -> np.ndarray:
    """Curvature of the rescaled metric from base curvature and mu terms."""
    geom = GeometryCache(g, x)
    return _predicted_curvature(geom, mu.evaluate(geom.x), xv, yv, zv)


def _predicted_curvature(geom: GeometryCache, mu_jet, xv, yv, zv) -> np.ndarray:
    xv = np.asarray(xv, dtype=float)
    yv = np.asarray(yv, dtype=float)
    zv = np.asarray(zv, dtype=float)
    grad = geom.grad_field(mu_jet)
    hx = geom.cov_dir(grad, xv)
    hy = geom.cov_dir(grad, yv)
    xmu = float(mu_jet.grad @ xv)
    ymu = float(mu_jet.grad @ yv)
    zmu = float(mu_jet.grad @ zv)
    gyz = geom.inner(yv, zv)
    gxz = geom.inner(xv, zv)
    norm2 = float(mu_jet.grad @ grad.val)
    hess_yz = geom.inner(hy, zv)
    hess_xz = geom.inner(hx, zv)
    return (
        geom.curvature(xv, yv, zv)
        - gyz * hx
        + gxz * hy
        + (ymu * zmu - gyz * norm2 - hess_yz) * xv
        - (xmu * zmu - gxz * norm2 - hess_xz) * yv
        + (xmu * gyz - ymu * gxz) * grad.val
    )


def frame_coefficient_check(g: MetricField, dist: Distribution, mu: ScalarField, x):
    """Residuals of the two rescaled-frame connection-coefficient identities.

    The rescaled frame f_alpha = e^{-mu} e_alpha is realized as the adapted
    frame of the composed metric (Gram-Schmidt commutes with the conformal
    rescaling).  Returns (within-distribution residual, cross residual),
    each the maximum over the relevant index range.
    """
    ctx = point_context(g, dist, x)
    ctx_t = point_context(conformal_metric(g, mu), dist, x)
    return _frame_coefficients(ctx, ctx_t, mu)


def _frame_coefficients(ctx: PointContext, ctx_t: PointContext, mu: ScalarField):
    mu_jet = mu.evaluate(ctx.geom.x)
    emu = float(np.exp(-mu_jet.value))
    vals = ctx.frame.values()
    mu_alpha = vals @ mu_jet.grad
    nv = ctx.nabla_values()
    nv_t = ctx_t.nabla_values()
    fvals = ctx_t.frame.values()
    g0 = ctx.geom.g0
    gt0 = ctx_t.geom.g0
    res_within = 0.0
    res_cross = 0.0
    for b in ctx.frame.sigma_range():
        for c in ctx.frame.sigma_range():
            for a in ctx.frame.sigma_range():
                lhs = float(nv_t[b, c] @ gt0 @ fvals[a])
                rhs = emu * (
                    float(nv[b, c] @ g0 @ vals[a])
                    + mu_alpha[c] * (1.0 if a == b else 0.0)
                    - mu_alpha[a] * (1.0 if b == c else 0.0)
                )
                res_within = max(res_within, abs(lhs - rhs))
            for i in ctx.frame.perp_range():
                lhs = float(nv_t[b, c] @ gt0 @ fvals[i])
                rhs = emu * (
                    float(nv[b, c] @ g0 @ vals[i]) - mu_alpha[i] * (1.0 if b == c else 0.0)
                )
                res_cross = max(res_cross, abs(lhs - rhs))
    return res_within, res_cross


def predicted_tau_h(g: MetricField, dist: Distribution, mu: ScalarField, x) -> np.ndarray:
    """Right side of the horizontal transformation law: equals
    e^{4 mu} tau_h of the rescaled metric."""
    ctx = point_context(g, dist, x)
    return _predicted_tau_h(ctx, _MuData(ctx, mu))


def _predicted_tau_h(ctx: PointContext, m: _MuData) -> np.ndarray:
    geom = ctx.geom
    p, q = ctx.p, ctx.q
    _, _, h = _mean_curvatures(ctx)
    t_perp_top, t_top_perp = _trace_terms(ctx, m)
    mixed = (
        project(ctx.frame, geom.cov_dir(m.grad_perp, m.grad_top.val), "tangent")
        - project(ctx.frame, geom.cov_dir(m.grad_top, m.grad_perp.val), "tangent")
        + project(ctx.frame, geom.cov_dir(m.grad_top, m.grad_perp.val), "normal")
        - project(ctx.frame, geom.cov_dir(m.grad_perp, m.grad_top.val), "normal")
    )
    return (
        _tau_h(ctx)
        - _ricci_along(ctx, m.grad_perp.val, "sigma")
        - _ricci_along(ctx, m.grad_top.val, "perp")
        - m.hess(geom, h)
        - m.norm2 * h
        + geom.inner(m.grad.val, h) * m.grad.val
        + ((p - q) * m.norm2_top + m.delta_sigma) * m.grad_perp.val
        + ((q - p) * m.norm2_perp + m.delta_perp) * m.grad_top.val
        + p * m.hess(geom, m.grad_perp.val)
        + q * m.hess(geom, m.grad_top.val)
        + mixed
        - t_perp_top
        - t_top_perp
    )


def predicted_tau_v(g: MetricField, dist: Distribution, mu: ScalarField, x) -> np.ndarray:
    """Right side of the vertical transformation law: equals
    e^{2 mu} tau_v of the rescaled metric, entry by entry against the
    canonical frame."""
    ctx = point_context(g, dist, x)
    return _predicted_tau_v(ctx, _MuData(ctx, mu))


def _predicted_tau_v(ctx: PointContext, m: _MuData) -> np.ndarray:
    geom = ctx.geom
    vals = ctx.frame.values()
    e = ctx.frame.fields()
    h_sigma, h_perp, _ = _mean_curvatures(ctx)
    p, q, n = ctx.p, ctx.q, ctx.n
    out = np.array(_tau_v(ctx))
    for a in ctx.frame.sigma_range():
        for col, i in enumerate(ctx.frame.perp_range()):
            out[a, col] += (p - q) * m.mu_alpha[a] * m.mu_alpha[i]
            out[a, col] += -2.0 * m.mu_alpha[a] * geom.inner(h_sigma, vals[i])
            out[a, col] += 2.0 * m.mu_alpha[i] * geom.inner(h_perp, vals[a])
            out[a, col] += -2.0 * geom.inner(geom.cov_dir(m.grad_perp, vals[i]), vals[a])
            out[a, col] += 2.0 * geom.inner(geom.cov_dir(m.grad_top, vals[a]), vals[i])
            out[a, col] += (n - 2) * geom.inner(geom.cov_dir(e[a], m.grad.val), vals[i])
    return out


def predicted_tau_h_halfdim(
    g: MetricField, dist: Distribution, mu: ScalarField, x, kappa: float
) -> np.ndarray:
    """Constant-curvature, equal-rank specialization of the horizontal law;
    the bracket term W([grad mu top, grad mu perp]) replaces the four mixed
    projection terms."""
    ctx = point_context(g, dist, x)
    if kappa is None:
        raise GeometryError("half-dimension law requires a declared constant curvature")
    return _predicted_tau_h_halfdim(ctx, _MuData(ctx, mu), float(kappa))


def _predicted_tau_h_halfdim(ctx: PointContext, m: _MuData, kappa: float) -> np.ndarray:
    if ctx.p != ctx.q:
        raise GeometryError("half-dimension law requires rank equal to corank")
    geom = ctx.geom
    n = ctx.n
    _, _, h = _mean_curvatures(ctx)
    t_perp_top, t_top_perp = _trace_terms(ctx, m)
    br = bracket(m.grad_top, m.grad_perp)
    return (
        (kappa - m.norm2) * h
        + (geom.inner(m.grad.val, h) - 0.5 * n * kappa) * m.grad.val
        + m.delta_sigma * m.grad_perp.val
        + m.delta_perp * m.grad_top.val
        - m.hess(geom, h - 0.5 * n * m.grad.val)
        + w_reflect(ctx.frame, br)
        - t_perp_top
        - t_top_perp
    )
