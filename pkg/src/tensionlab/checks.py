"""Identity check registry and batch runner.

Every check compares two independently computed sides of one identity at
sampled scene points and records a :class:`CheckResult` per comparison.
The pass rule is uniform:

    pass  <=>  |lhs - rhs| <= max(1e-9, tol * (1 + max(|lhs|, |rhs|)))

with Euclidean norms of the flattened quantities.  Checks that need a
conformal factor run once per factor; the factor used is, in order of
precedence, an explicit override, the scene's own factor, or a default
trio of factors exercising generic first and second derivatives.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .conformal import (
    _MuData,
    _frame_coefficients,
    _predicted_connection,
    _predicted_curvature,
    _predicted_tau_h,
    _predicted_tau_h_halfdim,
    _predicted_tau_v,
    conformal_metric,
)
from .exprlang import ScalarField, parse
from .geometry import Distribution, GeometryCache, VectorFieldSpec, bracket, project
from .scenes import Lcg, Scene, sample_points
from .tension import PointContext, _mean_curvatures, _tau_h, _tau_v, point_context

__all__ = [
    "CheckResult",
    "CheckUsageError",
    "CHECK_NAMES",
    "DEFAULT_MUS",
    "run_verify",
    "random_expression",
]

ABS_FLOOR = 1e-9
DEFAULT_MUS = ("x/5", "x*y/10", "log(1+x^2+y^2)")


class CheckUsageError(ValueError):
    """Unknown check name or a check requested on a scene it cannot run on."""


@dataclass
class CheckResult:
    check: str
    case: str
    scene: str
    point: tuple[float, ...]
    lhs_norm: float
    rhs_norm: float
    abs_error: float
    rel_error: float
    passed: bool

    def to_dict(self) -> dict:
        return {
            "check": self.check,
            "case": self.case,
            "scene": self.scene,
            "point": list(self.point),
            "lhs_norm": self.lhs_norm,
            "rhs_norm": self.rhs_norm,
            "abs_error": self.abs_error,
            "rel_error": self.rel_error,
            "pass": self.passed,
        }


def _compare(check, case, scene_name, point, lhs, rhs, tol) -> CheckResult:
    l = np.atleast_1d(np.asarray(lhs, dtype=float)).ravel()
    r = np.atleast_1d(np.asarray(rhs, dtype=float)).ravel()
    abs_error = float(np.linalg.norm(l - r))
    lhs_norm = float(np.linalg.norm(l))
    rhs_norm = float(np.linalg.norm(r))
    denom = 1.0 + max(lhs_norm, rhs_norm)
    rel_error = abs_error / denom
    passed = abs_error <= max(ABS_FLOOR, tol * denom)
    return CheckResult(
        check, case, scene_name, tuple(float(c) for c in np.asarray(point).ravel()),
        lhs_norm, rhs_norm, abs_error, rel_error, passed,
    )


# -- deterministic auxiliary inputs ------------------------------------------------


def _substream(seed: int, label: str) -> Lcg:
    s = int(seed) & ((1 << 64) - 1)
    for ch in label:
        s = (s * 31 + ord(ch)) & ((1 << 64) - 1)
    return Lcg(s)


def _random_vector(rng: Lcg, n: int) -> np.ndarray:
    return np.array([rng.uniform_in(-1.0, 1.0) for _ in range(n)])


def _random_poly_field(rng: Lcg, coords) -> VectorFieldSpec:
    n = len(coords)
    comps = []
    for _ in range(n):
        terms = [repr(round(rng.uniform_in(-1.0, 1.0), 6))]
        for name in coords:
            terms.append(f"{round(rng.uniform_in(-0.6, 0.6), 6)!r}*{name}")
        i = int(rng.uniform() * n) % n
        j = int(rng.uniform() * n) % n
        terms.append(f"{round(rng.uniform_in(-0.3, 0.3), 6)!r}*{coords[i]}*{coords[j]}")
        comps.append(parse("+".join(terms), coords))
    return VectorFieldSpec(tuple(comps))


def random_expression(rng: Lcg, coords, depth: int = 2) -> str:
    """A random composite expression whose domain covers the whole chart."""

    def atom():
        if rng.uniform() < 0.6:
            return coords[int(rng.uniform() * len(coords)) % len(coords)]
        return repr(round(rng.uniform_in(-1.5, 1.5), 6))

    def build(d):
        if d == 0:
            return atom()
        a, b = build(d - 1), build(d - 1)
        r = rng.uniform()
        if r < 0.16:
            return f"({a})+({b})"
        if r < 0.32:
            return f"({a})-({b})"
        if r < 0.48:
            return f"({a})*({b})"
        if r < 0.60:
            return f"sin({a})"
        if r < 0.70:
            return f"cos(({a})*0.7)"
        if r < 0.78:
            return f"exp(0.3*({a}))"
        if r < 0.86:
            return f"log(1.5+({a})^2)"
        if r < 0.93:
            return f"sqrt(1.2+({b})^2)"
        return f"({a})/(1.5+({b})^2)"

    return build(depth)


def _fd_grad(f: Callable, x: np.ndarray, h: float) -> np.ndarray:
    n = x.shape[0]
    out = np.zeros(n)
    for i in range(n):
        e = np.zeros(n)
        e[i] = h
        out[i] = (f(x + e) - f(x - e)) / (2.0 * h)
    return out


def _fd_hess(f: Callable, x: np.ndarray, h: float) -> np.ndarray:
    n = x.shape[0]
    out = np.zeros((n, n))
    f0 = f(x)
    for i in range(n):
        ei = np.zeros(n)
        ei[i] = h
        out[i, i] = (f(x + ei) - 2.0 * f0 + f(x - ei)) / (h * h)
        for j in range(i + 1, n):
            ej = np.zeros(n)
            ej[j] = h
            out[i, j] = (
                f(x + ei + ej) - f(x + ei - ej) - f(x - ei + ej) + f(x - ei - ej)
            ) / (4.0 * h * h)
            out[j, i] = out[i, j]
    return out


# -- workspace ----------------------------------------------------------------------


class Workspace:
    """Per-run cache of point contexts, shared across checks.

    All cached objects are immutable once built; a duplicated build under
    threads is harmless and produces the identical value.
    """

    def __init__(self, scene: Scene, points, seed: int):
        self.scene = scene
        self.points = points
        self.seed = seed
        self._cache: dict = {}
        self._metrics: dict = {}

    def _get(self, key, builder):
        got = self._cache.get(key)
        if got is None:
            got = builder()
            self._cache[key] = got
        return got

    def tilde_metric(self, mu: ScalarField):
        key = ("metric", mu.source)
        got = self._metrics.get(key)
        if got is None:
            got = conformal_metric(self.scene.metric, mu)
            self._metrics[key] = got
        return got

    def base_ctx(self, idx: int) -> PointContext:
        return self._get(
            ("g", idx),
            lambda: point_context(self.scene.metric, self.scene.distribution, self.points[idx]),
        )

    def tilde_ctx(self, mu: ScalarField, idx: int) -> PointContext:
        return self._get(
            ("gt", mu.source, idx),
            lambda: point_context(self.tilde_metric(mu), self.scene.distribution, self.points[idx]),
        )

    def swapped_distribution(self) -> Distribution:
        dist = self.scene.distribution
        return self._get(
            ("dist-swap",),
            lambda: Distribution(spanning=dist.complement, complement=dist.spanning),
        )

    def swap_ctx(self, idx: int) -> PointContext:
        return self._get(
            ("g-swap", idx),
            lambda: point_context(self.scene.metric, self.swapped_distribution(), self.points[idx]),
        )

    def mu_data(self, mu: ScalarField, idx: int) -> _MuData:
        return self._get(("mu", mu.source, idx), lambda: _MuData(self.base_ctx(idx), mu))


# -- individual checks ----------------------------------------------------------------


def _chk_jets_vs_fd(scene, points, mus, tol, ws, pmap):
    rng = _substream(ws.seed, "jets-vs-fd")
    fields = [parse(random_expression(rng, scene.coordinates), scene.coordinates) for _ in range(20)]
    hess_tol = tol * 100.0

    def work(k):
        f = fields[k]
        x = np.asarray(points[k % len(points)], dtype=float)
        jet = f.evaluate(x)
        grad_fd = _fd_grad(f.value, x, 1e-5)
        hess_fd = _fd_hess(f.value, x, 1e-4)
        return [
            _compare("jets-vs-fd", f"expr{k}:grad", scene.name, x, jet.grad, grad_fd, tol),
            _compare("jets-vs-fd", f"expr{k}:hess", scene.name, x, jet.hess, hess_fd, hess_tol),
        ]

    out = []
    for rs in pmap(work, range(len(fields))):
        out.extend(rs)
    return out


def _chk_levi_civita(scene, points, mus, tol, ws, pmap):
    rng = _substream(ws.seed, "levi-civita")
    xf = _random_poly_field(rng, scene.coordinates)
    yf = _random_poly_field(rng, scene.coordinates)
    zf = _random_poly_field(rng, scene.coordinates)

    def work(idx):
        geom = ws.base_ctx(idx).geom
        x = geom.x
        xv = xf.vecjet(x)
        yv = yf.vecjet(x)
        zv = zf.vecjet(x)
        # X g(Y, Z) from the jets of the scalar g(Y, Z).
        syz, syz_grad = geom.inner_field(yv, zv)
        lhs_metric = float(syz_grad @ xv.val)
        rhs_metric = geom.inner(geom.cov_dir(yv, xv.val), zv.val) + geom.inner(
            yv.val, geom.cov_dir(zv, xv.val)
        )
        torsion_lhs = geom.cov_dir(yv, xv.val) - geom.cov_dir(xv, yv.val)
        torsion_rhs = bracket(xv, yv)
        return [
            _compare("levi-civita", "metricity", scene.name, x, lhs_metric, rhs_metric, tol),
            _compare("levi-civita", "torsion-free", scene.name, x, torsion_lhs, torsion_rhs, tol),
        ]

    out = []
    for rs in pmap(work, range(len(points))):
        out.extend(rs)
    return out


def _chk_curvature_symmetries(scene, points, mus, tol, ws, pmap):
    rng = _substream(ws.seed, "curvature-symmetries")
    n = scene.n
    draws = [[_random_vector(rng, n) for _ in range(4)] for _ in points]
    kappa = scene.constant_curvature

    def work(idx):
        geom = ws.base_ctx(idx).geom
        x = geom.x
        xv, yv, zv, wv = draws[idx]
        rxyz = geom.curvature(xv, yv, zv)
        rows = [
            _compare(
                "curvature-symmetries", "antisymmetry", scene.name, x,
                rxyz, -geom.curvature(yv, xv, zv), tol,
            ),
            _compare(
                "curvature-symmetries", "pair-symmetry", scene.name, x,
                geom.inner(rxyz, wv), -geom.inner(geom.curvature(xv, yv, wv), zv), tol,
            ),
            _compare(
                "curvature-symmetries", "bianchi", scene.name, x,
                rxyz + geom.curvature(yv, zv, xv) + geom.curvature(zv, xv, yv),
                np.zeros(n), tol,
            ),
        ]
        if kappa is not None:
            model = kappa * (geom.inner(yv, zv) * xv - geom.inner(xv, zv) * yv)
            rows.append(
                _compare("curvature-symmetries", "constant-curvature-form", scene.name, x, rxyz, model, tol)
            )
        return rows

    out = []
    for rs in pmap(work, range(len(points))):
        out.extend(rs)
    return out


def _chk_constant_curvature_tension(scene, points, mus, tol, ws, pmap):
    kappa = scene.constant_curvature

    def work(idx):
        ctx = ws.base_ctx(idx)
        _, _, h = _mean_curvatures(ctx)
        return _compare(
            "constant-curvature-tension", "tau-h=kappa*H", scene.name, ctx.geom.x,
            _tau_h(ctx), kappa * h, tol,
        )

    return list(pmap(work, range(len(points))))


def _chk_harm1(scene, points, mus, tol, ws, pmap):
    def work(idx):
        ctx = ws.base_ctx(idx)
        return _compare(
            "harm1-equivalence", "primed-vs-original", scene.name, ctx.geom.x,
            _tau_h(ctx, "primed"), _tau_h(ctx, "original"), tol,
        )

    return list(pmap(work, range(len(points))))


def _chk_harm2(scene, points, mus, tol, ws, pmap):
    def work(idx):
        ctx = ws.base_ctx(idx)
        return _compare(
            "harm2-equivalence", "primed-vs-original", scene.name, ctx.geom.x,
            _tau_v(ctx, "primed"), _tau_v(ctx, "original"), tol,
        )

    return list(pmap(work, range(len(points))))


def _chk_duality(scene, points, mus, tol, ws, pmap):
    def work(idx):
        ctx = ws.base_ctx(idx)
        swap = ws.swap_ctx(idx)
        x = ctx.geom.x
        return [
            _compare("tension-duality", "tau-h", scene.name, x, _tau_h(swap), _tau_h(ctx), tol),
            _compare(
                "tension-duality", "tau-v", scene.name, x,
                _tau_v(swap).T, -_tau_v(ctx), tol,
            ),
        ]

    out = []
    for rs in pmap(work, range(len(points))):
        out.extend(rs)
    return out


def _chk_totally_geodesic(scene, points, mus, tol, ws, pmap):
    def work(idx):
        ctx = ws.base_ctx(idx)
        x = ctx.geom.x
        return [
            _compare("totally-geodesic", "tau-h", scene.name, x, _tau_h(ctx), np.zeros(ctx.n), tol),
            _compare("totally-geodesic", "tau-v", scene.name, x, _tau_v(ctx), np.zeros_like(_tau_v(ctx)), tol),
        ]

    out = []
    for rs in pmap(work, range(len(points))):
        out.extend(rs)
    return out


_RESCALE_FACTORS = ("1+x^2/4", "exp(x/8)", "1.5+y^2/5", "2+x*y/16")


def _chk_tensoriality(scene, points, mus, tol, ws, pmap):
    dist = scene.distribution
    coords = scene.coordinates
    rescaled = Distribution(
        spanning=tuple(
            VectorFieldSpec(
                tuple(
                    parse(f"({_RESCALE_FACTORS[m % len(_RESCALE_FACTORS)]})*({c.source})", coords)
                    for c in vf.components
                )
            )
            for m, vf in enumerate(dist.spanning)
        ),
        complement=dist.complement,
        # Positive rescaling preserves the spans, so the base pivot pattern
        # (frozen at scene validation) stays valid and keeps runs reproducible.
        pivot=dist.pivot,
    )

    def work(idx):
        ctx = ws.base_ctx(idx)
        ctx_r = point_context(scene.metric, rescaled, ws.points[idx])
        return _compare(
            "tensoriality", "rescaled-spanning", scene.name, ctx.geom.x,
            _tau_h(ctx_r), _tau_h(ctx), tol,
        )

    return list(pmap(work, range(len(points))))


def _chk_conformal_connection(scene, points, mus, tol, ws, pmap):
    rng = _substream(ws.seed, "conformal-connection")
    xf = _random_poly_field(rng, scene.coordinates)
    yf = _random_poly_field(rng, scene.coordinates)
    out = []
    for mu in mus:
        def work(idx, mu=mu):
            geom = ws.base_ctx(idx).geom
            geom_t = ws.tilde_ctx(mu, idx).geom
            x = geom.x
            yj = yf.vecjet(x)
            xval = xf.vecjet(x).val
            predicted = _predicted_connection(geom, mu.evaluate(x), xval, yj)
            direct = geom_t.cov_dir(yj, xval)
            return _compare("conformal-connection", mu.source, scene.name, x, predicted, direct, tol)

        out.extend(pmap(work, range(len(points))))
    return out


def _chk_conformal_curvature(scene, points, mus, tol, ws, pmap):
    rng = _substream(ws.seed, "conformal-curvature")
    n = scene.n
    draws = [[_random_vector(rng, n) for _ in range(3)] for _ in points]
    out = []
    for mu in mus:
        def work(idx, mu=mu):
            geom = ws.base_ctx(idx).geom
            geom_t = ws.tilde_ctx(mu, idx).geom
            x = geom.x
            xv, yv, zv = draws[idx]
            predicted = _predicted_curvature(geom, mu.evaluate(x), xv, yv, zv)
            direct = geom_t.curvature(xv, yv, zv)
            return _compare("conformal-curvature", mu.source, scene.name, x, predicted, direct, tol)

        out.extend(pmap(work, range(len(points))))
    return out


def _chk_conformal_frame(scene, points, mus, tol, ws, pmap):
    out = []
    for mu in mus:
        def work(idx, mu=mu):
            ctx = ws.base_ctx(idx)
            ctx_t = ws.tilde_ctx(mu, idx)
            res_within, res_cross = _frame_coefficients(ctx, ctx_t, mu)
            x = ctx.geom.x
            return [
                _compare("conformal-frame", f"{mu.source}:within", scene.name, x, res_within, 0.0, tol),
                _compare("conformal-frame", f"{mu.source}:cross", scene.name, x, res_cross, 0.0, tol),
            ]

        for rs in pmap(work, range(len(points))):
            out.extend(rs)
    return out


def _chk_conformal_tau_h(scene, points, mus, tol, ws, pmap):
    out = []
    for mu in mus:
        def work(idx, mu=mu):
            ctx = ws.base_ctx(idx)
            ctx_t = ws.tilde_ctx(mu, idx)
            x = ctx.geom.x
            scalefac = math.exp(4.0 * mu.evaluate(x).value)
            direct = scalefac * _tau_h(ctx_t)
            predicted = _predicted_tau_h(ctx, ws.mu_data(mu, idx))
            return _compare("conformal-tau-h", mu.source, scene.name, x, direct, predicted, tol)

        out.extend(pmap(work, range(len(points))))
    return out


def _chk_conformal_tau_v(scene, points, mus, tol, ws, pmap):
    out = []
    for mu in mus:
        def work(idx, mu=mu):
            ctx = ws.base_ctx(idx)
            ctx_t = ws.tilde_ctx(mu, idx)
            x = ctx.geom.x
            scalefac = math.exp(2.0 * mu.evaluate(x).value)
            direct = scalefac * _tau_v(ctx_t)
            predicted = _predicted_tau_v(ctx, ws.mu_data(mu, idx))
            return _compare("conformal-tau-v", mu.source, scene.name, x, direct, predicted, tol)

        out.extend(pmap(work, range(len(points))))
    return out


def _chk_conformal_dim2(scene, points, mus, tol, ws, pmap):
    out = []
    for mu in mus:
        def work(idx, mu=mu):
            ctx = ws.base_ctx(idx)
            ctx_t = ws.tilde_ctx(mu, idx)
            x = ctx.geom.x
            scalefac = math.exp(2.0 * mu.evaluate(x).value)
            return _compare(
                "conformal-dim2", mu.source, scene.name, x,
                scalefac * _tau_v(ctx_t), _tau_v(ctx), tol,
            )

        out.extend(pmap(work, range(len(points))))
    return out


def _chk_conformal_tg(scene, points, mus, tol, ws, pmap):
    out = []
    for mu in mus:
        def work(idx, mu=mu):
            ctx_t = ws.tilde_ctx(mu, idx)
            tv = _tau_v(ctx_t)
            return _compare(
                "conformal-tg", mu.source, scene.name, ctx_t.geom.x, tv, np.zeros_like(tv), tol
            )

        out.extend(pmap(work, range(len(points))))
    return out


def _chk_halfdim(scene, points, mus, tol, ws, pmap):
    kappa = float(scene.constant_curvature)
    out = []
    for mu in mus:
        def work(idx, mu=mu):
            ctx = ws.base_ctx(idx)
            m = ws.mu_data(mu, idx)
            return _compare(
                "halfdim", mu.source, scene.name, ctx.geom.x,
                _predicted_tau_h_halfdim(ctx, m, kappa), _predicted_tau_h(ctx, m), tol,
            )

        out.extend(pmap(work, range(len(points))))
    return out


# -- applicability -------------------------------------------------------------------


def _always(scene: Scene):
    return True, ""


def _needs_kappa(scene: Scene):
    if scene.constant_curvature is None:
        return False, "scene declares no constant curvature"
    return True, ""


def _needs_halfdim(scene: Scene):
    ok, why = _needs_kappa(scene)
    if not ok:
        return ok, why
    p = scene.distribution.p
    if 2 * p != scene.n:
        return False, f"rank {p} is not half of dimension {scene.n}"
    return True, ""


def _needs_dim2(scene: Scene):
    if scene.n != 2:
        return False, f"scene dimension is {scene.n}, not 2"
    return True, ""


def _is_totally_geodesic(scene: Scene) -> bool:
    ctx = point_context(scene.metric, scene.distribution, scene.validation_point())
    nv = ctx.nabla_values()
    worst = 0.0
    for a in ctx.frame.sigma_range():
        for b in ctx.frame.sigma_range():
            worst = max(worst, float(np.linalg.norm(project(ctx.frame, nv[a, b], "normal"))))
    for i in ctx.frame.perp_range():
        for j in ctx.frame.perp_range():
            worst = max(worst, float(np.linalg.norm(project(ctx.frame, nv[i, j], "tangent"))))
    return worst <= 1e-10


def _needs_tg(scene: Scene):
    if not _is_totally_geodesic(scene):
        return False, "distribution and complement are not totally geodesic"
    return True, ""


def _needs_tg_equal_rank(scene: Scene):
    ok, why = _needs_tg(scene)
    if not ok:
        return ok, why
    p = scene.distribution.p
    if p != scene.n - p:
        return False, f"rank {p} differs from corank {scene.n - p}"
    return True, ""


def _needs_orthogonal_complement(scene: Scene):
    dist = scene.distribution
    if dist.complement is None:
        return False, "scene declares no complement fields"
    x = scene.validation_point()
    geom = GeometryCache(scene.metric, x)
    for vf in dist.spanning:
        for wf in dist.complement:
            if abs(geom.inner(vf.vecjet(x).val, wf.vecjet(x).val)) > 1e-9:
                return False, "declared complement is not orthogonal to the distribution"
    return True, ""


# -- registry --------------------------------------------------------------------------


@dataclass(frozen=True)
class CheckSpec:
    name: str
    fn: Callable
    tol: float
    needs_mu: bool
    applicable: Callable


REGISTRY: dict[str, CheckSpec] = {}


def _register(name, fn, tol, needs_mu=False, applicable=_always):
    REGISTRY[name] = CheckSpec(name, fn, tol, needs_mu, applicable)


_register("jets-vs-fd", _chk_jets_vs_fd, 1e-5)
_register("levi-civita", _chk_levi_civita, 1e-8)
_register("curvature-symmetries", _chk_curvature_symmetries, 1e-8)
_register("constant-curvature-tension", _chk_constant_curvature_tension, 1e-7, applicable=_needs_kappa)
_register("harm1-equivalence", _chk_harm1, 1e-7)
_register("harm2-equivalence", _chk_harm2, 1e-7)
_register("tension-duality", _chk_duality, 1e-7, applicable=_needs_orthogonal_complement)
_register("totally-geodesic", _chk_totally_geodesic, 1e-9, applicable=_needs_tg)
_register("tensoriality", _chk_tensoriality, 1e-7)
_register("conformal-connection", _chk_conformal_connection, 1e-8, needs_mu=True)
_register("conformal-curvature", _chk_conformal_curvature, 1e-7, needs_mu=True)
_register("conformal-frame", _chk_conformal_frame, 1e-8, needs_mu=True)
_register("conformal-tau-h", _chk_conformal_tau_h, 1e-6, needs_mu=True)
_register("conformal-tau-v", _chk_conformal_tau_v, 1e-6, needs_mu=True)
_register("conformal-dim2", _chk_conformal_dim2, 1e-7, needs_mu=True, applicable=_needs_dim2)
_register("conformal-tg", _chk_conformal_tg, 1e-8, needs_mu=True, applicable=_needs_tg_equal_rank)
_register("halfdim", _chk_halfdim, 1e-7, needs_mu=True, applicable=_needs_halfdim)

CHECK_NAMES = tuple(REGISTRY)


# -- runner -----------------------------------------------------------------------------


def resolve_mus(scene: Scene, mu_override: Optional[str]) -> list[ScalarField]:
    if mu_override is not None:
        return [parse(mu_override, scene.coordinates)]
    if scene.mu is not None:
        return [scene.mu]
    return [parse(src, scene.coordinates) for src in DEFAULT_MUS]


def run_verify(
    scene: Scene,
    checks="all",
    samples: int = 100,
    seed: int = 7,
    tol: Optional[float] = None,
    tol_overrides: Optional[dict] = None,
    mu_override: Optional[str] = None,
    threads: int = 1,
) -> list[CheckResult]:
    """Run the selected identity checks on seeded sample points.

    ``checks`` is "all" (every check applicable to the scene) or an iterable
    of registry names; explicitly requesting an inapplicable or unknown
    check raises :class:`CheckUsageError`.
    """
    tol_overrides = tol_overrides or {}
    for name in tol_overrides:
        if name not in REGISTRY:
            raise CheckUsageError(f"unknown check {name!r} in tolerance override")
    if checks == "all":
        selected = []
        for name, spec in REGISTRY.items():
            ok, _ = spec.applicable(scene)
            if ok:
                selected.append(name)
    else:
        selected = list(checks)
        for name in selected:
            if name not in REGISTRY:
                raise CheckUsageError(f"unknown check {name!r}; known: {', '.join(CHECK_NAMES)}")
            ok, why = REGISTRY[name].applicable(scene)
            if not ok:
                raise CheckUsageError(f"check {name!r} not applicable to scene {scene.name!r}: {why}")
    points = sample_points(scene, samples, seed)
    ws = Workspace(scene, points, seed)
    mus = resolve_mus(scene, mu_override)
    results: list[CheckResult] = []
    executor = ThreadPoolExecutor(max_workers=threads) if threads > 1 else None
    try:
        if executor is not None:
            pmap = lambda fn, items: list(executor.map(fn, items))
        else:
            pmap = lambda fn, items: [fn(item) for item in items]
        for name in selected:
            spec = REGISTRY[name]
            check_tol = tol_overrides.get(name, tol if tol is not None else spec.tol)
            results.extend(spec.fn(scene, points, mus, check_tol, ws, pmap))
    finally:
        if executor is not None:
            executor.shutdown()
    return results
