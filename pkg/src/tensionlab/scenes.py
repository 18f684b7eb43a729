"""Built-in scenes and the JSON scene loader.

A scene bundles a chart: dimension, coordinate names, metric expressions,
distribution spanning fields (plus declared complement), an optional
conformal factor, an optional declared constant curvature, and a sampling
domain (axis-aligned box minus exclusion balls around singular points).

Sampling uses an explicitly specified 64-bit linear congruential generator
so point sequences are bit-identical across platforms and implementations:

    state_0   = (seed + 0x9E3779B97F4A7C15) mod 2^64
    state_k+1 = (6364136223846793005 * state_k + 1442695040888963407) mod 2^64
    u_k       = (state_k+1 >> 11) / 2^53

Each candidate point draws one u per coordinate, in coordinate order, mapped
affinely into the box; candidates inside an exclusion ball are rejected.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .exprlang import ExprSyntaxError, ScalarField, parse
from .geometry import Distribution, GeometryCache, GeometryError, MetricField, VectorFieldSpec, adapted_frame

__all__ = [
    "Scene",
    "SceneError",
    "Exclusion",
    "Lcg",
    "builtin",
    "builtin_names",
    "load",
    "sample_points",
    "scene_to_dict",
]

LCG_MULT = 6364136223846793005
LCG_INC = 1442695040888963407
LCG_SEED_OFFSET = 0x9E3779B97F4A7C15
MASK64 = (1 << 64) - 1


class SceneError(ValueError):
    """Scene construction or validation failed."""


class Lcg:
    """The documented cross-platform generator (see module docstring)."""

    def __init__(self, seed: int):
        self.state = (int(seed) + LCG_SEED_OFFSET) & MASK64

    def uniform(self) -> float:
        self.state = (LCG_MULT * self.state + LCG_INC) & MASK64
        return (self.state >> 11) / float(1 << 53)

    def uniform_in(self, lo: float, hi: float) -> float:
        return lo + self.uniform() * (hi - lo)


@dataclass(frozen=True)
class Exclusion:
    center: tuple[float, ...]
    radius: float

    def contains(self, x) -> bool:
        d = np.asarray(x, dtype=float) - np.asarray(self.center, dtype=float)
        return float(np.sqrt(d @ d)) < self.radius


@dataclass
class Scene:
    name: str
    coordinates: tuple[str, ...]
    metric: MetricField
    distribution: Distribution
    box: tuple[tuple[float, float], ...]
    mu: Optional[ScalarField] = None
    constant_curvature: Optional[float] = None
    exclusions: tuple[Exclusion, ...] = ()

    @property
    def n(self) -> int:
        return len(self.coordinates)

    def admissible(self, x) -> bool:
        x = np.asarray(x, dtype=float)
        for (lo, hi), xi in zip(self.box, x):
            if not lo <= xi <= hi:
                return False
        return not any(exc.contains(x) for exc in self.exclusions)

    def validation_point(self) -> np.ndarray:
        """Box center, or the first admissible seeded point when the center
        sits inside an exclusion zone."""
        center = np.array([(lo + hi) / 2.0 for lo, hi in self.box])
        if self.admissible(center):
            return center
        rng = Lcg(0)
        for _ in range(1000):
            cand = np.array([rng.uniform_in(lo, hi) for lo, hi in self.box])
            if self.admissible(cand):
                return cand
        raise SceneError(f"scene {self.name!r}: no admissible validation point found")

    def validate(self) -> None:
        """Check the scene invariants at the validation point: symmetric
        positive-definite metric, full-rank distribution, evaluable mu."""
        x = self.validation_point()
        try:
            GeometryCache(self.metric, x)
            adapted_frame(self.metric, self.distribution, x)
            if self.mu is not None:
                self.mu.evaluate(x)
        except (GeometryError, ArithmeticError) as err:
            raise SceneError(f"scene {self.name!r} failed validation: {err}") from err


def sample_points(scene: Scene, count: int, seed: int) -> list[np.ndarray]:
    """Deterministic uniform samples in the box, rejecting exclusion-zone
    points.  The rejection budget is 10 * count candidates."""
    if count < 1:
        raise SceneError("sample count must be at least 1")
    rng = Lcg(seed)
    points: list[np.ndarray] = []
    attempts = 0
    budget = 10 * count
    while len(points) < count:
        if attempts >= budget:
            raise SceneError(
                f"scene {scene.name!r}: exclusions leave too little admissible volume"
            )
        attempts += 1
        cand = np.array([rng.uniform_in(lo, hi) for lo, hi in scene.box])
        if scene.admissible(cand):
            points.append(cand)
    return points


# -- builtins ---------------------------------------------------------------------


def _metric(entries, coords) -> MetricField:
    return MetricField(tuple(tuple(parse(e, coords) for e in row) for row in entries))


def _fields(rows, coords) -> tuple[VectorFieldSpec, ...]:
    return tuple(VectorFieldSpec(tuple(parse(e, coords) for e in row)) for row in rows)


def _plane_axis() -> Scene:
    coords = ("x", "y")
    return Scene(
        name="plane-axis",
        coordinates=coords,
        metric=_metric([["1", "0"], ["0", "1"]], coords),
        distribution=Distribution(
            spanning=_fields([["1", "0"]], coords),
            complement=_fields([["0", "1"]], coords),
        ),
        box=((-2.0, 2.0), (-2.0, 2.0)),
        constant_curvature=0.0,
    )


def _sphere_chart() -> Scene:
    coords = ("x", "y")
    conf = "4/(1+x^2+y^2)^2"
    circle = ["-y*(1+x^2+y^2)/(2*sqrt(x^2+y^2))", "x*(1+x^2+y^2)/(2*sqrt(x^2+y^2))"]
    ray = ["x*(1+x^2+y^2)/(2*sqrt(x^2+y^2))", "y*(1+x^2+y^2)/(2*sqrt(x^2+y^2))"]
    return Scene(
        name="sphere-chart",
        coordinates=coords,
        metric=_metric([[conf, "0"], ["0", conf]], coords),
        distribution=Distribution(
            spanning=_fields([circle], coords),
            complement=_fields([ray], coords),
        ),
        box=((-2.5, 2.5), (-2.5, 2.5)),
        constant_curvature=1.0,
        exclusions=(Exclusion((0.0, 0.0), 0.3),),
    )


def _hyperbolic_horocycle() -> Scene:
    coords = ("x", "y")
    return Scene(
        name="hyperbolic-horocycle",
        coordinates=coords,
        metric=_metric([["1/y^2", "0"], ["0", "1/y^2"]], coords),
        distribution=Distribution(
            spanning=_fields([["1", "0"]], coords),
            complement=_fields([["0", "1"]], coords),
        ),
        box=((-2.0, 2.0), (0.5, 2.5)),
        constant_curvature=-1.0,
    )


def _flat_product_22() -> Scene:
    coords = ("x", "y", "z", "w")
    eye = [["1" if i == j else "0" for j in range(4)] for i in range(4)]
    return Scene(
        name="flat-product-22",
        coordinates=coords,
        metric=_metric(eye, coords),
        distribution=Distribution(
            spanning=_fields([["1", "0", "0", "0"], ["0", "1", "0", "0"]], coords),
            complement=_fields([["0", "0", "1", "0"], ["0", "0", "0", "1"]], coords),
        ),
        box=((-2.0, 2.0),) * 4,
        constant_curvature=0.0,
    )


def _flat_product_11() -> Scene:
    scene = _plane_axis()
    scene.name = "flat-product-11"
    return scene


_BUILTINS = {
    "plane-axis": _plane_axis,
    "sphere-chart": _sphere_chart,
    "hyperbolic-horocycle": _hyperbolic_horocycle,
    "flat-product-22": _flat_product_22,
    "flat-product-11": _flat_product_11,
}


def builtin_names() -> list[str]:
    return sorted(_BUILTINS)


def builtin(name: str) -> Scene:
    """A fresh instance of a registered scene."""
    try:
        ctor = _BUILTINS[name]
    except KeyError:
        raise SceneError(f"unknown scene {name!r}; known: {', '.join(builtin_names())}") from None
    return ctor()


# -- file format --------------------------------------------------------------------


def scene_to_dict(scene: Scene) -> dict:
    """The JSON document form of a scene (see README for the schema)."""
    doc = {
        "dimension": scene.n,
        "coordinates": list(scene.coordinates),
        "metric": [[f.source for f in row] for row in scene.metric.components],
        "distribution": [[f.source for f in vf.components] for vf in scene.distribution.spanning],
    }
    if scene.distribution.complement is not None:
        doc["complement"] = [[f.source for f in vf.components] for vf in scene.distribution.complement]
    if scene.mu is not None:
        doc["mu"] = scene.mu.source
    if scene.constant_curvature is not None:
        doc["constant_curvature"] = scene.constant_curvature
    doc["domain"] = {"box": [list(pair) for pair in scene.box]}
    if scene.exclusions:
        doc["exclusions"] = [
            {"center": list(exc.center), "radius": exc.radius} for exc in scene.exclusions
        ]
    return doc


def _parse_expr(source, coords, where: str) -> ScalarField:
    if not isinstance(source, str):
        raise SceneError(f"{where}: expected an expression string, got {type(source).__name__}")
    try:
        return parse(source, coords)
    except ExprSyntaxError as err:
        raise SceneError(f"{where}: {err}") from err


def scene_from_dict(doc: dict, name: str = "user-scene") -> Scene:
    try:
        n = int(doc["dimension"])
        coords = tuple(doc["coordinates"])
        metric_rows = doc["metric"]
        dist_rows = doc["distribution"]
        box = doc["domain"]["box"]
    except KeyError as err:
        raise SceneError(f"scene file missing required field {err.args[0]!r}") from None
    if len(coords) != n:
        raise SceneError(f"dimension is {n} but {len(coords)} coordinates are declared")
    if len(metric_rows) != n or any(len(row) != n for row in metric_rows):
        shape = f"{len(metric_rows)}x{max(len(r) for r in metric_rows) if metric_rows else 0}"
        raise SceneError(f"metric must be a {n}x{n} array of expressions, got {shape}")
    metric = MetricField(
        tuple(
            tuple(_parse_expr(metric_rows[i][j], coords, f"metric[{i}][{j}]") for j in range(n))
            for i in range(n)
        )
    )
    if not dist_rows:
        raise SceneError("distribution needs at least one spanning field")
    if len(dist_rows) >= n:
        raise SceneError(f"distribution rank {len(dist_rows)} leaves an empty complement in dimension {n}")
    for r, row in enumerate(dist_rows):
        if len(row) != n:
            raise SceneError(f"distribution[{r}] must have {n} components, got {len(row)}")
    spanning = tuple(
        VectorFieldSpec(
            tuple(_parse_expr(row[k], coords, f"distribution[{r}][{k}]") for k in range(n))
        )
        for r, row in enumerate(dist_rows)
    )
    complement = None
    if "complement" in doc:
        comp_rows = doc["complement"]
        q = n - len(dist_rows)
        if len(comp_rows) != q or any(len(row) != n for row in comp_rows):
            raise SceneError(f"complement must be {q} fields of {n} components")
        complement = tuple(
            VectorFieldSpec(
                tuple(_parse_expr(row[k], coords, f"complement[{r}][{k}]") for k in range(n))
            )
            for r, row in enumerate(comp_rows)
        )
    mu = _parse_expr(doc["mu"], coords, "mu") if "mu" in doc else None
    kappa = float(doc["constant_curvature"]) if "constant_curvature" in doc else None
    if len(box) != n or any(len(pair) != 2 for pair in box):
        raise SceneError(f"domain.box must be {n} [lo, hi] pairs")
    box_t = tuple((float(lo), float(hi)) for lo, hi in box)
    if any(lo >= hi for lo, hi in box_t):
        raise SceneError("domain.box pairs must satisfy lo < hi")
    exclusions = []
    for k, exc in enumerate(doc.get("exclusions", [])):
        center = tuple(float(c) for c in exc["center"])
        if len(center) != n:
            raise SceneError(f"exclusions[{k}].center must have {n} components")
        radius = float(exc["radius"])
        if radius <= 0:
            raise SceneError(f"exclusions[{k}].radius must be positive")
        exclusions.append(Exclusion(center, radius))
    scene = Scene(
        name=name,
        coordinates=coords,
        metric=metric,
        distribution=Distribution(spanning=spanning, complement=complement),
        box=box_t,
        mu=mu,
        constant_curvature=kappa,
        exclusions=tuple(exclusions),
    )
    scene.validate()
    if scene.distribution.complement is None:
        # Freeze the auto-completion pivot pattern at the validation point so
        # frames stay smooth across all of this scene's evaluations.
        adapted_frame(scene.metric, scene.distribution, scene.validation_point())
    return scene


def load(path) -> Scene:
    """Load and validate a scene from a JSON file."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as err:
        raise SceneError(f"cannot read scene file {path!r}: {err}") from err
    except json.JSONDecodeError as err:
        raise SceneError(f"scene file {path!r} is not valid JSON: {err}") from err
    return scene_from_dict(doc, name=str(path))
