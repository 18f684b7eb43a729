"""Chart-level Riemannian calculus.

Everything here works at a single chart point.  The metric entries are
evaluated as second-order jets; from those we assemble, as plain numpy
arrays, the Christoffel symbols with their first derivatives and the
curvature tensor.  Vector fields at a point are carried as value /
Jacobian / (optionally) second-derivative triples, which is exactly the
derivative information a second-order jet of each component provides.

Index conventions used throughout:

    dg[i, j, k]        = d_k g_ij
    ddg[i, j, k, l]    = d_k d_l g_ij
    gamma[k, i, j]     = Gamma^k_ij
    dgamma[k, i, j, m] = d_m Gamma^k_ij
    riem[l, k, i, j]   : R(d_i, d_j) d_k = riem[l, k, i, j] d_l

with the curvature sign fixed by R(X,Y)Z = nabla_X nabla_Y Z
- nabla_Y nabla_X Z - nabla_[X,Y] Z, so constant-curvature metrics satisfy
R(X,Y)Z = kappa (g(Y,Z) X - g(X,Z) Y).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .exprlang import ScalarField
from .jets import Jet2, constant, jsqrt

__all__ = [
    "GeometryError",
    "MetricField",
    "VectorFieldSpec",
    "Distribution",
    "Frame",
    "VecJet",
    "GeometryCache",
    "metric_at",
    "christoffel",
    "covariant_derivative",
    "curvature_apply",
    "grad_scalar",
    "hess_operator",
    "laplacian",
    "laplacian_along",
    "adapted_frame",
    "project",
]

SYMMETRY_TOL = 1e-12
FRAME_ORTHO_TOL = 1e-10
RANK_TOL = 1e-8


class GeometryError(ValueError):
    """Geometric precondition failed (non-positive-definite metric, rank
    deficiency, non-tangent input, ...)."""


# -- field specifications -----------------------------------------------------


@dataclass(frozen=True)
class VectorFieldSpec:
    """A vector field given by one expression per chart component."""

    components: tuple[ScalarField, ...]

    @property
    def n(self) -> int:
        return len(self.components)

    def jets(self, x) -> list[Jet2]:
        return [f.evaluate(x) for f in self.components]

    def vecjet(self, x) -> "VecJet":
        return VecJet.from_jets(self.jets(x))


@dataclass
class Distribution:
    """Rank-p distribution spanned by expression fields, with an optional
    declared complement.  When no complement is given, the frame builder
    completes with coordinate basis vectors chosen by a pivot pattern that
    is frozen on first use so the resulting frame field stays smooth."""

    spanning: tuple[VectorFieldSpec, ...]
    complement: Optional[tuple[VectorFieldSpec, ...]] = None
    pivot: Optional[tuple[int, ...]] = None

    @property
    def p(self) -> int:
        return len(self.spanning)


@dataclass(frozen=True)
class MetricField:
    """Riemannian metric given by an n x n array of entry expressions."""

    components: tuple[tuple[ScalarField, ...], ...]

    @property
    def n(self) -> int:
        return len(self.components)


# -- per-point derivative data -------------------------------------------------


@dataclass
class VecJet:
    """Chart components of a vector field at a point with derivatives.

    jac[k, m] = d_m V^k; hess[k, m, l] = d_m d_l V^k (None when the field is
    only known to first order, e.g. after one covariant derivative).
    """

    val: np.ndarray
    jac: np.ndarray
    hess: Optional[np.ndarray] = None

    @classmethod
    def from_jets(cls, jets: Sequence[Jet2]) -> "VecJet":
        val = np.array([j.value for j in jets])
        jac = np.array([j.grad for j in jets])
        hess = np.array([j.hess for j in jets])
        return cls(val, jac, hess)

    @classmethod
    def constant(cls, val) -> "VecJet":
        val = np.asarray(val, dtype=float)
        n = val.shape[0]
        return cls(val, np.zeros((n, n)), np.zeros((n, n, n)))


class GeometryCache:
    """All metric-derived data at one chart point.

    Built once per (metric, point) and shared by every operation that needs
    the connection or the curvature there.  Immutable after construction, so
    it is safe to reuse across concurrent evaluations.
    """

    def __init__(self, metric: MetricField, x):
        x = np.asarray(x, dtype=float)
        n = metric.n
        self.x = x
        self.n = n
        jets = [[metric.components[i][j].evaluate(x) for j in range(n)] for i in range(n)]
        g0 = np.array([[jets[i][j].value for j in range(n)] for i in range(n)])
        scale = 1.0 + np.max(np.abs(g0))
        if np.max(np.abs(g0 - g0.T)) > SYMMETRY_TOL * scale:
            raise GeometryError(f"metric not symmetric at {x.tolist()}")
        # Mirror the upper triangle so downstream arrays are exactly symmetric.
        for i in range(n):
            for j in range(i + 1, n):
                jets[j][i] = jets[i][j]
        self.gjet = jets
        self.g0 = np.array([[jets[i][j].value for j in range(n)] for i in range(n)])
        self.dg = np.array([[jets[i][j].grad for j in range(n)] for i in range(n)])
        self.ddg = np.array([[jets[i][j].hess for j in range(n)] for i in range(n)])
        try:
            np.linalg.cholesky(self.g0)
        except np.linalg.LinAlgError:
            raise GeometryError(f"metric not positive definite at {x.tolist()}") from None
        self.ginv0 = np.linalg.inv(self.g0)
        # d_k g^ij = -g^ia (d_k g_ab) g^bj
        self.dginv = -np.einsum("ia,abk,bj->ijk", self.ginv0, self.dg, self.ginv0)
        s = np.einsum("jli->lij", self.dg) + np.einsum("ilj->lij", self.dg) - np.einsum("ijl->lij", self.dg)
        self.gamma = 0.5 * np.einsum("kl,lij->kij", self.ginv0, s)
        ds = (
            np.einsum("jlim->lijm", self.ddg)
            + np.einsum("iljm->lijm", self.ddg)
            - np.einsum("ijlm->lijm", self.ddg)
        )
        self.dgamma = 0.5 * (
            np.einsum("klm,lij->kijm", self.dginv, s) + np.einsum("kl,lijm->kijm", self.ginv0, ds)
        )
        self.riem = (
            np.einsum("ljki->lkij", self.dgamma)
            - np.einsum("likj->lkij", self.dgamma)
            + np.einsum("lim,mjk->lkij", self.gamma, self.gamma)
            - np.einsum("ljm,mik->lkij", self.gamma, self.gamma)
        )

    # -- pointwise operations ------------------------------------------------

    def inner(self, u, v) -> float:
        return float(u @ self.g0 @ v)

    def norm(self, u) -> float:
        return float(np.sqrt(max(self.inner(u, u), 0.0)))

    def curvature(self, xv, yv, zv) -> np.ndarray:
        """Chart components of R(X, Y)Z from the component values."""
        return np.einsum("lkij,i,j,k->l", self.riem, xv, yv, zv)

    def cov_dir(self, v: VecJet, direction) -> np.ndarray:
        """(nabla_X V)^k = X^i (d_i V^k + Gamma^k_ij V^j) for a value-level
        direction."""
        direction = np.asarray(direction, dtype=float)
        return v.jac @ direction + np.einsum("kij,i,j->k", self.gamma, direction, v.val)

    def cov_field(self, v: VecJet, xfield: VecJet) -> VecJet:
        """nabla_X V as a first-order field; requires V to second order."""
        if v.hess is None:
            raise GeometryError("cov_field requires second-order field data")
        inner1 = v.jac + np.einsum("kij,j->ki", self.gamma, v.val)
        val = inner1 @ xfield.val
        jac = (
            np.einsum("im,ki->km", xfield.jac, inner1)
            + np.einsum("i,kim->km", xfield.val, v.hess)
            + np.einsum("i,kijm,j->km", xfield.val, self.dgamma, v.val)
            + np.einsum("i,kij,jm->km", xfield.val, self.gamma, v.jac)
        )
        return VecJet(val, jac, None)

    def grad_field(self, mu_jet: Jet2) -> VecJet:
        """The g-raised gradient of a scalar as a first-order field."""
        val = self.ginv0 @ mu_jet.grad
        jac = np.einsum("klm,l->km", self.dginv, mu_jet.grad) + self.ginv0 @ mu_jet.hess
        return VecJet(val, jac, None)

    def hess_apply(self, mu_jet: Jet2, v) -> np.ndarray:
        """Hessian operator nabla_v (grad mu) on a value-level vector."""
        return self.cov_dir(self.grad_field(mu_jet), v)

    def laplacian(self, mu_jet: Jet2) -> float:
        """trace of the Hessian operator, g^ij (d_i d_j mu - Gamma^k_ij d_k mu)."""
        return float(
            np.einsum("ij,ij->", self.ginv0, mu_jet.hess)
            - np.einsum("ij,kij,k->", self.ginv0, self.gamma, mu_jet.grad)
        )

    # -- first-order scalar/vector field algebra -----------------------------

    def inner_field(self, u: VecJet, v: VecJet) -> tuple[float, np.ndarray]:
        """g(U, V) with its coordinate gradient."""
        val = float(u.val @ self.g0 @ v.val)
        grad = (
            np.einsum("ijm,i,j->m", self.dg, u.val, v.val)
            + np.einsum("ij,im,j->m", self.g0, u.jac, v.val)
            + np.einsum("ij,i,jm->m", self.g0, u.val, v.jac)
        )
        return val, grad


def scale_field(s: float, sgrad: np.ndarray, v: VecJet) -> VecJet:
    """(s V) as a first-order field for a first-order scalar (s, sgrad)."""
    return VecJet(s * v.val, np.outer(v.val, sgrad) + s * v.jac, None)


def add_fields(u: VecJet, v: VecJet) -> VecJet:
    return VecJet(u.val + v.val, u.jac + v.jac, None)


def sub_fields(u: VecJet, v: VecJet) -> VecJet:
    return VecJet(u.val - v.val, u.jac - v.jac, None)


def bracket(u: VecJet, v: VecJet) -> np.ndarray:
    """[U, V]^k = U^m d_m V^k - V^m d_m U^k from the component jets."""
    return v.jac @ u.val - u.jac @ v.val


# -- frames -------------------------------------------------------------------


@dataclass
class Frame:
    """Adapted g-orthonormal frame at a point, components carried as jets so
    the frame is twice differentiable as a field.  The first p vectors span
    the distribution, the rest its orthogonal complement."""

    vectors: tuple[tuple[Jet2, ...], ...]
    p: int
    point: np.ndarray
    g0: np.ndarray
    _fields: list = field(default_factory=list, repr=False)

    @property
    def n(self) -> int:
        return len(self.vectors)

    @property
    def q(self) -> int:
        return self.n - self.p

    def values(self) -> np.ndarray:
        """(frame index, component) array of values."""
        return np.array([[c.value for c in vec] for vec in self.vectors])

    def fields(self) -> list[VecJet]:
        if not self._fields:
            self._fields = [VecJet.from_jets(vec) for vec in self.vectors]
        return self._fields

    def sigma_range(self) -> range:
        return range(self.p)

    def perp_range(self) -> range:
        return range(self.p, self.n)


def _jet_vec_inner(gjet, u, v) -> Jet2:
    n = len(u)
    acc = None
    for i in range(n):
        for j in range(n):
            term = gjet[i][j] * u[i] * v[j]
            acc = term if acc is None else acc + term
    return acc


def _jet_vec_axpy(u, coeff: Jet2, v):
    # u - coeff * v, componentwise in jets
    return [ui - coeff * vi for ui, vi in zip(u, v)]


def _gram_schmidt(gjet, candidates, accepted, required: bool):
    """Orthonormalize candidates against accepted (in fixed order).

    Returns the list of new frame vectors.  When required, a residual below
    the rank threshold raises; otherwise such candidates are skipped.
    """
    out = []
    for cand in candidates:
        u = list(cand)
        for e in accepted + out:
            coeff = _jet_vec_inner(gjet, u, e)
            u = _jet_vec_axpy(u, coeff, e)
        norm2 = _jet_vec_inner(gjet, u, u)
        if norm2.value < RANK_TOL * RANK_TOL:
            if required:
                raise GeometryError("rank deficiency: spanning vector in span of previous ones")
            continue
        inv_norm = constant(1.0, u[0].n) / jsqrt(norm2)
        out.append([ui * inv_norm for ui in u])
    return out


def _basis_jets(n: int) -> list[list[Jet2]]:
    basis = []
    for k in range(n):
        vec = [constant(1.0 if c == k else 0.0, n) for c in range(n)]
        basis.append(vec)
    return basis


def _choose_pivot(gjet, sigma_frame, n: int, q: int) -> tuple[int, ...]:
    """Greedy residual-maximizing pivot pattern for auto-completion."""
    chosen = []
    accepted = [list(v) for v in sigma_frame]
    basis = _basis_jets(n)
    for _ in range(q):
        best, best_res = -1, -1.0
        for k in range(n):
            if k in chosen:
                continue
            u = list(basis[k])
            for e in accepted:
                coeff = _jet_vec_inner(gjet, u, e)
                u = _jet_vec_axpy(u, coeff, e)
            res = _jet_vec_inner(gjet, u, u).value
            if res > best_res:
                best, best_res = k, res
        if best_res < RANK_TOL * RANK_TOL:
            raise GeometryError("rank deficiency: cannot complete frame from coordinate basis")
        chosen.append(best)
        u = list(basis[best])
        for e in accepted:
            coeff = _jet_vec_inner(gjet, u, e)
            u = _jet_vec_axpy(u, coeff, e)
        norm2 = _jet_vec_inner(gjet, u, u)
        inv_norm = constant(1.0, n) / jsqrt(norm2)
        accepted.append([ui * inv_norm for ui in u])
    return tuple(chosen)


def adapted_frame(g: MetricField, dist: Distribution, x, geom: Optional[GeometryCache] = None) -> Frame:
    """Gram-Schmidt frame adapted to the distribution, in fixed order with no
    pivoting on the declared fields."""
    geom = geom or GeometryCache(g, x)
    n = g.n
    if dist.p >= n:
        raise GeometryError("distribution rank must be smaller than the dimension")
    gjet = geom.gjet
    sigma_candidates = [vf.jets(geom.x) for vf in dist.spanning]
    sigma_frame = _gram_schmidt(gjet, sigma_candidates, [], required=True)
    if dist.complement is not None:
        if len(dist.complement) != n - dist.p:
            raise GeometryError(
                f"complement must have {n - dist.p} fields, got {len(dist.complement)}"
            )
        comp_candidates = [vf.jets(geom.x) for vf in dist.complement]
    else:
        if dist.pivot is None:
            dist.pivot = _choose_pivot(gjet, sigma_frame, n, n - dist.p)
        basis = _basis_jets(n)
        comp_candidates = [basis[k] for k in dist.pivot]
    comp_frame = _gram_schmidt(gjet, comp_candidates, sigma_frame, required=True)
    vectors = tuple(tuple(vec) for vec in sigma_frame + comp_frame)
    frame = Frame(vectors, dist.p, geom.x, geom.g0)
    vals = frame.values()
    gram = vals @ geom.g0 @ vals.T
    if np.max(np.abs(gram - np.eye(n))) > FRAME_ORTHO_TOL:
        raise GeometryError(f"frame failed orthonormality check at {geom.x.tolist()}")
    return frame


def project(frame: Frame, v, part: str) -> np.ndarray:
    """Project a chart vector onto the distribution (part='tangent') or its
    complement (part='normal')."""
    v = np.asarray(v, dtype=float)
    vals = frame.values()
    tangent = np.zeros_like(v)
    for a in frame.sigma_range():
        ea = vals[a]
        tangent = tangent + (v @ frame.g0 @ ea) * ea
    if part == "tangent":
        return tangent
    if part == "normal":
        return v - tangent
    raise ValueError(f"part must be 'tangent' or 'normal', got {part!r}")


def project_field(geom: GeometryCache, frame: Frame, v: VecJet, part: str) -> VecJet:
    """First-order field version of the frame projection."""
    efields = frame.fields()
    n = geom.n
    tangent = VecJet(np.zeros(n), np.zeros((n, n)), None)
    for a in frame.sigma_range():
        s, sgrad = geom.inner_field(v, efields[a])
        tangent = add_fields(tangent, scale_field(s, sgrad, efields[a]))
    if part == "tangent":
        return tangent
    if part == "normal":
        return VecJet(v.val - tangent.val, v.jac - tangent.jac, None)
    raise ValueError(f"part must be 'tangent' or 'normal', got {part!r}")


# -- public chart operations ----------------------------------------------------


def metric_at(g: MetricField, x) -> list[list[Jet2]]:
    """Evaluate the metric at a point as a symmetric matrix of jets."""
    return GeometryCache(g, x).gjet


@dataclass(frozen=True)
class Christoffel:
    """Gamma^k_ij together with its first coordinate derivatives."""

    values: np.ndarray  # (k, i, j)
    derivs: np.ndarray  # (k, i, j, m) = d_m Gamma^k_ij


def christoffel(g: MetricField, x) -> Christoffel:
    geom = GeometryCache(g, x)
    return Christoffel(geom.gamma, geom.dgamma)


def covariant_derivative(g: MetricField, v: VectorFieldSpec, x, direction) -> np.ndarray:
    """Chart components of nabla_X V.  The direction may be a chart vector or
    another field spec (evaluated at x)."""
    geom = GeometryCache(g, x)
    if isinstance(direction, VectorFieldSpec):
        direction = direction.vecjet(geom.x).val
    return geom.cov_dir(v.vecjet(geom.x), direction)


def curvature_apply(g: MetricField, x, xv, yv, zv) -> np.ndarray:
    """Chart components of R(X, Y)Z for value-level vectors."""
    return GeometryCache(g, x).curvature(
        np.asarray(xv, dtype=float), np.asarray(yv, dtype=float), np.asarray(zv, dtype=float)
    )


def grad_scalar(g: MetricField, mu: ScalarField, x) -> np.ndarray:
    geom = GeometryCache(g, x)
    return geom.grad_field(mu.evaluate(geom.x)).val


def hess_operator(g: MetricField, mu: ScalarField, x, v) -> np.ndarray:
    geom = GeometryCache(g, x)
    return geom.hess_apply(mu.evaluate(geom.x), np.asarray(v, dtype=float))


def laplacian(g: MetricField, mu: ScalarField, x) -> float:
    geom = GeometryCache(g, x)
    return geom.laplacian(mu.evaluate(geom.x))


def laplacian_along(g: MetricField, mu: ScalarField, x, frame: Frame, part: str) -> float:
    """Partial trace of the Hessian over the frame vectors spanning the
    distribution ('sigma') or its complement ('perp')."""
    geom = GeometryCache(g, x)
    mu_jet = mu.evaluate(geom.x)
    vals = frame.values()
    if part == "sigma":
        idx = frame.sigma_range()
    elif part == "perp":
        idx = frame.perp_range()
    else:
        raise ValueError(f"part must be 'sigma' or 'perp', got {part!r}")
    total = 0.0
    for a in idx:
        total += geom.inner(geom.hess_apply(mu_jet, vals[a]), vals[a])
    return float(total)
