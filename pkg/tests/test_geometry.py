import numpy as np
import pytest

from helpers import fd_grad, fd_jacobian, max_rel, rel_ok
from tensionlab.exprlang import parse
from tensionlab.geometry import (
    Distribution,
    GeometryCache,
    GeometryError,
    MetricField,
    VectorFieldSpec,
    adapted_frame,
    christoffel,
    covariant_derivative,
    curvature_apply,
    grad_scalar,
    hess_operator,
    laplacian,
    laplacian_along,
    metric_at,
    project,
)
from tensionlab.conformal import conformal_metric
from tensionlab.scenes import Lcg, builtin, sample_points

COORDS = ("x", "y")


def _metric(entries, coords=COORDS):
    return MetricField(tuple(tuple(parse(e, coords) for e in row) for row in entries))


def _field(comps, coords=COORDS):
    return VectorFieldSpec(tuple(parse(c, coords) for c in comps))


EUCLID = _metric([["1", "0"], ["0", "1"]])
SPHERE = builtin("sphere-chart")
HYPER = builtin("hyperbolic-horocycle")


# -- metric evaluation ---------------------------------------------------------


def test_metric_at_euclidean():
    jets = metric_at(EUCLID, np.array([0.7, -1.3]))
    for i in range(2):
        for j in range(2):
            assert jets[i][j].value == (1.0 if i == j else 0.0)
            assert np.array_equal(jets[i][j].grad, np.zeros(2))
            assert np.array_equal(jets[i][j].hess, np.zeros((2, 2)))


def test_metric_at_sphere_chart_unit_circle():
    jets = metric_at(SPHERE.metric, np.array([1.0, 0.0]))
    assert jets[0][0].value == pytest.approx(1.0)
    assert jets[1][1].value == pytest.approx(1.0)
    assert jets[0][1].value == 0.0


def test_metric_positive_definite_failure():
    degenerate = _metric([["x", "0"], ["0", "1"]])
    with pytest.raises(GeometryError, match="positive definite"):
        metric_at(degenerate, np.array([0.0, 0.5]))


def test_metric_symmetry_failure():
    asym = _metric([["1", "x"], ["0", "1"]])
    with pytest.raises(GeometryError, match="symmetric"):
        metric_at(asym, np.array([0.5, 0.5]))


# -- Christoffel symbols ---------------------------------------------------------


def _conformally_flat_gamma(phi_grad, n):
    """Closed form for g = e^{2 phi} delta: Gamma^k_ij
    = delta_ik phi_j + delta_jk phi_i - delta_ij phi_k."""
    gamma = np.zeros((n, n, n))
    for k in range(n):
        for i in range(n):
            for j in range(n):
                gamma[k, i, j] = (
                    (phi_grad[j] if i == k else 0.0)
                    + (phi_grad[i] if j == k else 0.0)
                    - (phi_grad[k] if i == j else 0.0)
                )
    return gamma


def test_christoffel_euclidean_zero():
    ch = christoffel(EUCLID, np.array([0.3, 0.8]))
    assert np.array_equal(ch.values, np.zeros((2, 2, 2)))
    assert np.array_equal(ch.derivs, np.zeros((2, 2, 2, 2)))


def test_christoffel_sphere_chart_closed_form():
    # phi = log(2/(1+r^2)), phi_x = -2x/(1+r^2)
    for pt in [(1.0, 0.0), (0.6, -1.1), (1.7, 0.4)]:
        x = np.array(pt)
        r2 = x @ x
        phi_grad = -2.0 * x / (1.0 + r2)
        ch = christoffel(SPHERE.metric, x)
        assert np.allclose(ch.values, _conformally_flat_gamma(phi_grad, 2), atol=1e-12)
    ch = christoffel(SPHERE.metric, np.array([1.0, 0.0]))
    assert ch.values[0, 0, 0] == pytest.approx(-1.0)


def test_christoffel_hyperbolic_closed_form():
    # phi = -log(y), phi_y = -1/y
    x = np.array([0.0, 1.0])
    ch = christoffel(HYPER.metric, x)
    assert np.allclose(ch.values, _conformally_flat_gamma(np.array([0.0, -1.0]), 2), atol=1e-12)
    assert ch.values[1, 0, 0] == pytest.approx(1.0)  # Gamma^y_xx = 1/y


def test_christoffel_against_finite_differences_of_metric():
    x = np.array([0.8, -0.6])

    def entries(z):
        jets = metric_at(SPHERE.metric, z)
        return np.array([[jets[i][j].value for j in range(2)] for i in range(2)])

    dg = fd_jacobian(entries, x, 1e-6)  # dg[i, j, k] = d_k g_ij
    ginv = np.linalg.inv(entries(x))
    s = np.einsum("jli->lij", dg) + np.einsum("ilj->lij", dg) - np.einsum("ijl->lij", dg)
    gamma_fd = 0.5 * np.einsum("kl,lij->kij", ginv, s)
    ch = christoffel(SPHERE.metric, x)
    assert rel_ok(ch.values, gamma_fd, 1e-6)


def test_christoffel_derivatives_against_finite_differences():
    x = np.array([0.8, -0.6])
    dgamma_fd = fd_jacobian(lambda z: christoffel(SPHERE.metric, z).values, x, 1e-5)
    ch = christoffel(SPHERE.metric, x)
    assert rel_ok(ch.derivs, dgamma_fd, 1e-6)


# -- covariant derivative ---------------------------------------------------------


def test_covariant_derivative_circle_field():
    d = SPHERE.distribution
    circle = d.spanning[0]
    ray = d.complement[0]
    x = np.array([2.0, 0.0])
    assert np.allclose(covariant_derivative(SPHERE.metric, circle, x, circle), [1.875, 0.0])
    assert np.allclose(covariant_derivative(SPHERE.metric, ray, x, ray), [0.0, 0.0], atol=1e-14)


def test_covariant_derivative_constant_field_flat():
    v = _field(["3", "-2"])
    out = covariant_derivative(EUCLID, v, np.array([0.4, 0.9]), np.array([1.0, 1.0]))
    assert np.array_equal(out, np.zeros(2))


# -- curvature ----------------------------------------------------------------------


def test_curvature_euclidean_zero():
    out = curvature_apply(EUCLID, np.array([0.5, 0.5]), [1.0, 0.0], [0.0, 1.0], [1.0, 2.0])
    assert np.array_equal(out, np.zeros(2))


def test_sectional_curvature_sphere_chart():
    x = np.array([1.0, 0.0])
    frame = adapted_frame(SPHERE.metric, SPHERE.distribution, x)
    e1, e2 = frame.values()
    geom = GeometryCache(SPHERE.metric, x)
    r = curvature_apply(SPHERE.metric, x, e1, e2, e2)
    assert geom.inner(r, e1) == pytest.approx(1.0, rel=1e-10)


def test_sectional_curvature_hyperbolic():
    x = np.array([0.0, 1.0])
    frame = adapted_frame(HYPER.metric, HYPER.distribution, x)
    e1, e2 = frame.values()
    geom = GeometryCache(HYPER.metric, x)
    r = curvature_apply(HYPER.metric, x, e1, e2, e2)
    assert geom.inner(r, e1) == pytest.approx(-1.0, rel=1e-10)


def test_curvature_against_finite_differences_of_christoffel():
    x = np.array([0.7, 1.2])
    dgamma = fd_jacobian(lambda z: christoffel(SPHERE.metric, z).values, x, 1e-5)
    gamma = christoffel(SPHERE.metric, x).values
    riem_fd = (
        np.einsum("ljki->lkij", dgamma)
        - np.einsum("likj->lkij", dgamma)
        + np.einsum("lim,mjk->lkij", gamma, gamma)
        - np.einsum("ljm,mik->lkij", gamma, gamma)
    )
    geom = GeometryCache(SPHERE.metric, x)
    assert rel_ok(geom.riem, riem_fd, 1e-5)


def test_constant_curvature_form():
    rng = Lcg(5)
    for scene, kappa in ((SPHERE, 1.0), (HYPER, -1.0)):
        for x in sample_points(scene, 25, 3):
            geom = GeometryCache(scene.metric, x)
            xv = np.array([rng.uniform_in(-1, 1), rng.uniform_in(-1, 1)])
            yv = np.array([rng.uniform_in(-1, 1), rng.uniform_in(-1, 1)])
            zv = np.array([rng.uniform_in(-1, 1), rng.uniform_in(-1, 1)])
            model = kappa * (geom.inner(yv, zv) * xv - geom.inner(xv, zv) * yv)
            assert rel_ok(geom.curvature(xv, yv, zv), model, 1e-7)


def test_curvature_symmetries_random():
    rng = Lcg(17)
    for scene in (SPHERE, HYPER):
        for x in sample_points(scene, 10, 9):
            geom = GeometryCache(scene.metric, x)
            vecs = [np.array([rng.uniform_in(-1, 1), rng.uniform_in(-1, 1)]) for _ in range(4)]
            xv, yv, zv, wv = vecs
            rxyz = geom.curvature(xv, yv, zv)
            assert rel_ok(rxyz, -geom.curvature(yv, xv, zv), 1e-8)
            assert rel_ok(geom.inner(rxyz, wv), -geom.inner(geom.curvature(xv, yv, wv), zv), 1e-8)
            bianchi = rxyz + geom.curvature(yv, zv, xv) + geom.curvature(zv, xv, yv)
            assert rel_ok(bianchi, np.zeros(2), 1e-8)


# -- scalar calculus -------------------------------------------------------------------


def test_grad_hess_laplacian_flat():
    mu = parse("x^2", COORDS)
    x = np.array([3.0, 0.0])
    assert np.allclose(grad_scalar(EUCLID, mu, x), [6.0, 0.0])
    assert np.allclose(hess_operator(EUCLID, mu, x, [1.0, 0.0]), [2.0, 0.0])
    assert laplacian(EUCLID, mu, x) == pytest.approx(2.0)


def test_partial_laplacians_flat():
    mu = parse("x^2+3*y^2", COORDS)
    dist = Distribution(spanning=(_field(["1", "0"]),), complement=(_field(["0", "1"]),))
    x = np.array([0.4, -0.7])
    frame = adapted_frame(EUCLID, dist, x)
    assert laplacian_along(EUCLID, mu, x, frame, "sigma") == pytest.approx(2.0)
    assert laplacian_along(EUCLID, mu, x, frame, "perp") == pytest.approx(6.0)


def test_grad_on_sphere_chart():
    mu = parse("x", COORDS)
    assert np.allclose(grad_scalar(SPHERE.metric, mu, np.array([1.0, 0.0])), [1.0, 0.0])
    # cross-check g^{-1} d(mu) with finite differences of mu at a generic point
    x = np.array([0.9, 1.4])
    geom = GeometryCache(SPHERE.metric, x)
    gradient = grad_scalar(SPHERE.metric, mu, x)
    assert rel_ok(gradient, geom.ginv0 @ fd_grad(parse("x", COORDS).value, x), 1e-8)


def test_laplacian_splits_over_frame():
    mu = parse("x*y/3 + x^2/5", COORDS)
    for x in sample_points(SPHERE, 20, 2):
        frame = adapted_frame(SPHERE.metric, SPHERE.distribution, x)
        total = laplacian(SPHERE.metric, mu, x)
        split = laplacian_along(SPHERE.metric, mu, x, frame, "sigma") + laplacian_along(
            SPHERE.metric, mu, x, frame, "perp"
        )
        assert abs(total - split) <= 1e-10 * (1.0 + abs(total))


def test_hessian_form_symmetric():
    mu = parse("exp(x/3)*y", COORDS)
    x = np.array([0.5, 1.1])
    geom = GeometryCache(SPHERE.metric, x)
    u = np.array([0.3, -1.2])
    v = np.array([1.4, 0.2])
    huv = geom.inner(hess_operator(SPHERE.metric, mu, x, u), v)
    hvu = geom.inner(hess_operator(SPHERE.metric, mu, x, v), u)
    assert huv == pytest.approx(hvu, rel=1e-10)


# -- frames and projections --------------------------------------------------------------


def test_adapted_frame_diagonal_line_flat():
    dist = Distribution(spanning=(_field(["1", "1"]),))
    frame = adapted_frame(EUCLID, dist, np.array([0.2, 0.4]))
    vals = frame.values()
    inv_sqrt2 = 1.0 / np.sqrt(2.0)
    assert np.allclose(vals[0], [inv_sqrt2, inv_sqrt2])
    assert np.allclose(vals[1], [inv_sqrt2, -inv_sqrt2])


def test_adapted_frame_sphere_matches_given_fields():
    x = np.array([1.0, 0.0])
    frame = adapted_frame(SPHERE.metric, SPHERE.distribution, x)
    vals = frame.values()
    assert np.allclose(vals[0], [0.0, 1.0], atol=1e-12)
    assert np.allclose(vals[1], [1.0, 0.0], atol=1e-12)


def test_adapted_frame_rank_deficiency():
    dist = Distribution(spanning=(_field(["1", "0"]), _field(["2", "0"])))
    metric3 = _metric(
        [["1", "0", "0"], ["0", "1", "0"], ["0", "0", "1"]], ("x", "y", "z")
    )
    dist3 = Distribution(
        spanning=(
            VectorFieldSpec(tuple(parse(c, ("x", "y", "z")) for c in ["1", "0", "0"])),
            VectorFieldSpec(tuple(parse(c, ("x", "y", "z")) for c in ["2", "0", "0"])),
        )
    )
    with pytest.raises(GeometryError, match="rank"):
        adapted_frame(metric3, dist3, np.array([0.0, 0.0, 0.0]))
    with pytest.raises(GeometryError, match="rank|dimension"):
        adapted_frame(EUCLID, dist, np.array([0.0, 0.0]))


def test_project_basics():
    dist = Distribution(spanning=(_field(["1", "1"]),))
    x = np.array([0.0, 0.0])
    frame = adapted_frame(EUCLID, dist, x)
    e1 = frame.values()[0]
    assert np.allclose(project(frame, e1, "tangent"), e1)
    assert np.allclose(project(frame, e1, "normal"), np.zeros(2), atol=1e-15)
    assert np.allclose(project(frame, [1.0, 0.0], "tangent"), [0.5, 0.5])


def test_projection_partition_of_identity():
    rng = Lcg(40)
    x = np.array([1.2, 0.8])
    frame = adapted_frame(SPHERE.metric, SPHERE.distribution, x)
    for _ in range(50):
        v = np.array([rng.uniform_in(-2, 2), rng.uniform_in(-2, 2)])
        top = project(frame, v, "tangent")
        perp = project(frame, v, "normal")
        assert np.max(np.abs(top + perp - v)) <= 1e-12


def test_frame_orthonormal_at_samples():
    for scene in (SPHERE, HYPER, builtin("flat-product-22")):
        for x in sample_points(scene, 25, 8):
            frame = adapted_frame(scene.metric, scene.distribution, x)
            geom = GeometryCache(scene.metric, x)
            vals = frame.values()
            gram = vals @ geom.g0 @ vals.T
            assert np.max(np.abs(gram - np.eye(scene.n))) <= 1e-10


def test_metricity_and_torsion_random_fields():
    rng = Lcg(77)
    coords = COORDS

    def rand_field():
        comps = []
        for _ in range(2):
            c = [round(rng.uniform_in(-0.8, 0.8), 6) for _ in range(4)]
            comps.append(f"{c[0]!r}+{c[1]!r}*x+{c[2]!r}*y+{c[3]!r}*x*y")
        return _field(comps, coords)

    for scene in (SPHERE, HYPER):
        xf, yf, zf = rand_field(), rand_field(), rand_field()
        for x in sample_points(scene, 15, 21):
            geom = GeometryCache(scene.metric, x)
            xv = xf.vecjet(x)
            yv = yf.vecjet(x)
            zv = zf.vecjet(x)
            s, s_grad = geom.inner_field(yv, zv)
            lhs = float(s_grad @ xv.val)
            rhs = geom.inner(geom.cov_dir(yv, xv.val), zv.val) + geom.inner(
                yv.val, geom.cov_dir(zv, xv.val)
            )
            assert rel_ok(lhs, rhs, 1e-8)
            torsion = geom.cov_dir(yv, xv.val) - geom.cov_dir(xv, yv.val)
            lie = yv.jac @ xv.val - xv.jac @ yv.val
            assert rel_ok(torsion, lie, 1e-8)


def test_conformal_gram_schmidt_compatibility():
    mu = parse("x*y/10", COORDS)
    tilde = conformal_metric(SPHERE.metric, mu)
    for x in sample_points(SPHERE, 10, 4):
        base = adapted_frame(SPHERE.metric, SPHERE.distribution, x)
        scaled = adapted_frame(tilde, SPHERE.distribution, x)
        factor = np.exp(-mu.evaluate(x).value)
        assert max_rel(scaled.values(), factor * base.values()) <= 1e-10
        # first derivatives also agree with d(e^{-mu} e)
        mu_jet = mu.evaluate(x)
        for alpha in range(2):
            e = base.fields()[alpha]
            f = scaled.fields()[alpha]
            expected_jac = factor * (e.jac - np.outer(e.val, mu_jet.grad))
            assert max_rel(f.jac, expected_jac) <= 1e-9
