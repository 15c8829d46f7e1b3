import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from fracrd.operators import (
    DIRICHLET,
    NEUMANN,
    Domain1D,
    Field,
    SpectralOperator,
    analyze,
    apply_riesz_flaplacian,
    apply_spectral_flaplacian,
    eigenpairs,
    random_nonnegative_field,
    riesz_weights,
    sobolev_seminorm,
    synthesize,
)

BOTH = [DIRICHLET, NEUMANN]


@pytest.mark.parametrize("kwargs", [dict(length=0.0), dict(n_modes=3), dict(boundary=2),
                                    dict(exterior="halo"), dict(boundary=NEUMANN, exterior="complement")])
def test_domain_validation(kwargs):
    with pytest.raises(ValueError):
        Domain1D(**kwargs)


def test_dirichlet_eigenvalues_on_pi():
    mu, _ = eigenpairs(Domain1D(math.pi, 16, DIRICHLET))
    np.testing.assert_allclose(mu, np.arange(1, 17) ** 2, rtol=1e-14)


def test_neumann_zero_mode_constant():
    dom = Domain1D(2.0, 16, NEUMANN)
    mu, basis = eigenpairs(dom)
    assert mu[0] == 0.0
    np.testing.assert_allclose(basis[:, 0], 1.0 / math.sqrt(2.0))


def test_unit_interval_second_eigenvalue():
    mu, _ = eigenpairs(Domain1D(1.0, 8, DIRICHLET))
    assert mu[1] == pytest.approx(4.0 * math.pi**2)


@pytest.mark.parametrize("boundary", BOTH)
def test_sampled_basis_orthonormal(boundary):
    dom = Domain1D(1.7, 64, boundary)
    _, basis = eigenpairs(dom)
    gram = dom.h * basis.T @ basis
    np.testing.assert_allclose(gram, np.eye(64), atol=1e-10)


@pytest.mark.parametrize("boundary", BOTH)
def test_transform_matches_explicit_projection(boundary):
    dom = Domain1D(1.3, 32, boundary)
    _, basis = eigenpairs(dom)
    u = Field.from_function(dom, lambda x: np.exp(-x) * (1 + x))
    np.testing.assert_allclose(analyze(u), dom.h * basis.T @ u.nodal, atol=1e-13)


def test_single_sine_coefficients():
    L = 2.5
    dom = Domain1D(L, 64, DIRICHLET)
    w = analyze(Field.from_function(dom, lambda x: np.sin(np.pi * x / L)))
    assert w[0] == pytest.approx(math.sqrt(L / 2.0), rel=1e-13)
    assert np.max(np.abs(w[1:])) < 1e-13


def test_constant_neumann_coefficients():
    L, c = 3.0, 0.7
    dom = Domain1D(L, 32, NEUMANN)
    w = analyze(Field.from_function(dom, lambda x: np.full_like(x, c)))
    assert w[0] == pytest.approx(c * math.sqrt(L))
    assert np.max(np.abs(w[1:])) < 1e-14


@pytest.mark.parametrize("boundary", BOTH)
def test_round_trip_random_fields(boundary, rng):
    dom = Domain1D(1.0, 256, boundary)
    for _ in range(100):
        u = rng.standard_normal(dom.n_modes)
        back = synthesize(analyze(Field(dom, nodal=u)), dom).nodal
        assert np.max(np.abs(back - u)) <= 1e-12 * np.max(np.abs(u))


def test_field_representation_switching():
    dom = Domain1D(1.0, 8, NEUMANN)
    f = Field(dom, coeffs=np.eye(8)[0])
    np.testing.assert_allclose(f.nodal, 1.0)
    f.nodal = np.full(8, 2.0)
    assert f.coeffs[0] == pytest.approx(2.0)
    with pytest.raises(ValueError):
        Field(dom, nodal=np.full(8, np.nan))
    with pytest.raises(ValueError):
        Field(dom, nodal=np.ones(7))
    with pytest.raises(ValueError):
        Field(dom)


def test_field_batches():
    dom = Domain1D(1.0, 16, DIRICHLET)
    batch = np.random.default_rng(0).standard_normal((5, 16))
    f = Field(dom, nodal=batch)
    assert f.coeffs.shape == (5, 16)
    assert f.l2_norm().shape == (5,)
    np.testing.assert_allclose(Field(dom, coeffs=f.coeffs).nodal, batch, atol=1e-13)


def test_l2_norm_parseval():
    dom = Domain1D(2.0, 64, NEUMANN)
    f = Field.from_function(dom, lambda x: 1 + np.cos(np.pi * x))
    assert f.l2_norm() ** 2 == pytest.approx(dom.integrate(f.nodal**2), rel=1e-13)


def test_operator_examples():
    dom = Domain1D(math.pi, 64, DIRICHLET)
    op = SpectralOperator(dom, 1.0, 0.5)
    s1 = Field.from_function(dom, np.sin)
    np.testing.assert_allclose(apply_spectral_flaplacian(s1, op).nodal, s1.nodal, atol=1e-13)
    s2 = Field.from_function(dom, lambda x: np.sin(2 * x))
    np.testing.assert_allclose(apply_spectral_flaplacian(s2, op).nodal, 2 * s2.nodal, atol=1e-13)
    ndom = Domain1D(1.0, 32, NEUMANN)
    c = Field.from_function(ndom, lambda x: np.full_like(x, 3.0))
    out = apply_spectral_flaplacian(c, SpectralOperator(ndom, 1.0, 0.4))
    assert np.max(np.abs(out.nodal)) < 1e-13


def test_operator_domain_mismatch():
    a, b = Domain1D(1.0, 16), Domain1D(2.0, 16)
    with pytest.raises(ValueError):
        apply_spectral_flaplacian(Field(a, nodal=np.ones(16)), SpectralOperator(b, 1.0, 0.5))
    with pytest.raises(ValueError):
        SpectralOperator(a, 0.0, 0.5)
    with pytest.raises(ValueError):
        SpectralOperator(a, 1.0, 1.5)


@pytest.mark.parametrize("boundary", BOTH)
def test_multipliers_monotone(boundary):
    op = SpectralOperator(Domain1D(1.0, 64, boundary), 1.0, 0.3)
    m = op.multipliers
    assert np.all(np.diff(m) >= 0)
    if boundary == DIRICHLET:
        assert np.all(m > 0)
    else:
        assert m[0] == 0.0


@given(st.floats(0.05, 0.95), st.integers(0, 2**32 - 1))
def test_half_order_twice_equals_full(sigma, seed):
    dom = Domain1D(1.0, 64, NEUMANN)
    u = Field(dom, nodal=np.random.default_rng(seed).standard_normal(64))
    half = SpectralOperator(dom, 1.0, sigma / 2)
    twice = apply_spectral_flaplacian(apply_spectral_flaplacian(u, half), half)
    once = apply_spectral_flaplacian(u, SpectralOperator(dom, 1.0, sigma))
    np.testing.assert_allclose(twice.coeffs, once.coeffs, rtol=1e-12, atol=1e-12)


@given(st.floats(0.05, 0.95), st.integers(0, 2**32 - 1))
def test_quadratic_form_positive_dirichlet(sigma, seed):
    dom = Domain1D(1.0, 64, DIRICHLET)
    u = Field(dom, nodal=np.random.default_rng(seed).standard_normal(64))
    au = apply_spectral_flaplacian(u, SpectralOperator(dom, 1.0, sigma))
    assert dom.integrate(u.nodal * au.nodal) > 0


@given(st.floats(0.05, 0.95), st.integers(0, 2**32 - 1))
def test_quadratic_form_neumann(sigma, seed):
    dom = Domain1D(1.0, 64, NEUMANN)
    u = Field(dom, nodal=np.random.default_rng(seed).standard_normal(64))
    op = SpectralOperator(dom, 1.0, sigma)
    assert dom.integrate(u.nodal * apply_spectral_flaplacian(u, op).nodal) >= 0
    c = Field(dom, nodal=np.full(64, 2.5))
    assert abs(dom.integrate(c.nodal * apply_spectral_flaplacian(c, op).nodal)) < 1e-10


def test_seminorm_examples():
    dom = Domain1D(math.pi, 64, DIRICHLET)
    assert sobolev_seminorm(Field.from_function(dom, np.sin), 0.5) == pytest.approx(math.pi / 2)
    assert sobolev_seminorm(Field.from_function(dom, lambda x: np.sin(2 * x)), 0.5) == pytest.approx(math.pi)
    assert sobolev_seminorm(Field(dom, nodal=np.zeros(64)), 0.3) == 0.0


def test_seminorm_equals_half_power_norm(rng):
    dom = Domain1D(1.0, 64, NEUMANN)
    u = Field(dom, nodal=rng.standard_normal(64))
    half = apply_spectral_flaplacian(u, SpectralOperator(dom, 1.0, 0.35))
    assert sobolev_seminorm(u, 0.7) == pytest.approx(half.l2_norm() ** 2, rel=1e-12)


def test_riesz_weights_limits():
    g = riesz_weights(1.0, 4)
    np.testing.assert_allclose(g, [2.0, -1.0, 0.0, 0.0], atol=1e-15)
    g = riesz_weights(0.5, 2000)
    assert g[0] > 0 and np.all(g[1:] < 0)
    # weights of the full-line operator sum to zero: constants are annihilated
    assert abs(g[0] + 2 * g[1:].sum()) < 2e-3


def test_riesz_zero_and_errors():
    dom = Domain1D(1.0, 32, DIRICHLET, "complement")
    zero = apply_riesz_flaplacian(Field(dom, nodal=np.zeros(32)), 0.5)
    assert np.all(zero.nodal == 0)
    with pytest.raises(ValueError):
        apply_riesz_flaplacian(Field(dom, nodal=np.ones(32)), 1.0)
    with pytest.raises(ValueError):
        apply_riesz_flaplacian(Field(Domain1D(1.0, 32, NEUMANN), nodal=np.ones(32)), 0.5)


def test_riesz_near_one_approaches_laplacian():
    dom = Domain1D(math.pi, 127, DIRICHLET, "complement")
    u = Field.from_function(dom, np.sin)
    # -u'' = sin x; the gap to the local operator shrinks like 1 - sigma
    gaps = [np.max(np.abs(apply_riesz_flaplacian(u, s).nodal - u.nodal)) for s in (0.99, 0.999, 0.9999)]
    assert gaps[0] > 5 * gaps[1] > 25 * gaps[2]
    assert gaps[2] < 5e-3


def _bump(x):
    return np.exp(-40.0 * (x - 0.5) ** 2) * (x * (1 - x)) ** 2


def test_riesz_self_convergence_order():
    ns = [63, 127, 255]
    ref_dom = Domain1D(1.0, 4 * 256 - 1, DIRICHLET, "complement")
    ref = apply_riesz_flaplacian(Field.from_function(ref_dom, _bump), 0.5)
    errs = []
    for n in ns:
        dom = Domain1D(1.0, n, DIRICHLET, "complement")
        out = apply_riesz_flaplacian(Field.from_function(dom, _bump), 0.5)
        stride = (ref_dom.n_modes + 1) // (n + 1)
        errs.append(np.max(np.abs(out.nodal - ref.nodal[stride - 1::stride])))
    orders = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert np.all(orders > 1.7), orders


def test_random_field_properties(rng):
    for boundary in BOTH:
        dom = Domain1D(1.0, 64, boundary)
        f = random_nonnegative_field(dom, rng, degree=5, sup=2.0)
        assert f.nodal.min() >= 0
        assert f.nodal.max() == pytest.approx(2.0)
        assert np.max(np.abs(f.coeffs[12:])) < 1e-12
    with pytest.raises(ValueError):
        random_nonnegative_field(Domain1D(1.0, 8), rng, degree=4)
