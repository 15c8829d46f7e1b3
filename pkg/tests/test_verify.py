import json
import math

import numpy as np
import pytest

from fracrd.operators import DIRICHLET, NEUMANN, Domain1D, Field, random_nonnegative_field
from fracrd.reactions import DiffusionParams, KineticParams, RegimeError, classify_regime, lyapunov_weights
from fracrd.specfun import mittag_leffler
from fracrd.stepper import SolverConfig, simulate
from fracrd.verify import (
    caputo_l1,
    check_caputo_convexity,
    check_frac_identity,
    check_gronwall,
    check_gronwall_envelope,
    check_linf_bounds,
    check_lyapunov_monotone,
    check_max_principle,
    check_p_rho_bound,
    check_pointwise_suite,
    check_stroock_varopoulos,
    frac_integral,
    lyapunov_value,
    p_rho_multiplier_subordinated,
    run_suite,
    volterra_equality_solution,
)

NEU = Domain1D(1.0, 64, NEUMANN)
REG_I = KineticParams(1.0, 2.0, 3.0, 1.0)
REG_III = KineticParams(1.0, 1.0, 0.5, 2.0)


def half_cos(dom, amp=1.0, plus=False):
    s = 1.0 if plus else -1.0
    return Field.from_function(dom, lambda x: amp * 0.5 * (1 + s * np.cos(2 * np.pi * x / dom.length)))


@pytest.fixture(scope="module")
def regime_i_traj():
    cfg = SolverConfig(dt=2**-7, t_end=1.0)
    return simulate(half_cos(NEU), half_cos(NEU), NEU, DiffusionParams(rho=0.5), REG_I, cfg)


def _regime_iii(v_amp, t_end=1.0):
    cfg = SolverConfig(dt=2**-7, t_end=t_end)
    return simulate(half_cos(NEU), half_cos(NEU, v_amp), NEU, DiffusionParams(rho=0.5), REG_III, cfg)


def test_lyapunov_value_matches_trajectory(regime_i_traj):
    w = regime_i_traj.weights
    assert lyapunov_value(half_cos(NEU), half_cos(NEU), w) == pytest.approx(regime_i_traj.lyapunov[0], rel=1e-12)


def test_regime_i_checks_hold(regime_i_traj):
    w = lyapunov_weights(regime_i_traj.regime, 2.0)
    assert check_lyapunov_monotone(regime_i_traj, w).holds
    res = check_linf_bounds(regime_i_traj, (2.0, 9.0))
    assert res.holds and res.context["margin_u"] > 0.4


def test_lyapunov_check_rejects_increase(regime_i_traj):
    w = regime_i_traj.weights
    bad = regime_i_traj.lyapunov.copy()
    bad[5] = 1.01 * bad[0]
    from dataclasses import replace
    res = check_lyapunov_monotone(replace(regime_i_traj, lyapunov=bad), w)
    assert not res.holds
    assert res.context["decrease_margin"] == pytest.approx(-0.01)


def test_lyapunov_check_wrong_regime():
    traj = _regime_iii(1.0, t_end=0.1)
    with pytest.raises(RegimeError):
        check_lyapunov_monotone(traj, lyapunov_weights(classify_regime(REG_I, DiffusionParams()), 2.0))


def test_linf_bounds_violation(regime_i_traj):
    assert not check_linf_bounds(regime_i_traj, (0.5, 9.0)).holds


def test_max_principle_pure_diffusion(rng):
    kp = KineticParams(1.0, 1.0, 1.0, 1.0)
    for boundary in (DIRICHLET, NEUMANN):
        dom = Domain1D(1.0, 64, boundary)
        a = random_nonnegative_field(dom, rng, sup=1.0)
        b = random_nonnegative_field(dom, rng, sup=2.0)
        traj = simulate(a, b, dom, DiffusionParams(rho=0.6), kp, SolverConfig(dt=2**-6, t_end=1.0))
        assert check_max_principle(traj).holds


def test_envelope_stated_holds_for_moderate_data():
    res = check_gronwall_envelope(_regime_iii(0.5), REG_III, 0.5)
    assert res.holds
    assert res.context["fixed_margin"] >= -1e-8


def test_envelope_stated_fails_for_small_data_affine_holds():
    # small v0: the source bound C (1 + v) does not give the stated v0 E(C t^rho)
    traj = _regime_iii(0.1, t_end=5.0)
    stated = check_gronwall_envelope(traj, REG_III, 0.5)
    affine = check_gronwall_envelope(traj, REG_III, 0.5, form="affine")
    assert not stated.holds
    assert affine.holds


def test_envelope_growth_override_and_errors(regime_i_traj):
    traj = _regime_iii(0.5, t_end=0.5)
    assert not check_gronwall_envelope(traj, REG_III, 0.5, growth=0.0, slack=0.0).holds
    with pytest.raises(ValueError):
        check_gronwall_envelope(traj, REG_III, 0.5, form="other")
    with pytest.raises(RegimeError):
        check_gronwall_envelope(regime_i_traj, REG_I, 0.5)


@pytest.mark.parametrize("p", [2.0, 3.0, 5.0])
@pytest.mark.parametrize("sigma", [0.25, 0.75])
def test_stroock_varopoulos(p, sigma, rng):
    for _ in range(20):
        u = random_nonnegative_field(NEU, rng, degree=4, offset=0.1)
        res = check_stroock_varopoulos(u, p, sigma)
        assert res.holds
        if p == 2.0:
            assert res.context["equality_gap"] < 1e-12


def test_stroock_varopoulos_wrong_constant(rng):
    u = random_nonnegative_field(NEU, rng, degree=4)
    assert not check_stroock_varopoulos(u, 3.0, 0.5, constant=1e3).holds


def test_pointwise_suite(rng):
    res = check_pointwise_suite(rng, 20000)
    assert res.holds and res.context["failures"] == 0
    bad = check_pointwise_suite(rng, 20000, flip=True)
    assert not bad.holds and bad.context["failures"] > 0


def test_caputo_l1_on_power():
    rho, n = 0.3, 4096
    t = np.linspace(0, 1, n + 1)
    d = caputo_l1(t**2, rho, 1.0 / n)
    exact = 2 * t ** (2 - rho) / math.gamma(3 - rho)
    assert np.max(np.abs(d - exact)) < 1e-3


def test_frac_integral_of_one():
    rho, n = 0.6, 100
    t = np.linspace(0, 2, n + 1)
    np.testing.assert_allclose(frac_integral(np.ones(n + 1), rho, 2 / n), t**rho / math.gamma(1 + rho), rtol=1e-12)


def test_volterra_below_envelope():
    t, psi = volterra_equality_solution(0.5, 1.0, 1.0, 1.0, 512)
    env = mittag_leffler(0.5, 1.0, t**0.5)
    assert np.all(psi <= env * (1 + 1e-12))
    assert psi[-1] == pytest.approx(env[-1], rel=2e-2)


def test_gronwall_check():
    res = check_gronwall(0.5, 1.0, 1.0, 1.0, n_steps=512)
    assert res.holds and res.context["refining"]
    t, sol = volterra_equality_solution(0.5, 1.0, 1.0, 1.0, 512)
    assert not check_gronwall(0.5, 1.0, 1.0, 1.0, n_steps=512, psi=1.05 * sol).holds


def test_caputo_convexity(rng):
    x = lambda t: np.sin(3 * t) + t
    assert check_caputo_convexity(x, lambda z: z * z, lambda z: 2 * z, 0.5).holds
    assert check_caputo_convexity(x, np.exp, np.exp, 0.8).holds
    assert not check_caputo_convexity(lambda t: t, lambda z: -z * z, lambda z: -2 * z, 0.5).holds


@pytest.mark.parametrize("rho", [0.3, 0.5, 0.9, 1.0])
def test_frac_identity(rho):
    for f in (lambda t: t, lambda t: t * t):
        res = check_frac_identity(f, rho)
        assert res.holds, res.context


def test_frac_identity_wrong_order():
    assert not check_frac_identity(lambda t: t, 0.5, integral_order=0.7).holds


def test_p_rho_subordination_matches_kernel():
    rho, lam, t = 0.6, 3.0, 0.7
    direct = mittag_leffler(rho, rho, -lam * t**rho)
    assert p_rho_multiplier_subordinated(rho, lam, t) == pytest.approx(direct, rel=1e-10)


def test_p_rho_bound(rng):
    fields = [random_nonnegative_field(NEU, rng) for _ in range(2)] + [Field(NEU, nodal=np.ones(64))]
    res = check_p_rho_bound(0.5, 0.5, fields)
    assert res.holds
    assert res.context["skipped"] == 1
    assert res.context["empirical_C"] <= res.context["reference"] * (1 + 1e-9)
    bad = check_p_rho_bound(0.5, 0.5, fields, multiplier=lambda lam, t: np.exp(lam * t**0.5))
    assert not bad.holds


def test_run_suite_default_all_hold():
    report = run_suite(seed=3, samples=4)
    assert report.all_hold, [r.name for r in report.results if not r.holds]
    assert report.summary["failed"] == 0
    json.dumps(report.to_dict())


def test_run_suite_corrupt_all_fail():
    report = run_suite(seed=3, samples=4, corrupt=True)
    assert not any(r.holds for r in report.results), [r.name for r in report.results if r.holds]


def test_run_suite_deterministic():
    a = run_suite(seed=7, samples=3).to_dict()
    b = run_suite(seed=7, samples=3).to_dict()
    assert a == b
