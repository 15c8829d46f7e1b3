"""Numerical checks of the inequalities behind the global-existence theory.

Every check returns a :class:`CheckResult` with a signed margin (negative means
violated) and holds exactly when ``margin >= -tolerance``. Tolerances live in
:data:`TOLERANCES` so there is one place to audit them.
"""
from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass, field, replace
from typing import Callable

import numpy as np
from scipy import integrate

from .operators import (
    NEUMANN,
    Domain1D,
    Field,
    SpectralOperator,
    apply_spectral_flaplacian,
    random_nonnegative_field,
    sobolev_seminorm,
)
from .reactions import (
    KineticParams,
    LyapunovWeights,
    RegimeError,
    check_pointwise_inequality,
    growth_constant,
    linf_bounds,
    lyapunov_weights,
)
from .specfun import gamma_fn, ml_kernel, mittag_leffler, wright_phi
from .stepper import SolverConfig, Trajectory, caputo_l1_coeffs, simulate

__all__ = [
    "TOLERANCES",
    "CheckResult",
    "VerificationReport",
    "lyapunov_value",
    "check_lyapunov_monotone",
    "check_linf_bounds",
    "check_max_principle",
    "check_stroock_varopoulos",
    "check_pointwise_suite",
    "check_gronwall",
    "check_gronwall_envelope",
    "check_caputo_convexity",
    "check_frac_identity",
    "check_p_rho_bound",
    "volterra_equality_solution",
    "caputo_l1",
    "frac_integral",
    "p_rho_multiplier_subordinated",
    "run_suite",
]

log = logging.getLogger(__name__)

TOLERANCES = {
    "lyapunov_monotone": 1e-6,
    "linf_bounds": 0.02,
    "max_principle": 1e-10,
    "nonnegativity": 1e-10,
    "stroock_varopoulos": 1e-10,
    "stroock_varopoulos_equality": 1e-12,
    "pointwise_inequality": 1e-15,
    "gronwall": 0.01,
    "gronwall_envelope": 0.05,
    "conserved_species": 1e-8,
    "caputo_convexity": 1e-8,
    # I^rho D^rho f = f - f(0) with first-order quadratures: error <= factor * dt/T * scale
    "frac_identity_factor": 2.0,
    # "bounded" for the propagator ratio: finite and below this ceiling
    "p_rho_ceiling": 1e6,
}


@dataclass
class CheckResult:
    name: str
    holds: bool
    margin: float
    context: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return _jsonable(asdict(self))


@dataclass
class VerificationReport:
    results: list
    seed: int
    config_hash: str | None = None

    @property
    def summary(self) -> dict:
        passed = sum(r.holds for r in self.results)
        return {"total": len(self.results), "passed": passed, "failed": len(self.results) - passed}

    @property
    def all_hold(self) -> bool:
        return all(r.holds for r in self.results)

    def to_dict(self) -> dict:
        return {"seed": self.seed, "config_hash": self.config_hash, "summary": self.summary,
                "results": [r.to_dict() for r in self.results]}


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        val = float(obj)
        return val if math.isfinite(val) else repr(val)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj


def _result(name, margin, tol, **context) -> CheckResult:
    margin = float(margin)
    context["tolerance"] = tol
    holds = bool(np.isfinite(margin) and margin >= -tol)
    return CheckResult(name, holds, margin, context)


# -- Lyapunov functional and a priori bounds ---------------------------------

def lyapunov_value(u: Field, v: Field, w: LyapunovWeights) -> float:
    """Quadrature of delta1 u^p + delta2 v^q on the nodal grid."""
    uu = np.maximum(u.nodal, 0.0)
    vv = np.maximum(v.nodal, 0.0)
    return float(u.dom.integrate(w.delta1 * uu**w.p + w.delta2 * vv**w.q))


def check_lyapunov_monotone(traj: Trajectory, w: LyapunovWeights,
                            tol: float = TOLERANCES["lyapunov_monotone"]) -> CheckResult:
    """L(t_n) <= L(0) and L(0) <= |Omega| (delta1 Lam^p + delta2 Lam^q), each with a margin.

    The decrease is checked in integrated form against the initial value,
    not by differencing L in time.
    """
    if not traj.regime.has_lyapunov:
        raise RegimeError(f"Lyapunov functional needs regime I or II, got {traj.regime.tag}")
    L = np.asarray(traj.lyapunov)
    if not np.all(np.isfinite(L)):
        return _result("lyapunov_monotone", -math.inf, tol, reason="non-finite Lyapunov values")
    lam = traj.data_bound
    bound = traj.dom.measure * (w.delta1 * lam**w.p + w.delta2 * lam**w.q)
    worst = int(np.argmax(L))
    decrease = 1.0 - L[worst] / L[0]
    initial = 1.0 - L[0] / bound
    holds = decrease >= -tol and initial >= -tol
    res = _result("lyapunov_monotone", min(decrease, initial), tol,
                  decrease_margin=decrease, initial_bound_margin=initial,
                  L0=L[0], L_max=L[worst], t_worst=traj.t[worst], bound=bound, Lambda=lam)
    res.holds = bool(holds)
    return res


def check_linf_bounds(traj: Trajectory, bounds: tuple[float, float],
                      slack: float = TOLERANCES["linf_bounds"]) -> CheckResult:
    bu, bv = bounds
    iu = int(np.argmax(traj.linf_u))
    iv = int(np.argmax(traj.linf_v))
    mu = 1.0 - traj.linf_u[iu] / bu
    mv = 1.0 - traj.linf_v[iv] / bv
    return _result("linf_bounds", min(mu, mv), slack, Lambda_u=bu, Lambda_v=bv,
                   margin_u=mu, margin_v=mv, t_worst_u=traj.t[iu], t_worst_v=traj.t[iv])


def check_max_principle(traj: Trajectory, tol: float = TOLERANCES["max_principle"]) -> CheckResult:
    """Sup norms never exceed their initial value, never increase from one step to
    the next, and nodal values stay above -tol; all relative to the initial sup."""
    margins = {}
    for name, sup, low in (("u", traj.linf_u, traj.min_u), ("v", traj.linf_v, traj.min_v)):
        s0 = sup[0]
        margins[f"sup_{name}"] = float(np.min(1.0 - sup / s0))
        step = np.diff(sup) / s0
        margins[f"step_{name}"] = float(-np.max(step)) if step.size else 0.0
        margins[f"min_{name}"] = float(np.min(low) / s0)
    worst = min(margins, key=margins.get)
    return _result("max_principle", margins[worst], tol, worst=worst, **margins)


def check_gronwall_envelope(traj: Trajectory, kp: KineticParams, rho: float,
                            slack: float = TOLERANCES["gronwall_envelope"],
                            conserved_tol: float = TOLERANCES["conserved_species"],
                            growth: float | None = None, form: str = "stated") -> CheckResult:
    """Regime III/IV: the reaction-free species keeps its initial sup norm and the
    other one stays below a Mittag-Leffler envelope.

    ``form="stated"`` uses w0 E_{rho,1}(C t^rho). ``form="affine"`` uses
    (1 + w0) E_{rho,1}(C t^rho) - 1, which is what a source bound C (1 + w)
    actually yields; the stated form can be exceeded for small w0.
    ``growth`` overrides the constant C (otherwise :func:`growth_constant`).
    """
    if form not in ("stated", "affine"):
        raise ValueError("form must be 'stated' or 'affine'")
    regime = traj.regime
    if regime.tag == "III":
        fixed, grown = traj.linf_u, traj.linf_v
    elif regime.tag == "IV":
        fixed, grown = traj.linf_v, traj.linf_u
    else:
        raise RegimeError(f"envelope check needs regime III or IV, got {regime.tag}")
    c = growth_constant(kp, regime, float(fixed[0])) if growth is None else growth
    ml = mittag_leffler(rho, 1.0, c * traj.t**rho)
    envelope = grown[0] * ml if form == "stated" else (1.0 + grown[0]) * ml - 1.0
    m_fixed = float(np.min(1.0 - fixed / fixed[0]))
    m_env = float(np.min(1.0 - grown / (envelope * (1.0 + slack))))
    res = _result("gronwall_envelope", min(m_fixed + conserved_tol, m_env), 0.0,
                  growth_constant=c, fixed_margin=m_fixed, envelope_margin=m_env,
                  conserved_tol=conserved_tol, slack=slack, form=form)
    res.holds = bool(m_fixed >= -conserved_tol and m_env >= 0.0)
    return res


# -- spatial lemmas ------------------------------------------------------------

def check_stroock_varopoulos(u: Field, p: float, sigma: float, dom: Domain1D | None = None,
                             constant: float | None = None) -> CheckResult:
    """int u^(p-1) (-Delta)^sigma u  >=  4(p-1)/p^2 * ||(-Delta)^(sigma/2) u^(p/2)||^2.

    ``constant`` replaces 4(p-1)/p^2 (for self-tests).
    """
    dom = u.dom if dom is None else dom
    op = SpectralOperator(dom, 1.0, sigma)
    uu = np.maximum(u.nodal, 0.0)
    lhs = float(dom.integrate(uu ** (p - 1.0) * apply_spectral_flaplacian(u, op).nodal))
    c = 4.0 * (p - 1.0) / p**2 if constant is None else constant
    rhs = float(c * sobolev_seminorm(Field(dom, nodal=uu ** (p / 2.0)), sigma))
    scale = abs(lhs) + abs(rhs) + 1.0
    tol = TOLERANCES["stroock_varopoulos"]
    return _result("stroock_varopoulos", (lhs - rhs) / scale, tol, p=p, sigma=sigma,
                   lhs=lhs, rhs=rhs, equality_gap=abs(lhs - rhs) / max(abs(lhs) + abs(rhs), 1e-300))


def check_pointwise_suite(rng: np.random.Generator, n: int = 100_000, flip: bool = False) -> CheckResult:
    """(x^s - y^t)(x^(rs/t) - y^r) >= 0 on random admissible tuples.

    ``flip`` negates r, which breaks the hypothesis r > 0; used as the
    self-test fixture. (The sign argument does not actually need s > t.)
    """
    x = rng.uniform(0.0, 5.0, n)
    y = rng.uniform(0.0, 5.0, n)
    r = rng.uniform(0.05, 5.0, n)
    t = rng.uniform(0.05, 3.0, n)
    s = t + rng.uniform(0.01, 3.0, n)
    if flip:
        r = -r
    value, holds = check_pointwise_inequality(x, y, r, s, t)
    xs, yt = x**s, y**t
    xr, yr = x ** (r * s / t), y**r
    scale = np.maximum(1.0, (np.abs(xs) + np.abs(yt)) * (np.abs(xr) + np.abs(yr)))
    rel = value / scale
    i = int(np.argmin(rel))
    return _result("pointwise_inequality", rel[i], TOLERANCES["pointwise_inequality"], samples=n,
                   failures=int(np.sum(~holds)), worst=dict(x=x[i], y=y[i], r=r[i], s=s[i], t=t[i]))


# -- time-fractional calculus -----------------------------------------------

def caputo_l1(y: np.ndarray, rho: float, dt: float) -> np.ndarray:
    """L1 Caputo derivative of samples y_0..y_N on a uniform grid (0 at t_0)."""
    y = np.asarray(y, dtype=float)
    n = y.size - 1
    b = caputo_l1_coeffs(rho, dt, n)
    return np.concatenate(([0.0], np.convolve(b, np.diff(y))[:n]))


def frac_integral(g: np.ndarray, rho: float, dt: float) -> np.ndarray:
    """Riemann-Liouville integral of order rho by the product rectangle rule.

    g is frozen at the right end of each cell: I g(t_n) = sum_j w_{n-j} g_j,
    w_k = dt^rho ((k+1)^rho - k^rho) / Gamma(rho + 1).
    """
    g = np.asarray(g, dtype=float)
    n = g.size - 1
    k = np.arange(n, dtype=float)
    w = dt**rho * ((k + 1.0) ** rho - k**rho) / gamma_fn(rho + 1.0)
    return np.concatenate(([0.0], np.convolve(w, g[1:])[:n]))


def volterra_equality_solution(alpha: float, c: float, psi0: float, t_end: float, n_steps: int):
    """psi = psi0 + c I^alpha psi, marched with the explicit product rectangle rule.

    Returns ``(t, psi)``. The explicit rule underestimates the increasing
    solution, so it approaches the Mittag-Leffler envelope from below.
    """
    dt = t_end / n_steps
    k = np.arange(n_steps, dtype=float)
    w = dt**alpha * ((k + 1.0) ** alpha - k**alpha) / gamma_fn(alpha + 1.0)
    psi = np.empty(n_steps + 1)
    psi[0] = psi0
    for n in range(1, n_steps + 1):
        psi[n] = psi0 + c * np.dot(w[n - 1::-1], psi[:n])
    return np.linspace(0.0, t_end, n_steps + 1), psi


def check_gronwall(alpha: float, c: float, psi0: float, t_end: float, n_steps: int = 2048,
                   psi: np.ndarray | None = None, tol: float = TOLERANCES["gronwall"]) -> CheckResult:
    """Equality case of the weakly singular Gronwall lemma against psi0 E_{alpha,1}(c t^alpha).

    Checks the bound at every grid point and that the endpoint value approaches
    the envelope within ``tol`` as the grid is refined (n, 2n, 4n steps).
    ``psi`` replaces the computed solution on the n-step grid (self-tests).
    """
    t, sol = volterra_equality_solution(alpha, c, psi0, t_end, n_steps)
    if psi is not None:
        sol = np.asarray(psi, dtype=float)
    env = psi0 * mittag_leffler(alpha, 1.0, c * t**alpha)
    scale = max(env[-1], 1e-300)
    below = float(np.min(env * (1.0 + tol) - sol) / scale)
    gaps = [abs(env[-1] - sol[-1]) / scale]
    for m in (2, 4):
        _, fine = volterra_equality_solution(alpha, c, psi0, t_end, m * n_steps)
        gaps.append(abs(env[-1] - fine[-1]) / scale)
    refining = all(b <= a * (1.0 + 1e-12) + 1e-15 for a, b in zip(gaps, gaps[1:]))
    endpoint = tol - gaps[-1]
    res = _result("gronwall", min(below, endpoint), 0.0, below_margin=below,
                  endpoint_gaps=gaps, refining=refining, envelope_T=env[-1], rel_tol=tol)
    res.holds = bool(below >= 0.0 and endpoint >= 0.0 and refining)
    return res


def check_caputo_convexity(x: Callable[[np.ndarray], np.ndarray], phi: Callable, dphi: Callable,
                           rho: float, t_end: float = 1.0, n_samples: int = 64,
                           refine: int = 16) -> CheckResult:
    """D^rho phi(x)(t) <= phi'(x(t)) D^rho x(t) at the sample times.

    Both Caputo derivatives use the L1 rule on a grid ``refine`` times finer
    than the samples.
    """
    n_fine = n_samples * refine
    t = np.linspace(0.0, t_end, n_fine + 1)
    dt = t_end / n_fine
    xs = x(t)
    lhs = caputo_l1(phi(xs), rho, dt)[refine::refine]
    rhs = (dphi(xs) * caputo_l1(xs, rho, dt))[refine::refine]
    scale = max(1.0, float(np.max(np.abs(lhs) + np.abs(rhs))))
    gap = (rhs - lhs) / scale
    i = int(np.argmin(gap))
    return _result("caputo_convexity", gap[i], TOLERANCES["caputo_convexity"], rho=rho,
                   t_worst=t[refine::refine][i], scale=scale)


def check_frac_identity(f: Callable[[np.ndarray], np.ndarray], rho: float, t_end: float = 1.0,
                        n_steps: int = 1024, integral_order: float | None = None) -> CheckResult:
    """I^rho (D^rho f) = f - f(0), with L1 for D and the product rectangle for I.

    Both legs are first order, so the declared tolerance is
    ``factor * dt / T * max(1, |f - f(0)|)``. ``integral_order`` replaces the
    order of the integral (self-tests).
    """
    t = np.linspace(0.0, t_end, n_steps + 1)
    dt = t_end / n_steps
    y = f(t)
    order = rho if integral_order is None else integral_order
    back = frac_integral(caputo_l1(y, rho, dt), order, dt)
    target = y - y[0]
    err = float(np.max(np.abs(back - target)))
    tol = TOLERANCES["frac_identity_factor"] * dt / t_end * max(1.0, float(np.max(np.abs(target))))
    return _result("frac_identity", tol - err, 0.0, rho=rho, max_error=err, declared_tol=tol,
                   integral_order=order)


# -- the mild propagator --------------------------------------------------------

def p_rho_multiplier_subordinated(rho: float, lam: float, t: float, tau_max: float = 60.0) -> float:
    """rho * int_0^tau_max tau Phi_rho(tau) exp(-lam t^rho tau) dtau.

    The subordination form of the mode-wise propagator (equals
    E_{rho,rho}(-lam t^rho)); ``tau_max`` truncates the Wright density.
    """
    decay = lam * t**rho
    val, _ = integrate.quad(lambda tau: tau * wright_phi(rho, tau) * math.exp(-decay * tau),
                            0.0, tau_max, limit=200, epsabs=1e-12, epsrel=1e-10)
    return rho * val


def check_p_rho_bound(sigma: float, rho: float, fields, d: float = 1.0, t_grid=None,
                      multiplier: Callable | None = None) -> CheckResult:
    """Empirical C in ||t^(1-rho) P_rho(t) w||_{H^sigma} <= C ||w||_{H^sigma}.

    Holds when every ratio is finite and below the ceiling in TOLERANCES; the
    trend of the ratio over t is recorded but not asserted. ``multiplier``
    (lam, t) -> array replaces the mode-wise factor t^(1-rho) P_rho(t) (self-tests).
    """
    t_grid = np.geomspace(1e-3, 10.0, 40) if t_grid is None else np.asarray(t_grid, dtype=float)
    ratios = []
    skipped = 0
    for w in fields:
        base = sobolev_seminorm(w, sigma)
        if base == 0.0:
            skipped += 1
            continue
        mult = w.dom.eigenvalues**sigma
        row = []
        for t in t_grid:
            if multiplier is None:
                m = t ** (1.0 - rho) * ml_kernel(rho, mult, d, t)
            else:
                with np.errstate(over="ignore"):
                    m = multiplier(d * mult, t)
            with np.errstate(over="ignore", invalid="ignore"):
                row.append(math.sqrt(float(np.sum(mult * (m * w.coeffs) ** 2)) / base))
        ratios.append(row)
    ceiling = TOLERANCES["p_rho_ceiling"]
    if not ratios:
        return CheckResult("p_rho_bound", True, math.inf,
                           {"note": "all fields have zero seminorm; ratio undefined", "skipped": skipped})
    ratios = np.array(ratios)
    finite = bool(np.all(np.isfinite(ratios)))
    emp = float(np.max(ratios)) if finite else math.inf
    trend = np.max(ratios, axis=0)
    nonincreasing = bool(np.all(np.diff(trend) <= 1e-12 * max(emp, 1.0))) if finite else False
    margin = (ceiling - emp) / ceiling if finite else -math.inf
    return _result("p_rho_bound", margin, 0.0, empirical_C=emp, nonincreasing_trend=nonincreasing,
                   reference=1.0 / gamma_fn(rho), skipped=skipped, ceiling=ceiling)


# -- suite -----------------------------------------------------------------------

def _random_path(rng: np.random.Generator, degree: int = 5):
    a = rng.standard_normal(degree) / (1.0 + np.arange(degree))
    k = np.arange(1, degree + 1)

    def x(t):
        return np.sin(np.pi * np.outer(t, k) / 2.0) @ a
    return x


def _poke(traj: Trajectory, **values) -> Trajectory:
    """Copy of ``traj`` with the middle row of each named column replaced."""
    changes = {}
    for col, value in values.items():
        arr = np.array(getattr(traj, col), dtype=float)
        arr[len(arr) // 2] = value
        changes[col] = arr
    return replace(traj, **changes)


def _pure_diffusion() -> KineticParams:
    return KineticParams(1.0, 1.0, 1.0, 1.0)


def _default_spec():
    from .config import parse_config

    return parse_config({
        "domain": {"length": 1.0, "n_modes": 128, "boundary": "neumann"},
        "kinetics": {"alpha1": 1, "alpha2": 2, "beta1": 3, "beta2": 1, "k_f": 1, "k_b": 1},
        "diffusion": {"d_u": 1, "d_v": 1, "sigma1": 0.5, "sigma2": 0.5, "rho": 0.5},
        "initial": {"u": {"profile": "single_mode", "k": 2}, "v": {"profile": "single_mode", "k": 2}},
        "solver": {"scheme": "L1_IMEX", "dt": 2.0**-7, "t_end": 1.0},
    })


def run_suite(spec=None, seed: int = 0, corrupt: bool = False, samples: int | None = None,
              config_hash: str | None = None) -> VerificationReport:
    """Run every check once, on real data or (``corrupt=True``) on broken fixtures.

    ``spec`` is a :class:`fracrd.config.RunSpec`; its simulation feeds the
    regime-specific checks. ``samples`` sets the size of the randomized suites.
    In corrupt mode every check is expected to fail.
    """
    spec = _default_spec() if spec is None else spec
    samples = int(spec.verify.get("samples", 20)) if samples is None else samples
    rng = np.random.default_rng(seed)
    dom, dp, kp = spec.dom, spec.dp, spec.kp
    results = []

    # regime run
    u0, v0 = spec.initial_fields(seed)
    traj = simulate(u0, v0, dom, dp, kp, spec.solver)
    regime = traj.regime
    if regime.has_lyapunov:
        w = lyapunov_weights(regime, spec.solver.lyapunov_p)
        bounds = linf_bounds(regime, traj.data_bound)
        lt = _poke(traj, lyapunov=1.01 * traj.lyapunov[0]) if corrupt else traj
        bt = _poke(traj, linf_u=1.1 * bounds[0]) if corrupt else traj
        results.append(check_lyapunov_monotone(lt, w))
        results.append(check_linf_bounds(bt, bounds))
    elif regime.tag in ("III", "IV"):
        col = "linf_v" if regime.tag == "III" else "linf_u"
        et = _poke(traj, **{col: 1e3 * getattr(traj, col)[0]}) if corrupt else traj
        slack = spec.verify.get("envelope_slack", TOLERANCES["gronwall_envelope"])
        form = spec.verify.get("envelope_form", "stated")
        results.append(check_gronwall_envelope(et, kp, dp.rho, slack=slack, form=form))
    else:
        log.info("regime %s has no a priori bound to check; skipping run checks", regime.tag)
    nt = _poke(traj, min_u=-1e-6 * traj.linf_u[0]) if corrupt else traj
    results.append(_result("nonnegativity", min(nt.min_u.min(), nt.min_v.min()) / traj.data_bound,
                           TOLERANCES["nonnegativity"], status=traj.status, regime=regime.tag))

    # maximum principle on random data, pure diffusion
    worst = None
    for _ in range(samples):
        a = random_nonnegative_field(dom, rng, sup=rng.uniform(0.5, 2.0))
        b = random_nonnegative_field(dom, rng, sup=rng.uniform(0.5, 2.0))
        cfg = SolverConfig(dt=spec.solver.dt, t_end=min(spec.solver.t_end, 1.0), scheme=spec.solver.scheme)
        pt = simulate(a, b, dom, dp, _pure_diffusion(), cfg)
        if corrupt:
            pt = _poke(pt, linf_u=1.01 * pt.linf_u[0])
        res = check_max_principle(pt)
        if worst is None or res.margin < worst.margin:
            worst = res
    worst.context["samples"] = samples
    results.append(worst)

    # Stroock-Varopoulos on exactly representable fields
    sv_dom = Domain1D(dom.length, dom.n_modes, NEUMANN)
    for p in (2.0, 3.0, 5.0):
        for sigma in (0.25, 0.5, 0.75):
            worst = None
            gap = 0.0
            for _ in range(samples):
                deg = int(rng.integers(1, max(2, min(8, dom.n_modes // (4 * int(p))))))
                u = random_nonnegative_field(sv_dom, rng, degree=deg, offset=rng.uniform(0.0, 0.5))
                const = (1.0 if p != 2.0 else 1.5) * 1e3 if corrupt else None
                res = check_stroock_varopoulos(u, p, sigma, constant=const)
                gap = max(gap, res.context["equality_gap"])
                if worst is None or res.margin < worst.margin:
                    worst = res
            worst.name = f"stroock_varopoulos[p={p:g},sigma={sigma:g}]"
            worst.context["samples"] = samples
            results.append(worst)
            if p == 2.0:
                tol = TOLERANCES["stroock_varopoulos_equality"]
                results.append(_result(f"stroock_varopoulos_equality[sigma={sigma:g}]", tol - gap, 0.0,
                                       max_relative_gap=gap, equality_tol=tol))

    results.append(check_pointwise_suite(rng, 10 * samples * 50, flip=corrupt))

    g = check_gronwall(0.5, 1.0, 1.0, 1.0)
    if corrupt:
        t, sol = volterra_equality_solution(0.5, 1.0, 1.0, 1.0, 2048)
        g = check_gronwall(0.5, 1.0, 1.0, 1.0, psi=1.05 * sol)
    results.append(g)

    rho = dp.rho
    if corrupt:
        results.append(check_caputo_convexity(lambda t: t, lambda x: -x * x, lambda x: -2.0 * x, rho))
    else:
        worst = None
        for i in range(samples):
            x = _random_path(rng)
            phi, dphi = (np.exp, np.exp) if i % 2 else ((lambda z: z * z), (lambda z: 2.0 * z))
            res = check_caputo_convexity(x, phi, dphi, rho)
            if worst is None or res.margin < worst.margin:
                worst = res
        worst.context["samples"] = samples
        results.append(worst)

    for name, f in (("t", lambda t: t), ("t^2", lambda t: t * t)):
        res = check_frac_identity(f, rho, integral_order=min(rho + 0.2, 1.0) if corrupt and rho < 1.0 else
                                  (0.5 if corrupt else None))
        res.name = f"frac_identity[{name}]"
        results.append(res)

    fields = [random_nonnegative_field(dom, rng) for _ in range(3)]
    mult = (lambda lam, t: np.exp(lam * t**rho)) if corrupt else None
    results.append(check_p_rho_bound(dp.sigma1, rho, fields, d=dp.d_u, multiplier=mult))

    return VerificationReport(results, seed, config_hash)
