"""Time integration of the coupled fractional reaction-diffusion system.

Both species are advanced mode by mode on the eigenbasis of the domain:

    D^rho w_n + d mu_n^sigma w_n = F_n(t),

where F_n are the eigen-coefficients of the reaction source evaluated on the
grid. Two schemes are provided:

``L1_IMEX``
    L1 discretization of the Caputo derivative on a uniform grid, implicit in
    the diffusion term and explicit (lagged one step) in the reaction. Each
    step re-reads the full increment history, so step ``n`` costs ``O(n)`` per
    mode. At ``rho == 1`` this is backward Euler.

``ML_MILD``
    Variation of constants with the Mittag-Leffler propagator:

        w_n(t) = E_{rho,1}(-lam t^rho) w_n(0) + int_0^t K(t - s) F_n(s) ds,
        K(s) = s^(rho-1) E_{rho,rho}(-lam s^rho),

    with F held piecewise constant on each step. The kernel integrals are
    tabulated once per run, which makes the scheme exact for the linear
    problem.

The reaction is always evaluated as: synthesize -> clamp negatives to 0 -> rates.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .operators import Domain1D, Field, SpectralOperator, _analyze, _synthesize
from .reactions import (
    DiffusionParams,
    KineticParams,
    LyapunovWeights,
    Regime,
    classify_regime,
    lyapunov_weights,
)
from .specfun import gamma_fn, mittag_leffler, ml_kernel_integral

__all__ = [
    "L1_IMEX",
    "ML_MILD",
    "InitialDataError",
    "SolverConfig",
    "SolverState",
    "Trajectory",
    "caputo_l1_coeffs",
    "init_state",
    "step_l1_imex",
    "step_ml_mild",
    "simulate",
    "LinearModeProblem",
    "ConvergenceResult",
    "convergence_study",
]

log = logging.getLogger(__name__)

L1_IMEX = "L1_IMEX"
ML_MILD = "ML_MILD"
SCHEMES = (L1_IMEX, ML_MILD)

COMPLETED = "completed"
BLOWUP = "blowup_detected"
FAILURE = "scheme_failure"

CSV_COLUMNS = ("t", "linf_u", "linf_v", "l2_u", "l2_v", "mass_u", "mass_v", "lyapunov")


class InitialDataError(ValueError):
    pass


@dataclass(frozen=True)
class SolverConfig:
    dt: float
    t_end: float
    scheme: str = L1_IMEX
    blowup_threshold: float = 1e8
    snapshot_stride: int | None = None
    clamp_tol: float = 1e-12
    lyapunov_p: float = 2.0
    # Secondary blow-up signal: sup norm up by this factor within this many steps.
    growth_factor: float = 10.0
    growth_window: int = 10

    def __post_init__(self):
        if not self.dt > 0 or not self.t_end > 0:
            raise ValueError("dt and t_end must be positive")
        if not self.dt < self.t_end:
            raise ValueError("dt must be smaller than t_end")
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}; expected one of {SCHEMES}")
        if self.snapshot_stride is not None and self.snapshot_stride < 1:
            raise ValueError("snapshot_stride must be a positive integer")
        if not self.lyapunov_p > 1:
            raise ValueError("lyapunov_p must exceed 1")

    @property
    def n_steps(self) -> int:
        return int(math.ceil(self.t_end / self.dt - 1e-9))


def caputo_l1_coeffs(rho: float, dt: float, n: int) -> np.ndarray:
    """L1 weights b_0..b_{n-1} for the Caputo derivative of order ``rho``.

    b_j = ((j+1)^(1-rho) - j^(1-rho)) dt^(-rho) / Gamma(2-rho). For rho = 1
    only b_0 = 1/dt survives and the scheme is the backward difference.
    """
    j = np.arange(n, dtype=float)
    if rho == 1.0:
        b = np.zeros(n)
        b[0] = 1.0 / dt
        return b
    e = 1.0 - rho
    return ((j + 1.0) ** e - j**e) * dt ** (-rho) / gamma_fn(2.0 - rho)


@dataclass
class _Species:
    op: SpectralOperator
    w0: np.ndarray
    w: np.ndarray
    history: np.ndarray          # L1: increments w^{m+1} - w^m; mild: source coefficients F^m
    table_e: np.ndarray | None = None   # mild: E_{rho,1}(-lam t_k^rho)
    table_w: np.ndarray | None = None   # mild: kernel integral over step k


@dataclass
class SolverState:
    """Everything needed to take the next step.

    ``u``/``v`` are the current eigen-coefficients. ``history_terms`` counts
    the history products evaluated per mode over the run; ``last_step_cost``
    is the count for the most recent step.
    """

    dom: Domain1D
    n: int
    t: float
    species: tuple
    scheme: str
    lam0: float
    history_terms: int = 0
    last_step_cost: int = 0
    b: np.ndarray | None = None

    @property
    def u(self) -> np.ndarray:
        return self.species[0].w

    @property
    def v(self) -> np.ndarray:
        return self.species[1].w

    def fields(self) -> tuple[Field, Field]:
        return Field(self.dom, coeffs=self.u), Field(self.dom, coeffs=self.v)


@dataclass
class Trajectory:
    """Per-step diagnostics of a run, plus optional snapshots.

    Columns are numpy arrays of equal length; ``lyapunov`` holds NaN when the
    parameters are outside regimes I and II. ``min_u``/``min_v`` are the nodal
    minima before clamping.
    """

    t: np.ndarray
    linf_u: np.ndarray
    linf_v: np.ndarray
    l2_u: np.ndarray
    l2_v: np.ndarray
    mass_u: np.ndarray
    mass_v: np.ndarray
    lyapunov: np.ndarray
    min_u: np.ndarray
    min_v: np.ndarray
    status: str
    t_max_lower: float
    regime: Regime
    weights: LyapunovWeights | None
    data_bound: float
    dom: Domain1D
    scheme: str
    snapshots: list = field(default_factory=list)
    flags: list = field(default_factory=list)
    history_terms: int = 0

    def __len__(self):
        return len(self.t)

    def rows(self):
        cols = [getattr(self, name) for name in CSV_COLUMNS]
        return list(zip(*cols))


def _reaction_coeffs(state: SolverState, kp: KineticParams):
    """Nodal evaluation of the sources; returns (F_u, F_v, nodal_u, nodal_v).

    Negative nodal values are clamped to 0 unconditionally here; the caller
    records the unclamped minima and flags excursions beyond ``clamp_tol``.
    """
    dom = state.dom
    u = _synthesize(state.u, dom)
    v = _synthesize(state.v, dom)
    fu = np.maximum(u, 0.0)
    fv = np.maximum(v, 0.0)
    bracket = kp.k_f * fu**kp.alpha1 * fv**kp.beta1 - kp.k_b * fu**kp.alpha2 * fv**kp.beta2
    if kp.alpha2 != kp.alpha1:
        f = _analyze((kp.alpha2 - kp.alpha1) * bracket, dom)
    else:
        f = np.zeros(dom.n_modes)
    if kp.beta2 != kp.beta1:
        g = _analyze((kp.beta2 - kp.beta1) * bracket, dom)
    else:
        g = np.zeros(dom.n_modes)
    return f, g, u, v


def _mild_tables(op: SpectralOperator, rho: float, dt: float, n_steps: int):
    lam = op.symbol[None, :]
    tk = (np.arange(n_steps + 1) * dt)[:, None]
    if rho == 1.0:
        table_e = np.exp(-lam * tk)
    else:
        table_e = mittag_leffler(rho, 1.0, -lam * tk**rho)
    g = ml_kernel_integral(rho, lam, tk)
    return table_e, np.diff(g, axis=0)


def init_state(u0: Field, v0: Field, dp: DiffusionParams, cfg: SolverConfig) -> SolverState:
    dom = u0.dom
    if v0.dom != dom:
        raise ValueError("u0 and v0 must live on the same domain")
    ops = (SpectralOperator(dom, dp.d_u, dp.sigma1), SpectralOperator(dom, dp.d_v, dp.sigma2))
    n_steps = cfg.n_steps
    species = []
    for op, f0 in zip(ops, (u0, v0)):
        w0 = f0.coeffs.copy()
        sp = _Species(op=op, w0=w0, w=w0.copy(), history=np.zeros((n_steps + 1, dom.n_modes)))
        if cfg.scheme == ML_MILD:
            sp.table_e, sp.table_w = _mild_tables(op, dp.rho, cfg.dt, n_steps)
        species.append(sp)
    b = caputo_l1_coeffs(dp.rho, cfg.dt, n_steps + 1) if cfg.scheme == L1_IMEX else None
    return SolverState(dom=dom, n=0, t=0.0, species=tuple(species), scheme=cfg.scheme,
                       lam0=float(max(u0.linf_norm(), v0.linf_norm())), b=b)


def step_l1_imex(state: SolverState, cfg: SolverConfig, dp: DiffusionParams, kp: KineticParams,
                 sources=None) -> SolverState:
    """Advance one L1-IMEX step, in place; returns the state.

    Per mode: (b_0 + d mu^sigma) w^{n+1} = b_0 w^n - sum_{j>=1} b_j (w^{n+1-j} - w^{n-j}) + F^n.
    """
    if sources is None:
        sources = _reaction_coeffs(state, kp)[:2]
    n = state.n
    b = state.b
    b0 = b[0]
    hist_w = b[n:0:-1]
    for sp, src in zip(state.species, sources):
        rhs = b0 * sp.w + src
        if n > 0 and dp.rho != 1.0:
            rhs -= hist_w @ sp.history[:n]
        new = rhs / (b0 + sp.op.symbol)
        sp.history[n] = new - sp.w
        sp.w = new
    cost = n if dp.rho != 1.0 else 0
    state.last_step_cost = cost
    state.history_terms += cost
    state.n = n + 1
    state.t = state.n * cfg.dt
    _check_finite(state)
    return state


def step_ml_mild(state: SolverState, cfg: SolverConfig, dp: DiffusionParams, kp: KineticParams,
                 sources=None) -> SolverState:
    """Advance one step of the Mittag-Leffler variation-of-constants scheme, in place."""
    if sources is None:
        sources = _reaction_coeffs(state, kp)[:2]
    n = state.n
    for sp, src in zip(state.species, sources):
        sp.history[n] = src
        conv = np.einsum("jm,jm->m", sp.history[:n + 1], sp.table_w[n::-1])
        sp.w = sp.table_e[n + 1] * sp.w0 + conv
    state.last_step_cost = n + 1
    state.history_terms += n + 1
    state.n = n + 1
    state.t = state.n * cfg.dt
    _check_finite(state)
    return state


class _SchemeFailure(ArithmeticError):
    pass


def _check_finite(state: SolverState):
    for sp in state.species:
        if not np.all(np.isfinite(sp.w)):
            raise _SchemeFailure(f"non-finite coefficients at step {state.n}")


def _validate_initial(name: str, f: Field, clamp_tol: float):
    vals = f.nodal
    if vals.min() < -clamp_tol:
        raise InitialDataError(f"{name} is negative (min {vals.min():.3e})")
    if not np.any(vals > 0):
        raise InitialDataError(f"{name} is identically zero")


def simulate(u0: Field, v0: Field, dom: Domain1D, dp: DiffusionParams, kp: KineticParams,
             cfg: SolverConfig) -> Trajectory:
    """Run the configured scheme to ``t_end`` or until blow-up is detected."""
    if u0.dom != dom or v0.dom != dom:
        raise ValueError("initial data must live on the given domain")
    _validate_initial("u0", u0, cfg.clamp_tol)
    _validate_initial("v0", v0, cfg.clamp_tol)

    regime = classify_regime(kp, dp)
    weights = lyapunov_weights(regime, cfg.lyapunov_p) if regime.has_lyapunov else None
    state = init_state(u0, v0, dp, cfg)
    step = step_l1_imex if cfg.scheme == L1_IMEX else step_ml_mild

    cols = {name: [] for name in CSV_COLUMNS + ("min_u", "min_v")}
    snapshots = []
    flags = []
    h = dom.h

    def record(nodal_u, nodal_v):
        cols["t"].append(state.t)
        cols["linf_u"].append(float(np.abs(nodal_u).max()))
        cols["linf_v"].append(float(np.abs(nodal_v).max()))
        cols["l2_u"].append(float(np.sqrt(np.sum(state.u**2))))
        cols["l2_v"].append(float(np.sqrt(np.sum(state.v**2))))
        cols["mass_u"].append(float(h * np.sum(nodal_u)))
        cols["mass_v"].append(float(h * np.sum(nodal_v)))
        cols["min_u"].append(float(nodal_u.min()))
        cols["min_v"].append(float(nodal_v.min()))
        if weights is not None:
            cu = np.maximum(nodal_u, 0.0)
            cv = np.maximum(nodal_v, 0.0)
            val = h * np.sum(weights.delta1 * cu**weights.p + weights.delta2 * cv**weights.q)
            cols["lyapunov"].append(float(val))
        else:
            cols["lyapunov"].append(math.nan)
        if cfg.snapshot_stride and state.n % cfg.snapshot_stride == 0:
            snapshots.append((state.t, nodal_u.copy(), nodal_v.copy()))

    status = COMPLETED
    f, g, nu, nv = _reaction_coeffs(state, kp)
    record(nu, nv)
    sup_hist = [max(cols["linf_u"][-1], cols["linf_v"][-1])]
    for _ in range(cfg.n_steps):
        try:
            step(state, cfg, dp, kp, sources=(f, g))
        except _SchemeFailure as exc:
            log.warning("scheme failure: %s", exc)
            status = FAILURE
            break
        f, g, nu, nv = _reaction_coeffs(state, kp)
        if not (np.all(np.isfinite(f)) and np.all(np.isfinite(g))):
            record(nu, nv)
            log.warning("non-finite reaction source at t=%g", state.t)
            status = FAILURE
            break
        record(nu, nv)
        sup = max(cols["linf_u"][-1], cols["linf_v"][-1])
        sup_hist.append(sup)
        back = len(sup_hist) - 1 - cfg.growth_window
        if back >= 0 and sup > cfg.growth_factor * sup_hist[back] and "rapid_growth" not in flags:
            flags.append("rapid_growth")
            log.warning("sup norm grew %gx within %d steps at t=%g",
                        cfg.growth_factor, cfg.growth_window, state.t)
        if sup > cfg.blowup_threshold:
            status = BLOWUP
            log.info("blow-up detected at t=%g (sup norm %.3e)", state.t, sup)
            break
        min_now = min(cols["min_u"][-1], cols["min_v"][-1])
        if min_now < -cfg.clamp_tol and "negativity" not in flags:
            flags.append("negativity")
            log.warning("nodal values below -clamp_tol at t=%g (min %.3e)", state.t, min_now)

    t_last_ok = cols["t"][-1] if status == COMPLETED else cols["t"][-2 if len(cols["t"]) > 1 else -1]
    arrays = {k: np.asarray(v, dtype=float) for k, v in cols.items()}
    return Trajectory(**arrays, status=status, t_max_lower=float(t_last_ok), regime=regime,
                      weights=weights, data_bound=state.lam0, dom=dom, scheme=cfg.scheme,
                      snapshots=snapshots, flags=flags, history_terms=state.history_terms)


@dataclass(frozen=True)
class LinearModeProblem:
    """Pure fractional diffusion of one Dirichlet eigenmode.

    The exact amplitude is E_{rho,1}(-d mu_k^sigma t^rho) times the initial one.
    """

    rho: float
    sigma: float
    d: float = 1.0
    mode: int = 1
    t_end: float = 1.0
    dom: Domain1D = field(default_factory=lambda: Domain1D(math.pi, 32))

    @property
    def _index(self) -> int:
        return self.mode - 1 if self.dom.boundary == 1 else self.mode

    @property
    def lam(self) -> float:
        return self.d * float(self.dom.eigenvalues[self._index]) ** self.sigma

    def exact(self, t):
        return mittag_leffler(self.rho, 1.0, -self.lam * np.asarray(t, float) ** self.rho)

    def run(self, dt: float, scheme: str = L1_IMEX) -> float:
        """Amplitude of the mode at ``t_end``, relative to its initial value."""
        coeffs = np.zeros(self.dom.n_modes)
        coeffs[self._index] = 1.0
        u0 = Field(self.dom, coeffs=coeffs)
        # The species decouple without reaction, so v just mirrors u.
        v0 = u0.copy()
        dp = DiffusionParams(self.d, self.d, self.sigma, self.sigma, self.rho)
        kp = KineticParams(1.0, 1.0, 1.0, 1.0)
        cfg = SolverConfig(dt=dt, t_end=self.t_end, scheme=scheme, blowup_threshold=math.inf)
        return _run_raw(u0, v0, dp, kp, cfg)

    def error(self, dt: float, scheme: str = L1_IMEX) -> float:
        amp = self.run(dt, scheme)
        exact = self.exact(self.t_end)
        return abs(amp - exact) / abs(exact)


def _run_raw(u0: Field, v0: Field, dp, kp, cfg) -> float:
    """Final amplitude of the u mode carried by ``u0``; no sign checks on the data."""
    idx = int(np.argmax(np.abs(u0.coeffs)))
    state = init_state(u0, v0, dp, cfg)
    step = step_l1_imex if cfg.scheme == L1_IMEX else step_ml_mild
    zero = (np.zeros(u0.dom.n_modes), np.zeros(u0.dom.n_modes))
    for _ in range(cfg.n_steps):
        step(state, cfg, dp, kp, sources=zero)
    return float(state.u[idx] / u0.coeffs[idx])


@dataclass
class ConvergenceResult:
    dts: np.ndarray
    errors: np.ndarray
    orders: np.ndarray
    slope: float | None


def convergence_study(problem: LinearModeProblem, dts, scheme: str = L1_IMEX,
                      floor: float = 1e-11) -> ConvergenceResult:
    """Errors at ``problem.t_end`` for each dt, pairwise orders and the log-log slope.

    The slope is skipped (None) when every error is already below ``floor``,
    as happens for the exact ML_MILD integrator.
    """
    dts = np.asarray(dts, dtype=float)
    if dts.size < 3:
        raise ValueError("need at least three step sizes")
    if not np.allclose(dts[1:] / dts[:-1], 0.5):
        raise ValueError("each step size must halve the previous one")
    errors = np.array([problem.error(dt, scheme) for dt in dts])
    if np.all(errors < floor):
        return ConvergenceResult(dts, errors, np.full(dts.size - 1, np.nan), None)
    orders = np.log2(errors[:-1] / errors[1:])
    slope = float(np.polyfit(np.log(dts), np.log(errors), 1)[0])
    return ConvergenceResult(dts, errors, orders, slope)
