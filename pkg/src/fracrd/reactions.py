"""Reversible mass-action kinetics and the parameter regimes with global bounds.

The reaction  a1 U + b1 V  <=>  a2 U + b2 V  (forward rate k_f, backward k_b)
drives u with (a2 - a1) * R and v with (b2 - b1) * R, where
R = k_f u^a1 v^b1 - k_b u^a2 v^b2.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

__all__ = [
    "ParameterError",
    "RegimeError",
    "KineticParams",
    "DiffusionParams",
    "Regime",
    "LyapunovWeights",
    "reaction_rates",
    "classify_regime",
    "lyapunov_weights",
    "linf_bounds",
    "check_pointwise_inequality",
    "growth_constant",
]

REGIME_TAGS = ("I", "II", "III", "IV", "V", "VI")
CLAMP_TOL = 1e-12


class ParameterError(ValueError):
    """Invalid model parameter; ``field`` names the offending attribute."""

    def __init__(self, field_name: str, message: str):
        super().__init__(f"{field_name}: {message}")
        self.field = field_name


class RegimeError(ValueError):
    """Operation requested for a regime it is not defined for."""


def _require(ok: bool, name: str, message: str):
    if not ok:
        raise ParameterError(name, message)


@dataclass(frozen=True)
class KineticParams:
    alpha1: float
    alpha2: float
    beta1: float
    beta2: float
    k_f: float = 1.0
    k_b: float = 1.0

    def __post_init__(self):
        for name in ("alpha1", "alpha2", "beta1", "beta2"):
            val = getattr(self, name)
            _require(math.isfinite(val) and val >= 0, name, f"must be finite and >= 0, got {val}")
        for name in ("k_f", "k_b"):
            val = getattr(self, name)
            _require(math.isfinite(val) and val > 0, name, f"must be finite and > 0, got {val}")


@dataclass(frozen=True)
class DiffusionParams:
    d_u: float = 1.0
    d_v: float = 1.0
    sigma1: float = 0.5
    sigma2: float = 0.5
    rho: float = 1.0

    def __post_init__(self):
        for name in ("d_u", "d_v"):
            val = getattr(self, name)
            _require(math.isfinite(val) and val > 0, name, f"must be finite and > 0, got {val}")
        for name in ("sigma1", "sigma2"):
            val = getattr(self, name)
            _require(0.0 < val < 1.0, name, f"must lie in (0, 1), got {val}")
        _require(0.0 < self.rho <= 1.0, "rho", f"must lie in (0, 1], got {self.rho}")


@dataclass(frozen=True)
class Regime:
    """Which global-existence clause a parameter set falls under.

    ``tag`` is the first matching clause in the order I..VI (or None);
    ``overlaps`` lists any later clauses that match as well.
    ``alpha_hat``/``beta_hat`` are |a2 - a1| and |b1 - b2| for I/II.
    """

    tag: str | None
    alpha_hat: float | None = None
    beta_hat: float | None = None
    overlaps: tuple = field(default=())

    @property
    def has_lyapunov(self) -> bool:
        return self.tag in ("I", "II")


@dataclass(frozen=True)
class LyapunovWeights:
    p: float
    q: float
    delta1: float
    delta2: float


def _clamped(x, name):
    x = np.asarray(x, dtype=float)
    if np.any(x < -CLAMP_TOL):
        raise ValueError(f"{name} has negative entries beyond the clamp tolerance (min {x.min()})")
    return np.maximum(x, 0.0)


def reaction_rates(u, v, kp: KineticParams):
    """Return (f, g), the source terms of the u and v equations.

    Works elementwise on arrays. 0**0 is taken as 1 (numpy's convention).
    """
    u = _clamped(u, "u")
    v = _clamped(v, "v")
    bracket = kp.k_f * u**kp.alpha1 * v**kp.beta1 - kp.k_b * u**kp.alpha2 * v**kp.beta2
    f = (kp.alpha2 - kp.alpha1) * bracket
    g = (kp.beta2 - kp.beta1) * bracket
    if f.ndim == 0:
        return float(f), float(g)
    return f, g


def _matches(kp: KineticParams, dp: DiffusionParams) -> list[str]:
    a1, a2, b1, b2 = kp.alpha1, kp.alpha2, kp.beta1, kp.beta2
    equal_rates = kp.k_f == kp.k_b
    classical = dp.rho == 1.0 and dp.sigma1 <= dp.sigma2
    checks = {
        "I": 0 < a1 < a2 and 0 < b2 < b1 and a1 + b1 > a2 + b2 and equal_rates,
        "II": 0 < a2 < a1 and 0 < b1 < b2 and a1 + b1 < a2 + b2 and equal_rates,
        "III": a1 == a2,
        "IV": b1 == b2,
        "V": classical and 0 < a1 < a2 and 0 < b1 < b2 and a1 + b1 <= 1,
        "VI": classical and 0 < a2 < a1 and 0 < b2 < b1 and a2 + b2 <= 1,
    }
    return [tag for tag in REGIME_TAGS if checks[tag]]


def classify_regime(kp: KineticParams, dp: DiffusionParams) -> Regime:
    hits = _matches(kp, dp)
    if not hits:
        return Regime(None)
    tag = hits[0]
    a_hat = b_hat = None
    if tag in ("I", "II"):
        a_hat = abs(kp.alpha2 - kp.alpha1)
        b_hat = abs(kp.beta1 - kp.beta2)
    return Regime(tag, a_hat, b_hat, tuple(hits[1:]))


def _require_lyapunov(regime: Regime):
    if not regime.has_lyapunov:
        raise RegimeError(f"defined for regimes I and II only, got {regime.tag}")


def lyapunov_weights(regime: Regime, p: float) -> LyapunovWeights:
    """Exponents and weights of L = int (delta1 u^p + delta2 v^q)."""
    _require_lyapunov(regime)
    if not p > 1:
        raise ValueError("p must exceed 1")
    ratio = regime.beta_hat / regime.alpha_hat
    q = (p - 1.0) * ratio + 1.0
    return LyapunovWeights(p, q, 1.0 / (p * regime.alpha_hat), 1.0 / (q * regime.beta_hat))


def linf_bounds(regime: Regime, lam: float) -> tuple[float, float]:
    """A priori sup-norm bounds (Lambda_u, Lambda_v) for data bounded by ``lam``."""
    _require_lyapunov(regime)
    if not lam > 0:
        raise ValueError("the data bound must be positive")
    ratio = regime.beta_hat / regime.alpha_hat
    bound_u = max(2.0, 2.0 * lam**ratio)
    bound_v = (2.0 * ratio**2 + 1.0) * max(1.0, lam)
    return bound_u, bound_v


def check_pointwise_inequality(x, y, r, s, t):
    """Evaluate (x^s - y^t)(x^(rs/t) - y^r) and whether it is nonnegative.

    The sign test allows rounding at the size of the product's terms.
    Works elementwise; returns ``(value, holds)``.
    """
    x, y, r, s, t = (np.asarray(a, dtype=float) for a in (x, y, r, s, t))
    xs, yt = x**s, y**t
    xr, yr = x ** (r * s / t), y**r
    value = (xs - yt) * (xr - yr)
    scale = np.maximum(1.0, (np.abs(xs) + np.abs(yt)) * (np.abs(xr) + np.abs(yr)))
    holds = value >= -1e-15 * scale
    if value.ndim == 0:
        return float(value), bool(holds)
    return value, holds


def _sup_ratio(k_pos, e_pos, k_neg, e_neg):
    """sup over w >= 0 of max(0, k_pos w^e_pos - k_neg w^e_neg) / (1 + w), with e_neg > e_pos."""
    def h(w):
        return (k_pos * w**e_pos - k_neg * w**e_neg) / (1.0 + w)

    grid = np.concatenate(([0.0], np.logspace(-8, 8, 3201)))
    vals = h(grid)
    i = int(np.argmax(vals))
    lo = grid[max(i - 1, 0)]
    hi = grid[min(i + 1, grid.size - 1)]
    best = vals[i]
    if hi > lo:
        res = optimize.minimize_scalar(lambda w: -h(w), bounds=(lo, hi), method="bounded",
                                       options={"xatol": 1e-12 * max(1.0, hi)})
        best = max(best, -res.fun)
    return max(best, 0.0)


def growth_constant(kp: KineticParams, regime: Regime, other_sup: float) -> float:
    """Constant C with source <= C (1 + w) for the unbounded species of regime III/IV.

    In regime III (a1 == a2) u obeys pure diffusion and stays below ``other_sup``
    (its initial sup); the v source is then dominated by C (1 + v). Regime IV is
    the mirror image with the roles of u and v exchanged.
    """
    if regime.tag == "III":
        coef = kp.beta2 - kp.beta1
        prefactor = other_sup**kp.alpha1
        e1, e2 = kp.beta1, kp.beta2
    elif regime.tag == "IV":
        coef = kp.alpha2 - kp.alpha1
        prefactor = other_sup**kp.beta1
        e1, e2 = kp.alpha1, kp.alpha2
    else:
        raise RegimeError(f"defined for regimes III and IV only, got {regime.tag}")
    if coef == 0:
        return 0.0
    if coef > 0:
        sup = _sup_ratio(kp.k_f, e1, kp.k_b, e2)
    else:
        sup = _sup_ratio(kp.k_b, e2, kp.k_f, e1)
    return abs(coef) * prefactor * sup
