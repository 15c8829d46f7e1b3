"""Special functions for time-fractional relaxation.

Gamma, the two-parameter Mittag-Leffler function E_{a,b} and the Wright-type
(M-Wright / Mainardi) function Phi_rho, all for real arguments.

Routing used by :func:`mittag_leffler`:

* ``a == 1`` with ``b`` in {1, 2}: closed forms (``exp`` and ``expm1(z)/z``).
* ``z == 0``: ``1/Gamma(b)``.
* ``z < 0`` and ``0 < a < 1``: inversion of the Laplace transform
  ``s**(a-b) / (s**a - z)`` along a fixed optimized Talbot contour. There are
  no poles on the principal sheet in this case, so the rule converges
  geometrically for every negative argument, large or small. Vectorized.
* everything else (``z > 0``, or ``a >= 1`` with a negative argument): the
  power series, summed with ``math.fsum`` when all terms share a sign and in
  mpmath with a working precision sized to the largest term otherwise. Large
  positive arguments that would exceed the term budget switch to the
  exponential asymptotic expansion (``a < 2`` only).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import mpmath
import numpy as np
from scipy import integrate, special

__all__ = [
    "AccuracyError",
    "PoleError",
    "PrecisionPolicy",
    "DEFAULT_POLICY",
    "gamma_fn",
    "mittag_leffler",
    "wright_phi",
    "ml_kernel",
    "ml_kernel_integral",
]

GAMMA_OVERFLOW = 171.6243769563027

# Talbot contour (Trefethen, Weideman & Schmelzer parameters), t = 1.
_TALBOT_N = 28
_TALBOT_COEFFS = (-0.6122, 0.5017, 0.6407, 0.2645)
_CHUNK = 1 << 15


class SpecialFunctionError(ArithmeticError):
    pass


class PoleError(SpecialFunctionError, ValueError):
    """Argument sits on a pole of the Gamma function."""


class AccuracyError(SpecialFunctionError):
    """No available representation reaches the requested tolerance."""


@dataclass(frozen=True)
class PrecisionPolicy:
    target_abs_tol: float = 1e-13
    max_series_terms: int = 500

    def __post_init__(self):
        if not self.target_abs_tol > 0:
            raise ValueError("target_abs_tol must be positive")
        if self.max_series_terms < 50:
            raise ValueError("max_series_terms must be at least 50")


DEFAULT_POLICY = PrecisionPolicy()


def gamma_fn(x: float) -> float:
    x = float(x)
    if x <= 0 and x == math.floor(x):
        raise PoleError(f"Gamma has a pole at {x}")
    if x > GAMMA_OVERFLOW:
        raise OverflowError(f"Gamma({x}) overflows double precision")
    return math.gamma(x)


def _log_abs_rgamma(x):
    # log|1/Gamma(x)|; -inf at the poles.
    return -special.gammaln(x)


@lru_cache(maxsize=None)
def _talbot_contour(n: int = _TALBOT_N):
    c1, c2, c3, c4 = _TALBOT_COEFFS
    theta = -np.pi + (np.arange(n) + 0.5) * 2.0 * np.pi / n
    theta = theta[theta > 0]
    s = n * (c1 + c2 * theta / np.tan(c3 * theta) + 1j * c4 * theta)
    ds = n * (c2 * (1.0 / np.tan(c3 * theta) - c3 * theta / np.sin(c3 * theta) ** 2) + 1j * c4)
    return s, ds


def _ml_talbot(a: float, b: float, z: np.ndarray) -> np.ndarray:
    s, ds = _talbot_contour()
    sa = s**a
    w = np.exp(s) * ds * s ** (a - b)
    flat = z.ravel()
    out = np.empty(flat.shape)
    for start in range(0, flat.size, _CHUNK):
        zc = flat[start:start + _CHUNK]
        g = w / (sa - zc[:, None])
        out[start:start + _CHUNK] = g.sum(axis=1).imag
    out *= 2.0 / _TALBOT_N
    return out.reshape(z.shape)


def _series_plan(log_terms: np.ndarray, log_tol: float):
    """Number of terms needed and log10 of the largest term."""
    finite = np.isfinite(log_terms)
    big = np.nonzero(finite & (log_terms >= log_tol))[0]
    n_needed = int(big[-1]) + 1 if big.size else 1
    peak = float(log_terms[finite].max()) if finite.any() else 0.0
    return n_needed, peak / math.log(10.0)


def _ml_series(a: float, b: float, z: float, policy: PrecisionPolicy) -> float:
    kmax = policy.max_series_terms
    k = np.arange(kmax + 1)
    with np.errstate(divide="ignore"):
        log_terms = k * math.log(abs(z)) + _log_abs_rgamma(a * k + b)
    log_tol = math.log(policy.target_abs_tol) - 6.0 * math.log(10.0)
    if z > 0:
        # Same-sign terms: only relative accuracy against the largest term matters.
        log_tol = max(log_tol, float(np.max(log_terms)) + math.log(1e-18))
    n_needed, log10_peak = _series_plan(log_terms, log_tol)
    if n_needed > kmax:
        raise AccuracyError(
            f"Mittag-Leffler series for (a={a}, b={b}, z={z}) needs more than {kmax} terms"
        )
    if z > 0:
        terms = np.exp(log_terms[:n_needed + 1])
        return math.fsum(terms.tolist())
    dps = 25 + max(0, int(math.ceil(log10_peak)))
    with mpmath.workdps(dps):
        am, bm, zm = mpmath.mpf(a), mpmath.mpf(b), mpmath.mpf(z)
        total = mpmath.mpf(0)
        power = mpmath.mpf(1)
        for kk in range(n_needed + 1):
            total += power * mpmath.rgamma(am * kk + bm)
            power *= zm
        return float(total)


def _ml_asymptotic_pos(a: float, b: float, z: float, policy: PrecisionPolicy) -> float:
    # For 0 < a < 2 and z -> +inf only the principal saddle contributes:
    # E = z^((1-b)/a) exp(z^(1/a)) / a - sum_k z^(-k) / Gamma(b - a k).
    try:
        lead = z ** ((1.0 - b) / a) * math.exp(z ** (1.0 / a)) / a
    except OverflowError:
        raise AccuracyError(f"Mittag-Leffler evaluation overflowed at z={z}") from None
    tail = 0.0
    prev = math.inf
    for k in range(1, policy.max_series_terms):
        arg = b - a * k
        if arg <= 0 and arg == math.floor(arg):
            continue
        term = z ** (-k) / math.gamma(arg)
        if abs(term) > prev:
            break
        tail += term
        prev = abs(term)
        if prev < policy.target_abs_tol * 1e-3 * abs(lead):
            break
    if prev > policy.target_abs_tol * max(1.0, abs(lead)):
        raise AccuracyError(f"asymptotic Mittag-Leffler expansion at z={z} not accurate enough")
    return lead - tail


def _ml_positive(a: float, b: float, z: float, policy: PrecisionPolicy) -> float:
    try:
        return _ml_series(a, b, z, policy)
    except AccuracyError:
        if a >= 2.0:
            raise
    return _ml_asymptotic_pos(a, b, z, policy)


def mittag_leffler(z1: float, z2: float, z, policy: PrecisionPolicy = DEFAULT_POLICY):
    """Two-parameter Mittag-Leffler function E_{z1,z2}(z) for real z.

    Accepts a scalar or an array for ``z``; returns the same shape.
    """
    a, b = float(z1), float(z2)
    if not (a > 0 and b > 0):
        raise ValueError("Mittag-Leffler parameters must be positive")
    zs = np.asarray(z, dtype=float)
    scalar = zs.ndim == 0
    zs = np.atleast_1d(zs)
    if not np.all(np.isfinite(zs)):
        raise ValueError("Mittag-Leffler argument must be finite")

    if a == 1.0 and b == 1.0:
        out = np.exp(zs)
    elif a == 1.0 and b == 2.0:
        out = np.ones_like(zs)
        nz = zs != 0
        out[nz] = np.expm1(zs[nz]) / zs[nz]
    else:
        out = np.empty_like(zs)
        neg = zs < 0
        if a < 1.0 and neg.any():
            out[neg] = _ml_talbot(a, b, zs[neg])
        elif neg.any():
            out[neg] = [_ml_series(a, b, float(x), policy) for x in zs[neg]]
        zero = zs == 0
        if zero.any():
            out[zero] = 1.0 / gamma_fn(b)
        pos = zs > 0
        if pos.any():
            out[pos] = [_ml_positive(a, b, float(x), policy) for x in zs[pos]]

    if not np.all(np.isfinite(out)):
        raise AccuracyError(f"Mittag-Leffler evaluation overflowed for (a={a}, b={b})")
    return float(out[0]) if scalar else out


def _wright_series(rho: float, tau: float, n_terms: int, log10_peak: float) -> float:
    dps = 25 + max(0, int(math.ceil(log10_peak)))
    with mpmath.workdps(dps):
        r = mpmath.mpf(rho)
        t = mpmath.mpf(tau)
        total = mpmath.mpf(0)
        power = mpmath.mpf(1)
        for n in range(n_terms + 1):
            total += power * mpmath.rgamma(-r * n + 1 - r)
            power *= -t / (n + 1)
        return float(total)


def _wright_kanter(rho: float, tau: float, policy: PrecisionPolicy) -> float:
    # Phi_rho is the M-Wright function; it is tied to the one-sided stable
    # density, whose Kanter (Zolotarev) form is a nonnegative integral on (0, pi).
    c = 1.0 / (1.0 - rho)
    scale = tau**c

    def shape(phi):
        return (np.sin(rho * phi) ** rho * np.sin((1.0 - rho) * phi) ** (1.0 - rho)
                / np.sin(phi)) ** c

    def integrand(phi):
        a = shape(phi)
        return a * np.exp(-scale * a)

    prefactor = tau ** (rho * c) / ((1.0 - rho) * np.pi)
    val, err = integrate.quad(integrand, 0.0, np.pi, epsabs=0.1 * policy.target_abs_tol / prefactor,
                              epsrel=1e-12, limit=400)
    if prefactor * err > policy.target_abs_tol:
        raise AccuracyError(f"Wright function at tau={tau} did not reach tolerance")
    return prefactor * val


def wright_phi(rho: float, tau: float, policy: PrecisionPolicy = DEFAULT_POLICY) -> float:
    """Wright-type function Phi_rho(tau) = sum (-tau)^n / (n! Gamma(1 - rho - rho n)).

    Summed in extended precision while the alternating series is affordable;
    beyond ``policy.max_series_terms`` terms the integral representation is used.
    """
    rho = float(rho)
    tau = float(tau)
    if not 0.0 < rho < 1.0:
        raise ValueError("rho must lie in (0, 1)")
    if tau < 0 or not math.isfinite(tau):
        raise ValueError("tau must be finite and nonnegative")
    if tau == 0.0:
        return 1.0 / gamma_fn(1.0 - rho)

    nmax = policy.max_series_terms
    n = np.arange(nmax + 1)
    with np.errstate(divide="ignore"):
        log_terms = n * math.log(tau) - special.gammaln(n + 1.0) + _log_abs_rgamma(1.0 - rho - rho * n)
    log_tol = math.log(policy.target_abs_tol) - 6.0 * math.log(10.0)
    n_needed, log10_peak = _series_plan(log_terms, log_tol)
    if n_needed < nmax:
        return _wright_series(rho, tau, n_needed, log10_peak)
    return _wright_kanter(rho, tau, policy)


def ml_kernel(rho: float, mu_sig, d: float, s, policy: PrecisionPolicy = DEFAULT_POLICY):
    """Mode-wise convolution kernel s^(rho-1) E_{rho,rho}(-d mu_sig s^rho).

    For ``rho == 1`` this is the classical semigroup factor exp(-d mu_sig s).
    """
    s = np.asarray(s, dtype=float)
    if np.any(s <= 0):
        raise ValueError("kernel time must be positive")
    lam = d * np.asarray(mu_sig, dtype=float)
    if rho == 1.0:
        out = np.exp(-lam * s)
    else:
        out = s ** (rho - 1.0) * mittag_leffler(rho, rho, -lam * s**rho, policy)
    return float(out) if np.ndim(out) == 0 else out


def ml_kernel_integral(rho: float, lam, tau, policy: PrecisionPolicy = DEFAULT_POLICY):
    """Integral of the kernel over [0, tau]: tau^rho E_{rho,rho+1}(-lam tau^rho)."""
    lam, tau = np.broadcast_arrays(np.asarray(lam, float), np.asarray(tau, float))
    tr = tau**rho
    out = tr * mittag_leffler(rho, rho + 1.0, -lam * tr, policy) if rho != 1.0 else \
        tau * mittag_leffler(1.0, 2.0, -lam * tau, policy)
    return float(out) if np.ndim(out) == 0 else out
