"""Spectral and Riesz fractional Laplacians on an interval.

Dirichlet fields live on the ``n`` interior nodes ``x_j = j h`` with
``h = L/(n+1)`` (DST-I grid, endpoint values pinned to zero). Neumann fields
live on the half-offset nodes ``x_j = (j + 1/2) h`` with ``h = L/n`` (DCT-II
grid). On either grid the uniform quadrature ``h * sum`` makes the sampled
eigenfunctions exactly orthonormal, so :func:`analyze` and :func:`synthesize`
are an exact inverse pair.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.fft
from scipy import linalg

__all__ = [
    "DIRICHLET",
    "NEUMANN",
    "Domain1D",
    "Field",
    "SpectralOperator",
    "eigenpairs",
    "analyze",
    "synthesize",
    "apply_spectral_flaplacian",
    "sobolev_seminorm",
    "riesz_weights",
    "apply_riesz_flaplacian",
    "random_nonnegative_field",
]

DIRICHLET = 1
NEUMANN = 0


@dataclass(frozen=True)
class Domain1D:
    """Interval (0, length) with a homogeneous boundary condition.

    ``boundary`` is 1 for Dirichlet and 0 for Neumann. ``exterior`` marks where
    the boundary condition is imposed: ``"boundary"`` (the two endpoints, used
    by the spectral operator) or ``"complement"`` (the whole of R minus the
    interval, used by the Riesz operator; Dirichlet only).
    """

    length: float = math.pi
    n_modes: int = 256
    boundary: int = DIRICHLET
    exterior: str = "boundary"

    def __post_init__(self):
        if not self.length > 0:
            raise ValueError("domain length must be positive")
        if int(self.n_modes) != self.n_modes or self.n_modes < 4:
            raise ValueError("n_modes must be an integer >= 4")
        if self.boundary not in (DIRICHLET, NEUMANN):
            raise ValueError("boundary must be 1 (Dirichlet) or 0 (Neumann)")
        if self.exterior not in ("boundary", "complement"):
            raise ValueError("exterior must be 'boundary' or 'complement'")
        if self.exterior == "complement" and self.boundary != DIRICHLET:
            raise ValueError("the complement exterior requires the Dirichlet condition")

    @property
    def measure(self) -> float:
        return float(self.length)

    @cached_property
    def h(self) -> float:
        if self.boundary == DIRICHLET:
            return self.length / (self.n_modes + 1)
        return self.length / self.n_modes

    @cached_property
    def nodes(self) -> np.ndarray:
        j = np.arange(self.n_modes)
        if self.boundary == DIRICHLET:
            return (j + 1) * self.h
        return (j + 0.5) * self.h

    @cached_property
    def wavenumbers(self) -> np.ndarray:
        """Mode indices k: 1..n for Dirichlet, 0..n-1 for Neumann."""
        k = np.arange(self.n_modes, dtype=float)
        return k + 1 if self.boundary == DIRICHLET else k

    @cached_property
    def eigenvalues(self) -> np.ndarray:
        return (self.wavenumbers * math.pi / self.length) ** 2

    def integrate(self, values: np.ndarray) -> np.ndarray:
        """Quadrature of nodal values over the interval (last axis)."""
        return self.h * np.sum(values, axis=-1)


def eigenpairs(dom: Domain1D):
    """Eigenvalues mu_k and eigenfunctions e_k sampled at the nodes.

    Returns ``(mu, basis)`` with ``basis[:, i]`` the i-th eigenfunction.
    """
    x = dom.nodes[:, None]
    arg = dom.wavenumbers[None, :] * math.pi * x / dom.length
    if dom.boundary == DIRICHLET:
        basis = math.sqrt(2.0 / dom.length) * np.sin(arg)
    else:
        basis = math.sqrt(2.0 / dom.length) * np.cos(arg)
        basis[:, 0] = math.sqrt(1.0 / dom.length)
    return dom.eigenvalues.copy(), basis


def _analyze(values: np.ndarray, dom: Domain1D) -> np.ndarray:
    scale = math.sqrt(dom.h)
    if dom.boundary == DIRICHLET:
        return scale * scipy.fft.dst(values, type=1, norm="ortho", axis=-1)
    return scale * scipy.fft.dct(values, type=2, norm="ortho", axis=-1)


def _synthesize(coeffs: np.ndarray, dom: Domain1D) -> np.ndarray:
    scale = 1.0 / math.sqrt(dom.h)
    if dom.boundary == DIRICHLET:
        return scale * scipy.fft.idst(coeffs, type=1, norm="ortho", axis=-1)
    return scale * scipy.fft.idct(coeffs, type=2, norm="ortho", axis=-1)


class Field:
    """A profile on a :class:`Domain1D` held as nodal values and/or eigen-coefficients.

    Whichever representation was set last is authoritative; the other one is
    recomputed on first access and cached. Batches are allowed: the last axis
    indexes nodes (or modes).
    """

    def __init__(self, dom: Domain1D, *, nodal=None, coeffs=None):
        if (nodal is None) == (coeffs is None):
            raise ValueError("give exactly one of nodal or coeffs")
        self.dom = dom
        self._nodal = None
        self._coeffs = None
        if nodal is not None:
            self.nodal = nodal
        else:
            self.coeffs = coeffs

    @classmethod
    def from_nodal(cls, dom, values):
        return cls(dom, nodal=values)

    @classmethod
    def from_coeffs(cls, dom, coeffs):
        return cls(dom, coeffs=coeffs)

    @classmethod
    def from_function(cls, dom, func):
        return cls(dom, nodal=func(dom.nodes))

    def _check(self, arr):
        arr = np.array(arr, dtype=float)
        if arr.shape[-1] != self.dom.n_modes:
            raise ValueError(f"expected last axis of length {self.dom.n_modes}, got {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("field values must be finite")
        return arr

    @property
    def nodal(self) -> np.ndarray:
        if self._nodal is None:
            self._nodal = _synthesize(self._coeffs, self.dom)
        return self._nodal

    @nodal.setter
    def nodal(self, values):
        self._nodal = self._check(values)
        self._coeffs = None

    @property
    def coeffs(self) -> np.ndarray:
        if self._coeffs is None:
            self._coeffs = _analyze(self._nodal, self.dom)
        return self._coeffs

    @coeffs.setter
    def coeffs(self, values):
        self._coeffs = self._check(values)
        self._nodal = None

    def copy(self) -> "Field":
        if self._nodal is not None:
            return Field(self.dom, nodal=self._nodal.copy())
        return Field(self.dom, coeffs=self._coeffs.copy())

    def integral(self):
        return self.dom.integrate(self.nodal)

    def l2_norm(self):
        return np.sqrt(np.sum(self.coeffs**2, axis=-1))

    def linf_norm(self):
        return np.max(np.abs(self.nodal), axis=-1)

    def __repr__(self):
        return f"Field(n={self.dom.n_modes}, boundary={self.dom.boundary})"


def analyze(field: Field, dom: Domain1D | None = None) -> np.ndarray:
    """Coefficients w_n = int w e_n dx via the fast sine/cosine transform."""
    if dom is not None and dom != field.dom:
        raise ValueError("field does not live on the given domain")
    return field.coeffs


def synthesize(coeffs, dom: Domain1D) -> Field:
    return Field(dom, coeffs=coeffs)


@dataclass(frozen=True)
class SpectralOperator:
    """d * (-Delta)^sigma diagonalized on the eigenbasis of ``dom``."""

    dom: Domain1D
    d: float
    sigma: float

    def __post_init__(self):
        if not self.d > 0:
            raise ValueError("diffusion coefficient must be positive")
        if not 0.0 < self.sigma <= 1.0:
            raise ValueError("sigma must lie in (0, 1]")

    @cached_property
    def multipliers(self) -> np.ndarray:
        """mu_n^sigma (zero for the Neumann constant mode)."""
        return self.dom.eigenvalues**self.sigma

    @cached_property
    def symbol(self) -> np.ndarray:
        """d * mu_n^sigma, the per-mode decay rate."""
        return self.d * self.multipliers


def apply_spectral_flaplacian(field: Field, op: SpectralOperator) -> Field:
    """(-Delta)^sigma w = sum mu_n^sigma w_n e_n (without the factor d)."""
    if field.dom != op.dom:
        raise ValueError("operator and field live on different domains")
    return Field(field.dom, coeffs=op.multipliers * field.coeffs)


def sobolev_seminorm(field: Field, sigma: float):
    """sum mu_n^sigma w_n^2, i.e. the squared L2 norm of (-Delta)^(sigma/2) w."""
    mult = field.dom.eigenvalues**sigma
    return np.sum(mult * field.coeffs**2, axis=-1)


def riesz_weights(sigma: float, count: int) -> np.ndarray:
    """Fractional centered-difference weights g_0..g_{count-1}.

    g_k = (-1)^k Gamma(2 sigma + 1) / (Gamma(sigma - k + 1) Gamma(sigma + k + 1)),
    generated by the ratio recurrence g_{k+1} = g_k (k - sigma) / (k + sigma + 1).
    At sigma = 1 they reduce to the (2, -1, 0, ...) Laplacian stencil.
    """
    g = np.empty(count)
    g[0] = math.gamma(2.0 * sigma + 1.0) / math.gamma(sigma + 1.0) ** 2
    for k in range(count - 1):
        g[k + 1] = g[k] * (k - sigma) / (k + sigma + 1.0)
    return g


def apply_riesz_flaplacian(field: Field, sigma: float, dom: Domain1D | None = None) -> Field:
    """Riesz (-Delta)^sigma by fractional centered differences, zero exterior data."""
    dom = field.dom if dom is None else dom
    if not 0.0 < sigma < 1.0:
        raise ValueError(f"Riesz order sigma={sigma} outside (0, 1)")
    if dom.boundary != DIRICHLET:
        raise ValueError("the Riesz operator needs the Dirichlet (zero exterior) condition")
    g = riesz_weights(sigma, dom.n_modes) * dom.h ** (-2.0 * sigma)
    values = linalg.matmul_toeplitz(g, field.nodal.T).T
    return Field(dom, nodal=values)


def random_nonnegative_field(dom: Domain1D, rng: np.random.Generator, degree: int = 6,
                             sup: float | None = None, offset: float = 0.0) -> Field:
    """Random nonnegative field that is exactly representable on ``dom``.

    Neumann: g(x)^2 + offset with g a random cosine polynomial of the given
    degree. Dirichlet: sin(pi x/L) g(x)^2 (no offset, the field has to vanish
    at the ends). Either way the result is band-limited to ``2 degree + 1``
    modes, so spectral evolution keeps it exact. ``sup`` rescales the nodal
    maximum.
    """
    if 2 * degree + 1 >= dom.n_modes:
        raise ValueError("degree too high for the number of modes")
    x = dom.nodes / dom.length
    k = np.arange(degree + 1)
    a = rng.standard_normal(degree + 1) / (1.0 + k)
    g = np.cos(np.pi * np.outer(x, k)) @ a
    values = g**2
    if dom.boundary == DIRICHLET:
        values = np.sin(np.pi * x) * values
    else:
        values = values + offset
    if sup is not None:
        values = values * (sup / values.max())
    return Field(dom, nodal=values)
