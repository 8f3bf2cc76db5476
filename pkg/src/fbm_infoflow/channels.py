"""Channel models and the density interface they share.

Two channel variants are supported: the multiplicative model
dX = sigma(X) o dB^H with X_0 = x0 (density by push-forward through the
Doss-Sussmann flow) and the additive model X_t = X_0 + B^H_t (closed-form
Gaussian branch, numerical convolution for grid-specified initial laws).

A DensityField bundles the density, its log-gradient (score) and domain
metadata.  Fields that are exactly Gaussian carry a (mean, variance) tag so
downstream functionals can take exact branches instead of quadrature.
"""

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Tuple

import numpy as np

from . import doss
from .errors import (
    DegenerateTimeError,
    DomainError,
    ResolutionError,
    TailError,
)
from .fbm import HurstParameter, as_hurst
from .sigma import SigmaModel

_TINY = 1e-300
_Z_STD = 8.0            # flow tabulated out to this many std of B^H_t
_FIELD_STD = 10.0       # additive field domain: mean +/- 10 std


@dataclass(frozen=True)
class InitialLaw:
    """Initial distribution of X_0 for the additive channel."""

    kind: str                                   # 'gaussian' | 'grid'
    mean: float = 0.0
    variance: float = 1.0
    grid: Optional[np.ndarray] = None           # support points, strictly increasing
    values: Optional[np.ndarray] = None         # density values on grid

    def __post_init__(self):
        if self.kind == "gaussian":
            if self.variance <= 0:
                raise DomainError("Gaussian initial law needs variance > 0")
        elif self.kind == "grid":
            g = np.asarray(self.grid, dtype=float)
            v = np.asarray(self.values, dtype=float)
            if g.ndim != 1 or g.shape != v.shape or g.size < 8:
                raise DomainError("grid initial law needs matching 1-d arrays (>= 8 points)")
            if np.any(np.diff(g) <= 0):
                raise DomainError("grid must be strictly increasing")
            if np.any(v < 0):
                raise DomainError("grid density must be nonnegative")
            mass = np.trapezoid(v, g)
            if abs(mass - 1.0) > 1e-8:
                raise DomainError(f"grid density integrates to {mass:.10g}, not 1")
            object.__setattr__(self, "grid", g)
            object.__setattr__(self, "values", v)
        else:
            raise DomainError(f"unknown initial law kind {self.kind!r}")


def gaussian_law(mean, variance):
    return InitialLaw(kind="gaussian", mean=float(mean), variance=float(variance))


def grid_law(grid, values):
    return InitialLaw(kind="grid", grid=np.asarray(grid, float),
                      values=np.asarray(values, float))


@dataclass
class ChannelSpec:
    """Either a multiplicative channel (sigma, x0) or an additive one (initial law)."""

    variant: str                       # 'multiplicative' | 'additive'
    hurst: HurstParameter
    sigma: Optional[SigmaModel] = None
    x0: Optional[float] = None
    initial: Optional[InitialLaw] = None
    _phi_cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        self.hurst = as_hurst(self.hurst)
        if self.variant == "multiplicative":
            if self.sigma is None or self.x0 is None:
                raise DomainError("multiplicative channel needs sigma and x0")
        elif self.variant == "additive":
            if self.initial is None:
                raise DomainError("additive channel needs an initial law")
        else:
            raise DomainError(f"unknown channel variant {self.variant!r}")


def multiplicative(sigma, x0, hurst):
    return ChannelSpec(variant="multiplicative", hurst=as_hurst(hurst),
                       sigma=sigma, x0=float(x0))


def additive(initial, hurst):
    return ChannelSpec(variant="additive", hurst=as_hurst(hurst), initial=initial)


@dataclass(frozen=True)
class DensityField:
    """A one-dimensional density with evaluator, score and domain metadata."""

    lo: float
    hi: float
    pdf: Callable = field(repr=False)
    score_fn: Callable = field(repr=False)
    mass_tolerance: float = 1e-8
    gaussian: Optional[Tuple[float, float]] = None   # (mean, variance) if exact
    breakpoints: Tuple[float, ...] = ()               # quadrature hints


def gaussian_field(mean, variance, mass_tolerance=1e-8):
    mean, variance = float(mean), float(variance)
    if variance <= 0:
        raise DomainError("Gaussian field needs variance > 0")
    sd = math.sqrt(variance)

    def pdf(x):
        x = np.asarray(x, dtype=float)
        out = np.exp(-0.5 * (x - mean) ** 2 / variance) / math.sqrt(2 * math.pi * variance)
        return float(out) if out.ndim == 0 else out

    def score(x):
        x = np.asarray(x, dtype=float)
        out = -(x - mean) / variance
        return float(out) if out.ndim == 0 else out

    brk = tuple(mean + sd * k for k in (-6.0, -4.0, -2.0, -1.0, 0.0, 1.0, 2.0, 4.0, 6.0))
    return DensityField(
        lo=mean - _FIELD_STD * sd, hi=mean + _FIELD_STD * sd,
        pdf=pdf, score_fn=score, mass_tolerance=mass_tolerance,
        gaussian=(mean, variance), breakpoints=brk,
    )


def grid_field(grid, values, mass_tolerance=1e-8):
    """DensityField from tabulated values (linear interpolation, FD score)."""
    grid = np.asarray(grid, dtype=float)
    values = np.asarray(values, dtype=float)

    def pdf(x):
        x = np.asarray(x, dtype=float)
        out = np.interp(x, grid, values, left=0.0, right=0.0)
        return float(out) if out.ndim == 0 else out

    h = np.min(np.diff(grid))

    def score(x):
        x = np.asarray(x, dtype=float)
        f0 = np.maximum(pdf(x), _TINY)
        fp = np.maximum(pdf(np.minimum(x + h, grid[-1])), _TINY)
        fm = np.maximum(pdf(np.maximum(x - h, grid[0])), _TINY)
        out = (np.log(fp) - np.log(fm)) / (2 * h)
        return float(out) if out.ndim == 0 else out

    return DensityField(
        lo=float(grid[0]), hi=float(grid[-1]), pdf=pdf, score_fn=score,
        mass_tolerance=mass_tolerance,
        breakpoints=tuple(np.quantile(grid, [0.25, 0.5, 0.75])),
    )


def _phi_for(channel, t):
    """Cached Doss-Sussmann flow wide enough for 8 std of B^H_t."""
    z_need = _Z_STD * float(t) ** channel.hurst.value
    bucket = 2.0 ** math.ceil(math.log2(max(1.02 * z_need, 1.0)))
    key = bucket
    if key not in channel._phi_cache:
        channel._phi_cache[key] = doss.solve_phi(
            channel.sigma, channel.x0, (-bucket, bucket), tol=1e-11,
        )
    return channel._phi_cache[key]


def _multiplicative_field(channel, t):
    sig = channel.sigma
    h = channel.hurst.value
    var = float(t) ** (2.0 * h)
    if sig.kind in ("constant", "identity"):
        return gaussian_field(channel.x0, sig.c ** 2 * var)
    phi = _phi_for(channel, t)
    sd = math.sqrt(var)
    z_edge = min(_Z_STD * sd, -phi.z_domain[0], phi.z_domain[1])
    lo = float(phi(-z_edge))
    hi = float(phi(z_edge))

    def pdf(x):
        return doss.pushforward_density(phi, t, channel.hurst, x)

    def score(x):
        z = np.asarray(doss.invert_phi(phi, x), dtype=float)
        xa = np.asarray(x, dtype=float)
        s = np.asarray(sig.fn(xa), dtype=float)
        s1 = np.asarray(sig.d1(xa), dtype=float)
        out = -z / (var * s) - s1 / s
        return float(out) if out.ndim == 0 else out

    ks = np.array([-7, -5, -3, -2, -1, 0, 1, 2, 3, 5, 7], dtype=float)
    brk = tuple(float(phi(k)) for k in np.clip(ks * sd, -z_edge, z_edge))
    return DensityField(lo=lo, hi=hi, pdf=pdf, score_fn=score,
                        breakpoints=brk)


def _convolved_field(channel, t):
    law = channel.initial
    h = channel.hurst.value
    var = float(t) ** (2.0 * h)
    sd = math.sqrt(var)
    y = law.grid
    p0 = law.values
    dy = np.max(np.diff(y))
    if sd < 2.0 * dy:
        raise ResolutionError(
            f"Gaussian kernel std {sd:g} below 2 grid steps ({dy:g}); refine the grid"
        )
    norm = 1.0 / math.sqrt(2 * math.pi * var)

    def _kernel(x):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        return np.exp(-0.5 * (x[:, None] - y[None, :]) ** 2 / var) * norm

    def pdf(x):
        k = _kernel(x)
        out = np.trapezoid(k * p0[None, :], y, axis=1)
        return float(out[0]) if np.ndim(x) == 0 else out

    def dpdf(x):
        xa = np.atleast_1d(np.asarray(x, dtype=float))
        k = _kernel(xa) * (-(xa[:, None] - y[None, :]) / var)
        out = np.trapezoid(k * p0[None, :], y, axis=1)
        return float(out[0]) if np.ndim(x) == 0 else out

    def score(x):
        f = np.maximum(np.atleast_1d(pdf(np.atleast_1d(x))), _TINY)
        out = np.atleast_1d(dpdf(x)) / f
        return float(out[0]) if np.ndim(x) == 0 else out

    lo = float(y[0] - _FIELD_STD * sd)
    hi = float(y[-1] + _FIELD_STD * sd)
    brk = tuple(np.linspace(y[0] - 2 * sd, y[-1] + 2 * sd, 9))
    return DensityField(lo=lo, hi=hi, pdf=pdf, score_fn=score, breakpoints=brk)


def density_at(channel, t):
    """Law of X_t as a DensityField. Requires t > 0."""
    if t <= 0:
        raise DegenerateTimeError("density_at requires t > 0")
    if channel.variant == "multiplicative":
        return _multiplicative_field(channel, t)
    law = channel.initial
    if law.kind == "gaussian":
        var = float(t) ** (2.0 * channel.hurst.value)
        return gaussian_field(law.mean, law.variance + var)
    return _convolved_field(channel, t)


def score_at(field, x):
    """d/dx ln density at x (scalar). Raises TailError on density underflow."""
    if not field.lo <= x <= field.hi:
        raise DomainError(f"x = {x:g} outside field domain [{field.lo:g}, {field.hi:g}]")
    if field.pdf(x) <= _TINY:
        raise TailError(f"density underflow at x = {x:g}; truncate the domain")
    return float(field.score_fn(x))
