"""Diffusion coefficient models with analytic first and second derivatives.

Every formula downstream needs at most sigma, sigma' and sigma''. Models are
validated at construction: positivity on a grid scan of the working domain,
and agreement of the analytic derivatives with central finite differences at
64 probe points.
"""

from dataclasses import dataclass, field
from typing import Callable, Optional, Tuple

import numpy as np

from .errors import DomainError, UnsupportedOrder

_N_PROBES = 64
_FD_RTOL = 1e-6


@dataclass(frozen=True)
class SigmaModel:
    """A positive diffusion coefficient on a finite working domain.

    Use the module-level constructors (:func:`constant`,
    :func:`sqrt_one_plus_square`, :func:`identity_channel`, :func:`custom`)
    rather than instantiating directly.
    """

    kind: str                      # 'constant' | 'sqrt1p' | 'identity' | 'custom'
    fn: Callable
    d1: Callable
    d2: Callable
    domain: Tuple[float, float]
    positivity_floor: float = 1e-12
    c: Optional[float] = None

    def __post_init__(self):
        lo, hi = self.domain
        if not lo < hi:
            raise DomainError(f"working domain [{lo}, {hi}] is empty")
        if self.positivity_floor <= 0:
            raise DomainError("positivity_floor must be > 0")
        _check_positivity(self)
        _check_derivatives(self)

    def __call__(self, x, order=0):
        return eval_sigma(self, x, order)


def eval_sigma(model, x, order=0):
    """Evaluate sigma (order 0), sigma' (1) or sigma'' (2) at x.

    x may be a scalar or an array; the result matches the input shape.
    """
    if order not in (0, 1, 2):
        raise UnsupportedOrder(f"derivative order {order} not available (max 2)")
    arr = np.asarray(x, dtype=float)
    lo, hi = model.domain
    if np.any(arr < lo) or np.any(arr > hi):
        raise DomainError(f"x outside working domain [{lo}, {hi}]")
    out = (model.fn, model.d1, model.d2)[order](arr)
    out = np.broadcast_to(np.asarray(out, dtype=float), arr.shape)
    if np.ndim(x) == 0:
        return float(out)
    return out.copy()


def constant(c, domain=(-1e9, 1e9), positivity_floor=1e-12):
    """sigma(x) = c > 0."""
    c = float(c)
    return SigmaModel(
        kind="constant",
        fn=lambda x: np.full_like(np.asarray(x, float), c),
        d1=lambda x: np.zeros_like(np.asarray(x, float)),
        d2=lambda x: np.zeros_like(np.asarray(x, float)),
        domain=(float(domain[0]), float(domain[1])),
        positivity_floor=positivity_floor,
        c=c,
    )


def identity_channel(domain=(-1e9, 1e9), positivity_floor=1e-12):
    """sigma(x) = 1, the identity channel dX = dB^H."""
    m = constant(1.0, domain=domain, positivity_floor=positivity_floor)
    object.__setattr__(m, "kind", "identity")
    return m


def sqrt_one_plus_square(domain=(-1e9, 1e9), positivity_floor=1e-12):
    """sigma(x) = sqrt(1 + x^2).

    Canonical nonconstant test case: its flow has the closed form sinh, so
    every downstream quantity has an independent oracle.
    """
    return SigmaModel(
        kind="sqrt1p",
        fn=lambda x: np.sqrt(1.0 + np.asarray(x, float) ** 2),
        d1=lambda x: np.asarray(x, float) / np.sqrt(1.0 + np.asarray(x, float) ** 2),
        d2=lambda x: (1.0 + np.asarray(x, float) ** 2) ** -1.5,
        domain=(float(domain[0]), float(domain[1])),
        positivity_floor=positivity_floor,
    )


def custom(fn, d1, d2, domain, positivity_floor=1e-12):
    """User-supplied sigma with analytic first and second derivatives.

    Analytic derivative callbacks are mandatory; a finite-difference fallback
    would pollute the Fokker-Planck residuals downstream.
    """
    if d1 is None or d2 is None:
        raise DomainError("custom sigma requires analytic d1 and d2 callbacks")
    return SigmaModel(
        kind="custom", fn=fn, d1=d1, d2=d2,
        domain=(float(domain[0]), float(domain[1])),
        positivity_floor=positivity_floor,
    )


def _probe_points(domain, n):
    lo, hi = domain
    # Compress huge domains through asinh so probes also cover the center.
    if hi - lo > 1e4:
        u = np.linspace(np.arcsinh(lo), np.arcsinh(hi), n)
        return np.sinh(u)
    return np.linspace(lo, hi, n)


def _check_positivity(model):
    xs = _probe_points(model.domain, 257)
    vals = np.asarray(model.fn(xs), dtype=float)
    if np.any(vals < model.positivity_floor):
        bad = xs[np.argmin(vals)]
        raise DomainError(
            f"sigma({bad:g}) = {np.min(vals):g} below positivity floor "
            f"{model.positivity_floor:g}"
        )


def _check_derivatives(model):
    xs = _probe_points(model.domain, _N_PROBES)
    scale = 1.0 + np.abs(xs)
    h1 = 1e-6 * scale
    h2 = 1e-4 * scale
    lo, hi = model.domain
    inner = (xs - 2 * h2 >= lo) & (xs + 2 * h2 <= hi)
    xs, h1, h2, scale = xs[inner], h1[inner], h2[inner], scale[inner]

    f = lambda x: np.asarray(model.fn(x), dtype=float)
    fd1 = (f(xs + h1) - f(xs - h1)) / (2 * h1)
    fd2 = (f(xs + h2) - 2 * f(xs) + f(xs - h2)) / h2 ** 2
    a1 = np.asarray(model.d1(xs), dtype=float)
    a2 = np.asarray(model.d2(xs), dtype=float)
    err1 = np.max(np.abs(fd1 - a1) / (1.0 + np.abs(a1)))
    err2 = np.max(np.abs(fd2 - a2) / (1.0 + np.abs(a2)))
    if err1 > _FD_RTOL or err2 > _FD_RTOL:
        raise DomainError(
            f"analytic derivatives disagree with finite differences "
            f"(rel err d1={err1:.2e}, d2={err2:.2e})"
        )
