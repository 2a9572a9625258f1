"""Selberg zeta products over enumerated length spectra.

Everything is returned as a logarithm; products over hundreds of classes
under/overflow long before the log does.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import integrate

from .errors import ConvergenceWarning, DomainError, FitError, InsufficientData
from .fitting import FitReport, fit_power_law
from .specfun import log1m_exp, log1m_exp_complex
from .wordlang import DeltaEstimate, SurfaceSpec, estimate_delta, length_spectrum

DELTA_MARGIN = 0.05
DEFAULT_MAX_LENGTH = 10.0


@dataclass(frozen=True)
class SpectralPoint:
    s: complex
    trunc_k: int = 1
    tail_tol: float = 1e-12

    def __post_init__(self):
        object.__setattr__(self, "s", complex(self.s))
        if not self.s.real > 0:
            raise DomainError(f"need Re s > 0, got {self.s}")
        if self.trunc_k < 1 or not self.tail_tol > 0:
            raise DomainError("trunc_k must be >= 1 and tail_tol > 0")


@dataclass
class ZetaValue:
    log_value: complex
    tail_bound: float
    classes_used: int
    length_cutoff: float
    warnings: list[str] = field(default_factory=list)
    delta: float | None = None


def _tail_after(l_c: float, sigma: float, k: int) -> float:
    """Bound 2 sum_{j>k} r_j/(1-r_j), r_j = e^{-(sigma+j) l_c}, on the dropped factors."""
    r = math.exp(-(sigma + k + 1) * l_c)
    return 2.0 * r / ((-math.expm1(-l_c)) * (1.0 - r))


# the truncation targets tail_tol / TAIL_MARGIN so that the final rounding of
# a large log (ulp(300) ~ 6e-14) cannot push an observed change past tail_tol
TAIL_MARGIN = 4.0


def truncation_index(l_c: float, p: SpectralPoint) -> tuple[int, float]:
    """(K, tail): keep k = 0..K; the omitted factors change the log by at most tail."""
    if not l_c > 0:
        raise DomainError("geodesic length must be positive")
    sigma = p.s.real
    tol = p.tail_tol / TAIL_MARGIN
    q = -math.expm1(-l_c)
    r_star = tol * q / (2.0 + tol * q)
    k = max(0, math.ceil(-math.log(r_star) / l_c - sigma - 1.0))
    while k > 0 and _tail_after(l_c, sigma, k - 1) < tol:
        k -= 1
    while _tail_after(l_c, sigma, k) >= tol:
        k += 1
    k = max(k, p.trunc_k)
    return k, _tail_after(l_c, sigma, k)


def local_factor_log(l_c: float, p: SpectralPoint) -> complex:
    """log z(l_c, s) = 2 sum_k log(1 - e^{-(s+k) l_c}), truncated per truncation_index."""
    k, _ = truncation_index(l_c, p)
    ks = np.arange(k + 1, dtype=float)
    if p.s.imag == 0.0:
        terms = log1m_exp((p.s.real + ks) * l_c)
        return complex(2.0 * math.fsum(terms))
    terms = log1m_exp_complex((p.s + ks) * l_c)
    return complex(2.0 * math.fsum(terms.real), 2.0 * math.fsum(terms.imag))


def _tail_estimate(est: DeltaEstimate, sigma: float, cutoff: float) -> float:
    """Heuristic size of the classes above cutoff, from the fitted counting law."""
    if est.delta <= 0:
        return 0.0
    if sigma <= est.delta:
        return math.inf
    d = est.delta
    c = math.exp(est.log_c)

    def integrand(t):
        density = c * math.exp((d - sigma) * t) * (d * t - 1.0) / (d * t * t)
        return 2.0 * density / ((-math.expm1(-t)) * (-math.expm1(-sigma * t)))

    val, _ = integrate.quad(integrand, cutoff, math.inf, limit=200)
    return max(val, 0.0)


def _delta_for(spec: SurfaceSpec) -> DeltaEstimate | None:
    try:
        return estimate_delta(spec)
    except InsufficientData:
        return None


def _regime_warnings(spec: SurfaceSpec, s: complex, est: DeltaEstimate | None) -> list[str]:
    out = []
    if est is None:
        out.append("convergence: exponent of convergence unavailable; regime unchecked")
    elif s.real <= est.delta + DELTA_MARGIN:
        out.append(
            f"convergence: Re s = {s.real:.6g} <= delta + {DELTA_MARGIN} "
            f"(delta ~ {est.delta:.4f}); product/series not absolutely convergent"
        )
    for msg in out:
        warnings.warn(f"{spec.label()}: {msg}", ConvergenceWarning, stacklevel=3)
    return out


def selberg_zeta_log(
    spec: SurfaceSpec,
    p: SpectralPoint,
    max_word_len: int | None = None,
    max_length: float = DEFAULT_MAX_LENGTH,
    *,
    exclude: Sequence[tuple[int, ...]] = (),
) -> ZetaValue:
    """log Z(s) over primitive classes of length <= max_length.

    Summation runs in the spectrum's sorted order, so the result is
    deterministic.  tail_bound is heuristic: the fitted counting law
    integrated against the local-factor bound above the cutoff.
    """
    est = _delta_for(spec)
    warn = _regime_warnings(spec, p.s, est)
    if max_length <= 0:
        return ZetaValue(0j, 0.0, 0, max_length, warn, est.delta if est else None)
    classes = length_spectrum(spec, float(max_length), max_word_len)
    skip = set(exclude)
    re_parts, im_parts = [], []
    used = 0
    for c in classes:
        if c.codes in skip:
            continue
        v = local_factor_log(c.length, p)
        re_parts.append(v.real)
        im_parts.append(v.imag)
        used += 1
    log_value = complex(math.fsum(re_parts), math.fsum(im_parts))
    trunc = sum(truncation_index(c.length, p)[1] for c in classes)
    if spec.rank == 1:
        tail = trunc
    elif est is None:
        tail = math.inf
    else:
        tail = _tail_estimate(est, p.s.real, max_length) + trunc
    if est is not None and spec.rank > 1:
        warn = warn + ["tail_bound is heuristic (counting-law fit)"]
    return ZetaValue(log_value, tail, used, float(max_length), warn, est.delta if est else None)


PINCHING_CLASS = (0,)


def weighted_quotient_log(
    spec: SurfaceSpec,
    p: SpectralPoint,
    max_word_len: int | None = None,
    max_length: float = DEFAULT_MAX_LENGTH,
) -> ZetaValue:
    """log(Z_l(s) / z_l(s)): the product over every class except the pinching one."""
    if max_length < spec.pinching_length:
        raise DomainError("length cutoff is below the pinching geodesic")
    return selberg_zeta_log(spec, p, max_word_len, max_length, exclude=(PINCHING_CLASS,))


def pinching_factor_log(spec: SurfaceSpec, p: SpectralPoint) -> complex:
    return local_factor_log(spec.pinching_length, p)


def z_ratio_log(l: float, s: complex, tail_tol: float = 1e-12) -> complex:
    """log(z_l(1-s) / z_l(s))."""
    a = local_factor_log(l, SpectralPoint(1.0 - complex(s), tail_tol=tail_tol))
    b = local_factor_log(l, SpectralPoint(s, tail_tol=tail_tol))
    return a - b


def z_ratio_exponent(s: float, l_grid: Sequence[float], max_residual: float = 1e-2) -> FitReport:
    """Measured exponent of z_l(1-s)/z_l(s) as l -> 0 (expected 4s - 2)."""
    s = complex(s)
    if s.imag != 0 or not 0 < s.real < 1:
        raise DomainError("z_ratio_exponent expects real s in (0, 1)")
    ls = [float(x) for x in l_grid]
    if len(ls) < 6:
        raise FitError("need at least 6 grid points")
    if any(not 1e-4 < x < 0.5 for x in ls):
        raise DomainError("grid must lie in (1e-4, 0.5)")
    logs = [z_ratio_log(x, s) for x in ls]
    rep = fit_power_law(ls, log_values=logs, target_alpha=4 * s - 2, max_residual=max_residual)
    rep.quantity = "z_ratio"
    rep.s = s
    return rep
