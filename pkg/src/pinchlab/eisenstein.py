"""Hyperbolic and cusp Eisenstein series as coset sums over word-length shells."""

from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import ConvergenceWarning, DomainError
from .moebius import HPoint, Isometry, Kind, apply_array, classify
from .specfun import complex_pow
from .wordlang import SurfaceSpec, coset_shells, word_shells
from .zeta import (
    DEFAULT_MAX_LENGTH,
    SpectralPoint,
    ZetaValue,
    _delta_for,
    _regime_warnings,
    weighted_quotient_log,
)

DEFAULT_WORD_LEN = 8
STALL_SHELLS = 3
TAIL_RTOL = 1e-3


@dataclass
class EisensteinValue:
    value: complex
    terms_used: int
    tail_indicator: float
    shell_sums: list[complex] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)


def _as_point(z) -> HPoint:
    if isinstance(z, HPoint):
        return z
    if isinstance(z, complex):
        return HPoint(z.real, z.imag)
    x, y = z
    return HPoint(float(x), float(y))


def _shell_sum(terms: np.ndarray) -> complex:
    return complex(math.fsum(terms.real), math.fsum(terms.imag))


def _power_terms(base: np.ndarray, s: complex) -> np.ndarray:
    # base in (0, 1]; exp(s log base) with the real log branch
    return np.exp(s * np.log(base))


def _stall_warning(shells: list[complex]) -> str | None:
    mags = [abs(v) for v in shells[1:]]
    run = 0
    for prev, cur in zip(mags, mags[1:]):
        run = run + 1 if cur >= prev and cur > 0 else 0
        if run >= STALL_SHELLS:
            return f"convergence: {STALL_SHELLS} consecutive non-decreasing shells"
    return None


def _summarize(shells: list[complex], terms: int, max_word_len: int, extra: list[str]) -> EisensteinValue:
    value = complex(math.fsum(v.real for v in shells), math.fsum(v.imag for v in shells))
    tail = abs(shells[max_word_len]) if len(shells) > max_word_len else 0.0
    warn = list(extra)
    stall = _stall_warning(shells)
    if stall:
        warn.append(stall)
        warnings.warn(stall, ConvergenceWarning, stacklevel=3)
    if value != 0 and tail > TAIL_RTOL * abs(value):
        warn.append(f"truncation: last shell is {tail / abs(value):.3g} of the total")
    return EisensteinValue(value, terms, tail, shells, warn)


def hyperbolic_eisenstein(
    spec: SurfaceSpec, z, p: SpectralPoint, max_word_len: int = DEFAULT_WORD_LEN
) -> EisensteinValue:
    """E_l(z, s) = sum over <g1>\\Gamma of sin(theta(gamma z))^s.

    theta is the angle at 0 between gamma z and the real axis, so the
    identity coset contributes y/|z| and points on the axis of g1 give 1.
    """
    z = _as_point(z)
    w = complex(z)
    extra = _regime_warnings(spec, p.s, _delta_for(spec)) if spec.rank > 1 else []
    shells: list[complex] = []
    terms = 0
    for _, mats in coset_shells(spec, max_word_len):
        pts = apply_array(mats, w)
        sines = pts.imag / np.abs(pts)
        shells.append(_shell_sum(_power_terms(sines, p.s)))
        terms += len(mats)
    while len(shells) <= max_word_len:
        shells.append(0j)
    return _summarize(shells, terms, max_word_len, extra)


def cusp_eisenstein(
    generators: Sequence[Isometry],
    scaling: Isometry,
    z,
    p: SpectralPoint,
    max_word_len: int = DEFAULT_WORD_LEN,
) -> EisensteinValue:
    """E_a(z, s) = sum over Gamma_a\\Gamma of Im(scaling^-1 gamma z)^s.

    generators[0] generates the cusp stabilizer Gamma_a and must be
    parabolic with scaling^-1 generators[0] scaling fixing infinity.  The
    group is treated as free on the given generators; coset
    representatives are the reduced words not starting with generators[0]^{+-1}.
    """
    z = _as_point(z)
    cusp = generators[0]
    if classify(cusp) is not Kind.PARABOLIC:
        raise DomainError("cusp stabilizer generator must be parabolic")
    conj = scaling.inverse() @ cusp @ scaling
    if abs(conj.c) > 1e-10:
        raise DomainError("scaling matrix does not send the cusp to infinity")
    extra = []
    if p.s.real <= 1.0:
        msg = f"convergence: Re s = {p.s.real:.6g} <= 1, cusp series not guaranteed to converge"
        extra.append(msg)
        warnings.warn(msg, ConvergenceWarning, stacklevel=2)
    letters = []
    for g in generators:
        letters.append(g.as_array())
        letters.append(g.inverse().as_array())
    letters = np.array(letters)
    sinv = scaling.inverse().as_array()
    w = complex(z)
    shells: list[complex] = []
    terms = 0
    for _, mats in word_shells(letters, max_word_len, banned_first=(0, 1)):
        pts = apply_array(np.matmul(sinv, mats), w)
        shells.append(_shell_sum(_power_terms(pts.imag, p.s)))
        terms += len(mats)
    while len(shells) <= max_word_len:
        shells.append(0j)
    return _summarize(shells, terms, max_word_len, extra)


def weighted_eisenstein(
    spec: SurfaceSpec, z, p: SpectralPoint, max_word_len: int = DEFAULT_WORD_LEN
) -> EisensteinValue:
    """l^{-s} E_l(z, s) with l the pinching length."""
    e = hyperbolic_eisenstein(spec, z, p, max_word_len)
    scale = complex_pow(spec.pinching_length, -p.s)
    return EisensteinValue(
        e.value * scale,
        e.terms_used,
        e.tail_indicator * abs(scale),
        [v * scale for v in e.shell_sums],
        e.warnings,
    )


@dataclass
class StarredValue:
    value: complex
    log_quotient: complex
    weighted: EisensteinValue
    quotient: ZetaValue
    tail_estimate: float
    warnings: list[str] = field(default_factory=list)


def starred_eisenstein(
    spec: SurfaceSpec,
    z,
    p: SpectralPoint,
    max_word_len: int = DEFAULT_WORD_LEN,
    max_length: float = DEFAULT_MAX_LENGTH,
    zeta_word_len: int | None = None,
) -> StarredValue:
    """E*_l(z, s) = (Z_l(s)/z_l(s)) l^{-s} E_l(z, s)."""
    q = weighted_quotient_log(spec, p, zeta_word_len, max_length)
    we = weighted_eisenstein(spec, z, p, max_word_len)
    factor = cmath.exp(q.log_value)
    value = factor * we.value
    # |e^{x+d} - e^x| <= |e^x| (e^{|d|} - 1) for the quotient tail
    tail = abs(factor) * we.tail_indicator + abs(value) * math.expm1(q.tail_bound) if math.isfinite(
        q.tail_bound
    ) else math.inf
    warn = list(dict.fromkeys(q.warnings + we.warnings))
    return StarredValue(value, q.log_value, we, q, tail, warn)
