"""Funnel scattering eigenvalues and determinant assembly.

gamma_k(s) is the eigenvalue of the funnel scattering operator of a funnel
with boundary length l on the Fourier mode e^{2 pi i k t}:

    Gamma(1/2-s) Gamma((s+1+kb)/2) Gamma((s+1-kb)/2)
    ------------------------------------------------ ,  kb = 2 pi i k / l
    Gamma(s-1/2) Gamma((2-s+kb)/2) Gamma((2-s-kb)/2)
"""

from __future__ import annotations

import cmath
import csv
import math
import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DomainError, FitError, PoleError, RemovableSingularityWarning
from .fitting import FitReport, fit_power_law
from .specfun import is_gamma_pole, log_gamma

GAMMA_POLE_TOL = 1e-12
PERTURBATION = 1e-6


@dataclass(frozen=True)
class ScatteringMode:
    k: int
    l: float

    def __post_init__(self):
        if not self.l > 0:
            raise DomainError("funnel length must be positive")

    @property
    def kbar(self) -> complex:
        return complex(0.0, 2.0 * math.pi * self.k / self.l)


def _gamma_arguments(kbar: complex, s: complex) -> tuple[list[complex], list[complex]]:
    num = [0.5 - s, (s + 1 + kbar) / 2, (s + 1 - kbar) / 2]
    den = [s - 0.5, (2 - s + kbar) / 2, (2 - s - kbar) / 2]
    return num, den


def _log_ratio(num, den) -> complex:
    return sum(log_gamma(a) for a in num) - sum(log_gamma(b) for b in den)


def gamma_k(mode: ScatteringMode, s) -> complex:
    """Eigenvalue of the funnel scattering operator on mode k.

    Poles of the denominator alone give 0; a numerator pole not matched in
    the denominator raises PoleError; matched poles are removable and are
    evaluated as the average at s +- 1e-6 (with a warning).
    """
    s = complex(s)
    # gamma_k depends on k only through |k|; fixing the sign keeps
    # gamma_k and gamma_{-k} bit-identical
    kbar = ScatteringMode(abs(mode.k), mode.l).kbar
    num, den = _gamma_arguments(kbar, s)
    num_poles = [a for a in num if is_gamma_pole(a, GAMMA_POLE_TOL)]
    den_poles = [b for b in den if is_gamma_pole(b, GAMMA_POLE_TOL)]
    if len(num_poles) > len(den_poles):
        raise PoleError(f"gamma_k has a pole at s={s}: Gamma({num_poles[0]}) in the numerator")
    if len(num_poles) < len(den_poles):
        return 0j
    if num_poles:
        warnings.warn(
            f"removable singularity of gamma_k at s={s}; averaging s +- {PERTURBATION}",
            RemovableSingularityWarning,
            stacklevel=2,
        )
        vals = []
        for eps in (PERTURBATION, -PERTURBATION):
            n2, d2 = _gamma_arguments(kbar, s + eps)
            vals.append(cmath.exp(_log_ratio(n2, d2)))
        return 0.5 * (vals[0] + vals[1])
    return cmath.exp(_log_ratio(num, den))


def gamma_k_stirling(k: int, l: float, s) -> complex:
    """Large-|kbar| asymptotic of gamma_k(s):

    Gamma(1/2-s)/Gamma(s-1/2) * (pi |k| / l)^(2s-1), relative error O(l^2/k^2).
    It follows from Gamma(a+iy)/Gamma(b+iy) ~ (iy)^(a-b) applied to the
    conjugate pair of ratios, whose 1/y corrections cancel.
    """
    s = complex(s)
    y = math.pi * abs(k) / l
    return cmath.exp(log_gamma(0.5 - s) - log_gamma(s - 0.5) + (2 * s - 1) * math.log(y))


def gamma_k_degeneration(k: int, s, l_grid: Sequence[float], monotone_tol: float = 1e-3) -> FitReport:
    """|gamma_k(s)| along a decreasing l grid, fitted as C l^alpha.

    The Stirling oracle predicts alpha = 1 - 2 Re s; the report carries the
    table of measured and oracle values under extra["table"].
    """
    if k == 0:
        raise DomainError("k must be non-zero")
    s = complex(s)
    if not s.real > 0.5:
        raise DomainError("gamma_k_degeneration needs Re s > 1/2")
    ls = [float(x) for x in l_grid]
    if any(b >= a for a, b in zip(ls, ls[1:])):
        raise DomainError("l grid must be strictly decreasing")
    mags = [abs(gamma_k(ScatteringMode(k, l), s)) for l in ls]
    oracle = [abs(gamma_k_stirling(k, l, s)) for l in ls]
    # |gamma_k| grows as l -> 0 when Re s > 1/2
    for a, b in zip(mags, mags[1:]):
        if b < a * (1.0 - monotone_tol):
            raise FitError("|gamma_k| is not monotone along the grid")
    rep = fit_power_law(ls, mags, target_alpha=complex(1 - 2 * s.real))
    rep.quantity = "gamma_mode"
    rep.s = s
    rep.extra["k"] = k
    rep.extra["table"] = [
        {"l": l, "abs_gamma": m, "stirling": o, "rel_diff": abs(m - o) / o} for l, m, o in zip(ls, mags, oracle)
    ]
    return rep


def tau_limit_target(s) -> complex:
    """1 / (2 sin^2(pi s / 2)), the small-l limit of the relative scattering determinant."""
    s = complex(s)
    if s.imag == 0 and s.real % 2.0 == 0.0:
        raise PoleError(f"sin(pi s/2) vanishes at s={s}")
    sn = cmath.sin(0.5 * math.pi * s)
    if sn == 0:
        raise PoleError(f"sin(pi s/2) vanishes at s={s}")
    out = 1.0 / (2.0 * sn * sn)
    return complex(out)


@dataclass(frozen=True)
class DeterminantValue:
    value: complex
    log_value: complex
    factors_used: int
    remainder: float | None = None


def rel_det_partial(
    increments: Sequence[complex], cap: int | None = None, tail_bound: float | None = None
) -> DeterminantValue:
    """prod_{k <= cap} (1 + lambda_k), accumulated as a sum of logs.

    The factors are sorted before accumulation and the sums are exactly
    rounded, so the result does not depend on the order of the input.
    remainder is sum_{k > cap} |lambda_k| over the supplied increments plus
    tail_bound, when the caller provides one.
    """
    lam = [complex(x) for x in increments]
    use = lam if cap is None else lam[:cap]
    rest = [] if cap is None else lam[cap:]
    for x in use:
        if abs(1.0 + x) <= 1e-14:
            raise DomainError(f"factor 1 + lambda vanishes for lambda={x}")
    logs = [complex(np.log1p(np.complex128(x))) for x in sorted(use, key=lambda c: (c.real, c.imag))]
    log_value = complex(math.fsum(v.real for v in logs), math.fsum(v.imag for v in logs))
    remainder = None
    if tail_bound is not None:
        remainder = math.fsum(abs(x) for x in rest) + float(tail_bound)
    return DeterminantValue(cmath.exp(log_value), log_value, len(use), remainder)


MODE_TABLE_COLUMNS = ("k", "l", "s_re", "s_im", "gamma_re", "gamma_im", "abs_gamma")


def mode_table(ks: Sequence[int], ls: Sequence[float], ss: Sequence[complex]) -> list[tuple]:
    """Rows (k, l, s_re, s_im, gamma_re, gamma_im, abs_gamma), ordered k, l, s as given."""
    rows = []
    for k in ks:
        for l in ls:
            for s in ss:
                g = gamma_k(ScatteringMode(int(k), float(l)), s)
                s = complex(s)
                rows.append((int(k), float(l), s.real, s.imag, g.real, g.imag, abs(g)))
    return rows


def write_mode_table(rows, fh) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(MODE_TABLE_COLUMNS)
    for r in rows:
        w.writerow([r[0]] + [format(x, ".17g") for x in r[1:]])
