"""Complex power-law fits f(l) ~ C l^alpha along a grid of l values."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import FitError

MIN_SAMPLES = 4


@dataclass
class FitReport:
    samples: list[tuple[float, complex]]
    alpha: complex
    log_c: complex
    residual: float
    target_alpha: complex | None = None
    warnings: list[str] = field(default_factory=list)
    quantity: str = ""
    s: complex | None = None
    z: tuple[float, float] | None = None
    valid: bool = True
    extra: dict = field(default_factory=dict)

    @property
    def deviation(self) -> float | None:
        if self.target_alpha is None:
            return None
        return abs(self.alpha - self.target_alpha)


def unwrap_logs(log_values: Sequence[complex]) -> np.ndarray:
    """Remove 2 pi jumps between neighbouring imaginary parts."""
    lv = np.asarray(log_values, dtype=complex)
    return lv.real + 1j * np.unwrap(lv.imag)


def fit_power_law(
    ls: Sequence[float],
    values: Sequence[complex] | None = None,
    *,
    log_values: Sequence[complex] | None = None,
    target_alpha: complex | None = None,
    max_residual: float | None = None,
) -> FitReport:
    """Least-squares fit of log f = log C + alpha log l.

    Pass either values or (to avoid over/underflow) their logs.  The
    samples are ordered by decreasing l and the phase is unwrapped by
    continuity along that order before fitting.  residual is the RMS of
    the complex fit residuals in log space.
    """
    ls = np.asarray(ls, dtype=float)
    if (values is None) == (log_values is None):
        raise ValueError("give exactly one of values / log_values")
    if ls.size < MIN_SAMPLES:
        raise FitError(f"need at least {MIN_SAMPLES} samples, got {ls.size}")
    if np.any(ls <= 0):
        raise FitError("grid values must be positive")
    order = np.argsort(-ls, kind="stable")
    ls = ls[order]
    if values is not None:
        vals = np.asarray(values, dtype=complex)[order]
        if np.any(vals == 0) or not np.all(np.isfinite(vals)):
            raise FitError("cannot fit zero or non-finite values")
        logs = np.log(np.abs(vals)) + 1j * np.angle(vals)
        samples = [(float(a), complex(b)) for a, b in zip(ls, vals)]
    else:
        logs = np.asarray(log_values, dtype=complex)[order]
        if not np.all(np.isfinite(logs)):
            raise FitError("non-finite log values")
        samples = [(float(a), complex(b)) for a, b in zip(ls, logs)]
    logs = unwrap_logs(logs)
    x = np.log(ls)
    xm = x.mean()
    dx = x - xm
    alpha = complex(np.dot(dx, logs - logs.mean()) / np.dot(dx, dx))
    log_c = complex(logs.mean() - alpha * xm)
    res = logs - (log_c + alpha * x)
    residual = float(math.sqrt(np.mean(np.abs(res) ** 2)))
    rep = FitReport(samples, alpha, log_c, residual, target_alpha)
    if values is None:
        rep.extra["samples_are_logs"] = True
    if max_residual is not None and residual > max_residual:
        raise FitError(f"fit residual {residual:.3g} exceeds {max_residual:.3g}")
    return rep
