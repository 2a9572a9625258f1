"""Complex special functions: log-Gamma, real-base complex powers, log(1 - e^-x).

log_gamma follows the analytic branch of log Gamma (the same branch as
``scipy.special.loggamma`` and ``mpmath.loggamma``): it is continuous on
C minus the non-positive real axis and agrees with the real log on the
positive axis.  Its exponential is Gamma everywhere off the poles.

Coefficients of the Stirling series are B_{2n} / (2n (2n - 1)) for
n = 1..12, with B_{2n} the Bernoulli numbers (Abramowitz & Stegun 6.1.40,
23.2).  The series is only used for |z| >= 20 with Re z >= 1/2, where the
first omitted term is below 1e-25 in absolute value; smaller arguments are
shifted upward with Gamma(z+1) = z Gamma(z) and arguments with Re z < 1/2
go through the reflection formula.
"""

from __future__ import annotations

import cmath
import math
from fractions import Fraction

import numpy as np

from .errors import DomainError, PoleError

_BERNOULLI_2N = [
    Fraction(1, 6),
    Fraction(-1, 30),
    Fraction(1, 42),
    Fraction(-1, 30),
    Fraction(5, 66),
    Fraction(-691, 2730),
    Fraction(7, 6),
    Fraction(-3617, 510),
    Fraction(43867, 798),
    Fraction(-174611, 330),
    Fraction(854513, 138),
    Fraction(-236364091, 2730),
]
_STIRLING = [float(b / ((2 * n) * (2 * n - 1))) for n, b in enumerate(_BERNOULLI_2N, start=1)]

_STIRLING_MIN_ABS = 20.0
_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)
_LOG_PI = math.log(math.pi)
POLE_TOL = 1e-14


def _as_complex(z) -> complex:
    z = complex(z)
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise DomainError(f"non-finite argument {z!r}")
    return z


def is_gamma_pole(z: complex, tol: float = POLE_TOL) -> bool:
    z = complex(z)
    if abs(z.imag) > tol or z.real > tol:
        return False
    return abs(z.real - round(z.real)) <= tol


def _stirling(z: complex) -> complex:
    inv = 1.0 / z
    inv2 = inv * inv
    acc = 0j
    for c in reversed(_STIRLING):
        acc = acc * inv2 + c
    return (z - 0.5) * cmath.log(z) - z + _HALF_LOG_2PI + acc * inv


def _log_gamma_right(z: complex) -> complex:
    # Re z >= 1/2: every z + k stays in the right half-plane, so the sum of
    # principal logs is the analytic log of the shift product.
    shift = 0j
    while abs(z) < _STIRLING_MIN_ABS:
        shift += cmath.log(z)
        z += 1.0
    return _stirling(z) - shift


def _log_sinpi(z: complex) -> complex:
    """Principal log of sin(pi z) without overflow for large |Im z|."""
    x, y = z.real, z.imag
    if y < 0:
        return _log_sinpi(z.conjugate()).conjugate()
    r = math.remainder(x, 2.0)  # sin(pi z) has period 2 in x
    if y <= 20.0:
        pr, py = math.pi * r, math.pi * y
        val = complex(math.sin(pr) * math.cosh(py), math.cos(pr) * math.sinh(py))
        return cmath.log(val)
    # sin(pi z) = (i/2) e^{-i pi z} (1 - e^{2 pi i z}), |e^{2 pi i z}| <= e^{-40 pi}
    small = cmath.exp(complex(-2.0 * math.pi * y, 2.0 * math.pi * r))
    val = complex(math.pi * y - math.log(2.0), 0.5 * math.pi - math.pi * r)
    val += cmath.log(1.0 - small)
    im = math.remainder(val.imag, 2.0 * math.pi)
    if im == -math.pi:
        im = math.pi
    return complex(val.real, im)


def log_gamma(z) -> complex:
    """Analytic-branch log Gamma of a complex argument.

    Raises PoleError on non-positive integers (within 1e-14).
    """
    z = _as_complex(z)
    if is_gamma_pole(z):
        raise PoleError(f"Gamma has a pole at {z!r}")
    if z.real >= 0.5:
        return _log_gamma_right(z)
    # Reflection with the branch correction of Hare (1997), so that the
    # result stays continuous across the left half-plane.
    turn = math.copysign(2.0 * math.pi, z.imag) * math.floor(0.5 * z.real + 0.25)
    return complex(_LOG_PI, turn) - _log_sinpi(z) - _log_gamma_right(1.0 - z)


def gamma(z) -> complex:
    return cmath.exp(log_gamma(z))


def complex_pow(base, s):
    """base**s = exp(s log base) for real positive base (scalars or arrays)."""
    b = np.asarray(base)
    if np.iscomplexobj(b):
        if np.any(b.imag != 0):
            raise DomainError("complex_pow needs a real base")
        b = b.real
    b = b.astype(float)
    if np.any(~(b > 0)):
        raise DomainError("complex_pow needs a positive base")
    out = np.exp(complex(s) * np.log(b))
    if np.ndim(out) == 0:
        return complex(out)
    return out


def log1m_exp(x):
    """log(1 - exp(-x)) for x > 0, accurate to a few ulps.

    Accepts scalars or arrays.
    """
    a = np.asarray(x, dtype=float)
    if np.any(~(a > 0)):
        raise DomainError("log1m_exp needs x > 0")
    near = a <= math.log(2.0)
    out = np.where(
        near,
        np.log(-np.expm1(-np.where(near, a, 1.0))),
        np.log1p(-np.exp(-np.where(near, 1.0, a))),
    )
    if out.ndim == 0:
        return float(out)
    return out


def log1m_exp_complex(w):
    """Principal log(1 - exp(-w)) for complex w with Re w > 0 (arrays)."""
    w = np.asarray(w, dtype=complex)
    if np.any(~(w.real > 0)):
        raise DomainError("log1m_exp_complex needs Re w > 0")
    near = w.real <= math.log(2.0)
    # |e^{-w}| >= 1/2: 1 - e^{-w} = -expm1(-w) is computed without cancellation.
    a = np.log(-np.expm1(-np.where(near, w, 1.0)))
    u = -np.exp(-np.where(near, 1.0, w))
    # log(1 + u) for |u| <= 1/2, keeping full relative accuracy as u -> 0.
    b = 0.5 * np.log1p(2.0 * u.real + (u.real * u.real + u.imag * u.imag)) + 1j * np.arctan2(
        u.imag, 1.0 + u.real
    )
    out = np.where(near, a, b)
    if out.ndim == 0:
        return complex(out)
    return out
