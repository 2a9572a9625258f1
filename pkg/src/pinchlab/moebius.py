"""Isometries of the upper half-plane as unit-determinant real 2x2 matrices."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, NotHyperbolic

DET_TOL = 1e-12
CLASSIFY_TOL = 1e-10
HYPERBOLIC_TOL = 1e-12


class Kind(enum.Enum):
    HYPERBOLIC = "hyperbolic"
    PARABOLIC = "parabolic"
    ELLIPTIC = "elliptic"
    IDENTITY = "identity"


@dataclass(frozen=True)
class HPoint:
    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)) or not self.y > 0:
            raise DomainError(f"not a point of the upper half-plane: ({self.x}, {self.y})")

    @classmethod
    def from_complex(cls, z: complex) -> "HPoint":
        return cls(z.real, z.imag)

    def __complex__(self) -> complex:
        return complex(self.x, self.y)


@dataclass(frozen=True)
class Isometry:
    """Element of PSL(2, R).

    Construction rescales to determinant 1 and picks the sign with
    non-negative trace, so g and -g are the same value.
    """

    a: float
    b: float
    c: float
    d: float

    def __post_init__(self):
        a, b, c, d = (float(v) for v in (self.a, self.b, self.c, self.d))
        det = a * d - b * c
        if not det > 0 or not math.isfinite(det):
            raise DomainError(f"matrix has non-positive determinant {det}")
        if abs(det - 1.0) > 0.0:
            r = 1.0 / math.sqrt(det)
            a, b, c, d = a * r, b * r, c * r, d * r
        if a + d < 0 or (a + d == 0 and (a, b, c, d) < (0.0, 0.0, 0.0, 0.0)):
            a, b, c, d = -a, -b, -c, -d
        for name, v in zip("abcd", (a, b, c, d)):
            object.__setattr__(self, name, v)

    @classmethod
    def identity(cls) -> "Isometry":
        return cls(1.0, 0.0, 0.0, 1.0)

    @classmethod
    def from_array(cls, m) -> "Isometry":
        m = np.asarray(m, dtype=float)
        return cls(m[0, 0], m[0, 1], m[1, 0], m[1, 1])

    @classmethod
    def translation(cls, length: float) -> "Isometry":
        """z -> e^length z, the hyperbolic translation along the imaginary axis."""
        h = 0.5 * length
        return cls(math.exp(h), 0.0, 0.0, math.exp(-h))

    def as_array(self) -> np.ndarray:
        return np.array([[self.a, self.b], [self.c, self.d]])

    @property
    def trace(self) -> float:
        return self.a + self.d

    def __matmul__(self, other: "Isometry") -> "Isometry":
        return Isometry(
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d,
        )

    __mul__ = __matmul__

    def inverse(self) -> "Isometry":
        return Isometry(self.d, -self.b, -self.c, self.a)

    def __call__(self, z: HPoint) -> HPoint:
        return apply(self, z)

    def fixed_points(self) -> tuple[float, float]:
        """(repelling, attracting) boundary fixed points of a hyperbolic element.

        math.inf stands for the point at infinity.
        """
        if classify(self) is not Kind.HYPERBOLIC:
            raise NotHyperbolic("fixed points are only defined here for hyperbolic elements")
        a, b, c, d = self.a, self.b, self.c, self.d
        t = a + d
        root = math.sqrt(t * t - 4.0)
        if c == 0.0:
            # z -> (a z + b)/d: fixed points b/(d - a) and infinity
            finite = b / (d - a)
            return (finite, math.inf) if a > d else (math.inf, finite)
        p1 = (a - d + root) / (2.0 * c)
        p2 = (a - d - root) / (2.0 * c)
        # derivative at a fixed point p is 1/(c p + d)^2; attracting when < 1
        if abs(c * p1 + d) > 1.0:
            return p2, p1
        return p1, p2


def apply(g: Isometry, z: HPoint) -> HPoint:
    w = complex(z)
    num = g.a * w + g.b
    den = g.c * w + g.d
    out = num / den
    # Im((az+b)/(cz+d)) = y / |cz+d|^2 exactly; keep it that way numerically.
    y = z.y / (den.real * den.real + den.imag * den.imag)
    assert y > 0
    return HPoint(out.real, y)


def apply_array(mats: np.ndarray, z: complex) -> np.ndarray:
    """Apply a stack of (n, 2, 2) matrices to one point; returns complex array."""
    num = mats[:, 0, 0] * z + mats[:, 0, 1]
    den = mats[:, 1, 0] * z + mats[:, 1, 1]
    out = num / den
    y = z.imag / (den.real * den.real + den.imag * den.imag)
    return out.real + 1j * y


def translation_length(g: Isometry) -> float:
    t = abs(g.trace)
    if t <= 2.0 + HYPERBOLIC_TOL:
        raise NotHyperbolic(f"|tr| = {t!r} is not > 2")
    return length_from_trace(t)


def length_from_trace(t: float) -> float:
    t = abs(t)
    if t <= 2.0:
        raise NotHyperbolic(f"|tr| = {t!r} is not > 2")
    return 2.0 * math.acosh(0.5 * t)


def trace_from_length(length: float) -> float:
    return 2.0 * math.cosh(0.5 * length)


def angle_sine(z: HPoint) -> float:
    """sin of the angle between z and the real axis, seen from 0.

    Equals 1 on the imaginary axis and 1/cosh(distance to that axis).
    """
    return z.y / math.hypot(z.x, z.y)


def classify(g: Isometry, tol: float = CLASSIFY_TOL) -> Kind:
    t = abs(g.trace)
    if abs(t - 2.0) <= tol:
        if max(abs(g.a - 1.0), abs(g.b), abs(g.c), abs(g.d - 1.0)) <= tol:
            return Kind.IDENTITY
        return Kind.PARABOLIC
    return Kind.HYPERBOLIC if t > 2.0 else Kind.ELLIPTIC


def is_near_parabolic(g: Isometry, window: float = 1e-6) -> bool:
    """Flag hyperbolic elements whose trace sits within window of 2."""
    return abs(abs(g.trace) - 2.0) <= window


def hyperbolic_distance(z: HPoint, w: HPoint) -> float:
    dx, dy = z.x - w.x, z.y - w.y
    return 2.0 * math.asinh(0.5 * math.hypot(dx, dy) / math.sqrt(z.y * w.y))


def renormalize(mats: np.ndarray) -> np.ndarray:
    """Rescale a stack of matrices back to determinant 1."""
    det = mats[..., 0, 0] * mats[..., 1, 1] - mats[..., 0, 1] * mats[..., 1, 0]
    return mats / np.sqrt(det)[..., None, None]
