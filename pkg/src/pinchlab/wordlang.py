"""Free-group words over the surface generators and the length spectrum.

Letters are signed generator indices: 1 is g1, -1 is g1^-1, 2 is g2 and so
on.  Internally words are tuples of codes 0..2r-1 with code(g_i) = 2(i-1)
and code(g_i^-1) = 2(i-1)+1, so the inverse of a code is ``c ^ 1`` and the
canonical order is a < A < b < B.
"""

from __future__ import annotations

import csv
import functools
import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

import numpy as np

from .errors import BudgetExceeded, ConstructionError, InsufficientData
from .moebius import Isometry, length_from_trace, renormalize, translation_length

LENGTH_TOL = 1e-9
DEFAULT_MAX_CLASSES = 2_000_000


# ---------------------------------------------------------------- letters


def letter_code(x: int) -> int:
    if x == 0:
        raise ValueError("0 is not a letter")
    return 2 * (abs(x) - 1) + (x < 0)


def code_letter(c: int) -> int:
    g = c // 2 + 1
    return -g if c & 1 else g


def _code_char(c: int) -> str:
    ch = chr(ord("a") + c // 2)
    return ch.upper() if c & 1 else ch


def codes_to_str(codes: Sequence[int]) -> str:
    return "".join(_code_char(c) for c in codes) or "1"


def str_to_codes(s: str) -> tuple[int, ...]:
    if s in ("", "1"):
        return ()
    return tuple(2 * (ord(ch.lower()) - ord("a")) + ch.isupper() for ch in s)


def free_reduce(codes: Iterable[int]) -> tuple[int, ...]:
    out: list[int] = []
    for c in codes:
        if out and out[-1] == c ^ 1:
            out.pop()
        else:
            out.append(c)
    return tuple(out)


def invert(codes: Sequence[int]) -> tuple[int, ...]:
    return tuple(c ^ 1 for c in reversed(codes))


def is_reduced(codes: Sequence[int]) -> bool:
    return all(codes[i + 1] != codes[i] ^ 1 for i in range(len(codes) - 1))


def is_cyclically_reduced(codes: Sequence[int]) -> bool:
    return is_reduced(codes) and (len(codes) < 2 or codes[0] != codes[-1] ^ 1)


def cyclic_reduce(codes: Sequence[int]) -> tuple[int, ...]:
    w = free_reduce(codes)
    i, j = 0, len(w)
    while j - i >= 2 and w[i] == w[j - 1] ^ 1:
        i += 1
        j -= 1
    return w[i:j]


def canonical_cyclic(codes: Sequence[int]) -> tuple[int, ...]:
    """Lexicographically least rotation of the word or of its inverse."""
    w = tuple(codes)
    if not w:
        return w
    inv = invert(w)
    n = len(w)
    return min(min(w[i:] + w[:i] for i in range(n)), min(inv[i:] + inv[:i] for i in range(n)))


def primitive_period(codes: Sequence[int]) -> int:
    """Length of the shortest p with codes == (codes[:p]) ** (n / p)."""
    n = len(codes)
    for p in range(1, n + 1):
        if n % p == 0 and all(codes[i] == codes[i % p] for i in range(n)):
            return p
    return n


def is_primitive(codes: Sequence[int]) -> bool:
    return len(codes) > 0 and primitive_period(codes) == len(codes)


@dataclass(frozen=True)
class Word:
    """Reduced word; letters are signed generator indices."""

    letters: tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "letters", tuple(int(x) for x in self.letters))
        if not is_reduced(self.codes):
            raise ValueError(f"word {self.letters} is not reduced")

    @classmethod
    def from_codes(cls, codes: Sequence[int]) -> "Word":
        return cls(tuple(code_letter(c) for c in codes))

    @classmethod
    def parse(cls, s: str) -> "Word":
        return cls.from_codes(str_to_codes(s))

    @property
    def codes(self) -> tuple[int, ...]:
        return tuple(letter_code(x) for x in self.letters)

    def __len__(self) -> int:
        return len(self.letters)

    def __str__(self) -> str:
        return codes_to_str(self.codes)

    def inverse(self) -> "Word":
        return Word(tuple(-x for x in reversed(self.letters)))

    def __mul__(self, other: "Word") -> "Word":
        return Word.from_codes(free_reduce(self.codes + other.codes))


@dataclass(frozen=True)
class ConjClass:
    """Unoriented conjugacy class of a hyperbolic element.

    Ordered by (length, canonical codes), with lengths compared at 12
    significant digits so that equal lengths up to rounding tie-break on
    the word.
    """

    length: float
    codes: tuple[int, ...]
    trace: float = field(compare=False)
    primitive: bool = field(compare=False)

    @property
    def sort_key(self) -> tuple[float, tuple[int, ...]]:
        return (float(f"{self.length:.12g}"), self.codes)

    def __lt__(self, other: "ConjClass") -> bool:
        return self.sort_key < other.sort_key

    @property
    def cyclic_word(self) -> Word:
        return Word.from_codes(self.codes)

    @property
    def word_len(self) -> int:
        return len(self.codes)

    @property
    def name(self) -> str:
        return codes_to_str(self.codes)


# ---------------------------------------------------------------- surfaces


@dataclass(frozen=True)
class SurfaceSpec:
    """Marked Schottky surface: a free group on hyperbolic generators.

    generators[0] is the translation z -> e^l z along the imaginary axis,
    i.e. the pinching element sigma_l.
    """

    boundary_lengths: tuple[float, ...]
    generators: tuple[Isometry, ...]
    euler_characteristic: int
    pinching_index: int = 0
    name: str = ""

    @property
    def rank(self) -> int:
        return len(self.generators)

    @property
    def pinching_length(self) -> float:
        return self.boundary_lengths[self.pinching_index]

    def letter_matrices(self) -> np.ndarray:
        """(2r, 2, 2) array: matrix of each letter code."""
        mats = []
        for g in self.generators:
            mats.append(g.as_array())
            mats.append(g.inverse().as_array())
        return np.array(mats)

    def word_matrix(self, word: Word | Sequence[int]) -> np.ndarray:
        codes = word.codes if isinstance(word, Word) else tuple(word)
        mats = self.letter_matrices()
        m = np.eye(2)
        for c in codes:
            m = m @ mats[c]
        return m

    def word_isometry(self, word: Word | Sequence[int]) -> Isometry:
        return Isometry.from_array(self.word_matrix(word))

    def label(self) -> str:
        return self.name or ",".join(f"{x:.17g}" for x in self.boundary_lengths)


def cyclic_model(length: float) -> SurfaceSpec:
    """Hyperbolic cylinder <sigma_l>: one generator, one closed geodesic."""
    if not length > 0:
        raise ConstructionError("length must be positive")
    return SurfaceSpec(
        boundary_lengths=(float(length),),
        generators=(Isometry.translation(length),),
        euler_characteristic=0,
        name=f"cyclic:{float(length):.17g}",
    )


def build_pants(l1: float, l2: float, l3: float) -> SurfaceSpec:
    """Three-funnel pair of pants with boundary geodesics g1, g2, g1 g2.

    g1 = diag(e^{l1/2}, e^{-l1/2}); g2 = [[a, b], [c, d]] with
    a + d = 2 cosh(l2/2) and tr(g1 g2) = a e^{l1/2} + d e^{-l1/2} = -2 cosh(l3/2).
    """
    lengths = tuple(float(x) for x in (l1, l2, l3))
    if not all(math.isfinite(x) and x > 0 for x in lengths):
        raise ConstructionError(f"boundary lengths must be positive, got {lengths}")
    u = math.exp(0.5 * lengths[0])
    t2 = 2.0 * math.cosh(0.5 * lengths[1])
    t3 = 2.0 * math.cosh(0.5 * lengths[2])
    a = -(t3 + t2 / u) / (2.0 * math.sinh(0.5 * lengths[0]))
    d = t2 - a
    m = 1.0 - a * d
    if not m > 0:
        raise ConstructionError("trace equations have no real solution")
    g1 = Isometry(u, 0.0, 0.0, 1.0 / u)
    g2 = Isometry(a, -math.sqrt(m), math.sqrt(m), d)
    spec = SurfaceSpec(lengths, (g1, g2), -1, 0, "pants:" + ",".join(f"{x:.17g}" for x in lengths))

    got = (
        translation_length(g1),
        translation_length(g2),
        length_from_trace(np.trace(g1.as_array() @ g2.as_array())),
    )
    for want, have in zip(lengths, got):
        if abs(want - have) > LENGTH_TOL * max(1.0, want):
            raise ConstructionError(f"boundary length check failed: {got} vs {lengths}")
    # raises ConstructionError if the ping-pong circles overlap
    schottky_domain(spec)
    return spec


# ------------------------------------------------------ ping-pong domain

_INF = math.inf


def _homog(p: float) -> np.ndarray:
    return np.array([1.0, 0.0]) if math.isinf(p) else np.array([p, 1.0])


def _mob_real(m: np.ndarray, x: float) -> float:
    v = m @ _homog(x)
    if abs(v[1]) <= 1e-300 * max(1.0, abs(v[0])):
        return _INF
    return v[0] / v[1]


def _to_axis_frame(rep: float, att: float) -> np.ndarray:
    """Matrix M in SL(2,R) with M(0) = rep and M(inf) = att."""
    m = np.column_stack([_homog(att), _homog(rep)])
    det = np.linalg.det(m)
    if det < 0:
        m[:, 1] *= -1.0
        det = -det
    return m / math.sqrt(det)


def _angle(x: float) -> float:
    return math.pi if math.isinf(x) else 2.0 * math.atan(x)


def _arc(start: float, mid: float, end: float) -> tuple[float, float]:
    """Closed arc of the boundary circle through three points: (start angle, extent)."""
    two_pi = 2.0 * math.pi
    s, m, e = _angle(start), _angle(mid), _angle(end)
    if (m - s) % two_pi < (e - s) % two_pi:
        return s % two_pi, (e - s) % two_pi
    return e % two_pi, (s - e) % two_pi


def _arcs_disjoint(a: tuple[float, float], b: tuple[float, float]) -> bool:
    two_pi = 2.0 * math.pi
    return (b[0] - a[0]) % two_pi > a[1] and (a[0] - b[0]) % two_pi > b[1]


def geodesic_distance(g: tuple[float, float], h: tuple[float, float]) -> float:
    """Distance between two geodesics given by boundary endpoints (0 if they meet)."""
    m = np.linalg.inv(_to_axis_frame(g[0], g[1]))
    c, d = _mob_real(m, h[0]), _mob_real(m, h[1])
    if math.isinf(c) or math.isinf(d) or c == 0.0 or d == 0.0 or c * d < 0:
        return 0.0
    t = abs(d / c)
    if t < 1.0:
        t = 1.0 / t
    if t == 1.0:
        return 0.0
    return math.acosh((t + 1.0) / (t - 1.0))


@dataclass(frozen=True)
class SchottkyDomain:
    """Ping-pong circles: circle[c] bounds disk[c]; letter c maps the outside
    of disk[c ^ 1] onto the inside of disk[c].

    transition[x, y] is the distance between circle[x ^ 1] and circle[y],
    a lower bound for the part of a closed geodesic spent between the
    letters x and y of its cyclic word.
    """

    circles: tuple[tuple[float, float], ...]
    arcs: tuple[tuple[float, float], ...]
    transition: np.ndarray = field(compare=False)

    @property
    def min_transition(self) -> float:
        t = self.transition[np.isfinite(self.transition)]
        return float(t.min())


@functools.lru_cache(maxsize=256)
def schottky_domain(spec: SurfaceSpec) -> SchottkyDomain:
    """Build and validate the ping-pong domain (raises ConstructionError)."""
    r = spec.rank
    gens = spec.generators
    fixed = [g.fixed_points() for g in gens]
    frames = [_to_axis_frame(*fp) for fp in fixed]
    lengths = [translation_length(g) for g in gens]

    foot_height = []
    for i in range(r):
        inv = np.linalg.inv(frames[i])
        if r == 1:
            foot_height.append(1.0)
            continue
        # foot of the common perpendicular to the other generator's axis
        j = 1 - i if r == 2 else None
        if j is None:
            raise ConstructionError("ping-pong domain is implemented for rank <= 2")
        p, q = (_mob_real(inv, x) for x in fixed[j])
        if math.isinf(p) or math.isinf(q) or p * q <= 0:
            raise ConstructionError("generator axes are not disjoint")
        foot_height.append(math.sqrt(p * q))

    circles: list[tuple[float, float]] = [None] * (2 * r)  # type: ignore[list-item]
    arcs: list[tuple[float, float]] = [None] * (2 * r)  # type: ignore[list-item]
    for i in range(r):
        m = frames[i]
        lo = foot_height[i] * math.exp(-0.5 * lengths[i])
        hi = foot_height[i] * math.exp(0.5 * lengths[i])
        circles[2 * i] = (_mob_real(m, hi), _mob_real(m, -hi))
        arcs[2 * i] = _arc(_mob_real(m, hi), _mob_real(m, _INF), _mob_real(m, -hi))
        circles[2 * i + 1] = (_mob_real(m, -lo), _mob_real(m, lo))
        arcs[2 * i + 1] = _arc(_mob_real(m, -lo), _mob_real(m, 0.0), _mob_real(m, lo))

    for x in range(2 * r):
        for y in range(x + 1, 2 * r):
            if not _arcs_disjoint(arcs[x], arcs[y]):
                raise ConstructionError(f"ping-pong disks {x} and {y} overlap; group not validated")

    trans = np.full((2 * r, 2 * r), np.inf)
    for x in range(2 * r):
        for y in range(2 * r):
            if y != x ^ 1:
                trans[x, y] = geodesic_distance(circles[x ^ 1], circles[y])
    return SchottkyDomain(tuple(circles), tuple(arcs), trans)


# ------------------------------------------------------------ enumeration


def _mul(m, n):
    return (
        m[0] * n[0] + m[1] * n[2],
        m[0] * n[1] + m[1] * n[3],
        m[2] * n[0] + m[3] * n[2],
        m[2] * n[1] + m[3] * n[3],
    )


def _renorm(m):
    s = 1.0 / math.sqrt(m[0] * m[3] - m[1] * m[2])
    return (m[0] * s, m[1] * s, m[2] * s, m[3] * s)


def _cosh_dist(g, h) -> float:
    """cosh of the distance between geodesics with homogeneous endpoints g, h.

    Returns 1.0 when the geodesics meet or share an endpoint.
    """
    (a0, a1), (b0, b1) = g
    (c0, c1), (d0, d1) = h
    ac = a0 * c1 - a1 * c0
    bd = b0 * d1 - b1 * d0
    ad = a0 * d1 - a1 * d0
    bc = b0 * c1 - b1 * c0
    num, den = ac * bd, ad * bc
    if num == 0.0 or den == 0.0:
        return 1.0
    x = num / den
    if x < 0:
        return 1.0
    if x > 1.0:
        x = 1.0 / x
    if x == 1.0:
        return 1.0
    return (1.0 + x) / (1.0 - x)


def _class_search(
    n_codes: int,
    first: int,
    max_word_len: int,
    max_length: float,
    letters,
    circles,
    trans,
    include_imprimitive: bool,
    max_classes: int,
):
    """Depth-first search over cyclic words whose least letter is `first`.

    Returns (codes, trace) pairs of canonical representatives.  With
    geometry (letters, circles, trans not None) a prefix a1..am is pruned
    when the axis of every cyclic word starting with it must be longer
    than max_length: the axis crosses circle[a1] and a1..a(m-1)(circle[am]),
    whose distance is dist(circle[a1^-1], a2..a(m-1)(circle[am])), and then
    needs at least one more transition to close up.
    """
    out = []
    geometric = trans is not None
    dmin = float(np.min(trans[np.isfinite(trans)])) if geometric else 0.0
    limit = max_length + LENGTH_TOL
    cosh_limit = math.cosh(min(limit - dmin, 700.0)) if geometric and limit > dmin else 1.0
    word = [first]
    anchor = circles[first ^ 1] if geometric else None

    def visit(tsum: float, mat, inner):
        # inner = a2..a(m-1) as a flat 2x2 tuple (identity for m <= 2)
        last = word[-1]
        n = len(word)
        if last != first ^ 1:
            close = tsum + (trans[last, first] if geometric else 0.0)
            if close <= limit:
                codes = tuple(word)
                if canonical_cyclic(codes) == codes and (include_imprimitive or is_primitive(codes)):
                    out.append((codes, mat[0] + mat[3] if mat is not None else 0.0))
                    if len(out) > max_classes:
                        raise BudgetExceeded(f"more than {max_classes} classes")
        if n == max_word_len:
            return
        nxt_inner = None
        if geometric:
            nxt_inner = inner if n == 1 else _mul(inner, letters[last])
            if n % 64 == 0:
                nxt_inner = _renorm(nxt_inner)
        for y in range(first, n_codes):
            if y == last ^ 1:
                continue
            step = trans[last, y] if geometric else 0.0
            if tsum + step + dmin > limit:
                continue
            if geometric and n >= 2:
                (p0, p1), (q0, q1) = circles[y]
                m0, m1, m2, m3 = nxt_inner
                img = ((m0 * p0 + m1 * p1, m2 * p0 + m3 * p1), (m0 * q0 + m1 * q1, m2 * q0 + m3 * q1))
                if _cosh_dist(anchor, img) > cosh_limit:
                    continue
            word.append(y)
            nxt = None
            if mat is not None:
                nxt = _mul(mat, letters[y])
                if len(word) % 64 == 0:
                    nxt = _renorm(nxt)
            visit(tsum + step, nxt, nxt_inner)
            word.pop()

    ident = (1.0, 0.0, 0.0, 1.0)
    visit(0.0, letters[first] if letters is not None else None, ident)
    return out


def _search_job(args):
    return _class_search(*args)


def cyclic_classes(rank: int, max_word_len: int, include_imprimitive: bool = True) -> list[tuple[int, ...]]:
    """Canonical cyclic words of length 1..max_word_len (pure combinatorics)."""
    found = []
    for first in range(2 * rank):
        for codes, _ in _class_search(
            2 * rank, first, max_word_len, math.inf, None, None, None, include_imprimitive, DEFAULT_MAX_CLASSES
        ):
            found.append(codes)
    return sorted(found, key=lambda w: (len(w), w))


def auto_word_len(spec: SurfaceSpec, max_length: float) -> int:
    """Word length beyond which no class can be shorter than max_length."""
    dmin = schottky_domain(spec).min_transition
    return max(1, int(math.floor((max_length + LENGTH_TOL) / dmin)))


def enumerate_conj_classes(
    spec: SurfaceSpec,
    max_word_len: int | None,
    max_length: float = math.inf,
    *,
    include_imprimitive: bool = False,
    max_classes: int = DEFAULT_MAX_CLASSES,
    workers: int = 1,
) -> list[ConjClass]:
    """Unoriented conjugacy classes with word length <= max_word_len and
    geodesic length <= max_length, sorted by (length, canonical word).

    max_word_len=None derives the word-length budget from the ping-pong
    bound, so the output is complete below max_length.
    """
    if spec.rank == 1:
        g = spec.generators[0]
        length = translation_length(g)
        return [ConjClass(length, (0,), g.trace, True)] if length <= max_length else []
    dom = schottky_domain(spec)
    if max_word_len is None:
        if math.isinf(max_length):
            raise ValueError("need max_word_len or a finite max_length")
        max_word_len = auto_word_len(spec, max_length)
    if max_word_len < 1:
        raise ValueError("max_word_len must be >= 1")
    letters = [tuple(m.ravel()) for m in spec.letter_matrices()]
    circles = [tuple(tuple(_homog(p)) for p in c) for c in dom.circles]
    jobs = [
        (
            2 * spec.rank,
            first,
            max_word_len,
            max_length,
            letters,
            circles,
            dom.transition,
            include_imprimitive,
            max_classes,
        )
        for first in range(2 * spec.rank)
    ]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_search_job, jobs))
    else:
        parts = [_search_job(j) for j in jobs]

    classes = []
    for part in parts:
        for codes, tr in part:
            if abs(tr) <= 2.0 + 1e-12:
                continue  # not hyperbolic; cannot happen for a validated Schottky group
            length = length_from_trace(tr)
            if length <= max_length:
                classes.append(ConjClass(length, codes, tr, is_primitive(codes)))
    if len(classes) > max_classes:
        raise BudgetExceeded(f"{len(classes)} classes exceed the cap {max_classes}")
    classes.sort()
    return classes


@functools.lru_cache(maxsize=64)
def length_spectrum(spec: SurfaceSpec, max_length: float, max_word_len: int | None = None) -> tuple[ConjClass, ...]:
    """Cached primitive length spectrum below max_length."""
    return tuple(enumerate_conj_classes(spec, max_word_len, max_length))


def write_length_spectrum_csv(classes: Iterable[ConjClass], fh=None) -> str:
    buf = io.StringIO() if fh is None else fh
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["canonical_word", "trace", "length", "primitive", "word_len"])
    for c in classes:
        w.writerow([c.name, f"{c.trace:.17g}", f"{c.length:.17g}", str(c.primitive).lower(), c.word_len])
    return buf.getvalue() if fh is None else ""


# ---------------------------------------------------------------- cosets


def word_shells(
    letters: np.ndarray, max_word_len: int, banned_first: Sequence[int] = ()
) -> Iterator[tuple[np.ndarray, np.ndarray]]:
    """Reduced words grouped by length, lexicographic within each shell.

    letters is the (2r, 2, 2) array of letter matrices.  Yields
    (codes, matrices) for n = 0..max_word_len with codes of shape (m, n).
    Words whose first letter is in banned_first are skipped.
    """
    n_codes = letters.shape[0]
    codes = np.zeros((1, 0), dtype=np.int8)
    mats = np.eye(2)[None, :, :]
    yield codes, mats
    first = np.array([c for c in range(n_codes) if c not in set(banned_first)], dtype=np.int8)
    if max_word_len < 1 or first.size == 0:
        return
    codes = first[:, None]
    mats = letters[first]
    yield codes, mats
    for n in range(2, max_word_len + 1):
        last = codes[:, -1]
        parent, nxt = [], []
        for y in range(n_codes):
            keep = np.nonzero(last != (y ^ 1))[0]
            parent.append(keep)
            nxt.append(np.full(keep.size, y, dtype=np.int8))
        parent = np.concatenate(parent)
        nxt = np.concatenate(nxt)
        order = np.lexsort((nxt, parent))
        parent, nxt = parent[order], nxt[order]
        codes = np.concatenate([codes[parent], nxt[:, None]], axis=1)
        mats = np.matmul(mats[parent], letters[nxt])
        if n % 64 == 0:
            mats = renormalize(mats)
        yield codes, mats


def coset_shells(spec: SurfaceSpec, max_word_len: int) -> Iterator[tuple[np.ndarray, np.ndarray]]:
    """Representatives of <g1>\\Gamma by word length: the identity and every
    reduced word whose first letter is not g1^{+-1}."""
    return word_shells(spec.letter_matrices(), max_word_len, banned_first=(0, 1))


def coset_reps(spec: SurfaceSpec, max_word_len: int) -> list[Word]:
    reps = []
    for codes, _ in coset_shells(spec, max_word_len):
        reps.extend(Word.from_codes(tuple(int(c) for c in row)) for row in codes)
    return reps


# --------------------------------------------------- exponent of convergence


@dataclass(frozen=True)
class DeltaEstimate:
    delta: float
    uncertainty: float
    n_classes: int
    max_length: float
    log_c: float = 0.0  # N(T) ~ exp(log_c) e^{delta T} / (delta T)

    def counting(self, t: float) -> float:
        if self.delta <= 0:
            return 1.0
        return math.exp(self.log_c + self.delta * t) / (self.delta * t)


def _fit_delta(lengths: np.ndarray, lo: float, hi: float) -> tuple[float, float, float]:
    sel = (lengths >= lo) & (lengths <= hi)
    t = lengths[sel]
    n = np.nonzero(sel)[0] + 1.0  # N(T) just after each length
    y = np.log(n * t)
    (slope, icpt), cov = np.polyfit(t, y, 1, cov=True)
    return float(slope), float(math.sqrt(max(cov[0, 0], 0.0))), float(icpt)


def estimate_delta(
    spec: SurfaceSpec,
    max_word_len: int | None = None,
    max_length: float | None = None,
    *,
    target_classes: int = 400,
    min_classes: int = 50,
) -> DeltaEstimate:
    """Exponent of convergence from the growth N(T) ~ e^{delta T}/(delta T).

    Least squares of log(N(T) T) against T over the upper half of the
    observed length range.  When max_length is None the cutoff grows until
    target_classes primitive classes are found.  The uncertainty combines
    the regression standard error with the spread between fits on the two
    quarters of the fitted range.
    """
    if spec.rank == 1:
        return DeltaEstimate(0.0, 0.0, 1, math.inf)
    return _estimate_delta_cached(spec, max_word_len, max_length, target_classes, min_classes)


@functools.lru_cache(maxsize=128)
def _estimate_delta_cached(spec, max_word_len, max_length, target_classes, min_classes):
    if max_length is None:
        cut = max(4.0, 4.0 * min(spec.boundary_lengths))
        while True:
            classes = enumerate_conj_classes(spec, max_word_len, cut)
            if len(classes) >= target_classes or cut > 60:
                break
            cut += 1.0
    else:
        cut = max_length
        classes = enumerate_conj_classes(spec, max_word_len, cut)
    if len(classes) < min_classes:
        raise InsufficientData(f"only {len(classes)} classes below length {cut}")
    lengths = np.array([c.length for c in classes])
    lmin, lmax = float(lengths[0]), float(lengths[-1])
    mid = lmin + 0.5 * (lmax - lmin)
    delta, se, icpt = _fit_delta(lengths, mid, lmax)
    q = mid + 0.5 * (lmax - mid)
    d_lo = _fit_delta(lengths, mid, q)[0]
    d_hi = _fit_delta(lengths, q, lmax)[0]
    unc = math.hypot(se, d_hi - d_lo)
    log_c = icpt + math.log(delta) if delta > 0 else 0.0
    return DeltaEstimate(delta, unc, len(classes), cut, log_c)
