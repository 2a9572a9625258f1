import cmath
import math

import numpy as np
import pytest

from oracles import reduced_words
from pinchlab.eisenstein import (
    cusp_eisenstein,
    hyperbolic_eisenstein,
    starred_eisenstein,
    weighted_eisenstein,
)
from pinchlab.errors import ConvergenceWarning, DomainError
from pinchlab.moebius import HPoint, Isometry, angle_sine, apply
from pinchlab.wordlang import build_pants, cyclic_model
from pinchlab.zeta import SpectralPoint, selberg_zeta_log, local_factor_log

P111 = build_pants(1.0, 1.0, 1.0)


@pytest.mark.parametrize("s", [0.3, 1.0, 2.0, 1.5 + 2j, 0.05 - 1j])
@pytest.mark.parametrize("y", [0.5, 1.0, 7.0])
def test_cylinder_on_axis_is_one(s, y):
    v = hyperbolic_eisenstein(cyclic_model(0.4), (0.0, y), SpectralPoint(s))
    assert abs(v.value - 1) <= 1e-14
    assert v.terms_used == 1


def test_cylinder_closed_form():
    v = hyperbolic_eisenstein(cyclic_model(1.0), (1.0, 1.0), SpectralPoint(2.0))
    assert v.value == pytest.approx(0.5, abs=1e-15)
    z = HPoint(-0.7, 0.3)
    s = 1.2 + 0.4j
    v = hyperbolic_eisenstein(cyclic_model(1.0), z, SpectralPoint(s))
    assert abs(v.value - cmath.exp(s * math.log(angle_sine(z)))) <= 1e-15


def test_brute_force_coset_oracle():
    # independent sieve: reduced words not starting with g1^{+-1}, applied letter by letter
    z = HPoint(0.0, 1.0)
    s = 2.0
    n = 6
    mats = P111.letter_matrices()
    total = 0.0
    for w in reduced_words(n):
        if w and w[0] in (0, 1):
            continue
        p = z
        for c in reversed(w):
            p = apply(Isometry.from_array(mats[c]), p)
        total += angle_sine(p) ** s
    v = hyperbolic_eisenstein(P111, z, SpectralPoint(s), max_word_len=n)
    assert v.value.real == pytest.approx(total, rel=1e-12)


def test_shell_stability_and_positivity():
    z = (0.0, 1.0)
    a = hyperbolic_eisenstein(P111, z, SpectralPoint(2.0), 8)
    b = hyperbolic_eisenstein(P111, z, SpectralPoint(2.0), 9)
    assert abs(a.value - b.value) <= 2 * a.tail_indicator
    assert a.value.real > 0 and abs(a.value.imag) <= 1e-12 * a.value.real
    assert a.tail_indicator == abs(a.shell_sums[8])


def test_automorphy_budget_8():
    z = HPoint(0.3, 1.2)
    p = SpectralPoint(2.0)
    e0 = hyperbolic_eisenstein(P111, z, p, 8)
    for g in P111.generators:
        for h in (g, g.inverse()):
            e1 = hyperbolic_eisenstein(P111, apply(h, z), p, 8)
            assert abs(e1.value - e0.value) <= 2 * e0.tail_indicator


def test_sigma_invariance_of_terms():
    z = HPoint(0.3, 1.2)
    mats = P111.letter_matrices()
    g1 = Isometry.from_array(mats[0])
    for w in [(2,), (3, 0, 2), (2, 2, 1)]:
        m = np.eye(2)
        for c in w:
            m = m @ mats[c]
        base = angle_sine(apply(Isometry.from_array(m), z))
        for k in range(1, 4):
            gk = Isometry.identity()
            for _ in range(k):
                gk = gk @ g1
            t = angle_sine(apply(gk @ Isometry.from_array(m), z))
            assert t == pytest.approx(base, rel=1e-13)


def test_stall_warning_near_delta():
    spec = build_pants(0.1, 1.0, 1.0)
    with pytest.warns(ConvergenceWarning):
        v = hyperbolic_eisenstein(spec, (0.0, 1.0), SpectralPoint(0.5), 7)
    assert any(w.startswith("convergence:") for w in v.warnings)


def test_weighted_scaling():
    z = (0.2, 1.1)
    p = SpectralPoint(1.5)
    e = hyperbolic_eisenstein(P111, z, p, 6)
    w = weighted_eisenstein(P111, z, p, 6)
    assert w.value == e.value  # 1^{-s} = 1
    spec = cyclic_model(0.25)
    w = weighted_eisenstein(spec, (0.0, 1.0), p, 6)
    assert abs(w.value - 0.25 ** -1.5) < 1e-13
    spec = build_pants(0.5, 1.0, 1.0)
    e = hyperbolic_eisenstein(spec, (0.0, 1.0), p, 6)
    w = weighted_eisenstein(spec, (0.0, 1.0), p, 6)
    assert abs(w.value - e.value * 0.5 ** -1.5) < 1e-13 * abs(w.value)


def test_starred_composition():
    z = (0.0, 1.0)
    p = SpectralPoint(2.0)
    v = starred_eisenstein(P111, z, p, 6, 8.0)
    logz = selberg_zeta_log(P111, p, max_length=8.0).log_value
    we = weighted_eisenstein(P111, z, p, 6).value
    want = cmath.exp(logz - local_factor_log(1.0, p)) * we
    assert abs(v.value - want) <= 1e-12 * abs(want)
    cyl = starred_eisenstein(cyclic_model(0.3), (1.0, 2.0), SpectralPoint(1.5), 4)
    assert abs(cyl.value - 0.3 ** -1.5 * angle_sine(HPoint(1.0, 2.0)) ** 1.5) < 1e-13


def test_starred_budget_doubling():
    spec = build_pants(0.4, 1.0, 1.0)
    p = SpectralPoint(1.5)
    a = starred_eisenstein(spec, (0.0, 1.0), p, 6, 8.0)
    b = starred_eisenstein(spec, (0.0, 1.0), p, 9, 11.0)
    assert abs(a.value - b.value) <= a.tail_estimate + b.tail_estimate + 4 * a.weighted.tail_indicator


PARABOLIC = Isometry(1.0, 1.0, 0.0, 1.0)


def test_cusp_single_coset():
    v = cusp_eisenstein([PARABOLIC], Isometry.identity(), (0.0, 2.0), SpectralPoint(2.0))
    assert v.value == pytest.approx(4.0, abs=1e-14)


def test_cusp_stabilizer_invariance():
    # one coset: E(Tz) = E(z) exactly
    z = HPoint(0.2, 1.3)
    p = SpectralPoint(2.0)
    a = cusp_eisenstein([PARABOLIC], Isometry.identity(), z, p)
    b = cusp_eisenstein([PARABOLIC], Isometry.identity(), apply(PARABOLIC, z), p)
    assert a.value == b.value
    # term by term: replacing a representative w by T^k w changes nothing
    k = Isometry(1.0, 0.0, 3.0, 1.0)
    h = k @ Isometry(3.0, 0.0, 0.0, 1 / 3) @ k.inverse()
    for w in (h, h @ h, h.inverse() @ PARABOLIC @ h):
        base = apply(w, z).y
        for n in (1, 2, 3):
            t = Isometry.identity()
            for _ in range(n):
                t = t @ PARABOLIC
            assert apply(t @ w, z).y == pytest.approx(base, rel=1e-14)
    # the truncated sum is automorphic up to the tail
    gens = [PARABOLIC, h]
    a = cusp_eisenstein(gens, Isometry.identity(), z, p, 8)
    b = cusp_eisenstein(gens, Isometry.identity(), apply(PARABOLIC, z), p, 8)
    assert abs(a.value - b.value) <= 2 * max(a.tail_indicator, b.tail_indicator)


def test_cusp_with_scaling_matrix():
    # cusp at 0: stabilizer z -> z/(z+1); scaling sigma = [[0,-1],[1,0]] sends infinity to 0
    stab = Isometry(1.0, 0.0, 1.0, 1.0)
    sigma = Isometry(0.0, -1.0, 1.0, 0.0)
    z = HPoint(0.5, 0.5)
    v = cusp_eisenstein([stab], sigma, z, SpectralPoint(2.0))
    w = apply(sigma.inverse(), z)
    assert v.value == pytest.approx(w.y**2, rel=1e-14)


def test_cusp_errors_and_warnings():
    with pytest.raises(DomainError):
        cusp_eisenstein([Isometry(2.0, 0.0, 0.0, 0.5)], Isometry.identity(), (0.0, 1.0), SpectralPoint(2.0))
    with pytest.raises(DomainError):
        cusp_eisenstein([PARABOLIC], Isometry(0.0, -1.0, 1.0, 0.0), (0.0, 1.0), SpectralPoint(2.0))
    with pytest.warns(ConvergenceWarning):
        cusp_eisenstein([PARABOLIC], Isometry.identity(), (0.0, 1.0), SpectralPoint(0.9))


@pytest.mark.filterwarnings("ignore::pinchlab.errors.ConvergenceWarning")
def test_cusp_two_orders_agree():
    # permuting the non-cusp generators permutes the terms; full shells agree
    k = Isometry(1.0, 0.0, 3.0, 1.0)
    h1 = k @ Isometry(3.0, 0.0, 0.0, 1 / 3) @ k.inverse()
    k2 = Isometry(1.0, 0.0, -3.0, 1.0)
    h2 = k2 @ Isometry(3.0, 0.0, 0.0, 1 / 3) @ k2.inverse()
    z = HPoint(0.1, 1.0)
    p = SpectralPoint(2.0)
    a = cusp_eisenstein([PARABOLIC, h1, h2], Isometry.identity(), z, p, 5)
    b = cusp_eisenstein([PARABOLIC, h2, h1], Isometry.identity(), z, p, 5)
    assert abs(a.value - b.value) <= 1e-13 * abs(a.value)
