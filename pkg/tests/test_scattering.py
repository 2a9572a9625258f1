import io
import random

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import gamma_k_mp, sine_oracle
from pinchlab.errors import DomainError, PoleError, RemovableSingularityWarning
from pinchlab.scattering import (
    MODE_TABLE_COLUMNS,
    ScatteringMode,
    gamma_k,
    gamma_k_degeneration,
    gamma_k_stirling,
    mode_table,
    rel_det_partial,
    tau_limit_target,
    write_mode_table,
)

# 50-digit mpmath value of gamma_3(0.8+1.3i) at l = 0.7
GAMMA_3 = complex(-2.0678944547440510195, -3.3320648878570992534)
DIRECT_PRODUCT = 2.3842287552529205876


def test_mode_fields():
    m = ScatteringMode(2, 0.5)
    assert m.kbar.real == 0
    assert m.kbar.imag == pytest.approx(8 * 3.141592653589793, rel=1e-15)
    assert ScatteringMode(0, 0.5).kbar == 0
    with pytest.raises(DomainError):
        ScatteringMode(1, 0.0)


def test_gamma_k_frozen_oracle():
    assert abs(gamma_k(ScatteringMode(3, 0.7), 0.8 + 1.3j) - GAMMA_3) <= 1e-12 * abs(GAMMA_3)


@settings(max_examples=60, deadline=None)
@given(st.integers(-20, 20), st.floats(0.02, 2), st.floats(0.1, 1.9), st.floats(-2, 2))
def test_gamma_k_matches_mpmath(k, l, sr, si):
    s = complex(sr, si)
    if min(abs(s - 0.5), abs(s - 1.5)) < 1e-3:
        return
    want = gamma_k_mp(k, l, s)
    assert abs(gamma_k(ScatteringMode(k, l), s) - want) <= 1e-11 * abs(want)


def test_functional_equation_random():
    rng = random.Random(11)
    worst = 0.0
    n = 0
    while n < 1000:
        s = complex(rng.uniform(0.1, 1.9), rng.uniform(-2, 2))
        if min(abs(s - 0.5), abs(s - 1.5)) < 1e-3:
            continue
        m = ScatteringMode(rng.randint(-20, 20), rng.uniform(0.02, 2))
        worst = max(worst, abs(gamma_k(m, s) * gamma_k(m, 1 - s) - 1))
        n += 1
    assert worst <= 1e-10


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 50), st.floats(0.01, 3), st.complex_numbers(max_magnitude=3))
def test_k_symmetry_bitwise(k, l, s):
    if s.real <= 0.05:
        return
    try:
        a = gamma_k(ScatteringMode(k, l), s)
    except PoleError:
        return
    assert gamma_k(ScatteringMode(-k, l), s) == a


def test_gamma_0_independent_of_l():
    for s in (0.3 + 0.2j, 1.2, 0.75 - 1j):
        a = gamma_k(ScatteringMode(0, 0.1), s)
        b = gamma_k(ScatteringMode(0, 1.0), s)
        assert abs(a - b) <= 1e-13 * abs(a)


def test_gamma_0_vanishes_at_2():
    m = ScatteringMode(0, 1.0)
    assert gamma_k(m, 2.0) == 0
    vals = [abs(gamma_k(m, 2 - eps)) for eps in (1e-2, 1e-4, 1e-6)]
    assert vals[0] > vals[1] > vals[2] and vals[2] < 1e-10


def test_numerator_pole_raises():
    # s = 3/2: Gamma(1/2 - s) = Gamma(-1) has a pole with no matching denominator pole for k = 0
    with pytest.raises(PoleError, match="Gamma"):
        gamma_k(ScatteringMode(0, 1.0), 1.5)


def test_removable_singularity_at_half():
    # at s = 1/2 both Gamma(1/2 - s) and Gamma(s - 1/2) have poles
    m = ScatteringMode(3, 1.0)
    with pytest.warns(RemovableSingularityWarning):
        v = gamma_k(m, 0.5)
    with mpmath.workdps(40):
        want = gamma_k_mp(3, 1.0, mpmath.mpf(0.5) + mpmath.mpf("1e-25"), dps=40)
    assert abs(v - want) < 1e-9
    assert abs(v + 1) < 1e-9


def test_degeneration_against_stirling():
    rep = gamma_k_degeneration(1, 0.75, [0.2, 0.1, 0.05, 0.025])
    last = rep.extra["table"][-1]
    assert last["l"] == 0.025 and last["rel_diff"] < 0.01
    assert abs(rep.alpha - (1 - 2 * 0.75)) < 0.01
    assert rep.target_alpha == pytest.approx(-0.5)


def test_degeneration_large_k():
    for k in (5, 20, 80):
        g = gamma_k(ScatteringMode(k, 0.5), 1.3 + 0.4j)
        o = gamma_k_stirling(k, 0.5, 1.3 + 0.4j)
        assert abs(g - o) <= 0.01 * abs(o)


def test_degeneration_errors():
    with pytest.raises(DomainError):
        gamma_k_degeneration(0, 0.75, [0.2, 0.1, 0.05, 0.025])
    with pytest.raises(DomainError):
        gamma_k_degeneration(1, 0.25, [0.2, 0.1, 0.05, 0.025])
    with pytest.raises(DomainError):
        gamma_k_degeneration(1, 0.75, [0.1, 0.2, 0.05, 0.025])


def test_tau_target():
    assert abs(tau_limit_target(1) - 0.5) <= 1e-15
    assert abs(tau_limit_target(0.5) - 1) <= 1e-15
    s = 0.75 + 0.5j
    want = sine_oracle(s)
    assert abs(tau_limit_target(s) - want) <= 1e-14 * abs(want)
    for s in (0, 2, -4):
        with pytest.raises(PoleError):
            tau_limit_target(s)


def test_rel_det_examples():
    assert rel_det_partial([0, 0, 0]).value == 1
    assert rel_det_partial([1]).value == pytest.approx(2, abs=1e-15)
    v = rel_det_partial([2.0**-k for k in range(1, 21)])
    assert abs(v.value - DIRECT_PRODUCT) <= 1e-14 * DIRECT_PRODUCT
    with mpmath.workdps(30):
        direct = mpmath.fprod(1 + mpmath.mpf(2) ** -k for k in range(1, 21))
    assert abs(v.value - float(direct)) <= 1e-14 * float(direct)


def test_rel_det_cap_and_remainder():
    lam = [0.5**k for k in range(1, 11)]
    v = rel_det_partial(lam, cap=4, tail_bound=1e-3)
    assert v.factors_used == 4
    assert v.remainder == pytest.approx(sum(lam[4:]) + 1e-3)
    assert rel_det_partial(lam, cap=4).remainder is None
    with pytest.raises(DomainError):
        rel_det_partial([0.1, -1.0])


@settings(max_examples=100, deadline=None)
@given(st.lists(st.complex_numbers(max_magnitude=0.9), min_size=1, max_size=30), st.randoms())
def test_rel_det_permutation_invariant_bitwise(lam, rnd):
    perm = list(lam)
    rnd.shuffle(perm)
    assert rel_det_partial(lam).log_value == rel_det_partial(perm).log_value


def test_mode_table_csv():
    rows = mode_table([1, -1], [0.5], [0.75 + 0.1j])
    buf = io.StringIO()
    write_mode_table(rows, buf)
    lines = buf.getvalue().splitlines()
    assert lines[0] == ",".join(MODE_TABLE_COLUMNS)
    assert len(lines) == 3
    assert lines[1].split(",")[4:] == lines[2].split(",")[4:]
