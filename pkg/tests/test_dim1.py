import json
import random
from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from singmetric.core import ModelSoundnessError
from singmetric.dim1 import (
    AtomicSingularity,
    BudgetExceeded,
    BudgetMismatch,
    MeetNonexistent,
    atomic,
    cauchy_sequence,
    diamond_atomic,
    ds_atomic,
    join_atomic,
    leq,
    mass_vector_atomic,
    meet_atomic,
    multiplier_exponent,
    multiplier_exponents,
    random_atomic,
    sandwich_sequences,
    semicontinuity_check,
    transport_atomic,
)

A = atomic(1, [F(3, 10), F(1, 5)])
B = atomic(1, [F(1, 10), F(1, 2)])


# --- type -------------------------------------------------------------------


def test_mass_closed_form():
    assert mass_vector_atomic(A).masses == (F(1, 2), 1)
    assert mass_vector_atomic(atomic(2, [F(1, 2), 1])).masses == (F(1, 2), 2)


def test_budget_invariant():
    with pytest.raises(ValueError):
        atomic(1, [F(3, 5), F(3, 5)])
    with pytest.raises(ValueError):
        atomic(1, [F(-1, 5)])


def test_json_roundtrip():
    back = AtomicSingularity.from_json(json.loads(json.dumps(A.to_json())))
    assert back == A and back.exact


def test_mismatched_points():
    with pytest.raises(BudgetMismatch):
        join_atomic(A, atomic(1, [F(1, 10), F(1, 2)], ["p", "q"]))
    with pytest.raises(BudgetMismatch):
        ds_atomic(A, atomic(2, [F(1, 10), F(1, 2)]))


# --- join / meet ------------------------------------------------------------


def test_join_examples():
    assert join_atomic(A, A) == A
    assert join_atomic(A, B).lelong == (F(1, 10), F(1, 5))
    small = atomic(1, [F(1, 10), F(1, 10)])
    assert join_atomic(small, A) == small


def test_meet_examples():
    m = meet_atomic(A, B)
    assert m.lelong == (F(3, 10), F(1, 2))
    assert m.mass == F(1, 5)
    assert meet_atomic(atomic(1, [F(7, 10), 0]), atomic(1, [0, F(7, 10)])) is None
    assert meet_atomic(A, A) == A


@given(st.integers(0, 10**7))
@settings(max_examples=300, deadline=None)
def test_meet_exists_when_masses_exceed_join(seed):
    # if m_a + m_b > m_w for the join w, the envelope must stay in budget
    rng = random.Random(seed)
    k = rng.randint(1, 4)
    a, b = random_atomic(rng, k), random_atomic(rng, k)
    w = join_atomic(a, b)
    if a.mass + b.mass > w.mass:
        assert meet_atomic(a, b) is not None


# --- ds ---------------------------------------------------------------------


def test_ds_examples():
    assert ds_atomic(A, A) == 0
    assert ds_atomic(A, B) == F(1, 4)
    assert ds_atomic(atomic(1, [F(1, 2)]), atomic(1, [F(1, 5)])) == F(3, 20)


def test_ds_float_inputs():
    assert ds_atomic(atomic(1.0, [0.5]), atomic(1.0, [0.2])) == pytest.approx(0.15, abs=1e-15)


@given(st.integers(0, 10**7))
@settings(max_examples=200, deadline=None)
def test_ds_metric_axioms(seed):
    rng = random.Random(seed)
    k = rng.randint(1, 4)
    a, b, c = (random_atomic(rng, k) for _ in range(3))
    assert ds_atomic(a, b) == ds_atomic(b, a)
    assert (ds_atomic(a, b) == 0) == (a.lelong == b.lelong)
    assert ds_atomic(a, c) <= ds_atomic(a, b) + ds_atomic(b, c)


@given(st.integers(0, 10**7))
@settings(max_examples=100, deadline=None)
def test_ds_comparable_is_mass_difference(seed):
    rng = random.Random(seed)
    a = random_atomic(rng, 3)
    b = join_atomic(a, random_atomic(rng, 3))
    assert leq(a, b)
    assert ds_atomic(a, b) == (b.mass - a.mass) / 2


# --- diamond ----------------------------------------------------------------


def test_diamond_example():
    r = diamond_atomic(A, B)
    assert (r.lhs, r.rhs, r.equal) == (F(9, 10), F(9, 10), True)
    assert diamond_atomic(A, A).equal


def test_diamond_nonexistent():
    with pytest.raises(MeetNonexistent):
        diamond_atomic(atomic(1, [F(7, 10), 0]), atomic(1, [0, F(7, 10)]))


@given(st.integers(0, 10**7))
@settings(max_examples=300, deadline=None)
def test_diamond_min_max_identity(seed):
    rng = random.Random(seed)
    k = rng.randint(1, 5)
    a, b = random_atomic(rng, k, max_total=F(1, 2)), random_atomic(rng, k, max_total=F(1, 2))
    r = diamond_atomic(a, b)
    assert r.equal and r.lhs == r.rhs


def test_diamond_float_within_precision():
    rng = random.Random(0)
    for _ in range(200):
        nu_a = [rng.random() * 0.2 for _ in range(4)]
        nu_b = [rng.random() * 0.2 for _ in range(4)]
        r = diamond_atomic(atomic(1.0, nu_a), atomic(1.0, nu_b))
        assert abs(r.lhs - r.rhs) <= 1e-12


# --- multiplier exponents ---------------------------------------------------


@pytest.mark.parametrize("nu, e", [(F(1, 2), 0), (1, 1), (F(23, 10), 2), (0, 0), (2, 2), (0.999, 0)])
def test_multiplier_exponent_examples(nu, e):
    assert multiplier_exponent(nu) == e


def _integrable(k, nu):
    # |z|^(2k - 2nu) is integrable near 0 in the plane iff 2k - 2nu > -2
    return 2 * k - 2 * nu > -2


@given(st.fractions(min_value=0, max_value=10, max_denominator=50))
def test_multiplier_exponent_is_least_integrable(nu):
    e = multiplier_exponent(nu)
    assert _integrable(e, nu)
    assert e == 0 or not _integrable(e - 1, nu)


@given(st.fractions(0, 5, max_denominator=30), st.fractions(0, 5, max_denominator=30))
def test_multiplier_exponent_monotone(x, y):
    lo, hi = min(x, y), max(x, y)
    assert multiplier_exponent(lo) <= multiplier_exponent(hi)


def test_multiplier_exponents_vector():
    assert multiplier_exponents(atomic(4, [F(1, 2), 1, F(23, 10)])) == (0, 1, 2)


# --- semicontinuity ---------------------------------------------------------


def test_semicontinuity_constant():
    assert semicontinuity_check([A] * 5, A) == 0


def test_semicontinuity_scaled_family():
    # nu_j = 1 - 1/j for j = 1, 2, ...: exponents 0 below the limit exponent 1
    limit = atomic(2, [1])
    seq = [atomic(2, [1 - F(1, j)]) for j in range(1, 30)]
    assert all(multiplier_exponents(s) == (0,) for s in seq)
    assert semicontinuity_check(seq, limit) == 0  # the first entry is j = 1


def test_semicontinuity_oscillating():
    limit = atomic(1, [F(9, 10)])
    seq = [atomic(1, [F(9, 10) + F((-1) ** j, 10 * j)]) for j in range(1, 30)]
    # j = 2 gives 0.95, j = 1 gives 0.8: all exponents 0
    assert semicontinuity_check(seq, limit) == 0


def test_semicontinuity_late_index():
    # the first two entries have exponent 1 against a limit exponent of 0
    limit = atomic(3, [F(1, 2)])
    seq = [atomic(3, [F(3, 2)]), atomic(3, [F(11, 10)])] + [atomic(3, [F(1, 2) + F(1, 10 * j)]) for j in range(1, 8)]
    assert semicontinuity_check(seq, limit) == 2


def test_semicontinuity_failure_is_soundness_error():
    with pytest.raises(ModelSoundnessError):
        semicontinuity_check([atomic(3, [2])], atomic(3, [F(1, 2)]))


# --- sandwich ---------------------------------------------------------------


def test_sandwich_constant():
    up, lo = sandwich_sequences([A] * 4)
    assert up == [A] * 4 and lo == [A] * 4


def test_sandwich_geometric():
    seq = [atomic(2, [F(1, 2) + F((-1) ** j, 2**j)]) for j in range(1, 25)]
    up, lo = sandwich_sequences(seq)
    limit = atomic(2, [F(1, 2)])
    for j in range(len(seq)):
        assert leq(lo[j], seq[j]) and leq(seq[j], up[j])
    for j in range(len(seq) - 1):
        assert leq(up[j + 1], up[j]) and leq(lo[j], lo[j + 1])
    assert ds_atomic(up[-2], limit) < F(1, 2**20)
    assert ds_atomic(lo[-2], limit) < F(1, 2**20)


def test_sandwich_budget_exceeded():
    seq = [atomic(1, [F(7, 10), 0]), atomic(1, [0, F(7, 10)]), atomic(1, [0, 0])]
    up, lo = sandwich_sequences(seq)
    assert lo[0] is None and lo[1] is not None
    with pytest.raises(BudgetExceeded) as ei:
        sandwich_sequences(seq, start=0)
    assert ei.value.index == 0


@given(st.integers(0, 10**6))
@settings(max_examples=50, deadline=None)
def test_sandwich_two_point_cauchy(seed):
    rng = random.Random(seed)
    seq, limit = cauchy_sequence(rng, 20, F(1, 2), npoints=2, delta=F(1, 10))
    assert all(s.mass >= F(1, 10) for s in seq)
    up, lo = sandwich_sequences(seq, start=0)
    for j in range(len(seq)):
        assert leq(lo[j], seq[j]) and leq(seq[j], up[j])
    for j in range(len(seq) - 1):
        assert leq(up[j + 1], up[j]) and leq(lo[j], lo[j + 1])
    # each tail member is within amplitude * ratio^j / npoints of the limit at every point;
    # a finite tail can sit on one side, so the gap itself need not shrink monotonically
    for j in range(len(seq)):
        bound = F(1, 4) / 2**j / 2
        assert ds_atomic(up[j], limit) <= bound and ds_atomic(lo[j], limit) <= bound


def test_cauchy_schedule():
    rng = random.Random(7)
    seq, _ = cauchy_sequence(rng, 15, F(1, 2))
    for j in range(len(seq) - 1):
        assert ds_atomic(seq[j], seq[j + 1]) <= F(1, 2**j)


# --- monotone limits and transport -----------------------------------------


def test_monotone_limit_family():
    limit = atomic(1, [F(1, 5), F(1, 10)])
    seq = [limit.with_lelong(v + F(1, 5 * j) for v in limit.lelong) for j in range(1, 40)]
    gaps = [ds_atomic(s, limit) for s in seq]
    assert all(g1 > g2 for g1, g2 in zip(gaps, gaps[1:]))
    assert ds_atomic(limit, limit) == 0
    assert gaps[-1] == F(1, 5 * 39)


def test_transport_keeps_atoms():
    t = transport_atomic(atomic(1, [F(1, 2)]), 1)
    assert t.budget == 2 and t.lelong == (F(1, 2),) and t.mass == F(3, 2)
