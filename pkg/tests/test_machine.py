import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from rrkit.errors import CompositionError
from rrkit.field import FieldMatrix
from rrkit.machine import (
    RandomReduction,
    boost,
    compose,
    identity_reduction,
    marginal_distribution_probe,
    plurality,
    run_reduction,
    split_random,
)
from rrkit.oracles import FaultyOracle, Oracle, PermanentOracle, permanent_exact
from rrkit.rsr import perm_rsr, random_matrix


class SquareOracle(Oracle):
    def evaluate(self, q):
        return q * q

    def corrupt(self, q, a, rng):
        return a + 1


def test_identity_reduction_returns_oracle_value():
    o = SquareOracle()
    assert run_reduction(identity_reduction(), 7, o, random.Random(0)) == 49
    assert o.stats.rounds == 1 and o.stats.total_queries == 1


def test_boost_on_exact_inner_uses_one_round():
    rr = perm_rsr(3, 101)
    a = random_matrix(3, 101, random.Random(1))
    for t in (1, 2, 3):
        o = PermanentOracle()
        out = run_reduction(boost(rr, t), a, o, random.Random(t))
        assert out == permanent_exact(a).value
        assert o.stats.total_queries == 24 * t * rr.k and o.stats.rounds == 1


def test_plurality_tie_break_is_smallest():
    assert plurality([3, 1, 3, 1, 2]) == 1
    assert plurality([5]) == 5


@given(st.lists(st.integers(1, 9), min_size=1, max_size=6), st.data())
def test_split_random_is_mixed_radix(sizes, data):
    parts = [data.draw(st.integers(0, s - 1)) for s in sizes]
    r, scale = 0, 1
    for s, part in zip(sizes, parts):
        r += part * scale
        scale *= s
    assert split_random(r, sizes) == parts


def test_compose_identity_is_identity():
    c = compose(identity_reduction(), identity_reduction())
    assert c.k == 1
    assert run_reduction(c, 5, SquareOracle(), random.Random(0)) == 25


def test_compose_query_layout_and_count():
    outer = RandomReduction("pair", 2, 3, lambda i, x, r: x + i + r, lambda x, r, a: a[0] + a[1])
    inner = RandomReduction("triple", 3, 5, lambda i, y, r: (y, i, r), lambda y, r, a: a[0])
    c = compose(outer, inner)
    assert c.k == 6 and c.randomness_space == 3 * 25
    r = 2 + 3 * (4 + 5 * 1)  # outer r=2, r_0=4, r_1=1
    assert c.sigma(0, 10, r) == (12, 0, 4)
    assert c.sigma(5, 10, r) == (13, 2, 1)


def test_compose_rejects_type_mismatch():
    a = RandomReduction("a", 1, 1, lambda i, x, r: x, lambda x, r, ans: ans[0], "int", "str")
    b = RandomReduction("b", 1, 1, lambda i, x, r: x, lambda x, r, ans: ans[0], "float", "float")
    with pytest.raises(CompositionError):
        compose(a, b)


def test_reduction_is_deterministic_given_rng():
    rr = perm_rsr(3, 101)
    a = random_matrix(3, 101, random.Random(4))
    outs = [
        run_reduction(rr, a, FaultyOracle(PermanentOracle(), 0.3, seed=8), random.Random(77))
        for _ in range(3)
    ]
    assert len(set(outs)) == 1


def test_marginal_probe():
    rr = perm_rsr(2, 7)
    a = FieldMatrix.from_entries([[1, 2], [3, 4]], 7)
    b = FieldMatrix.from_entries([[0, 5], [6, 1]], 7)
    assert marginal_distribution_probe(rr, 0, a, a, 2000, random.Random(0)) == 0
    assert marginal_distribution_probe(rr, 1, a, b, 20000, random.Random(0), buckets=64) < 0.05
    broken = RandomReduction("leaky", 1, 7, lambda i, x, r: x, lambda x, r, ans: ans[0])
    assert marginal_distribution_probe(broken, 0, a, b, 500, random.Random(0), buckets=None) == 1.0


def test_boost_bound_numerically():
    import math

    for t in range(1, 7):
        assert math.exp(-2 * (2 / 3 - 1 / 2) ** 2 * 24 * t) <= 2.0**-t
