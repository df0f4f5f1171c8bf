import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rrkit.cnf import (
    CnfFormula,
    XorConstraint,
    add_xor_constraints,
    conjoin,
    evaluate,
    parse_dimacs,
    random_kcnf,
    random_xor,
    tensor_power,
    to_dimacs,
)
from rrkit.errors import ArityError, ParseError, ResourceLimit


def brute_count(f, over=None):
    """Models of f projected to its first ``over`` variables."""
    n = f.var_count
    over = n if over is None else over
    seen = set()
    for bits in itertools.product([False, True], repeat=n):
        if evaluate(f, bits):
            seen.add(bits[:over])
    return len(seen)


def test_parse_examples():
    f = parse_dimacs("p cnf 2 1\n1 2 0")
    assert f.var_count == 2 and f.clauses == ((1, 2),)
    assert parse_dimacs("p cnf 1 0").clauses == ()
    with pytest.raises(ParseError):
        parse_dimacs("p cnf 2 2\n1 2 0\n")


@pytest.mark.parametrize("text, line", [
    ("p dnf 2 1\n1 0\n", 1),
    ("p cnf 2 1\n1 3 0\n", 2),
    ("c hi\np cnf 2 1\n1 -2\n", 3),
])
def test_parse_errors_carry_line_numbers(text, line):
    with pytest.raises(ParseError) as info:
        parse_dimacs(text)
    assert info.value.line == line


@given(st.integers(1, 10), st.integers(0, 20), st.randoms(use_true_random=False))
def test_dimacs_round_trip(n, m, rnd):
    f = random_kcnf(n, m, rnd, k=min(3, n))
    assert parse_dimacs(to_dimacs(f)) == f


def test_evaluate_examples():
    assert evaluate(CnfFormula.empty(3), (False, True, False)) == 1
    assert evaluate(CnfFormula(2, ((1, 2),)), (False, False)) == 0
    assert evaluate(CnfFormula(2, ((1, 2), (-1,))), (False, True)) == 1
    with pytest.raises(ArityError):
        evaluate(CnfFormula(2, ((1, 2),)), (True,))


def test_conjoin_examples():
    f = CnfFormula(2, ((1, -2),))
    assert brute_count(conjoin(f, CnfFormula.empty(2))) == brute_count(f)
    assert brute_count(conjoin(CnfFormula(1, ((1,),)), CnfFormula(1, ((-1,),)))) == 0
    with pytest.raises(ArityError):
        conjoin(f, CnfFormula.empty(3))


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 10), st.randoms(use_true_random=False))
def test_conjoin_counts_intersection(n, rnd):
    f = random_kcnf(n, rnd.randrange(2 * n), rnd, k=min(3, n))
    h = random_kcnf(n, rnd.randrange(2 * n), rnd, k=min(3, n))
    both = sum(1 for b in itertools.product([False, True], repeat=n) if evaluate(f, b) and evaluate(h, b))
    assert brute_count(conjoin(f, h)) == both


def test_tensor_power_examples():
    f = CnfFormula(2, ((1,),))
    assert tensor_power(f, 1) == f
    single = CnfFormula(1, ((1,),))
    cubed = tensor_power(single, 3)
    assert cubed.var_count == 3 and brute_count(cubed) == 1
    two = tensor_power(f, 3)
    assert two.var_count == 6 and brute_count(two) == 8
    with pytest.raises(ResourceLimit) as info:
        tensor_power(CnfFormula.empty(16), 3)
    assert info.value.wanted == 3


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 6), st.integers(1, 2), st.randoms(use_true_random=False))
def test_tensor_power_is_multiplicative(n, t, rnd):
    f = random_kcnf(n, rnd.randrange(2 * n), rnd, k=min(3, n))
    assert brute_count(tensor_power(f, t)) == brute_count(f) ** t


def test_xor_examples():
    f = CnfFormula.empty(2)
    assert add_xor_constraints(f, []) == f
    g = add_xor_constraints(f, [XorConstraint(frozenset({1, 2}), 0)])
    assert brute_count(g, over=2) == 2


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 8), st.integers(0, 4), st.randoms(use_true_random=False))
def test_xor_encoding_preserves_projected_models(n, c, rnd):
    f = random_kcnf(n, rnd.randrange(n + 1), rnd, k=min(3, n))
    xs = [random_xor(n, rnd) for _ in range(c)]
    want = sum(
        1 for b in itertools.product([False, True], repeat=n)
        if evaluate(f, b) and all(x.holds(b) for x in xs)
    )
    g = add_xor_constraints(f, xs)
    assert brute_count(g, over=n) == want
    # auxiliary variables are functionally determined, so no double counting
    assert brute_count(g) == want


def test_random_xor_halves_the_solution_space():
    """Each random constraint keeps each assignment with probability 1/2."""
    rng = random.Random(11)
    n = 8
    assignment = tuple(bool(v) for v in (1, 0, 1, 1, 0, 0, 1, 0))
    kept = sum(random_xor(n, rng).holds(assignment) for _ in range(4000))
    assert abs(kept / 4000 - 0.5) < 0.05
    total = 1 << n
    halves = []
    for _ in range(200):
        x = random_xor(n, rng)
        halves.append(sum(x.holds(b) for b in itertools.product([False, True], repeat=n)))
    nonzero = [h for h in halves if h]  # the all-zero constraint with parity 1 keeps nothing
    assert all(h in (total // 2, total) for h in nonzero)
    mean = sum(halves) / len(halves)
    assert abs(mean - total / 2) <= 0.1 * total / 2


@pytest.mark.parametrize("i", [1, 2, 3])
def test_pairwise_survival_is_four_to_the_minus_i(i):
    rng = random.Random(100 + i)
    n = 8
    a = (True, False, True, False, False, True, True, False)
    b = (False, False, True, True, False, True, False, True)
    trials = 20000
    both = 0
    for _ in range(trials):
        xs = [random_xor(n, rng) for _ in range(i)]
        both += all(x.holds(a) and x.holds(b) for x in xs)
    p = 4.0**-i
    assert abs(both / trials - p) < 4 * (p * (1 - p) / trials) ** 0.5 + 1e-3
