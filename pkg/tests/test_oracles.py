import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rrkit.cnf import CnfFormula, evaluate, random_kcnf
from rrkit.errors import ResourceLimit
from rrkit.field import FieldMatrix
from rrkit.machine import QueryBatch
from rrkit.oracles import (
    CountOracle,
    FaultyOracle,
    PermanentOracle,
    SatOracle,
    count_exact,
    faulty_oracle,
    permanent_exact,
    sat_decide,
)
from rrkit.rsr import random_matrix
from rrkit.sat import dpll


def perm_by_permutations(rows, p):
    n = len(rows)
    total = 0
    for s in itertools.permutations(range(n)):
        prod = 1
        for i in range(n):
            prod *= rows[i][s[i]]
        total += prod
    return total % p


def test_permanent_examples():
    assert permanent_exact(FieldMatrix.identity(3, 101)).value == 1
    assert permanent_exact(FieldMatrix.from_entries([[1, 2], [3, 4]], 101)).value == 10
    assert permanent_exact(FieldMatrix.from_entries([[1] * 4] * 4, 101)).value == 24
    with pytest.raises(ResourceLimit):
        permanent_exact(FieldMatrix.identity(21, 101))


@settings(max_examples=150, deadline=None)
@given(st.integers(1, 6), st.sampled_from([7, 101]), st.randoms(use_true_random=False))
def test_ryser_matches_permutation_expansion(n, p, rnd):
    a = random_matrix(n, p, rnd)
    assert permanent_exact(a).value == perm_by_permutations(a.rows, p)


def test_count_examples():
    assert count_exact(CnfFormula.empty(5)) == 32
    assert count_exact(CnfFormula(2, ((1, 2),))) == 3
    assert count_exact(CnfFormula(1, ((1,), (-1,)))) == 0
    with pytest.raises(ResourceLimit):
        count_exact(CnfFormula.empty(27))


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 10), st.randoms(use_true_random=False))
def test_count_matches_truth_table(n, rnd):
    f = random_kcnf(n, rnd.randrange(3 * n), rnd, k=min(3, n))
    want = sum(evaluate(f, b) for b in itertools.product([False, True], repeat=n))
    assert count_exact(f) == want


def test_sat_examples():
    v = sat_decide(CnfFormula(1, ((1,),)))
    assert v.satisfiable and v.witness == (True,)
    v = sat_decide(CnfFormula(1, ((1,), (-1,))))
    assert not v.satisfiable and v.witness is None


def test_sat_agrees_with_count_on_500_formulas():
    rng = random.Random(2024)
    for _ in range(500):
        n = rng.randint(3, 20)
        f = random_kcnf(n, int(n * rng.uniform(1, 5)), rng)
        w = dpll(f)
        assert (w is not None) == (count_exact(f) > 0)
        if w is not None:
            assert evaluate(f, w) == 1


def test_faulty_oracle_extremes():
    qs = tuple(FieldMatrix.from_entries([[i, 1], [2, 3]], 101) for i in range(50))
    truth = PermanentOracle().submit(QueryBatch(qs, (0, 0))).answers
    assert faulty_oracle(PermanentOracle(), 0, seed=1).submit(QueryBatch(qs, (0, 0))).answers == truth
    wrong = faulty_oracle(PermanentOracle(), 1, seed=1).submit(QueryBatch(qs, (0, 0))).answers
    assert all(a != b for a, b in zip(wrong, truth))
    flipped = FaultyOracle(SatOracle(), 1, seed=3).submit(QueryBatch((CnfFormula.empty(1),), (0, 0))).answers
    assert flipped == (False,)
    counts = FaultyOracle(CountOracle(), 1, seed=3).submit(QueryBatch((CnfFormula.empty(2),), (0, 0))).answers
    assert counts[0] != 4 and 0 <= counts[0] <= 4


def test_faulty_error_rate_near_epsilon():
    f = CnfFormula.empty(1)
    o = FaultyOracle(SatOracle(), 0.05, seed=99)
    answers = o.submit(QueryBatch((f,) * 10_000, (0, 0))).answers
    rate = sum(not a for a in answers) / 10_000
    assert 0.04 <= rate <= 0.06


def test_oracle_counts_rounds():
    o = SatOracle()
    o.submit(QueryBatch((CnfFormula.empty(1),) * 3, (0, 0)))
    o.submit(QueryBatch((CnfFormula.empty(1),), (0, 0)))
    assert (o.stats.rounds, o.stats.total_queries, o.stats.max_batch) == (2, 4, 3)


def test_worker_split_does_not_change_faulty_answers():
    qs = tuple(FieldMatrix.from_entries([[i, 1], [2, i]], 101) for i in range(40))
    one = FaultyOracle(PermanentOracle(), 0.3, seed=5, workers=1).submit(QueryBatch(qs, (0, 0))).answers
    two = FaultyOracle(PermanentOracle(), 0.3, seed=5, workers=2).submit(QueryBatch(qs, (0, 0))).answers
    assert one == two
