"""Approximate model counting with one round of parallel SAT queries.

Every repetition fixes n random parity constraints up front; level i of the
repetition is the formula conjoined with the first i of them. All levels of all
repetitions, plus a plain satisfiability probe, go to the oracle as a single
batch. A repetition's estimate is 2**i* for the deepest level i* that is still
satisfiable; the final estimate is the median over repetitions.

That raw estimator targets a factor of 2. Tighter factors g come from counting
the t-th tensor power of the formula and taking a t-th root, with the smallest
t such that 2**(1/t) <= g.
"""

from __future__ import annotations

import math
import random
import statistics
from dataclasses import dataclass
from fractions import Fraction

from .cnf import (
    DEFAULT_VAR_BUDGET,
    CnfFormula,
    XorConstraint,
    add_xor_constraints,
    conjoin,
    random_xor,
    tensor_power,
)
from .errors import ArityError, PostselectionImpossible
from .machine import QueryBatch
from .util import digest64

BASE_FACTOR = Fraction(2)
PIVOT = 1
ROOT_BITS = 16


@dataclass(frozen=True)
class HashLevelPlan:
    """repetitions[r] holds n constraints; level i uses the first i."""

    var_count: int
    repetitions: tuple[tuple[XorConstraint, ...], ...]

    def level(self, rep: int, i: int) -> tuple[XorConstraint, ...]:
        return self.repetitions[rep][:i]

    @property
    def levels(self) -> int:
        return self.var_count


@dataclass(frozen=True)
class ApproxCountResult:
    estimate: Fraction
    target_factor: Fraction
    confidence: Fraction
    oracle_rounds: int
    repetitions: int
    amplification: int = 1
    queries: int = 0

    def probability(self, var_count: int) -> Fraction:
        """The same estimate normalized by 2**var_count."""
        return self.estimate / (1 << var_count)


def _fraction(x) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(str(x))


def repetitions_for(delta) -> int:
    delta = _fraction(delta)
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    return 8 * math.ceil(math.log(1 / delta))


def derive_amplification(g, base_factor=BASE_FACTOR) -> int:
    """Smallest t with base_factor**(1/t) <= g, decided exactly."""
    g, base = _fraction(g), _fraction(base_factor)
    if g <= 1:
        raise ValueError("factor must exceed 1")
    t = 1
    while g**t < base:
        t += 1
    return t


def integer_root(n: int, t: int) -> int:
    """floor(n ** (1/t)) for n >= 0."""
    if n < 2 or t == 1:
        return n
    x = 1 << -(-n.bit_length() // t)
    while True:
        y = ((t - 1) * x + n // x ** (t - 1)) // t
        if y >= x:
            break
        x = y
    while x**t > n:
        x -= 1
    while (x + 1) ** t <= n:
        x += 1
    return x


def rational_root(value: Fraction, t: int, bits: int = ROOT_BITS) -> Fraction:
    """floor(value**(1/t) * 2**bits) / 2**bits, exactly."""
    if t == 1:
        return value
    scaled = value.numerator * (1 << (bits * t)) // value.denominator
    return Fraction(integer_root(scaled, t), 1 << bits)


def draw_plan(var_count: int, repetitions: int, rng: random.Random) -> HashLevelPlan:
    reps = tuple(
        tuple(random_xor(var_count, rng) for _ in range(var_count)) for _ in range(repetitions)
    )
    return HashLevelPlan(var_count, reps)


def count_queries(f: CnfFormula, plan: HashLevelPlan) -> list[CnfFormula]:
    """Probe query followed by levels 1..n of every repetition, rep-major."""
    if plan.var_count != f.var_count:
        raise ArityError("plan and formula disagree on var_count")
    queries = [f]
    for rep in range(len(plan.repetitions)):
        for i in range(1, plan.levels + 1):
            queries.append(add_xor_constraints(f, plan.level(rep, i)))
    return queries


def deepest_levels(plan: HashLevelPlan, answers) -> list[int] | None:
    """Per repetition, the deepest level whose prefix is all satisfiable.

    None when the probe says the formula is unsatisfiable.
    """
    if not answers[0]:
        return None
    n = plan.levels
    deepest = []
    for rep in range(len(plan.repetitions)):
        base = 1 + rep * n
        i = 0
        while i < n and answers[base + i]:
            i += 1
        deepest.append(i)
    return deepest


def raw_hash_estimate(f: CnfFormula, plan: HashLevelPlan, answers, pivot: int = PIVOT) -> Fraction:
    """Median over repetitions of pivot * 2**(deepest satisfiable level)."""
    expected = 1 + len(plan.repetitions) * plan.levels
    if len(answers) != expected:
        raise ValueError(f"expected {expected} answers, got {len(answers)}")
    deepest = deepest_levels(plan, answers)
    if deepest is None:
        return Fraction(0)
    return Fraction(pivot * 2 ** statistics.median_low(deepest))


def approx_count_parallel(
    f: CnfFormula,
    g,
    delta,
    oracle,
    rng: random.Random,
    base_factor=BASE_FACTOR,
    budget: int = DEFAULT_VAR_BUDGET,
) -> ApproxCountResult:
    """Estimate the model count of f within factor g, with probability >= 1-delta,
    using exactly one oracle round."""
    g, delta = _fraction(g), _fraction(delta)
    t = derive_amplification(g, base_factor)
    big = tensor_power(f, t, budget)
    reps = repetitions_for(delta)
    nonce = rng.getrandbits(64)
    plan = draw_plan(big.var_count, reps, random.Random(nonce))
    queries = count_queries(big, plan)
    rounds_before = oracle.stats.rounds
    sheet = oracle.submit(QueryBatch(tuple(queries), (digest64(f), digest64(nonce))))
    raw = raw_hash_estimate(big, plan, sheet.answers)
    return ApproxCountResult(
        estimate=rational_root(raw, t),
        target_factor=g,
        confidence=1 - delta,
        oracle_rounds=oracle.stats.rounds - rounds_before,
        repetitions=reps,
        amplification=t,
        queries=len(queries),
    )


def split_factor(g) -> Fraction:
    """Per-count factor g' = 1 + (g-1)/3, so that g'**2 <= g."""
    return 1 + (_fraction(g) - 1) / 3


def approx_count_ratio(
    f: CnfFormula,
    h: CnfFormula,
    g,
    delta,
    oracle,
    rng: random.Random,
    shared_plan: bool = False,
    base_factor=BASE_FACTOR,
    budget: int = DEFAULT_VAR_BUDGET,
) -> ApproxCountResult:
    """Estimate Pr[f | h] = #(f and h) / #h within factor g.

    Both counts target g' = 1 + (g-1)/3 with failure budget delta/2 each, and
    their queries share one batch. ``shared_plan`` reuses the numerator's hash
    draws for the denominator.
    """
    if f.var_count != h.var_count:
        raise ArityError(f"var_count mismatch: {f.var_count} vs {h.var_count}")
    g, delta = _fraction(g), _fraction(delta)
    g_each = split_factor(g)
    t = derive_amplification(g_each, base_factor)
    num_f = tensor_power(conjoin(f, h), t, budget)
    den_f = tensor_power(h, t, budget)
    reps = repetitions_for(delta / 2)
    nonce = rng.getrandbits(64)
    plan_rng = random.Random(nonce)
    plan_num = draw_plan(num_f.var_count, reps, plan_rng)
    plan_den = plan_num if shared_plan else draw_plan(den_f.var_count, reps, plan_rng)
    q_num = count_queries(num_f, plan_num)
    q_den = count_queries(den_f, plan_den)
    rounds_before = oracle.stats.rounds
    sheet = oracle.submit(
        QueryBatch(tuple(q_num + q_den), (digest64([f, h]), digest64(nonce)))
    )
    answers = sheet.answers
    a_num, a_den = answers[: len(q_num)], answers[len(q_num):]
    if not a_den[0]:
        raise PostselectionImpossible("the post-selection formula has no models")
    num = rational_root(raw_hash_estimate(num_f, plan_num, a_num), t)
    den = rational_root(raw_hash_estimate(den_f, plan_den, a_den), t)
    return ApproxCountResult(
        estimate=num / den,
        target_factor=g,
        confidence=1 - delta,
        oracle_rounds=oracle.stats.rounds - rounds_before,
        repetitions=reps,
        amplification=t,
        queries=len(q_num) + len(q_den),
    )


def within_factor(estimate, truth, g) -> bool:
    estimate, truth, g = Fraction(estimate), Fraction(truth), _fraction(g)
    if truth == 0:
        return estimate == 0
    return truth / g <= estimate <= truth * g


def error_composition_check(n: int, d: int) -> dict:
    """Exact check of (1 + 1/(3 n^d))^2 <= 1 + (7/9)/n^d < 1 + 1/n^d."""
    nd = Fraction(n) ** d
    squared = (1 + 1 / (3 * nd)) ** 2
    expanded = 1 + Fraction(2, 3) / nd + Fraction(1, 9) / nd**2
    relaxed = 1 + Fraction(7, 9) / nd
    target = 1 + 1 / nd
    return {
        "n": n,
        "d": d,
        "squared": squared,
        "expansion_matches": squared == expanded,
        "holds": squared == expanded and squared <= relaxed < target,
    }
