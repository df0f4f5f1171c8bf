"""Non-adaptive random reductions and the one-round query discipline.

A reduction is the triple (sigma, phi, k) plus a declared randomness space:
``r`` is a uniform integer in ``range(randomness_space)``. Binary spaces make
``randomness_len`` the plain bit count; composed strings r#r_1#...#r_k are the
mixed-radix concatenation of the parts, so lengths add.

Query indices are 0-based throughout.
"""

from __future__ import annotations

import math
import random
from collections import Counter
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Any, Callable, Sequence

from .errors import CompositionError
from .util import digest64

Sigma = Callable[[int, Any, int], Any]
Phi = Callable[[Any, int, Sequence[Any]], Any]


@dataclass(frozen=True)
class QueryBatch:
    queries: tuple
    provenance: tuple[int, int]

    def __len__(self):
        return len(self.queries)


@dataclass(frozen=True)
class OracleAnswerSheet:
    batch: QueryBatch
    answers: tuple

    def __post_init__(self):
        if len(self.answers) != len(self.batch.queries):
            raise ValueError("answer sheet does not match its batch")

    def __len__(self):
        return len(self.answers)

    def __getitem__(self, i):
        return self.answers[i]


@dataclass(frozen=True)
class RandomReduction:
    """f is computed as phi(x, r, g(sigma(0,x,r)), ..., g(sigma(k-1,x,r)))."""

    name: str
    k: int
    randomness_space: int
    sigma: Sigma
    phi: Phi
    instance_type: str = "any"
    query_type: str = "any"
    meta: dict = field(default_factory=dict, compare=False)

    @property
    def randomness_len(self) -> float:
        """log2 of the randomness space (an integer for binary spaces)."""
        bits = self.randomness_space.bit_length() - 1
        if self.randomness_space == 1 << bits:
            return bits
        return math.log2(self.randomness_space)

    def draw(self, rng: random.Random) -> int:
        return rng.randrange(self.randomness_space)

    def queries(self, x, r: int) -> tuple:
        return tuple(self.sigma(i, x, r) for i in range(self.k))


def make_batch(rr: RandomReduction, x, r: int) -> QueryBatch:
    """Materialize every query of one invocation before any answer exists."""
    return QueryBatch(rr.queries(x, r), (digest64(x), digest64(r)))


def run_reduction(rr: RandomReduction, x, oracle, rng: random.Random):
    """Draw r once, submit the whole batch as one round, return phi's output."""
    r = rr.draw(rng)
    sheet = oracle.submit(make_batch(rr, x, r))
    return rr.phi(x, r, sheet.answers)


def identity_reduction(instance_type: str = "any") -> RandomReduction:
    return RandomReduction(
        name="identity",
        k=1,
        randomness_space=1,
        sigma=lambda i, x, r: x,
        phi=lambda x, r, answers: answers[0],
        instance_type=instance_type,
        query_type=instance_type,
    )


def canonical_key(value):
    try:
        return (0, type(value).__name__, value) if isinstance(value, (int, float, bool)) else (
            1, type(value).__name__, repr(value))
    except TypeError:
        return (2, type(value).__name__, repr(value))


def plurality(values: Sequence[Any]):
    """Most frequent value; ties go to the smallest under ``canonical_key``."""
    counts = Counter(values)
    top = max(counts.values())
    return min((v for v, c in counts.items() if c == top), key=canonical_key)


def split_random(r: int, sizes: Sequence[int]) -> list[int]:
    parts = []
    for s in sizes:
        r, part = divmod(r, s)
        parts.append(part)
    return parts


def boost(rr: RandomReduction, t: int) -> RandomReduction:
    """24*t independent runs of ``rr`` in one batch, answered by plurality.

    Needs a single-valued target (a function, not a relation). If one run
    succeeds with probability p >= 2/3, the plurality of 24t runs fails with
    probability at most exp(-2 (p - 1/2)^2 24 t) <= 2**-t.
    """
    if t < 1:
        raise ValueError("t must be positive")
    runs = 24 * t
    k = rr.k
    space = rr.randomness_space

    @lru_cache(maxsize=4)
    def parts_of(r):
        return split_random(r, [space] * runs)

    def sigma(idx, x, r):
        run, i = divmod(idx, k)
        return rr.sigma(i, x, parts_of(r)[run])

    def phi(x, r, answers):
        parts = parts_of(r)
        outs = [rr.phi(x, parts[run], answers[run * k:(run + 1) * k]) for run in range(runs)]
        return plurality(outs)

    return RandomReduction(
        name=f"boost({rr.name},t={t})",
        k=runs * k,
        randomness_space=space**runs,
        sigma=sigma,
        phi=phi,
        instance_type=rr.instance_type,
        query_type=rr.query_type,
        meta={"inner": rr, "t": t, "runs": runs},
    )


def compose(outer: RandomReduction, inner: RandomReduction) -> RandomReduction:
    """Answer each of outer's k queries with inner's m queries, in one batch.

    Flat query index j*m + i is inner.sigma(i, outer.sigma(j, x, r), r_j) and
    the combined random string is r#r_0#...#r_{k-1}.
    """
    if outer.query_type != inner.instance_type and "any" not in (outer.query_type, inner.instance_type):
        raise CompositionError(
            f"outer emits {outer.query_type!r} queries, inner solves {inner.instance_type!r}"
        )
    k, m = outer.k, inner.k
    s0, s1 = outer.randomness_space, inner.randomness_space
    sizes = [s0] + [s1] * k

    @lru_cache(maxsize=4)
    def parts_of(rr_):
        return split_random(rr_, sizes)

    def sigma(idx, x, rr_):
        j, i = divmod(idx, m)
        parts = parts_of(rr_)
        return inner.sigma(i, outer.sigma(j, x, parts[0]), parts[1 + j])

    def phi(x, rr_, answers):
        parts = parts_of(rr_)
        r = parts[0]
        sub = [
            inner.phi(outer.sigma(j, x, r), parts[1 + j], answers[j * m:(j + 1) * m])
            for j in range(k)
        ]
        return outer.phi(x, r, sub)

    return RandomReduction(
        name=f"compose({outer.name},{inner.name})",
        k=k * m,
        randomness_space=s0 * s1**k,
        sigma=sigma,
        phi=phi,
        instance_type=outer.instance_type,
        query_type=inner.query_type,
        meta={"outer": outer, "inner": inner},
    )


def tv_distance(a: Counter, b: Counter) -> float:
    na, nb = sum(a.values()), sum(b.values())
    keys = set(a) | set(b)
    return 0.5 * sum(abs(a[key] / na - b[key] / nb) for key in keys)


def hashed_histogram(items, buckets: int | None) -> Counter:
    if buckets is None:
        return Counter(digest64(q) for q in items)
    return Counter(digest64(q) % buckets for q in items)


def marginal_distribution_probe(
    rr: RandomReduction,
    i: int,
    x1,
    x2,
    samples: int,
    rng: random.Random,
    buckets: int | None = 256,
) -> float:
    """Empirical TV distance between the laws of sigma(i, x1, .) and sigma(i, x2, .).

    Queries are projected through a 64-bit digest onto ``buckets`` cells so the
    plug-in estimate has a usable noise floor (about 0.4*sqrt(2*buckets/samples)).
    Pass ``buckets=None`` to compare raw digests.
    """
    rs = [rr.draw(rng) for _ in range(samples)]
    h1 = hashed_histogram((rr.sigma(i, x1, r) for r in rs), buckets)
    h2 = hashed_histogram((rr.sigma(i, x2, r) for r in rs), buckets)
    return tv_distance(h1, h2)
