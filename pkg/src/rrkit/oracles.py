"""Ground-truth oracles: Ryser permanent, exact #SAT, SAT with witnesses, and a
fault-injecting wrapper."""

from __future__ import annotations

import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import lru_cache
from typing import Any, Sequence

import numpy as np

from .cnf import Assignment, CnfFormula
from .errors import ResourceLimit
from .field import FieldElement, FieldMatrix
from .machine import OracleAnswerSheet, QueryBatch
from .sat import dpll
from .util import unit_hash

MAX_PERMANENT_DIM = 20
MAX_COUNT_VARS = 26


@dataclass(frozen=True)
class SatVerdict:
    satisfiable: bool
    witness: Assignment | None = None


@dataclass
class OracleStats:
    total_queries: int = 0
    rounds: int = 0
    max_batch: int = 0

    def record(self, size: int) -> None:
        self.total_queries += size
        self.rounds += 1
        self.max_batch = max(self.max_batch, size)


def ryser(rows: Sequence[Sequence[int]], p: int) -> int:
    """Permanent mod p by Ryser's formula, walking subsets in Gray-code order."""
    n = len(rows)
    cols = [[rows[i][j] for i in range(n)] for j in range(n)]
    sums = [0] * n
    total = 0
    size = 0
    for g in range(1, 1 << n):
        j = (g & -g).bit_length() - 1
        col = cols[j]
        if (g ^ (g >> 1)) >> j & 1:
            for i in range(n):
                sums[i] += col[i]
            size += 1
        else:
            for i in range(n):
                sums[i] -= col[i]
            size -= 1
        prod = 1
        for s in sums:
            prod *= s
        if size & 1:
            total -= prod
        else:
            total += prod
    if n & 1:
        total = -total
    return total % p


def permanent_exact(a: FieldMatrix) -> FieldElement:
    if a.n > MAX_PERMANENT_DIM:
        raise ResourceLimit(f"permanent of dimension {a.n} exceeds {MAX_PERMANENT_DIM}", wanted=a.n)
    return FieldElement(ryser(a.rows, a.modulus), a.modulus)


def count_exact(f: CnfFormula) -> int:
    """Number of satisfying assignments, by vectorized enumeration."""
    n = f.var_count
    if n > MAX_COUNT_VARS:
        raise ResourceLimit(f"{n} variables exceed the enumeration budget {MAX_COUNT_VARS}", wanted=n)
    if not f.clauses:
        return 1 << n
    chunk_bits = min(n, 20)
    idx = np.arange(1 << chunk_bits, dtype=np.int64)
    low = [((idx >> v) & 1).astype(bool) for v in range(chunk_bits)]
    total = 0
    for hi in range(1 << (n - chunk_bits)):
        bits = low + [np.full(1 << chunk_bits, bool(hi >> (v - chunk_bits) & 1)) for v in range(chunk_bits, n)]
        ok = np.ones(1 << chunk_bits, dtype=bool)
        for c in f.clauses:
            sat = np.zeros(1 << chunk_bits, dtype=bool)
            for l in c:
                sat |= bits[l - 1] if l > 0 else ~bits[-l - 1]
            ok &= sat
        total += int(ok.sum())
    return total


@lru_cache(maxsize=8192)
def sat_decide(f: CnfFormula) -> SatVerdict:
    w = dpll(f)
    return SatVerdict(w is not None, w)


def _evaluate_slice(oracle: "Oracle", round_no: int, start: int, queries: tuple) -> list:
    return [oracle.answer(round_no, start + i, q) for i, q in enumerate(queries)]


class Oracle:
    """Answers batches of queries; each ``submit`` is one round."""

    name = "oracle"

    def __init__(self, workers: int = 1):
        self.workers = workers
        self.stats = OracleStats()

    def evaluate(self, query) -> Any:
        raise NotImplementedError

    def corrupt(self, query, answer, rng: random.Random) -> Any:
        """A wrong answer for ``query``; used by the fault wrapper."""
        raise NotImplementedError

    def answer(self, round_no: int, index: int, query) -> Any:
        return self.evaluate(query)

    def submit(self, batch: QueryBatch) -> OracleAnswerSheet:
        round_no = self.stats.rounds
        self.stats.record(len(batch))
        queries = batch.queries
        if self.workers <= 1 or len(queries) < 2 * self.workers:
            answers = _evaluate_slice(self, round_no, 0, queries)
        else:
            step = -(-len(queries) // self.workers)
            starts = range(0, len(queries), step)
            with ProcessPoolExecutor(max_workers=self.workers) as pool:
                parts = pool.map(
                    _evaluate_slice,
                    [self] * len(starts),
                    [round_no] * len(starts),
                    starts,
                    [queries[s:s + step] for s in starts],
                )
                answers = [a for part in parts for a in part]
        return OracleAnswerSheet(batch, tuple(answers))

    def __getstate__(self):
        state = self.__dict__.copy()
        state["stats"] = OracleStats()
        return state


class PermanentOracle(Oracle):
    """g(A) = perm(A) as a residue."""

    name = "permanent"

    def evaluate(self, query: FieldMatrix) -> int:
        if query.n > MAX_PERMANENT_DIM:
            raise ResourceLimit(f"permanent of dimension {query.n} exceeds {MAX_PERMANENT_DIM}")
        return ryser(query.rows, query.modulus)

    def corrupt(self, query, answer, rng):
        # any nonzero offset
        return (answer + rng.randrange(1, query.modulus)) % query.modulus


class CountOracle(Oracle):
    name = "count"

    def evaluate(self, query: CnfFormula) -> int:
        return count_exact(query)

    def corrupt(self, query, answer, rng):
        wrong = rng.randrange((1 << query.var_count))
        return wrong if wrong < answer else wrong + 1


class SatOracle(Oracle):
    """Decision oracle; ``evaluate`` gives the bit, ``decide`` adds a witness."""

    name = "sat"

    def evaluate(self, query: CnfFormula) -> bool:
        return sat_decide(query).satisfiable

    def decide(self, query: CnfFormula) -> SatVerdict:
        return sat_decide(query)

    def corrupt(self, query, answer, rng):
        return not answer


class FaultyOracle(Oracle):
    """Each answer is independently wrong with probability ``epsilon``.

    The coin for a query depends only on (seed, round, index), so answers do
    not depend on how a batch is split across workers.
    """

    def __init__(self, inner: Oracle, epsilon: float, seed: int, workers: int | None = None):
        if not 0 <= epsilon <= 1:
            raise ValueError("epsilon must lie in [0, 1]")
        super().__init__(inner.workers if workers is None else workers)
        self.inner = inner
        self.epsilon = epsilon
        self.seed = seed
        self.name = f"faulty({inner.name},{epsilon})"

    def evaluate(self, query):
        return self.inner.evaluate(query)

    def answer(self, round_no, index, query):
        truth = self.inner.evaluate(query)
        h = unit_hash(self.seed, round_no, index)
        if h < self.epsilon * 2.0**64:
            return self.inner.corrupt(query, truth, random.Random(h))
        return truth

    def corrupt(self, query, answer, rng):
        return self.inner.corrupt(query, answer, rng)


def faulty_oracle(inner: Oracle, epsilon: float, seed: int) -> FaultyOracle:
    return FaultyOracle(inner, epsilon, seed)
