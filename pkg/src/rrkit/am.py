"""Monte-Carlo simulation of the advice-taking Arthur-Merlin protocol for
languages that randomly reduce to SAT.

Arthur holds advice p_i = Pr_r[SAT(sigma(i, x, r))], draws m = 9k^3 random
strings and receives from Merlin, for every query, either a witness or NIL.
He accepts iff
  (1) every witness satisfies its query,
  (2) phi accepts on every random string, reading NIL as 0 and a witness as 1,
  (3) for each index i, strictly more than p_i*m - 2*sqrt(k*m) queries were
      proved satisfiable.
Merlin is an in-process strategy; he can deny satisfiable queries (lie) but
cannot forge witnesses.
"""

from __future__ import annotations

import math
import random
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

from .cnf import Assignment, CnfFormula, evaluate
from .errors import ArityError, PolicyError, ResourceLimit
from .field import FieldMatrix, interpolate_at
from .machine import RandomReduction
from .oracles import SatOracle, ryser
from .rsr import decode_direction, sample_points
from .util import derive_rng

MAX_EXACT_ADVICE_BITS = 22

# 3 variables, 4 models
SAT_QUERY = CnfFormula(3, ((1, 2, 3), (-1, -2)))
UNSAT_QUERY = CnfFormula(3, ((1, 2, 3), (-1, -2), (1,), (-1,)))


def rounds_for(k: int) -> int:
    return 9 * k**3


def threshold(p: Fraction, k: int, m: int) -> Fraction:
    """p*m - 2*sqrt(k*m); exact because k*m = 9k^4 is a perfect square."""
    root = math.isqrt(k * m)
    if root * root != k * m:
        raise ValueError("k*m is not a perfect square")
    return p * m - 2 * root


# --------------------------------------------------------------------------
# fixtures


@dataclass(frozen=True)
class Fixture:
    name: str
    rr: RandomReduction
    language: Callable[[object], bool]
    yes_instance: object
    no_instance: object | None
    description: str = ""


def _bits(r: int, count: int) -> list[int]:
    return [(r >> i) & 1 for i in range(count)]


def parity_fixture(k: int, n: int) -> Fixture:
    """L(x) = x[0] for x in {0,1}^n.

    r supplies k-1 free bits c_0..c_{k-2} and an n-bit failure word e. The last
    bit is c_{k-1} = x[0] xor parity(c_0..c_{k-2}), so each c_i alone is a fair
    coin whatever x is. Query i is satisfiable iff c_i = 1, and phi returns the
    parity of the answers, flipped when e = 0 (probability 2**-n).
    """
    if k < 2:
        raise ValueError("the parity fixture needs k >= 2 for input-independent queries")
    free = k - 1

    def coins(x, r):
        c = _bits(r, free)
        c.append(x[0] ^ (sum(c) & 1))
        return c

    def sigma(i, x, r):
        return SAT_QUERY if coins(x, r)[i] else UNSAT_QUERY

    def phi(x, r, answers):
        e = r >> free
        return (sum(1 for a in answers if a) & 1) ^ (e == 0)

    rr = RandomReduction(
        name=f"parity(k={k},n={n})",
        k=k,
        randomness_space=1 << (free + n),
        sigma=sigma,
        phi=phi,
        instance_type=f"bits[{n}]",
        query_type="sat",
    )
    yes = (1,) + (0,) * (n - 1)
    no = (0,) * n
    return Fixture("parity", rr, lambda x: bool(x[0]), yes, no,
                   "queries are fair coins whose parity encodes x[0]")


def constant_fixture(k: int, n: int, satisfiable: bool) -> Fixture:
    """Every query is the same; phi accepts exactly the honest answer vector."""
    query = SAT_QUERY if satisfiable else UNSAT_QUERY
    rr = RandomReduction(
        name=f"{'all-sat' if satisfiable else 'all-unsat'}(k={k})",
        k=k,
        randomness_space=1 << n,
        sigma=lambda i, x, r: query,
        phi=lambda x, r, answers: int(all(bool(a) == satisfiable for a in answers)),
        instance_type=f"bits[{n}]",
        query_type="sat",
    )
    name = "all-sat" if satisfiable else "all-unsat"
    return Fixture(name, rr, lambda x: True, (0,) * n, None, "constant queries")


def half_fixture(k: int) -> Fixture:
    """Query i is satisfiable iff bit i of r is set; phi always accepts."""
    rr = RandomReduction(
        name=f"half(k={k})",
        k=k,
        randomness_space=1 << k,
        sigma=lambda i, x, r: SAT_QUERY if (r >> i) & 1 else UNSAT_QUERY,
        phi=lambda x, r, answers: 1,
        instance_type="any",
        query_type="sat",
    )
    return Fixture("half", rr, lambda x: True, (0,), None, "each query satisfiable for half of r")


def perm_bits_fixture(n: int = 2, modulus: int = 7) -> Fixture:
    """SAT reduction derived from the permanent's random self-reduction.

    Query (i, l) is satisfiable iff bit l of perm(A + t_i R) is set; phi
    rebuilds the n+1 values, interpolates perm(A) and accepts iff it is
    nonzero. Each A + t_i R is uniform, so the advice cannot depend on A.
    """
    p = modulus
    width = (p - 1).bit_length()
    points = sample_points(n)

    def value(i, a, r):
        return ryser(a.add_scaled(points[i], decode_direction(r, n, p)).rows, p)

    def sigma(idx, a, r):
        i, l = divmod(idx, width)
        return SAT_QUERY if (value(i, a, r) >> l) & 1 else UNSAT_QUERY

    def phi(a, r, answers):
        vals = [
            sum(1 << l for l in range(width) if answers[i * width + l]) % p
            for i in range(n + 1)
        ]
        return int(interpolate_at(points, vals, 0, p) != 0)

    rr = RandomReduction(
        name=f"perm-bits(n={n},p={p})",
        k=(n + 1) * width,
        randomness_space=p ** (n * n),
        sigma=sigma,
        phi=phi,
        instance_type=f"perm[{n},{p}]",
        query_type="sat",
    )
    yes = FieldMatrix.identity(n, p)
    no = FieldMatrix(p, tuple(tuple(1 if (i == 0) else 0 for _ in range(n)) for i in range(n)))
    return Fixture("perm-bits", rr, lambda a: ryser(a.rows, p) != 0, yes, no,
                   "bits of permanent values along a random line")


def complement(fixture: Fixture) -> Fixture:
    """Same queries, negated verdict: Merlin now proves membership in the complement."""
    rr = fixture.rr
    inner_phi = rr.phi
    flipped = RandomReduction(
        name=f"co-{rr.name}",
        k=rr.k,
        randomness_space=rr.randomness_space,
        sigma=rr.sigma,
        phi=lambda x, r, answers: 1 - int(inner_phi(x, r, answers)),
        instance_type=rr.instance_type,
        query_type=rr.query_type,
    )
    return Fixture(
        f"co-{fixture.name}", flipped, lambda x: not fixture.language(x),
        fixture.no_instance, fixture.yes_instance, f"complement of {fixture.name}",
    )


FIXTURES = {
    "parity": lambda k, n: parity_fixture(k, n),
    "all-sat": lambda k, n: constant_fixture(k, n, True),
    "all-unsat": lambda k, n: constant_fixture(k, n, False),
    "half": lambda k, n: half_fixture(k),
    "perm-bits": lambda k, n: perm_bits_fixture(),
}


def make_fixture(name: str, k: int, n: int) -> Fixture:
    base = name[3:] if name.startswith("co-") else name
    if base not in FIXTURES:
        raise KeyError(f"unknown fixture {name!r}; choose from {sorted(FIXTURES)}")
    fx = FIXTURES[base](k, n)
    return complement(fx) if name.startswith("co-") else fx


# --------------------------------------------------------------------------
# advice


@dataclass(frozen=True)
class Advice:
    probabilities: tuple[Fraction, ...]
    provenance: str  # "exact" or "sampled"
    samples: int | None = None


def compute_advice(
    rr: RandomReduction,
    x,
    oracle: SatOracle,
    mode: str = "exact",
    samples: int = 0,
    rng: random.Random | None = None,
) -> Advice:
    """p_i = Pr_r[query i is satisfiable]; any x of the right length will do."""
    counts = [0] * rr.k
    if mode == "exact":
        if rr.randomness_len > MAX_EXACT_ADVICE_BITS:
            raise ResourceLimit(
                f"{rr.randomness_len:.1f} random bits exceed the exact-advice budget "
                f"{MAX_EXACT_ADVICE_BITS}"
            )
        total = rr.randomness_space
        rs = range(total)
    elif mode == "sampled":
        if samples < 1 or rng is None:
            raise ValueError("sampled advice needs samples >= 1 and an rng")
        total = samples
        rs = (rr.draw(rng) for _ in range(samples))
    else:
        raise ValueError(f"unknown advice mode {mode!r}")
    for r in rs:
        for i in range(rr.k):
            if oracle.evaluate(rr.sigma(i, x, r)):
                counts[i] += 1
    return Advice(
        tuple(Fraction(c, total) for c in counts),
        mode,
        None if mode == "exact" else samples,
    )


# --------------------------------------------------------------------------
# Merlin


@dataclass(frozen=True)
class Transcript:
    witnesses: tuple[Assignment | None, ...]

    def bits(self) -> list[int]:
        return [int(w is not None) for w in self.witnesses]


@dataclass(frozen=True)
class MerlinStrategy:
    """Honest, or adversarial with a target index and a per-index lie budget.

    Adversarial Merlin is greedy: on a random string where the honest answers
    make phi reject, he denies satisfiable queries (target index first, then,
    with ``spread``, the least-used other indices) until phi accepts, and tells
    the truth if no such set of lies exists. With ``greedy=False`` he instead
    denies every satisfiable query at the target index, up to the budget.
    """

    kind: str = "honest"
    target: int = 0
    lie_budget: int = 0
    spread: bool = False
    greedy: bool = True

    @classmethod
    def honest(cls) -> MerlinStrategy:
        return cls()

    @classmethod
    def adversarial(cls, target: int = 0, lie_budget: int = 0, spread: bool = False,
                    greedy: bool = True) -> MerlinStrategy:
        return cls("adversarial", target, lie_budget, spread, greedy)


def merlin_honest(batches: Sequence[Sequence[CnfFormula]], oracle: SatOracle) -> list[Transcript]:
    out = []
    for queries in batches:
        out.append(Transcript(tuple(oracle.decide(q).witness for q in queries)))
    return out


def merlin_adversarial(
    batches: Sequence[Sequence[CnfFormula]],
    oracle: SatOracle,
    policy: MerlinStrategy,
    x,
    rr: RandomReduction,
    rs: Sequence[int],
) -> list[Transcript]:
    k = rr.k
    if not 0 <= policy.target < k:
        raise PolicyError(f"target index {policy.target} outside 0..{k - 1}")
    if policy.lie_budget < 0:
        raise PolicyError("lie budget must be non-negative")
    honest = merlin_honest(batches, oracle)
    used = [0] * k
    out = []
    for transcript, r in zip(honest, rs):
        w = list(transcript.witnesses)
        b = transcript.bits()
        if not policy.greedy:
            t = policy.target
            if b[t] and used[t] < policy.lie_budget:
                w[t] = None
                used[t] += 1
            out.append(Transcript(tuple(w)))
            continue
        if rr.phi(x, r, b):
            out.append(transcript)
            continue
        order = [policy.target] if b[policy.target] else []
        if policy.spread:
            others = [i for i in range(k) if i != policy.target and b[i]]
            order += sorted(others, key=lambda i: (used[i], i))
        order = [i for i in order if used[i] < policy.lie_budget]
        lies = _cheapest_lies(x, rr, r, b, order)
        for i in lies:
            w[i] = None
            used[i] += 1
        out.append(Transcript(tuple(w)))
    return out


def _cheapest_lies(x, rr, r, b, order) -> list[int]:
    for i in order:
        trial = list(b)
        trial[i] = 0
        if rr.phi(x, r, trial):
            return [i]
    trial = list(b)
    lies = []
    for i in order:
        trial[i] = 0
        lies.append(i)
        if rr.phi(x, r, trial):
            return lies
    return []


# --------------------------------------------------------------------------
# Arthur


@dataclass
class ProtocolOutcome:
    accepted: bool
    failed_check: int | None
    z: list[int]
    thresholds: list[Fraction]
    check1_failures: int = 0
    check2_failures: int = 0
    check3_failures: list[int] = field(default_factory=list)
    lies: int = 0


def _witness_ok(query: CnfFormula, w) -> bool:
    try:
        return bool(evaluate(query, w))
    except ArityError:
        return False


def arthur_session(
    x,
    rr: RandomReduction,
    advice: Advice,
    merlin: MerlinStrategy,
    rng: random.Random,
    oracle: SatOracle | None = None,
) -> ProtocolOutcome:
    if len(advice.probabilities) != rr.k:
        raise ValueError(f"advice has {len(advice.probabilities)} entries, reduction has k={rr.k}")
    oracle = oracle or SatOracle()
    k = rr.k
    m = rounds_for(k)
    rs = [rr.draw(rng) for _ in range(m)]
    batches = [rr.queries(x, r) for r in rs]
    if merlin.kind == "honest":
        transcripts = merlin_honest(batches, oracle)
    elif merlin.kind == "adversarial":
        transcripts = merlin_adversarial(batches, oracle, merlin, x, rr, rs)
    else:
        raise PolicyError(f"unknown Merlin kind {merlin.kind!r}")

    check1 = check2 = 0
    z = [0] * k
    lies = 0
    for queries, transcript, r in zip(batches, transcripts, rs):
        for q, w in zip(queries, transcript.witnesses):
            if w is not None and not _witness_ok(q, w):
                check1 += 1
        b = transcript.bits()
        for i, bit in enumerate(b):
            z[i] += bit
        if not rr.phi(x, r, b):
            check2 += 1
        if merlin.kind == "adversarial":
            lies += sum(1 for q, bit in zip(queries, b) if not bit and oracle.evaluate(q))
    thresholds = [threshold(p, k, m) for p in advice.probabilities]
    check3 = [i for i in range(k) if not z[i] > thresholds[i]]
    failed = 1 if check1 else 2 if check2 else 3 if check3 else None
    return ProtocolOutcome(failed is None, failed, z, thresholds, check1, check2, check3, lies)


@dataclass
class SimulationReport:
    fixture: str
    k: int
    n: int
    m: int
    instance: str
    merlin: str
    sessions: int
    accepted: int
    failures: dict
    failures_any: dict
    thresholds: list[Fraction]
    mean_z: list[float]
    advice: Advice

    @property
    def accept_rate(self) -> float:
        return self.accepted / self.sessions


def simulate(
    fixture: Fixture,
    k: int,
    n: int,
    merlin: MerlinStrategy,
    sessions: int,
    seed: int,
    planted: str = "yes",
    advice: Advice | None = None,
) -> SimulationReport:
    """Run independent sessions on the planted yes- or no-instance."""
    x = fixture.yes_instance if planted == "yes" else fixture.no_instance
    if x is None:
        raise ValueError(f"fixture {fixture.name} has no {planted}-instance")
    oracle = SatOracle()
    if advice is None:
        advice = compute_advice(fixture.rr, fixture.yes_instance, oracle)
    accepted = 0
    failures: Counter = Counter()
    failures_any: Counter = Counter()
    zsum = [0] * fixture.rr.k
    thresholds: list[Fraction] = []
    for s in range(sessions):
        out = arthur_session(x, fixture.rr, advice, merlin, derive_rng(seed, "session", s), oracle)
        accepted += out.accepted
        if out.failed_check:
            failures[out.failed_check] += 1
        failures_any[1] += out.check1_failures > 0
        failures_any[2] += out.check2_failures > 0
        failures_any[3] += bool(out.check3_failures)
        zsum = [a + b for a, b in zip(zsum, out.z)]
        thresholds = out.thresholds
    return SimulationReport(
        fixture=fixture.name,
        k=fixture.rr.k,
        n=n,
        m=rounds_for(fixture.rr.k),
        instance=planted,
        merlin=merlin.kind,
        sessions=sessions,
        accepted=accepted,
        failures={c: failures.get(c, 0) for c in (1, 2, 3)},
        failures_any={c: failures_any.get(c, 0) for c in (1, 2, 3)},
        thresholds=thresholds,
        mean_z=[v / sessions for v in zsum],
        advice=advice,
    )


# --------------------------------------------------------------------------
# bound audit


def completeness_slack(n: int) -> Fraction:
    return Fraction(1, 4) + Fraction(1, 2**n)


def soundness_slack(k: int, n: int) -> Fraction:
    return rounds_for(k) * Fraction(1, 2**n) + Fraction(1, 4 * k)


def min_certified_n(k: int) -> int:
    n = 1
    while completeness_slack(n) >= Fraction(1, 3) or soundness_slack(k, n) >= Fraction(1, 3):
        n += 1
    return n


def bound_audit(k_range: Sequence[int], n_range: Sequence[int]) -> dict:
    """Check the protocol's arithmetic for every k and (k, n) in range."""
    per_k = []
    for k in k_range:
        m = rounds_for(k)
        root = math.isqrt(k * m)
        gap = Fraction(m, k) - 2 * root
        chernoff_exponent = Fraction(2 * (3 * k * k) ** 2, m)
        per_k.append({
            "k": k,
            "m": m,
            "sqrt_km": root,
            "sqrt_exact": root * root == k * m,
            "lying_gap": gap,
            "lying_gap_is_3k2": gap == 3 * k * k,
            "chebyshev": Fraction(m, 4 * k * m),
            "chebyshev_is_1_over_4k": Fraction(m, 4 * k * m) == Fraction(1, 4 * k),
            "chernoff_exponent": chernoff_exponent,
            "chernoff_exponent_is_2k": chernoff_exponent == 2 * k,
            "chernoff_le_1_over_4k": math.exp(-2 * k) <= 1 / (4 * k),
            "min_certified_n": min_certified_n(k),
        })
    pairs = []
    for k in k_range:
        for n in n_range:
            c, s = completeness_slack(n), soundness_slack(k, n)
            pairs.append({
                "k": k,
                "n": n,
                "completeness_slack": c,
                "soundness_slack": s,
                "completeness_ok": c < Fraction(1, 3),
                "soundness_ok": s < Fraction(1, 3),
                "certified": c < Fraction(1, 3) and s < Fraction(1, 3),
            })
    return {"per_k": per_k, "pairs": pairs}
