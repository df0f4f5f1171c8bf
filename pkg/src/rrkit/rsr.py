"""Random self-reduction of the permanent along a random line.

For an n x n instance A and a uniformly random direction R, the univariate
polynomial q(t) = perm(A + tR) has degree at most n and q(0) = perm(A). The
reduction queries the n+1 points t = 1..n+1 (each A + tR is a uniform matrix
on its own) and recovers q(0) by interpolation.
"""

from __future__ import annotations

import random

from .errors import ArityError, FieldTooSmall
from .field import FieldMatrix, default_modulus, interpolate_at
from .machine import RandomReduction, boost, run_reduction
from .oracles import FaultyOracle, PermanentOracle, ryser
from .util import derive_rng, split_seed


def decode_direction(r: int, n: int, p: int) -> FieldMatrix:
    """Read an n x n matrix from the base-p digits of r."""
    entries = []
    for _ in range(n):
        row = []
        for _ in range(n):
            r, d = divmod(r, p)
            row.append(d)
        entries.append(tuple(row))
    return FieldMatrix._trusted(p, tuple(entries))


def sample_points(n: int) -> list[int]:
    return list(range(1, n + 2))


def perm_rsr(n: int, modulus: int | None = None) -> RandomReduction:
    """The permanent's random self-reduction on n x n matrices over GF(modulus).

    Outputs perm(A) as a residue in [0, modulus).
    """
    p = default_modulus(n) if modulus is None else modulus
    if p < n + 2:
        raise FieldTooSmall(f"GF({p}) has fewer than {n + 1} distinct nonzero points")
    points = sample_points(n)

    def check(a: FieldMatrix) -> None:
        if a.n != n or a.modulus != p:
            raise ArityError(f"expected {n}x{n} over GF({p}), got {a.n}x{a.n} over GF({a.modulus})")

    def sigma(i: int, a: FieldMatrix, r: int) -> FieldMatrix:
        check(a)
        return a.add_scaled(points[i], decode_direction(r, n, p))

    def phi(a: FieldMatrix, r: int, answers) -> int:
        return interpolate_at(points, [int(v) % p for v in answers], 0, p)

    return RandomReduction(
        name=f"perm-rsr(n={n},p={p})",
        k=n + 1,
        randomness_space=p ** (n * n),
        sigma=sigma,
        phi=phi,
        instance_type=f"perm[{n},{p}]",
        query_type=f"perm[{n},{p}]",
        meta={"n": n, "modulus": p, "points": points},
    )


def random_matrix(n: int, p: int, rng: random.Random) -> FieldMatrix:
    return FieldMatrix(p, tuple(tuple(rng.randrange(p) for _ in range(n)) for _ in range(n)))


def perm_rsr_success_curve(
    n: int,
    epsilon: float,
    trials: int,
    seed: int,
    modulus: int | None = None,
    boost_t: int | None = None,
) -> float:
    """Fraction of trials in which the (optionally boosted) reduction, run
    against a permanent oracle that errs with probability ``epsilon`` per
    query, returns the true permanent of a fresh random matrix."""
    if not 0 <= epsilon < 1:
        raise ValueError("epsilon must lie in [0, 1)")
    rr = perm_rsr(n, modulus)
    p = rr.meta["modulus"]
    if boost_t:
        rr = boost(rr, boost_t)
    oracle = FaultyOracle(PermanentOracle(), epsilon, split_seed(seed, "oracle"))
    hits = 0
    for trial in range(trials):
        a = random_matrix(n, p, derive_rng(seed, "matrix", trial))
        out = run_reduction(rr, a, oracle, derive_rng(seed, "r", trial))
        hits += out == ryser(a.rows, p)
    return hits / trials
