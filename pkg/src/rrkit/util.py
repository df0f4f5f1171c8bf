"""Seed splitting and canonical digests."""

from __future__ import annotations

import hashlib
import json
import random
from fractions import Fraction
from typing import Any


def _canonical(obj: Any) -> Any:
    if hasattr(obj, "canonical"):
        return obj.canonical()
    if isinstance(obj, Fraction):
        return ["frac", obj.numerator, obj.denominator]
    if isinstance(obj, (list, tuple)):
        return [_canonical(o) for o in obj]
    if isinstance(obj, bool) or obj is None or isinstance(obj, (int, str, float)):
        return obj
    raise TypeError(f"no canonical form for {type(obj).__name__}")


def canonical_bytes(obj: Any) -> bytes:
    return json.dumps(_canonical(obj), separators=(",", ":"), sort_keys=True).encode()


def digest64(obj: Any) -> int:
    """64-bit canonical hash of an instance, query or random string."""
    h = hashlib.blake2b(canonical_bytes(obj), digest_size=8)
    return int.from_bytes(h.digest(), "big")


def split_seed(seed: int, *labels: Any) -> int:
    """Derive an independent 64-bit seed from ``seed`` and a label path.

    The derivation only depends on its arguments, so streams handed to
    concurrent workers do not depend on scheduling order.
    """
    payload = canonical_bytes([seed & (2**64 - 1), [str(l) for l in labels]])
    return int.from_bytes(hashlib.blake2b(payload, digest_size=8).digest(), "big")


def derive_rng(seed: int, *labels: Any) -> random.Random:
    return random.Random(split_seed(seed, *labels))


def unit_hash(seed: int, *ints: int) -> int:
    """Fast 64-bit hash of a seed and a short tuple of non-negative ints."""
    payload = b"".join(int(v & (2**64 - 1)).to_bytes(8, "little") for v in (seed, *ints))
    return int.from_bytes(hashlib.blake2b(payload, digest_size=8).digest(), "little")
