"""Prime-field arithmetic, square matrices and Lagrange interpolation.

Values are stored as plain residues; the modulus is checked for primality by
trial division, which bounds the supported range to p < 2**32.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path
from typing import Iterable, Sequence

from .errors import ArityError, DegenerateNodes, NoInverse, ParseError

MAX_MODULUS = 2**32
DEFAULT_MIN_MODULUS = 257


@lru_cache(maxsize=1024)
def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    d = 3
    while d * d <= n:
        if n % d == 0:
            return False
        d += 2
    return True


def next_prime(n: int) -> int:
    """Smallest prime >= n."""
    n = max(n, 2)
    while not is_prime(n):
        n += 1
    return n


def default_modulus(n: int) -> int:
    """Default field size for n x n permanent instances."""
    return next_prime(max(n + 2, DEFAULT_MIN_MODULUS))


def _check_modulus(p: int) -> None:
    if not (1 < p < MAX_MODULUS) or not is_prime(p):
        raise ValueError(f"modulus {p} is not a prime below 2**32")


@dataclass(frozen=True, slots=True)
class FieldElement:
    value: int
    modulus: int

    def __post_init__(self):
        _check_modulus(self.modulus)
        if not 0 <= self.value < self.modulus:
            object.__setattr__(self, "value", self.value % self.modulus)

    def _coerce(self, other) -> int:
        if isinstance(other, FieldElement):
            if other.modulus != self.modulus:
                raise ArityError(f"modulus mismatch: {self.modulus} vs {other.modulus}")
            return other.value
        if isinstance(other, int):
            return other % self.modulus
        return NotImplemented

    def _new(self, v: int) -> FieldElement:
        return FieldElement(v % self.modulus, self.modulus)

    def __add__(self, other):
        o = self._coerce(other)
        return NotImplemented if o is NotImplemented else self._new(self.value + o)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        return NotImplemented if o is NotImplemented else self._new(self.value - o)

    def __rsub__(self, other):
        o = self._coerce(other)
        return NotImplemented if o is NotImplemented else self._new(o - self.value)

    def __mul__(self, other):
        o = self._coerce(other)
        return NotImplemented if o is NotImplemented else self._new(self.value * o)

    __rmul__ = __mul__

    def __neg__(self):
        return self._new(-self.value)

    def __truediv__(self, other):
        if isinstance(other, int):
            other = FieldElement(other % self.modulus, self.modulus)
        return self * field_inverse(other)

    def __pow__(self, e: int):
        if e < 0:
            return field_inverse(self) ** (-e)
        return self._new(pow(self.value, e, self.modulus))

    def __int__(self):
        return self.value

    def __bool__(self):
        return self.value != 0

    def __repr__(self):
        return f"{self.value} (mod {self.modulus})"


def inverse_mod(a: int, p: int) -> int:
    a %= p
    if a == 0:
        raise NoInverse(f"0 has no inverse mod {p}")
    return pow(a, -1, p)


def field_inverse(a: FieldElement) -> FieldElement:
    return FieldElement(inverse_mod(a.value, a.modulus), a.modulus)


@dataclass(frozen=True)
class FieldMatrix:
    """Square matrix over GF(modulus); entries are stored as residues."""

    modulus: int
    rows: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        _check_modulus(self.modulus)
        n = len(self.rows)
        if n == 0:
            raise ValueError("matrix must have positive dimension")
        p = self.modulus
        norm = []
        for row in self.rows:
            if len(row) != n:
                raise ValueError("matrix must be square")
            norm.append(tuple(int(v) % p for v in row))
        object.__setattr__(self, "rows", tuple(norm))

    @classmethod
    def _trusted(cls, modulus: int, rows: tuple[tuple[int, ...], ...]) -> FieldMatrix:
        # rows already reduced and square; skips validation on hot paths
        m = object.__new__(cls)
        object.__setattr__(m, "modulus", modulus)
        object.__setattr__(m, "rows", rows)
        return m

    @classmethod
    def from_entries(cls, entries: Iterable[Iterable[int]], modulus: int) -> FieldMatrix:
        return cls(modulus, tuple(tuple(int(v) for v in row) for row in entries))

    @classmethod
    def identity(cls, n: int, modulus: int) -> FieldMatrix:
        return cls(modulus, tuple(tuple(int(i == j) for j in range(n)) for i in range(n)))

    @property
    def n(self) -> int:
        return len(self.rows)

    def __getitem__(self, ij: tuple[int, int]) -> FieldElement:
        i, j = ij
        return FieldElement(self.rows[i][j], self.modulus)

    def add_scaled(self, t: int, other: FieldMatrix) -> FieldMatrix:
        """self + t * other."""
        if other.modulus != self.modulus or other.n != self.n:
            raise ArityError("matrix shape or modulus mismatch")
        p = self.modulus
        return FieldMatrix._trusted(
            p,
            tuple(
                tuple((a + t * b) % p for a, b in zip(ra, rb))
                for ra, rb in zip(self.rows, other.rows)
            ),
        )

    def canonical(self):
        return ["matrix", self.modulus, [list(r) for r in self.rows]]

    def to_json(self) -> str:
        return json.dumps({"modulus": self.modulus, "entries": [list(r) for r in self.rows]})


def matrix_from_json(text: str) -> FieldMatrix:
    try:
        doc = json.loads(text)
        p = int(doc["modulus"])
        entries = doc["entries"]
        return FieldMatrix.from_entries(entries, p)
    except (KeyError, TypeError, ValueError, json.JSONDecodeError) as exc:
        raise ParseError(f"bad matrix document: {exc}") from exc


def load_matrix(path: str | Path) -> FieldMatrix:
    return matrix_from_json(Path(path).read_text())


@dataclass(frozen=True)
class FieldPolynomial:
    """Polynomial over GF(modulus), coefficients lowest degree first.

    Trailing zeros are stripped, so the zero polynomial has no coefficients.
    """

    modulus: int
    coefficients: tuple[int, ...]

    def __post_init__(self):
        p = self.modulus
        coeffs = [c % p for c in self.coefficients]
        while coeffs and coeffs[-1] == 0:
            coeffs.pop()
        object.__setattr__(self, "coefficients", tuple(coeffs))

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    def coefficient_elements(self) -> list[FieldElement]:
        return [FieldElement(c, self.modulus) for c in self.coefficients]


def evaluate(poly: FieldPolynomial, t: FieldElement | int) -> FieldElement:
    """Horner evaluation."""
    p = poly.modulus
    if isinstance(t, FieldElement):
        if t.modulus != p:
            raise ArityError(f"modulus mismatch: {p} vs {t.modulus}")
        t = t.value
    acc = 0
    for c in reversed(poly.coefficients):
        acc = (acc * t + c) % p
    return FieldElement(acc, p)


def _poly_mul_linear(coeffs: list[int], root: int, p: int) -> list[int]:
    # coeffs * (t - root)
    out = [0] * (len(coeffs) + 1)
    for i, c in enumerate(coeffs):
        out[i + 1] = (out[i + 1] + c) % p
        out[i] = (out[i] - root * c) % p
    return out


def lagrange_interpolate(points: Sequence[tuple[FieldElement, FieldElement]]) -> FieldPolynomial:
    """Unique polynomial of degree < len(points) through ``points``."""
    if not points:
        raise DegenerateNodes("need at least one point")
    p = points[0][0].modulus
    for x, y in points:
        if x.modulus != p or y.modulus != p:
            raise ArityError("points span several moduli")
    xs = [x.value for x, _ in points]
    ys = [y.value for _, y in points]
    if len(set(xs)) != len(xs):
        raise DegenerateNodes("duplicate x-coordinates")
    result = [0] * len(xs)
    for i, xi in enumerate(xs):
        basis = [1]
        denom = 1
        for j, xj in enumerate(xs):
            if j != i:
                basis = _poly_mul_linear(basis, xj, p)
                denom = denom * (xi - xj) % p
        scale = ys[i] * inverse_mod(denom, p) % p
        for d, c in enumerate(basis):
            result[d] = (result[d] + scale * c) % p
    return FieldPolynomial(p, tuple(result))


def interpolate_at(xs: Sequence[int], ys: Sequence[int], at: int, p: int) -> int:
    """Value at ``at`` of the interpolant through (xs, ys), on raw residues.

    Used on the hot path of the random self-reduction, where building the full
    coefficient list is wasted work.
    """
    if len(set(x % p for x in xs)) != len(xs):
        raise DegenerateNodes("duplicate x-coordinates")
    total = 0
    for i, xi in enumerate(xs):
        num = 1
        den = 1
        for j, xj in enumerate(xs):
            if j != i:
                num = num * (at - xj) % p
                den = den * (xi - xj) % p
        total += ys[i] * num * pow(den, -1, p)
    return total % p
