"""CNF formulas: DIMACS I/O, evaluation, conjunction, tensor powers and XOR
constraint augmentation."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import ArityError, ParseError, ResourceLimit

DEFAULT_VAR_BUDGET = 40

Clause = tuple[int, ...]


@dataclass(frozen=True)
class CnfFormula:
    var_count: int
    clauses: tuple[Clause, ...]

    def __post_init__(self):
        if self.var_count < 1:
            raise ValueError("var_count must be positive")
        clauses = tuple(tuple(dict.fromkeys(int(l) for l in c)) for c in self.clauses)
        for c in clauses:
            if not c:
                raise ValueError("empty clause")
            lits = set(c)
            for l in lits:
                if l == 0 or abs(l) > self.var_count:
                    raise ValueError(f"literal {l} out of range 1..{self.var_count}")
                if -l in lits:
                    raise ValueError(f"tautological clause {c}")
        object.__setattr__(self, "clauses", clauses)

    @classmethod
    def empty(cls, var_count: int) -> CnfFormula:
        return cls(var_count, ())

    @classmethod
    def contradiction(cls, var_count: int = 1) -> CnfFormula:
        return cls(var_count, ((1,), (-1,)))

    def canonical(self):
        return ["cnf", self.var_count, [list(c) for c in self.clauses]]

    def __str__(self):
        return to_dimacs(self)


@dataclass(frozen=True)
class XorConstraint:
    """Parity constraint: XOR of ``variables`` equals ``parity``."""

    variables: frozenset[int]
    parity: int

    def __post_init__(self):
        object.__setattr__(self, "variables", frozenset(self.variables))
        if self.parity not in (0, 1):
            raise ValueError("parity must be 0 or 1")

    def holds(self, bits: Sequence[bool]) -> bool:
        acc = 0
        for v in self.variables:
            acc ^= int(bits[v - 1])
        return acc == self.parity


Assignment = tuple[bool, ...]


def parse_dimacs(text: str) -> CnfFormula:
    header = None
    clauses: list[Clause] = []
    current: list[int] = []
    last_line = 0
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line[0] in "c%":
            continue
        last_line = lineno
        if line[0] == "p":
            parts = line.split()
            if header is not None:
                raise ParseError("duplicate header", lineno)
            if len(parts) != 4 or parts[1] != "cnf":
                raise ParseError(f"malformed header {line!r}", lineno)
            try:
                header = (int(parts[2]), int(parts[3]))
            except ValueError:
                raise ParseError(f"malformed header {line!r}", lineno) from None
            if header[0] < 1 or header[1] < 0:
                raise ParseError(f"malformed header {line!r}", lineno)
            continue
        if header is None:
            raise ParseError("clause before header", lineno)
        for tok in line.split():
            try:
                lit = int(tok)
            except ValueError:
                raise ParseError(f"bad literal {tok!r}", lineno) from None
            if lit == 0:
                if not current:
                    raise ParseError("empty clause", lineno)
                if any(-l in current for l in current):
                    raise ParseError("tautological clause", lineno)
                clauses.append(tuple(current))
                current = []
            elif abs(lit) > header[0]:
                raise ParseError(f"literal {lit} out of range 1..{header[0]}", lineno)
            elif lit not in current:
                current.append(lit)
    if header is None:
        raise ParseError("missing 'p cnf' header", last_line or 1)
    if current:
        raise ParseError("last clause is not zero-terminated", last_line)
    if len(clauses) != header[1]:
        raise ParseError(
            f"header declares {header[1]} clauses, found {len(clauses)}", last_line or 1
        )
    return CnfFormula(header[0], tuple(clauses))


def to_dimacs(f: CnfFormula) -> str:
    lines = [f"p cnf {f.var_count} {len(f.clauses)}"]
    lines += [" ".join(map(str, c)) + " 0" for c in f.clauses]
    return "\n".join(lines) + "\n"


def evaluate(f: CnfFormula, a: Sequence[bool]) -> int:
    if len(a) != f.var_count:
        raise ArityError(f"assignment has {len(a)} bits, formula has {f.var_count} vars")
    for c in f.clauses:
        for l in c:
            if a[l - 1] if l > 0 else not a[-l - 1]:
                break
        else:
            return 0
    return 1


def conjoin(f: CnfFormula, h: CnfFormula) -> CnfFormula:
    if f.var_count != h.var_count:
        raise ArityError(f"var_count mismatch: {f.var_count} vs {h.var_count}")
    return CnfFormula(f.var_count, f.clauses + h.clauses)


def tensor_power(f: CnfFormula, t: int, budget: int = DEFAULT_VAR_BUDGET) -> CnfFormula:
    """t disjoint copies of f; copy j uses variables shifted by j * var_count."""
    if t < 1:
        raise ValueError("t must be positive")
    n = f.var_count
    if t * n > budget:
        raise ResourceLimit(f"tensor power needs {t * n} variables, budget is {budget}", wanted=t)
    clauses = []
    for j in range(t):
        off = j * n
        clauses += [tuple(l + off if l > 0 else l - off for l in c) for c in f.clauses]
    return CnfFormula(t * n, tuple(clauses))


def echelon(constraints: Iterable[XorConstraint]) -> tuple[list[XorConstraint], bool]:
    """Reduce a parity system over GF(2).

    Each returned row has a distinct pivot, its highest variable, and no other
    row mentions that pivot. Returns (rows, consistent).
    """
    pivots: dict[int, tuple[int, int]] = {}  # pivot var -> (mask, parity)
    for xc in constraints:
        mask = 0
        for v in xc.variables:
            mask |= 1 << v
        par = xc.parity
        # pivot rows hold their pivot plus non-pivot variables only
        for pv, (pm, pp) in pivots.items():
            if mask >> pv & 1:
                mask ^= pm
                par ^= pp
        if not mask:
            if par:
                return [], False
            continue
        top = mask.bit_length() - 1
        for pv, (pm, pp) in list(pivots.items()):
            if pm >> top & 1:
                pivots[pv] = (pm ^ mask, pp ^ par)
        pivots[top] = (mask, par)
    rows = []
    for pv in sorted(pivots):
        mask, par = pivots[pv]
        vars_ = frozenset(i for i in range(mask.bit_length()) if mask >> i & 1)
        rows.append(XorConstraint(vars_, par))
    return rows, True


def add_xor_constraints(f: CnfFormula, constraints: Sequence[XorConstraint]) -> CnfFormula:
    """Conjoin parity constraints to f using chained XOR gadgets.

    The system is first reduced to echelon form (same solution set), then every
    row x_a1 ^ ... ^ x_as = b becomes a chain of auxiliary variables
    y_1 = x_a1 ^ x_a2, y_k = y_{k-1} ^ x_a(k+1), plus a unit clause on the last
    link. Auxiliary variables come after the originals and are functionally
    determined by them, so the model count over the originals is unchanged.
    """
    if not constraints:
        return f
    n = f.var_count
    for xc in constraints:
        for v in xc.variables:
            if not 1 <= v <= n:
                raise ValueError(f"constraint variable {v} out of range 1..{n}")
    rows, consistent = echelon(constraints)
    if not consistent:
        return CnfFormula(n, f.clauses + ((1,), (-1,)))
    clauses = list(f.clauses)
    next_var = n + 1
    for row in rows:
        vs = sorted(row.variables)
        if len(vs) == 1:
            clauses.append((vs[0] if row.parity else -vs[0],))
            continue
        acc = vs[0]
        for v in vs[1:]:
            y = next_var
            next_var += 1
            # y <-> acc xor v
            clauses += [(-y, acc, v), (-y, -acc, -v), (y, -acc, v), (y, acc, -v)]
            acc = y
        clauses.append((acc if row.parity else -acc,))
    return CnfFormula(next_var - 1, tuple(clauses))


def random_kcnf(var_count: int, clause_count: int, rng, k: int = 3) -> CnfFormula:
    """Uniform random k-CNF: k distinct variables per clause, random signs."""
    clauses = []
    for _ in range(clause_count):
        vs = rng.sample(range(1, var_count + 1), k)
        clauses.append(tuple(v if rng.random() < 0.5 else -v for v in vs))
    return CnfFormula(var_count, tuple(clauses))


def random_xor(var_count: int, rng) -> XorConstraint:
    """Uniform member of the affine hash family: each variable kept w.p. 1/2."""
    bits = rng.getrandbits(var_count)
    vars_ = frozenset(i + 1 for i in range(var_count) if bits >> i & 1)
    return XorConstraint(vars_, rng.getrandbits(1))
