"""Deterministic DPLL with two-watched-literal unit propagation.

Branching always picks the lowest-index unassigned variable and tries True
before False, so the search (and the returned witness) is a pure function of
the formula.
"""

from __future__ import annotations

from .cnf import CnfFormula


def dpll(f: CnfFormula) -> tuple[bool, ...] | None:
    """Return a satisfying assignment, or None if f is unsatisfiable."""
    n = f.var_count
    # literal l is stored at index l + n
    lv = [0] * (2 * n + 1)
    watches: list[list[int]] = [[] for _ in range(2 * n + 1)]
    clauses: list[list[int]] = []
    trail: list[int] = []
    units: list[int] = []
    for c in f.clauses:
        if len(c) == 1:
            units.append(c[0])
            continue
        ci = len(clauses)
        c = list(c)
        clauses.append(c)
        watches[c[0] + n].append(ci)
        watches[c[1] + n].append(ci)

    def assign(lit: int) -> None:
        lv[lit + n] = 1
        lv[n - lit] = -1
        trail.append(lit)

    for u in units:
        s = lv[u + n]
        if s == -1:
            return None
        if s == 0:
            assign(u)

    def propagate(qhead: int) -> bool:
        while qhead < len(trail):
            false_lit = -trail[qhead]
            qhead += 1
            ws = watches[false_lit + n]
            i = j = 0
            end = len(ws)
            while i < end:
                ci = ws[i]
                i += 1
                c = clauses[ci]
                if c[0] == false_lit:
                    c[0] = c[1]
                    c[1] = false_lit
                first = c[0]
                if lv[first + n] == 1:
                    ws[j] = ci
                    j += 1
                    continue
                for k in range(2, len(c)):
                    lk = c[k]
                    if lv[lk + n] != -1:
                        c[1] = lk
                        c[k] = false_lit
                        watches[lk + n].append(ci)
                        break
                else:
                    ws[j] = ci
                    j += 1
                    if lv[first + n] == -1:
                        while i < end:
                            ws[j] = ws[i]
                            j += 1
                            i += 1
                        del ws[j:]
                        return False
                    assign(first)
            del ws[j:]
        return True

    # decision stack entries: (trail length before decision, variable, flipped)
    decisions: list[tuple[int, int, bool]] = []
    qhead = 0
    ok = propagate(qhead)
    next_var = 1
    while True:
        if not ok:
            while decisions:
                mark, var, flipped = decisions.pop()
                for lit in trail[mark:]:
                    lv[lit + n] = 0
                    lv[n - lit] = 0
                del trail[mark:]
                if not flipped:
                    decisions.append((mark, var, True))
                    assign(-var)
                    next_var = var + 1
                    ok = propagate(mark)
                    break
            else:
                return None
            continue
        while next_var <= n and lv[next_var + n] != 0:
            next_var += 1
        if next_var > n:
            return tuple(lv[v + n] == 1 for v in range(1, n + 1))
        mark = len(trail)
        decisions.append((mark, next_var, False))
        assign(next_var)
        ok = propagate(mark)
