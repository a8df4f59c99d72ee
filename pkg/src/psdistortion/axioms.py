"""Exhaustive axiom checkers for resolute rules at small n and m.

Profiles are enumerated in lexicographic order of their ranking tuples, so
the witness reported for a violation is the first one in that order.
Rules are checked exactly as implemented, tie-breaking included.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

from .core import Profile, condorcet_winner
from .exceptions import BudgetExceeded
from .rules import resolve_rule

DEFAULT_BUDGET = 10**7
AXIOMS = ("weak_unanimity", "monotonic", "swap_invariant", "maskin", "dictatorship", "condorcet")


@dataclass
class AxiomReport:
    """Verdict of one axiom check.

    For ``dictatorship`` a True verdict means a dictator exists; the
    witness then is ``{"dictator": i}``.  For the other axioms a False
    verdict carries a witness dict with the offending profiles.
    """

    axiom: str
    rule: str
    n: int
    m: int
    holds: bool
    witness: dict | None = None
    count: int = 0
    notes: str = field(default="")


class _Evaluator:
    """Memoized winner lookup with an evaluation budget."""

    def __init__(self, rule, budget):
        self.rule = rule
        self.budget = budget
        self.calls = 0
        self.cache = {}

    def __call__(self, rows):
        w = self.cache.get(rows)
        if w is None:
            self.calls += 1
            if self.calls > self.budget:
                raise BudgetExceeded(f"axiom check exceeded {self.budget} rule evaluations")
            w = self.rule.winner(Profile.from_rankings(rows))
            self.cache[rows] = w
        return w


def _space(n, m, budget):
    size = math.factorial(m) ** n
    if size > budget:
        raise BudgetExceeded(f"{m}!^{n} = {size} profiles exceed the budget {budget}")
    perms = list(itertools.permutations(range(m)))
    return perms, itertools.product(perms, repeat=n)


def _replace(rows, i, r):
    return rows[:i] + (r,) + rows[i + 1:]


def _swap(r, j):
    r = list(r)
    r[j], r[j + 1] = r[j + 1], r[j]
    return tuple(r)


def _profile_list(rows):
    return [list(r) for r in rows]


def check_weak_unanimity(rule, n: int, m: int, budget: int = DEFAULT_BUDGET) -> AxiomReport:
    """An alternative ranked below some other by every voter never wins."""
    rule = resolve_rule(rule)
    f = _Evaluator(rule, budget)
    _, space = _space(n, m, budget)
    count = 0
    for rows in space:
        count += 1
        w = f(rows)
        for b in range(m):
            if b != w and all(r.index(b) < r.index(w) for r in rows):
                return AxiomReport("weak_unanimity", rule.name, n, m, False,
                                   {"profile": _profile_list(rows), "winner": w, "dominated_by": b}, count)
    return AxiomReport("weak_unanimity", rule.name, n, m, True, None, count)


def check_monotonic(rule, n: int, m: int, budget: int = DEFAULT_BUDGET) -> AxiomReport:
    """Moving the winner up one place in one ranking keeps it the winner."""
    rule = resolve_rule(rule)
    f = _Evaluator(rule, budget)
    _, space = _space(n, m, budget)
    count = 0
    for rows in space:
        count += 1
        w = f(rows)
        for i, r in enumerate(rows):
            j = r.index(w)
            if j == 0:
                continue
            new = _replace(rows, i, _swap(r, j - 1))
            if f(new) != w:
                return AxiomReport("monotonic", rule.name, n, m, False,
                                   {"profile": _profile_list(rows), "modified": _profile_list(new), "winner": w,
                                    "new_winner": f(new)}, count)
    return AxiomReport("monotonic", rule.name, n, m, True, None, count)


def check_swap_invariant(rule, n: int, m: int, budget: int = DEFAULT_BUDGET) -> AxiomReport:
    """Swapping two adjacent non-winners in one ranking keeps the winner."""
    rule = resolve_rule(rule)
    f = _Evaluator(rule, budget)
    _, space = _space(n, m, budget)
    count = 0
    for rows in space:
        count += 1
        w = f(rows)
        for i, r in enumerate(rows):
            for j in range(m - 1):
                if w in (r[j], r[j + 1]):
                    continue
                new = _replace(rows, i, _swap(r, j))
                if f(new) != w:
                    return AxiomReport("swap_invariant", rule.name, n, m, False,
                                       {"profile": _profile_list(rows), "modified": _profile_list(new), "winner": w,
                                        "new_winner": f(new)}, count)
    return AxiomReport("swap_invariant", rule.name, n, m, True, None, count)


def _improvements(perms, m):
    """``out[(r, a)]``: rankings keeping every alternative ``r`` put below ``a`` still below it."""
    out = {}
    for r in perms:
        for a in range(m):
            below = set(r[r.index(a) + 1:])
            out[(r, a)] = [q for q in perms if below <= set(q[q.index(a) + 1:])]
    return out


def check_maskin(rule, n: int, m: int, budget: int = DEFAULT_BUDGET) -> AxiomReport:
    """If every voter keeps the winner above everything it beat, it still wins."""
    rule = resolve_rule(rule)
    f = _Evaluator(rule, budget)
    perms, space = _space(n, m, budget)
    table = _improvements(perms, m)
    count = 0
    for rows in space:
        count += 1
        w = f(rows)
        for new in itertools.product(*(table[(r, w)] for r in rows)):
            if f(new) != w:
                return AxiomReport("maskin", rule.name, n, m, False,
                                   {"profile": _profile_list(rows), "modified": _profile_list(new), "winner": w,
                                    "new_winner": f(new)}, count)
    return AxiomReport("maskin", rule.name, n, m, True, None, count)


def check_dictatorship(rule, n: int, m: int, budget: int = DEFAULT_BUDGET) -> AxiomReport:
    """Look for a voter whose top choice wins in every profile."""
    rule = resolve_rule(rule)
    f = _Evaluator(rule, budget)
    _, space = _space(n, m, budget)
    alive = set(range(n))
    count = 0
    for rows in space:
        count += 1
        w = f(rows)
        alive = {i for i in alive if rows[i][0] == w}
        if not alive:
            return AxiomReport("dictatorship", rule.name, n, m, False, None, count)
    return AxiomReport("dictatorship", rule.name, n, m, True, {"dictator": min(alive)}, count)


def check_condorcet_consistent(rule, n: int, m: int, budget: int = DEFAULT_BUDGET) -> AxiomReport:
    """A Condorcet winner, whenever one exists, is elected."""
    rule = resolve_rule(rule)
    f = _Evaluator(rule, budget)
    _, space = _space(n, m, budget)
    count = 0
    for rows in space:
        count += 1
        c = condorcet_winner(Profile.from_rankings(rows))
        if c is not None and f(rows) != c:
            return AxiomReport("condorcet", rule.name, n, m, False,
                               {"profile": _profile_list(rows), "condorcet_winner": c, "winner": f(rows)}, count)
    return AxiomReport("condorcet", rule.name, n, m, True, None, count)


CHECKERS = {
    "weak_unanimity": check_weak_unanimity,
    "monotonic": check_monotonic,
    "swap_invariant": check_swap_invariant,
    "maskin": check_maskin,
    "dictatorship": check_dictatorship,
    "condorcet": check_condorcet_consistent,
}


def check_all(rule, n: int, m: int, axioms=AXIOMS, budget: int = DEFAULT_BUDGET) -> dict[str, AxiomReport]:
    return {a: CHECKERS[a](rule, n, m, budget) for a in axioms}


def impossibility_consistent(reports: dict[str, AxiomReport]) -> bool:
    """With m >= 3, weak unanimity plus Maskin monotonicity forces a dictator."""
    wu, mk, dic = reports["weak_unanimity"].holds, reports["maskin"].holds, reports["dictatorship"].holds
    return not (wu and mk and not dic)


def maskin_implication_consistent(reports: dict[str, AxiomReport]) -> bool:
    """Maskin monotonicity implies both monotonicity and swap invariance."""
    if not reports["maskin"].holds:
        return True
    return reports["monotonic"].holds and reports["swap_invariant"].holds
