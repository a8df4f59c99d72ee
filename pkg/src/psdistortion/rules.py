"""Resolute voting rules and pairwise-majority machinery.

Each rule is a :class:`Rule` object.  ``cowinners(profile)`` returns every
alternative that is optimal before tie-breaking; ``winner(profile)`` picks
one of them using the rule's tie-break order (lowest index by default).
"""

from __future__ import annotations

import itertools
import json
import math
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from .core import Profile
from .exceptions import UnsupportedSize

POSITIONAL_KINDS = ("plurality", "borda", "veto", "piecewise")
SLATER_MAX_M = 8
RULE_NAMES = ("plurality", "borda", "veto", "piecewise", "copeland", "slater", "maximin")


# ---------------------------------------------------------------------------
# score vectors


def piecewise_k(m: int) -> int:
    """Number of nonzero PIECEWISE scores, ``ceil(m ** (2/3))`` computed in integers."""
    k = max(1, round(m ** (2 / 3)))
    while k**3 < m**2:
        k += 1
    while k > 1 and (k - 1) ** 3 >= m**2:
        k -= 1
    return k


def make_score_vector(kind: str, m: int) -> tuple[Fraction, ...]:
    """Exact score vector for a named positional rule."""
    if m < 2:
        raise ValueError("need at least two alternatives")
    kind = kind.lower()
    if kind == "plurality":
        s = [1] + [0] * (m - 1)
    elif kind == "borda":
        s = [Fraction(m - 1 - j, m - 1) for j in range(m)]
    elif kind == "veto":
        s = [1] * (m - 1) + [0]
    elif kind == "piecewise":
        k = piecewise_k(m)
        s = [max(Fraction(0), 1 - Fraction(j, k)) for j in range(m)]
    else:
        raise ValueError(f"unknown positional rule {kind!r}")
    return tuple(Fraction(v) for v in s)


def validate_score_vector(s: Sequence) -> tuple[Fraction, ...]:
    from .core import to_fraction

    s = tuple(to_fraction(v) for v in s)
    if len(s) < 2:
        raise ValueError("score vector needs at least two entries")
    if s[0] != 1 or s[-1] != 0:
        raise ValueError("score vector must start at 1 and end at 0")
    if any(a < b for a, b in zip(s, s[1:])):
        raise ValueError("score vector must be weakly decreasing")
    return s


def score_gap(s: Sequence) -> Fraction:
    """``s_1 - s_2``."""
    return Fraction(s[0]) - Fraction(s[1])


def _integer_scores(s: Sequence[Fraction]):
    den = math.lcm(*(Fraction(v).denominator for v in s))
    if den > 10**9:
        return np.array([float(v) for v in s]), 1
    return np.array([int(Fraction(v) * den) for v in s], dtype=np.int64), den


def _argbest(values, maximize=True) -> list[int]:
    best = max(values) if maximize else min(values)
    return [a for a, v in enumerate(values) if v == best]


def _pick(cands: Sequence[int], tiebreak: Sequence[int] | None) -> int:
    if tiebreak is None:
        return min(cands)
    rank = {a: r for r, a in enumerate(tiebreak)}
    return min(cands, key=lambda a: rank.get(a, len(rank) + a))


# ---------------------------------------------------------------------------
# rule functions


def positional_points(profile: Profile, s: Sequence) -> np.ndarray:
    """Point totals; exact integers scaled by the common denominator of ``s``."""
    if len(s) != profile.m:
        raise ValueError(f"score vector has length {len(s)}, profile has m={profile.m}")
    si, _ = _integer_scores(s)
    return profile.counts @ si[profile.positions]


def positional_winner(profile: Profile, s: Sequence, tiebreak=None):
    """Return ``(winner, point totals)``; totals are given as exact Fractions."""
    si, den = _integer_scores(s)
    pts = profile.counts @ si[profile.positions]
    winner = _pick(_argbest(list(pts)), tiebreak)
    if si.dtype.kind == "f":
        return winner, pts
    return winner, [Fraction(int(p), den) for p in pts]


def dominance(profile: Profile, weak: bool = False) -> np.ndarray:
    """``D[a, b]`` is True when ``a`` (weakly) pairwise-dominates ``b``."""
    t2 = 2 * profile.tally
    d = t2 >= profile.n if weak else t2 > profile.n
    np.fill_diagonal(d, False)
    return d


def copeland_scores(profile: Profile) -> list[int]:
    return [int(v) for v in dominance(profile).sum(axis=1)]


def copeland(profile: Profile, tiebreak=None):
    """Return ``(winner, scores)``; :func:`copeland_set` gives the full argmax."""
    sc = copeland_scores(profile)
    return _pick(_argbest(sc), tiebreak), sc


def copeland_set(profile: Profile) -> list[int]:
    return _argbest(copeland_scores(profile))


def uncovered_set(profile: Profile, weak: bool = False) -> list[int]:
    """Alternatives not covered by any other.

    ``b`` covers ``a`` when ``b`` dominates ``a`` and every alternative ``a``
    dominates.  ``weak=True`` uses weak domination (at least half the voters)
    for both relations.
    """
    d = dominance(profile, weak)
    out = []
    for a in range(profile.m):
        covered = False
        for b in range(profile.m):
            if b != a and d[b, a] and np.all(d[b][d[a]]):
                covered = True
                break
        if not covered:
            out.append(a)
    return out


@lru_cache(maxsize=None)
def _all_permutations(m: int) -> np.ndarray:
    return np.array(list(itertools.permutations(range(m))), dtype=np.int64)


def ranking_disagreements(profile: Profile, ranking: Sequence[int]) -> int:
    """Pairs placed ``a`` ahead of ``b`` although ``b`` strictly dominates ``a``."""
    d = dominance(profile)
    return sum(int(d[b, a]) for i, a in enumerate(ranking) for b in ranking[i + 1:])


def slater_all(profile: Profile, cap: int = SLATER_MAX_M):
    """All optimal rankings and their disagreement count (exhaustive over m!)."""
    m = profile.m
    if m > cap:
        raise UnsupportedSize(f"SLATER search over {m}! rankings exceeds the cap m <= {cap}")
    perms = _all_permutations(m)
    beaten = dominance(profile).T.astype(np.int64)  # beaten[a, b]: b dominates a
    cost = np.zeros(len(perms), dtype=np.int64)
    for i in range(m):
        for j in range(i + 1, m):
            cost += beaten[perms[:, i], perms[:, j]]
    best = int(cost.min())
    return perms[cost == best], best


def slater(profile: Profile, tiebreak=None, cap: int = SLATER_MAX_M):
    """Return ``(winner, best ranking, disagreement count)``."""
    optimal, best = slater_all(profile, cap)
    winner = _pick(sorted({int(r[0]) for r in optimal}), tiebreak)
    ranking = next(tuple(int(a) for a in r) for r in optimal if r[0] == winner)
    return winner, ranking, best


def maximin_scores(profile: Profile) -> list[int]:
    """Worst pairwise defeat ``max_b tally(b, a)`` of every alternative."""
    t = profile.tally.copy()
    np.fill_diagonal(t, -1)
    return [int(v) for v in t.max(axis=0)]


def maximin(profile: Profile, tiebreak=None):
    sc = maximin_scores(profile)
    return _pick(_argbest(sc, maximize=False), tiebreak), sc


# ---------------------------------------------------------------------------
# rule objects


class Rule:
    """A resolute rule: ``cowinners`` gives the optimal set, ``winner`` breaks ties.

    ``kind`` is one of the built-in names, ``"positional"`` (with ``scores``)
    or ``"custom"`` (with ``func`` mapping a profile to its co-winner list).
    """

    def __init__(self, kind: str, scores=None, func: Callable | None = None, tiebreak=None, name=None):
        self.kind = kind
        self.scores = validate_score_vector(scores) if scores is not None else None
        self.func = func
        self.tiebreak = tuple(tiebreak) if tiebreak is not None else None
        self.name = name or (kind if kind != "positional" else "positional" + json.dumps([str(v) for v in self.scores]))

    def __repr__(self):
        return f"Rule({self.name!r})"

    @property
    def is_positional(self) -> bool:
        return self.kind in POSITIONAL_KINDS or self.kind == "positional"

    def score_vector(self, m: int) -> tuple[Fraction, ...]:
        if self.kind == "positional":
            if len(self.scores) != m:
                raise ValueError(f"score vector has length {len(self.scores)}, need {m}")
            return self.scores
        if self.kind in POSITIONAL_KINDS:
            return make_score_vector(self.kind, m)
        raise ValueError(f"{self.name} is not a positional rule")

    def cowinners(self, profile: Profile) -> list[int]:
        if self.is_positional:
            return _argbest(list(positional_points(profile, self.score_vector(profile.m))))
        if self.kind == "copeland":
            return copeland_set(profile)
        if self.kind == "maximin":
            return _argbest(maximin_scores(profile), maximize=False)
        if self.kind == "slater":
            optimal, _ = slater_all(profile)
            return sorted({int(r[0]) for r in optimal})
        if self.kind == "custom":
            out = self.func(profile)
            return [int(out)] if np.ndim(out) == 0 else sorted(int(a) for a in out)
        raise ValueError(f"unknown rule kind {self.kind!r}")

    def winner(self, profile: Profile) -> int:
        return _pick(self.cowinners(profile), self.tiebreak)

    __call__ = winner

    def with_tiebreak(self, tiebreak) -> "Rule":
        return Rule(self.kind, self.scores, self.func, tiebreak, self.name)


PLURALITY = Rule("plurality")
BORDA = Rule("borda")
VETO = Rule("veto")
PIECEWISE = Rule("piecewise")
COPELAND = Rule("copeland")
SLATER = Rule("slater")
MAXIMIN = Rule("maximin")

ALL_RULES = (PLURALITY, BORDA, VETO, PIECEWISE, COPELAND, SLATER, MAXIMIN)


def positional_rule(scores) -> Rule:
    return Rule("positional", scores=scores)


def dictatorship(voter: int = 0) -> Rule:
    """Rule that always elects the top choice of ``voter``."""
    return Rule("custom", func=lambda p: p.ranking_of(voter)[0], name=f"dictator{voter}")


def constant_rule(a: int = 0) -> Rule:
    return Rule("custom", func=lambda p: a, name=f"constant{a}")


def resolve_rule(rule) -> Rule:
    """Accept a Rule, a rule name, a JSON score array, or a profile -> winner callable."""
    if isinstance(rule, Rule):
        return rule
    if isinstance(rule, str):
        key = rule.strip().lower()
        for r in ALL_RULES:
            if r.name == key:
                return r
        if key.startswith("dictator"):
            return dictatorship(int(key[len("dictator"):] or 0))
        if key.startswith("["):
            return positional_rule(json.loads(key))
        raise ValueError(f"unknown rule {rule!r}; expected one of {', '.join(RULE_NAMES)}")
    if isinstance(rule, (list, tuple)):
        return positional_rule(rule)
    if callable(rule):
        return Rule("custom", func=rule, name=getattr(rule, "__name__", "custom"))
    raise TypeError(f"cannot interpret {rule!r} as a voting rule")
