"""Generators for the worst-case (lower-bound) instances.

Every generator returns a :class:`ConstructionSpec` holding the utility
matrix, the uniform public spirit, the profile the utilities are designed to
induce, the winner that profile should produce and the distortion it
realizes.  All arithmetic is exact.

Index conventions: alternative 0 is the designated winner ``a'`` and 1 is
the welfare-optimal ``a*``; the remaining alternatives form the blocs listed
in ``spec.roles``.

Voters are described as subgroups sharing one utility row and one ranking.
A ranking is a list of blocks; alternatives inside a block must have equal
PS-values (so any order among them is consistent), consecutive blocks must
be strictly ordered unless the boundary is listed as weak.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .core import (
    ENUMERATE,
    Profile,
    TiePolicy,
    UtilityMatrix,
    first_inconsistency,
    ps_values,
    to_fraction,
)
from .distortion import DistortionResult, instance_distortion, welfare_ratio
from .exceptions import ConstructionError, UndefinedDistortion
from .rules import (
    COPELAND,
    MAXIMIN,
    PLURALITY,
    SLATER,
    Rule,
    copeland_scores,
    maximin_scores,
    positional_points,
    positional_rule,
    ranking_disagreements,
    resolve_rule,
    score_gap,
    validate_score_vector,
)

A_PRIME, A_STAR = 0, 1


@dataclass
class Subgroup:
    label: str
    count: int
    utilities: tuple
    blocks: list
    weak: frozenset = frozenset()

    @property
    def ranking(self) -> list[int]:
        return [a for b in self.blocks for a in b]


@dataclass
class ConstructionSpec:
    """A generated lower-bound instance and everything it is meant to realize."""

    family: str
    rule: Rule
    gamma: Fraction
    m: int
    epsilon: Fraction | None
    utilities: UtilityMatrix
    predicted_profile: Profile
    predicted_winner: int
    predicted_distortion: object
    closed_form: object
    roles: dict
    groups: list
    params: dict = field(default_factory=dict)
    subgroups: list = field(default_factory=list)
    notes: str = ""

    @property
    def n(self) -> int:
        return self.utilities.n

    @property
    def gamma_vector(self):
        return self.gamma


# ---------------------------------------------------------------------------
# helpers


def _frac(x, name) -> Fraction:
    try:
        return to_fraction(x)
    except (ValueError, TypeError, ZeroDivisionError) as err:
        raise ConstructionError(f"{name} must be rational, got {x!r}") from err


def least_n(fractions: Sequence[Fraction], divisors: Sequence[int]) -> int:
    """Least n making every ``fraction * n`` an integer divisible by its divisor."""
    n = 1
    for f, d in zip(fractions, divisors):
        if f < 0:
            raise ConstructionError(f"group fraction {f} is negative")
        if f == 0:
            continue
        need = f.denominator * d // math.gcd(f.numerator, d)
        n = math.lcm(n, need)
    return n


def rotations(block: Sequence[int]) -> list[list[int]]:
    b = list(block)
    return [b[k:] + b[:k] for k in range(len(b))] if b else [[]]


def _name(a: int, names: dict) -> str:
    return names.get(a, str(a))


def check_subgroups(subgroups: Sequence[Subgroup], gamma, names: dict) -> str | None:
    """Exact check that every subgroup's PS-values support its block ranking.

    Returns a message naming the first failed inequality, or None.
    """
    U = UtilityMatrix(np.array([sg.utilities for sg in subgroups], dtype=object), [sg.count for sg in subgroups])
    V = ps_values(gamma, U)
    for sg, vals in zip(subgroups, V.values):
        for blk in sg.blocks:
            if any(vals[a] != vals[blk[0]] for a in blk):
                members = ", ".join(_name(a, names) for a in blk)
                return f"group ({sg.label}): PS-values tie inside bloc {{{members}}}"
        for j in range(len(sg.blocks) - 1):
            hi, lo = sg.blocks[j], sg.blocks[j + 1]
            if not hi or not lo:
                continue
            left, right = vals[hi[0]], vals[lo[0]]
            weak = j in sg.weak
            if left < right or (left == right and not weak):
                rel = ">=" if weak else ">"
                return f"group ({sg.label}): v({_name(hi[0], names)}) {rel} v({_name(lo[0], names)})"
    return None


def _assemble(family, rule, gamma, m, eps, subgroups, names, roles, groups, winner, closed, params, notes=""):
    failure = check_subgroups(subgroups, gamma, names)
    if failure is not None:
        raise ConstructionError(f"{family}: parameters violate {failure}")
    subgroups = [sg for sg in subgroups if sg.count > 0]
    U = UtilityMatrix(np.array([sg.utilities for sg in subgroups], dtype=object), [sg.count for sg in subgroups])
    profile = Profile([sg.ranking for sg in subgroups], [sg.count for sg in subgroups])
    w = U.welfare
    predicted = welfare_ratio(max(w), w[winner])
    return ConstructionSpec(
        family, rule, gamma, m, eps, U, profile, winner, predicted, closed, roles, groups, params, subgroups, notes
    )


def _split(label, total, pieces, utilities_for, blocks_for, weak):
    """Split ``total`` voters into ``len(pieces)`` equal subgroups."""
    k = len(pieces)
    if total % k:
        raise ConstructionError(f"group ({label}) of size {total} cannot be split into {k} equal subgroups")
    return [
        Subgroup(f"{label}{j + 1}" if k > 1 else label, total // k, utilities_for(p), blocks_for(p), weak)
        for j, p in enumerate(pieces)
    ]


def _check_gamma(gamma, family, allow_zero=False, allow_one=True) -> Fraction:
    g = _frac(gamma, "gamma")
    lo_ok = g >= 0 if allow_zero else g > 0
    if not lo_ok or g > 1 or (g == 1 and not allow_one):
        raise ConstructionError(f"{family}: gamma={g} outside the admissible range")
    return g


def _trivial_spec(family, rule, m, g, eps=None) -> ConstructionSpec:
    """At gamma = 1 every voter ranks by welfare, so distortion is 1."""
    sg = [Subgroup("A", 1, tuple([Fraction(1)] + [Fraction(0)] * (m - 1)), [[a] for a in range(m)])]
    U = UtilityMatrix(np.array([sg[0].utilities], dtype=object))
    profile = Profile([sg[0].ranking])
    return ConstructionSpec(
        family, rule, g, m, eps, U, profile, 0, Fraction(1), Fraction(1), {"a_prime": 0, "a_star": 0}, [("A", Fraction(1), 1)],
        {}, sg, "gamma = 1: rankings follow welfare and the distortion is 1",
    )


def uncovered_lower_bound(gamma) -> Fraction:
    g = to_fraction(gamma)
    return ((2 - g) / g) ** 2


# ---------------------------------------------------------------------------
# COPELAND / SLATER


def _copeland_instance(family, rule, gamma, m, epsilon, balanced):
    g = _check_gamma(gamma, family)
    eps = _frac(epsilon, "epsilon")
    if m < (6 if balanced else 4):
        raise ConstructionError(f"{family}: need m >= {6 if balanced else 4}")
    if g == 1:
        return _trivial_spec(family, rule, m, g, eps)
    if not 0 < eps < Fraction(1, 2):
        raise ConstructionError(f"{family}: epsilon must lie in (0, 1/2)")
    x = (g / 2) / (1 - g / 2)
    y = x * x
    w = 1 / (1 - g)
    bloc = [2, 3]
    tilde = list(range(4, m))
    names = {0: "a'", 1: "a*", 2: "a1", 3: "a2"}
    names.update({a: f"t{a - 3}" for a in tilde})
    fa = fb = Fraction(1, 2) - eps
    fc = 2 * eps
    pieces = [0, 1] if balanced else [0]
    n = least_n([fa, fb, fc], [len(pieces)] * 3)

    def order(seq, p):
        return list(seq) if p == 0 else list(reversed(seq))

    zero = Fraction(0)

    def row(ua_prime, ua_star, ubloc):
        return tuple([ua_prime, ua_star] + [ubloc] * 2 + [zero] * len(tilde))

    subgroups = []
    subgroups += _split("A", int(fa * n), pieces, lambda p: row(y, Fraction(1), zero),
                        lambda p: [[1], [0], order(bloc, p), order(tilde, p)], frozenset())
    subgroups += _split("B", int(fb * n), pieces, lambda p: row(zero, zero, x),
                        lambda p: [order(bloc, p), [1], [0], order(tilde, p)], frozenset())
    subgroups += _split("C", int(fc * n), pieces, lambda p: row(w, zero, x),
                        lambda p: [[0], order(bloc, p), [1], order(tilde, p)], frozenset())
    roles = {"a_prime": 0, "a_star": 1, "A": bloc, "A_tilde": tilde}
    groups = [("A", fa, int(fa * n)), ("B", fb, int(fb * n)), ("C", fc, int(fc * n))]
    params = {"x": x, "y": y, "w": w}
    return _assemble(family, rule, g, m, eps, subgroups, names, roles, groups, 0, uncovered_lower_bound(g), params)


def gen_copeland_lb(gamma, m: int = 6, epsilon="1/1000000") -> ConstructionSpec:
    """COPELAND instance: ``a'`` beats everything but ``a*`` and wins with m-2 points.

    Blocs are balanced (each group split in half with opposite sub-orders) so
    every pair inside a bloc ties exactly.
    """
    return _copeland_instance("copeland_lb", COPELAND, gamma, m, epsilon, balanced=True)


def gen_slater_lb(gamma, m: int = 6, epsilon="1/1000000") -> ConstructionSpec:
    """Same instance with fixed sub-orders inside the blocs, for SLATER."""
    return _copeland_instance("slater_lb", SLATER, gamma, m, epsilon, balanced=False)


def slater_candidate_rankings(spec: ConstructionSpec) -> list[tuple[int, ...]]:
    """The six orderings of a', the bloc A and a* (bloc sub-orders fixed, A~ last)."""
    A, T = spec.roles["A"], spec.roles["A_tilde"]
    pieces = {"p": [0], "s": [1], "A": list(A)}
    orders = ["pAs", "psA", "spA", "sAp", "Asp", "Aps"]
    out = []
    for o in orders:
        seq = [a for key in o for a in pieces["p" if key == "p" else "s" if key == "s" else "A"]]
        out.append(tuple(seq + list(T)))
    return out


# ---------------------------------------------------------------------------
# positional rules


def scoring_gap_bound(delta, gamma):
    """``(1 - g)/(g delta) + 1``; infinite when ``delta = 0``."""
    d, g = to_fraction(delta), to_fraction(gamma)
    if d == 0:
        return math.inf
    return (1 - g) / (g * d) + 1


def gen_scoring_gap_lb(score_vector, gamma, epsilon="1/1000000") -> ConstructionSpec:
    """Instance whose winner is ranked first by only a ``s1 - s2 + epsilon`` fraction."""
    s = validate_score_vector(score_vector)
    m = len(s)
    if m < 3:
        raise ConstructionError("scoring_gap_lb: need m >= 3")
    rule = positional_rule(s)
    g = _check_gamma(gamma, "scoring_gap_lb")
    eps = _frac(epsilon, "epsilon")
    delta = score_gap(s)
    if g == 1:
        return _trivial_spec("scoring_gap_lb", rule, m, g, eps)
    if eps <= 0:
        raise ConstructionError("scoring_gap_lb: epsilon must be positive")
    if delta + eps >= 1:
        raise ConstructionError(
            f"scoring_gap_lb: group fraction s1-s2+epsilon = {delta + eps} must be below 1 "
            "(for s1-s2 = 1 use scoring_gap_bound, the instance degenerates)"
        )
    x = g * (1 - delta) / (1 - g + g * delta)
    bloc = list(range(2, m))
    names = {0: "a'", 1: "a*"}
    names.update({a: f"a{a - 1}" for a in bloc})
    fa, fb = delta + eps, 1 - delta - eps
    pieces = rotations(bloc)
    n = least_n([fa, fb], [len(pieces)] * 2)
    zero = Fraction(0)
    subgroups = []
    subgroups += _split("A", int(fa * n), pieces, lambda p: tuple([x, zero] + [x] * len(bloc)),
                        lambda p: [[0], p, [1]], frozenset({0}))
    subgroups += _split("B", int(fb * n), pieces, lambda p: tuple([zero, Fraction(1)] + [zero] * len(bloc)),
                        lambda p: [[1], [0], p], frozenset({1}))
    spec = _assemble(
        "scoring_gap_lb", rule, g, m, eps, subgroups, names,
        {"a_prime": 0, "a_star": 1, "A": bloc}, [("A", fa, int(fa * n)), ("B", fb, int(fb * n))],
        0, scoring_gap_bound(delta, g), {"x": x, "delta": delta},
    )
    return spec


def gen_plurality_lb(gamma, m: int = 5, epsilon="1/1000000") -> ConstructionSpec:
    """PLURALITY instance: ``a'`` is ranked first by a ``1/m + epsilon`` fraction only.

    ``epsilon = 0`` is accepted; ``a'`` then ties on first places and wins
    through the lowest-index tie-break.
    """
    g = _check_gamma(gamma, "plurality_lb")
    eps = _frac(epsilon, "epsilon")
    if m < 2:
        raise ConstructionError("plurality_lb: need m >= 2")
    if g == 1:
        return _trivial_spec("plurality_lb", PLURALITY, m, g, eps)
    if eps < 0 or eps >= Fraction(m - 1, m):
        raise ConstructionError("plurality_lb: epsilon must lie in [0, (m-1)/m)")
    x = g * Fraction(m - 1, m) / (1 - g + g / m)
    bloc = list(range(1, m))
    names = {0: "a'"}
    names.update({a: f"a{a}" for a in bloc})
    fa, fb = Fraction(1, m) + eps, Fraction(m - 1, m) - eps
    pieces = rotations(bloc)
    n = least_n([fa, fb], [len(pieces)] * 2)
    zero = Fraction(0)
    subgroups = []
    subgroups += _split("A", int(fa * n), pieces, lambda p: tuple([x] + [zero] * len(bloc)),
                        lambda p: [[0], p], frozenset({0}))
    subgroups += _split("B", int(fb * n), pieces, lambda p: tuple([zero] + [Fraction(1)] * len(bloc)),
                        lambda p: [p, [0]], frozenset())
    closed = m * (1 - g) / g + 1
    return _assemble(
        "plurality_lb", PLURALITY, g, m, eps, subgroups, names,
        {"a_prime": 0, "a_star": 1, "A": bloc}, [("A", fa, int(fa * n)), ("B", fb, int(fb * n))],
        0, closed, {"x": x},
    )


def gen_maximin_lb(gamma, m: int = 5) -> ConstructionSpec:
    """MAXIMIN instance: every alternative's worst defeat is ``n(m-2)/(m-1)``."""
    g = _check_gamma(gamma, "maximin_lb")
    if m < 3:
        raise ConstructionError("maximin_lb: need m >= 3")
    if g == 1:
        return _trivial_spec("maximin_lb", MAXIMIN, m, g)
    u_prime = g * (m - 2) / ((1 - g) * (m - 1) + g)
    bloc = list(range(1, m))
    names = {0: "a'"}
    names.update({a: f"a{a}" for a in bloc})
    fa, fb = Fraction(1, m - 1), Fraction(m - 2, m - 1)
    pieces = rotations(bloc)
    n = least_n([fa, fb], [len(pieces)] * 2)
    zero = Fraction(0)
    subgroups = []
    subgroups += _split("A", int(fa * n), pieces, lambda p: tuple([u_prime] + [zero] * len(bloc)),
                        lambda p: [[0], p], frozenset({0}))
    subgroups += _split("B", int(fb * n), pieces, lambda p: tuple([zero] + [Fraction(1)] * len(bloc)),
                        lambda p: [p, [0]], frozenset())
    closed = ((1 - g) * (m - 1) + g) / g
    return _assemble(
        "maximin_lb", MAXIMIN, g, m, None, subgroups, names,
        {"a_prime": 0, "a_star": 1, "A": bloc}, [("A", fa, int(fa * n)), ("B", fb, int(fb * n))],
        0, closed, {"u_prime": u_prime},
    )


def _sqrt_fraction(m: int) -> Fraction:
    r = math.isqrt(m)
    return Fraction(r) if r * r == m else Fraction(math.sqrt(m)).limit_denominator(10**6)


def gen_sqrtm_lb(score_vector, gamma, m: int | None = None, C=None, Cprime=None) -> ConstructionSpec:
    """Instance forcing distortion of order sqrt(m) on any positional rule.

    Group (A), a ``C/sqrt(m)`` fraction, ranks ``a'`` first and ``a*`` last;
    group (B) places ``a*`` at the position ``t <= ceil(sqrt m)`` with the
    smallest score gap and ``a'`` right behind it.  ``C`` and ``Cprime``
    default to the smallest values (plus a small margin) for which the
    rankings and the win of ``a'`` hold; ``sqrt(m)`` is replaced by a
    rational approximation when m is not a perfect square.
    """
    if isinstance(score_vector, str):
        if m is None:
            raise ConstructionError("sqrtm_lb: m is required with a named rule")
        rule = resolve_rule(score_vector)
        s = rule.score_vector(m)
    else:
        s = validate_score_vector(score_vector)
        rule = positional_rule(s)
    m = len(s)
    if m < 4:
        raise ConstructionError("sqrtm_lb: need m >= 4")
    g = _check_gamma(gamma, "sqrtm_lb", allow_zero=True, allow_one=False)
    root = _sqrt_fraction(m)
    tmax = min(m - 1, math.ceil(math.sqrt(m)))
    gaps = [s[t - 1] - s[t] for t in range(1, tmax + 1)]
    t = 1 + gaps.index(min(gaps))
    gap = gaps[t - 1]
    x = 1 / (1 - g)
    bloc = list(range(2, m))
    k = m - 2
    names = {0: "a'", 1: "a*"}
    names.update({a: f"a{a - 1}" for a in bloc})
    # positions (1-based) used by the bloc: group A fills 2..m-1; group B fills 1..t-1 and t+2..m
    mean_a = sum(s[1:m - 1], Fraction(0)) / k
    slots_b = list(range(1, t)) + list(range(t + 2, m + 1))
    mean_b = sum((s[p - 1] for p in slots_b), Fraction(0)) / k
    # a' beats a*:   alpha > (1 - alpha) * gap
    # a' beats bloc: alpha + (1 - alpha) s_{t+1} > alpha mean_a + (1 - alpha) mean_b
    thresholds = [gap / (1 + gap)]
    d_b = s[t] - mean_b
    slope = (1 - mean_a) - d_b
    if d_b <= 0:
        if slope <= 0:
            raise ConstructionError("sqrtm_lb: a' cannot beat the bloc for any group size")
        thresholds.append(-d_b / slope)
    base = max(thresholds)
    if C is None:
        alpha = base + (1 - base) / (4 * m)
        C = alpha * root
    else:
        C = _frac(C, "C")
        alpha = C / root
    if not base < alpha <= Fraction(1, 2):
        raise ConstructionError(
            f"sqrtm_lb: C/sqrt(m) = {alpha} must exceed {base} (so a' wins) and be at most 1/2"
        )
    y_min = (t - 1) * x / k
    if Cprime is None:
        y = y_min if y_min > 0 else x / (m * m)
        Cprime = y * root
    else:
        Cprime = _frac(Cprime, "Cprime")
        y = Cprime / root
    if y < y_min or y <= 0:
        raise ConstructionError(f"sqrtm_lb: C'/sqrt(m) = {y} must be positive and at least {y_min}")
    pieces = rotations(bloc)
    fa, fb = alpha, 1 - alpha
    n = least_n([fa, fb], [k, k])
    zero = Fraction(0)

    def row_b(p):
        u = [y, Fraction(1)] + [zero] * k
        for a in p[: t - 1]:
            u[a] = x
        return tuple(u)

    def blocks_b(p):
        return [list(p[: t - 1]), [1], [0], list(p[t - 1:])]

    subgroups = []
    subgroups += _split("A", int(fa * n), pieces, lambda p: tuple([x, zero] + [x] * k),
                        lambda p: [[0], p, [1]], frozenset({0}))
    subgroups += _split("B", int(fb * n), pieces, row_b, blocks_b, frozenset())
    limit = (1 - alpha) / (alpha * x + (1 - alpha) * y)
    return _assemble(
        "sqrtm_lb", rule, g, m, None, subgroups, names,
        {"a_prime": 0, "a_star": 1, "A": bloc, "t": t},
        [("A", fa, int(fa * n)), ("B", fb, int(fb * n))],
        0, limit, {"x": x, "y": y, "t": t, "C": C, "Cprime": Cprime, "alpha": alpha, "sqrt_m": root},
        notes="sqrt(m) distortion shape; constants solved, not fixed",
    )


def utilities_at_n(spec: ConstructionSpec, n: int) -> UtilityMatrix:
    """The construction's utilities with the same group fractions but ``n`` voters.

    Each group's voters are spread over its subgroups as evenly as possible
    (earlier subgroups take the remainder), so bloc-internal balance can be
    lost; the result is meant as a search seed, not a verified instance.
    """
    rows, counts = [], []
    it = iter(spec.subgroups)
    for label, frac, total in spec.groups:
        size = frac * n
        if Fraction(size).denominator != 1:
            raise ConstructionError(f"group ({label}) fraction {frac} times n={n} is not an integer")
        members, seen = [], 0
        while seen < total:
            sg = next(it)
            members.append(sg)
            seen += sg.count
        base, extra = divmod(int(size), len(members))
        for j, sg in enumerate(members):
            c = base + (1 if j < extra else 0)
            if c:
                rows.append(sg.utilities)
                counts.append(c)
    return UtilityMatrix(np.array(rows, dtype=object), counts)


FAMILIES = {
    "copeland_lb": gen_copeland_lb,
    "slater_lb": gen_slater_lb,
    "scoring_gap_lb": gen_scoring_gap_lb,
    "plurality_lb": gen_plurality_lb,
    "maximin_lb": gen_maximin_lb,
    "sqrtm_lb": gen_sqrtm_lb,
}


# ---------------------------------------------------------------------------
# verification


@dataclass
class Claim:
    name: str
    ok: bool
    detail: str = ""


@dataclass
class ConstructionReport:
    family: str
    claims: list
    realized: object
    closed_form: object
    instance: DistortionResult | None

    @property
    def ok(self) -> bool:
        return all(c.ok for c in self.claims)

    @property
    def first_failure(self) -> Claim | None:
        return next((c for c in self.claims if not c.ok), None)

    @property
    def relative_gap(self):
        """``|realized - closed form| / closed form`` (0 for matching infinities)."""
        if self.closed_form == math.inf:
            return 0.0 if self.realized == math.inf else math.inf
        return abs(Fraction(self.realized) - Fraction(self.closed_form)) / Fraction(self.closed_form)


def _family_claims(spec: ConstructionSpec, profile: Profile) -> list[Claim]:
    m, n = spec.m, profile.n
    out = []
    if spec.family == "copeland_lb" and "A" in spec.roles:
        sc = copeland_scores(profile)
        A, T = spec.roles["A"], spec.roles["A_tilde"]
        want = [m - 2, m - 3] + [m - 3] * len(A) + [0] * len(T)
        out.append(Claim("COPELAND scores", sc == want, f"got {sc}, expected {want}"))
        out.append(Claim("a' unique COPELAND winner", sc.count(max(sc)) == 1 and sc[0] == max(sc), f"scores {sc}"))
    if spec.family == "slater_lb" and "A" in spec.roles:
        counts = tuple(ranking_disagreements(profile, r) for r in slater_candidate_rankings(spec))
        out.append(Claim("SLATER candidate disagreements", counts == (1, 3, 2, 4, 2, 3), f"got {counts}"))
    if spec.family == "maximin_lb" and m >= 3 and spec.gamma != 1:
        sc = maximin_scores(profile)
        target = Fraction(n * (m - 2), m - 1)
        out.append(Claim("MAXIMIN worst defeats", all(v == target for v in sc), f"got {sc}, expected all {target}"))
    if spec.family in ("scoring_gap_lb", "sqrtm_lb") and spec.gamma != 1:
        pts = positional_points(profile, spec.rule.score_vector(m))
        out.append(Claim("a' outscores a*", pts[0] > pts[1], f"points {list(pts)}"))
    return out


def verify_construction(spec: ConstructionSpec, policy: TiePolicy = ENUMERATE, run_instance: bool = True) -> ConstructionReport:
    """Recheck a spec from scratch: consistency, winner, family claims, distortion.

    The predicted profile is checked against exact PS-values, the rule is
    re-run on it, and the realized welfare ratio is compared with the stored
    prediction.  ``run_instance`` additionally evaluates
    :func:`instance_distortion` with the predicted profile as a candidate.
    """
    U = spec.utilities
    w = U.welfare
    if max(w) == 0:
        raise UndefinedDistortion("construction has zero welfare everywhere")
    V = ps_values(spec.gamma, U)
    claims = []
    bad = first_inconsistency(spec.predicted_profile, V)
    claims.append(Claim("predicted profile consistent", bad is None, "" if bad is None else f"voter {bad[0]} ranks {bad[2]} above {bad[1]}"))
    winner = spec.rule.winner(spec.predicted_profile)
    claims.append(Claim("predicted winner", winner == spec.predicted_winner, f"rule elects {winner}, expected {spec.predicted_winner}"))
    claims.extend(_family_claims(spec, spec.predicted_profile))
    realized = welfare_ratio(max(w), w[winner])
    claims.append(Claim("realized distortion matches prediction", realized == spec.predicted_distortion,
                        f"realized {realized}, predicted {spec.predicted_distortion}"))
    inst = None
    if run_instance:
        inst = instance_distortion(spec.rule, spec.gamma, U, policy, candidates=[spec.predicted_profile])
        claims.append(Claim("instance distortion at least realized", inst.value >= realized, f"{inst.value} vs {realized}"))
    return ConstructionReport(spec.family, claims, realized, spec.closed_form, inst)
