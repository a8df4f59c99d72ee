"""Per-instance distortion, worst-case search, kappa and upper-bound checks."""

from __future__ import annotations

import itertools
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .core import (
    ENUMERATE,
    Profile,
    PSValueMatrix,
    TiePolicy,
    UtilityMatrix,
    as_ps_vector,
    gamma_min as _gamma_min,
    grouped_gamma,
    profiles_consistent_with,
    ps_values,
    require_consistent,
    to_fraction,
)
from .exceptions import BudgetExceeded, EnumerationOverflow, RangeError, UndefinedDistortion
from .rules import dominance, resolve_rule, score_gap, uncovered_set

INF = math.inf
BOUND_TOL = 1e-9


def _is_frac(x) -> bool:
    return isinstance(x, (Fraction, int)) and not isinstance(x, bool)


def leq(x, bound, tol: float = BOUND_TOL) -> bool:
    """``x <= bound``; exact when both sides are rational, relative ``tol`` otherwise."""
    if bound == INF:
        return True
    if x == INF:
        return False
    if _is_frac(x) and _is_frac(bound):
        return x <= bound
    return float(x) <= float(bound) + tol * max(1.0, abs(float(bound)))


def welfare_ratio(opt, w):
    if w == 0:
        return INF
    return opt / w


@dataclass
class DistortionResult:
    """Distortion of one instance (or the best instance a search found).

    ``exact`` is True when the supremum ran over every consistent profile; a
    False flag means ``value`` is only a lower estimate.
    """

    value: object
    profile: Profile | None
    winner: int | None
    optimum: int
    exact: bool
    welfare: np.ndarray | None = None
    profiles_checked: int = 0
    utilities: UtilityMatrix | None = None
    gamma: object = None
    notes: str = ""

    def __float__(self):
        return float(self.value)


def _fallback_profiles(V, policy: TiePolicy):
    out = []
    for variant in ("adversarial", "lexicographic"):
        out.extend(profiles_consistent_with(V, TiePolicy(variant, policy.cap, policy.tol)))
    return out


def instance_distortion(
    rule,
    gamma,
    U,
    policy: TiePolicy = ENUMERATE,
    candidates: Iterable[Profile] = (),
    over_cowinners: bool = False,
) -> DistortionResult:
    """``sup sw(a*) / sw(f(pi))`` over profiles consistent with ``V(gamma, U)``.

    ``candidates`` are extra profiles (checked for consistency first) that
    join the supremum, which matters once the enumeration cap forces the
    heuristic fallback.  With ``over_cowinners`` every optimal alternative
    before tie-breaking counts as a possible winner.
    """
    U = UtilityMatrix.coerce(U)
    res = values_distortion(rule, ps_values(gamma, U), policy, candidates, over_cowinners)
    res.utilities, res.gamma = U, gamma
    return res


def values_distortion(
    rule,
    V: PSValueMatrix,
    policy: TiePolicy = ENUMERATE,
    candidates: Iterable[Profile] = (),
    over_cowinners: bool = False,
) -> DistortionResult:
    """Distortion over the profiles consistent with an arbitrary value matrix.

    ``V.welfare`` must hold the true welfare vector; this is how the robust
    model (whose values are not plain PS-values) shares the computation.
    """
    rule = resolve_rule(rule)
    w = V.welfare
    opt = max(w)
    if opt == 0:
        raise UndefinedDistortion("every alternative has zero welfare")
    a_star = int(next(a for a in range(V.m) if w[a] == opt))
    exact = policy.variant == "enumerate"
    notes = ""
    try:
        profiles = profiles_consistent_with(V, policy)
    except EnumerationOverflow as err:
        profiles = _fallback_profiles(V, policy)
        exact = False
        notes = str(err) + "; heuristic profiles used"
    extra = []
    for p in candidates:
        require_consistent(p, V, policy.tol)
        extra.append(p)
    best = None
    checked = 0
    for p in itertools.chain(profiles, extra):
        checked += 1
        winners = rule.cowinners(p) if over_cowinners else [rule.winner(p)]
        for a in winners:
            r = welfare_ratio(opt, w[a])
            if best is None or r > best[0]:
                best = (r, p, a)
    value, prof, win = best
    return DistortionResult(value, prof, int(win), a_star, exact, w, checked, None, None, notes)


# ---------------------------------------------------------------------------
# kappa


def all_profiles(n: int, m: int) -> Iterable[tuple[tuple[int, ...], ...]]:
    perms = list(itertools.permutations(range(m)))
    return itertools.product(perms, repeat=n)


def profile_space_size(n: int, m: int) -> int:
    return math.factorial(m) ** n


def kappa_bruteforce(rule, n: int, m: int, budget: int = 10**7, return_witness: bool = False):
    """Exact ``min_pi min_{a != f(pi)} |{i : f(pi) > a}| / n`` by enumerating all profiles."""
    rule = resolve_rule(rule)
    size = profile_space_size(n, m)
    if size > budget:
        raise BudgetExceeded(f"{m}!^{n} = {size} profiles exceed the budget {budget}")
    best, witness = None, None
    for rows in all_profiles(n, m):
        p = Profile.from_rankings(rows)
        f = rule.winner(p)
        t = p.tally[f]
        val = min(int(t[a]) for a in range(m) if a != f)
        if best is None or val < best:
            best, witness = val, p
            if best == 0:
                break
    k = Fraction(best, n)
    return (k, witness) if return_witness else k


def cyclic_profile(n: int, m: int) -> Profile:
    """m equal groups, group k ranking k > k+1 > ... cyclically (needs m | n)."""
    if n % m:
        raise ValueError("the cyclic profile needs m to divide n")
    rows = [[(k + j) % m for j in range(m)] for k in range(m)]
    return Profile(rows, [n // m] * m)


def kappa_sampled(rule, n: int, m: int, samples: int = 10_000, seed: int = 0):
    """Sampled upper estimate of kappa (a minimum over a subset of profiles).

    Always includes the cyclic family when ``m | n``.  Returns
    ``(estimate, exact=False)``.
    """
    rule = resolve_rule(rule)
    rng = np.random.default_rng(seed)
    best = None

    def visit(p):
        nonlocal best
        f = rule.winner(p)
        val = min(int(p.tally[f, a]) for a in range(m) if a != f)
        best = val if best is None else min(best, val)

    if n % m == 0:
        visit(cyclic_profile(n, m))
    for _ in range(samples):
        visit(Profile(np.argsort(rng.random((n, m)), axis=1)))
    return Fraction(best, n), False


KNOWN_KAPPA = {"plurality": "1/m", "borda": "1/m", "maximin": "1/m"}


def known_kappa(rule, m: int):
    """Proven kappa value for rules where it is known, else None."""
    name = resolve_rule(rule).name
    return Fraction(1, m) if name in KNOWN_KAPPA else None


# ---------------------------------------------------------------------------
# key lemma


@dataclass(frozen=True)
class PairViolation:
    a: int
    b: int
    ratio: object
    bound: object


def _z(gmin):
    return (1 - gmin) / gmin


def key_lemma_bound(gmin, n: int, t: int):
    """``(1 - g)/g * n / t + 1``."""
    return _z(gmin) * n / t + 1


def check_key_lemma(gamma, U, profile: Profile, tol: float = BOUND_TOL) -> list[PairViolation]:
    """Pairs ``(a, b)`` where ``sw(b)/sw(a)`` exceeds the key-lemma bound.

    The check is done in cross-multiplied form ``sw(b) t <= (z n + t) sw(a)``
    so that ``sw(a) = 0`` is covered as well.
    """
    U = UtilityMatrix.coerce(U)
    V = ps_values(gamma, U)
    require_consistent(profile, V)
    g = grouped_gamma(gamma, U)
    gmin = min(g)
    if gmin <= 0:
        raise RangeError("the key lemma needs a positive minimum public spirit")
    z = _z(gmin)
    w = U.welfare
    n = U.n
    out = []
    for a in range(U.m):
        for b in range(U.m):
            t = int(profile.tally[a, b])
            if a == b or t == 0:
                continue
            lhs = w[b] * t
            rhs = (z * n + t) * w[a]
            if not leq(lhs, rhs, tol):
                out.append(PairViolation(a, b, welfare_ratio(w[b], w[a]), key_lemma_bound(gmin, n, t)))
    return out


# ---------------------------------------------------------------------------
# theoretical bounds


@dataclass
class BoundReport:
    rule: str
    gamma_min: object
    m: int
    upper: object
    lower: object
    z: object
    upper_form: str
    lower_form: str
    upper_asymptotic: bool = False
    lower_asymptotic: bool = False
    observed: object = None

    def respects_upper(self, tol: float = BOUND_TOL) -> bool:
        return self.observed is None or self.upper is None or leq(self.observed, self.upper, tol)


def theoretical_bounds(rule, gamma_min, m: int, observed=None) -> BoundReport:
    """Closed-form upper and (uniform-gamma) lower bounds for ``rule``.

    Asymptotic entries carry ``None`` as value and a symbolic form.  For
    positional rules other than the ones with tighter results the lower bound
    is the score-gap bound ``(1 - g)/(g * (s1 - s2)) + 1``.
    """
    rule = resolve_rule(rule)
    g = gamma_min if isinstance(gamma_min, float) else to_fraction(gamma_min)
    if not 0 <= g <= 1:
        raise RangeError("gamma_min must lie in [0, 1]")
    z = INF if g == 0 else _z(g)
    name = rule.name

    def lin(c):
        return INF if z == INF else c * z + 1

    up_asym = lo_asym = False
    if name in ("copeland", "slater", "uncovered"):
        up = lo = INF if z == INF else (2 * z + 1) ** 2
        up_form = lo_form = "(2z+1)^2"
    elif name == "plurality":
        up, lo, up_form, lo_form = lin(m), lin(m), "mz+1", "mz+1"
    elif name in ("borda", "maximin"):
        up, lo, up_form, lo_form = lin(m), lin(m - 1), "mz+1", "(m-1)z+1"
    elif name == "veto":
        up, lo, up_form, lo_form = INF, INF, "inf", "inf"
    elif rule.is_positional:
        gap = score_gap(rule.score_vector(m))
        lo = INF if gap == 0 or z == INF else z / gap + 1
        lo_form = "z/(s1-s2)+1 and Omega(sqrt m)"
        if name == "piecewise":
            up, up_form, up_asym = (INF if z == INF else None), "O(m^(2/3))", True
        else:
            up, up_form = INF, "unbounded (no kappa bound)"
    else:
        up, lo, up_form, lo_form = INF, None, "z/kappa+1 with kappa unknown", "unknown"
        lo_asym = True
    return BoundReport(name, g, m, up, lo, z, up_form, lo_form, up_asym, lo_asym, observed)


def universal_bound(gamma_min, kappa):
    """Upper bound ``(1 - g)/(g kappa) + 1`` valid for any rule with the given kappa."""
    if gamma_min == 0 or kappa == 0:
        return INF
    return _z(gamma_min) / kappa + 1


# ---------------------------------------------------------------------------
# worst-case search


def _split_budget(budget: int, restarts: int) -> list[int]:
    base, extra = divmod(budget, restarts)
    return [base + (1 if r < extra else 0) for r in range(restarts)]


def _search_eval(rule, gamma, values, policy):
    U = UtilityMatrix(values)
    if not np.any(U.welfare > 0):
        return -1.0, None
    res = instance_distortion(rule, gamma, U, policy)
    return float(res.value), res


def _restart(args):
    rule, gamma, n, m, steps, ss, start, policy = args
    rng = np.random.default_rng(ss)
    cur = np.array(start, dtype=float) if start is not None else rng.random((n, m))
    cur_val, _ = _search_eval(rule, gamma, cur, policy)
    best_val, best_U = cur_val, cur.copy()
    for _ in range(max(0, steps - 1)):
        cand = cur.copy()
        move = rng.integers(3)
        if move == 0:
            i, a = rng.integers(n), rng.integers(m)
            scale = max(float(cand.max()), 1e-3)
            cand[i, a] = max(0.0, cand[i, a] + rng.normal(0.0, 0.2 * scale))
        elif move == 1:
            a = rng.integers(m)
            cand[:, a] *= math.exp(rng.normal(0.0, 0.5))
        else:
            cand[rng.integers(n), rng.integers(m)] = 0.0
        val, _ = _search_eval(rule, gamma, cand, policy)
        if val >= cur_val:
            cur, cur_val = cand, val
            if val > best_val:
                best_val, best_U = val, cand.copy()
    return best_val, best_U


def worker_count() -> int:
    try:
        return max(1, int(os.environ.get("DISTORT_THREADS", "1")))
    except ValueError:
        return 1


def worst_case_search(
    rule,
    gamma,
    n: int,
    m: int,
    budget: int,
    seed: int = 0,
    restarts: int = 8,
    seeds: Sequence = (),
    policy: TiePolicy = TiePolicy("adversarial"),
) -> DistortionResult:
    """Seeded random-restart hill climbing over utility matrices.

    Moves are single-entry noise, column rescaling and zeroing an entry.
    ``seeds`` are starting matrices (``n x m`` arrays or UtilityMatrix
    objects); each one gets its own restart in addition to ``restarts``
    random ones.  The result is a lower estimate of the worst case.
    Restarts own independent RNG streams spawned from ``seed``, so the
    outcome does not depend on ``DISTORT_THREADS``.
    """
    if budget < 1:
        raise ValueError("budget must be at least 1")
    rule = resolve_rule(rule)
    as_ps_vector(gamma, n)
    starts = []
    for s in seeds:
        arr = np.asarray(UtilityMatrix.coerce(s).expand(), dtype=float)
        if arr.shape != (n, m):
            raise ValueError(f"seed matrix has shape {arr.shape}, expected {(n, m)}")
        starts.append(arr)
    starts.extend([None] * restarts)
    streams = np.random.SeedSequence(seed).spawn(len(starts))
    jobs = [
        (rule, gamma, n, m, steps, ss, st, policy)
        for steps, ss, st in zip(_split_budget(budget, len(starts)), streams, starts)
        if steps > 0
    ]
    workers = worker_count()
    if workers > 1 and rule.kind != "custom":
        with ProcessPoolExecutor(workers) as ex:
            outcomes = list(ex.map(_restart, jobs))
    else:
        outcomes = [_restart(j) for j in jobs]
    # the climb scores ties heuristically, so rescore every restart's best
    # (and each seed as given) with enumeration before picking the winner
    finalists = [U for U in starts if U is not None] + [o[1] for o in outcomes if o[1] is not None]
    final = None
    for U in finalists:
        if not np.any(U.sum(axis=0) > 0):
            continue
        res = instance_distortion(rule, gamma, UtilityMatrix(U), ENUMERATE)
        if final is None or res.value > final.value:  # first maximum wins ties
            final = res
    if final is None:
        raise UndefinedDistortion("search found no instance with positive welfare")
    final.notes = (final.notes + "; " if final.notes else "") + "search lower estimate"
    final.exact = False
    return final


# ---------------------------------------------------------------------------
# uncovered-set upper bound


@dataclass(frozen=True)
class UncoveredCase:
    profile_index: int
    candidate: int
    hops: int
    via: int | None
    ratio: object
    bound: object
    holds: bool


@dataclass
class UncoveredReport:
    cases: list = field(default_factory=list)
    optimum: int = 0
    bound: object = None
    exact: bool = True

    @property
    def holds(self) -> bool:
        return all(c.holds for c in self.cases)


def verify_uncovered_upper(gamma, U, policy: TiePolicy = ENUMERATE) -> UncoveredReport:
    """Check the one-hop / two-hop welfare chain for every uncovered alternative.

    For each consistent profile and each uncovered ``a'``: either ``a'``
    weakly dominates ``a*`` (one hop, bound ``2z+1``) or some ``a`` sits
    between them (two hops, bound ``(2z+1)^2``).  A missing chain is a
    failure with ``hops = 0``.
    """
    U = UtilityMatrix.coerce(U)
    V = ps_values(gamma, U)
    g = _gamma_min(grouped_gamma(gamma, U))
    if g <= 0:
        raise RangeError("the uncovered-set bound needs a positive minimum public spirit")
    z = _z(g)
    one, two = 2 * z + 1, (2 * z + 1) ** 2
    w = U.welfare
    a_star = next(a for a in range(U.m) if w[a] == max(w))
    exact = True
    try:
        profiles = list(profiles_consistent_with(V, policy))
    except EnumerationOverflow:
        profiles = _fallback_profiles(V, policy)
        exact = False
    rep = UncoveredReport(optimum=a_star, bound=two, exact=exact and policy.variant == "enumerate")
    for k, p in enumerate(profiles):
        wd = dominance(p, weak=True)
        for a1 in uncovered_set(p):
            r = welfare_ratio(w[a_star], w[a1])
            if a1 == a_star or wd[a1, a_star]:
                rep.cases.append(UncoveredCase(k, a1, 1, None, r, one, leq(r, one)))
                continue
            mids = [a for a in range(U.m) if wd[a1, a] and wd[a, a_star]]
            if mids:
                rep.cases.append(UncoveredCase(k, a1, 2, mids[0], r, two, leq(r, two)))
            else:
                rep.cases.append(UncoveredCase(k, a1, 0, None, r, two, False))
    return rep
