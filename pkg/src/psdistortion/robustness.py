"""Robustness: per-alternative public spirit, estimation errors and selfish voters.

Voters may apply a different public-spirit level to each alternative
(a PS-matrix) and may overestimate their own utility by a factor ``delta``
and the average welfare by a factor ``eta``.  Separately, some voters may
have their public spirit set to zero.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .core import (
    ENUMERATE,
    PSValueMatrix,
    Profile,
    TiePolicy,
    UtilityMatrix,
    _numeric_array,
    exact_array,
    is_exact,
    profiles_consistent_with,
    ps_values,
    require_consistent,
    to_fraction,
)
from .distortion import (
    BOUND_TOL,
    INF,
    DistortionResult,
    _split_budget,
    _z,
    instance_distortion,
    known_kappa,
    leq,
    values_distortion,
    welfare_ratio,
    worker_count,
)
from .exceptions import DimensionError, RangeError, UndefinedDistortion
from .rules import resolve_rule

UNCOVERED_RULES = ("copeland", "slater")


def _matrix(a, name) -> np.ndarray:
    arr = _numeric_array(a)
    if arr.ndim != 2:
        raise DimensionError(f"{name} must be two-dimensional, got shape {arr.shape}")
    return arr


def _align(arr, U: UtilityMatrix, name) -> np.ndarray:
    """Rows of a per-row (k x m) or per-voter (n x m) matrix, aligned with ``U``'s rows."""
    if arr.shape[1] != U.m:
        raise DimensionError(f"{name} has {arr.shape[1]} columns, expected {U.m}")
    if arr.shape[0] == U.k:
        return arr
    if arr.shape[0] != U.n:
        raise DimensionError(f"{name} has {arr.shape[0]} rows, expected {U.k} or {U.n}")
    starts = np.concatenate([[0], np.cumsum(U.counts)[:-1]]).astype(int)
    for s, c in zip(starts, U.counts):
        if any(np.any(arr[s + j] != arr[s]) for j in range(1, int(c))):
            raise DimensionError(f"per-voter {name} varies inside a group of identical voters")
    return arr[starts]


class PSMatrix:
    """Public spirit per voter and alternative, entries in [0, 1]."""

    def __init__(self, values):
        vals = _matrix(values, "PS-matrix")
        if any(not (0 <= v <= 1) for v in vals.flat):
            raise RangeError("PS-matrix entries must lie in [0, 1]")
        self.values = vals

    @classmethod
    def from_vector(cls, gamma, m: int) -> "PSMatrix":
        """Row-constant matrix from a PS-vector."""
        g = np.asarray(gamma)
        return cls(np.repeat(g.reshape(-1, 1), m, axis=1))

    @classmethod
    def coerce(cls, Gamma, U: UtilityMatrix) -> "PSMatrix":
        if isinstance(Gamma, cls):
            return Gamma
        arr = np.asarray(Gamma, dtype=object)
        if arr.ndim == 0:
            return cls.from_vector([arr.item()] * U.k, U.m)
        if arr.ndim == 1:
            return cls.from_vector(list(arr), U.m)
        return cls(Gamma)

    @property
    def gamma_min(self):
        return min(self.values.flat)

    @property
    def shape(self):
        return self.values.shape

    def aligned(self, U: UtilityMatrix) -> np.ndarray:
        return _align(self.values, U, "PS-matrix")


class ErrorMatrices:
    """Multiplicative overestimates of own utility (``delta``) and welfare (``eta``), all >= 1."""

    def __init__(self, delta, eta):
        d, e = _matrix(delta, "delta"), _matrix(eta, "eta")
        if d.shape != e.shape:
            raise DimensionError(f"delta {d.shape} and eta {e.shape} differ in shape")
        for name, arr in (("delta", d), ("eta", e)):
            if any(not (v >= 1) for v in arr.flat):
                raise RangeError(f"{name} entries must be at least 1")
            if not is_exact(arr) and not np.all(np.isfinite(arr)):
                raise RangeError(f"{name} entries must be finite")
        self.delta, self.eta = d, e

    @classmethod
    def ones(cls, k: int, m: int) -> "ErrorMatrices":
        one = np.ones((k, m))
        return cls(one, one)

    @property
    def delta_star(self):
        return max(self.delta.flat)

    @property
    def eta_star(self):
        return max(self.eta.flat)

    def aligned(self, U: UtilityMatrix):
        return _align(self.delta, U, "delta"), _align(self.eta, U, "eta")


def effective_ps_values(Gamma, U, errors: ErrorMatrices | None = None) -> PSValueMatrix:
    """``(1 - G) * delta * u + G * eta * sw / n`` per voter row and alternative.

    With unit errors and a row-constant ``Gamma`` the result matches
    :func:`ps_values` bit for bit (the same operations in the same order).
    """
    U = UtilityMatrix.coerce(U)
    G = PSMatrix.coerce(Gamma, U).aligned(U)
    if errors is None:
        D = E = None
    else:
        D, E = errors.aligned(U)
    # float utilities force float mode, as in ps_values
    exact = U.exact
    if exact:
        U = U.to_exact()
        G = exact_array(G)
        if D is not None:
            D, E = exact_array(D), exact_array(E)
    else:
        G = G.astype(float)
        if D is not None:
            D, E = D.astype(float), E.astype(float)
    u = U.values
    avg = U.welfare / U.n
    one = Fraction(1) if exact else 1.0
    own = u if D is None else D * u
    soc = avg[None, :] if E is None else E * avg[None, :]
    vals = (one - G) * own + G * soc
    return PSValueMatrix(vals, U.counts, U.welfare)


# ---------------------------------------------------------------------------
# bounds


def robust_lemma_bound(gmin, delta_star, eta_star, n: int, t: int):
    """``delta* (1 - g)/g * n/t + eta*/g``."""
    return delta_star * _z(gmin) * n / t + eta_star / gmin


def robust_universal_bound(gmin, kappa, delta_star=1, eta_star=1):
    """Upper bound for any rule with the given kappa under bounded errors."""
    if gmin == 0 or kappa == 0:
        return INF
    return delta_star * _z(gmin) / kappa + eta_star / gmin


def robust_uncovered_bound(gmin, delta_star=1, eta_star=1):
    if gmin == 0:
        return INF
    return (2 * delta_star * _z(gmin) + eta_star / gmin) ** 2


def robust_upper_bound(rule, gmin, m: int, delta_star=1, eta_star=1):
    """The applicable robust upper bound for ``rule``, INF when none is known."""
    name = resolve_rule(rule).name
    if name in UNCOVERED_RULES:
        return robust_uncovered_bound(gmin, delta_star, eta_star)
    kappa = known_kappa(rule, m)
    return INF if kappa is None else robust_universal_bound(gmin, kappa, delta_star, eta_star)


@dataclass(frozen=True)
class RobustViolation:
    a: int
    b: int
    ratio: object
    bound: object


def check_robust_lemma(Gamma, U, errors: ErrorMatrices | None, profile: Profile, tol: float = BOUND_TOL):
    """Pairs ``(a, b)`` breaking the robust welfare-ratio bound (expected: none).

    Checked in the cross-multiplied form
    ``g t sw(b) <= (delta* (1 - g) n + eta* t) sw(a)``.
    """
    U = UtilityMatrix.coerce(U)
    G = PSMatrix.coerce(Gamma, U)
    if errors is None:
        errors = ErrorMatrices.ones(U.k, U.m)
    V = effective_ps_values(G, U, errors)
    require_consistent(profile, V)
    gmin = G.gamma_min
    if gmin <= 0:
        raise RangeError("the robust lemma needs a positive minimum public spirit")
    if V.exact:
        gmin = to_fraction(gmin)
    ds, es = errors.delta_star, errors.eta_star
    w, n = V.welfare, U.n
    out = []
    for a in range(U.m):
        for b in range(U.m):
            t = int(profile.tally[a, b])
            if a == b or t == 0:
                continue
            lhs = gmin * t * w[b]
            rhs = (ds * (1 - gmin) * n + es * t) * w[a]
            if not leq(lhs, rhs, tol):
                out.append(RobustViolation(a, b, welfare_ratio(w[b], w[a]), robust_lemma_bound(gmin, ds, es, n, t)))
    return out


# ---------------------------------------------------------------------------
# robust distortion search


@dataclass
class RobustReport:
    """Best instance found by :func:`robust_distortion` (a lower estimate)."""

    rule: str
    value: object
    utilities: UtilityMatrix
    Gamma: PSMatrix
    errors: ErrorMatrices
    profile: Profile | None
    winner: int | None
    upper: object
    exact: bool = False
    notes: str = ""

    @property
    def respects_upper(self) -> bool:
        return leq(self.value, self.upper)


def robust_instance_distortion(rule, Gamma, U, errors=None, policy: TiePolicy = ENUMERATE) -> DistortionResult:
    U = UtilityMatrix.coerce(U)
    res = values_distortion(rule, effective_ps_values(Gamma, U, errors), policy)
    res.utilities, res.gamma = U, Gamma
    return res


def tightness_instance(gamma, m: int, delta_star, eta_star, epsilon=0):
    """PLURALITY instance where every voter overestimates ``a'`` by ``delta*`` and ``eta*``.

    Returns ``(U, errors, predicted)``.  A ``1/m + epsilon`` fraction values
    only ``a' = 0`` and is exactly indifferent between ``a'`` and the rest;
    the others value only ``1..m-1``.  As ``epsilon -> 0`` the distortion
    tends to ``m delta* (1 - g)/g + eta*``; at ``epsilon = 0`` ``a'`` wins
    the first-place tie through the lowest-index tie-break.
    """
    g, ds, es, eps = (to_fraction(x) for x in (gamma, delta_star, eta_star, epsilon))
    if not 0 < g < 1:
        raise RangeError("gamma must lie strictly between 0 and 1")
    if ds < 1 or es < 1:
        raise RangeError("delta* and eta* must be at least 1")
    fa, fb = Fraction(1, m) + eps, Fraction(m - 1, m) - eps
    if fb <= 0:
        raise RangeError("epsilon too large")
    # indifference for group A: (1-g) ds x + g es fa x = g fb
    x = g * fb / ((1 - g) * ds + g * es * fa)
    n = math.lcm(fa.denominator, fb.denominator)
    na, nb = int(fa * n), int(fb * n)
    if nb % (m - 1):
        n *= m - 1
        na, nb = int(fa * n), int(fb * n)
    zero, one = Fraction(0), Fraction(1)
    U = UtilityMatrix(np.array([[x] + [zero] * (m - 1), [zero] + [one] * (m - 1)], dtype=object), [na, nb])
    d = np.array([[ds] + [one] * (m - 1)] * 2, dtype=object)
    e = np.array([[es] + [one] * (m - 1)] * 2, dtype=object)
    w = U.welfare
    return U, ErrorMatrices(d, e), welfare_ratio(max(w), w[0])


def robust_tightness_target(gamma, m: int, delta_star, eta_star):
    """``m delta* (1 - g)/g + eta*``, the limit of :func:`tightness_instance`."""
    g = to_fraction(gamma)
    return m * to_fraction(delta_star) * _z(g) + to_fraction(eta_star)


def _sketch_errors(D, E, winner, ds, es):
    D[:, :] = 1.0
    E[:, :] = 1.0
    D[:, winner] = ds
    E[:, winner] = es


def _robust_eval(rule, G, U, D, E, policy):
    Um = UtilityMatrix(U)
    if not np.any(Um.welfare > 0):
        return -1.0, None
    res = values_distortion(rule, effective_ps_values(G, Um, ErrorMatrices(D, E)), policy)
    return float(res.value), res


def _robust_restart(args):
    rule, G, n, m, ds, es, steps, ss, start, policy = args
    rng = np.random.default_rng(ss)
    if start is None:
        U = rng.random((n, m))
        D, E = np.ones((n, m)), np.ones((n, m))
        val, res = _robust_eval(rule, G, U, D, E, policy)
        if res is not None:
            _sketch_errors(D, E, res.winner, ds, es)
    else:
        U, D, E = (np.array(a, dtype=float) for a in start)
    cur = (U, D, E)
    cur_val, _ = _robust_eval(rule, G, *cur, policy)
    best_val, best = cur_val, tuple(a.copy() for a in cur)
    for _ in range(max(0, steps - 1)):
        U, D, E = (a.copy() for a in cur)
        move = rng.integers(5)
        i, a = rng.integers(n), rng.integers(m)
        if move == 0:
            scale = max(float(U.max()), 1e-3)
            U[i, a] = max(0.0, U[i, a] + rng.normal(0.0, 0.2 * scale))
        elif move == 1:
            U[:, a] *= math.exp(rng.normal(0.0, 0.5))
        elif move == 2:
            U[i, a] = 0.0
        elif move == 3:
            D[i, a] = rng.choice([1.0, ds, 1.0 + (ds - 1.0) * rng.random()])
        else:
            E[i, a] = rng.choice([1.0, es, 1.0 + (es - 1.0) * rng.random()])
        val, _ = _robust_eval(rule, G, U, D, E, policy)
        if val >= cur_val:
            cur, cur_val = (U, D, E), val
            if val > best_val:
                best_val, best = val, tuple(x.copy() for x in cur)
    return best_val, best


def robust_distortion(
    rule,
    Gamma,
    delta_star,
    eta_star,
    n: int,
    m: int,
    budget: int,
    seed: int = 0,
    restarts: int = 8,
    seeds: Sequence = (),
    policy: TiePolicy = TiePolicy("adversarial"),
) -> RobustReport:
    """Hill climbing over ``U``, ``delta`` and ``eta`` for a large welfare ratio.

    ``Gamma`` is a scalar, PS-vector or ``n x m`` PS-matrix.  Random
    restarts start from the overestimate-the-winner sketch (``delta`` and
    ``eta`` at their maxima on the current winner's column, 1 elsewhere).
    ``seeds`` holds ``(U, errors)`` pairs of matching size.  The best
    instance is re-evaluated over every consistent profile (or the
    heuristic fallback); the value is a lower estimate of the supremum.
    """
    if budget < 1:
        raise ValueError("budget must be at least 1")
    rule = resolve_rule(rule)
    ds, es = float(delta_star), float(eta_star)
    if ds < 1 or es < 1:
        raise RangeError("delta* and eta* must be at least 1")
    probe = UtilityMatrix(np.ones((n, m)))
    G = PSMatrix.coerce(Gamma, probe)
    Gf = np.asarray(G.aligned(probe), dtype=float)
    starts = []
    for U0, err in seeds:
        U0 = UtilityMatrix.coerce(U0)
        arrs = [np.asarray(U0.expand(), dtype=float)]
        for M in (err.delta, err.eta):
            M = np.asarray(M, dtype=float)
            arrs.append(np.repeat(M, U0.counts, axis=0) if M.shape[0] == U0.k else M)
        if arrs[0].shape != (n, m):
            raise ValueError(f"seed has shape {arrs[0].shape}, expected {(n, m)}")
        if np.max(arrs[1]) > ds or np.max(arrs[2]) > es:
            raise RangeError("seed errors exceed delta* or eta*")
        starts.append(tuple(arrs))
    starts.extend([None] * restarts)
    streams = np.random.SeedSequence(seed).spawn(len(starts))
    jobs = [
        (rule, Gf, n, m, ds, es, steps, ss, st, policy)
        for steps, ss, st in zip(_split_budget(budget, len(starts)), streams, starts)
        if steps > 0
    ]
    workers = worker_count()
    if workers > 1 and rule.kind != "custom":
        with ProcessPoolExecutor(workers) as ex:
            outcomes = list(ex.map(_robust_restart, jobs))
    else:
        outcomes = [_robust_restart(j) for j in jobs]
    # rescore each restart's best and each seed over all consistent profiles
    finalists = [st for st in starts if st is not None] + [o[1] for o in outcomes if o[0] >= 0]
    final = None
    for U_, D_, E_ in finalists:
        if not np.any(U_.sum(axis=0) > 0):
            continue
        err_ = ErrorMatrices(D_, E_)
        res = values_distortion(rule, effective_ps_values(Gf, UtilityMatrix(U_), err_), ENUMERATE)
        if final is None or res.value > final.value:
            final, U, errors = res, U_, err_
    if final is None:
        raise UndefinedDistortion("search found no instance with positive welfare")
    upper = robust_upper_bound(rule, G.gamma_min, m, delta_star, eta_star)
    return RobustReport(rule.name, final.value, UtilityMatrix(U), PSMatrix(Gf), errors, final.profile,
                        final.winner, upper, False, final.notes)


# ---------------------------------------------------------------------------
# zeroed public spirit


@dataclass
class ZeroedReport:
    """Outcome of :func:`zeroed_gamma_experiment`."""

    rule: str
    gamma: object
    c: object
    zeroed: int
    general_bound: object
    uncovered_bound: object
    divergent: bool
    observed: object = 0
    instances: int = 0
    violations: list = field(default_factory=list)
    lemma_violations: int = 0

    @property
    def bound(self):
        if self.rule in UNCOVERED_RULES:
            return self.uncovered_bound
        return self.general_bound

    @property
    def holds(self) -> bool:
        return not self.violations and self.lemma_violations == 0


def zeroed_general_bound(gamma_min, c, kappa):
    """``(1 - g)/(g (1 - c) kappa) + 1`` when at most ``c kappa n`` voters are zeroed."""
    if kappa is None or kappa == 0:
        return INF
    return _z(gamma_min) / ((1 - c) * kappa) + 1


def zeroed_uncovered_bound(gamma_min, c):
    """``((1 - g)/(g (1/2 - c)) + 1)^2`` when a ``c`` fraction is zeroed; INF for ``c >= 1/2``."""
    if c >= Fraction(1, 2):
        return INF
    return (_z(gamma_min) / (Fraction(1, 2) - c) + 1) ** 2


def zeroed_count(rule, c, n: int, m: int) -> int:
    """How many voters may be zeroed: ``c n`` for uncovered-set rules, ``c kappa n`` otherwise."""
    name = resolve_rule(rule).name
    if name in UNCOVERED_RULES:
        return math.floor(c * n)
    kappa = known_kappa(rule, m)
    return math.floor(c * kappa * n) if kappa is not None else 0


def choose_zeroed(profile: Profile, a: int, b: int, k: int) -> list[int]:
    """First ``k`` voters ranking ``a`` above ``b``, topped up with others if needed."""
    pref = [i for i, r in enumerate(profile.voters()) if list(r).index(a) < list(r).index(b)]
    rest = [i for i in range(profile.n) if i not in set(pref)]
    return sorted((pref + rest)[:k])


def check_zeroed_lemma(gamma, zeroed, U, profile: Profile, c, tol: float = BOUND_TOL) -> list:
    """Per-pair check of the zeroed-voter welfare bound.

    For each pair ``(a, b)`` with ``t = |{a > b}| >= 1`` whose zeroed
    count among those voters is at most ``c t``, verify
    ``sw(b)/sw(a) <= (1 - g)/g * n/(t (1 - c)) + 1`` with ``g`` the minimum
    over voters that were not zeroed.  Pairs where more voters were zeroed
    are outside the statement and skipped.
    """
    U = UtilityMatrix.coerce(U)
    g = np.array(gamma, dtype=object)
    zs = set(zeroed)
    gmin = min(g[i] for i in range(len(g)) if i not in zs)
    if gmin <= 0:
        raise RangeError("the remaining voters need positive public spirit")
    g2 = g.copy()
    for i in zs:
        g2[i] = 0 if is_exact(g) else 0.0
    Ufull = UtilityMatrix(U.expand())
    require_consistent(profile, ps_values(g2, Ufull))
    w, n = Ufull.welfare, Ufull.n
    voters = profile.voters()
    pos = [{x: j for j, x in enumerate(r)} for r in voters]
    out = []
    for a in range(U.m):
        for b in range(U.m):
            if a == b:
                continue
            fans = [i for i in range(n) if pos[i][a] < pos[i][b]]
            t = len(fans)
            if t == 0 or sum(1 for i in fans if i in zs) > c * t:
                continue
            lhs = w[b] * t * (1 - c) * gmin
            rhs = ((1 - gmin) * n + t * (1 - c) * gmin) * w[a]
            if not leq(lhs, rhs, tol):
                out.append((a, b))
    return out


def _zeroed_sample(rng, n, m):
    kind = rng.integers(3)
    U = rng.random((n, m))
    if kind >= 1:
        U[rng.random((n, m)) < 0.5] = 0.0
    if kind == 2:
        U[:, rng.integers(m)] *= rng.random() * 0.2
    if not np.any(U.sum(axis=0) > 0):
        U[0, 0] = 1.0
    return U


def zeroed_gamma_experiment(rule, gamma, c, n: int, m: int, budget: int, seed: int = 0) -> ZeroedReport:
    """Zero the public spirit of some voters and compare with the degraded bounds.

    For each of ``budget`` random instances the winner under the original
    uniform ``gamma`` is found; the allowed number of voters (see
    :func:`zeroed_count`) is then zeroed among those ranking that winner
    above the welfare optimum, and the distortion under the new vector is
    computed.  The per-pair lemma is checked on a profile of every instance.
    """
    rule = resolve_rule(rule)
    cf = to_fraction(c)
    if not 0 <= cf < 1:
        raise RangeError("c must lie in [0, 1)")
    g = to_fraction(gamma)
    if not 0 < g <= 1:
        raise RangeError("gamma must lie in (0, 1]")
    kappa = known_kappa(rule, m)
    gen = zeroed_general_bound(g, cf, kappa)
    unc = zeroed_uncovered_bound(g, cf)
    k = zeroed_count(rule, cf, n, m)
    rep = ZeroedReport(rule.name, g, cf, k, gen, unc, rule.name in UNCOVERED_RULES and cf >= Fraction(1, 2))
    rng = np.random.default_rng(seed)
    gf = float(g)
    best = 0.0
    for _ in range(budget):
        U = UtilityMatrix(_zeroed_sample(rng, n, m))
        base = instance_distortion(rule, gf, U, TiePolicy("adversarial"))
        zs = choose_zeroed(base.profile, base.winner, base.optimum, k)
        gt = np.full(n, gf)
        gt[zs] = 0.0
        res = instance_distortion(rule, gt, U, ENUMERATE)
        rep.instances += 1
        v = float(res.value)
        best = max(best, v)
        if not leq(v, rep.bound):
            rep.violations.append({"utilities": U.expand().tolist(), "zeroed": zs, "value": v})
        if k < n:
            prof = next(profiles_consistent_with(ps_values(gt, U), TiePolicy("adversarial")))
            rep.lemma_violations += len(check_zeroed_lemma(np.full(n, gf), zs, U, prof, cf))
    rep.observed = best
    return rep
