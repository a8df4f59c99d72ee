"""How distortion reacts to more public spirit.

Covers the composition identity for uniform public spirit, the reduction
that trades a higher uniform level for a transformed utility matrix, the
two-alternative transform for a single lowered voter, and a randomized
search for instances where raising public spirit raises distortion.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .core import (
    DEFAULT_TIE_TOL,
    ENUMERATE,
    UtilityMatrix,
    as_ps_vector,
    exact_array,
    is_exact,
    ps_values,
    tie_blocks,
    to_fraction,
)
from .distortion import instance_distortion
from .exceptions import RangeError, UndefinedDistortion, UnsupportedSize, VerificationError
from .rules import resolve_rule


def _matrices_equal(A, B, tol=DEFAULT_TIE_TOL) -> bool:
    A, B = np.asarray(A), np.asarray(B)
    if A.shape != B.shape:
        return False
    if is_exact(A) and is_exact(B):
        return bool(np.all(A == B))
    a, b = A.astype(float), B.astype(float)
    return bool(np.all(np.abs(a - b) <= tol * np.maximum(1.0, np.maximum(np.abs(a), np.abs(b)))))


def welfare_row_matrix(U) -> UtilityMatrix:
    """Matrix whose rows all equal the average welfare vector ``sw(., U)/n``."""
    U = UtilityMatrix.coerce(U)
    avg = U.welfare / U.n
    return UtilityMatrix(np.tile(avg, (U.k, 1)), U.counts)


def _as_utilities(V) -> UtilityMatrix:
    return UtilityMatrix(V.values, V.counts)


def combined_level(g1, g2):
    return g1 + g2 - g1 * g2


def compose_ps(gamma1, gamma2, U, tol: float = DEFAULT_TIE_TOL):
    """``V(g2, V(g1, U))``, checked against ``V(g1 + g2 - g1 g2, U)``.

    Raises :class:`VerificationError` if the two disagree (exactly in
    rational mode, within ``tol`` in float mode).
    """
    U = UtilityMatrix.coerce(U)
    for g in (gamma1, gamma2):
        if not 0 <= to_fraction(g) <= 1:
            raise RangeError("public-spirit levels must lie in [0, 1]")
    inner = ps_values(gamma1, U)
    twice = ps_values(gamma2, _as_utilities(inner))
    once = ps_values(combined_level(gamma1, gamma2), U)
    if not _matrices_equal(twice.values, once.values, tol):
        raise VerificationError(f"composition of {gamma1} and {gamma2} disagrees with the combined level")
    return twice


def reduction_level(gamma_small, gamma_big):
    """``(g_big - g_small) / (1 - g_small)``."""
    if gamma_small == 1:
        raise RangeError("gamma_small = 1 leaves nothing to reduce")
    if not 0 <= gamma_small <= gamma_big <= 1:
        raise RangeError("need 0 <= gamma_small <= gamma_big <= 1")
    return (gamma_big - gamma_small) / (1 - gamma_small)


def uniform_reduction(U, gamma_small, gamma_big, check: bool = True) -> UtilityMatrix:
    """Utilities ``U~`` with ``V(g_small, U~) = V(g_big, U)`` and equal welfare.

    In rational mode pass Fractions (or ``"p/q"`` strings) for exact equality.
    """
    U = UtilityMatrix.coerce(U)
    if U.exact or isinstance(gamma_small, (Fraction, str)) or isinstance(gamma_big, (Fraction, str)):
        U = U.to_exact()
        gamma_small, gamma_big = to_fraction(gamma_small), to_fraction(gamma_big)
    g_star = reduction_level(gamma_small, gamma_big)
    U_tilde = _as_utilities(ps_values(g_star, U))
    if check:
        if not _matrices_equal(ps_values(gamma_small, U_tilde).values, ps_values(gamma_big, U).values):
            raise VerificationError("reduced utilities do not reproduce the PS-values")
        if not _matrices_equal(U_tilde.welfare, U.welfare):
            raise VerificationError("reduction changed the welfare")
    return U_tilde


# ---------------------------------------------------------------------------
# two alternatives, one voter lowered


def nonuniform_m2_transform(U, gamma, gamma_tilde):
    """Utilities for the lowered PS-vector that keep every old ranking available.

    ``gamma_tilde`` must equal ``gamma`` except at one voter, where it is
    strictly lower.  Returns ``(U_tilde, status)`` with status ``"unchanged"``
    (that voter's order survives the drop), ``"both-tied"`` (the voter is
    indifferent under both vectors) or ``"transformed"``.  In the last case
    utility for the preferred alternative is shifted onto the lowered voter
    from the voters who prefer it, greedily in index order, keeping both
    welfare totals fixed.  The result is per-voter (not grouped).
    """
    U = UtilityMatrix.coerce(U)
    if U.m != 2:
        raise UnsupportedSize("the two-alternative transform needs m = 2")
    n = U.n
    vals = U.expand()
    exact = U.exact or any(isinstance(v, (Fraction, str)) for v in np.ravel(np.asarray(gamma, dtype=object)))
    g = as_ps_vector(gamma, n)
    gt = as_ps_vector(gamma_tilde, n)
    if exact:
        vals, g, gt = exact_array(vals), exact_array(g), exact_array(gt)
    diff = [i for i in range(n) if g[i] != gt[i]]
    if len(diff) != 1 or not gt[diff[0]] < g[diff[0]]:
        raise ValueError("gamma_tilde must lower exactly one voter's public spirit")
    j = diff[0]
    Ufull = UtilityMatrix(vals)
    before = ps_values(g, Ufull).values[j]
    after = ps_values(gt, Ufull).values[j]
    if before[0] == before[1] and after[0] == after[1]:
        return Ufull, "both-tied"
    # name the alternative the voter (weakly) prefers before the drop "a"
    a, b = (0, 1) if before[0] >= before[1] else (1, 0)
    if after[a] >= after[b] or (before[a] == before[b] and after[b] >= after[a]):
        return Ufull, "unchanged"
    need = vals[j, b] - vals[j, a]
    out = vals.copy()
    for i in range(n):
        if need <= 0:
            break
        cap = vals[i, a] - vals[i, b]
        if i == j or cap <= 0:
            continue
        d = min(cap, need)
        out[i, a] = vals[i, a] - d
        out[j, a] = out[j, a] + d
        need -= d
    if need > 0:
        raise VerificationError("not enough slack among voters preferring the higher-welfare alternative")
    return UtilityMatrix(out), "transformed"


# ---------------------------------------------------------------------------
# instance-wise counterexamples


@dataclass
class MonotonicityWitness:
    """Utilities and PS-vectors with ``gamma <= gamma_prime`` where distortion grows."""

    utilities: UtilityMatrix
    gamma: np.ndarray
    gamma_prime: np.ndarray
    before: object
    after: object
    samples: int


def _exact_distortion(rule, gamma, U):
    return instance_distortion(rule, gamma, U, ENUMERATE).value


def verify_witness(rule, U, gamma, gamma_prime) -> bool:
    """Exact re-check: componentwise ``gamma <= gamma'`` and a strict increase."""
    U = UtilityMatrix.coerce(U).to_exact()
    g, gp = exact_array(gamma), exact_array(gamma_prime)
    if any(a > b for a, b in zip(g, gp)):
        return False
    try:
        return _exact_distortion(rule, gp, U) > _exact_distortion(rule, g, U)
    except UndefinedDistortion:
        return False


GRID = 1000


def _sample(rng, n, m):
    """Random instance on a 1/1000 grid, biased towards near-ties.

    Returns integer numerators for U, gamma and gamma'; the sketch case
    puts one alternative just above another for about half the voters.
    """
    kind = rng.integers(3)
    U = rng.integers(0, GRID + 1, (n, m))
    if kind >= 1:
        U[rng.random((n, m)) < 0.5] = 0
    if kind == 2:
        b, c = rng.choice(m, 2, replace=False)
        movers = rng.random(n) < 0.5
        U[movers, c] = np.minimum(GRID, U[movers, b] + rng.integers(1, 50, movers.sum()))
    gamma = np.zeros(n, dtype=np.int64) if rng.random() < 0.5 else rng.integers(0, 300, n)
    bump = np.where(rng.random(n) < 0.6, rng.integers(1, GRID + 1, n), 0)
    gamma_prime = np.minimum(GRID, gamma + bump)
    return U, gamma, gamma_prime


def _grid_exact(a):
    return exact_array(np.vectorize(lambda k: Fraction(int(k), GRID), otypes=[object])(a))


def instancewise_counterexample_search(rule, n: int, m: int, budget: int = 10**6, seed: int = 0):
    """Search for ``gamma <= gamma'`` and ``U`` with ``dist(gamma', U) > dist(gamma, U)``.

    Candidates are screened in float arithmetic and re-verified exactly
    before being returned, so the result is never a false positive.
    Returns a :class:`MonotonicityWitness` or None when the budget runs out.
    """
    if m < 3:
        raise ValueError("instance-wise counterexamples need m >= 3")
    rule = resolve_rule(rule)
    rng = np.random.default_rng(seed)
    for k in range(1, budget + 1):
        Ui, gi, gpi = _sample(rng, n, m)
        if not np.any(Ui.sum(axis=0) > 0):
            continue
        Um = UtilityMatrix(Ui / GRID)
        try:
            d0 = float(instance_distortion(rule, gi / GRID, Um, ENUMERATE).value)
            d1 = float(instance_distortion(rule, gpi / GRID, Um, ENUMERATE).value)
        except UndefinedDistortion:
            continue
        if d1 > d0 * (1 + 1e-9):
            Ue, ge, gpe = UtilityMatrix(_grid_exact(Ui)), _grid_exact(gi), _grid_exact(gpi)
            if verify_witness(rule, Ue, ge, gpe):
                return MonotonicityWitness(Ue, ge, gpe, _exact_distortion(rule, ge, Ue), _exact_distortion(rule, gpe, Ue), k)
    return None


# ---------------------------------------------------------------------------
# demotion


@dataclass
class DemotionReport:
    voter: int
    checked_pairs: int
    violations: list = field(default_factory=list)

    @property
    def holds(self) -> bool:
        return not self.violations


def _voter_order(values, tol):
    pos = {}
    for r, a in enumerate(a for blk in tie_blocks(values, tol) for a in blk):
        pos[a] = r
    return pos


def demotion_property_check(U, gamma, voter: int, new_gamma_i, tol: float = DEFAULT_TIE_TOL) -> DemotionReport:
    """Lowering one voter's public spirit never lifts a higher-welfare alternative.

    Ties are resolved by alternative index before and after.  Pairs with
    equal welfare that are also tied before the change have no welfare
    order to protect and are skipped.
    """
    U = UtilityMatrix.coerce(U)
    n = U.n
    vals = U.expand()
    g = as_ps_vector(gamma, n)
    if not new_gamma_i < g[voter]:
        raise ValueError("the new level must be strictly lower")
    g2 = g.copy()
    if is_exact(g2):
        g2[voter] = to_fraction(new_gamma_i)
    else:
        g2[voter] = float(new_gamma_i)
    Ufull = UtilityMatrix(vals)
    v_old = ps_values(g, Ufull).values[voter]
    v_new = ps_values(g2, Ufull).values[voter]
    old, new = _voter_order(v_old, tol), _voter_order(v_new, tol)
    w = Ufull.welfare
    rep = DemotionReport(voter, 0)
    for hi in range(U.m):
        for lo in range(U.m):
            if hi == lo or not w[lo] >= w[hi] or old[hi] > old[lo]:
                continue
            if w[lo] == w[hi] and v_old[lo] == v_old[hi]:
                continue
            rep.checked_pairs += 1
            if new[lo] < new[hi]:
                rep.violations.append((hi, lo))
    return rep
