"""Utility matrices, PS-values and the preference profiles they induce.

Voters are stored run-length encoded: a matrix with ``k`` distinct rows and a
``counts`` vector of multiplicities stands for ``n = counts.sum()`` voters,
expanded in row order.  Plain ``n x m`` arrays are the special case
``counts = 1``.  The lower-bound constructions need this because an
``epsilon = 1e-6`` instance has a million voters but only three utility rows.

Every numeric routine accepts either float arrays or object arrays of
:class:`fractions.Fraction`.  In exact mode ties are detected by equality,
in float mode by a relative tolerance (``1e-12`` by default).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterator, Sequence

import numpy as np

from .exceptions import DimensionError, EnumerationOverflow, InconsistentProfile, RangeError

DEFAULT_TIE_TOL = 1e-12
DEFAULT_ENUMERATION_CAP = 100_000


# ---------------------------------------------------------------------------
# exact arithmetic helpers


def to_fraction(x) -> Fraction:
    """Convert ints, floats (exactly), Fractions and ``"p/q"`` strings."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, np.integer)):
        return Fraction(int(x))
    if isinstance(x, str):
        return Fraction(x.strip())
    if isinstance(x, (float, np.floating)):
        if not math.isfinite(x):
            raise RangeError(f"non-finite value {x!r} has no exact representation")
        return Fraction(float(x))
    return Fraction(x)


def exact_array(a) -> np.ndarray:
    """Object array of Fractions with the same shape as ``a``."""
    arr = np.asarray(a, dtype=object)
    out = np.empty(arr.shape, dtype=object)
    for idx, v in np.ndenumerate(arr):
        out[idx] = to_fraction(v)
    return out


def is_exact(a) -> bool:
    return isinstance(a, np.ndarray) and a.dtype == object


def _numeric_array(a) -> np.ndarray:
    arr = np.asarray(a)
    if arr.dtype == object or arr.dtype.kind in "US":
        return exact_array(arr)
    return arr.astype(float)


def _has_fraction(seq) -> bool:
    if isinstance(seq, np.ndarray):
        return seq.dtype == object or seq.dtype.kind in "US"
    return any(isinstance(v, (Fraction, str)) for v in seq)


def _unify(u, g):
    """Common arithmetic for utilities ``u`` and levels ``g``.

    Float utilities decide float mode: lifting them to Fractions would turn
    rounding noise into strict preferences.
    """
    if not is_exact(u):
        return u, np.asarray(g, dtype=float)
    return u, g if is_exact(g) else exact_array(g)


def _values_close(a, b, tol) -> bool:
    if isinstance(a, Fraction) or isinstance(b, Fraction):
        return a == b
    return abs(a - b) <= tol * max(1.0, abs(a), abs(b))


def _counts_array(counts, k) -> np.ndarray:
    if counts is None:
        return np.ones(k, dtype=np.int64)
    c = np.asarray(counts, dtype=np.int64).reshape(-1)
    if c.shape[0] != k:
        raise DimensionError(f"counts has length {c.shape[0]}, expected {k}")
    if np.any(c < 1):
        raise RangeError("voter multiplicities must be positive")
    return c


def aligned_segments(counts_a: np.ndarray, counts_b: np.ndarray) -> Iterator[tuple[int, int, int]]:
    """Walk two run-length encodings of the same voter sequence together.

    Yields ``(row_in_a, row_in_b, run_length)`` for every maximal run of
    voters that sits in a single row of both encodings.
    """
    if int(np.sum(counts_a)) != int(np.sum(counts_b)):
        raise DimensionError("run-length encodings cover different numbers of voters")
    i = j = 0
    left_a, left_b = int(counts_a[0]), int(counts_b[0])
    while True:
        step = min(left_a, left_b)
        yield i, j, step
        left_a -= step
        left_b -= step
        if left_a == 0:
            i += 1
            if i == len(counts_a):
                return
            left_a = int(counts_a[i])
        if left_b == 0:
            j += 1
            left_b = int(counts_b[j])


# ---------------------------------------------------------------------------
# utilities and public spirit


class UtilityMatrix:
    """Nonnegative ``n x m`` utilities, stored as distinct rows with multiplicities.

    Parameters
    ----------
    values : array_like, shape (k, m)
        Utility rows.  Object arrays (or string entries such as ``"1/3"``)
        select exact rational arithmetic.
    counts : array_like of int, shape (k,), optional
        Number of voters sharing each row.  Defaults to one voter per row.
    """

    def __init__(self, values, counts=None):
        vals = _numeric_array(values)
        if vals.ndim != 2:
            raise DimensionError(f"utilities must be two-dimensional, got shape {vals.shape}")
        k, m = vals.shape
        if k < 1:
            raise DimensionError("need at least one voter")
        if m < 2:
            raise DimensionError("need at least two alternatives")
        if is_exact(vals):
            if any(v < 0 for v in vals.flat):
                raise RangeError("utilities must be nonnegative")
        elif not np.all(np.isfinite(vals)) or np.any(vals < 0):
            raise RangeError("utilities must be finite and nonnegative")
        vals.setflags(write=False)
        self.values = vals
        self.counts = _counts_array(counts, k)
        self.counts.setflags(write=False)

    @classmethod
    def coerce(cls, U) -> "UtilityMatrix":
        return U if isinstance(U, cls) else cls(U)

    @property
    def n(self) -> int:
        return int(self.counts.sum())

    @property
    def m(self) -> int:
        return self.values.shape[1]

    @property
    def k(self) -> int:
        return self.values.shape[0]

    @property
    def exact(self) -> bool:
        return is_exact(self.values)

    @cached_property
    def welfare(self) -> np.ndarray:
        """Column sums ``sw(a, U)`` over all ``n`` voters."""
        if self.exact:
            w = np.array(
                [sum((int(c) * v for c, v in zip(self.counts, col)), Fraction(0)) for col in self.values.T],
                dtype=object,
            )
        else:
            w = self.counts.astype(float) @ self.values
        w.setflags(write=False)
        return w

    def to_exact(self) -> "UtilityMatrix":
        return self if self.exact else UtilityMatrix(exact_array(self.values), self.counts)

    def to_float(self) -> "UtilityMatrix":
        return UtilityMatrix(self.values.astype(float), self.counts) if self.exact else self

    def expand(self) -> np.ndarray:
        """Per-voter ``n x m`` array."""
        return np.repeat(self.values, self.counts, axis=0)

    def scaled(self, factor) -> "UtilityMatrix":
        return UtilityMatrix(self.values * factor, self.counts)

    def __array__(self, dtype=None, copy=None):
        return self.expand() if dtype is None else self.expand().astype(dtype)

    def __repr__(self):
        return f"UtilityMatrix(n={self.n}, m={self.m}, rows={self.k}, exact={self.exact})"


def as_ps_vector(gamma, k: int) -> np.ndarray:
    """Validate a PS-vector (or a scalar meaning a uniform one) of length ``k``."""
    if isinstance(gamma, str) or np.ndim(gamma) == 0:
        gamma = [gamma.item() if isinstance(gamma, np.ndarray) else gamma] * k
    g = _numeric_array(np.asarray(gamma, dtype=object) if _has_fraction(gamma) else gamma).reshape(-1)
    if g.shape[0] != k:
        raise DimensionError(f"PS-vector has length {g.shape[0]}, expected {k}")
    if any(not (0 <= v <= 1) for v in g.flat):
        raise RangeError("public-spirit levels must lie in [0, 1]")
    return g


def grouped_gamma(gamma, U: "UtilityMatrix") -> np.ndarray:
    """PS-vector aligned with the rows of ``U``.

    Accepts a scalar, one entry per row, or one entry per voter; in the last
    case the entries must agree within each group of identical voters.
    """
    if np.ndim(gamma) == 1 and len(gamma) == U.n and U.n != U.k:
        g = as_ps_vector(gamma, U.n)
        starts = np.concatenate([[0], np.cumsum(U.counts)[:-1]])
        for s, c in zip(starts, U.counts):
            if any(g[s + j] != g[s] for j in range(1, int(c))):
                raise DimensionError("per-voter PS-vector varies inside a group of identical voters")
        return g[starts]
    return as_ps_vector(gamma, U.k)


def gamma_min(gamma):
    return min(np.asarray(gamma).flat)


@dataclass(frozen=True, eq=False)
class PSValueMatrix:
    """PS-values of every voter row, together with the welfare they were built from."""

    values: np.ndarray
    counts: np.ndarray
    welfare: np.ndarray

    @property
    def n(self) -> int:
        return int(self.counts.sum())

    @property
    def m(self) -> int:
        return self.values.shape[1]

    @property
    def exact(self) -> bool:
        return is_exact(self.values)

    def __array__(self, dtype=None, copy=None):
        v = np.repeat(self.values, self.counts, axis=0)
        return v if dtype is None else v.astype(dtype)


def social_welfare(U, a: int | None = None):
    """``sw(a, U)``; with ``a=None`` the whole welfare vector."""
    U = UtilityMatrix.coerce(U)
    if a is None:
        return U.welfare
    if not 0 <= a < U.m:
        raise IndexError(f"alternative {a} out of range for m={U.m}")
    return U.welfare[a]


def ps_values(gamma, U) -> PSValueMatrix:
    """``v_i(a) = (1 - gamma_i) u_i(a) + gamma_i sw(a, U) / n`` for every voter row."""
    U = UtilityMatrix.coerce(U)
    g = grouped_gamma(gamma, U)
    u, g = _unify(U.values, g)
    avg = U.welfare / U.n
    one = Fraction(1) if is_exact(u) else 1.0
    vals = (one - g)[:, None] * u + g[:, None] * avg[None, :]
    return PSValueMatrix(vals, U.counts, U.welfare)


# ---------------------------------------------------------------------------
# profiles


class Profile:
    """Strict rankings of ``n`` voters, run-length encoded.

    ``rankings[r]`` lists alternatives from most to least preferred and is
    held by ``counts[r]`` consecutive voters.
    """

    def __init__(self, rankings, counts=None):
        r = np.asarray(rankings, dtype=np.int64)
        if r.ndim != 2 or r.shape[0] == 0:
            raise DimensionError("rankings must be a non-empty 2-D array")
        m = r.shape[1]
        if not np.array_equal(np.sort(r, axis=1), np.broadcast_to(np.arange(m), r.shape)):
            raise ValueError("every ranking must be a permutation of 0..m-1")
        c = _counts_array(counts, r.shape[0])
        # merge adjacent equal runs so equal voter sequences compare equal
        keep = np.ones(r.shape[0], dtype=bool)
        keep[1:] = np.any(r[1:] != r[:-1], axis=1)
        if not keep.all():
            starts = np.flatnonzero(keep)
            c = np.add.reduceat(c, starts)
            r = r[starts]
        r.setflags(write=False)
        c.setflags(write=False)
        self.rankings = r
        self.counts = c

    @classmethod
    def from_rankings(cls, rankings: Sequence[Sequence[int]]) -> "Profile":
        return cls(np.asarray(rankings, dtype=np.int64))

    @property
    def n(self) -> int:
        return int(self.counts.sum())

    @property
    def m(self) -> int:
        return self.rankings.shape[1]

    @cached_property
    def positions(self) -> np.ndarray:
        """``positions[r, a]`` is the 0-based rank of alternative ``a`` in row ``r``."""
        pos = np.empty_like(self.rankings)
        rows = np.arange(self.rankings.shape[0])[:, None]
        pos[rows, self.rankings] = np.arange(self.m)[None, :]
        pos.setflags(write=False)
        return pos

    @cached_property
    def tally(self) -> np.ndarray:
        """``tally[a, b] = |{i : a ranked ahead of b}|``."""
        pos = self.positions
        ahead = pos[:, :, None] < pos[:, None, :]
        t = np.tensordot(self.counts, ahead.astype(np.int64), axes=1)
        t.setflags(write=False)
        return t

    def ranking_of(self, voter: int) -> tuple[int, ...]:
        row = int(np.searchsorted(np.cumsum(self.counts), voter, side="right"))
        return tuple(int(a) for a in self.rankings[row])

    def voters(self) -> Iterator[tuple[int, ...]]:
        for row, c in zip(self.rankings, self.counts):
            t = tuple(int(a) for a in row)
            for _ in range(int(c)):
                yield t

    def to_list(self) -> list[list[int]]:
        return [list(r) for r in self.voters()]

    def _key(self):
        return (self.rankings.tobytes(), self.rankings.shape, self.counts.tobytes())

    def __eq__(self, other):
        return isinstance(other, Profile) and self._key() == other._key()

    def __hash__(self):
        return hash(self._key())

    def __repr__(self):
        if self.n <= 6:
            return f"Profile({self.to_list()})"
        return f"Profile(n={self.n}, m={self.m}, distinct={len(self.counts)})"


def pairwise_tally(profile: Profile) -> np.ndarray:
    return profile.tally


def condorcet_winner(profile: Profile) -> int | None:
    t = profile.tally
    n = profile.n
    for a in range(profile.m):
        if all(2 * t[a, b] > n for b in range(profile.m) if b != a):
            return a
    return None


# ---------------------------------------------------------------------------
# from PS-values to profiles


_POLICY_ALIASES = {
    "enumerate": "enumerate",
    "enumerate-all": "enumerate",
    "lex": "lexicographic",
    "lexicographic": "lexicographic",
    "adversarial": "adversarial",
    "welfare-adversarial-heuristic": "adversarial",
}


@dataclass(frozen=True)
class TiePolicy:
    """How rankings are completed when a voter's PS-values tie.

    ``enumerate`` yields every completion (up to ``cap`` profiles),
    ``lexicographic`` orders tied alternatives by index and ``adversarial``
    puts lower-welfare alternatives first; the latter is a heuristic for the
    worst case, not a proof of it.
    """

    variant: str = "enumerate"
    cap: int = DEFAULT_ENUMERATION_CAP
    tol: float = DEFAULT_TIE_TOL

    def __post_init__(self):
        if self.variant not in _POLICY_ALIASES:
            raise ValueError(f"unknown tie policy {self.variant!r}")
        object.__setattr__(self, "variant", _POLICY_ALIASES[self.variant])
        if self.cap < 1:
            raise ValueError("enumeration cap must be at least 1")


LEXICOGRAPHIC = TiePolicy("lexicographic")
ADVERSARIAL = TiePolicy("adversarial")
ENUMERATE = TiePolicy("enumerate")


def tie_blocks(row, tol: float = DEFAULT_TIE_TOL) -> list[list[int]]:
    """Alternatives grouped into blocks of equal value, best block first.

    Within a block alternatives are in index order.
    """
    vals = list(row)
    order = sorted(range(len(vals)), key=lambda a: (-vals[a], a))
    blocks: list[list[int]] = []
    for a in order:
        if blocks and _values_close(vals[blocks[-1][-1]], vals[a], tol):
            blocks[-1].append(a)
        else:
            blocks.append([a])
    return [sorted(b) for b in blocks]


def _completions(blocks) -> list[tuple[int, ...]]:
    per_block = [list(itertools.permutations(b)) for b in blocks]
    return [tuple(itertools.chain.from_iterable(p)) for p in itertools.product(*per_block)]


def count_consistent_profiles(V: PSValueMatrix, tol: float = DEFAULT_TIE_TOL, cap: int | None = None) -> int:
    """Number of consistent profiles; stops early and returns ``cap + 1`` once it exceeds ``cap``."""
    total = 1
    for row, c in zip(V.values, V.counts):
        per_voter = math.prod(math.factorial(len(b)) for b in tie_blocks(row, tol))
        if per_voter == 1:
            continue
        if cap is not None and int(c) * math.log2(per_voter) > math.log2(cap) + 1:
            return cap + 1
        total *= per_voter ** int(c)
        if cap is not None and total > cap:
            return cap + 1
    return total


def profiles_consistent_with(V: PSValueMatrix, policy: TiePolicy = LEXICOGRAPHIC) -> Iterator[Profile]:
    """Profiles whose rankings respect every strict PS-value comparison.

    Raises :class:`EnumerationOverflow` immediately (not lazily) when the
    ``enumerate`` policy would produce more than ``policy.cap`` profiles.
    """
    blocks = [tie_blocks(row, policy.tol) for row in V.values]
    if policy.variant == "enumerate":
        total = count_consistent_profiles(V, policy.tol, policy.cap)
        if total > policy.cap:
            raise EnumerationOverflow(total, policy.cap)
        return _enumerate_profiles(blocks, V.counts)
    if policy.variant == "lexicographic":
        rows = [list(itertools.chain.from_iterable(b)) for b in blocks]
        return iter([Profile(rows, V.counts)])
    w = V.welfare
    rows = [
        list(itertools.chain.from_iterable(sorted(blk, key=lambda a: (w[a], a)) for blk in b))
        for b in blocks
    ]
    out = [Profile(rows, V.counts)]
    spread = Profile(*_spread_rows(blocks, V.counts, w, policy.tol))
    if spread != out[0]:
        out.append(spread)
    return iter(out)


def _welfare_runs(blk, w, tol):
    """Split a tie block into runs of equal welfare, lowest welfare first."""
    runs: list[list[int]] = []
    for a in sorted(blk, key=lambda a: (w[a], a)):
        if runs and _values_close(w[runs[-1][0]], w[a], tol):
            runs[-1].append(a)
        else:
            runs.append([a])
    return runs


def _spread_rows(blocks, counts, w, tol):
    """Welfare-ascending completion that rotates equal-welfare runs across voters.

    Voter ``v`` (counted over the whole electorate) uses rotation ``v mod s``
    of each run of size ``s``, so tied alternatives share top positions
    evenly instead of all voters breaking ties the same way.
    """
    rankings, out_counts = [], []
    v0 = 0
    for b, c in zip(blocks, counts):
        c = int(c)
        runs = [r for blk in b for r in _welfare_runs(blk, w, tol)]
        period = math.lcm(*(len(r) for r in runs))
        for j in range(min(period, c)):
            # voters v in [v0, v0 + c) with v = v0 + j (mod period)
            k = (c - j + period - 1) // period
            rot = (v0 + j) % period
            rankings.append([a for r in runs for a in r[rot % len(r):] + r[:rot % len(r)]])
            out_counts.append(k)
        v0 += c
    return rankings, out_counts


def _enumerate_profiles(blocks, counts) -> Iterator[Profile]:
    per_voter = []
    for b, c in zip(blocks, counts):
        per_voter.extend([_completions(b)] * int(c))
    for choice in itertools.product(*per_voter):
        yield Profile.from_rankings(choice)


def is_consistent(profile: Profile, V: PSValueMatrix, tol: float = DEFAULT_TIE_TOL) -> bool:
    return first_inconsistency(profile, V, tol) is None


def first_inconsistency(profile: Profile, V: PSValueMatrix, tol: float = DEFAULT_TIE_TOL):
    """``(voter, a, b)`` where ``b`` is ranked above ``a`` despite ``v(a) > v(b)``, else None."""
    if profile.m != V.m:
        raise DimensionError("profile and PS-values disagree on m")
    voter = 0
    for vrow, prow, run in aligned_segments(V.counts, profile.counts):
        vals = V.values[vrow]
        ranking = profile.rankings[prow]
        for j in range(profile.m - 1):
            hi, lo = ranking[j], ranking[j + 1]
            if vals[lo] > vals[hi] and not _values_close(vals[lo], vals[hi], tol):
                # adjacent check suffices: a strict inversion anywhere implies one between neighbours
                return voter, int(lo), int(hi)
        voter += run
    return None


def require_consistent(profile: Profile, V: PSValueMatrix, tol: float = DEFAULT_TIE_TOL) -> None:
    bad = first_inconsistency(profile, V, tol)
    if bad is not None:
        voter, a, b = bad
        raise InconsistentProfile(f"voter {voter} ranks {b} above {a} although v({a}) > v({b})")
