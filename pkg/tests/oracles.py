"""Naive reference implementations used as test oracles.

Everything here works voter by voter on plain lists of Fractions and
shares no code with the package.
"""

import itertools
from fractions import Fraction


def frac_matrix(rows):
    return [[Fraction(v) for v in r] for r in rows]


def welfare(U):
    m = len(U[0])
    return [sum((U[i][a] for i in range(len(U))), Fraction(0)) for a in range(m)]


def ps_values(gamma, U):
    n, m = len(U), len(U[0])
    w = welfare(U)
    if not isinstance(gamma, (list, tuple)):
        gamma = [gamma] * n
    return [[(1 - gamma[i]) * U[i][a] + gamma[i] * w[a] / n for a in range(m)] for i in range(n)]


def ranking_consistent(r, v):
    pos = {a: j for j, a in enumerate(r)}
    return all(not (v[a] > v[b] and pos[a] > pos[b]) for a in range(len(v)) for b in range(len(v)))


def consistent_rankings(v):
    return [p for p in itertools.permutations(range(len(v))) if ranking_consistent(p, v)]


def consistent_profiles(V):
    return list(itertools.product(*(consistent_rankings(v) for v in V)))


def tally(rows):
    m = len(rows[0])
    t = [[0] * m for _ in range(m)]
    for r in rows:
        for i, a in enumerate(r):
            for b in r[i + 1:]:
                t[a][b] += 1
    return t


def beats(rows):
    t, n = tally(rows), len(rows)
    m = len(rows[0])
    return [[a != b and 2 * t[a][b] > n for b in range(m)] for a in range(m)]


def positional_scores(rows, s):
    m = len(rows[0])
    pts = [Fraction(0)] * m
    for r in rows:
        for j, a in enumerate(r):
            pts[a] += Fraction(s[j])
    return pts


def lowest_argmax(vals):
    best = max(vals)
    return min(a for a, v in enumerate(vals) if v == best)


def lowest_argmin(vals):
    best = min(vals)
    return min(a for a, v in enumerate(vals) if v == best)


def plurality(rows):
    return lowest_argmax(positional_scores(rows, [1] + [0] * (len(rows[0]) - 1)))


def borda(rows):
    m = len(rows[0])
    return lowest_argmax(positional_scores(rows, [m - 1 - j for j in range(m)]))


def veto(rows):
    m = len(rows[0])
    return lowest_argmax(positional_scores(rows, [1] * (m - 1) + [0]))


def copeland(rows):
    d = beats(rows)
    return lowest_argmax([sum(row) for row in d])


def maximin(rows):
    t = tally(rows)
    m = len(rows[0])
    return lowest_argmin([max(t[b][a] for b in range(m) if b != a) for a in range(m)])


def slater(rows):
    d = beats(rows)
    m = len(rows[0])
    best, tops = None, set()
    for p in itertools.permutations(range(m)):
        cost = sum(1 for i in range(m) for j in range(i + 1, m) if d[p[j]][p[i]])
        if best is None or cost < best:
            best, tops = cost, {p[0]}
        elif cost == best:
            tops.add(p[0])
    return min(tops)


def uncovered(rows):
    d = beats(rows)
    m = len(rows[0])
    out = []
    for a in range(m):
        covered = any(
            d[b][a] and all(d[b][c] for c in range(m) if d[a][c])
            for b in range(m) if b != a
        )
        if not covered:
            out.append(a)
    return out


def condorcet(rows):
    d = beats(rows)
    m = len(rows[0])
    for a in range(m):
        if all(d[a][b] for b in range(m) if b != a):
            return a
    return None


RULES = {
    "plurality": plurality,
    "borda": borda,
    "veto": veto,
    "copeland": copeland,
    "maximin": maximin,
    "slater": slater,
}


def distortion(rule_fn, gamma, U):
    """Supremum over every consistent profile, by brute force."""
    V = ps_values(gamma, U)
    w = welfare(U)
    opt = max(w)
    best = Fraction(0)
    for prof in consistent_profiles(V):
        x = w[rule_fn(list(prof))]
        if x == 0:
            return float("inf")
        best = max(best, opt / x)
    return best
