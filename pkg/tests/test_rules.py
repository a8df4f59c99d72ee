import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from conftest import rankings
from psdistortion.core import Profile, condorcet_winner
from psdistortion.exceptions import UnsupportedSize
from psdistortion.rules import (
    ALL_RULES,
    BORDA,
    COPELAND,
    MAXIMIN,
    PLURALITY,
    SLATER,
    VETO,
    constant_rule,
    copeland,
    copeland_scores,
    dictatorship,
    make_score_vector,
    maximin,
    maximin_scores,
    piecewise_k,
    positional_rule,
    positional_winner,
    ranking_disagreements,
    resolve_rule,
    score_gap,
    slater,
    uncovered_set,
    validate_score_vector,
)

F = Fraction
CYCLE3 = Profile.from_rankings([[0, 1, 2], [1, 2, 0], [2, 0, 1]])


def test_score_vectors():
    assert make_score_vector("borda", 3) == (1, F(1, 2), 0)
    assert make_score_vector("veto", 4) == (1, 1, 1, 0)
    assert make_score_vector("plurality", 3) == (1, 0, 0)
    assert piecewise_k(8) == 4
    assert make_score_vector("piecewise", 8) == (1, F(3, 4), F(1, 2), F(1, 4), 0, 0, 0, 0)


@pytest.mark.parametrize("m", range(2, 80))
def test_piecewise_k_is_ceiling(m):
    k = piecewise_k(m)
    assert k**3 >= m**2 and (k - 1) ** 3 < m**2


def test_validate_score_vector():
    assert score_gap(validate_score_vector(["1", "1/3", "0"])) == F(2, 3)
    for bad in ([1, 2, 0], [0.5, 0], [1, 0.5], [1]):
        with pytest.raises(ValueError):
            validate_score_vector(bad)


def test_plurality_small_example():
    p = Profile.from_rankings([[0, 1, 2], [0, 1, 2], [1, 2, 0]])
    w, pts = positional_winner(p, make_score_vector("plurality", 3))
    assert w == 0 and pts[0] == 2


def test_unanimous_profile_elects_top():
    p = Profile.from_rankings([[2, 0, 1, 3]] * 5)
    for rule in ALL_RULES:
        if rule is VETO:
            continue
        assert rule.winner(p) == 2


def test_cycle_scores():
    assert copeland_scores(CYCLE3) == [1, 1, 1]
    assert maximin_scores(CYCLE3) == [2, 2, 2]
    assert sorted(uncovered_set(CYCLE3)) == [0, 1, 2]
    _, _, d = slater(CYCLE3)
    assert d == 1


def test_condorcet_winner_examples():
    p = Profile.from_rankings([[1, 0, 2], [1, 2, 0], [0, 1, 2]])
    assert copeland(p) == (1, [1, 2, 0])
    assert uncovered_set(p) == [1]
    w, ranking, d = slater(p)
    assert (w, ranking, d) == (1, (1, 0, 2), 0)
    assert maximin(p)[0] == 1


def test_tiebreak_orders():
    assert COPELAND.winner(CYCLE3) == 0
    assert COPELAND.with_tiebreak([2, 1, 0]).winner(CYCLE3) == 2
    assert copeland(CYCLE3, tiebreak=[1, 0, 2])[0] == 1


def test_slater_size_cap():
    p = Profile.from_rankings([list(range(9))])
    with pytest.raises(UnsupportedSize):
        slater(p)


def test_resolve_rule_forms():
    assert resolve_rule("Borda") is BORDA
    assert resolve_rule("[1, 0.5, 0]").score_vector(3) == (1, F(1, 2), 0)
    d = resolve_rule("dictator1")
    assert d.winner(Profile.from_rankings([[0, 1], [1, 0]])) == 1
    assert constant_rule(1).winner(CYCLE3) == 1
    assert dictatorship(2).winner(CYCLE3) == 2
    custom = resolve_rule(lambda p: p.m - 1)
    assert custom.winner(CYCLE3) == 2
    with pytest.raises(ValueError):
        resolve_rule("nonsense")


@given(rankings(n_max=7, m_max=5), st.sampled_from(sorted(oracles.RULES)))
def test_rules_match_naive_oracles(rows, name):
    assert resolve_rule(name).winner(Profile.from_rankings(rows)) == oracles.RULES[name](rows)


@given(rankings(n_max=7, m_max=5))
def test_uncovered_set_matches_definition(rows):
    assert uncovered_set(Profile.from_rankings(rows)) == oracles.uncovered(rows)


@given(rankings(n_max=7, m_max=5))
def test_copeland_and_slater_winners_are_uncovered(rows):
    p = Profile.from_rankings(rows)
    unc = set(uncovered_set(p))
    assert set(COPELAND.cowinners(p)) <= unc
    assert set(SLATER.cowinners(p)) <= unc


@given(rankings(n_max=7, m_max=5))
def test_condorcet_consistent_rules(rows):
    p = Profile.from_rankings(rows)
    c = condorcet_winner(p)
    if c is not None:
        for rule in (COPELAND, SLATER, MAXIMIN):
            assert rule.winner(p) == c


@given(rankings(n_max=7, m_max=5))
def test_borda_is_best_average_rank(rows):
    p = Profile.from_rankings(rows)
    m = p.m
    avg = [sum(r.index(a) for r in rows) for a in range(m)]
    assert BORDA.winner(p) == oracles.lowest_argmin(avg)


@given(rankings(n_max=7, m_max=5))
def test_slater_ranking_is_optimal(rows):
    p = Profile.from_rankings(rows)
    _, ranking, d = slater(p)
    assert ranking_disagreements(p, ranking) == d
    assert d == min(ranking_disagreements(p, q) for q in itertools.permutations(range(p.m)))


@given(rankings(n_max=6, m_max=4, m_min=3))
def test_winner_beaten_by_few_for_kappa_rules(rows):
    # the PLURALITY, BORDA and MAXIMIN winner is ranked above any other by at least n/m voters
    p = Profile.from_rankings(rows)
    n, m = p.n, p.m
    for rule in (PLURALITY, BORDA, MAXIMIN):
        f = rule.winner(p)
        assert all(m * p.tally[f, a] >= n for a in range(m) if a != f)


@given(rankings(n_max=6, m_max=5))
def test_positional_rule_matches_named(rows):
    p = Profile.from_rankings(rows)
    m = p.m
    for kind in ("plurality", "borda", "veto"):
        assert positional_rule(make_score_vector(kind, m)).winner(p) == resolve_rule(kind).winner(p)


def test_float_score_vector_points():
    p = Profile.from_rankings([[0, 1, 2], [1, 0, 2]])
    w, pts = positional_winner(p, [1, 1 / 3, 0])
    assert w == 0
    assert np.isclose(float(pts[0]), 4 / 3)
