"""Distortion of voting rules when voters are partly public-spirited."""

__version__ = "0.1.0"

from .core import (
    ADVERSARIAL,
    ENUMERATE,
    LEXICOGRAPHIC,
    Profile,
    PSValueMatrix,
    TiePolicy,
    UtilityMatrix,
    condorcet_winner,
    pairwise_tally,
    profiles_consistent_with,
    ps_values,
    social_welfare,
)
from .rules import ALL_RULES, BORDA, COPELAND, MAXIMIN, PIECEWISE, PLURALITY, SLATER, VETO, Rule, resolve_rule
from .distortion import (
    check_key_lemma,
    instance_distortion,
    kappa_bruteforce,
    theoretical_bounds,
    verify_uncovered_upper,
    worst_case_search,
)
from .constructions import FAMILIES, verify_construction
from .monotonicity import compose_ps, instancewise_counterexample_search, nonuniform_m2_transform, uniform_reduction
from .axioms import AxiomReport, check_all
from .robustness import (
    ErrorMatrices,
    PSMatrix,
    check_robust_lemma,
    effective_ps_values,
    robust_distortion,
    zeroed_gamma_experiment,
)
from .io import emit_report, load_instance, save_instance
