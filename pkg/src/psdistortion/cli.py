"""``distort`` command-line interface.

Exit codes: 0 success, 1 verification mismatch, 2 input error, 3 budget
exceeded.  Reports go to stdout unless ``--out`` is given and depend only
on the arguments (seed included), so reruns are byte-identical.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import axioms as ax
from . import constructions as cons
from . import monotonicity as mono
from . import robustness as rob
from .core import TiePolicy, UtilityMatrix, gamma_min, grouped_gamma
from .distortion import (
    instance_distortion,
    kappa_bruteforce,
    known_kappa,
    leq,
    theoretical_bounds,
    worst_case_search,
)
from .exceptions import (
    BudgetExceeded,
    ConstructionError,
    EnumerationOverflow,
    PSDistortionError,
    VerificationError,
)
from .io import RunConfig, emit_report, error_code, load_instance, parse_number, save_construction
from .rules import RULE_NAMES, resolve_rule

EXIT_OK, EXIT_MISMATCH, EXIT_INPUT, EXIT_BUDGET = 0, 1, 2, 3

TABLE1_RULES = ("plurality", "borda", "veto", "piecewise", "copeland", "slater", "maximin")
TABLE1_GAMMAS = ("1/10", "1/4", "1/2", "3/4", "9/10")


def _num(args, text):
    return parse_number(text, args.arith)


def _report(args, rows, config: RunConfig):
    path = args.report if args.command == "construct" else args.out
    emit_report(rows, args.format, path, config.to_dict(), config.seed)


def _common(p, out=True):
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--arith", choices=("rational", "float"), default="rational",
                   help="arithmetic for numbers given on the command line")
    if out:
        p.add_argument("--out", default=None, help="report path (default stdout)")


def _gmin_of(gamma, U):
    if isinstance(gamma, rob.PSMatrix):
        return gamma.gamma_min
    return gamma_min(grouped_gamma(gamma, U))


# ---------------------------------------------------------------------------
# commands


def cmd_eval(args) -> int:
    inst = load_instance(args.instance)
    rule = resolve_rule(args.rule)
    policy = TiePolicy(args.tie, cap=args.cap)
    U, gamma, errors = inst
    if inst.is_robust:
        res = rob.robust_instance_distortion(rule, gamma, U, errors, policy)
        ds = errors.delta_star if errors is not None else 1
        es = errors.eta_star if errors is not None else 1
        gmin = _gmin_of(gamma, U)
        upper, lower = rob.robust_upper_bound(rule, gmin, U.m, ds, es), None
    else:
        cands = [inst.profile] if inst.profile is not None else []
        res = instance_distortion(rule, gamma, U, policy, candidates=cands)
        gmin = _gmin_of(gamma, U)
        b = theoretical_bounds(rule, gmin, U.m)
        upper, lower = b.upper, b.lower
    row = {
        "instance": args.instance, "rule": rule.name, "gamma_min": gmin, "observed": res.value,
        "theory_upper": upper, "theory_lower": lower, "exact_flag": res.exact, "winner": res.winner,
        "profiles_checked": res.profiles_checked,
    }
    cfg = RunConfig("eval", rule.name, args.instance, tie=args.tie, arithmetic=args.arith)
    _report(args, [row], cfg)
    if upper is not None and gmin > 0 and not leq(res.value, upper):
        print(f"mismatch: distortion {res.value} exceeds the upper bound {upper}", file=sys.stderr)
        return EXIT_MISMATCH
    return EXIT_OK


def cmd_kappa(args) -> int:
    rule = resolve_rule(args.rule)
    kappa, witness = kappa_bruteforce(rule, args.n, args.m, args.budget, return_witness=True)
    known = known_kappa(rule, args.m)
    row = {
        "instance": f"all profiles n={args.n} m={args.m}", "rule": rule.name, "observed": kappa,
        "theory_upper": known, "theory_lower": known, "exact_flag": True,
        "witness": witness.to_list() if witness is not None else None,
    }
    _report(args, [row], RunConfig("kappa", rule.name, params={"n": args.n, "m": args.m}, budget=args.budget))
    return EXIT_OK


def cmd_search(args) -> int:
    rule = resolve_rule(args.rule)
    gamma = float(_num(args, args.gamma))
    seeds = []
    if args.seed_family:
        spec = _build_family(args, args.seed_family, args.seed_gamma or args.gamma)
        seeds.append(cons.utilities_at_n(spec, args.n).to_float())
    res = worst_case_search(rule, gamma, args.n, args.m, args.budget, seed=args.seed, restarts=args.restarts,
                            seeds=seeds, policy=TiePolicy(args.tie))
    b = theoretical_bounds(rule, Fraction(gamma), args.m)
    row = {
        "instance": f"search n={args.n} m={args.m}", "rule": rule.name, "gamma_min": gamma,
        "observed": res.value, "theory_upper": b.upper, "theory_lower": b.lower, "exact_flag": False,
    }
    params = {"n": args.n, "m": args.m, "gamma": args.gamma, "restarts": args.restarts,
              "seed_family": args.seed_family}
    _report(args, [row], RunConfig("search", rule.name, params=params, tie=args.tie, budget=args.budget,
                                   seed=args.seed, arithmetic=args.arith))
    if b.upper is not None and not leq(res.value, b.upper):
        return EXIT_MISMATCH
    return EXIT_OK


def _build_family(args, family, gamma_text):
    gamma = parse_number(gamma_text, "rational")
    eps = parse_number(args.eps, "rational") if args.eps is not None else None
    m = args.m
    kw = {} if eps is None else {"epsilon": eps}
    if family in ("copeland_lb", "slater_lb", "plurality_lb"):
        return cons.FAMILIES[family](gamma, m, **kw)
    if family == "maximin_lb":
        return cons.gen_maximin_lb(gamma, m)
    if family == "scoring_gap_lb":
        rule = resolve_rule(args.scores or "borda")
        return cons.gen_scoring_gap_lb(rule.score_vector(m), gamma, **kw)
    if family == "sqrtm_lb":
        return cons.gen_sqrtm_lb(args.scores or "borda", gamma, m)
    raise ConstructionError(f"unknown family {family!r}; expected one of {', '.join(cons.FAMILIES)}")


def cmd_construct(args) -> int:
    spec = _build_family(args, args.family, args.gamma)
    if args.instance_out:
        save_construction(args.instance_out, spec)
    row = {
        "instance": spec.family, "rule": spec.rule.name, "gamma_min": spec.gamma,
        "observed": spec.predicted_distortion,
        "theory_upper": theoretical_bounds(spec.rule, spec.gamma, spec.m).upper, "theory_lower": spec.closed_form,
        "exact_flag": True, "n": spec.n, "m": spec.m, "epsilon": spec.epsilon,
    }
    code = EXIT_OK
    if args.verify:
        rep = cons.verify_construction(spec)
        row["observed"] = rep.realized
        row["verified"] = rep.ok
        row["relative_gap"] = float(rep.relative_gap)
        if not rep.ok:
            print(f"verification failed: {rep.first_failure}", file=sys.stderr)
            code = EXIT_MISMATCH
    params = {"gamma": args.gamma, "m": args.m, "eps": args.eps, "scores": args.scores, "verify": args.verify}
    _report(args, [row], RunConfig("construct", spec.rule.name, family=args.family, params=params,
                                   outputs={"instance": args.instance_out}))
    return code


def _grid_matrix(rng, n, m, grid=100):
    U = rng.integers(0, grid + 1, (n, m))
    U[0, rng.integers(m)] = grid
    return UtilityMatrix(np.vectorize(lambda k: Fraction(int(k), grid), otypes=[object])(U))


def cmd_mono(args) -> int:
    rng = np.random.default_rng(args.seed)
    rows = []
    code = EXIT_OK
    params = {"check": args.check, "n": args.n, "m": args.m, "gamma": args.gamma, "gamma2": args.gamma2,
              "samples": args.samples}
    if args.check in ("compose", "reduce"):
        g1, g2 = _num(args, args.gamma), _num(args, args.gamma2)
        for k in range(args.samples):
            U = load_instance(args.instance).utilities if args.instance else _grid_matrix(rng, args.n, args.m)
            if args.check == "compose":
                try:
                    mono.compose_ps(g1, g2, U)
                    ok = True
                except VerificationError:
                    ok = False
                rows.append({"instance": args.instance or f"random {k}", "observed": ok, "exact_flag": U.exact,
                             "gamma_min": g1, "gamma2": g2})
            else:
                rule = resolve_rule(args.rule)
                lo, hi = min(g1, g2), max(g1, g2)
                Ut = mono.uniform_reduction(U, lo, hi)
                d_big = instance_distortion(rule, hi, U).value
                d_small = instance_distortion(rule, lo, Ut).value
                ok = d_big == d_small
                rows.append({"instance": args.instance or f"random {k}", "rule": rule.name, "gamma_min": lo,
                             "observed": d_big, "reduced": d_small, "exact_flag": True, "match": ok})
            if not ok:
                code = EXIT_MISMATCH
            if args.instance:
                break
    else:
        rule = resolve_rule(args.rule)
        w = mono.instancewise_counterexample_search(rule, args.n, args.m, args.budget, args.seed)
        row = {"instance": f"search n={args.n} m={args.m}", "rule": rule.name, "exact_flag": True,
               "found": w is not None}
        if w is not None:
            row.update({"observed": w.after, "before": w.before, "samples": w.samples,
                        "utilities": w.utilities.values.tolist(), "gamma": list(w.gamma),
                        "gamma_prime": list(w.gamma_prime)})
        rows.append(row)
    _report(args, rows, RunConfig("mono", args.rule, args.instance, params=params, budget=args.budget,
                                  seed=args.seed, arithmetic=args.arith))
    return code


def cmd_axioms(args) -> int:
    rule = resolve_rule(args.rule)
    names = ax.AXIOMS if args.axiom == "all" else (args.axiom,)
    reports = {a: ax.CHECKERS[a](rule, args.n, args.m, args.budget) for a in names}
    rows = []
    wdir = Path(args.witness_dir) if args.witness_dir else None
    for a, rep in reports.items():
        row = {"instance": f"all profiles n={args.n} m={args.m}", "rule": rule.name, "axiom": a,
               "verdict": "holds" if rep.holds else "violated", "count": rep.count, "exact_flag": True,
               "witness": rep.witness}
        if wdir is not None and rep.witness is not None:
            wdir.mkdir(parents=True, exist_ok=True)
            path = wdir / f"{rule.name}_{a}_n{args.n}_m{args.m}.json"
            path.write_text(json.dumps(rep.witness, sort_keys=True, indent=1) + "\n")
            row["witness_file"] = str(path)
        rows.append(row)
    _report(args, rows, RunConfig("axioms", rule.name, params={"n": args.n, "m": args.m, "axiom": args.axiom},
                                  budget=args.budget, outputs={"witness_dir": args.witness_dir}))
    code = EXIT_OK
    if args.axiom == "all":
        if not (ax.impossibility_consistent(reports) and ax.maskin_implication_consistent(reports)):
            code = EXIT_MISMATCH
    return code


def cmd_robust(args) -> int:
    rule = resolve_rule(args.rule)
    g = _num(args, args.gamma_min)
    params = {"n": args.n, "m": args.m, "gamma_min": args.gamma_min}
    if args.zeroed is not None:
        c = parse_number(args.zeroed, "rational")
        rep = rob.zeroed_gamma_experiment(rule, g, c, args.n, args.m, args.budget, args.seed)
        row = {"instance": f"zeroed c={c} n={args.n} m={args.m}", "rule": rule.name, "gamma_min": g,
               "observed": rep.observed, "theory_upper": rep.bound, "exact_flag": False, "zeroed": rep.zeroed,
               "divergent": rep.divergent, "lemma_violations": rep.lemma_violations}
        params["zeroed"] = args.zeroed
        ok = rep.holds
    else:
        ds, es = _num(args, args.delta_star), _num(args, args.eta_star)
        rep = rob.robust_distortion(rule, float(g), ds, es, args.n, args.m, args.budget, seed=args.seed,
                                    restarts=args.restarts)
        row = {"instance": f"robust search n={args.n} m={args.m}", "rule": rule.name, "gamma_min": g,
               "observed": rep.value, "theory_upper": rep.upper, "exact_flag": False,
               "delta_star": ds, "eta_star": es}
        params.update({"delta_star": args.delta_star, "eta_star": args.eta_star, "restarts": args.restarts})
        ok = rep.respects_upper
    _report(args, [row], RunConfig("robust", rule.name, params=params, budget=args.budget, seed=args.seed,
                                   arithmetic=args.arith))
    return EXIT_OK if ok else EXIT_MISMATCH


def table1_rows(gammas, m: int, arith: str = "rational"):
    rows = []
    for name in TABLE1_RULES:
        for gt in gammas:
            g = parse_number(gt, arith)
            b = theoretical_bounds(name, g, m)
            rows.append({
                "instance": f"table1 m={m}", "rule": name, "gamma_min": g, "observed": None,
                "theory_upper": b.upper, "theory_lower": b.lower, "exact_flag": True,
                "upper_form": b.upper_form, "lower_form": b.lower_form,
            })
    return rows


def cmd_table1(args) -> int:
    gammas = args.gammas.split(",") if args.gammas else list(TABLE1_GAMMAS)
    rows = table1_rows(gammas, args.m, args.arith)
    if args.observe:
        for r in rows:
            if r["gamma_min"] == 1:
                continue
            res = worst_case_search(r["rule"], float(r["gamma_min"]), args.n, args.m, args.observe, seed=args.seed)
            r["observed"] = res.value
            r["exact_flag"] = False
    _report(args, rows, RunConfig("table1", params={"m": args.m, "gammas": gammas, "n": args.n},
                                  budget=args.observe, seed=args.seed, arithmetic=args.arith))
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="distort", description="Distortion of voting rules under public-spirited voting.")
    sub = p.add_subparsers(dest="command", required=True)

    e = sub.add_parser("eval", help="distortion of one instance file")
    e.add_argument("--rule", required=True, help=f"one of {', '.join(RULE_NAMES)}, dictatorN or a JSON score array")
    e.add_argument("--instance", required=True)
    e.add_argument("--tie", choices=("enumerate", "lex", "adversarial"), default="enumerate")
    e.add_argument("--cap", type=int, default=100_000, help="enumeration cap on consistent profiles")
    _common(e)
    e.set_defaults(func=cmd_eval)

    k = sub.add_parser("kappa", help="brute-force kappa")
    k.add_argument("--rule", required=True)
    k.add_argument("--n", type=int, required=True)
    k.add_argument("--m", type=int, required=True)
    k.add_argument("--budget", type=int, default=10**7)
    _common(k)
    k.set_defaults(func=cmd_kappa)

    s = sub.add_parser("search", help="worst-case search over utility matrices")
    s.add_argument("--rule", required=True)
    s.add_argument("--gamma", required=True)
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--m", type=int, required=True)
    s.add_argument("--budget", type=int, default=10_000)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--restarts", type=int, default=8)
    s.add_argument("--tie", choices=("lex", "adversarial"), default="adversarial")
    s.add_argument("--seed-family", choices=tuple(cons.FAMILIES), default=None,
                   help="also start from this construction, resized to n voters")
    s.add_argument("--seed-gamma", default=None)
    s.add_argument("--eps", default=None)
    s.add_argument("--scores", default=None)
    _common(s)
    s.set_defaults(func=cmd_search)

    c = sub.add_parser("construct", help="generate (and verify) a lower-bound instance")
    c.add_argument("--family", required=True, choices=tuple(cons.FAMILIES))
    c.add_argument("--gamma", required=True)
    c.add_argument("--m", type=int, default=6)
    c.add_argument("--eps", default=None)
    c.add_argument("--scores", default=None, help="positional rule name or JSON score array")
    c.add_argument("--out", dest="instance_out", default=None, help="write the instance JSON here")
    c.add_argument("--verify", action="store_true")
    c.add_argument("--report", default=None, help="report path (default stdout)")
    _common(c, out=False)
    c.set_defaults(func=cmd_construct)

    mo = sub.add_parser("mono", help="monotonicity checks")
    mo.add_argument("--check", required=True, choices=("compose", "reduce", "counterexample"))
    mo.add_argument("--rule", default="plurality")
    mo.add_argument("--gamma", default="1/4")
    mo.add_argument("--gamma2", default="1/2")
    mo.add_argument("--instance", default=None)
    mo.add_argument("--n", type=int, default=5)
    mo.add_argument("--m", type=int, default=3)
    mo.add_argument("--samples", type=int, default=10)
    mo.add_argument("--budget", type=int, default=10**6)
    mo.add_argument("--seed", type=int, default=0)
    _common(mo)
    mo.set_defaults(func=cmd_mono)

    a = sub.add_parser("axioms", help="exhaustive axiom checks")
    a.add_argument("--rule", required=True)
    a.add_argument("--n", type=int, required=True)
    a.add_argument("--m", type=int, required=True)
    a.add_argument("--axiom", default="all", choices=("all",) + ax.AXIOMS)
    a.add_argument("--budget", type=int, default=ax.DEFAULT_BUDGET)
    a.add_argument("--witness-dir", default=None)
    _common(a)
    a.set_defaults(func=cmd_axioms)

    r = sub.add_parser("robust", help="robust distortion search or zeroed public spirit")
    r.add_argument("--rule", required=True)
    r.add_argument("--gamma-min", required=True)
    r.add_argument("--delta-star", default="1")
    r.add_argument("--eta-star", default="1")
    r.add_argument("--zeroed", default=None, help="fraction c of voters whose public spirit is zeroed")
    r.add_argument("--n", type=int, default=10)
    r.add_argument("--m", type=int, default=4)
    r.add_argument("--budget", type=int, default=1000)
    r.add_argument("--restarts", type=int, default=8)
    r.add_argument("--seed", type=int, default=0)
    _common(r)
    r.set_defaults(func=cmd_robust)

    t = sub.add_parser("table1", help="bound formulas for every rule over a gamma grid")
    t.add_argument("--gammas", default=None, help="comma-separated levels (default 1/10,1/4,1/2,3/4,9/10)")
    t.add_argument("--m", type=int, default=5)
    t.add_argument("--n", type=int, default=10)
    t.add_argument("--observe", type=int, default=0, help="search budget for an observed column (0: skip)")
    t.add_argument("--seed", type=int, default=0)
    _common(t)
    t.set_defaults(func=cmd_table1)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (BudgetExceeded, EnumerationOverflow) as err:
        print(f"budget exceeded: {err}", file=sys.stderr)
        return EXIT_BUDGET
    except VerificationError as err:
        print(f"verification failed: {err}", file=sys.stderr)
        return EXIT_MISMATCH
    except (PSDistortionError, ValueError, TypeError, OSError) as err:
        print(f"input error [{error_code(err)}]: {err}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
