import csv
import io
import json
from fractions import Fraction

import numpy as np
import pytest

from psdistortion import __version__
from psdistortion.cli import main, table1_rows
from psdistortion.constructions import gen_copeland_lb, gen_maximin_lb, gen_plurality_lb
from psdistortion.distortion import theoretical_bounds
from psdistortion.exceptions import DimensionError, InstanceFormatError, RangeError
from psdistortion.io import (
    REPORT_COLUMNS,
    RunConfig,
    emit_report,
    error_code,
    format_value,
    instance_from_dict,
    load_instance,
    parse_number,
    render_report,
    save_construction,
    save_instance,
)
from psdistortion.robustness import ErrorMatrices, PSMatrix

F = Fraction


def run(argv, capsys):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


# ---------------------------------------------------------------------------
# numbers and formatting


def test_parse_number():
    assert parse_number("3/4") == F(3, 4)
    assert parse_number("1e-3") == F(1, 1000)
    assert parse_number("3/4", "float") == 0.75
    with pytest.raises(InstanceFormatError):
        parse_number("pi")
    with pytest.raises(RangeError):
        parse_number("inf", "float")
    with pytest.raises(RangeError):
        parse_number(float("nan"))


def test_format_value():
    assert format_value(F(1, 3)) == "1/3"
    assert format_value(F(4)) == "4"
    assert format_value(1 / 3) == "0.333333333333"
    assert format_value(float("inf")) == "inf"
    assert format_value(True) == "true"
    assert format_value(None) == ""
    assert format_value({"b": 1, "a": F(1, 2)}) == '{"a":"1/2","b":1}'


# ---------------------------------------------------------------------------
# instances


@pytest.mark.parametrize(
    "spec",
    [gen_copeland_lb(F(2, 3), 6), gen_plurality_lb(F(1, 2), 4, 0), gen_maximin_lb(F(1, 3), 4)],
    ids=["copeland", "plurality", "maximin"],
)
def test_construction_round_trip(tmp_path, spec):
    path = tmp_path / "inst.json"
    save_construction(path, spec)
    inst = load_instance(path)
    assert inst.utilities.values.tolist() == spec.utilities.values.tolist()
    assert list(inst.utilities.counts) == list(spec.utilities.counts)
    assert inst.gamma == spec.gamma
    assert inst.profile == spec.predicted_profile
    assert not inst.is_robust


def test_robust_round_trip(tmp_path):
    U = np.array([[F(1), F(0)], [F(1, 3), F(2)]], dtype=object)
    G = PSMatrix(np.array([[F(1, 2), F(1, 4)], [F(1), F(0)]], dtype=object))
    err = ErrorMatrices(np.array([[F(2), F(1)], [F(1), F(3, 2)]], dtype=object), np.ones((2, 2), dtype=object))
    path = tmp_path / "r.json"
    save_instance(path, U, G, err)
    inst = load_instance(path)
    assert inst.is_robust
    assert isinstance(inst.gamma, PSMatrix)
    assert inst.gamma.values.tolist() == G.values.tolist()
    assert inst.errors.delta.tolist() == err.delta.tolist()
    U2, G2, E2 = inst
    assert U2.values.tolist() == U.tolist()


def test_schema_errors():
    base = {"n": 2, "m": 2, "utilities": [[1, 0], [0, 1]], "gamma": 0.5}
    assert instance_from_dict(base).utilities.n == 2
    with pytest.raises(RangeError):
        instance_from_dict({**base, "gamma": 1.5})
    with pytest.raises(DimensionError):
        instance_from_dict({**base, "n": 3})
    with pytest.raises(DimensionError):
        instance_from_dict({**base, "utilities": [[1, 0], [0]]})
    with pytest.raises(InstanceFormatError):
        instance_from_dict({"utilities": [[1, 0]]})
    with pytest.raises(InstanceFormatError):
        instance_from_dict({**base, "delta": [[1, 1], [1, 1]]})
    with pytest.raises(RangeError):
        instance_from_dict({**base, "delta": [[0.5, 1], [1, 1]], "eta": [[1, 1], [1, 1]]})
    assert error_code(RangeError("x")) == "E_RANGE"
    assert error_code(DimensionError("x")) == "E_DIMENSION"
    assert error_code(InstanceFormatError("x")) == "E_FORMAT"


def test_gamma_matrix_branch():
    inst = instance_from_dict({"utilities": [[1, 0], [0, 1]], "gamma": {"matrix": [["1/2", "1/4"], ["1", "0"]]}})
    assert isinstance(inst.gamma, PSMatrix)
    assert inst.gamma.gamma_min == 0


def test_rational_strings_exact():
    inst = instance_from_dict({"utilities": [["1/3", "0"]], "gamma": "1/7"})
    assert inst.utilities.exact and inst.gamma == F(1, 7)


# ---------------------------------------------------------------------------
# reports


def test_empty_csv_is_header_only():
    text = render_report([], "csv")
    assert text == ",".join(REPORT_COLUMNS) + "\n"


def test_report_echoes_seed_version_config():
    cfg = RunConfig("search", rule="borda", seed=4).to_dict()
    text = render_report([{"rule": "borda", "observed": F(5, 2)}], "json", cfg, seed=4)
    doc = json.loads(text)
    assert doc["seed"] == 4 and doc["version"] == __version__
    assert doc["rows"][0]["observed"] == "5/2"
    assert doc["rows"][0]["config"] == format_value(cfg)
    with pytest.raises(ValueError):
        render_report([], "xml")


def test_emit_report_file(tmp_path):
    path = tmp_path / "r.csv"
    text = emit_report([{"rule": "x"}], "csv", path)
    assert path.read_text() == text


def test_table1_golden():
    gammas = ["1/10", "1/4", "1/2", "3/4", "9/10"]
    rows = table1_rows(gammas, 5)
    rules = {r["rule"] for r in rows}
    assert len(rows) == len(rules) * len(gammas)
    for r in rows:
        b = theoretical_bounds(r["rule"], r["gamma_min"], 5)
        assert (r["theory_upper"], r["theory_lower"]) == (b.upper, b.lower)
    by = {(r["rule"], r["gamma_min"]): r for r in rows}
    assert by[("copeland", F(1, 2))]["theory_upper"] == 9
    assert by[("plurality", F(1, 4))]["theory_upper"] == 16
    assert by[("maximin", F(1, 2))]["theory_lower"] == 5


# ---------------------------------------------------------------------------
# command line


def test_cli_table1_csv(capsys):
    code, out, _ = run(["table1", "--gammas", "1/2", "--m", "5"], capsys)
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert {r["rule"] for r in rows} >= {"plurality", "borda", "copeland", "slater", "maximin"}
    assert next(r for r in rows if r["rule"] == "copeland")["theory_upper"] == "9"


def test_cli_construct_and_eval(tmp_path, capsys):
    inst = tmp_path / "inst.json"
    code, out, _ = run(["construct", "--family", "maximin_lb", "--gamma", "1/2", "--m", "4", "--verify",
                        "--out", str(inst)], capsys)
    assert code == 0 and inst.exists()
    row = next(csv.DictReader(io.StringIO(out)))
    assert row["verified"] == "true" and row["observed"] == "4"
    code, out, _ = run(["eval", "--rule", "maximin", "--instance", str(inst)], capsys)
    assert code == 0
    assert next(csv.DictReader(io.StringIO(out)))["observed"] == "4"


def test_cli_kappa(capsys):
    code, out, _ = run(["kappa", "--rule", "plurality", "--n", "3", "--m", "3", "--format", "json"], capsys)
    assert code == 0
    assert json.loads(out)["rows"][0]["observed"] == "1/3"


def test_cli_axioms(tmp_path, capsys):
    code, out, _ = run(["axioms", "--rule", "plurality", "--n", "3", "--m", "3", "--witness-dir", str(tmp_path)], capsys)
    assert code == 0
    rows = {r["axiom"]: r for r in csv.DictReader(io.StringIO(out))}
    assert rows["weak_unanimity"]["verdict"] == "holds"
    assert rows["maskin"]["verdict"] == "violated"
    assert any(tmp_path.iterdir())


def test_cli_mono_and_robust(capsys):
    code, _, _ = run(["mono", "--check", "compose", "--samples", "3"], capsys)
    assert code == 0
    code, _, _ = run(["mono", "--check", "reduce", "--rule", "borda", "--samples", "3"], capsys)
    assert code == 0
    code, out, _ = run(["robust", "--rule", "copeland", "--gamma-min", "1/2", "--zeroed", "1/4", "--n", "6",
                        "--m", "3", "--budget", "5"], capsys)
    assert code == 0
    assert "copeland" in out


def test_cli_exit_codes(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"utilities": [[1, 0]], "gamma": 1.5}')
    code, _, err = run(["eval", "--rule", "plurality", "--instance", str(bad)], capsys)
    assert code == 2 and "E_RANGE" in err
    bad.write_text("{not json")
    code, _, err = run(["eval", "--rule", "plurality", "--instance", str(bad)], capsys)
    assert code == 2 and "E_FORMAT" in err
    code, _, _ = run(["kappa", "--rule", "plurality", "--n", "6", "--m", "4", "--budget", "1000"], capsys)
    assert code == 3
    code, _, _ = run(["eval", "--rule", "plurality", "--instance", str(tmp_path / "missing.json")], capsys)
    assert code == 2


def test_cli_search_determinism(tmp_path, capsys):
    outs = []
    for k in range(2):
        path = tmp_path / f"s{k}.json"
        code, _, _ = run(["search", "--rule", "borda", "--gamma", "1/2", "--n", "4", "--m", "3", "--budget", "40",
                          "--seed", "9", "--format", "json", "--out", str(path)], capsys)
        assert code == 0
        outs.append(path.read_bytes())
    assert outs[0] == outs[1]


def test_cli_construct_reports_upper_bound(capsys):
    code, out, _ = run(["construct", "--family", "copeland_lb", "--gamma", "1/2", "--m", "6"], capsys)
    assert code == 0
    row = next(csv.DictReader(io.StringIO(out)))
    assert row["theory_upper"] == "9" and row["theory_lower"] == "9"


def test_cli_table1_float_arith(capsys):
    code, out, _ = run(["table1", "--gammas", "1/10", "--m", "5", "--arith", "float", "--format", "json"], capsys)
    assert code == 0
    doc = json.loads(out)
    assert doc["rows"][0]["gamma_min"] == "0.1"
    assert '"arithmetic":"float"' in doc["rows"][0]["config"]
