"""JSON instance files and CSV/JSON reports.

Instance schema::

    {"n": 4, "m": 3,
     "utilities": [["1/2", "0", "1"], ...],
     "counts": [1, 3],                      # optional, one per utility row
     "gamma": "1/2" | [..] | {"matrix": [[..]]},
     "delta": [[..]], "eta": [[..]],        # optional, both or neither
     "profile": [[0, 2, 1], ...],           # optional, 0-based rankings
     "profile_counts": [1, 3]}              # optional

Rationals are written as ``"p/q"`` strings so that rational instances
survive a round trip unchanged.  ``counts`` keeps instances with millions
of identical voters small.
"""

from __future__ import annotations

import csv
import io as _io
import json
import math
import sys
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__
from .core import Profile, UtilityMatrix, as_ps_vector
from .exceptions import DimensionError, InstanceFormatError, RangeError
from .robustness import ErrorMatrices, PSMatrix

REPORT_COLUMNS = (
    "instance",
    "rule",
    "gamma_min",
    "observed",
    "theory_upper",
    "theory_lower",
    "exact_flag",
    "seed",
    "version",
    "config",
)

# distinct codes per input-error kind, reported alongside the CLI's exit code 2
ERROR_CODES = {InstanceFormatError: "E_FORMAT", DimensionError: "E_DIMENSION", RangeError: "E_RANGE"}


def error_code(err: Exception) -> str:
    for cls, code in ERROR_CODES.items():
        if isinstance(err, cls):
            return code
    return "E_INPUT"


@dataclass
class Instance:
    """A loaded instance; unpacks as ``(utilities, gamma, errors)``."""

    utilities: UtilityMatrix
    gamma: object
    errors: ErrorMatrices | None = None
    profile: Profile | None = None

    def __iter__(self):
        return iter((self.utilities, self.gamma, self.errors))

    @property
    def is_robust(self) -> bool:
        return isinstance(self.gamma, PSMatrix) or self.errors is not None


@dataclass
class RunConfig:
    """Everything needed to rerun a CLI command; echoed into every report."""

    command: str
    rule: str | None = None
    instance: str | None = None
    family: str | None = None
    params: dict = field(default_factory=dict)
    tie: str = "enumerate"
    budget: int | None = None
    seed: int | None = None
    outputs: dict = field(default_factory=dict)
    arithmetic: str = "rational"

    def to_dict(self) -> dict:
        return asdict(self)


# ---------------------------------------------------------------------------
# numbers


def parse_number(text, mode: str = "rational"):
    """Parse ``"p/q"``, decimals and scientific notation.

    Rational mode returns an exact Fraction and rejects anything that is not
    a finite rational literal; float mode returns a float.
    """
    if isinstance(text, (int, Fraction)) and not isinstance(text, bool):
        return Fraction(text) if mode == "rational" else float(text)
    if isinstance(text, float):
        if not math.isfinite(text):
            raise RangeError(f"non-finite number {text!r}")
        return Fraction(text) if mode == "rational" else text
    if not isinstance(text, str):
        raise InstanceFormatError(f"expected a number, got {text!r}")
    try:
        if mode == "rational":
            return Fraction(text.strip())
        x = float(Fraction(text.strip())) if "/" in text else float(text)
    except (ValueError, ZeroDivisionError) as err:
        raise InstanceFormatError(f"cannot parse {text!r} as a {mode} number") from err
    if not math.isfinite(x):
        raise RangeError(f"non-finite number {text!r}")
    return x


def encode_number(x):
    """JSON-ready form: Fractions become ``"p/q"`` strings, numpy scalars plain Python."""
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating,)):
        return float(x)
    return x


def _encode_matrix(a):
    return [[encode_number(v) for v in row] for row in np.asarray(a, dtype=object)]


def _json_safe(obj):
    if isinstance(obj, dict):
        return {str(k): _json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_safe(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _json_safe(obj.tolist())
    if isinstance(obj, float) and not math.isfinite(obj):
        return "inf" if obj > 0 else ("-inf" if obj < 0 else "nan")
    return encode_number(obj)


# ---------------------------------------------------------------------------
# instances


def _decode_matrix(raw, name):
    if not isinstance(raw, list) or not raw or not all(isinstance(r, list) for r in raw):
        raise InstanceFormatError(f"{name!r} must be a non-empty list of rows")
    if len({len(r) for r in raw}) != 1:
        raise DimensionError(f"rows of {name!r} differ in length")
    exact = any(isinstance(v, str) for r in raw for v in r)
    try:
        if exact:
            return np.array([[Fraction(str(v)) for v in r] for r in raw], dtype=object)
        return np.array(raw, dtype=float)
    except (ValueError, TypeError, ZeroDivisionError) as err:
        raise InstanceFormatError(f"{name!r} holds a non-numeric entry") from err


def _decode_vector(raw, name):
    if not isinstance(raw, list):
        raise InstanceFormatError(f"{name!r} must be a list")
    try:
        if any(isinstance(v, str) for v in raw):
            return np.array([Fraction(str(v)) for v in raw], dtype=object)
        return np.array(raw, dtype=float)
    except (ValueError, TypeError, ZeroDivisionError) as err:
        raise InstanceFormatError(f"{name!r} holds a non-numeric entry") from err


def instance_from_dict(data: dict) -> Instance:
    if not isinstance(data, dict):
        raise InstanceFormatError("instance must be a JSON object")
    for key in ("utilities", "gamma"):
        if key not in data:
            raise InstanceFormatError(f"missing field {key!r}")
    vals = _decode_matrix(data["utilities"], "utilities")
    counts = data.get("counts")
    U = UtilityMatrix(vals, counts)
    if "n" in data and int(data["n"]) != U.n:
        raise DimensionError(f"n={data['n']} but the utilities describe {U.n} voters")
    if "m" in data and int(data["m"]) != U.m:
        raise DimensionError(f"m={data['m']} but the utilities have {U.m} columns")
    graw = data["gamma"]
    if isinstance(graw, dict):
        if "matrix" not in graw:
            raise InstanceFormatError("gamma object must have a 'matrix' field")
        gamma = PSMatrix(_decode_matrix(graw["matrix"], "gamma.matrix"))
        gamma.aligned(U)
    elif isinstance(graw, list):
        g = _decode_vector(graw, "gamma")
        if len(g) not in (U.k, U.n):
            raise DimensionError(f"gamma has length {len(g)}, expected {U.n}")
        gamma = as_ps_vector(g, len(g))
    else:
        g = parse_number(graw, "rational" if isinstance(graw, str) else "float")
        gamma = as_ps_vector(g, 1)[0]
    errors = None
    if ("delta" in data) != ("eta" in data):
        raise InstanceFormatError("'delta' and 'eta' must be given together")
    if "delta" in data:
        errors = ErrorMatrices(_decode_matrix(data["delta"], "delta"), _decode_matrix(data["eta"], "eta"))
        errors.aligned(U)
    profile = None
    if "profile" in data:
        try:
            profile = Profile(data["profile"], data.get("profile_counts"))
        except (ValueError, TypeError) as err:
            if isinstance(err, DimensionError):
                raise
            raise InstanceFormatError(f"bad profile: {err}") from err
        if profile.n != U.n or profile.m != U.m:
            raise DimensionError("profile size does not match the utilities")
    return Instance(U, gamma, errors, profile)


def load_instance(path) -> Instance:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except json.JSONDecodeError as err:
        raise InstanceFormatError(f"{path}: not valid JSON ({err.msg} at line {err.lineno})") from err
    return instance_from_dict(data)


def instance_to_dict(U, gamma, errors: ErrorMatrices | None = None, profile: Profile | None = None) -> dict:
    U = UtilityMatrix.coerce(U)
    data = {"n": U.n, "m": U.m, "utilities": _encode_matrix(U.values)}
    if U.k != U.n:
        data["counts"] = [int(c) for c in U.counts]
    if isinstance(gamma, PSMatrix):
        data["gamma"] = {"matrix": _encode_matrix(gamma.values)}
    elif np.ndim(gamma) == 0:
        data["gamma"] = encode_number(gamma)
    else:
        data["gamma"] = [encode_number(v) for v in gamma]
    if errors is not None:
        data["delta"] = _encode_matrix(errors.delta)
        data["eta"] = _encode_matrix(errors.eta)
    if profile is not None:
        data["profile"] = profile.rankings.tolist()
        if profile.n != profile.rankings.shape[0]:
            data["profile_counts"] = [int(c) for c in profile.counts]
    return data


def _rows_json(rows) -> str:
    return "[\n  " + ",\n  ".join(json.dumps(r) for r in rows) + "\n ]"


def dumps_instance(data: dict) -> str:
    """One top-level key per line and one matrix row per line."""
    lines = []
    for key, val in data.items():
        if isinstance(val, list) and val and isinstance(val[0], list):
            text = _rows_json(val)
        elif isinstance(val, dict):
            text = "{" + ", ".join(f"{json.dumps(k)}: {_rows_json(v)}" for k, v in val.items()) + "}"
        else:
            text = json.dumps(val)
        lines.append(f" {json.dumps(key)}: {text}")
    return "{\n" + ",\n".join(lines) + "\n}\n"


def save_instance(path, U, gamma, errors=None, profile=None) -> None:
    Path(path).write_text(dumps_instance(instance_to_dict(U, gamma, errors, profile)))


def save_construction(path, spec) -> None:
    save_instance(path, spec.utilities, spec.gamma, None, spec.predicted_profile)


# ---------------------------------------------------------------------------
# reports


def format_value(v) -> str:
    """Report cell text: 12 significant digits for floats, ``p/q`` for rationals."""
    if v is None:
        return ""
    if isinstance(v, bool) or isinstance(v, np.bool_):
        return "true" if v else "false"
    if isinstance(v, Fraction):
        return str(v.numerator) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return f"{v:.12g}"
    if isinstance(v, (dict, list, tuple)):
        return json.dumps(_json_safe(v), sort_keys=True, separators=(",", ":"))
    return str(v)


def report_columns(rows) -> list[str]:
    extra = sorted({k for r in rows for k in r} - set(REPORT_COLUMNS))
    return list(REPORT_COLUMNS) + extra


def render_report(results, fmt: str = "csv", config: dict | None = None, seed=None) -> str:
    """Report text; every row gets ``seed``, ``version`` and the ``config`` echo."""
    rows = []
    for r in results:
        r = dict(r)
        r.setdefault("seed", seed)
        r.setdefault("version", __version__)
        r.setdefault("config", config or {})
        rows.append(r)
    cols = report_columns(rows)
    if fmt == "csv":
        buf = _io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(cols)
        for r in rows:
            w.writerow([format_value(r.get(c)) for c in cols])
        return buf.getvalue()
    if fmt == "json":
        doc = {
            "version": __version__,
            "seed": seed,
            "config": _json_safe(config or {}),
            "columns": cols,
            "rows": [{c: format_value(r.get(c)) for c in cols} for r in rows],
        }
        return json.dumps(doc, indent=1, sort_keys=True) + "\n"
    raise ValueError(f"unknown report format {fmt!r}")


def emit_report(results, fmt: str = "csv", path=None, config: dict | None = None, seed=None) -> str:
    """Write the report to ``path`` (stdout for None or ``"-"``) and return its text."""
    text = render_report(results, fmt, config, seed)
    if path is None or str(path) == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)
    return text


