"""Experiment configuration files.

INI syntax.  A ``[run]`` section holds the shared settings; every other
section is one experiment, named by the section and running the audit given
by its ``audit`` key (default: the section name).  Example::

    [run]
    model = free:2
    epsilon = 1.0
    t_grid = 0.1, 0.25, 0.4
    N = 6
    n_max = 10
    seed = 0
    tolerance.bm_audit = 0.01

    [intertwine]
    audit = intertwine_audit
    max_len = 3
    trials = 20

    [bm]
    audit = bm_audit
    t = 0.25
    v = [a]
    w = 1

Cylinder functions are written as sums of scaled cylinder indicators, e.g.
``1``, ``[a]``, ``2*[a] + [b]``, ``[a] - [b]``; lists of them are separated
by ``;``.  Keys are case sensitive (``N`` is the depth, ``n_max`` the sphere
index).
"""

from __future__ import annotations

import configparser
import math
import re
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConfigError, DomainError, LabError
from .measure import CylinderFunction
from .tree import TreeModel

INF = math.inf

# audit -> {key: (kind, default)}; string defaults naming a [run] key are resolved from it
SCHEMA = {
    "ahlfors_audit": {"N": ("int", "N"), "steps": ("int", 8)},
    "shadow_measure_audit": {"n_max": ("int", "n_max"), "r": ("floats", [0.5, 1.0, 2.0])},
    "covering_audit": {"n_max": ("int", "n_max"), "r": ("float", 1.0)},
    "hch_audit": {"t": ("floats", "t_grid"), "n_max": ("int", "n_max"), "ceiling": ("float", 10.0)},
    "pi_bound_audit": {"t": ("floats", "t_grid"), "r": ("floats", [1.0, 2.0, INF]),
                       "max_len": ("int", 1)},
    "intertwine_audit": {"t": ("floats", "t_grid"), "N": ("int", "N"), "max_len": ("int", 3),
                         "trials": ("int", 20), "tol": ("float", 1e-10)},
    "l2_spectrum": {"t": ("floats", "t_grid"), "depths": ("ints", [3, 4, 5])},
    "pq_norm_probe": {"t": ("floats", "t_grid"), "depths": ("ints", [4, 5, 6]),
                      "trials": ("int", 50), "tol": ("float", 0.1)},
    "kernel_weak_audit": {"t": ("floats", "t_grid"), "depths": ("ints", [4, 5, 6])},
    "schur_audit": {"t": ("floats", "t_grid"), "depths": ("ints", [4, 5, 6]),
                    "trials": ("int", 200), "s": ("float", None), "tol": ("float", 0.1)},
    "embedding_audit": {"p": ("float", 2.0), "q1": ("float", 1.5), "q2": ("float", 3.0),
                        "N": ("int", "N"), "trials": ("int", 100)},
    "equid_audit": {"f": ("expr", "[a]"), "g": ("expr", "1"), "n_max": ("int", "n_max"),
                    "tol": ("float", 1e-3)},
    "bm_audit": {"t": ("floats", "t_grid"), "f": ("expr", "1"), "g": ("expr", "1"),
                 "v": ("expr", "[a]"), "w": ("expr", "1"), "n_max": ("int", "n_max"),
                 "tol": ("float", 0.01)},
    "rd_audit": {"t": ("floats", "t_grid"), "r": ("floats", [1.0, 2.0, INF]),
                 "n_max": ("int", "n_max"), "ceiling": ("float", 10.0)},
    "cyclic_approx": {"t": ("floats", "t_grid"), "target": ("expr", "[a]"),
                      "w_tests": ("exprs", "1; [b]"), "n_max": ("int", "n_max"),
                      "tol": ("float", 0.02)},
    "dual_limit_audit": {"t": ("floats", "t_grid"), "w": ("expr", "1"),
                         "v_tests": ("exprs", "1; [a]"), "n_max": ("int", "n_max"),
                         "tol": ("float", 0.02)},
}

# audits built on the intertwiner, defined only for 0 < t < 1/2
OPEN_T = {"intertwine_audit", "l2_spectrum", "pq_norm_probe", "kernel_weak_audit", "schur_audit",
          "bm_audit", "cyclic_approx", "dual_limit_audit"}

RUN_KEYS = {"model", "epsilon", "t_grid", "N", "n_max", "seed", "output_dir", "experiments",
            "max_depth", "dense_max_depth", "max_sphere_size", "cache_dir"}


@dataclass
class Experiment:
    name: str
    audit: str
    params: dict
    lines: dict = field(default_factory=dict)


@dataclass
class ExperimentConfig:
    model: TreeModel
    t_grid: list
    N: int
    n_max: int
    seed: int
    output_dir: str
    experiments: list
    tolerances: dict
    cache_dir: str | None = None
    path: str | None = None


# -- cylinder-function expressions ------------------------------------------------

_TOKEN = re.compile(r"\s*(?:(\d+\.?\d*(?:[eE][-+]?\d+)?|\.\d+(?:[eE][-+]?\d+)?)|(\[[^\]]*\])|([-+*]))")


def parse_function(model: TreeModel, text: str) -> CylinderFunction:
    """Parse a linear combination of cylinder indicators such as ``2*[a] - [bA] + 0.5``."""
    pos, toks = 0, []
    text = text.strip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise DomainError(f"cannot parse function {text!r} at position {pos}")
        if m.group(1) is not None:
            toks.append(("num", float(m.group(1))))
        elif m.group(2) is not None:
            toks.append(("cyl", m.group(2)[1:-1].strip()))
        else:
            toks.append(("op", m.group(3)))
        pos = m.end()
        while pos < len(text) and text[pos].isspace():
            pos += 1
    if not toks:
        raise DomainError("empty function expression")
    terms = []
    i, sign = 0, 1.0
    expect_term = True
    while i < len(toks):
        kind, val = toks[i]
        if expect_term:
            if kind == "op" and val in "+-":
                sign *= -1.0 if val == "-" else 1.0
                i += 1
                continue
            if kind == "num":
                if i + 1 < len(toks) and toks[i + 1] == ("op", "*"):
                    if i + 2 >= len(toks) or toks[i + 2][0] != "cyl":
                        raise DomainError(f"expected a cylinder after '*' in {text!r}")
                    terms.append((sign * val, toks[i + 2][1]))
                    i += 3
                else:
                    terms.append((sign * val, ""))
                    i += 1
            elif kind == "cyl":
                terms.append((sign, val))
                i += 1
            else:
                raise DomainError(f"unexpected {val!r} in {text!r}")
            sign, expect_term = 1.0, False
        else:
            if kind != "op" or val not in "+-":
                raise DomainError(f"expected '+' or '-' in {text!r}")
            sign = -1.0 if val == "-" else 1.0
            expect_term = True
            i += 1
    if expect_term:
        raise DomainError(f"dangling operator in {text!r}")
    out = CylinderFunction.constant(model, 0.0)
    for coef, letters in terms:
        w = model.word(letters)
        if len(w) != len(letters):
            raise DomainError(f"cylinder [{letters}] is not a reduced word")
        out = out + coef * CylinderFunction.indicator(w)
    return out


# -- loading ------------------------------------------------------------------------


def _line_index(text: str) -> dict:
    """(section, key) -> line number, plus (section, None) for headers."""
    out, section = {}, None
    for no, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line[0] in "#;":
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip()
            out[(section, None)] = no
            continue
        key = re.split(r"[=:]", line, maxsplit=1)[0].strip()
        out.setdefault((section, key), no)
    return out


def _floats(s):
    vals = []
    for part in s.split(","):
        part = part.strip()
        if not part:
            continue
        vals.append(INF if part.lower() in ("inf", "infinity") else float(part))
    return vals


def _convert(kind, raw, model):
    if kind == "int":
        v = float(raw)
        if v != int(v):
            raise ValueError(f"expected an integer, got {raw!r}")
        return int(v)
    if kind == "float":
        return None if raw is None or str(raw).strip().lower() == "none" else float(
            INF if str(raw).strip().lower() == "inf" else raw)
    if kind == "floats":
        return _floats(raw) if isinstance(raw, str) else [float(x) for x in raw]
    if kind == "ints":
        vals = _floats(raw) if isinstance(raw, str) else list(raw)
        return [int(v) for v in vals]
    if kind == "expr":
        return parse_function(model, raw)
    if kind == "exprs":
        return [parse_function(model, part) for part in raw.split(";") if part.strip()]
    raise AssertionError(kind)


def load_config(path, overrides=None) -> ExperimentConfig:
    text = Path(path).read_text()
    return parse_config(text, overrides, str(path))


def parse_config(text: str, overrides=None, path=None) -> ExperimentConfig:
    overrides = overrides or {}
    lines = _line_index(text)
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#",))
    cp.optionxform = str
    try:
        cp.read_string(text)
    except configparser.ParsingError as exc:
        no, bad = exc.errors[0]
        raise ConfigError(f"cannot parse {bad}", line=no) from None
    except configparser.Error as exc:
        raise ConfigError(str(exc).splitlines()[0], line=getattr(exc, "lineno", None)) from None
    if not cp.has_section("run"):
        raise ConfigError("missing [run] section", field="run")
    run = cp["run"]

    def where(key, section="run"):
        return lines.get((section, key))

    for key in run:
        if key not in RUN_KEYS and not key.startswith("tolerance."):
            raise ConfigError(f"unknown key {key!r} in [run]", where(key), f"run.{key}")

    def get(key, conv, default):
        if key not in run:
            return default
        try:
            return conv(run[key])
        except (ValueError, LabError) as exc:
            raise ConfigError(str(exc), where(key), f"run.{key}") from None

    if "model" not in run:
        raise ConfigError("missing required key 'model'", where(None), "run.model")
    caps = {k: get(k, int, None) for k in ("max_depth", "dense_max_depth", "max_sphere_size")}
    caps = {k: v for k, v in caps.items() if v is not None}
    epsilon = get("epsilon", float, 1.0)
    try:
        model = TreeModel.parse(run["model"], epsilon=epsilon, **caps)
    except LabError as exc:
        raise ConfigError(str(exc), where("model"), "run.model") from None

    t_grid = get("t_grid", _floats, [0.25])
    for t in t_grid:
        if not -0.5 <= t <= 0.5:
            raise ConfigError(f"t={t} outside [-1/2, 1/2]", where("t_grid"), "run.t_grid")
    N = get("N", int, 6)
    n_max = get("n_max", int, 10)
    seed = overrides.get("seed")
    if seed is None:
        seed = get("seed", int, 0)
    output_dir = overrides.get("output_dir") or run.get("output_dir", "results")
    tolerances = {}
    for key in run:
        if key.startswith("tolerance."):
            audit = key.split(".", 1)[1]
            if audit not in SCHEMA:
                raise ConfigError(f"tolerance for unknown audit {audit!r}", where(key), f"run.{key}")
            tolerances[audit] = get(key, float, None)

    sections = [s for s in cp.sections() if s != "run"]
    if "experiments" in run:
        names = [x.strip() for x in run["experiments"].split(",") if x.strip()]
    else:
        names = sections
    run_defaults = {"t_grid": t_grid, "N": N, "n_max": n_max}
    experiments = []
    for name in names:
        if name in cp:
            sec = cp[name]
            audit = sec.get("audit", name)
        elif name in SCHEMA:
            sec, audit = {}, name
        else:
            raise ConfigError(f"experiment {name!r} has no section and is not an audit name",
                              where("experiments"), "run.experiments")
        if audit not in SCHEMA:
            raise ConfigError(f"unknown audit {audit!r}", where("audit", name) or where(None, name),
                              f"{name}.audit")
        schema = SCHEMA[audit]
        for key in sec:
            if key != "audit" and key not in schema:
                raise ConfigError(f"unknown key {key!r} for {audit}", where(key, name), f"{name}.{key}")
        params = {}
        for key, (kind, default) in schema.items():
            if key in sec:
                raw = sec[key]
            elif key in ("tol", "ceiling") and audit in tolerances:
                raw = tolerances[audit]
            elif isinstance(default, str) and default in run_defaults:
                raw = run_defaults[default]
            else:
                raw = default
            try:
                params[key] = raw if raw is None else _convert(kind, raw, model)
            except (ValueError, LabError) as exc:
                raise ConfigError(str(exc), where(key, name), f"{name}.{key}") from None
        if "t" in params:
            src = (where("t", name), f"{name}.t") if "t" in sec else (where("t_grid"), "run.t_grid")
            for t in params["t"]:
                if audit in OPEN_T and not 0 < t < 0.5:
                    raise ConfigError(f"t must be in (0,1/2) for {audit}, got {t}", *src)
                if not -0.5 <= t <= 0.5:
                    raise ConfigError(f"t={t} outside [-1/2, 1/2]", *src)
        experiments.append(Experiment(name, audit, params,
                                      {k: where(k, name) for k in schema}))
    return ExperimentConfig(model, t_grid, N, n_max, seed, output_dir, experiments, tolerances,
                            run.get("cache_dir"), path)
