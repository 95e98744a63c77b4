"""Job configuration: JSON schema, defaults and generator construction."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import jsonschema
import numpy as np

from .cocycle import CocycleError, Generator
from .linops import LinopsError
from .sft import SFTError, ShiftMetric, TransitionMatrix

SUITES = ("bunching", "periodic", "shadowing", "nets", "invariant_norms")

DEFAULTS = {
    "nu": 0.5,
    "beta": 1.0,
    "tol": 1e-6,
    "m_max": 60,
    "k_max": 10,
    "L": 6,
    "horizon": 20,
    "n_trials": 100,
    "eps": [0.2, 0.1],
    "n_test": 1000,
    "min_m": 64,
    "max_aux": 32,
    "q_samples": 40,
}

_matrix = {"type": "array", "minItems": 1,
           "items": {"type": "array", "minItems": 1, "items": {"type": "number"}}}
_word = {"type": "array", "items": {"type": "integer", "minimum": 0}}
_word_table = {"type": "array", "minItems": 1,
               "items": {"type": "object", "required": ["word", "matrix"],
                         "additionalProperties": False,
                         "properties": {"word": _word, "matrix": _matrix}}}

SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["transition_matrix", "generator"],
    "additionalProperties": False,
    "properties": {
        "name": {"type": "string"},
        "transition_matrix": {"type": "array", "minItems": 2,
                              "items": {"type": "array",
                                        "items": {"type": "integer", "enum": [0, 1]}}},
        "metric": {"type": "object", "additionalProperties": False,
                   "properties": {"nu": {"type": "number", "exclusiveMinimum": 0,
                                         "exclusiveMaximum": 1}}},
        "generator": {
            "type": "object",
            "required": ["kind"],
            "additionalProperties": False,
            "properties": {
                "kind": {"enum": ["identity", "constant", "diagonal", "per_symbol",
                                  "coboundary", "conjugated_rotation", "table"]},
                "beta": {"type": "number", "exclusiveMinimum": 0, "maximum": 1},
                "dim": {"type": "integer", "minimum": 1, "maximum": 4},
                "matrix": _matrix,
                "entries": {"type": "array", "minItems": 1, "maxItems": 4,
                            "items": {"type": "number"}},
                "matrices": {"type": "array", "minItems": 2, "items": _matrix},
                "depth": {"type": "integer", "minimum": 0},
                "table": _word_table,
                "c_depth": {"type": "integer", "minimum": 0},
                "c_table": _word_table,
                "angle_depth": {"type": "integer", "minimum": 0},
                "angles": {"type": "array", "minItems": 1,
                           "items": {"type": "object", "required": ["word", "angle"],
                                     "additionalProperties": False,
                                     "properties": {"word": _word,
                                                    "angle": {"type": "number"}}}},
                "conjugacy": _matrix,
            },
            "allOf": [
                {"if": {"properties": {"kind": {"const": "constant"}}},
                 "then": {"required": ["matrix"]}},
                {"if": {"properties": {"kind": {"const": "diagonal"}}},
                 "then": {"required": ["entries"]}},
                {"if": {"properties": {"kind": {"const": "per_symbol"}}},
                 "then": {"required": ["matrices"]}},
                {"if": {"properties": {"kind": {"const": "coboundary"}}},
                 "then": {"required": ["c_table"]}},
                {"if": {"properties": {"kind": {"const": "conjugated_rotation"}}},
                 "then": {"required": ["angles"]}},
                {"if": {"properties": {"kind": {"const": "table"}}},
                 "then": {"required": ["table"]}},
            ],
        },
        "suites": {"type": "array", "minItems": 1, "uniqueItems": True,
                   "items": {"enum": ["all", *SUITES]}},
        "tolerances": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "tol": {"type": "number", "exclusiveMinimum": 0},
                "m_max": {"type": "integer", "minimum": 1},
                "k_max": {"type": "integer", "minimum": 1, "maximum": 16},
                "L": {"type": "integer", "minimum": 1, "maximum": 12},
                "horizon": {"type": "integer", "minimum": 1},
                "n_trials": {"type": "integer", "minimum": 1},
                "eps": {"type": "array", "minItems": 1,
                        "items": {"type": "number", "exclusiveMinimum": 0}},
                "n_test": {"type": "integer", "minimum": 1},
                "min_m": {"type": "integer", "minimum": 1},
                "max_aux": {"type": "integer", "minimum": 0},
                "q_samples": {"type": "integer", "minimum": 1},
            },
        },
        "seed": {"type": "integer", "minimum": 0},
        "mode": {"enum": ["verdict", "assert"]},
        "output": {"type": "object", "additionalProperties": False,
                   "properties": {"dir": {"type": "string"}}},
    },
}


class ConfigError(ValueError):
    """Invalid job configuration; ``errors`` holds one message per problem."""

    def __init__(self, errors: list):
        self.errors = list(errors)
        super().__init__("\n".join(self.errors))


@dataclass
class JobConfig:
    name: str
    matrix: TransitionMatrix
    metric: ShiftMetric
    generator: Generator
    generator_spec: dict
    suites: tuple
    tolerances: dict
    seed: int = 0
    mode: str = "verdict"
    out_dir: str = "cocycle_lab_out"
    raw: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"name": self.name, "transition_matrix": self.matrix.to_list(),
                "metric": {"nu": self.metric.nu}, "generator": self.generator_spec,
                "suites": list(self.suites), "tolerances": dict(sorted(self.tolerances.items())),
                "seed": self.seed, "mode": self.mode}


def _path(err) -> str:
    parts = [str(p) for p in err.absolute_path]
    return ".".join(parts) if parts else "<root>"


def _line_of(text: str, err) -> int | None:
    # last path key that appears literally in the source
    for key in reversed([p for p in err.absolute_path if isinstance(p, str)]):
        needle = json.dumps(key) + ":"
        i = text.find(needle)
        if i < 0:
            needle = json.dumps(key)
            i = text.find(needle)
        if i >= 0:
            return text.count("\n", 0, i) + 1
    return None


def validate(data, text: str | None = None) -> None:
    """Raise :class:`ConfigError` listing every schema violation by field path."""
    v = jsonschema.Draft202012Validator(SCHEMA)
    errors = sorted(v.iter_errors(data), key=lambda e: (list(map(str, e.absolute_path)), e.message))
    if errors:
        msgs = []
        for e in errors:
            line = _line_of(text, e) if text is not None else None
            where = f" (line {line})" if line is not None else ""
            msgs.append(f"{_path(e)}{where}: {e.message}")
        raise ConfigError(msgs)


def _word_map(entries: list, key: str, matrix: TransitionMatrix, length: int, where: str):
    out, bad = {}, []
    for i, row in enumerate(entries):
        w = tuple(row["word"])
        if len(w) != length or not matrix.is_admissible(w):
            bad.append(f"{where}.{i}.word: {list(w)} is not an admissible {length}-word")
            continue
        out[w] = row[key]
    if bad:
        raise ConfigError(bad)
    missing = [[int(s) for s in w] for w in matrix.words(length)
               if tuple(int(s) for s in w) not in out]
    if missing:
        raise ConfigError([f"{where}: missing admissible words {missing[:8]}"
                           + (" ..." if len(missing) > 8 else "")])
    return out


def _square(m, where: str) -> np.ndarray:
    a = np.asarray(m, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ConfigError([f"{where}: expected a square matrix, got shape {list(a.shape)}"])
    if a.shape[0] > 4:
        raise ConfigError([f"{where}: dimension {a.shape[0]} exceeds 4"])
    if not np.isfinite(a).all():
        raise ConfigError([f"{where}: non-finite entries"])
    return a


def build_generator(spec: dict, matrix: TransitionMatrix) -> Generator:
    kind = spec["kind"]
    beta = float(spec.get("beta", DEFAULTS["beta"]))
    where = "generator"
    if kind == "identity":
        return Generator.identity(matrix, int(spec.get("dim", 2)), beta)
    if kind == "constant":
        return Generator.constant(matrix, _square(spec["matrix"], f"{where}.matrix"), beta)
    if kind == "diagonal":
        return Generator.diagonal(matrix, spec["entries"], beta)
    if kind == "per_symbol":
        mats = spec["matrices"]
        if len(mats) != matrix.k:
            raise ConfigError([f"{where}.matrices: need {matrix.k} matrices, got {len(mats)}"])
        return Generator.per_symbol(
            matrix, [_square(m, f"{where}.matrices.{i}") for i, m in enumerate(mats)], beta)
    if kind == "coboundary":
        cd = int(spec.get("c_depth", 0))
        ct = _word_map(spec["c_table"], "matrix", matrix, 2 * cd + 1, f"{where}.c_table")
        return Generator.coboundary(matrix, cd, {w: _square(m, f"{where}.c_table")
                                                 for w, m in ct.items()}, beta)
    if kind == "conjugated_rotation":
        ad = int(spec.get("angle_depth", 0))
        angles = _word_map(spec["angles"], "angle", matrix, 2 * ad + 1, f"{where}.angles")
        if "c_table" in spec:
            cd = int(spec.get("c_depth", 0))
            C = {w: _square(m, f"{where}.c_table")
                 for w, m in _word_map(spec["c_table"], "matrix", matrix, 2 * cd + 1,
                                       f"{where}.c_table").items()}
        else:
            cd = 0
            C = _square(spec.get("conjugacy", np.eye(2).tolist()), f"{where}.conjugacy")
        return Generator.conjugated_rotation(matrix, angles, ad, C=C, c_depth=cd, beta=beta)
    depth = int(spec.get("depth", 0))
    table = _word_map(spec["table"], "matrix", matrix, 2 * depth + 1, f"{where}.table")
    return Generator(matrix, depth, {w: _square(m, f"{where}.table") for w, m in table.items()},
                     beta, "table")


def parse(data: dict, text: str | None = None) -> JobConfig:
    validate(data, text)
    try:
        matrix = TransitionMatrix(tuple(tuple(r) for r in data["transition_matrix"]))
    except SFTError as exc:
        raise ConfigError([f"transition_matrix: {exc}"]) from None
    try:
        gen = build_generator(data["generator"], matrix)
    except (CocycleError, LinopsError, np.linalg.LinAlgError) as exc:
        raise ConfigError([f"generator: {exc}"]) from None
    suites = tuple(data.get("suites", ["all"]))
    if "all" in suites:
        suites = ("all",)
    tol = {k: v for k, v in DEFAULTS.items() if k not in ("nu", "beta")}
    tol.update(data.get("tolerances", {}))
    tol["eps"] = [float(e) for e in tol["eps"]]
    if not all(math.isfinite(e) for e in tol["eps"]):
        raise ConfigError(["tolerances.eps: entries must be finite"])
    return JobConfig(
        name=data.get("name", ""),
        matrix=matrix,
        metric=ShiftMetric(float(data.get("metric", {}).get("nu", DEFAULTS["nu"]))),
        generator=gen,
        generator_spec=data["generator"],
        suites=suites,
        tolerances=tol,
        seed=int(data.get("seed", 0)),
        mode=data.get("mode", "verdict"),
        out_dir=data.get("output", {}).get("dir", "cocycle_lab_out"),
        raw=data,
    )


def load(path) -> JobConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError([f"{path}: cannot read ({exc.strerror})"]) from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError([f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}: "
                           f"{exc.msg}"]) from None
    return parse(data, text)


def selected(cfg: JobConfig, suite: str) -> bool:
    return "all" in cfg.suites or suite in cfg.suites
