"""Scenario files: a YAML description of a process plus the checks to run on it.

Example::

    system:
      state: {spectrum: [0.5, 0.5]}
    reservoir:
      hamiltonian: {eigenvalues: [0.0, 1.0]}
      beta: 5.0
    process:
      kind: swap
    checks:
      - {name: theorem1, tol: 1.0e-8}
      - {name: delta_S, expect: 0.0, tol: 1.0e-9}

Check names are either a shorthand from ``SHORTHANDS`` or the name of a
reported quantity, in which case ``expect`` is required.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import jsonschema
import numpy as np
import yaml

from .bounds import BoundParams, finite_size_bound
from .processes import (KStepSpec, ProcessSpec, build_kstep_process, build_tight_process,
                        check_equality_case, integral_version_check, memory_erasure_spec,
                        memory_process_report, pure_erasure_truncated, pureness_bound_check,
                        run_process)
from .quantum import HermitianOp, QState, Unitary, haar_unitary, random_state, swap_unitary
from .thermo import Reservoir


class _Loader(yaml.SafeLoader):
    """Safe loader that also reads exponent floats such as ``1e-8``."""


_Loader.add_implicit_resolver(
    "tag:yaml.org,2002:float",
    re.compile(r"""^(?:[-+]?(?:[0-9][0-9_]*)\.[0-9_]*(?:[eE][-+]?[0-9]+)?
    |[-+]?(?:[0-9][0-9_]*)(?:[eE][-+]?[0-9]+)
    |\.[0-9_]+(?:[eE][-+][0-9]+)?
    |[-+]?\.(?:inf|Inf|INF)
    |\.(?:nan|NaN|NAN))$""", re.X),
    list("-+0123456789."))


class ScenarioError(ValueError):
    """Malformed scenario file; the message carries a line number where possible."""


_number = {"oneOf": [{"type": "number"},
                     {"type": "string", "enum": ["inf", "+inf", "-inf"]}]}
_matrix = {"type": "array", "minItems": 1, "items": {"type": "array", "minItems": 1, "items": {
    "oneOf": [{"type": "number"},
              {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2}]}}}
_state = {
    "type": "object", "additionalProperties": False,
    "properties": {
        "spectrum": {"type": "array", "items": {"type": "number"}, "minItems": 1},
        "basis": _matrix,
        "preset": {"enum": ["maximally_mixed", "pure", "random"]},
        "dim": {"type": "integer", "minimum": 1},
        "rank": {"type": "integer", "minimum": 1},
        "seed": {"type": "integer"},
        "matrix_file": {"type": "string"},
    },
}
_params = {
    "identity": {},
    "haar": {"seed": {"type": "integer"}},
    "unitary-matrix": {"matrix": _matrix, "file": {"type": "string"}},
    "swap": {"d_sw": {"type": "integer", "minimum": 1}},
    "tight": {"delta_S": {"type": "number"}, "d": {"type": "integer", "minimum": 2}},
    "kstep": {"k": {"type": "integer", "minimum": 1}, "target": _state},
    "memory": {"p": {"type": "array", "items": {"type": "number"}, "minItems": 2},
               "correlation": {"enum": ["classical", "entangled"]}},
    "pure-erasure": {"s1": {"type": "number"}, "epsilon": {"type": "number"},
                     "depth": {"type": "integer", "minimum": 1}},
}
_required = {"haar": ["seed"], "tight": ["delta_S", "d"], "kstep": ["k", "target"],
             "memory": ["p", "correlation"], "pure-erasure": ["s1", "epsilon"]}
_needs_system = {"identity", "haar", "unitary-matrix", "swap", "kstep"}
_needs_reservoir = {"identity", "haar", "unitary-matrix", "swap"}

SCHEMA = {
    "type": "object", "additionalProperties": False, "required": ["process"],
    "properties": {
        "name": {"type": "string"},
        "system": {"type": "object", "additionalProperties": False, "required": ["state"],
                   "properties": {"state": _state}},
        "reservoir": {
            "type": "object", "additionalProperties": False,
            "properties": {
                "hamiltonian": {"type": "object", "additionalProperties": False,
                                "properties": {"eigenvalues": {"type": "array", "minItems": 1,
                                                               "items": {"type": "number"}},
                                               "basis": _matrix, "matrix": _matrix}},
                "state": _state,
                "beta": _number,
                "infinite_levels": {"type": "array", "items": {"type": "integer", "minimum": 0}},
            },
        },
        "process": {
            "type": "object", "additionalProperties": False, "required": ["kind"],
            "properties": {"kind": {"enum": sorted(_params)},
                           "parameters": {"type": "object"}},
            "allOf": [
                {"if": {"properties": {"kind": {"const": kind}}},
                 "then": {"properties": {"parameters": {
                     "type": "object", "additionalProperties": False, "properties": props,
                     "required": _required.get(kind, [])}},
                     **({"required": ["kind", "parameters"]} if kind in _required else {})}}
                for kind, props in _params.items()
            ],
        },
        "checks": {"type": "array", "items": {
            "type": "object", "additionalProperties": False, "required": ["name"],
            "properties": {"name": {"type": "string"}, "tol": {"type": "number", "minimum": 0},
                           "quantity": {"type": "string"}, "expect": _number}}},
    },
}

# shorthand -> (quantity, mode); "max": value <= tol, "min": value >= -tol
SHORTHANDS = {
    "theorem1": ("equality_residual", "max"),
    "second_law": ("second_law_residual", "max"),
    "landauer": ("landauer_margin", "min"),
    "theorem2": ("theorem2_margin", "min"),
    "theorem3": ("theorem3_margin", "min"),
    "pureness": ("pureness_margin", "min"),
    "integral_version": ("integral_residual", "max"),
    "tight": ("tight_excess", "abs"),
    "kstep_lower": ("kstep_lower_margin", "min"),
    "kstep_upper": ("kstep_upper_margin", "min"),
    "generalized_second_law": ("second_law_margin", "min"),
    "generalized_landauer": ("landauer_margin", "min"),
    "equality_witnesses": ("equality_witness_violation", "max"),
}
DEFAULT_TOL = 1e-8


@dataclass(frozen=True)
class Scenario:
    data: dict
    source: Path | None = None

    @property
    def kind(self) -> str:
        return self.data["process"]["kind"]

    @property
    def parameters(self) -> dict:
        return self.data["process"].get("parameters", {}) or {}


@dataclass(frozen=True)
class CheckResult:
    name: str
    quantity: str
    value: float
    tol: float
    passed: bool
    detail: str


# --- loading --------------------------------------------------------------------------

def _node_at(node, path):
    for key in path:
        if isinstance(node, yaml.MappingNode):
            match = [v for k, v in node.value if k.value == key]
            if not match:
                return node
            node = match[0]
        elif isinstance(node, yaml.SequenceNode) and isinstance(key, int) and key < len(node.value):
            node = node.value[key]
        else:
            return node
    return node


def _best_error(errors):
    # prefer the most specific error (deepest path) to report
    return max(errors, key=lambda e: (len(list(e.absolute_path)), -len(e.context)))


def parse_scenario(text: str, source: Path | None = None) -> Scenario:
    label = str(source) if source else "<scenario>"
    try:
        root = yaml.compose(text, Loader=_Loader)
        data = yaml.load(text, Loader=_Loader)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f"line {mark.line + 1}" if mark else "unknown line"
        raise ScenarioError(f"{label}: {where}: {getattr(exc, 'problem', exc)}") from None
    if not isinstance(data, dict):
        raise ScenarioError(f"{label}: line 1: scenario must be a mapping")
    errors = list(jsonschema.Draft7Validator(SCHEMA).iter_errors(data))
    if errors:
        err = _best_error(errors)
        path = list(err.absolute_path)
        node = _node_at(root, path)
        field = ".".join(str(p) for p in path) or "<root>"
        raise ScenarioError(f"{label}: line {node.start_mark.line + 1}: field '{field}': {err.message}")
    kind = data["process"]["kind"]
    for section, kinds in (("system", _needs_system), ("reservoir", _needs_reservoir)):
        if kind in kinds and section not in data:
            raise ScenarioError(f"{label}: line 1: process kind '{kind}' requires a '{section}' section")
    for i, chk in enumerate(data.get("checks", []) or []):
        if chk["name"] not in SHORTHANDS and "expect" not in chk:
            node = _node_at(root, ["checks", i])
            raise ScenarioError(f"{label}: line {node.start_mark.line + 1}: check '{chk['name']}' "
                                f"is not a known check; give 'expect' to compare a quantity")
    return Scenario(data, source)


def load_scenario(path) -> Scenario:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ScenarioError(f"{path}: {exc.strerror}") from None
    return parse_scenario(text, path)


# --- building ------------------------------------------------------------------------------

def _float(x) -> float:
    return float(x) if not isinstance(x, str) else float(x.replace("+", ""))


def _complex_matrix(rows) -> np.ndarray:
    return np.array([[complex(*v) if isinstance(v, list) else v for v in row] for row in rows],
                    dtype=complex)


def _read_matrix_file(name: str, scenario: Scenario) -> np.ndarray:
    base = scenario.source.parent if scenario.source else Path.cwd()
    path = base / name
    try:
        return np.load(path) if path.suffix == ".npy" else np.loadtxt(path, dtype=complex)
    except (OSError, ValueError) as exc:
        raise ScenarioError(f"cannot read matrix file {path}: {exc}") from None


def build_state(spec: dict, scenario: Scenario) -> QState:
    if "matrix_file" in spec:
        return QState(_read_matrix_file(spec["matrix_file"], scenario))
    if "spectrum" in spec:
        p = np.asarray(spec["spectrum"], dtype=float)
        basis = _complex_matrix(spec["basis"]) if "basis" in spec else None
        return QState.from_spectrum(p, basis)
    preset = spec.get("preset")
    dim = spec.get("dim")
    if preset is None or dim is None:
        raise ScenarioError("a state needs 'spectrum', 'matrix_file', or 'preset' with 'dim'")
    if preset == "maximally_mixed":
        return QState.maximally_mixed(dim)
    if preset == "pure":
        return QState.pure(np.eye(dim)[0])
    if "seed" not in spec:
        raise ScenarioError("preset 'random' requires a 'seed'")
    return random_state(dim, spec.get("rank"), seed=spec["seed"])


def build_reservoir(spec: dict, scenario: Scenario) -> Reservoir:
    beta = _float(spec.get("beta", 1.0))
    mask = tuple(spec.get("infinite_levels", ()))
    if "state" in spec:
        if "hamiltonian" in spec:
            raise ScenarioError("give either a reservoir 'state' or a 'hamiltonian', not both")
        return Reservoir.from_state(build_state(spec["state"], scenario), beta)
    ham = spec.get("hamiltonian")
    if ham is None:
        raise ScenarioError("reservoir needs a 'hamiltonian' or a 'state'")
    if "matrix" in ham:
        h = HermitianOp(_complex_matrix(ham["matrix"]))
    else:
        w = np.asarray(ham["eigenvalues"], dtype=float)
        v = _complex_matrix(ham["basis"]) if "basis" in ham else np.eye(w.size)
        h = HermitianOp((v * w) @ v.conj().T)
    return Reservoir(h, beta, mask)


def _process_spec(sc: Scenario) -> ProcessSpec:
    rho_S = build_state(sc.data["system"]["state"], sc)
    res = build_reservoir(sc.data["reservoir"], sc)
    n = rho_S.dim * res.dim
    prm = sc.parameters
    if sc.kind == "identity":
        u = Unitary.identity(n)
    elif sc.kind == "haar":
        u = haar_unitary(n, seed=prm["seed"])
    elif sc.kind == "unitary-matrix":
        if ("matrix" in prm) == ("file" in prm):
            raise ScenarioError("unitary-matrix needs exactly one of 'matrix' or 'file'")
        m = _complex_matrix(prm["matrix"]) if "matrix" in prm else _read_matrix_file(prm["file"], sc)
        u = Unitary(m)
    else:
        d_sw = prm.get("d_sw", rho_S.dim)
        if rho_S.dim % d_sw or res.dim % d_sw:
            raise ScenarioError(f"swap dimension {d_sw} must divide both {rho_S.dim} and {res.dim}")
        u = swap_unitary((d_sw, rho_S.dim // d_sw, d_sw, res.dim // d_sw), 0, 2)
    return ProcessSpec(rho_S, res, u)


def _process_quantities(spec: ProcessSpec) -> dict[str, float]:
    rep = run_process(spec)
    out = {k: getattr(rep, k) for k in (
        "delta_S", "delta_Q", "delta", "mutual_info_final", "rel_ent_final", "beta_delta_Q",
        "equality_residual", "second_law_residual", "landauer_margin", "theorem2_margin")}
    out["theorem3_margin"] = rep.theorem3.margin if rep.theorem3.applicable else math.nan
    pm = pureness_bound_check(spec, rep)
    out["pureness_margin"] = math.nan if pm is None else pm
    if not spec.reservoir.infinite_mask:
        out["integral_residual"] = integral_version_check(spec, rep).residual
    diag = check_equality_case(rep, spec)
    out["equality_gap"] = diag.gap
    out["equality_witness_violation"] = (
        max(diag.reservoir_deviation, diag.mutual_info, diag.spectrum_deviation)
        if diag.is_equality else 0.0)
    out["lambda_min_final"] = float(rep.rho_S_final.spectrum[-1])
    return out


def evaluate(sc: Scenario) -> dict[str, float]:
    """All named quantities of the scenario's process."""
    prm = sc.parameters
    try:
        if sc.kind in {"identity", "haar", "unitary-matrix", "swap"}:
            return _process_quantities(_process_spec(sc))
        if sc.kind == "tight":
            spec = build_tight_process(prm["delta_S"], prm["d"])
            out = _process_quantities(spec)
            out["tight_excess"] = out["beta_delta_Q"] - finite_size_bound(
                out["delta_S"], BoundParams(prm["d"]))
            return out
        if sc.kind == "kstep":
            rep = build_kstep_process(KStepSpec(build_state(sc.data["system"]["state"], sc),
                                                build_state(prm["target"], sc), prm["k"]))
            return {"k": rep.k, "delta_S": rep.delta_S, "beta_delta_Q": rep.beta_delta_Q,
                    "gap": rep.gap, "upper_bound": rep.upper_bound, "lower_bound": rep.lower_bound,
                    "kstep_lower_margin": rep.gap - rep.lower_bound,
                    "kstep_upper_margin": rep.upper_bound - rep.gap,
                    "heat_sum_residual": rep.heat_sum_residual}
        if sc.kind == "memory":
            res = build_reservoir(sc.data["reservoir"], sc) if "reservoir" in sc.data else None
            rep = memory_process_report(memory_erasure_spec(prm["p"], prm["correlation"], res))
            return {k: float(v) for k, v in rep._asdict().items() if k != "final"}
        rep = pure_erasure_truncated(prm["s1"], prm["epsilon"], prm.get("depth"))
        return {k: float(v) for k, v in rep._asdict().items()}
    except ScenarioError:
        raise
    except ValueError as exc:
        raise ScenarioError(f"invalid scenario: {exc}") from None


def run_checks(sc: Scenario, quantities: dict[str, float]) -> list[CheckResult]:
    results = []
    for chk in sc.data.get("checks", []) or []:
        name = chk["name"]
        tol = float(chk.get("tol", DEFAULT_TOL))
        if "expect" in chk:
            qty = chk.get("quantity", name)
            mode = "value"
        else:
            qty, mode = SHORTHANDS[name]
            qty = chk.get("quantity", qty)
        if qty not in quantities:
            results.append(CheckResult(name, qty, math.nan, tol, False, "quantity not reported"))
            continue
        v = quantities[qty]
        if mode == "value":
            exp = _float(chk["expect"])
            ok = (v == exp) if not (math.isfinite(v) and math.isfinite(exp)) else abs(v - exp) <= tol
            detail = f"expected {exp:.12g}"
        elif math.isnan(v):
            ok, detail = True, "not applicable"
        elif mode == "max":
            ok, detail = v <= tol, "<= tol"
        elif mode == "abs":
            ok, detail = abs(v) <= tol, "|value| <= tol"
        else:
            ok, detail = v >= -tol, ">= -tol"
        results.append(CheckResult(name, qty, v, tol, bool(ok), detail))
    return results


def run_scenario(sc: Scenario) -> tuple[dict[str, float], list[CheckResult]]:
    q = evaluate(sc)
    return q, run_checks(sc, q)


def to_plain(obj: Any) -> Any:
    """JSON-friendly copy with infinities spelled out."""
    if isinstance(obj, dict):
        return {k: to_plain(v) for k, v in obj.items()}
    if isinstance(obj, float) and not math.isfinite(obj):
        return "nan" if math.isnan(obj) else ("inf" if obj > 0 else "-inf")
    return obj
