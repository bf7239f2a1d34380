"""Declarative scenarios: JSON in, JSON report and CSV series out."""

from __future__ import annotations

import csv
import io
import json
import os
import platform
import tempfile
import time
from dataclasses import dataclass, field
from datetime import datetime, timezone
from importlib import metadata
from pathlib import Path
from typing import Any, Callable

import jsonschema
import numpy as np

from . import integration as integ
from . import regularity as reg
from .integration import ConvergenceError, OperatorPath, Partition
from .lcs_core import SeminormFamily, as_vector, unit
from .operators import BoundedOp, DiagonalGenerator, DomainPolicy
from .semigroups import Semigroup
from .semivariation import UnboundedSemivariation, sv_estimate

SCHEMA_VERSION = 1
TASKS = ("solve", "sv", "maxreg", "admissible", "travis", "baillon_demo")
# excluded when comparing reports for determinism
NONDETERMINISTIC_KEYS = ("timestamp", "wall_time")

_number = {"type": "number"}
_pos = {"type": "number", "exclusiveMinimum": 0}
_vector = {"type": "array", "items": {"anyOf": [
    _number, {"type": "array", "items": _number, "minItems": 2, "maxItems": 2}]}}

SCHEMA: dict = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "cmaxreg scenario",
    "type": "object",
    "required": ["schema_version", "space", "generator", "horizon", "tasks"],
    "additionalProperties": False,
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "name": {"type": "string"},
        "seed": {"type": "integer", "minimum": 0},
        "space": {
            "type": "object",
            "required": ["dim"],
            "additionalProperties": False,
            "properties": {
                "dim": {"type": "integer", "minimum": 1},
                "seminorms": {
                    "type": "object",
                    "required": ["kind"],
                    "additionalProperties": False,
                    "properties": {
                        "kind": {"enum": ["sup", "prefixes", "beta0", "custom"]},
                        "scales": {"type": "array", "items": _pos, "minItems": 1},
                        "weights": {"type": "array", "items": {"type": "array", "items": _number}},
                        "labels": {"type": "array", "items": {"type": "string"}},
                    },
                },
                "envelope": {"anyOf": [{"enum": ["linf", "c0"]}, {"type": "array", "items": _number}]},
            },
        },
        "generator": {
            "type": "object",
            "required": ["kind"],
            "additionalProperties": False,
            "properties": {
                "kind": {"enum": ["linear", "rotation", "list", "constant", "matrix"]},
                "params": {"type": "object"},
                "omega": {"type": ["number", "null"]},
            },
        },
        "control": {
            "type": "object",
            "required": ["kind"],
            "additionalProperties": False,
            "properties": {
                "kind": {"enum": ["identity", "zero", "diagonal", "dense", "extension"]},
                "values": _vector,
                "matrix": {"type": "array", "items": {"type": "array", "items": _number}},
                "codomain": {"enum": ["X", "Xminus1"]},
            },
        },
        "forcing": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "f": {"type": "object", "required": ["kind"]},
                "x0": {"anyOf": [_vector, {"type": "object", "required": ["unit"],
                                           "properties": {"unit": {"type": "integer", "minimum": 1}}}]},
                "battery": {
                    "type": "object",
                    "additionalProperties": False,
                    "properties": {
                        "sin_max_k": {"type": "integer", "minimum": 0},
                        "travis_levels": {"type": "integer", "minimum": 0},
                        "random_count": {"type": "integer", "minimum": 0},
                    },
                },
            },
        },
        "horizon": _pos,
        "tolerances": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"quadrature": _pos, "sv_rel": _pos, "residual": _pos},
        },
        "budget": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"sv_cells": {"type": "integer", "minimum": 1}},
        },
        "domain_policy": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"non_member_slope": _number, "member_slope": _number,
                           "min_dim": {"type": "integer", "minimum": 1}, "bound_slack": _number},
        },
        "tasks": {"type": "array", "items": {"enum": list(TASKS)}, "minItems": 1},
        "task_options": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "solve": {"type": "object", "additionalProperties": False, "properties": {
                    "times": {"type": "array", "items": {"type": "number", "minimum": 0}},
                    "points": {"type": "integer", "minimum": 2},
                    "h": _pos, "mode": {"enum": ["strict", "classical"]}}},
                "sv": {"type": "object", "additionalProperties": False, "properties": {
                    "method": {"enum": ["auto", "sign_enum", "phase_grid", "random_ball"]}}},
                "maxreg": {"type": "object", "additionalProperties": False, "properties": {
                    "grid_level": {"type": "integer", "minimum": 3}}},
                "admissible": {"type": "object", "additionalProperties": False, "properties": {
                    "grid_level": {"type": "integer", "minimum": 3},
                    "transfer": {"type": "object", "additionalProperties": {"type": "object"}}}},
                "travis": {"type": "object", "additionalProperties": False, "properties": {
                    "cells": {"type": "integer", "minimum": 1},
                    "eps_ladder": {"type": "array", "items": _pos, "minItems": 1},
                    "q": {"type": "string"}, "p": {"type": "string"}}},
                "baillon_demo": {"type": "object", "additionalProperties": False, "properties": {
                    "dims": {"type": "array", "items": {"type": "integer", "minimum": 1}, "minItems": 2}}},
            },
        },
    },
}


class ScenarioError(ValueError):
    """The scenario file does not parse or does not match the schema."""


# ---------------------------------------------------------------------------
# loading

def validate(data: dict) -> None:
    errors = sorted(jsonschema.Draft202012Validator(SCHEMA).iter_errors(data), key=lambda e: e.json_path)
    if errors:
        lines = [f"{e.json_path}: {e.message}" for e in errors]
        raise ScenarioError("scenario does not match the schema:\n  " + "\n  ".join(lines))


def load_scenario(path: str | os.PathLike) -> dict:
    text = Path(path).read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    validate(data)
    return data


def _complex_vector(raw, dim: int) -> np.ndarray:
    arr = np.asarray(raw, dtype=float) if all(not isinstance(v, list) for v in raw) else np.array(
        [complex(*v) if isinstance(v, list) else complex(v) for v in raw])
    return as_vector(arr, dim)


@dataclass
class Model:
    """Objects built from a scenario."""

    data: dict
    family: SeminormFamily
    A: DiagonalGenerator | None
    T: Semigroup
    B: BoundedOp
    r: float
    tol: float
    sv_rel: float
    residual_tol: float
    sv_budget: int
    policy: DomainPolicy
    seed: int
    envelope: Any

    @property
    def dim(self) -> int:
        return self.T.dim

    def options(self, task: str) -> dict:
        return self.data.get("task_options", {}).get(task, {})

    def require_A(self) -> DiagonalGenerator:
        if self.A is None:
            raise ValueError("this task needs a diagonal generator")
        return self.A

    def battery(self, lifted: BoundedOp | None = None) -> list[integ.GridFunction]:
        opts = self.data.get("forcing", {}).get("battery", {})
        return reg.probe_battery(self.T, lifted or self.B, self.r, self.envelope, seed=self.seed, **opts)


def build_family(spec: dict | None, dim: int) -> SeminormFamily:
    spec = spec or {"kind": "sup"}
    kind = spec["kind"]
    if kind == "sup":
        return SeminormFamily.sup(dim)
    if kind == "prefixes":
        return SeminormFamily.prefixes(dim)
    if kind == "beta0":
        return SeminormFamily.beta0(dim, spec.get("scales", (1.0, 4.0, 16.0)))
    weights = [np.asarray(w, dtype=float) for w in spec.get("weights", [])]
    labels = spec.get("labels") or [f"p{j}" for j in range(len(weights))]
    return SeminormFamily(tuple(weights), tuple(labels))


def build_generator(spec: dict, dim: int) -> DiagonalGenerator | np.ndarray:
    kind, params = spec["kind"], dict(spec.get("params", {}))
    if kind == "linear":
        return DiagonalGenerator.linear(dim, params.get("slope", -1.0), params.get("offset", 0.0))
    if kind == "rotation":
        return DiagonalGenerator.rotation(dim, params.get("theta", 1.0), params.get("shift", 0.0))
    if kind == "constant":
        c = params.get("c", -1.0)
        return DiagonalGenerator.constant(dim, complex(*c) if isinstance(c, list) else c)
    if kind == "list":
        return DiagonalGenerator.from_list(_complex_vector(params["values"], dim))
    matrix = np.asarray(params["matrix"], dtype=float)
    if matrix.shape != (dim, dim):
        raise ScenarioError(f"generator matrix must be {dim}x{dim}")
    return matrix


def build_control(spec: dict | None, A: DiagonalGenerator | None, dim: int) -> BoundedOp:
    spec = spec or {"kind": "identity"}
    kind = spec["kind"]
    codomain = spec.get("codomain", "X")
    if kind == "identity":
        return BoundedOp.identity(dim, codomain)
    if kind == "zero":
        return BoundedOp.zero(dim, codomain)
    if kind == "diagonal":
        return BoundedOp.diagonal(_complex_vector(spec["values"], dim), codomain)
    if kind == "dense":
        return BoundedOp.dense(np.asarray(spec["matrix"], dtype=float), codomain)
    if A is None:
        raise ScenarioError("control kind 'extension' needs a diagonal generator")
    return BoundedOp.extension_of(A)


def build_model(data: dict, overrides: dict | None = None) -> Model:
    """Instantiate the operators described by a validated scenario."""
    dim = data["space"]["dim"]
    gen = build_generator(data["generator"], dim)
    omega = data["generator"].get("omega")
    T = Semigroup(gen, omega)
    A = gen if isinstance(gen, DiagonalGenerator) else None
    tols = data.get("tolerances", {})
    return Model(
        data=data,
        family=build_family(data["space"].get("seminorms"), dim),
        A=A,
        T=T,
        B=build_control(data.get("control"), A, dim),
        r=float(data["horizon"]),
        tol=float(tols.get("quadrature", 1e-8)),
        sv_rel=float(tols.get("sv_rel", 1e-6)),
        residual_tol=float(tols.get("residual", 1e-6)),
        sv_budget=int(data.get("budget", {}).get("sv_cells", 1024)),
        policy=DomainPolicy(**data.get("domain_policy", {})),
        seed=int(data.get("seed", 0)),
        envelope=data["space"].get("envelope", "linf"),
    )


# ---------------------------------------------------------------------------
# tasks

def _seminorm_series(prefix: str, ts, values, family: SeminormFamily) -> list[list]:
    rows = []
    for t, v in zip(ts, values):
        for label, q in zip(family.labels, family.evaluate(v)):
            rows.append([float(t), f"{prefix}:{label}", float(q)])
    return rows


def _x0(model: Model) -> np.ndarray:
    raw = model.data.get("forcing", {}).get("x0", {"unit": 1})
    if isinstance(raw, dict):
        return unit(raw["unit"], model.dim)
    return _complex_vector(raw, model.dim)


def _forcing(model: Model) -> integ.GridFunction:
    spec = model.data.get("forcing", {}).get("f", {"kind": "zero"})
    return integ.from_spec(spec, model.dim, 0.0, model.r)


def task_solve(model: Model) -> dict:
    A = model.require_A()
    opts = model.options("solve")
    ts = np.asarray(opts.get("times") or np.linspace(0.0, model.r, opts.get("points", 33)))
    if np.any(ts > model.r):
        raise ValueError("solve times must lie in [0, horizon]")
    h = opts.get("h", 1e-3)
    mode = opts.get("mode", "strict")
    g = _forcing(model).mapped(model.B)
    u = reg.MildSolution(model.T, _x0(model), g, model.tol)
    us = u.values(ts)
    conv = reg.MildSolution(model.T, np.zeros(model.dim), g, model.tol).values(ts)
    gsup = g.sup_seminorm()
    certs = [reg.in_domain(A, x, model.policy, bound=reg.uniform_bound(A, t, 0.0, gsup)).verdict
             for t, x in zip(ts, conv)]
    residuals = []
    for t in ts:
        try:
            res = reg.strict_residual(u, A, float(t), h, mode, model.family)
        except ValueError:
            continue
        residuals.append({"t": float(t), "stencil": res.stencil, "skipped": res.skipped,
                          "is_solution": res.is_solution,
                          "max": None if res.values is None else res.max})
    try:
        integrated = reg.integrated_residual(u, A, model.r, tol=model.tol)
    except reg.DomainError as exc:
        integrated = {"error": str(exc)}
    series = _seminorm_series("u", ts, us, model.family)
    series += _seminorm_series("Aconv", ts, conv * A.m, model.family)
    return {
        "times": ts.tolist(),
        "integrated_residual": integrated,
        "integrated_ok": isinstance(integrated, float) and integrated <= model.residual_tol,
        "strict_residuals": residuals,
        "a_convolution_certificates": certs,
        "series": series,
    }


def task_sv(model: Model) -> dict:
    method = model.options("sv").get("method", "auto")
    ests = reg.path_semivariation(model.T, model.B, model.r, model.family, model.sv_budget,
                                  model.sv_rel, method, model.seed)
    return {
        "estimates": {k: e.to_dict() for k, e in ests.items()},
        "ladders": {k: [[m, v, e.kind] for m, v in e.partition_trace] for k, e in ests.items()},
    }


def _verdict_result(verdict: reg.RegularityVerdict) -> dict:
    out = verdict.to_dict()
    out["ladders"] = {k: [[m, v, e.kind] for m, v in e.partition_trace]
                      for k, e in verdict.sv_certificates.items()}
    return out


def task_maxreg(model: Model) -> dict:
    opts = model.options("maxreg")
    verdict = reg.maxreg_check(
        model.T, model.require_A(), model.B, model.r, model.battery(), model.tol, model.family,
        opts.get("grid_level", reg.GRID_LEVEL), model.sv_budget, model.policy, model.envelope,
        model.seed)
    return _verdict_result(verdict)


def task_admissible(model: Model) -> dict:
    A = model.require_A()
    opts = model.options("admissible")
    B = model.B if model.B.codomain == "Xminus1" else BoundedOp.extension_of(A)
    transfer = {k: build_control(v, A, model.dim) for k, v in opts.get("transfer", {}).items()}
    probes = model.battery(reg.lift_control(A, B))
    verdict = reg.admissibility_check(
        model.T, A, B, model.r, probes, transfer or None, model.tol, model.family,
        opts.get("grid_level", reg.GRID_LEVEL), model.sv_budget, model.policy, model.envelope,
        model.seed)
    out = _verdict_result(verdict)
    # a control into X is replaced by the default A_{-1}
    out["control"] = "scenario" if B is model.B else "extension"
    return out


def task_travis(model: Model) -> dict:
    opts = model.options("travis")
    fam = model.family
    q = fam[opts.get("q", fam.labels[0])]
    p = fam[opts.get("p", fam.labels[0])]
    d = Partition.uniform(0.0, model.r, opts.get("cells", 4))
    ext = reg.travis_extract(model.T, model.require_A(), model.B, model.r, d,
                             opts.get("eps_ladder", [1e-1, 1e-2, 1e-3]), q, p,
                             probes=model.battery(), tol=min(model.tol, 1e-10))
    return {"sv_sum": ext.sv_sum, "partition_sum": ext.partition_sum,
            "operator_bound_C": ext.operator_bound_C, "gap": ext.gap, "rows": ext.rows}


def task_baillon_demo(model: Model) -> dict:
    A = model.require_A()
    dims = model.options("baillon_demo").get("dims", [8, 16, 32])
    rows, ladders = [], {}
    for N in dims:
        T = Semigroup(A.truncate(N))
        path = OperatorPath.forward(T, 0.0, model.r)
        est = sv_estimate(path, 0.0, model.r, budget=model.sv_budget, rel_tol=model.sv_rel,
                          seed=model.seed)
        rows.append({"dim": N, "value": est.value, "per_dim": est.value / (N * model.r),
                     "converged": est.converged, "growth_slope": est.growth_slope,
                     "kind": est.kind})
        ladders[f"N{N}"] = [[m, v, est.kind] for m, v in est.partition_trace]
    vals = np.array([r_["value"] for r_ in rows])
    slope = float(np.polyfit(np.log(dims), np.log(np.maximum(vals, 1e-300)), 1)[0])
    return {"rows": rows, "dim_slope": slope, "ladders": ladders}


TASK_RUNNERS: dict[str, Callable[[Model], dict]] = {
    "solve": task_solve,
    "sv": task_sv,
    "maxreg": task_maxreg,
    "admissible": task_admissible,
    "travis": task_travis,
    "baillon_demo": task_baillon_demo,
}


# ---------------------------------------------------------------------------
# reports

def _versions() -> dict:
    out = {"python": platform.python_version()}
    for pkg in ("cmaxreg", "numpy", "scipy"):
        try:
            out[pkg] = metadata.version(pkg)
        except metadata.PackageNotFoundError:
            out[pkg] = "unknown"
    return out


@dataclass
class Report:
    scenario: dict
    results: dict
    seed: int
    versions: dict = field(default_factory=_versions)
    wall_time: float = 0.0
    timestamp: str = ""

    @property
    def failed_tasks(self) -> list[str]:
        return [k for k, v in self.results.items() if "error" in v]

    def to_dict(self) -> dict:
        return {"schema_version": SCHEMA_VERSION, "scenario": self.scenario, "seed": self.seed,
                "results": self.results, "versions": self.versions,
                "wall_time": self.wall_time, "timestamp": self.timestamp}

    @classmethod
    def from_dict(cls, data: dict) -> "Report":
        return cls(data["scenario"], data["results"], data["seed"], data["versions"],
                   data["wall_time"], data["timestamp"])

    def numerics(self) -> dict:
        """Everything that must be reproducible bit-for-bit."""
        return {k: v for k, v in self.to_dict().items() if k not in NONDETERMINISTIC_KEYS}


def _jsonify(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonify(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonify(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonify(obj.tolist())
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


def run_data(data: dict) -> Report:
    """Run every task of an already validated scenario."""
    start = time.perf_counter()
    try:
        model = build_model(data)
    except (ValueError, KeyError) as exc:
        raise ScenarioError(f"cannot build the model: {exc}") from exc
    results = {}
    for task in data["tasks"]:
        try:
            results[task] = _jsonify(TASK_RUNNERS[task](model))
        except (ValueError, ConvergenceError, UnboundedSemivariation, ArithmeticError) as exc:
            results[task] = {"error": f"{type(exc).__name__}: {exc}"}
    return Report(data, results, model.seed,
                  wall_time=time.perf_counter() - start,
                  timestamp=datetime.now(timezone.utc).isoformat(timespec="seconds"))


def run_scenario(path: str | os.PathLike) -> Report:
    return run_data(load_scenario(path))


def _atomic_write(path: Path, text: str) -> None:
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise


def _csv_text(header: list[str], rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def report_json(report: Report) -> str:
    return json.dumps(report.to_dict(), indent=2, sort_keys=True)


def emit_report(report: Report, out_dir: str | os.PathLike,
                formats: tuple[str, ...] = ("json", "csv")) -> list[Path]:
    """Write ``report.json`` and one CSV per series / SV ladder; returns the paths written."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    if "json" in formats:
        path = out / "report.json"
        _atomic_write(path, report_json(report) + "\n")
        written.append(path)
    if "csv" in formats:
        for task, res in report.results.items():
            if "series" in res:
                path = out / f"{task}_series.csv"
                _atomic_write(path, _csv_text(["t", "q_label", "value"], res["series"]))
                written.append(path)
            for label, ladder in res.get("ladders", {}).items():
                path = out / f"{task}_sv_{label}.csv"
                _atomic_write(path, _csv_text(["mesh", "sv_value", "kind"], ladder))
                written.append(path)
    return written
