"""Experiment harness: run a set of algorithms over seeds (and optionally
a sweep over adversary counts), then emit a deterministic results.csv
plus a summary.json with per-cell means and standard errors.

results.csv carries only reproducible columns, so re-running an
identical configuration yields a byte-identical file; wall-clock
statistics live in summary.json.
"""

from __future__ import annotations

import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .exact import solve_exact
from .geodata import build_location_instance, ingest_checkins, read_friendships
from .heuristics import SearchParams, SolveResult, rand_plus, solve
from .instance import DisclosureModel, Instance, InstanceError, load_instance
from .relaxation import round_and_repair, solve_lp_relaxation
from .synth import SynthConfig, generate_instance

ALGORITHMS = ("rand+", "lp", "ilp", "greedy", "greedyl", "grasp", "graspl")
LP_FAMILIES = ("step", "linear")

FULL_DISCLOSURE_THRESHOLD = 1.0 - 1e-9

CSV_COLUMNS = (
    "algorithm", "seed", "k", "t", "num_entries", "num_properties",
    "utility", "disclosure", "objective", "fully_disclosed",
)

WORKERS_ENV = "PRIVPART_WORKERS"


@dataclass
class ExperimentConfig:
    source: dict
    algorithms: list[str]
    seeds: list[int]
    output_dir: str
    params: dict = field(default_factory=dict)
    k_values: list[int] | None = None

    def __post_init__(self):
        if not self.algorithms:
            raise InstanceError("config needs at least one algorithm")
        for name in self.algorithms:
            if name not in ALGORITHMS:
                raise InstanceError(f"unknown algorithm {name!r}")
        if not self.seeds:
            raise InstanceError("config needs at least one seed")
        kind = _source_kind(self.source)
        if kind == "file" and self.k_values is not None:
            raise InstanceError("k_values sweep requires a synth or geodata source")

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        doc = json.loads(text)
        return cls(
            source=doc["source"],
            algorithms=list(doc["algorithms"]),
            seeds=list(doc["seeds"]),
            output_dir=doc["output_dir"],
            params=doc.get("params", {}),
            k_values=doc.get("k_values"),
        )


def _source_kind(source: dict) -> str:
    kinds = [k for k in ("file", "synth", "geodata") if k in source]
    if len(kinds) != 1:
        raise InstanceError("source must contain exactly one of file|synth|geodata")
    return kinds[0]


def _materialize(source: dict, k: int | None) -> Instance:
    kind = _source_kind(source)
    if kind == "file":
        return load_instance(source["file"])
    if kind == "synth":
        spec = dict(source["synth"])
        model = DisclosureModel(spec.pop("family", "linear"), spec.pop("aggregation", "average"))
        lam = spec.pop("lambda", 1.0)
        tau = spec.pop("tau_I", 0.0)
        if k is not None:
            spec["k"] = k
        return generate_instance(SynthConfig(**spec), model=model, lam=lam, tau=tau)
    spec = dict(source["geodata"])
    with open(spec["checkins"], "r", encoding="utf-8") as fh:
        ingest = ingest_checkins(fh)
    with open(spec["friends"], "r", encoding="utf-8") as fh:
        friends = read_friendships(fh)
    return build_location_instance(
        ingest.entries,
        friends,
        k=k if k is not None else spec.get("k", 2),
        t=spec.get("t", 1),
        seed=spec.get("seed", 0),
        lam=spec.get("lambda", 1.0),
        tau=spec.get("tau_I", 0.0),
        max_users=spec.get("max_users"),
        max_edges=spec.get("max_edges"),
    )


def run_algorithm(name: str, instance: Instance, seed: int, overrides: dict | None = None) -> SolveResult:
    """Dispatch one benchmark cell with the conventional defaults:
    greedy variants run once, randomized variants repeat (r=10 for the
    searches, 100 restarts for the sampling baselines)."""
    o = dict(overrides or {})
    if name in ("lp", "ilp") and instance.model.family not in LP_FAMILIES:
        raise InstanceError(
            f"{name} supports step|linear families, not {instance.model.family!r}"
        )
    if name == "rand+":
        return rand_plus(instance, runs=o.get("restarts", 100), seed=seed)
    if name == "lp":
        frac = solve_lp_relaxation(instance)
        return round_and_repair(instance, frac, runs=o.get("restarts", 100), seed=seed)
    if name == "ilp":
        return solve_exact(instance, formulation=o.get("formulation", "tradeoff"))
    if name == "greedy":
        params = SearchParams("greedy", "global", r=o.get("r", 1), seed=seed)
    elif name == "grasp":
        params = SearchParams("grasp", "global", n=o.get("n", 5), r=o.get("r", 10), seed=seed)
    elif name == "greedyl":
        params = SearchParams("greedy", "myopic", r=o.get("r", 1), seed=seed)
    else:
        params = SearchParams(
            "grasp", "myopic", n=o.get("n", min(instance.k, 3)), r=o.get("r", 10), seed=seed
        )
    return solve(instance, params)


def count_fully_disclosed(result: SolveResult, threshold: float = FULL_DISCLOSURE_THRESHOLD) -> int:
    """Properties whose max-over-adversaries disclosure reaches 1."""
    return int(np.count_nonzero(result.per_property_disclosure >= threshold))


def disclosure_level_curve(result: SolveResult, thresholds) -> np.ndarray:
    """For each threshold, how many properties strictly exceed it;
    thresholds must be ascending and the counts are non-increasing."""
    thresholds = np.asarray(thresholds, dtype=np.float64)
    if thresholds.size and np.any(np.diff(thresholds) < 0):
        raise InstanceError("thresholds must be sorted ascending")
    per_prop = result.per_property_disclosure
    return np.array([int(np.count_nonzero(per_prop > th)) for th in thresholds])


def run_experiment(cfg: ExperimentConfig) -> dict:
    """Execute every (algorithm, k, seed) cell and write the report files.
    Returns {"rows": ..., "results_csv": path, "summary_json": path}."""
    out_dir = Path(cfg.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    ks = cfg.k_values if cfg.k_values is not None else [None]

    instances = {k: _materialize(cfg.source, k) for k in ks}
    cells = [
        (alg, k, seed)
        for alg in cfg.algorithms
        for k in ks
        for seed in cfg.seeds
    ]

    def run_cell(cell):
        alg, k, seed = cell
        inst = instances[k]
        result = run_algorithm(alg, inst, seed, cfg.params.get(alg))
        return cell, inst, result

    workers = max(1, int(os.environ.get(WORKERS_ENV, "1")))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(run_cell, cells))
    else:
        outcomes = [run_cell(c) for c in cells]

    rows = []
    walls = {}
    for (alg, k, seed), inst, result in outcomes:
        rows.append({
            "algorithm": alg,
            "seed": seed,
            "k": inst.k,
            "t": inst.t,
            "num_entries": inst.num_entries,
            "num_properties": inst.num_properties,
            "utility": result.objective.utility,
            "disclosure": result.objective.disclosure,
            "objective": result.objective.value,
            "fully_disclosed": count_fully_disclosed(result),
        })
        walls.setdefault((alg, inst.k), []).append(result.wall_time * 1000.0)
    rows.sort(key=lambda r: (r["algorithm"], r["k"], r["seed"]))

    results_csv = out_dir / "results.csv"
    with open(results_csv, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(CSV_COLUMNS) + "\n")
        for r in rows:
            fh.write(",".join(_format_cell(r[c]) for c in CSV_COLUMNS) + "\n")

    summary = {}
    for (alg, k), wall in sorted(walls.items()):
        cell_rows = [r for r in rows if r["algorithm"] == alg and r["k"] == k]
        entry = {"cells": len(cell_rows), "wall_ms_mean": float(np.mean(wall))}
        for metric in ("utility", "disclosure", "objective"):
            vals = np.array([r[metric] for r in cell_rows])
            entry[f"{metric}_mean"] = float(vals.mean())
            entry[f"{metric}_stderr"] = (
                float(vals.std(ddof=1) / np.sqrt(vals.size)) if vals.size > 1 else 0.0
            )
        summary[f"{alg},k={k}"] = entry
    summary_json = out_dir / "summary.json"
    with open(summary_json, "w", encoding="utf-8") as fh:
        json.dump(summary, fh, indent=1, sort_keys=True)
        fh.write("\n")

    return {"rows": rows, "results_csv": str(results_csv), "summary_json": str(summary_json)}


def _format_cell(value) -> str:
    if isinstance(value, float):
        return format(value, ".12g")
    return str(value)
