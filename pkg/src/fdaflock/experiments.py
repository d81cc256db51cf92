"""Batch experiments: paired model comparisons and parameter sweeps.

Each cell is an independent run; cells may execute in a process pool and the
results are identical for any worker count because every cell's seed is
derived from the master seed and its index alone.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .analysis import analyze, build_graph
from .core import DegeneracyError
from .sim import ScenarioConfig, derive_seed, run

ARMS = (("reactive", "nominal"), ("fda", "nominal"), ("reactive", "perturbed"), ("fda", "perturbed"))
SERIES_FIELDS = ("gamma", "d_min", "d_mean", "d_max", "S_cum")
SWEEP_PARAMS = ("theta", "t_ph", "tau", "r", "delta", "n")
GAMMA_LEVEL = 0.9


def run_cell(config: ScenarioConfig) -> dict:
    """Run one config and return its summary plus metric series as plain data."""
    try:
        rec = run(config, keep_states=False)
    except DegeneracyError as exc:
        rec = exc.record
        out = rec.summary() if rec is not None else {"error": str(exc)}
        out["error"] = str(exc)
        out["status"] = "degenerate"
        out["series"] = None
        return out
    out = rec.summary()
    out["status"] = "ok"
    out["series"] = {
        "t": np.array([s.t for s in rec.samples]),
        **{f: np.array([getattr(s, f) for s in rec.samples]) for f in SERIES_FIELDS},
    }
    out["final_positions"] = rec.final_state.positions
    return out


def map_cells(configs, workers: int = 1) -> list[dict]:
    if workers <= 1 or len(configs) <= 1:
        return [run_cell(c) for c in configs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(run_cell, configs))


def _stats(values) -> dict:
    a = np.asarray([v for v in values if v is not None and not (isinstance(v, float) and math.isnan(v))], dtype=float)
    if a.size == 0:
        return {"median": float("nan"), "q25": float("nan"), "q75": float("nan")}
    # inf (e.g. alignment level never reached) must survive interpolation
    big = 1e300
    q = np.percentile(np.where(np.isinf(a), np.sign(a) * big, a), [25, 50, 75])
    q = np.where(np.abs(q) >= big / 10, np.sign(q) * np.inf, q)
    return {"median": float(q[1]), "q25": float(q[0]), "q75": float(q[2])}


@dataclass
class ComparisonResult:
    seeds: list[int]
    runs: dict = field(default_factory=dict)      # (model, mode) -> list of cell dicts
    summary: dict = field(default_factory=dict)   # "model/mode" -> metric stats
    series: dict = field(default_factory=dict)    # "model/mode" -> median/IQR arrays
    claims: dict = field(default_factory=dict)


def compare(base: ScenarioConfig, k: int = 20, workers: int = 1) -> ComparisonResult:
    """Reactive vs FDA under nominal and perturbed perception over ``k`` seeds.

    The master seed is ``base.seed``; seed ``i`` is shared by all four arms.
    """
    if k < 1:
        raise ValueError("need at least one seed")
    seeds = [derive_seed(base.seed, i) for i in range(k)]
    configs, keys = [], []
    for model, mode in ARMS:
        for s in seeds:
            configs.append(base.replace(model=model, mode=mode, seed=s))
            keys.append((model, mode))
    cells = map_cells(configs, workers)
    res = ComparisonResult(seeds)
    for key, cell in zip(keys, cells):
        res.runs.setdefault(key, []).append(cell)

    for (model, mode), cells in res.runs.items():
        name = f"{model}/{mode}"
        ok = [c for c in cells if c["status"] == "ok"]
        res.summary[name] = {
            "runs": len(cells),
            "failed": len(cells) - len(ok),
            "final_gamma": _stats([c["final_gamma"] for c in ok]),
            f"time_to_gamma_{GAMMA_LEVEL}": _stats([c[f"time_to_gamma_{GAMMA_LEVEL}"] for c in ok]),
            "path_length": _stats([c["path_length"] for c in ok]),
            "min_distance": _stats([c["min_distance"] for c in ok]),
        }
        if ok:
            t = ok[0]["series"]["t"]
            ser = {"t": t}
            for f in SERIES_FIELDS:
                stack = np.stack([c["series"][f] for c in ok])
                q25, med, q75 = np.percentile(stack, [25, 50, 75], axis=0)
                ser[f"{f}_median"], ser[f"{f}_q25"], ser[f"{f}_q75"] = med, q25, q75
            res.series[name] = ser

    for model in ("reactive", "fda"):
        nom, pert = res.runs[(model, "nominal")], res.runs[(model, "perturbed")]
        drops = [a["final_gamma"] - b["final_gamma"] for a, b in zip(nom, pert)
                 if a["status"] == "ok" and b["status"] == "ok"]
        res.summary[f"{model}/degradation"] = {"gamma_drop": _stats(drops)}
    res.claims = evaluate_claims(res)
    return res


def evaluate_claims(res: ComparisonResult) -> dict:
    """Directional checks of the headline comparisons, as plain booleans."""
    s = res.summary
    med = lambda arm, key: s[arm][key]["median"]  # noqa: E731
    ttg = f"time_to_gamma_{GAMMA_LEVEL}"
    all_cells = [c for cells in res.runs.values() for c in cells]
    floor = min((c.get("min_distance", float("inf")) for c in all_cells), default=float("inf"))
    ratio = med("fda/nominal", "path_length") / med("reactive/nominal", "path_length")
    return {
        "nominal_final_gamma_both_ge_0.9": bool(med("reactive/nominal", "final_gamma") >= 0.9
                                                and med("fda/nominal", "final_gamma") >= 0.9),
        "nominal_fda_faster_to_gamma_0.9": bool(med("fda/nominal", ttg) < med("reactive/nominal", ttg)),
        "nominal_path_ratio": float(ratio),
        "nominal_path_ratio_gt_1.1": bool(ratio > 1.1),
        "perturbed_fda_higher_final_gamma": bool(med("fda/perturbed", "final_gamma")
                                                 > med("reactive/perturbed", "final_gamma")),
        "fda_smaller_degradation": bool(s["fda/degradation"]["gamma_drop"]["median"]
                                        < s["reactive/degradation"]["gamma_drop"]["median"]),
        "no_degeneracy": all(c["status"] == "ok" for c in all_cells),
        "observed_distance_floor": float(floor),
    }


def sweep_configs(base: ScenarioConfig, param: str, values, k: int, models=("fda",),
                  modes=("nominal", "perturbed")):
    """Grid of (mode, model, value, seed index) cells; validates the parameter."""
    if param not in SWEEP_PARAMS:
        raise ValueError(f"cannot sweep {param!r}; choose from {SWEEP_PARAMS}")
    values = list(values)
    if not values:
        raise ValueError("values list is empty")
    if k < 1:
        raise ValueError("need at least one seed")
    cells = []
    for mode in modes:
        for model in models:
            for v in values:
                v = int(v) if param == "n" else float(v)
                for i in range(k):
                    cfg = base.replace(**{param: v}, model=model, mode=mode, seed=derive_seed(base.seed, i))
                    cells.append(({"param": param, "value": v, "mode": mode, "model": model,
                                   "seed_index": i}, cfg))
    return cells


def sweep(base: ScenarioConfig, param: str, values, k: int = 5, models=("fda",),
          modes=("nominal", "perturbed"), workers: int = 1) -> list[dict]:
    """Long-format rows, one per cell; failures are recorded, not raised.

    Each row also carries a linearized-stability check on the final
    configuration's graph at the cell's theta and t_ph with per-agent weights.
    """
    cells = sweep_configs(base, param, values, k, models, modes)
    results = map_cells([c for _, c in cells], workers)
    rows = []
    for (meta, cfg), out in zip(cells, results):
        row = dict(meta)
        row.update({
            "seed": cfg.seed,
            "status": out["status"],
            "final_gamma": out.get("final_gamma", float("nan")),
            "path_length": out.get("path_length", float("nan")),
            "min_distance": out.get("min_distance", float("nan")),
            f"time_to_gamma_{GAMMA_LEVEL}": out.get(f"time_to_gamma_{GAMMA_LEVEL}", float("nan")),
            "linear_stable": "",
            "slowest_rate": float("nan"),
            "error": out.get("error") or "",
            "_final_positions": out.get("final_positions"),
        })
        rows.append(row)
    _attach_stability(rows, cells)
    return rows


def _attach_stability(rows, cells) -> None:
    for row, (_, cfg) in zip(rows, cells):
        pos = row.pop("_final_positions", None)
        if row["status"] != "ok" or pos is None:
            continue
        graph = build_graph(pos, cfg.params.r)
        rep = analyze(graph, cfg.params.theta, "per-agent", cfg.params.t_ph)
        row["linear_stable"] = rep.stable
        row["slowest_rate"] = rep.slowest_rate
        if not rep.stable:
            row["status"] = "unstable"
