"""Command-line entry point: ``fdaflock {run,compare,sweep,analyze}``.

Every command writes plain files (CSV, JSON, INI) into ``--out`` plus a
``manifest.json`` listing them. Exit codes: 0 success, 1 invalid input,
2 degenerate simulation, 3 I/O failure.
"""

from __future__ import annotations

import argparse
import csv
import datetime as _dt
import hashlib
import json
import logging
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import CONVENTIONS, analyze, build_graph, graph_from_adjacency
from .config import config_hash, dumps_config, load_config
from .core import ConfigError, DegeneracyError
from .experiments import GAMMA_LEVEL, SERIES_FIELDS, compare, sweep
from .sim import ScenarioConfig, initialize, run

log = logging.getLogger("fdaflock")

EXIT_OK, EXIT_VALIDATION, EXIT_DEGENERATE, EXIT_IO = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_VALIDATION, f"{self.prog}: error: {message}\n")


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return str(x)


def metrics_columns(m: int) -> list[str]:
    return ["t", "gamma", "d_min", "d_mean", "d_max"] + [f"centroid_{k}" for k in range(m)] + ["S_cum", "components"]


def write_metrics_csv(record, path) -> None:
    m = record.config.params.m
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(metrics_columns(m))
        for s in record.samples:
            w.writerow([_fmt(v) for v in (s.t, s.gamma, s.d_min, s.d_mean, s.d_max, *s.centroid, s.S_cum, s.components)])


def write_trajectory_csv(record, path) -> None:
    m = record.config.params.m
    cols = ["t", "agent"] + [f"{q}_{k}" for q in ("p", "v", "u") for k in range(m)]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(cols)
        for st in record.states:
            for i in range(st.n):
                w.writerow([_fmt(st.time), i] + [_fmt(x) for x in (*st.positions[i], *st.velocities[i], *st.controls[i])])


def write_rows(rows, path, columns=None) -> None:
    columns = columns or list(rows[0].keys()) if rows else (columns or [])
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            w.writerow([_fmt(row.get(c, "")) for c in columns])


def _json_default(o):
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, (np.floating, np.integer, np.bool_)):
        return o.item()
    raise TypeError(type(o).__name__)


def _clean(o):
    # JSON has no inf/nan; write them as strings
    if isinstance(o, dict):
        return {k: _clean(v) for k, v in o.items()}
    if isinstance(o, (list, tuple)):
        return [_clean(v) for v in o]
    if isinstance(o, (float, np.floating)) and not math.isfinite(o):
        return str(float(o))
    return o


def write_json(obj, path) -> None:
    Path(path).write_text(json.dumps(_clean(obj), indent=2, sort_keys=True, default=_json_default) + "\n")


def write_manifest(out: Path, command: str, cfg: ScenarioConfig | None, seeds, files, extra=None) -> None:
    entries = []
    for f in files:
        data = (out / f).read_bytes()
        entries.append({"path": f, "sha256": hashlib.sha256(data).hexdigest(), "bytes": len(data)})
    manifest = {
        "tool": "fdaflock",
        "version": __version__,
        "command": command,
        "config_hash": config_hash(cfg) if cfg is not None else None,
        "seeds": list(seeds),
        "files": entries,
        "created": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
    }
    if extra:
        manifest.update(extra)
    write_json(manifest, out / "manifest.json")


def _load(args) -> ScenarioConfig:
    cfg = load_config(args.config) if args.config else ScenarioConfig()
    changes = {}
    if getattr(args, "seed", None) is not None:
        changes["seed"] = args.seed
    if getattr(args, "model", None):
        changes["model"] = args.model
    if getattr(args, "mode", None):
        changes["mode"] = args.mode
    if getattr(args, "record_every", None):
        changes["record_every"] = args.record_every
    for key in ("theta", "t_ph", "tau", "T"):
        val = getattr(args, key, None)
        if val is not None:
            changes[key] = val
    return cfg.replace(**changes) if changes else cfg


def _floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise ConfigError("values", f"not a comma-separated list of numbers: {text!r}") from None


def cmd_run(args) -> int:
    cfg = _load(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    files = ["config.ini", "metrics.csv", "summary.json"]
    (out / "config.ini").write_text(dumps_config(cfg))
    status = EXIT_OK
    try:
        rec = run(cfg, keep_states=args.dump_trajectories)
    except DegeneracyError as exc:
        if exc.record is None:
            raise
        log.error("%s", exc)
        rec = exc.record
        status = EXIT_DEGENERATE
    write_metrics_csv(rec, out / "metrics.csv")
    write_json(rec.summary(), out / "summary.json")
    if args.dump_trajectories:
        write_trajectory_csv(rec, out / "trajectory.csv")
        files.append("trajectory.csv")
    write_manifest(out, "run", cfg, [cfg.seed], files, {"wall_time_s": rec.wall_time})
    if rec.samples and rec.samples[-1].isolated:
        log.warning("%d agent(s) isolated at the final step; excluded from gamma", rec.samples[-1].isolated)
    log.info("%s/%s seed=%d final gamma=%.4f S=%.3f m", cfg.params.model, cfg.mode, cfg.seed,
             rec.final_gamma, rec.path_length)
    return status


def cmd_compare(args) -> int:
    cfg = _load(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    res = compare(cfg, k=args.seeds, workers=args.workers)
    (out / "config.ini").write_text(dumps_config(cfg))
    files = ["config.ini", "compare_runs.csv", "compare_summary.csv", "compare.json"]

    run_rows = []
    for (model, mode), cells in res.runs.items():
        for i, c in enumerate(cells):
            run_rows.append({"model": model, "mode": mode, "seed_index": i, "seed": res.seeds[i],
                             "status": c["status"], "final_gamma": c.get("final_gamma"),
                             "path_length": c.get("path_length"), "min_distance": c.get("min_distance"),
                             f"time_to_gamma_{GAMMA_LEVEL}": c.get(f"time_to_gamma_{GAMMA_LEVEL}"),
                             "error": c.get("error") or ""})
    write_rows(run_rows, out / "compare_runs.csv")

    summary_rows = []
    for arm, stats in res.summary.items():
        for metric, st in stats.items():
            if isinstance(st, dict):
                summary_rows.append({"arm": arm, "metric": metric, **st})
            else:
                summary_rows.append({"arm": arm, "metric": metric, "median": st, "q25": "", "q75": ""})
    write_rows(summary_rows, out / "compare_summary.csv", ["arm", "metric", "median", "q25", "q75"])

    for arm, ser in res.series.items():
        name = f"series_{arm.replace('/', '_')}.csv"
        cols = ["t"] + [f"{f}_{q}" for f in SERIES_FIELDS for q in ("median", "q25", "q75")]
        rows = [{c: ser[c][i] for c in cols} for i in range(len(ser["t"]))]
        write_rows(rows, out / name, cols)
        files.append(name)

    write_json({"seeds": res.seeds, "summary": res.summary, "claims": res.claims,
                "protocol": f"medians and IQR over {args.seeds} seeds per arm"}, out / "compare.json")
    write_manifest(out, "compare", cfg, res.seeds, files)
    for key, val in res.claims.items():
        log.info("%-40s %s", key, val)
    return EXIT_OK


def cmd_sweep(args) -> int:
    cfg = _load(args)
    values = _floats(args.values)
    if not values:
        raise ConfigError("values", "empty values list")
    models = tuple(m.strip() for m in args.models.split(","))
    modes = (args.mode,) if args.mode else ("nominal", "perturbed")
    try:
        rows = sweep(cfg, args.param, values, k=args.seeds, models=models, modes=modes, workers=args.workers)
    except ValueError as exc:
        raise ConfigError(args.param, str(exc)) from None
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "config.ini").write_text(dumps_config(cfg))
    write_rows(rows, out / "sweep.csv")
    seeds = sorted({r["seed"] for r in rows})
    write_manifest(out, "sweep", cfg, seeds, ["config.ini", "sweep.csv"],
                   {"param": args.param, "values": values})
    flagged = sum(r["status"] != "ok" for r in rows)
    log.info("%d cells, %d flagged", len(rows), flagged)
    return EXIT_OK


def parse_graph(spec: str):
    """``complete:N``, ``path:N``, ``ring:N``, ``empty:N`` or ``edges:N:0-1,1-2``."""
    kind, _, rest = spec.partition(":")
    try:
        if kind == "edges":
            n_text, _, edges = rest.partition(":")
            n = int(n_text)
            a = np.zeros((n, n))
            for e in filter(None, edges.split(",")):
                i, j = (int(x) for x in e.split("-"))
                a[i, j] = a[j, i] = 1
            return graph_from_adjacency(a)
        n = int(rest)
    except (ValueError, IndexError):
        raise ConfigError("graph", f"cannot parse graph spec {spec!r}") from None
    a = np.zeros((n, n))
    if kind == "complete":
        a = np.ones((n, n)) - np.eye(n)
    elif kind in ("path", "ring"):
        for i in range(n - 1):
            a[i, i + 1] = a[i + 1, i] = 1
        if kind == "ring" and n > 2:
            a[0, n - 1] = a[n - 1, 0] = 1
    elif kind != "empty":
        raise ConfigError("graph", f"unknown graph kind {kind!r}")
    return graph_from_adjacency(a)


def cmd_analyze(args) -> int:
    if args.graph:
        graph = parse_graph(args.graph)
        cfg = None
        source = args.graph
    else:
        cfg = _load(argparse.Namespace(config=args.config, seed=args.seed))
        state = run(cfg, keep_states=False).final_state if args.at == "final" else initialize(cfg)
        graph = build_graph(state.positions, cfg.params.r)
        source = f"{args.at} configuration, seed {cfg.seed}"
    phi = args.phi if args.phi == "per-agent" else float(args.phi)
    rows = []
    for theta in _floats(args.theta):
        for t_ph in _floats(args.t_ph):
            rep = analyze(graph, theta, phi, t_ph, convention=args.convention)
            rows.append({
                "theta": theta, "t_ph": t_ph, "phi": phi, "convention": args.convention,
                "n": graph.n, "components": rep.components, "zero_modes": rep.zero_modes,
                "slowest_rate": rep.slowest_rate, "precond_min_eig": rep.precond_min_eig,
                "stable": rep.stable, "status": rep.status,
                "eigenvalues": ";".join(f"{float(z.real)!r}{float(z.imag):+.17g}j" for z in rep.eigenvalues),
                "notes": "; ".join(rep.notes),
            })
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_rows(rows, out / "spectral.csv")
    files = ["spectral.csv"]
    if cfg is not None:
        (out / "config.ini").write_text(dumps_config(cfg))
        files.insert(0, "config.ini")
    write_manifest(out, "analyze", cfg, [cfg.seed] if cfg else [], files, {"graph": source})
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="fdaflock", description="Reactive and FDA flocking experiments.")
    p.add_argument("--version", action="version", version=__version__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, model=True):
        sp.add_argument("--config", help="INI config (default: paper scenario)")
        sp.add_argument("--seed", type=int, help="master seed override")
        sp.add_argument("--out", required=True, help="output directory")
        sp.add_argument("--mode", choices=("nominal", "perturbed"))
        sp.add_argument("--record-every", type=int, dest="record_every")
        sp.add_argument("--theta", type=float)
        sp.add_argument("--t-ph", type=float, dest="t_ph")
        sp.add_argument("--tau", type=float)
        sp.add_argument("--T", type=float, dest="T", help="duration in seconds")
        if model:
            sp.add_argument("--model", choices=("reactive", "fda"))
        sp.add_argument("--workers", type=int, default=1)

    sp = sub.add_parser("run", help="simulate one scenario")
    common(sp)
    sp.add_argument("--dump-trajectories", action="store_true", dest="dump_trajectories")
    sp.set_defaults(func=cmd_run)

    sp = sub.add_parser("compare", help="reactive vs FDA, nominal and perturbed, over K seeds")
    common(sp, model=False)
    sp.add_argument("--seeds", type=int, default=20, help="number of seeds K")
    sp.set_defaults(func=cmd_compare, mode=None)

    sp = sub.add_parser("sweep", help="grid over one parameter")
    common(sp, model=False)
    sp.add_argument("--param", required=True)
    sp.add_argument("--values", required=True, help="comma-separated values")
    sp.add_argument("--seeds", type=int, default=5)
    sp.add_argument("--models", default="fda", help="comma-separated: reactive,fda")
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("analyze", help="spectra of the linearized alignment operator")
    sp.add_argument("--config")
    sp.add_argument("--seed", type=int)
    sp.add_argument("--graph", help="complete:N | path:N | ring:N | empty:N | edges:N:0-1,1-2")
    sp.add_argument("--at", choices=("initial", "final"), default="initial")
    sp.add_argument("--theta", default="0,0.8", help="comma-separated grid")
    sp.add_argument("--t-ph", default="1", dest="t_ph", help="comma-separated grid")
    sp.add_argument("--phi", default="1", help="scalar weight or 'per-agent'")
    sp.add_argument("--convention", choices=CONVENTIONS, default="published")
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_analyze)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format="%(levelname)s %(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except ConfigError as exc:
        log.error("invalid configuration: %s", exc)
        return EXIT_VALIDATION
    except DegeneracyError as exc:
        log.error("degenerate simulation: %s", exc)
        return EXIT_DEGENERATE
    except OSError as exc:
        log.error("I/O error: %s", exc)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
