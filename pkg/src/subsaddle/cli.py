"""Experiment runner: solve, segment, sweep, verify.

Configs are single JSON files (see `CONFIG_HELP`); command-line flags
override file fields.  All randomness flows from one top-level seed through
named substreams, so identical (config, seed, version) produce identical
outputs apart from wall-clock columns.

Outputs per command:
  solve           seed_<s>/trace.csv, seed_<s>/summary.json, summary.json
  segment         seed_<s>/mask.pgm, trace.csv, metrics.json (when ground
                  truth exists), summary.json
  segment-online  seed_<s>/masks/frame_NNNN.pgm, metrics.csv, summary.json
  sweep-rho       rho_sweep.csv, summary.json
  verify          pass/fail table on stdout; counterexample JSON on failure

trace.csv columns: k, fL, gap_D, gap_R, gap_Dtau, queries, wall_ms.  Gap
columns are blank when no gap oracle applies.  metrics.csv columns: frame,
iou, precision, recall, f1, wall_ms.  rho_sweep.csv columns: rho, iou, gap.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .geometry import Box, CappedSimplex
from .problems import make_example_b1, make_example_b2, random_submodular_instance, table_instance
from .rng import Stream
from .segmentation import (
    OFFLINE_DEFAULTS,
    ONLINE_DEFAULTS,
    ShapeSpec,
    make_segmentation,
    mask_from_x,
    read_pgm,
    read_stream_dir,
    scaled_step,
    segmentation_metrics,
    synth_image,
    synth_stream,
    write_pgm,
)
from .setfn import check_submodular_at
from .smoothing import OracleConfig, oracle_batch
from .solver import SolverConfig, derive_hyperparameters, solve_offline
from .verify import brute_saddle_check, make_gap_oracle
from . import lovasz, verify

SCHEMA_VERSION = 1

CONFIG_HELP = """\
Config file schema (JSON object):
  problem: {"kind": "b1" | "b2" | "segmentation" | "segmentation-online" | "custom", ...}
    segmentation kinds add: image (path to PGM, with seeds_px + labels,
    optional truth) or synth {width, height, noise, seeds_per_class, seed,
    shape {kind, cx, cy, radius}}, plus lam, rho, sigma_intensity,
    sigma_distance; online adds frames + motion [dx, dy, rot] (synth) or
    dir (frame directory with manifest.json), and steps_per_frame.
    custom adds file (path) or instance (inline):
    {n, m, constraint {kind, ...}, values {mask: {base, coef}}}.
  solver: exactly one of
    explicit {h1, h2, mu, samples, horizon, scheme, record_every}
    or {"theorem1": {"epsilon": 0.1}}.
  seeds: [0, 1, ...]      run once per seed
  out: output directory   (flag --out overrides)
  gaps: {"enabled": true, "max_n": 14}

Output files and columns:
  trace.csv        k, fL, gap_D, gap_R, gap_Dtau, queries, wall_ms
                   (fL = extension value at the probe iterate; gap columns
                   blank when no gap oracle applies; queries cumulative)
  summary.json     schema_version, version, config echo, seed, iterations,
                   best {k, x, y, fL, gap_Dtau}, final, totals
  metrics.json     iou, precision, recall, f1 (+ bookkeeping)
  metrics.csv      frame, iou, precision, recall, f1, wall_ms
  rho_sweep.csv    rho, iou, gap
  mask.pgm / masks/frame_NNNN.pgm   binary PGM, foreground = 255
"""


class ConfigError(ValueError):
    pass


def _load_config(path: str | None, overrides: dict) -> dict:
    cfg = {}
    if path is not None:
        try:
            cfg = json.loads(Path(path).read_text())
        except FileNotFoundError:
            raise ConfigError(f"config file not found: {path}")
        except json.JSONDecodeError as e:
            raise ConfigError(f"config is not valid JSON: {e}")
    for key, value in overrides.items():
        if value is None:
            continue
        if key == "epsilon":
            cfg.setdefault("solver", {})
            cfg["solver"] = {"theorem1": {"epsilon": value}}
        elif key == "seed":
            cfg["seeds"] = [value]
        else:
            cfg[key] = value
    return cfg


def _solver_config(cfg: dict, fn, seed: int) -> SolverConfig:
    solver = cfg.get("solver")
    if not isinstance(solver, dict) or not solver:
        raise ConfigError("config needs a 'solver' object")
    explicit_keys = {"h1", "h2", "mu", "samples", "horizon", "scheme", "record_every"}
    has_explicit = bool(explicit_keys & solver.keys())
    has_schedule = "theorem1" in solver
    if has_explicit == has_schedule:
        raise ConfigError("solver must have exactly one of explicit parameters or theorem1")
    if has_schedule:
        eps = solver["theorem1"].get("epsilon")
        if not isinstance(eps, (int, float)) or eps <= 0:
            raise ConfigError("theorem1.epsilon must be a positive number")
        record_every = int(solver["theorem1"].get("record_every", 1))
        return derive_hyperparameters(fn, float(eps), record_every=record_every, seed=seed)
    try:
        oracle = OracleConfig(
            mu=float(solver["mu"]),
            samples=int(solver.get("samples", 1)),
            scheme=solver.get("scheme", "forward"),
        )
        return SolverConfig(
            h1=float(solver["h1"]),
            h2=float(solver["h2"]),
            oracle=oracle,
            horizon=int(solver["horizon"]),
            record_every=int(solver.get("record_every", 1)),
            seed=seed,
        )
    except KeyError as e:
        raise ConfigError(f"solver config missing field {e}")
    except ValueError as e:
        raise ConfigError(f"bad solver config: {e}")


def _constraint_from_spec(spec: dict):
    kind = spec.get("kind")
    if kind == "box":
        return Box(spec["lower"], spec["upper"])
    if kind == "capped-simplex":
        return CappedSimplex(int(spec["m"]), float(spec["budget"]))
    raise ConfigError(f"unknown constraint kind {kind!r}")


def _custom_instance(spec: dict):
    if "file" in spec:
        spec = json.loads(Path(spec["file"]).read_text())
    elif "instance" in spec:
        spec = spec["instance"]
    try:
        n = int(spec["n"])
        m = int(spec["m"])
        values = spec["values"]
        base = {int(k): float(v["base"]) for k, v in values.items()}
        coef = {int(k): v.get("coef", [0.0] * m) for k, v in values.items()}
        constraint = (
            _constraint_from_spec(spec["constraint"]) if "constraint" in spec else None
        )
    except (KeyError, TypeError, ValueError) as e:
        raise ConfigError(f"bad custom instance: {e}")
    if len(base) != 1 << n:
        raise ConfigError(f"custom instance needs all {1 << n} subset values")
    return table_instance(n, m, base, coef, constraint=constraint, name="custom")


def _build_problem(cfg: dict):
    prob = cfg.get("problem")
    if not isinstance(prob, dict) or "kind" not in prob:
        raise ConfigError("config needs problem.kind")
    kind = prob["kind"]
    if kind == "b1":
        return make_example_b1()
    if kind == "b2":
        return make_example_b2()
    if kind == "custom":
        return _custom_instance(prob)
    if kind in ("segmentation", "segmentation-online"):
        return None  # built per run by the segmentation commands
    raise ConfigError(f"unknown problem kind {kind!r}")


def _write_trace_csv(path: Path, records) -> None:
    with open(path, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["k", "fL", "gap_D", "gap_R", "gap_Dtau", "queries", "wall_ms"])
        for r in records:
            w.writerow(
                [
                    r.k,
                    repr(float(r.f_hat)),
                    "" if r.gap_D is None else repr(float(r.gap_D)),
                    "" if r.gap_R is None else repr(float(r.gap_R)),
                    "" if r.gap_Dtau is None else repr(float(r.gap_Dtau)),
                    r.queries,
                    f"{r.wall_ms:.3f}",
                ]
            )


def _write_json(path: Path, payload: dict) -> None:
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True, default=_json_default) + "\n")


def _json_default(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    raise TypeError(f"not JSON serializable: {type(obj)!r}")


def cmd_solve(args) -> int:
    try:
        cfg = _load_config(args.config, {"seed": args.seed, "out": args.out, "epsilon": args.epsilon})
        out = Path(cfg.get("out", "out"))
        kind = cfg.get("problem", {}).get("kind")
        if kind in ("segmentation", "segmentation-online"):
            raise ConfigError("use the segment commands for segmentation problems")
        probe = _build_problem(cfg)
        seeds = [int(s) for s in cfg.get("seeds", [0])]
        if not seeds:
            raise ConfigError("need at least one seed")
        _solver_config(cfg, probe, seeds[0])  # validate before writing anything
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    out.mkdir(parents=True, exist_ok=True)
    gaps_cfg = cfg.get("gaps", {})
    per_seed = []
    for seed in seeds:
        fn = _build_problem(cfg)
        config = _solver_config(cfg, fn, seed)
        gap_fn = None
        if gaps_cfg.get("enabled", True):
            gap_fn = make_gap_oracle(fn, cap_n=int(gaps_cfg.get("max_n", 14)))
        result = solve_offline(fn, config, gap_fn=gap_fn)
        seed_dir = out / f"seed_{seed}"
        seed_dir.mkdir(exist_ok=True)
        _write_trace_csv(seed_dir / "trace.csv", result.trace.records)
        best = result.best
        summary = {
            "schema_version": SCHEMA_VERSION,
            "version": __version__,
            "config": cfg,
            "seed": seed,
            "iterations": result.trace.iterations,
            "best": {
                "k": best.k,
                "x": best.z_hat[: fn.n],
                "y": best.z_hat[fn.n :],
                "fL": best.f_hat,
                "gap_Dtau": best.gap_Dtau,
            },
            "final": {"z": result.trace.z_final},
            "totals": {
                "queries": result.trace.total_queries,
                "gap_queries": result.trace.gap_queries,
            },
        }
        _write_json(seed_dir / "summary.json", summary)
        per_seed.append(summary)
    _write_json(
        out / "summary.json",
        {
            "schema_version": SCHEMA_VERSION,
            "version": __version__,
            "config": cfg,
            "seeds": seeds,
            "runs": [
                {"seed": s["seed"], "best": s["best"], "totals": s["totals"]} for s in per_seed
            ],
        },
    )
    return 0


def _segmentation_inputs(prob: dict, seed: int):
    """(image, truth or None, seeds, labels) from config."""
    if "image" in prob:
        image = read_pgm(prob["image"])
        truth = None
        if "truth" in prob:
            truth = read_pgm(prob["truth"]) > 127
        seeds = np.asarray(prob["seeds_px"], dtype=int)
        labels = np.asarray(prob["labels"], dtype=int)
        return image, truth, seeds, labels
    synth_cfg = prob.get("synth", {})
    shape_cfg = synth_cfg.get("shape", {})
    shape = ShapeSpec(**shape_cfg) if shape_cfg else None
    snap = synth_image(
        int(synth_cfg.get("width", 16)),
        int(synth_cfg.get("height", 16)),
        shape=shape,
        noise=float(synth_cfg.get("noise", 10.0)),
        seeds_per_class=tuple(synth_cfg.get("seeds_per_class", [8, 8])),
        seed=int(synth_cfg.get("seed", seed)),
    )
    return snap.image, snap.truth, snap.seeds, snap.labels


def _segment_once(cfg: dict, seed: int, rho: float | None = None, horizon: int | None = None):
    prob = cfg["problem"]
    image, truth, seeds_px, labels = _segmentation_inputs(prob, seed)
    height, width = image.shape
    n = width * height
    lam = float(prob.get("lam", OFFLINE_DEFAULTS["lam"]))
    use_rho = float(prob.get("rho", 8.0) if rho is None else rho)
    fn = make_segmentation(
        image,
        seeds_px,
        labels,
        lam=lam,
        rho=use_rho,
        sigma_intensity=float(prob.get("sigma_intensity", 20.0)),
        sigma_distance=float(prob.get("sigma_distance", 1.0)),
    )
    solver = cfg.get("solver", {})
    h_default = scaled_step(OFFLINE_DEFAULTS["h"], n)
    config = SolverConfig(
        h1=float(solver.get("h1", h_default)),
        h2=float(solver.get("h2", h_default)),
        oracle=OracleConfig(
            mu=float(solver.get("mu", OFFLINE_DEFAULTS["mu"])),
            samples=int(solver.get("samples", OFFLINE_DEFAULTS["samples"])),
            scheme=solver.get("scheme", "forward"),
        ),
        horizon=int(solver.get("horizon", 800)) if horizon is None else horizon,
        record_every=int(solver.get("record_every", 50)),
        seed=seed,
    )
    result = solve_offline(fn, config)
    mask = mask_from_x(result.trace.z_final[:n], width, height)
    metrics = segmentation_metrics(mask, truth) if truth is not None else None
    return fn, result, mask, metrics, truth


def cmd_segment(args) -> int:
    try:
        cfg = _load_config(args.config, {"seed": args.seed, "out": args.out})
        if cfg.get("problem", {}).get("kind") != "segmentation":
            raise ConfigError("problem.kind must be 'segmentation'")
        seeds = [int(s) for s in cfg.get("seeds", [0])]
        out = Path(cfg.get("out", "out"))
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    out.mkdir(parents=True, exist_ok=True)
    runs = []
    for seed in seeds:
        fn, result, mask, metrics, _ = _segment_once(cfg, seed)
        seed_dir = out / f"seed_{seed}"
        seed_dir.mkdir(exist_ok=True)
        write_pgm(seed_dir / "mask.pgm", mask)
        _write_trace_csv(seed_dir / "trace.csv", result.trace.records)
        payload = {
            "schema_version": SCHEMA_VERSION,
            "version": __version__,
            "seed": seed,
            "queries": result.trace.total_queries,
        }
        if metrics is not None:
            payload.update(vars(metrics))
            _write_json(seed_dir / "metrics.json", payload)
        runs.append(payload)
    _write_json(out / "summary.json", {
        "schema_version": SCHEMA_VERSION,
        "version": __version__,
        "config": cfg,
        "runs": runs,
    })
    return 0


def cmd_segment_online(args) -> int:
    try:
        cfg = _load_config(args.config, {"seed": args.seed, "out": args.out})
        prob = cfg.get("problem", {})
        if prob.get("kind") != "segmentation-online":
            raise ConfigError("problem.kind must be 'segmentation-online'")
        seeds = [int(s) for s in cfg.get("seeds", [0])]
        out = Path(cfg.get("out", "out"))
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    out.mkdir(parents=True, exist_ok=True)
    from_dir = prob.get("dir")
    if from_dir:
        disk_frames, manifest = read_stream_dir(from_dir)
        width = int(manifest["width"])
        height = int(manifest["height"])
        frames = len(disk_frames)
    else:
        synth_cfg = prob.get("synth", {})
        width = int(synth_cfg.get("width", 16))
        height = int(synth_cfg.get("height", 16))
        frames = int(prob.get("frames", 30))
    n = width * height
    lam = float(prob.get("lam", ONLINE_DEFAULTS["lam"]))
    rho = float(prob.get("rho", ONLINE_DEFAULTS["rho"]))
    solver = cfg.get("solver", {})
    h_default = scaled_step(ONLINE_DEFAULTS["h"], n)
    steps_per_frame = int(prob.get("steps_per_frame", 1))
    summary_runs = []
    for seed in seeds:
        if from_dir:
            stream = disk_frames
        else:
            synth_cfg = prob.get("synth", {})
            shape_cfg = synth_cfg.get("shape", {})
            stream = synth_stream(
                width,
                height,
                frames,
                shape=ShapeSpec(**shape_cfg) if shape_cfg else None,
                motion=tuple(prob.get("motion", [0.25, 0.0, 0.0])),
                noise=float(synth_cfg.get("noise", 10.0)),
                seeds_per_class=tuple(synth_cfg.get("seeds_per_class", [8, 8])),
                seed=int(synth_cfg.get("seed", seed)),
            )
        config = SolverConfig(
            h1=float(solver.get("h1", h_default)),
            h2=float(solver.get("h2", h_default)),
            oracle=OracleConfig(
                mu=float(solver.get("mu", ONLINE_DEFAULTS["mu"])),
                samples=int(solver.get("samples", ONLINE_DEFAULTS["samples"])),
                scheme=solver.get("scheme", "forward"),
            ),
            horizon=max(0, frames * steps_per_frame - 1),
            record_every=1,
            seed=seed,
        )
        seed_dir = out / f"seed_{seed}"
        masks_dir = seed_dir / "masks"
        masks_dir.mkdir(parents=True, exist_ok=True)
        from .solver import default_start, extragradient_step, joint_set

        solver_stream = Stream.from_seed(seed, "solver")
        z = None
        zset = None
        rows = []
        t_start = time.perf_counter()
        step_index = 0
        for frame in stream:
            t_frame = time.perf_counter()
            fn = make_segmentation(
                frame.image, frame.seeds, frame.labels, lam=lam, rho=rho,
                sigma_intensity=float(prob.get("sigma_intensity", 20.0)),
                sigma_distance=float(prob.get("sigma_distance", 1.0)),
            )
            if z is None:
                zset = joint_set(fn)
                z = default_start(fn)
            for _ in range(steps_per_frame):
                _, z, _, _, _ = extragradient_step(
                    fn, z, step_index, config,
                    solver_stream.substream("iter", step_index), zset,
                )
                step_index += 1
            mask = mask_from_x(z[:n], width, height)
            write_pgm(masks_dir / f"frame_{frame.k:04d}.pgm", mask)
            met = None
            if getattr(frame, "truth", None) is not None:
                met = segmentation_metrics(mask, frame.truth)
            rows.append([frame.k, met, (time.perf_counter() - t_frame) * 1e3])
        wall = time.perf_counter() - t_start
        with open(seed_dir / "metrics.csv", "w", newline="") as f:
            w = csv.writer(f, lineterminator="\n")
            w.writerow(["frame", "iou", "precision", "recall", "f1", "wall_ms"])
            for k, met, ms in rows:
                scores = (
                    [repr(float(v)) for v in (met.iou, met.precision, met.recall, met.f1)]
                    if met is not None
                    else ["", "", "", ""]
                )
                w.writerow([k] + scores + [f"{ms:.3f}"])
        run = {
            "seed": seed,
            "frames": frames,
            "updates_per_second": frames * steps_per_frame / wall,
        }
        scored = [met for _, met, _ in rows if met is not None]
        if scored:
            run.update(
                mean_iou=float(np.mean([m.iou for m in scored])),
                mean_precision=float(np.mean([m.precision for m in scored])),
                mean_recall=float(np.mean([m.recall for m in scored])),
                mean_f1=float(np.mean([m.f1 for m in scored])),
            )
        summary_runs.append(run)
    _write_json(out / "summary.json", {
        "schema_version": SCHEMA_VERSION,
        "version": __version__,
        "config": cfg,
        "runs": summary_runs,
    })
    return 0


def cmd_sweep_rho(args) -> int:
    try:
        cfg = _load_config(args.config, {"seed": args.seed, "out": args.out})
        if cfg.get("problem", {}).get("kind") != "segmentation":
            raise ConfigError("problem.kind must be 'segmentation'")
        out = Path(cfg.get("out", "out"))
        if args.rho_grid:
            grid = [float(v) for v in args.rho_grid.split(",")]
        else:
            grid = [float(v) for v in cfg.get("rho_grid", [0, 2, 4, 6, 8])]
        if not grid:
            raise ConfigError("empty rho grid")
        seeds = [int(s) for s in cfg.get("seeds", [0])]
    except (ConfigError, ValueError) as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    out.mkdir(parents=True, exist_ok=True)
    grid = sorted(set(grid))
    rows = []
    for rho in grid:
        ious = []
        for seed in seeds:
            _, _, _, metrics, _ = _segment_once(cfg, seed, rho=rho)
            if metrics is None:
                raise SystemExit("rho sweep needs ground truth")
            ious.append(metrics.iou)
        rows.append([rho, float(np.median(ious)), ""])
    with open(out / "rho_sweep.csv", "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["rho", "iou", "gap"])
        for row in rows:
            w.writerow([repr(float(row[0])), repr(float(row[1])), row[2]])
    _write_json(out / "summary.json", {
        "schema_version": SCHEMA_VERSION,
        "version": __version__,
        "config": cfg,
        "rho_grid": grid,
    })
    return 0


def _suite_submodular(instances, stream, failures):
    checks = 0
    for fn in instances:
        if fn.n > 12:
            continue
        lo, hi = fn.constraint.bounds()
        for i in range(50):
            y = fn.constraint.project(lo + (hi - lo) * stream.substream(fn.name, i).uniforms(fn.m))
            ok, pair = check_submodular_at(fn, y)
            checks += 1
            if not ok:
                failures.append(
                    {
                        "suite": "submodular",
                        "instance": fn.name,
                        "y": y,
                        "violating_pair": [sorted(pair[0]), sorted(pair[1])],
                    }
                )
                return checks
    return checks


def _suite_lovasz(stream, failures):
    from .problems import random_submodular_instance

    checks = 0
    for i in range(40):
        sub = stream.substream("lovasz", i)
        fn = random_submodular_instance(sub, n=2 + sub.randrange(5), m=1 + sub.randrange(2))
        x = sub.uniforms(fn.n)
        y = sub.uniforms(fn.m)
        lv = lovasz.lovasz_value(fn, x, y, check_domain=False)
        erv = lovasz.expected_rounded_value(fn, x, y, check_domain=False)
        checks += 1
        if abs(lv - erv) > 1e-12:
            failures.append({"suite": "lovasz", "instance": fn.name, "x": x, "y": y,
                             "value": lv, "rounded_expectation": erv})
            return checks
        _, g, _, _ = lovasz.value_and_subgradient(fn, x, y, check_domain=False)
        x2 = sub.uniforms(fn.n)
        lv2 = lovasz.lovasz_value(fn, x2, y, check_domain=False)
        if lv2 - lv - float(g @ (x2 - x)) < -1e-9:
            failures.append({"suite": "lovasz", "kind": "subgradient-inequality",
                             "x": x, "x2": x2, "y": y})
            return checks
        if float(np.linalg.norm(g)) > 4.0 * fn.constants.value_bound + 1e-9:
            failures.append({"suite": "lovasz", "kind": "subgradient-norm", "x": x, "y": y})
            return checks
    return checks


def _suite_duality(stream, failures):
    from .problems import random_submodular_instance, separable_instance

    checks = 0
    for i, fn in enumerate([make_example_b1(), make_example_b2()]):
        rep = brute_saddle_check(fn, grid_step=1e-3)
        checks += 1
        if rep.max_min > rep.min_max + 1e-9:
            failures.append({"suite": "duality", "instance": fn.name,
                             "max_min": rep.max_min, "min_max": rep.min_max})
            return checks
    for i in range(10):
        sub = stream.substream("duality", i)
        fn = random_submodular_instance(sub, n=2 + sub.randrange(3), m=1)
        rep = brute_saddle_check(fn, grid_step=1e-2)
        checks += 1
        if rep.max_min > rep.min_max + 1e-9:
            failures.append({"suite": "duality", "instance": fn.name,
                             "max_min": rep.max_min, "min_max": rep.min_max})
            return checks
        sep = separable_instance(sub, n=3, m=1)
        y = sub.uniforms(1)
        S = sub.randrange(1 << sep.n)
        d = verify.duality_gap(sep, S, y)
        r = verify.restricted_gap(sep, S, y)
        checks += 1
        if r is not None and not (-1e-9 <= r <= d + 1e-9):
            failures.append({"suite": "duality", "kind": "sandwich", "instance": sep.name,
                             "restricted": r, "duality": d})
            return checks
    return checks


def _suite_oracle(stream, failures):
    checks = 0
    for m in (1, 3):
        target = -np.ones(m) / math.sqrt(m)

        def fnL(_x, y):
            return float(-(y @ y))

        y = np.zeros(m)
        cfg = OracleConfig(mu=0.05, samples=20000)
        g = oracle_batch(fnL, None, y, cfg, stream.substream("oracle", m))
        checks += 1
        # grad of the smoothed square at 0 is exactly 0; 3 standard errors
        # of the batch mean with this sample count is ~0.05.
        if float(np.linalg.norm(g)) > 0.1:
            failures.append({"suite": "oracle", "kind": "bias", "m": m, "estimate": g})
            return checks

        def lin(_x, y, a=target):
            return float(a @ y)

        acc = 0.0
        sub = stream.substream("oracle-2nd", m)
        for i in range(4000):
            u = sub.substream(i).normals(m)
            gi = (lin(None, y + cfg.mu * u) - lin(None, y)) / cfg.mu * u
            acc += float(gi @ gi)
        second = acc / 4000
        checks += 1
        if second > (m + 4) ** 2 * 1.05:
            failures.append({"suite": "oracle", "kind": "second-moment", "m": m,
                             "estimate": second})
            return checks
    return checks


def cmd_verify(args) -> int:
    stream = Stream.from_seed(args.seed if args.seed is not None else 0, "verify")
    instances = [make_example_b1(), make_example_b2()]
    gen = Stream.from_seed(7, "verify-instances")
    for i in range(3):
        instances.append(random_submodular_instance(gen.substream(i), n=4, m=1))
    crop = synth_image(3, 3, shape=ShapeSpec(radius=0.4), noise=5.0,
                       seeds_per_class=(1, 1), seed=3)
    instances.append(make_segmentation(crop.image, crop.seeds, crop.labels, lam=2.0, rho=1.0))
    if args.instance:
        try:
            instances.append(_custom_instance({"file": args.instance}))
        except ConfigError as e:
            print(f"config error: {e}", file=sys.stderr)
            return 2
    suites = {
        "submodular": lambda failures: _suite_submodular(instances, stream, failures),
        "lovasz": lambda failures: _suite_lovasz(stream, failures),
        "duality": lambda failures: _suite_duality(stream, failures),
        "oracle": lambda failures: _suite_oracle(stream, failures),
    }
    if args.suite:
        if args.suite not in suites:
            print(f"config error: unknown suite {args.suite!r}", file=sys.stderr)
            return 2
        suites = {args.suite: suites[args.suite]}
    failures: list[dict] = []
    print(f"{'suite':<12} {'checks':>7}   status")
    any_fail = False
    for name, runner in suites.items():
        before = len(failures)
        checks = runner(failures)
        failed = len(failures) > before
        any_fail = any_fail or failed
        print(f"{name:<12} {checks:>7}   {'FAIL' if failed else 'ok'}")
    if failures:
        payload = json.dumps(failures, indent=2, default=_json_default)
        if args.out:
            Path(args.out).mkdir(parents=True, exist_ok=True)
            Path(args.out, "counterexample.json").write_text(payload + "\n")
            print(f"counterexample written to {args.out}/counterexample.json")
        print(payload)
    return 1 if any_fail else 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="subsaddle",
        description="Experiments for min-max problems with submodular-concave objectives.",
        epilog=CONFIG_HELP,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="JSON config file")
        p.add_argument("--seed", type=int, help="override: run only this seed")
        p.add_argument("--out", help="override: output directory")

    p = sub.add_parser("solve", help="offline run on an analytic or custom problem")
    common(p)
    p.add_argument("--epsilon", type=float, help="override: use the accuracy-driven schedule")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("segment", help="offline adversarial segmentation")
    common(p)
    p.set_defaults(func=cmd_segment)

    p = sub.add_parser("segment-online", help="one update per frame over a synthetic stream")
    common(p)
    p.set_defaults(func=cmd_segment_online)

    p = sub.add_parser("sweep-rho", help="offline segmentation across adversary budgets")
    common(p)
    p.add_argument("--rho-grid", help="comma-separated budgets, e.g. 0,2,4,8")
    p.set_defaults(func=cmd_sweep_rho)

    p = sub.add_parser("verify", help="run the brute-force property suites")
    p.add_argument("--suite", help="run a single suite: submodular|lovasz|duality|oracle")
    p.add_argument("--seed", type=int, help="randomization seed for the suites")
    p.add_argument("--out", help="directory for counterexample dumps")
    p.add_argument("--instance", help="extra custom instance file to include")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
