"""Command-line interface: synth, enumerate, and compare subcommands.

All result files are plain CSV/JSON with floats printed at 17 significant
digits, so re-running a command with the same config and seed reproduces
byte-identical artifacts regardless of the thread count.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .baselines import PartitionCapError, emm_synthesize, epm_enumerate
from .config import ConfigError, ExperimentConfig, build_reference, parse_config
from .model import (
    AngularGrid,
    ArrayGeometry,
    PatternMetrics,
    cpa_power_pattern,
    fpa_power_pattern,
    matching_improvement,
    pattern_metrics,
)
from .synthesis import SynthesisFailedError, SynthesisResult, pmm_synthesize

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_CONFIG = 2


def _fmt(value) -> str:
    """One JSON token with floats pinned to 17 significant digits."""
    if value is None:
        return "null"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        v = float(value)
        return f"{v:.17g}" if np.isfinite(v) else "null"
    if isinstance(value, str):
        return json.dumps(value)
    raise TypeError(f"unsupported JSON leaf: {type(value)}")


def format_json(obj, indent: int = 0) -> str:
    """Deterministic JSON text: sorted keys, pinned float formatting."""
    pad = "  " * indent
    inner = "  " * (indent + 1)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [
            f"{inner}{json.dumps(str(k))}: {format_json(v, indent + 1)}"
            for k, v in sorted(obj.items())
        ]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        items = [f"{inner}{format_json(v, indent + 1)}" for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + pad + "]"
    return _fmt(obj)


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)


def _layout_csv(result: SynthesisResult) -> str:
    lines = ["n,cluster"]
    for i, label in enumerate(result.clustering.assignments):
        lines.append(f"{i + 1},{int(label)}")
    return "\n".join(lines) + "\n"


def _weights_csv(result: SynthesisResult) -> str:
    lines = ["q,amp,phase_deg"]
    for q, w in enumerate(result.weights):
        lines.append(f"{q + 1},{abs(w):.17g},{np.degrees(np.angle(w)):.17g}")
    return "\n".join(lines) + "\n"


def _per_sample_csv(result: SynthesisResult) -> str:
    lines = ["u,gamma"]
    for rec in result.per_sample:
        gamma = "nan" if rec.degenerate else f"{rec.gamma:.17g}"
        lines.append(f"{rec.u:.17g},{gamma}")
    return "\n".join(lines) + "\n"


def _metrics_or_none(pattern, hint) -> PatternMetrics:
    try:
        return pattern_metrics(pattern, mainlobe_hint=hint)
    except ValueError:
        return PatternMetrics(sll_db=None, fnbw_deg=None, ripple_db=None)


def _summary_dict(
    cfg: ExperimentConfig, result: SynthesisResult, metrics: PatternMetrics, r_percent, emm_gamma
) -> dict:
    return {
        "method": result.method,
        "n": cfg.n,
        "d": cfg.d,
        "q": cfg.q,
        "grid_m": cfg.grid_m,
        "metric_m": cfg.metric_m if cfg.metric_m is not None else cfg.grid_m,
        "restarts": cfg.restarts,
        "seed": cfg.seed,
        "kmeans_max_iter": cfg.kmeans_max_iter,
        "ipm_max_iter": cfg.ipm_max_iter,
        "ipm_tol": cfg.ipm_tol,
        "reference": cfg.reference_summary(),
        "gamma": result.gamma,
        "sll_db": metrics.sll_db,
        "fnbw_deg": metrics.fnbw_deg,
        "best_sample_u": (
            None
            if result.best_sample_index is None
            else result.per_sample[result.best_sample_index].u
        ),
        "r_percent": r_percent,
        "emm_gamma": emm_gamma,
        "clustering": [int(c) for c in result.clustering.assignments],
        "weights": [
            {"q": q + 1, "amp": float(abs(w)), "phase_deg": float(np.degrees(np.angle(w)))}
            for q, w in enumerate(result.weights)
        ],
    }


def _write_bundle(out_dir: Path, prefix: str, cfg, geometry, result, metric_grid) -> None:
    trial = cpa_power_pattern(geometry, result.clustering, result.weights, metric_grid)
    _write(out_dir / f"{prefix}layout.csv", _layout_csv(result))
    _write(out_dir / f"{prefix}weights.csv", _weights_csv(result))
    _write(out_dir / f"{prefix}pattern.csv", trial.to_csv())
    if result.per_sample:
        _write(out_dir / f"{prefix}per_sample.csv", _per_sample_csv(result))


def cmd_synth(args) -> int:
    cfg = parse_config(args.config)
    if args.seed is not None:
        cfg.seed = args.seed
    excitations = build_reference(cfg, Path(args.config).parent)
    geometry = ArrayGeometry(cfg.n, cfg.d)
    metric_grid = AngularGrid(cfg.metric_m if cfg.metric_m is not None else cfg.grid_m)
    hint = cfg.mainlobe_hint()

    result = pmm_synthesize(geometry, excitations, cfg.pmm_config(), threads=args.threads)
    trial = cpa_power_pattern(geometry, result.clustering, result.weights, metric_grid)
    metrics = _metrics_or_none(trial, hint)

    out_dir = Path(args.out_dir)
    reference = fpa_power_pattern(geometry, excitations, metric_grid)
    _write(out_dir / "reference_pattern.csv", reference.to_csv())
    _write_bundle(out_dir, "", cfg, geometry, result, metric_grid)

    r_percent = None
    emm_gamma = None
    if args.emm:
        emm = emm_synthesize(
            geometry,
            excitations,
            cfg.q,
            metric_grid,
            restarts=cfg.restarts,
            base_seed=cfg.seed,
            kmeans_max_iter=cfg.kmeans_max_iter,
        )
        emm_trial = cpa_power_pattern(geometry, emm.clustering, emm.weights, metric_grid)
        emm_metrics = _metrics_or_none(emm_trial, hint)
        _write_bundle(out_dir, "emm_", cfg, geometry, emm, metric_grid)
        _write(
            out_dir / "summary_emm.json",
            format_json(_summary_dict(cfg, emm, emm_metrics, None, None)) + "\n",
        )
        emm_gamma = emm.gamma
        r_percent = matching_improvement(emm.gamma, result.gamma)

    summary = _summary_dict(cfg, result, metrics, r_percent, emm_gamma)
    _write(out_dir / "summary.json", format_json(summary) + "\n")
    print(f"gamma = {result.gamma:.6e}  (best sample u = {summary['best_sample_u']})")
    if r_percent is not None:
        print(f"emm gamma = {emm_gamma:.6e}  improvement R = {r_percent:.1f}%")
    return EXIT_OK


def cmd_enumerate(args) -> int:
    cfg = parse_config(args.config)
    excitations = build_reference(cfg, Path(args.config).parent)
    geometry = ArrayGeometry(cfg.n, cfg.d)
    grid = AngularGrid(cfg.metric_m if cfg.metric_m is not None else cfg.grid_m)

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    checkpoint_path = out_dir / "enumeration_progress.csv"
    checkpoint_path.write_text("done,total,best_gamma,best_rgs\n")

    def progress(done, total, best_gamma, best_rgs):
        with checkpoint_path.open("a") as fh:
            rgs = " ".join(str(v) for v in best_rgs)
            fh.write(f"{done},{total},{best_gamma:.17g},{rgs}\n")
        print(f"  {done}/{total} partitions, best gamma {best_gamma:.6e}", flush=True)

    result = epm_enumerate(
        geometry,
        excitations,
        cfg.q,
        grid,
        ipm_max_iter=cfg.ipm_max_iter,
        ipm_tol=cfg.ipm_tol,
        cap=args.cap,
        threads=args.threads,
        progress=progress,
    )

    _write(
        out_dir / "enumeration.json",
        format_json(
            {
                "n": cfg.n,
                "d": cfg.d,
                "q": cfg.q,
                "grid_m": grid.m_samples,
                "partition_count": result.partition_count,
                "gamma": result.gamma,
                "clustering": [int(c) for c in result.clustering.assignments],
            }
        )
        + "\n",
    )
    lines = ["n,cluster"] + [
        f"{i + 1},{int(c)}" for i, c in enumerate(result.clustering.assignments)
    ]
    _write(out_dir / "enumeration_layout.csv", "\n".join(lines) + "\n")
    print(
        f"{result.partition_count} partitions enumerated, "
        f"best gamma = {result.gamma:.6e}"
    )
    return EXIT_OK


def cmd_compare(args) -> int:
    summaries = []
    for path in args.summaries:
        p = Path(path)
        if not p.exists():
            raise ConfigError(f"summary file not found: {p}")
        try:
            summaries.append(json.loads(p.read_text()))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{p}: invalid JSON: {exc}") from exc

    fingerprint = [
        (s.get("n"), s.get("d"), s.get("metric_m"), json.dumps(s.get("reference"), sort_keys=True))
        for s in summaries
    ]
    if len(set(fingerprint)) != 1:
        raise ConfigError(
            "summaries are not comparable: n, d, metric grid, and reference must match"
        )

    baseline = next((s for s in summaries if s.get("method") == "emm"), summaries[0])
    rows = []
    for s in summaries:
        r = matching_improvement(baseline["gamma"], s["gamma"]) if baseline["gamma"] > 0 else 0.0
        rows.append(
            {
                "method": s.get("method", "?"),
                "q": s.get("q"),
                "sll_db": s.get("sll_db"),
                "gamma": s.get("gamma"),
                "r_percent": r,
            }
        )

    header = f"{'method':<8}{'Q':>4}{'SLL_dB':>12}{'gamma':>14}{'R_%':>10}"
    print(header)
    for row in rows:
        sll = "-" if row["sll_db"] is None else f"{row['sll_db']:.2f}"
        print(
            f"{row['method']:<8}{row['q']:>4}{sll:>12}"
            f"{row['gamma']:>14.4e}{row['r_percent']:>10.1f}"
        )
    if args.out:
        lines = ["method,q,sll_db,gamma,r_percent"]
        for row in rows:
            sll = "" if row["sll_db"] is None else f"{row['sll_db']:.17g}"
            lines.append(
                f"{row['method']},{row['q']},{sll},"
                f"{row['gamma']:.17g},{row['r_percent']:.17g}"
            )
        _write(Path(args.out), "\n".join(lines) + "\n")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="clusterpm",
        description="Clustered linear-array synthesis by power-pattern matching.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    synth = sub.add_parser("synth", help="run the synthesis pipeline from a config file")
    synth.add_argument("config")
    synth.add_argument("--out-dir", default="results")
    synth.add_argument("--seed", type=int, default=None, help="override the config seed")
    synth.add_argument("--threads", type=int, default=1)
    synth.add_argument("--emm", action="store_true", help="also run the excitation-matching baseline")
    synth.set_defaults(func=cmd_synth)

    enum = sub.add_parser("enumerate", help="exhaustively score all partitions")
    enum.add_argument("config")
    enum.add_argument("--out-dir", default="results")
    enum.add_argument("--cap", type=int, default=1_000_000)
    enum.add_argument("--threads", type=int, default=1)
    enum.set_defaults(func=cmd_enumerate)

    comp = sub.add_parser("compare", help="tabulate two or more summary files")
    comp.add_argument("summaries", nargs="+")
    comp.add_argument("--out", default=None, help="also write the table as CSV")
    comp.set_defaults(func=cmd_compare)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "compare" and len(args.summaries) < 2:
        parser.error("compare needs at least two summary files")
    try:
        return args.func(args)
    except (ConfigError, FileNotFoundError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except ValueError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except (PartitionCapError, SynthesisFailedError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
