"""Command-line front door.

Subcommands: record, replay, bench-latency, bench-reflex, bench-optics,
bench-mtf, train-gas, train-fusion, analyze-liquid, report.

Reports are machine-first (CSV or JSON) and embed the seed, a hash of the
effective configuration, and the artifact version.  Exit codes are stable:
0 success, 2 configuration/parse error, 3 I/O error, 4 empty result.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys

import numpy as np

from . import __version__, errors, experiments, link, optics, reflex, synth
from .core import ModalityKind
from .recordlog import log_to_bytes, read_log, write_log

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3
EXIT_EMPTY = 4

OUT_DIR_ENV = "TOUCHLAB_OUT_DIR"

REPORT_SCHEMA = 1

_RATE_KEYS = {
    "visuotactile": ModalityKind.VISUOTACTILE,
    "surface_audio": ModalityKind.SURFACE_AUDIO,
    "surface_pressure": ModalityKind.SURFACE_PRESSURE,
    "inertial": ModalityKind.INERTIAL,
    "gas": ModalityKind.GAS,
    "heat": ModalityKind.HEAT,
}


class CliError(Exception):
    def __init__(self, message: str, exit_code: int):
        super().__init__(message)
        self.exit_code = exit_code


def _config_hash(args: dict) -> str:
    payload = json.dumps({k: v for k, v in sorted(args.items())
                          if k not in ("out", "func", "command")},
                         default=str, sort_keys=True)
    return hashlib.sha256(payload.encode()).hexdigest()[:16]


def _report(command: str, args: dict, rows: list, extra: dict | None = None) -> dict:
    report = {
        "schema": REPORT_SCHEMA,
        "command": command,
        "version": __version__,
        "seed": args.get("seed"),
        "config_hash": _config_hash(args),
        "rows": rows,
    }
    if extra:
        report.update(extra)
    return report


def _emit(report: dict, out: str | None, fmt: str) -> None:
    """Write the report to ``out`` (or the env default dir), else stdout."""
    if out is None:
        out_dir = os.environ.get(OUT_DIR_ENV)
        if out_dir:
            name = f"{report['command']}-{report.get('seed', 0)}.{fmt}"
            out = os.path.join(out_dir, name)
    text = _render(report, fmt)
    if out:
        try:
            with open(out, "w") as fh:
                fh.write(text)
        except OSError as exc:
            raise CliError(f"cannot write report: {exc}", EXIT_IO) from exc
        print(f"wrote {out}")
    else:
        print(text)


def _render(report: dict, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(report, indent=2, default=_jsonable)
    rows = report["rows"]
    lines = [f"# schema={report['schema']} command={report['command']} "
             f"version={report['version']} seed={report['seed']} "
             f"config_hash={report['config_hash']}"]
    for key, value in report.items():
        if key not in ("schema", "command", "version", "seed", "config_hash",
                       "rows"):
            lines.append(f"# {key}={value}")
    if rows:
        cols = list(rows[0].keys())
        lines.append(",".join(cols))
        for row in rows:
            lines.append(",".join(_csv_cell(row.get(c)) for c in cols))
    return "\n".join(lines) + "\n"


def _csv_cell(value) -> str:
    if isinstance(value, float):
        return f"{value:.6g}"
    return str(value)


def _jsonable(obj):
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    return str(obj)


# --- scenario files --------------------------------------------------------------


def load_scenario(path: str) -> synth.ScenarioScript:
    """Parse a scenario description (JSON, schema in the README)."""
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise CliError(f"cannot read scenario: {exc}", EXIT_IO) from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CliError(
            f"{path}:{exc.lineno}:{exc.colno}: scenario is not valid JSON: "
            f"{exc.msg}", EXIT_CONFIG) from exc

    try:
        rates = {}
        for key, value in doc.get("rates", {}).items():
            if key not in _RATE_KEYS:
                raise errors.ScenarioParseError(f"unknown rate key {key!r}")
            rates[_RATE_KEYS[key]] = float(value)
        events = []
        for i, ev in enumerate(doc.get("events", [])):
            try:
                obj = synth.ObjectSpec(
                    material=ev["material"],
                    fill_fraction=ev.get("fill_fraction"),
                    temperature_c=ev.get("temperature_c"))
                events.append(synth.Event(
                    t_start=float(ev["t_start"]), t_end=float(ev["t_end"]),
                    kind=ev["kind"], obj=obj,
                    finger_ids=tuple(ev.get("finger_ids", (0, 1, 2, 3)))))
            except (KeyError, ValueError, TypeError) as exc:
                raise errors.ScenarioParseError(
                    f"event {i}: {exc}") from exc
        script = synth.ScenarioScript(
            seed=int(doc.get("seed", 0)),
            duration_s=float(doc["duration_s"]),
            events=events,
            fingers=tuple(doc.get("fingers", (0, 1, 2, 3))),
            rates=rates)
        script.validate()
        return script
    except KeyError as exc:
        raise CliError(f"{path}: missing required field {exc}", EXIT_CONFIG) from exc
    except (errors.ScenarioParseError, errors.OverlappingEvents,
            ValueError) as exc:
        raise CliError(f"{path}: {exc}", EXIT_CONFIG) from exc


# --- subcommands -----------------------------------------------------------------


def cmd_record(args) -> int:
    script = load_scenario(args.scenario)
    if args.seed is not None:
        script.seed = args.seed
    log = synth.run_scenario(script)
    try:
        n = write_log(log, args.out)
    except OSError as exc:
        raise CliError(f"cannot write log: {exc}", EXIT_IO) from exc
    print(f"wrote {args.out}: {n} bytes, {len(log.samples)} samples, "
          f"{len(log.descriptors)} streams")
    return EXIT_OK


def _read_log_checked(path):
    try:
        return read_log(path)
    except OSError as exc:
        raise CliError(f"cannot read log: {exc}", EXIT_IO) from exc
    except (errors.BadMagic, errors.VersionMismatch,
            errors.TruncatedChunk) as exc:
        raise CliError(f"{path}: {exc}", EXIT_CONFIG) from exc


def cmd_replay(args) -> int:
    log = _read_log_checked(args.log)
    if args.out:
        try:
            with open(args.out, "wb") as fh:
                fh.write(log_to_bytes(log))
        except OSError as exc:
            raise CliError(f"cannot write log: {exc}", EXIT_IO) from exc
    per_stream = {}
    for s in log.samples:
        per_stream[s.stream_id] = per_stream.get(s.stream_id, 0) + 1
    print(f"{args.log}: {len(log.samples)} samples over "
          f"{len(log.descriptors)} streams")
    for sid in sorted(log.descriptors):
        d = log.descriptors[sid]
        print(f"  stream {sid}: {d.kind.name.lower()} @ {d.rate_hz:g} Hz "
              f"x{d.channels}, {per_stream.get(sid, 0)} samples")
    if args.out:
        print(f"replayed to {args.out}")
    return EXIT_OK


def cmd_bench_latency(args) -> int:
    rows = []
    budget = args.budget_us
    for name, path in (("host", link.HOST_PATH), ("device", link.DEVICE_PATH)):
        profile = path.without_jitter() if args.no_jitter else path
        stats = link.run_pipeline(profile, link.Workload(), n_runs=args.runs,
                                  seed=args.seed)
        for stage in (*link.STAGE_NAMES, "total"):
            s = stats.stats[stage]
            rows.append({"path": name, "stage": stage, **s})
        check = link.latency_budget_check(stats, budget)
        rows.append({"path": name, "stage": "budget_verdict",
                     "mean": check.total_us, "std": 0.0, "p50": 0.0,
                     "p95": 0.0, "p99": float(check.margin_us)})
        print(f"{name}: total mean {stats.stats['total']['mean']:.0f} us, "
              f"budget {budget:.0f} us -> "
              f"{'pass' if check.passed else 'fail'} "
              f"(margin {check.margin_us:+.0f} us)")
    _emit(_report("bench-latency", vars(args), rows,
                  {"budget_us": budget}), args.out, args.format)
    return EXIT_OK


def cmd_bench_reflex(args) -> int:
    names = ("device", "host", "legacy") if args.path == "all" else (args.path,)
    rows = []
    for name in names:
        res = reflex.reflex_benchmark(name, n_trials=args.trials,
                                      seed=args.seed)
        rows.append({"path": name, **res.stats})
        print(f"{name}: mean {res.stats['mean'] / 1000:.3f} ms, "
              f"std {res.stats['std']:.0f} us")
    _emit(_report("bench-reflex", vars(args), rows), args.out, args.format)
    return EXIT_OK


def _parse_alphas(text: str):
    alphas = []
    for token in text.split(","):
        token = token.strip()
        if not token:
            continue
        alphas.append(token if token in (optics.LAMBERTIAN, optics.SPECULAR)
                      else float(token))
    if not alphas:
        raise CliError("empty --alpha-sweep", EXIT_CONFIG)
    return alphas


def cmd_bench_optics(args) -> int:
    alphas = _parse_alphas(args.alpha_sweep)
    try:
        result = optics.scatter_sweep(alphas=alphas, photons=args.photons,
                                      seed=args.seed)
    except errors.BudgetTooSmall as exc:
        raise CliError(str(exc), EXIT_CONFIG) from exc
    for row in result["rows"]:
        print(f"{row['alpha']:>11}: std/mean={row['std_over_mean']:.3f} "
              f"cnr_score={row['cnr_score']:.2f} obj={row['objective']:+.4f}")
    print(f"recommended: {result['recommended']} "
          f"(band: {', '.join(result['recommended_band'])})")
    _emit(_report("bench-optics", vars(args), result["rows"],
                  {"recommended": result["recommended"],
                   "recommended_band": result["recommended_band"]}),
          args.out, args.format)
    return EXIT_OK


def cmd_bench_mtf(args) -> int:
    spacings = [float(s) for s in args.spacings.split(",") if s.strip()]
    rows = []
    for region in (1, 2, 3) if args.region == 0 else (args.region,):
        sigma = optics.region_psf_sigma_um(region)
        for spacing in spacings:
            res = optics.prong_mtf(spacing, sigma)
            rows.append({"region": region, "spacing_um": spacing,
                         "psf_sigma_um": sigma, "mtf": res["mtf"],
                         "resolvable": res["resolvable"]})
    for row in rows:
        print(f"region {row['region']} spacing {row['spacing_um']:5.1f} um: "
              f"mtf={row['mtf']:.3f} "
              f"{'resolvable' if row['resolvable'] else 'not resolvable'}")
    _emit(_report("bench-mtf", vars(args), rows), args.out, args.format)
    return EXIT_OK


def cmd_train_gas(args) -> int:
    times = [float(t) for t in args.integration.split(",") if t.strip()]
    data = experiments.make_gas_dataset(n_per_material=args.approaches,
                                        duration_s=args.duration,
                                        seed=args.seed)
    rows = []
    last = None
    for t in times:
        last = experiments.gas_experiment(data, t, seed=args.seed)
        rows.append({"integration_s": t, "accuracy": last.accuracy,
                     "n_train": last.n_train, "n_test": last.n_test})
        print(f"integration {t:5.1f} s: accuracy {last.accuracy:.3f}")
    if args.confusion_out and last is not None:
        with open(args.confusion_out, "w") as fh:
            fh.write(experiments.confusion_csv(last.confusion, data.label_names))
        print(f"wrote confusion matrix (integration {times[-1]:g} s) to "
              f"{args.confusion_out}")
    _emit(_report("train-gas", vars(args), rows,
                  {"materials": list(data.label_names)}), args.out, args.format)
    return EXIT_OK


def cmd_train_fusion(args) -> int:
    modalities = experiments.MODALITY_NAMES if args.modalities == "all" \
        else tuple(m.strip() for m in args.modalities.split(","))
    windows = list(experiments.iter_fusion_windows(
        trials_per_class=args.trials_per_class, seed=args.seed))
    modes = (experiments.FINGER_DEPENDENT, experiments.FINGER_INDEPENDENT) \
        if args.mode == "both" else (f"finger_{args.mode}",)
    rows = []
    last = None
    try:
        for mode in modes:
            last = experiments.fusion_experiment(windows, mode=mode,
                                                 modalities=modalities,
                                                 seed=args.seed)
            rows.append({
                "mode": mode, "modalities": "+".join(modalities),
                "action_accuracy": last.action_accuracy,
                "material_accuracy": last.material_accuracy,
                "lr": last.lr, "n_train": last.n_train, "n_test": last.n_test,
            })
            print(f"{mode}: action {last.action_accuracy:.3f}, "
                  f"material {last.material_accuracy:.3f} (lr={last.lr})")
    except errors.MissingModality as exc:
        raise CliError(str(exc), EXIT_CONFIG) from exc
    if args.confusion_out and last is not None:
        from .core import ACTIONS, MATERIALS
        with open(args.confusion_out, "w") as fh:
            fh.write(experiments.confusion_csv(last.confusion_action, ACTIONS))
            fh.write(experiments.confusion_csv(last.confusion_material,
                                               MATERIALS))
        print(f"wrote confusion matrices to {args.confusion_out}")
    _emit(_report("train-fusion", vars(args), rows), args.out, args.format)
    return EXIT_OK


def cmd_analyze_liquid(args) -> int:
    log = _read_log_checked(args.log)
    try:
        taps = experiments.analyze_liquid(log, finger_id=args.finger)
    except errors.MissingModality as exc:
        raise CliError(str(exc), EXIT_CONFIG) from exc
    except errors.NoTapsFound as exc:
        raise CliError(str(exc), EXIT_EMPTY) from exc
    rows = [{"t_start_s": t.t_start_s, "peak_hz": t.peak_hz,
             "tau_s": t.tau_s, "predicted_fill": t.predicted_fill}
            for t in taps]
    for row in rows:
        print(f"tap @ {row['t_start_s']:.3f} s: peak {row['peak_hz']:.1f} Hz, "
              f"tau {row['tau_s'] * 1e3:.1f} ms -> {row['predicted_fill']}")
    _emit(_report("analyze-liquid", vars(args), rows), args.out, args.format)
    return EXIT_OK


def cmd_report(args) -> int:
    loaded = []
    for path in args.reports:
        try:
            with open(path) as fh:
                loaded.append((path, json.load(fh)))
        except (OSError, json.JSONDecodeError) as exc:
            print(f"skipping {path}: {exc}", file=sys.stderr)
    if not loaded:
        raise CliError("no readable reports", EXIT_EMPTY)
    for path, rep in loaded:
        print(f"{path}: {rep.get('command')} v{rep.get('version')} "
              f"seed={rep.get('seed')} config={rep.get('config_hash')} "
              f"rows={len(rep.get('rows', []))}")
    return EXIT_OK


# --- parser -----------------------------------------------------------------------


def _add_common(p, runs_default=None):
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None, help="report output path")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    if runs_default is not None:
        p.add_argument("--runs", type=int, default=runs_default)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="touchlab",
        description="Multimodal fingertip simulation and benchmarking workbench")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("record", help="synthesize a scenario into a log file")
    p.add_argument("scenario", help="scenario JSON file")
    p.add_argument("--out", required=True, help="output log path")
    p.add_argument("--seed", type=int, default=None,
                   help="override the scenario's seed")
    p.set_defaults(func=cmd_record)

    p = sub.add_parser("replay", help="read a log; verify and summarize it")
    p.add_argument("log")
    p.add_argument("--out", default=None, help="re-emit the log to this path")
    p.set_defaults(func=cmd_replay)

    p = sub.add_parser("bench-latency", help="host vs on-device stage table")
    _add_common(p, runs_default=10_000)
    p.add_argument("--budget-us", type=float, default=link.DEFAULT_BUDGET_US)
    p.add_argument("--no-jitter", action="store_true")
    p.set_defaults(func=cmd_bench_latency)

    p = sub.add_parser("bench-reflex", help="event-to-action latency benchmark")
    _add_common(p)
    p.add_argument("--trials", type=int, default=2000)
    p.add_argument("--path", choices=("all", "device", "host", "legacy"),
                   default="all")
    p.set_defaults(func=cmd_bench_reflex)

    p = sub.add_parser("bench-optics", help="surface scattering sweep")
    _add_common(p)
    p.add_argument("--alpha-sweep",
                   default="1,5,10,15,20,25," + optics.LAMBERTIAN)
    p.add_argument("--photons", type=int, default=1_000_000)
    p.set_defaults(func=cmd_bench_optics)

    p = sub.add_parser("bench-mtf", help="two-prong spatial resolution table")
    _add_common(p)
    p.add_argument("--region", type=int, choices=(0, 1, 2, 3), default=0,
                   help="fingertip region (0 = all)")
    p.add_argument("--spacings", default="3,5,6,7,9,12,22,30")
    p.set_defaults(func=cmd_bench_mtf)

    p = sub.add_parser("train-gas", help="gas material classification")
    _add_common(p)
    p.add_argument("--approaches", type=int, default=60)
    p.add_argument("--duration", type=float, default=90.0)
    p.add_argument("--integration", default="6,15,30,60,90")
    p.add_argument("--confusion-out", default=None,
                   help="write the final confusion matrix as CSV")
    p.set_defaults(func=cmd_train_gas)

    p = sub.add_parser("train-fusion", help="multimodal action/material "
                                            "classification")
    _add_common(p)
    p.add_argument("--trials-per-class", type=int, default=3)
    p.add_argument("--mode", choices=("both", "dependent", "independent"),
                   default="both")
    p.add_argument("--modalities", default="all",
                   help="comma list or 'all'")
    p.add_argument("--confusion-out", default=None,
                   help="write the last run's confusion matrices as CSV")
    p.set_defaults(func=cmd_train_fusion)

    p = sub.add_parser("analyze-liquid", help="fill level from tap ring-downs")
    _add_common(p)
    p.add_argument("log")
    p.add_argument("--finger", type=int, default=0)
    p.set_defaults(func=cmd_analyze_liquid)

    p = sub.add_parser("report", help="summarize saved JSON reports")
    p.add_argument("reports", nargs="+")
    p.set_defaults(func=cmd_report)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
