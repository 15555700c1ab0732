"""Command-line experiment runner.

Subcommands: decay, phase, verify, lift, renorm, basis. Artifacts are
deterministic for a fixed (config, seed) and any worker count: timing and
host details go to a separate run log, never into result files.

Exit codes: 0 success, 1 usage or configuration error, 2 falsified
deterministic audit, 3 failed statistical check.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import time
from fractions import Fraction
from pathlib import Path

from . import __version__, backends
from .config import ExperimentConfig, load_config
from .errors import ConfigError, FalsificationError, InvalidArgumentError
from .field import FieldMode, FieldView, HyperplaneField
from .lattice import Box, IndexSet, all_index_sets
from .lifting import (HeightWalk, ProjectedCrossing, lift_crossings,
                      sync_walks)
from .plane import build_inclined_basis, injectivity_certificate, \
    mixing_class_params
from .renorm import calibrate_box_side, wall_event_diagnostics
from .stats import (estimate_decay_curve, fit_exponential, fit_power_law,
                    model_select, phase_scan)
from .verify import run_deterministic_audits, run_statistical_checks

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_FALSIFIED = 2
EXIT_STATISTICAL = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise SystemExit2(message)


class SystemExit2(Exception):
    def __init__(self, message):
        self.message = message
        super().__init__(message)


def _build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="hyperperc",
                     description="Hyperplane percolation toolkit")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, needs_config=True):
        p.add_argument("--config", required=needs_config,
                       help="experiment config file")
        p.add_argument("--seed", type=int, default=None,
                       help="override the config seed")
        p.add_argument("--workers", type=int, default=1)
        p.add_argument("--out-dir", default="out")
        p.add_argument("--format", choices=("csv", "json"), default="json")

    common(sub.add_parser("decay", help="estimate a connectivity decay "
                                        "curve and fit both decay laws"))
    common(sub.add_parser("phase", help="boundary-connection frequencies "
                                        "over a parameter grid"))
    common(sub.add_parser("renorm", help="renormalized-wall event "
                                         "diagnostics"))

    p_verify = sub.add_parser("verify", help="run the deterministic audit "
                                             "battery")
    common(p_verify, needs_config=False)
    p_verify.add_argument("--stats", action="store_true",
                          help="also run seeded statistical spot checks")

    p_lift = sub.add_parser("lift", help="demonstrate walk synchronization "
                                         "or crossing lifting on JSON input")
    common(p_lift, needs_config=False)
    p_lift.add_argument("--walks", help="JSON list of walk value lists")
    p_lift.add_argument("--crossings",
                        help="JSON list of {axis, path} crossings")
    p_lift.add_argument("--box", help="comma-separated box sides N,m2,...")

    p_basis = sub.add_parser("basis", help="inclined-basis report")
    common(p_basis, needs_config=False)
    p_basis.add_argument("--n", type=int, help="ambient dimension")

    return parser


def _meta(config: ExperimentConfig | None, seed: int) -> dict:
    meta = {"tool": "hyperperc", "version": __version__, "seed": seed,
            "backend": backends.name}
    if config is not None:
        meta["config_hash"] = config.config_hash()
    return meta


def _write_artifact(out_dir: Path, stem: str, fmt: str, payload: dict,
                    csv_rows: list[dict] | None = None) -> Path:
    out_dir.mkdir(parents=True, exist_ok=True)
    if fmt == "json" or csv_rows is None:
        path = out_dir / f"{stem}.json"
        path.write_text(json.dumps(payload, sort_keys=True, indent=2)
                        + "\n", encoding="utf-8")
    else:
        path = out_dir / f"{stem}.csv"
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=list(csv_rows[0].keys()))
        writer.writeheader()
        for row in csv_rows:
            writer.writerow(row)
        path.write_text(buf.getvalue(), encoding="utf-8")
    return path


def _write_run_log(out_dir: Path, stem: str, started: float,
                   workers: int) -> None:
    # wall-clock and worker count live here, outside the result artifact,
    # so artifacts stay bit-identical across runs and worker counts
    out_dir.mkdir(parents=True, exist_ok=True)
    elapsed = time.time() - started
    with (out_dir / f"{stem}.log").open("a", encoding="utf-8") as fh:
        fh.write(f"finished={time.strftime('%Y-%m-%dT%H:%M:%S')} "
                 f"elapsed_s={elapsed:.3f} workers={workers} "
                 f"backend={backends.name}\n")


def _load(args) -> tuple[ExperimentConfig, int]:
    config = load_config(args.config)
    seed = args.seed if args.seed is not None else config.seed
    if args.seed is not None:
        config = ExperimentConfig(config.n, config.k, args.seed,
                                  config.params, config.decay, config.phase,
                                  config.renorm)
    return config, seed


def _fit_payload(report) -> dict:
    return {"model": report.model.value, "amplitude": report.amplitude,
            "exponent": report.exponent, "gof": report.gof,
            "aic": report.aic, "points": report.points}


def _cmd_decay(args) -> int:
    started = time.time()
    config, seed = _load(args)
    d = config.decay
    curve = estimate_decay_curve(config.params, d.radii, d.trials, seed,
                                 truncated=d.truncated,
                                 outer_multiple=d.outer_multiple,
                                 workers=args.workers)
    payload = {"meta": _meta(config, seed),
               "truncated": d.truncated,
               "outer_multiple": d.outer_multiple,
               "entries": [vars(e).copy() for e in curve.entries]}
    fits = {}
    try:
        fits["power_law"] = _fit_payload(fit_power_law(curve))
        fits["exponential"] = _fit_payload(fit_exponential(curve))
        fits["selected"] = model_select(curve).value
    except InvalidArgumentError as exc:
        fits["error"] = str(exc)
    payload["fits"] = fits
    rows = [{"params_hash": config.config_hash()[:16], "K": e.radius,
             "trials": e.trials, "successes": e.successes,
             "ci_lo": repr(e.ci_lo), "ci_hi": repr(e.ci_hi)}
            for e in curve.entries]
    out = Path(args.out_dir)
    stem = f"decay_{config.config_hash()[:8]}"
    path = _write_artifact(out, stem, args.format, payload, rows)
    _write_run_log(out, stem, started, args.workers)
    print(f"wrote {path}")
    return EXIT_OK


def _cmd_phase(args) -> int:
    started = time.time()
    config, seed = _load(args)
    p = config.phase
    grid = [config.params.__class__.uniform(config.n, config.k, level)
            for level in p.levels]
    if p.include_base:
        grid.append(config.params)
    rows = phase_scan(grid, p.probe_radius, p.trials, seed,
                      workers=args.workers)
    payload = {"meta": _meta(config, seed),
               "probe_radius": p.probe_radius,
               "rows": [{"params": {str(list(k)): v
                                    for k, v in r.params.items()},
                         "trials": r.point.trials,
                         "successes": r.point.successes,
                         "p_hat": r.point.p_hat,
                         "ci_lo": r.point.ci_lo, "ci_hi": r.point.ci_hi,
                         "regimes": list(r.regimes)} for r in rows]}
    csv_rows = [{"params_hash": config.config_hash()[:16],
                 "K": p.probe_radius, "trials": r.point.trials,
                 "successes": r.point.successes,
                 "ci_lo": repr(r.point.ci_lo), "ci_hi": repr(r.point.ci_hi),
                 "regimes": "|".join(r.regimes)} for r in rows]
    out = Path(args.out_dir)
    stem = f"phase_{config.config_hash()[:8]}"
    path = _write_artifact(out, stem, args.format, payload, csv_rows)
    _write_run_log(out, stem, started, args.workers)
    print(f"wrote {path}")
    return EXIT_OK


def _cmd_renorm(args) -> int:
    started = time.time()
    config, seed = _load(args)
    r = config.renorm
    view = FieldView(HyperplaneField(seed, config.params),
                     FieldMode.ALL_PLANES)
    side = r.side
    if side == 0:  # auto-calibrate by doubling search
        side = calibrate_box_side(config.params, seed)
        print(f"calibrated box side: {side}")
    diag = wall_event_diagnostics(view, r.height_steps, side,
                                  r.width_factor, r.barrier_radius,
                                  r.trials)
    payload = {"meta": _meta(config, seed),
               "events": [{"event": e.name, "trials": e.trials,
                           "successes": e.successes,
                           "ci_lo": e.as_point().ci_lo,
                           "ci_hi": e.as_point().ci_hi}
                          for e in diag.events],
               "implication_failures": list(diag.implication_failures)}
    out = Path(args.out_dir)
    stem = f"renorm_{config.config_hash()[:8]}"
    path = _write_artifact(out, stem, args.format, payload,
                           [dict(e) for e in payload["events"]])
    _write_run_log(out, stem, started, args.workers)
    print(f"wrote {path}")
    if diag.implication_failures:
        print("implication audit failed on trials "
              f"{list(diag.implication_failures)}", file=sys.stderr)
        return EXIT_FALSIFIED
    return EXIT_OK


def _cmd_verify(args) -> int:
    started = time.time()
    results = run_deterministic_audits()
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        print(f"[{status}] {r.name}" + (f": {r.detail}" if r.detail else ""))
    code = EXIT_OK if all(r.passed for r in results) else EXIT_FALSIFIED
    if args.stats and code == EXIT_OK:
        stat_results = run_statistical_checks()
        for r in stat_results:
            status = "PASS" if r.passed else "FAIL"
            print(f"[{status}] {r.name}: {r.detail}")
        if not all(r.passed for r in stat_results):
            code = EXIT_STATISTICAL
    if args.out_dir:
        out = Path(args.out_dir)
        payload = {"meta": _meta(None, 0),
                   "audits": [vars(r).copy() for r in results]}
        _write_artifact(out, "verify", "json", payload)
        _write_run_log(out, "verify", started, args.workers)
    return code


def _cmd_lift(args) -> int:
    if not args.walks and not args.crossings:
        raise SystemExit2("lift needs --walks or --crossings")
    payload: dict = {"meta": _meta(None, 0)}
    if args.walks:
        values = json.loads(args.walks)
        walks = [HeightWalk(tuple(v), v[-1]) for v in values]
        schedule = sync_walks(walks)
        payload["schedule"] = {"length": schedule.length,
                               "reparams": [list(f)
                                            for f in schedule.reparams]}
    if args.crossings:
        if not args.box:
            raise SystemExit2("--crossings requires --box N,m2,...")
        sides = [int(x) for x in args.box.split(",")]
        box = Box((0,) * len(sides), tuple(sides))
        spec = json.loads(args.crossings)
        crossings = [ProjectedCrossing(IndexSet.of(1, int(c["axis"])),
                                       tuple(tuple(p) for p in c["path"]))
                     for c in spec]
        path = lift_crossings(crossings, box)
        payload["lifted_path"] = [list(v) for v in path]
    print(json.dumps(payload, sort_keys=True, indent=2))
    if args.out_dir:
        _write_artifact(Path(args.out_dir), "lift", "json", payload)
    return EXIT_OK


def _cmd_basis(args) -> int:
    config = None
    n = args.n
    if args.config:
        config = load_config(args.config)
        n = n or config.n
    if n is None:
        raise SystemExit2("basis needs --n or --config")
    basis = build_inclined_basis(n)
    payload = {"meta": _meta(config, config.seed if config else 0),
               "n": n,
               "w1": list(basis.w1), "w2": list(basis.w2),
               "l1_norm": basis.reach,
               "separation": {"num": basis.separation.numerator,
                              "den": basis.separation.denominator,
                              "float": float(basis.separation)}}
    payload["pair_determinants"] = {
        str(list(s.members)): dict(injectivity_certificate(basis, s)
                                   .determinants)[s.members]
        for s in all_index_sets(n, 2)}
    if config is not None:
        mix = mixing_class_params(basis, config.params)
        payload["dependence_radius"] = float(mix.dependence_radius)
        payload["openness_lower_bound"] = mix.lower_bound
    print(json.dumps(payload, sort_keys=True, indent=2))
    if args.out_dir:
        _write_artifact(Path(args.out_dir), f"basis_n{n}", "json", payload)
    return EXIT_OK


_COMMANDS = {"decay": _cmd_decay, "phase": _cmd_phase, "verify": _cmd_verify,
             "lift": _cmd_lift, "renorm": _cmd_renorm, "basis": _cmd_basis}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        return _COMMANDS[args.command](args)
    except SystemExit2 as exc:
        print(f"error: {exc.message}", file=sys.stderr)
        return EXIT_USAGE
    except (ConfigError, InvalidArgumentError, FileNotFoundError,
            json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except FalsificationError as exc:
        print(f"falsified: {exc}", file=sys.stderr)
        return EXIT_FALSIFIED


if __name__ == "__main__":
    sys.exit(main())
