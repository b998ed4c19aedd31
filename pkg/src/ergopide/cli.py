"""Command-line entry point.

Exit codes: 0 success, 1 solver failure, 2 configuration error,
3 a pass/fail check (reproduction metric or audit) failed.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Sequence

from . import __version__
from .cauchy import SolverError, solve_cauchy, write_run
from .catalog import CATALOG, UnknownExampleError, reproduce, run_audits
from .config import ConfigError, ExperimentConfig, build_problem, initial_datum, parse_config
from .diagnostics import audit_Ha, audit_Hb, audit_propH, convergence_report
from .ergodic import long_time_pair, vanishing_discount
from .levy import LevyMeasureSpec, audit_M1, audit_M2
from .scheme import CFLError

EXIT_OK, EXIT_SOLVER, EXIT_CONFIG, EXIT_CHECK = 0, 1, 2, 3

SUBCOMMAND_MODE = {
    "solve-cauchy": "cauchy",
    "solve-ergodic": None,  # ergodic-vd unless the config asks for ergodic-lt
    "convergence": "convergence",
    "audit": "audit",
}


def _dump(obj: Any) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, default=_json_default) + "\n"


def _json_default(o):
    if hasattr(o, "to_dict"):
        return o.to_dict()
    if hasattr(o, "tolist"):
        return o.tolist()
    raise TypeError(f"not JSON serializable: {type(o).__name__}")


def _write_manifest(out: Path, config: dict[str, Any], results: dict[str, Any], wall: float) -> None:
    manifest = {
        "config": config,
        "library_version": __version__,
        "wall_time_seconds": wall,
        "timestamp": datetime.now(timezone.utc).isoformat(),
        "results": results,
    }
    (out / "manifest.json").write_text(_dump(manifest))


def _load_config(path: str) -> ExperimentConfig:
    try:
        text = sys.stdin.read() if path == "-" else Path(path).read_text()
    except OSError as exc:
        raise ConfigError("unreadable-config", "", str(exc)) from None
    return parse_config(text)


def run_experiment(
    cfg: ExperimentConfig,
    output_dir: str | Path,
    mode: str | None = None,
    tol: float | None = None,
    log=print,
) -> tuple[int, dict[str, Any]]:
    """Dispatch ``cfg`` to the relevant solver and write its outputs.

    Returns the exit status and the result summary echoed in ``manifest.json``.
    """
    mode = mode or cfg.mode
    out = Path(output_dir)
    out.mkdir(parents=True, exist_ok=True)
    params = cfg.parameters
    solver_tol = tol if tol is not None else params["tol"]
    start = time.perf_counter()
    status = EXIT_OK
    results: dict[str, Any] = {"mode": mode}

    if mode == "audit":
        audits: dict[str, Any] = {}
        spec = params.get("audit", {})
        for beta in spec.get("betas", []):
            measure = LevyMeasureSpec(beta)
            audits[f"M1[beta={beta}]"] = audit_M1(measure).to_dict()
            audits[f"M2[beta={beta}]"] = audit_M2(measure).to_dict()
        m = spec.get("m", cfg.raw.get("m"))
        if m is not None:
            if m > 1:
                audits["H-b"] = audit_Hb(m, seed=cfg.seed).to_dict()
                audits["propH"] = audit_propH(m).to_dict()
            else:
                audits["H-a"] = audit_Ha(m, [[1.0, 0.0], [0.3, -2.0]]).to_dict()
        if cfg.grid is not None and "f" in cfg.raw:
            audits.update({f"problem:{k}": v for k, v in run_audits(build_problem(cfg)).items()})
        (out / "audits.json").write_text(_dump(audits))
        results["audits"] = {k: v["pass"] for k, v in audits.items()}
        if not all(v["pass"] for v in audits.values()):
            status = EXIT_CHECK
    else:
        problem = build_problem(cfg)
        u0 = initial_datum(cfg)
        T = float(params["T"])
        if mode == "cauchy":
            run = solve_cauchy(u0, problem, T, params.get("snapshot_times"))
            write_run(run, out)
            results.update(steps=run.steps, final_mean=float(run.final().values.mean()),
                           slopes=run.slope_series)
        elif mode in ("ergodic-vd", "ergodic-lt"):
            if mode == "ergodic-vd":
                pair = vanishing_discount(problem, params["delta_schedule"], solver_tol)
            else:
                pair = long_time_pair(problem, u0, T, params.get("window"))
            pair.write(out)
            results["pair"] = pair.to_dict()
        elif mode == "convergence":
            pair = vanishing_discount(problem, params["delta_schedule"], solver_tol)
            run = solve_cauchy(u0, problem, T, params.get("snapshot_times"))
            report = convergence_report(run, pair)
            (out / "convergence.csv").write_text(report.to_csv())
            pair.write(out)
            write_run(run, out)
            results.update(pair=pair.to_dict(), m_bar=report.m_bar, monotone_violation=report.monotone_violation,
                           final_osc=report.osc_series[-1])
        else:
            raise ConfigError("schema-violation", "/mode", f"mode {mode!r} is not runnable from a config file")
    wall = time.perf_counter() - start
    _write_manifest(out, cfg.to_dict(), results, wall)
    log(f"{mode}: wrote {out} in {wall:.1f}s")
    return status, results


def _cmd_reproduce(args, log) -> int:
    try:
        report = reproduce(args.example_id, m=args.m, n=args.n, tol=args.tol, log=log)
    except UnknownExampleError as exc:
        print(f"error: {exc.args[0]}", file=sys.stderr)
        return EXIT_CONFIG
    out = Path(args.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    table = report.table()
    (out / "reproduce.txt").write_text(table + "\n")
    pairs = report.details.pop("pairs")
    for name, pair in pairs.items():
        pair.write(out, prefix=f"{name}_")
    (out / "reproduce.json").write_text(_dump({"example_id": args.example_id, "metrics": report.metrics,
                                               "rows": report.rows, "details": report.details}))
    _write_manifest(out, CATALOG[args.example_id].config, {"passed": report.passed, "metrics": report.metrics},
                    report.wall_time)
    if not args.quiet:
        print(table)
        print(f"{args.example_id}: {'PASS' if report.passed else 'FAIL'} ({report.wall_time:.1f}s)")
    return EXIT_OK if report.passed else EXIT_CHECK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ergopide", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--output-dir", default="ergopide-out", help="directory for emitted files")
    common.add_argument("--tol", type=float, default=None, help="solver tolerance override")
    common.add_argument("--seed", type=int, default=None, help="seed for randomized probes")
    common.add_argument("--quiet", action="store_true", help="suppress progress output")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in SUBCOMMAND_MODE:
        p = sub.add_parser(name, parents=[common], help=f"run a {name} experiment from a JSON config")
        p.add_argument("config", help="path to a JSON config ('-' for stdin)")
    p = sub.add_parser("reproduce", parents=[common], help="run a catalog example and check its metrics")
    p.add_argument("example_id")
    p.add_argument("--m", type=float, default=None, help="override the H exponent (superlinear entries)")
    p.add_argument("--n", type=int, default=None, help="override the grid size")
    sub.add_parser("list-examples", help="list catalog entries")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    log = (lambda _m: None) if getattr(args, "quiet", False) else (lambda m: print(m, file=sys.stderr))
    try:
        if args.command == "list-examples":
            for entry in CATALOG.values():
                print(f"{entry.id:<18} {entry.description}")
            return EXIT_OK
        if args.command == "reproduce":
            return _cmd_reproduce(args, log)
        cfg = _load_config(args.config)
        if args.seed is not None:
            cfg.seed = args.seed
        mode = SUBCOMMAND_MODE[args.command]
        if mode is None:
            mode = cfg.mode if cfg.mode in ("ergodic-vd", "ergodic-lt") else "ergodic-vd"
        status, _ = run_experiment(cfg, args.output_dir, mode, args.tol, log)
        return status
    except ConfigError as exc:
        print(json.dumps({"error": exc.to_dict()}), file=sys.stderr)
        return EXIT_CONFIG
    except (SolverError, CFLError) as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
