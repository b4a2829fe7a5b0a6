"""Command line entry points: run, report, serve, detect, simulate, compare."""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

from .config import load_config
from .errors import ConfigError, InputError, VerispiceError


def _json(data) -> None:
    print(json.dumps(data, indent=2, sort_keys=True))


def _load(args):
    return load_config(getattr(args, "config", None))


def _cmd_run(args) -> int:
    from .pipeline import batch_run

    config = _load(args)
    if args.parallel is not None:
        config = replace(config, parallelism=args.parallel)
    if args.tolerance_rel is not None:
        config = replace(config, rel_tolerance=args.tolerance_rel)
    summary = batch_run(
        args.problems_dir, args.workspace, config, resume=args.resume
    )
    _json(summary)
    return 1 if summary.get("errors") else 0


def _cmd_report(args) -> int:
    from .pipeline import summarize

    _json(summarize(args.workspace))
    return 0


def _cmd_serve(args) -> int:
    from .api import ReviewService, create_app

    config = _load(args)
    service = ReviewService(
        args.problems_dir,
        args.workspace,
        config=config,
        allow_netlist_patch=args.allow_netlist_patch,
        access_token=args.access_token,
    )
    app = create_app(service)
    try:
        import uvicorn
    except ImportError as exc:  # pragma: no cover - depends on install extras
        raise ConfigError("the serve command needs uvicorn installed") from exc
    uvicorn.run(app, host=args.host, port=args.port)
    return 0


def _cmd_detect(args) -> int:
    from .vision.detect import ExternalDetectorClient, detect_dependent_sources

    path = Path(args.image)
    if not path.is_file():
        raise InputError(f"image not found: {path}")
    detections = detect_dependent_sources(path.read_bytes())
    config = _load(args)
    if config.detector_command or config.detector_url:
        client = ExternalDetectorClient(
            command=list(config.detector_command),
            url=config.detector_url,
            threshold=config.detector_threshold,
        )
        detections.extend(client.detect(path))
    _json(
        [
            {
                "kind": d.kind.value,
                "box": list(d.box),
                "origin": d.origin.value,
                "confidence": d.confidence,
            }
            for d in detections
        ]
    )
    return 0


def _cmd_simulate(args) -> int:
    from .sim.runner import run as run_simulation

    config = _load(args)
    ngspice = args.ngspice or config.ngspice
    outcome = run_simulation(args.netlist, ngspice, args.timeout or config.sim_timeout)
    summary = {"status": outcome.status.value, "ok": outcome.ok, "detail": outcome.detail}
    if outcome.ok:
        series = outcome.series
        summary["axis"] = series.axis_kind.value
        summary["points"] = len(series)
        summary["final"] = {
            name: values[-1] for name, values in sorted(series.variables.items())
        }
    _json(summary)
    return 0 if outcome.ok else 1


def _cmd_compare(args) -> int:
    from .compare.expr import RationalNetworkFunction, evaluate, parse_expression
    from .compare.verdict import TolerancePolicy, compare
    from .sim.output import AxisKind, series_from_json

    series = series_from_json(Path(args.sim_json).read_text(encoding="utf-8"))
    expr = parse_expression(Path(args.expr_file).read_text(encoding="utf-8").strip())
    policy = TolerancePolicy(args.tolerance_rel, args.tolerance_abs)
    if isinstance(expr, RationalNetworkFunction):
        if series.axis_kind is not AxisKind.FREQUENCY:
            raise InputError(
                f"a network function needs a frequency sweep, got a "
                f"{series.axis_kind.value} axis"
            )
        magnitude, phase = evaluate(expr, series.axis, AxisKind.FREQUENCY)
        mag = compare(series, magnitude, policy, variable="magout")
        ph = compare(series, phase, policy, variable="phout", angular=True)
        match = mag.is_match and ph.is_match
        _json(
            {
                "overall": "match" if match else "mismatch",
                "magnitude": mag.to_dict(),
                "phase": ph.to_dict(),
            }
        )
        return 0 if match else 1
    if series.axis_kind is not AxisKind.TIME:
        raise InputError(
            f"a time-domain expression needs a transient result, got a "
            f"{series.axis_kind.value} axis"
        )
    values = evaluate(expr, series.axis, AxisKind.TIME)
    report = compare(series, values, policy, variable=args.variable)
    _json(report.to_dict())
    return 0 if report.is_match else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="verispice",
        description="Solve circuit problems with an LLM and verify them in SPICE.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run every problem under a directory")
    run_p.add_argument("problems_dir", help="directory of problem folders")
    run_p.add_argument("--parallel", type=int, metavar="N", help="worker threads")
    run_p.add_argument(
        "--tolerance-rel", type=float, metavar="R", help="relative match tolerance"
    )
    run_p.add_argument(
        "--resume", action="store_true", help="continue an interrupted batch"
    )
    run_p.add_argument("--workspace", default="workspace", help="workspace root")
    run_p.add_argument("--config", help="TOML config file")
    run_p.set_defaults(fn=_cmd_run)

    report_p = sub.add_parser("report", help="summarize a workspace")
    report_p.add_argument("workspace", help="workspace root to summarize")
    report_p.set_defaults(fn=_cmd_report)

    serve_p = sub.add_parser("serve", help="serve the review queue over HTTP")
    serve_p.add_argument("problems_dir", help="directory of problem folders")
    serve_p.add_argument("--workspace", default="workspace", help="workspace root")
    serve_p.add_argument("--host", default="127.0.0.1", help="bind address")
    serve_p.add_argument("--port", type=int, default=8765, help="bind port")
    serve_p.add_argument(
        "--access-token", default="", help="require this bearer token on every request"
    )
    serve_p.add_argument(
        "--allow-netlist-patch",
        action="store_true",
        help="enable the expert endpoint that patches netlists by hand",
    )
    serve_p.add_argument("--config", help="TOML config file")
    serve_p.set_defaults(fn=_cmd_serve)

    detect_p = sub.add_parser("detect", help="print source detections for an image")
    detect_p.add_argument("image", help="schematic raster image")
    detect_p.add_argument("--config", help="TOML config file")
    detect_p.set_defaults(fn=_cmd_detect)

    sim_p = sub.add_parser("simulate", help="run one netlist and summarize the result")
    sim_p.add_argument("netlist", help="netlist file")
    sim_p.add_argument("--ngspice", help="simulator executable")
    sim_p.add_argument("--timeout", type=float, help="seconds before the run is killed")
    sim_p.add_argument("--config", help="TOML config file")
    sim_p.set_defaults(fn=_cmd_simulate)

    cmp_p = sub.add_parser("compare", help="compare a series file with an expression")
    cmp_p.add_argument("sim_json", help="simulation series JSON")
    cmp_p.add_argument("expr_file", help="file holding one answer expression")
    cmp_p.add_argument("--variable", help="series variable to compare against")
    cmp_p.add_argument("--tolerance-rel", type=float, default=0.02, metavar="R")
    cmp_p.add_argument("--tolerance-abs", type=float, default=1e-6, metavar="A")
    cmp_p.set_defaults(fn=_cmd_compare)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except VerispiceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
