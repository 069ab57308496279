"""Batch front end: scripted analysis, scenario generation, flow merging.

Exit codes: 0 success, 1 I/O failures (unreadable or unwritable files),
2 modeled analysis/schema errors. Results are written as files; stdout gets
a one-line digest per artifact so runs are grep-able in CI logs.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .dataset import DEFAULT_DISCRETE_THRESHOLD, IngestOptions, load_csv
from .errors import TempoCauseError
from .estimate import (
    DEFAULT_MAX_ITERATIONS,
    DEFAULT_THETA_FRACTION,
    EstimatorConfig,
)
from .flowgraph import CausalFlowGraph, merge_graphs, persist, restore
from .formula import EffectSpec, EventDef, Range, LevelSet, Window
from .reporting import report_json_bytes, summary_markdown, sweep_csv_text
from .scenarios import generate
from .session import AnalysisSession

EXIT_OK = 0
EXIT_IO = 1
EXIT_ANALYSIS = 2


def parse_effect_spec(text: str, p_threshold: float | None = None) -> EffectSpec:
    """Mini-grammar "<var>:<increase|decrease|valuein>[:lo,hi]".

    For valuein, "lo,hi" may instead be a comma-separated list of level
    labels when the effect variable is discrete.
    """
    parts = text.split(":")
    if len(parts) < 2:
        raise TempoCauseError(
            f"effect spec {text!r} must look like '<var>:<increase|decrease|valuein>[:lo,hi]'"
        )
    var, etype = parts[0], parts[1].lower()
    if etype in ("increase", "decrease"):
        if len(parts) != 2:
            raise TempoCauseError(f"{etype} takes no value constraint (got {text!r})")
        return EffectSpec(effect_type=etype, variable=var)
    if etype != "valuein":
        raise TempoCauseError(f"unknown effect type {etype!r} in {text!r}")
    if len(parts) != 3:
        raise TempoCauseError(f"valuein needs ':lo,hi' or ':levelA,levelB' (got {text!r})")
    items = [p.strip() for p in parts[2].split(",") if p.strip()]
    if not items:
        raise TempoCauseError(f"empty value constraint in {text!r}")
    try:
        numbers = [float(p) for p in items]
        if len(numbers) != 2:
            raise TempoCauseError(f"valuein range needs exactly lo,hi (got {text!r})")
        constraint: Range | LevelSet = Range(numbers[0], numbers[1])
    except ValueError:
        constraint = LevelSet(frozenset(items))
    event = EventDef(id="effect", variable=var, constraint=constraint)
    return EffectSpec(effect_type="valuein", event=event, p_threshold=p_threshold)


def parse_window(text: str) -> Window:
    try:
        r_text, s_text = text.split(",")
        return Window(int(r_text), int(s_text))
    except ValueError as exc:
        raise TempoCauseError(f"window must be 'r,s' integers, got {text!r}") from exc


def _load_causes(path: Path) -> list[EventDef]:
    data = json.loads(path.read_text(encoding="utf-8"))
    if not isinstance(data, list):
        raise TempoCauseError("causes file must hold a JSON list of event definitions")
    return [EventDef.from_dict(item) for item in data]


def _ingest_options(args) -> IngestOptions:
    return IngestOptions(
        time_col=args.time_col,
        discrete_cols=frozenset(args.discrete_cols or ()),
        discrete_threshold=args.discrete_threshold,
    )


def cmd_analyze(args) -> int:
    ds = load_csv(args.data, _ingest_options(args))
    session = AnalysisSession(dataset=ds)
    session.set_window(parse_window(args.window))
    session.set_epsilon(args.eps)
    session.set_effect(parse_effect_spec(args.effect, args.p_threshold))

    estimation = None
    if args.estimate:
        cfg = EstimatorConfig(
            theta_fraction=args.theta,
            max_iterations=args.max_iter,
            min_cluster_mass=args.min_mass,
        )
        estimation, _ = session.estimate(cfg, exclude=set(args.exclude or ()))
    else:
        for event in _load_causes(Path(args.causes)):
            session.add_cause(event)

    report = session.report()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "report.json").write_bytes(report_json_bytes(report))
    print(f"report.json: {len(report.causes)} causes, "
          f"{len(report.significant_events)} significant")

    profile = None
    if args.sweep is not None:
        profile = session.sweep(args.sweep)
        (out / "sweep.csv").write_text(sweep_csv_text(profile), encoding="utf-8")
        print(f"sweep.csv: delays 0..{args.sweep}")

    (out / "summary.md").write_text(
        summary_markdown(ds, report, profile, estimation), encoding="utf-8"
    )
    print("summary.md written")
    return EXIT_OK


def cmd_gen(args) -> int:
    params: dict = {}
    if args.length is not None:
        params["length"] = args.length
    if args.scenario in ("shift", "planted-range") and args.delay is not None:
        params["delay"] = args.delay
    if args.scenario == "chain":
        if args.lag1 is not None:
            params["lag1"] = args.lag1
        if args.lag2 is not None:
            params["lag2"] = args.lag2
    if args.scenario == "null" and args.vars is not None:
        params["n_vars"] = args.vars
    output = generate(args.scenario, args.seed, **params)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(output.csv_text, encoding="utf-8")
    sidecar = out.with_suffix(".truth.json")
    sidecar.write_text(
        json.dumps(output.ground_truth, indent=2) + "\n", encoding="utf-8"
    )
    print(f"{out} + {sidecar.name} (scenario {args.scenario}, seed {args.seed})")
    return EXIT_OK


def cmd_flow_merge(args) -> int:
    merged = CausalFlowGraph()
    first = True
    for path in args.graphs:
        graph, _ = restore(path)
        if first:
            merged.fingerprint = graph.fingerprint
            first = False
        diff = merge_graphs(merged, graph)
        for rejected in diff["rejected_edges"]:
            print(
                f"warning: edge {rejected['from']} -> {rejected['to']} rejected "
                f"(cycle via {' -> '.join(rejected['path'])})",
                file=sys.stderr,
            )
    persist(merged, args.out)
    print(f"{args.out}: {len(merged.nodes)} nodes, {len(merged.edges)} edges")
    return EXIT_OK


def cmd_serve(args) -> int:
    import uvicorn

    from .server import create_app

    app = create_app(data_dir=args.data_dir, cors_origin=args.cors_origin)
    uvicorn.run(app, host=args.bind, port=args.port, log_level="info")
    return EXIT_OK


def cmd_openapi(args) -> int:
    from .server import create_app

    app = create_app()
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(json.dumps(app.openapi(), indent=2) + "\n", encoding="utf-8")
    print(f"{out} written")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tempocause",
        description="Test and discover time-lagged causal relations in multivariate series.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    analyze = sub.add_parser("analyze", help="run significance analysis on a CSV file")
    analyze.add_argument("--data", required=True, help="input CSV (header row, comma separated)")
    analyze.add_argument(
        "--effect",
        required=True,
        help="effect spec '<var>:<increase|decrease|valuein>[:lo,hi]' "
        "(valuein on a discrete variable takes ':levelA,levelB')",
    )
    analyze.add_argument("--window", default="1,1", help="delay window 'r,s' in index units")
    group = analyze.add_mutually_exclusive_group(required=True)
    group.add_argument("--causes", help="JSON file with a list of cause event definitions")
    group.add_argument("--estimate", action="store_true", help="auto-estimate potential causes")
    analyze.add_argument("--eps", type=float, default=0.0, help="significance threshold")
    analyze.add_argument("--p-threshold", type=float, default=None,
                         help="probability bar p for valuein effects")
    analyze.add_argument("--sweep", type=int, default=None, metavar="D",
                         help="also sweep exact delays 0..D into sweep.csv")
    analyze.add_argument("--out", required=True, help="output directory")
    analyze.add_argument("--theta", type=float, default=DEFAULT_THETA_FRACTION,
                         help="cluster radius as a fraction of the variable's range")
    analyze.add_argument("--max-iter", type=int, default=DEFAULT_MAX_ITERATIONS)
    analyze.add_argument("--min-mass", type=int, default=None,
                         help="outlier floor (default max(2, 1%% of evidence))")
    analyze.add_argument("--exclude", action="append", default=[],
                         help="variable to skip during estimation (repeatable)")
    analyze.add_argument("--time-col", default=None)
    analyze.add_argument("--discrete-cols", action="append", default=[])
    analyze.add_argument("--discrete-threshold", type=int, default=DEFAULT_DISCRETE_THRESHOLD)
    analyze.set_defaults(fn=cmd_analyze)

    gen = sub.add_parser("gen", help="generate a synthetic scenario dataset")
    gen.add_argument("--scenario", required=True,
                     choices=["shift", "planted-range", "chain", "null"])
    gen.add_argument("--seed", type=int, required=True)
    gen.add_argument("--out", required=True, help="output CSV path (sidecar: <out>.truth.json)")
    gen.add_argument("--length", type=int, default=None)
    gen.add_argument("--delay", type=int, default=None, help="shift/planted-range lag")
    gen.add_argument("--lag1", type=int, default=None, help="chain: first hop lag")
    gen.add_argument("--lag2", type=int, default=None, help="chain: second hop lag")
    gen.add_argument("--vars", type=int, default=None, help="null: number of series")
    gen.set_defaults(fn=cmd_gen)

    flow = sub.add_parser("flow", help="flow graph utilities")
    flow_sub = flow.add_subparsers(dest="flow_command", required=True)
    merge = flow_sub.add_parser("merge", help="merge flow graph files")
    merge.add_argument("graphs", nargs="+", help="flow graph JSON files")
    merge.add_argument("-o", "--out", required=True, help="merged output path")
    merge.set_defaults(fn=cmd_flow_merge)

    serve = sub.add_parser("serve", help="run the HTTP service")
    serve.add_argument("--port", type=int, default=8787)
    serve.add_argument("--bind", default="127.0.0.1")
    serve.add_argument("--data-dir", default=".", help="directory holding loadable CSV files")
    serve.add_argument("--cors-origin", default="*")
    serve.set_defaults(fn=cmd_serve)

    openapi = sub.add_parser("openapi", help="write the OpenAPI description")
    openapi.add_argument("--out", default="docs/openapi.json")
    openapi.set_defaults(fn=cmd_openapi)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except TempoCauseError as exc:
        print(f"error [{exc.code}]: {exc.message}", file=sys.stderr)
        return EXIT_ANALYSIS
    except OSError as exc:
        print(f"error [io]: {exc}", file=sys.stderr)
        return EXIT_IO
    except json.JSONDecodeError as exc:
        print(f"error [bad_json]: {exc}", file=sys.stderr)
        return EXIT_ANALYSIS


if __name__ == "__main__":
    sys.exit(main())
