"""``pubsubconf`` command line: catalog | synthesize | validate | simulate | compare.

Exit codes: 0 ok, 1 guideline errors (or warnings with --strict, or a failed
misconfiguration experiment), 2 usage/parse/structural errors, 3 internal error.
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from .config import ConfigError, Severity, config_to_dict, dump_config, load_config, validate_structural
from .mapping import DeltaPreference, GuidelineError, SynthesisOptions, guideline_findings, synthesize
from .pipeline import Publisher, write_trace
from .scenario import ScenarioError, load_scenarios, metrics_csv, metrics_summary
from .sim import compare, run_scenario
from .traffic import CommLevel, TrafficType, builtin_catalog, builtin_spec, catalog_text, format_traffic_catalog
from .usecase import builtin_usecase, format_value, run_misconfiguration_suite

EXIT_OK, EXIT_GUIDELINE, EXIT_STRUCTURAL, EXIT_INTERNAL = 0, 1, 2, 3


class _Fail(Exception):
    def __init__(self, code: int, message: str):
        self.code = code
        super().__init__(message)


def _traffic(raw: str) -> TrafficType:
    try:
        return TrafficType.lookup(raw)
    except ValueError as exc:
        raise _Fail(EXIT_STRUCTURAL, str(exc)) from None


def _options(args: argparse.Namespace) -> SynthesisOptions:
    return SynthesisOptions(
        delta_preference=DeltaPreference(args.delta),
        endpoint_supports_pubsub=not args.no_pubsub_endpoint,
        publisher_has_multiple_cyclic_dsms=args.multiple_dsms,
        expected_change_fraction=args.change_fraction,
        key_frame_count_if_delta=args.kfc,
        mean_field_size=args.field_size,
        bulk_flow=args.bulk,
        publishing_interval=args.interval_us,
        keepalive_intervals=args.keepalive_intervals,
    )


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


# -- commands ------------------------------------------------------------------------


def cmd_catalog(args: argparse.Namespace) -> int:
    if args.format == "machine" and not args.level:
        sys.stdout.write(catalog_text())
        return EXIT_OK
    specs = builtin_catalog()
    if args.level:
        level = CommLevel(args.level)
        specs = [s for s in specs if level in s.comm_levels]
    if args.format == "machine":
        sys.stdout.write(format_traffic_catalog(specs))
        return EXIT_OK
    print(f"{'ID':>3}  {'Traffic type':<18} {'Periodic':<9} {'Criticality':<12} "
          f"{'Loss tol.':<10} {'Length':<9} Levels")
    for s in specs:
        levels = ", ".join(lv.value for lv in CommLevel if lv in s.comm_levels)
        print(
            f"{int(s.type):>3}  {s.name:<18} {'Yes' if s.periodic else 'No':<9} "
            f"{s.criticality.value:<12} {'Yes' if s.loss_tolerant else 'No':<10} "
            f"{s.length_consistency.value:<9} {levels}"
        )
    return EXIT_OK


def cmd_synthesize(args: argparse.Namespace) -> int:
    spec = builtin_spec(_traffic(args.traffic))
    try:
        cfg = synthesize(spec, _options(args))
    except GuidelineError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_GUIDELINE
    _emit(dump_config(cfg), args.out)
    return EXIT_OK


def cmd_validate(args: argparse.Namespace) -> int:
    try:
        cfg = load_config(Path(args.config).read_text(encoding="utf-8"))
    except (OSError, ConfigError) as exc:
        print(f"error: {args.config}: {exc}", file=sys.stderr)
        return EXIT_STRUCTURAL
    structural = validate_structural(cfg)
    findings = []
    if args.traffic:
        spec = builtin_spec(_traffic(args.traffic))
        context = None
        if args.change_fraction is not None or args.multiple_dsms:
            context = SynthesisOptions(
                expected_change_fraction=1.0 if args.change_fraction is None else args.change_fraction,
                publisher_has_multiple_cyclic_dsms=args.multiple_dsms,
                mean_field_size=args.field_size,
            )
        findings = guideline_findings(cfg, spec, context)

    diags = structural + findings
    if args.format == "machine":
        print(json.dumps([d.to_dict() for d in diags], indent=2))
    else:
        print(f"structural: {len(structural)} finding(s)")
        for d in structural:
            print(f"  {d}")
        if args.traffic:
            print(f"guideline ({spec.name}): {len(findings)} finding(s)")
            for d in findings:
                print(f"  {d}")

    if structural:
        return EXIT_STRUCTURAL
    if any(d.severity is Severity.ERROR for d in findings):
        return EXIT_GUIDELINE
    if args.strict and any(d.severity is Severity.WARNING for d in findings):
        return EXIT_GUIDELINE
    return EXIT_OK


def _run_all(scenarios, jobs: int):
    if jobs > 1 and len(scenarios) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(run_scenario, scenarios))
    return [run_scenario(s) for s in scenarios]


def cmd_simulate(args: argparse.Namespace) -> int:
    if args.builtin == "misconfig-suite":
        return _simulate_suite(args)
    if args.builtin == "usecase":
        scenarios = builtin_usecase(args.seed)
        seed = scenarios[0].seed
    elif args.scenario:
        path = Path(args.scenario)
        try:
            scenarios = load_scenarios(path.read_text(encoding="utf-8"), seed=args.seed, base_dir=path.parent)
        except (OSError, ScenarioError, ValueError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_STRUCTURAL
        seed = scenarios[0].seed if scenarios else 0
    else:
        raise _Fail(EXIT_STRUCTURAL, "give a scenario file or --builtin")

    for s in scenarios:
        errs = validate_structural(s.config)
        if errs:
            print(f"error: {s.flow_id}: {errs[0]}", file=sys.stderr)
            return EXIT_STRUCTURAL
    if args.trace:
        trace_dir = Path(args.trace)
        trace_dir.mkdir(parents=True, exist_ok=True)
        for s in scenarios:
            pub = Publisher(s.datasets, s.config, seed=s.seed)
            name = s.flow_id.replace(" ", "_").lower() + ".trace.csv"
            write_trace(trace_dir / name, pub.run(s.duration_ticks, halt_at=s.halt_at))
    rows = _run_all(scenarios, args.jobs)
    table = metrics_csv(rows, scenarios)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "metrics.csv").write_text(table, encoding="utf-8")
        (out / "summary.json").write_text(
            json.dumps(metrics_summary(rows, seed), indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )
        print(f"wrote {out / 'metrics.csv'} and {out / 'summary.json'}")
    else:
        sys.stdout.write(table)
    return EXIT_OK


def _simulate_suite(args: argparse.Namespace) -> int:
    results = run_misconfiguration_suite(args.seed)
    records = []
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        print(
            f"{status} {r.case.name:<28} rules={','.join(r.raised_rules) or '-'} "
            f"{r.case.metric}: baseline={format_value(r.baseline_value)} "
            f"misconfigured={format_value(r.bad_value)}"
        )
        records.append(
            {
                "case": r.case.name,
                "topic": r.case.topic,
                "flow_id": r.case.scenario.flow_id,
                "expected_rules": list(r.case.expected_rules),
                "raised_rules": list(r.raised_rules),
                "metric": r.case.metric,
                "baseline": format_value(r.baseline_value),
                "misconfigured": format_value(r.bad_value),
                "passed": r.passed,
            }
        )
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "misconfig_suite.json").write_text(json.dumps(records, indent=2) + "\n", encoding="utf-8")
    return EXIT_OK if all(r.passed for r in results) else EXIT_GUIDELINE


def cmd_compare(args: argparse.Namespace) -> int:
    try:
        a = load_config(Path(args.config_a).read_text(encoding="utf-8"))
        b = load_config(Path(args.config_b).read_text(encoding="utf-8"))
    except (OSError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_STRUCTURAL
    for cfg in (a, b):
        errs = validate_structural(cfg)
        if errs:
            print(f"error: {errs[0]}", file=sys.stderr)
            return EXIT_STRUCTURAL
    if args.scenario:
        path = Path(args.scenario)
        flows = load_scenarios(path.read_text(encoding="utf-8"), seed=args.seed, base_dir=path.parent)
    else:
        flows = builtin_usecase(args.seed)
    try:
        base = next(f for f in flows if f.flow_id == args.flow) if args.flow else flows[0]
    except StopIteration:
        raise _Fail(EXIT_STRUCTURAL, f"no flow named {args.flow!r}") from None
    report = compare(a, b, base)
    if args.format == "machine":
        doc = {
            "flow_id": base.flow_id,
            "a": report.a.as_row(),
            "b": report.b.as_row(),
            "ratios_b_over_a": report.ratios,
        }
        print(json.dumps(doc, indent=2, default=str))
        return EXIT_OK
    ra, rb = report.a.as_row(), report.b.as_row()
    print(f"{base.flow_id}: a={args.config_a} b={args.config_b}")
    print(f"{'metric':<26} {'a':>14} {'b':>14} {'b/a':>8}")
    for name, ratio in report.ratios.items():
        r = "-" if ratio is None else f"{ratio:.3f}"
        print(f"{name:<26} {str(ra[name]):>14} {str(rb[name]):>14} {r:>8}")
    return EXIT_OK


# -- parser --------------------------------------------------------------------------


def _add_synthesis_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--delta", choices=[d.value for d in DeltaPreference], default="auto")
    p.add_argument("--kfc", type=int, default=8, help="KeyFrameCount when delta frames are used")
    p.add_argument("--change-fraction", type=float, default=1.0,
                   help="expected fraction of fields changing per interval")
    p.add_argument("--field-size", type=float, default=4.0, help="mean field size in bytes")
    p.add_argument("--multiple-dsms", action="store_true",
                   help="publisher sends several cyclic datasets on the same interval")
    p.add_argument("--bulk", action="store_true", help="event flow without latency requirement")
    p.add_argument("--no-pubsub-endpoint", action="store_true",
                   help="receiver cannot decode UADP (cloud/enterprise)")
    p.add_argument("--interval-us", type=int, default=10_000)
    p.add_argument("--keepalive-intervals", type=int, default=4)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=["text", "machine"], default=argparse.SUPPRESS)
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS)
    common.add_argument("--strict", action="store_true", default=argparse.SUPPRESS,
                        help="treat guideline warnings as failures")

    parser = argparse.ArgumentParser(prog="pubsubconf", parents=[common], description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("catalog", parents=[common], help="print the traffic-type catalog")
    p.add_argument("--level", choices=[lv.value for lv in CommLevel], help="filter by communication level")
    p.set_defaults(func=cmd_catalog)

    p = sub.add_parser("synthesize", parents=[common], help="derive a publisher config for a traffic type")
    p.add_argument("--traffic", required=True, help="traffic id or name, e.g. 4 or event")
    _add_synthesis_flags(p)
    p.add_argument("--out", help="write the config here instead of stdout")
    p.set_defaults(func=cmd_synthesize)

    p = sub.add_parser("validate", parents=[common], help="structural and guideline check of a config")
    p.add_argument("config", help="config JSON document")
    p.add_argument("--traffic", help="traffic id or name to audit against")
    p.add_argument("--change-fraction", type=float, default=None)
    p.add_argument("--field-size", type=float, default=4.0)
    p.add_argument("--multiple-dsms", action="store_true")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("simulate", parents=[common], help="run scenarios and write metrics")
    p.add_argument("scenario", nargs="?", help="scenario JSON document")
    p.add_argument("--builtin", choices=["usecase", "misconfig-suite"])
    p.add_argument("--out", help="output directory")
    p.add_argument("--jobs", type=int, default=1, help="parallel scenario runs")
    p.add_argument("--trace", metavar="DIR", help="also write a per-DSM trace CSV for each flow")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("compare", parents=[common], help="paired simulation of two configs")
    p.add_argument("--config-a", required=True)
    p.add_argument("--config-b", required=True)
    p.add_argument("--scenario", help="scenario document (default: built-in use case)")
    p.add_argument("--flow", help="flow id within the scenario, e.g. 'Flow 3'")
    p.set_defaults(func=cmd_compare)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    for name, default in (("format", "text"), ("seed", None), ("strict", False)):
        if not hasattr(args, name):
            setattr(args, name, default)
    try:
        return args.func(args)
    except _Fail as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except Exception as exc:  # noqa: BLE001
        print(f"internal error: {exc!r}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
