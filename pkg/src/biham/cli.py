"""Command-line front end: ``biham verify | simulate | list-suites``."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .simulate import DEMO_CONFIG, ConfigError, drift_summary, load_config, run_simulation
from .suites import SUITES, SuiteSpec, run_suite

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _tol_pair(text: str) -> tuple[str, float]:
    key, sep, val = text.partition("=")
    if not sep or not key:
        raise argparse.ArgumentTypeError(f"expected key=value, got {text!r}")
    try:
        return key, float(val)
    except ValueError:
        raise argparse.ArgumentTypeError(f"tolerance for {key!r} is not a number: {val!r}") from None


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="biham", description=__doc__)
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    v = sub.add_parser("verify", help="run a verification suite")
    v.add_argument("suite")
    v.add_argument("--n", type=int, default=3)
    v.add_argument("--trials", type=int, default=None, help="default: per-suite")
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--tol", type=_tol_pair, action="append", default=[],
                   metavar="CHECK=VALUE", help="override one check's tolerance (repeatable)")
    v.add_argument("--json", type=Path, default=None, help="write the report here")
    v.add_argument("-q", "--quiet", action="store_true", help="print only the verdict")

    s = sub.add_parser("simulate", help="integrate a reduced flow from a JSON config")
    s.add_argument("--config", type=Path, default=None, help="omit to run the demo config")
    s.add_argument("--out", type=Path, default=Path("."))

    sub.add_parser("list-suites", help="list suite ids")
    sub.add_parser("demo-config", help="print the demo simulation config")
    return p


def _verify(args) -> int:
    if args.suite not in SUITES:
        print(f"error: unknown suite {args.suite!r}; see 'biham list-suites'", file=sys.stderr)
        return EXIT_USAGE
    try:
        spec = SuiteSpec(args.suite, n=args.n, trials=args.trials, seed=args.seed,
                         tol=dict(args.tol))
        report = run_suite(spec)
    except (KeyError, ValueError) as exc:
        print(f"error: {exc.args[0] if exc.args else exc}", file=sys.stderr)
        return EXIT_USAGE
    if not args.quiet:
        for line in report.summary_lines():
            print(line)
    verdict = "PASS" if report.passed else "FAIL"
    print(f"{verdict} {report.suite_id} n={report.n} trials={report.trials} seed={report.seed} "
          f"({report.wall_time:.2f} s)")
    if args.json is not None:
        args.json.parent.mkdir(parents=True, exist_ok=True)
        args.json.write_text(report.to_json())
    return EXIT_OK if report.passed else EXIT_FAIL


def _simulate(args) -> int:
    try:
        if args.config is None:
            from .simulate import SimConfig

            config = SimConfig.model_validate(DEMO_CONFIG)
        else:
            config = load_config(args.config)
        sidecar, code = run_simulation(config, args.out)
    except ConfigError as exc:
        print(f"config error:\n{exc}", file=sys.stderr)
        return EXIT_USAGE
    for line in drift_summary(sidecar, config.drift_tol):
        print(line)
    print(f"wrote {args.out / sidecar['csv']} and {args.out / (config.output + '.json')}")
    return code


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "list-suites":
        width = max(len(k) for k in SUITES)
        for name, suite in SUITES.items():
            print(f"{name:<{width}}  {suite.default_trials:>4} trials  {suite.description}")
        return EXIT_OK
    if args.command == "demo-config":
        print(json.dumps(DEMO_CONFIG, indent=2))
        return EXIT_OK
    if args.command == "verify":
        return _verify(args)
    return _simulate(args)


if __name__ == "__main__":
    raise SystemExit(main())
