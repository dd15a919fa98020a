"""Command-line entry point: run one experiment family from a config file.

Usage:
    homolab <cell|weyl|m-eps|neumann-aux|robin-rate|duality>
        --config cfg.toml --out report.json [--csv report.csv]

Exit codes: 0 pass, 1 acceptance failure, 2 configuration error,
3 numerical failure.
"""

from __future__ import annotations

import argparse
import sys

EXIT_PASS = 0
EXIT_ACCEPTANCE = 1
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3

_SUBCOMMANDS = {
    "cell": "cell",
    "weyl": "weyl",
    "m-eps": "m_eps",
    "neumann-aux": "neumann_aux",
    "robin-rate": "robin_rate",
    "duality": "duality",
}


def build_parser():
    parser = argparse.ArgumentParser(
        prog="homolab",
        description="Periodic-homogenization experiments with oscillating Robin data",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _SUBCOMMANDS:
        p = sub.add_parser(name, help=f"run a {name} experiment")
        p.add_argument("--config", required=True, help="TOML or JSON config file")
        p.add_argument("--out", required=True, help="JSON report output path")
        p.add_argument("--csv", default=None, help="optional CSV output path")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    from homolab import harness

    try:
        config = harness.ExperimentConfig.load(args.config)
        expected_kind = _SUBCOMMANDS[args.command]
        if config.kind != expected_kind:
            raise harness.ConfigError(
                f"config kind {config.kind!r} does not match subcommand "
                f"{args.command!r} (expected {expected_kind!r})"
            )
    except harness.ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    try:
        report = harness.run(config)
    except harness.ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except harness.NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL

    report.write_json(args.out)
    if args.csv:
        report.write_csv(args.csv)
    status = "pass" if report.passed else "FAIL"
    print(f"{config.kind}: {status} ({len(report.rows)} rows -> {args.out})")
    return EXIT_PASS if report.passed else EXIT_ACCEPTANCE


if __name__ == "__main__":
    sys.exit(main())
