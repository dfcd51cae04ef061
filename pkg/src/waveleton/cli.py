"""Command line front end.

Subcommands: run, oracle, analyze, classify, sweep. Each error class
maps to its own exit code so batch drivers can tell a config typo from
a blown-up integration.
"""

import argparse
import sys

from .errors import (
    ChecksumError,
    CflError,
    ConfigParseError,
    ConfigurationError,
    DimensionError,
    EngineError,
    InstabilityError,
    ResolutionError,
    UnsupportedConfigurationError,
)
from .runner import analyze, bundled_scenarios, classify_run, oracle_run, run_scenario, sweep

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_CONFIG = 2
EXIT_CFL = 3
EXIT_INSTABILITY = 4
EXIT_CHECKSUM = 5
EXIT_UNSUPPORTED = 6
EXIT_DIMENSION = 7

_THRESHOLD_KEYS = ("loc_hi", "loc_lo", "entropy_lo", "entropy_hi",
                   "purity_hi", "purity_lo", "neg_hi", "neg_lo")


def _add_threshold_flags(sub):
    for key in _THRESHOLD_KEYS:
        sub.add_argument("--" + key.replace("_", "-"), type=float, default=None)


def _collect_thresholds(args):
    overrides = {}
    for key in _THRESHOLD_KEYS:
        value = getattr(args, key)
        if value is not None:
            overrides[key] = value
    return overrides or None


def build_parser():
    parser = argparse.ArgumentParser(
        prog="waveleton",
        description="Phase-space quantum dynamics with wavelet multiresolution "
                    "analysis and pattern classification.",
        epilog="Bundled scenarios: %s" % ", ".join(bundled_scenarios()),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="execute a scenario end to end")
    run.add_argument("--config", required=True,
                     help="scenario file path or bundled scenario name")
    run.add_argument("--output-dir", default=None)
    run.add_argument("--epsilon", type=float, default=None,
                     help="override evolve.resolution_epsilon")
    run.add_argument("--seed", type=int, default=None)
    run.add_argument("--threads", type=int, default=1)

    oracle = sub.add_parser("oracle", help="split-operator cross-check run")
    oracle.add_argument("--config", required=True)
    oracle.add_argument("--output-dir", default=None)

    ana = sub.add_parser("analyze", help="verify and re-derive a stored run")
    ana.add_argument("run_dir")
    _add_threshold_flags(ana)

    cla = sub.add_parser("classify", help="relabel a stored run")
    cla.add_argument("run_dir")
    _add_threshold_flags(cla)

    swp = sub.add_parser("sweep", help="run a scenario across parameter values")
    swp.add_argument("--config", required=True)
    swp.add_argument("--param", required=True, help="section.key to vary")
    swp.add_argument("--values", required=True, help="comma-separated values")
    swp.add_argument("--output-dir", default=None)
    swp.add_argument("--threads", type=int, default=1)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        if args.command == "run":
            run_dir = run_scenario(args.config, output_dir=args.output_dir,
                                   epsilon_override=args.epsilon,
                                   seed=args.seed, threads=args.threads)
            print(run_dir)
        elif args.command == "oracle":
            print(oracle_run(args.config, output_dir=args.output_dir))
        elif args.command == "analyze":
            report = analyze(args.run_dir,
                             thresholds_override=_collect_thresholds(args))
            print("snapshots: %d" % report["snapshots"])
            print("labels: %s" % " ".join(report["labels"]))
            if "bitwise_match" in report:
                print("diagnostics regeneration: bitwise match")
        elif args.command == "classify":
            for time, label in classify_run(
                    args.run_dir, thresholds_override=_collect_thresholds(args)):
                print("%r,%s" % (time, label))
        elif args.command == "sweep":
            values = [v.strip() for v in args.values.split(",") if v.strip()]
            for path in sweep(args.config, args.param, values,
                              output_root=args.output_dir, threads=args.threads):
                print(path)
    except ConfigParseError as exc:
        print("configuration parse error: %s" % exc, file=sys.stderr)
        return EXIT_CONFIG
    except CflError as exc:
        print("stability violation: %s" % exc, file=sys.stderr)
        return EXIT_CFL
    except ConfigurationError as exc:
        print("configuration error: %s" % exc, file=sys.stderr)
        return EXIT_CONFIG
    except InstabilityError as exc:
        print("instability abort at step %s (t=%s): %s"
              % (exc.step_index, exc.time, exc), file=sys.stderr)
        return EXIT_INSTABILITY
    except ChecksumError as exc:
        print("checksum error: %s" % exc, file=sys.stderr)
        return EXIT_CHECKSUM
    except UnsupportedConfigurationError as exc:
        print("unsupported configuration: %s" % exc, file=sys.stderr)
        return EXIT_UNSUPPORTED
    except (DimensionError, ResolutionError) as exc:
        print("dimension/resolution error: %s" % exc, file=sys.stderr)
        return EXIT_DIMENSION
    except EngineError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return EXIT_ERROR
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
