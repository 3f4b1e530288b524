import argparse
import dataclasses
import logging
import os
import sys

from irswpcn import settings
from irswpcn.config import load_config
from irswpcn.experiments import PRESETS, presets, run_monte_carlo, write_rows
from irswpcn.validation import run_validation

logger = logging.getLogger("irswpcn")


def _comma_list(text):
    return tuple(item.strip() for item in text.split(",") if item.strip())


def _int_list(text):
    return tuple(int(item) for item in _comma_list(text))


def _add_run_options(parser):
    parser.add_argument("--seed", type=int, help="Override the base seed.")
    parser.add_argument(
        "--realizations", type=int, help="Override the number of realizations."
    )
    parser.add_argument(
        "--out", metavar="DIR", help="Directory for the CSV and metadata files."
    )
    parser.add_argument(
        "--algorithms",
        type=_comma_list,
        help="Comma separated algorithms, e.g. proposed,random-with-ta,upper-bound.",
    )
    parser.add_argument(
        "--parallel", type=int, help="Number of worker processes for realizations."
    )
    parser.add_argument(
        "--timings",
        action="store_true",
        help="Record per-realization wall time in the CSV (not byte-reproducible).",
    )


def _overrides(args):
    changes = {}
    if args.seed is not None:
        changes["base_seed"] = args.seed
    if args.realizations is not None:
        changes["realizations"] = args.realizations
    if args.algorithms:
        changes["algorithms"] = args.algorithms
    if args.parallel is not None:
        changes["parallel"] = args.parallel
    return changes


def _report(config, rows):
    if config.output_path is None:
        write_rows(rows, sys.stdout)


def _run_from_commandline(raw_args):
    parser = argparse.ArgumentParser("irswpcn")

    parser.add_argument(
        "--verbose", "-v", action="store_true", help="Increase log verbosity."
    )
    parser.add_argument(
        "--quiet", "-q", action="store_true", help="Only print critical log messages."
    )

    subparsers = parser.add_subparsers(dest="action")
    subparsers.required = True

    run_parser = subparsers.add_parser(
        "run", help="Run the experiment described by a config file."
    )
    run_parser.add_argument(
        "--config", required=True, help="TOML config, rendered through Mako first."
    )
    _add_run_options(run_parser)

    sweep_parser = subparsers.add_parser(
        "sweep", help="Run a preset sweep of one evaluation axis at desk scale."
    )
    sweep_parser.add_argument("preset", choices=PRESETS)
    sweep_parser.add_argument(
        "--n-list", type=_int_list, help="Comma separated IRS sizes, e.g. 4,8,16."
    )
    _add_run_options(sweep_parser)

    validate_parser = subparsers.add_parser(
        "validate", help="Run the oracle and property checks."
    )
    validate_parser.add_argument(
        "--seeds", type=int, default=5, help="Instances per check."
    )

    args = parser.parse_args(raw_args[1:])

    if args.quiet:
        logging.basicConfig(level=logging.CRITICAL)
    elif args.verbose:
        logging.basicConfig(level=logging.DEBUG)
    else:
        logging.basicConfig(level=logging.INFO)

    if args.action == "validate":
        results = run_validation(args.seeds)
        for result in results:
            print(result.line())
        return 0 if all(r.passed for r in results) else 1

    if args.timings:
        settings["record_wall_time"] = True
    changes = _overrides(args)
    if args.action == "run":
        config = load_config(args.config)
        if args.out:
            name = os.path.basename(config.output_path or f"{config.name}.csv")
            changes["output_path"] = os.path.join(os.path.abspath(args.out), name)
        configs = [dataclasses.replace(config, **changes)]
    else:
        if args.out:
            changes["output_path"] = os.path.abspath(args.out)
        configs = presets(args.preset, n_list=args.n_list, **changes)

    for config in configs:
        rows = run_monte_carlo(config)
        _report(config, rows)
    return 0


def main():
    try:
        code = _run_from_commandline(sys.argv)
    except Exception as e:
        logger.debug("command failed", exc_info=True)
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        code = 1
    sys.exit(code)


if __name__ == "__main__":
    main()
