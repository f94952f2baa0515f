"""Command-line harness: tidlab {classify,simulate,ensemble,verify,explosion,sweep}.

Exit codes: 0 success, 1 usage, 2 invalid parameters, 3 verification
failure, 4 I/O.
"""
import argparse
import sys
from typing import List, Optional

from tidlab.build import build_experiment
from tidlab.common.errors import ConfigError, TidlabError
from tidlab.experiments.config import EXPERIMENTS, FORMATS, load_config
from tidlab.experiments.report import write_output

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INVALID = 2
EXIT_VERIFY = 3
EXIT_IO = 4


class UsageError(Exception):
    pass


class ArgumentParser(argparse.ArgumentParser):
    """argparse parser whose parse errors exit with the usage code"""

    def error(self, message: str):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _float_list(text: str) -> List[float]:
    try:
        return [float(item) for item in text.split(",") if item.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


# (flag, config key, type, help)
FLAGS = [
    ("--rho", "rho", float, "drift strength"),
    ("--alpha", "alpha", float, "space exponent"),
    ("--beta", "beta", float, "time exponent"),
    ("--x0", "x0", float, "initial position, nonnegative"),
    ("--n", "n_paths", int, "number of paths"),
    ("--horizon", "horizon", float, "final time T > 1"),
    ("--dt", "dt", float, "base step"),
    ("--seed", "seed", int, "master seed"),
    ("--out", "output_path", str, "result file"),
    ("--format", "format", str, f"one of {FORMATS}"),
    ("--scheme", "scheme", str, "Auto, DirectEM, SquaredProcess, ... or ZeroNoiseODE"),
    ("--time-change", "time_change", str, "power or exponential"),
    ("--functional", "functional", str, "ensemble functional"),
    ("--normalization", "normalization", str, "sqrt_t, sqrt_elapsed or none"),
    ("--ks-tolerance", "ks_tolerance", float, "absolute KS threshold"),
    ("--eps-cut", "eps_cut", float, "bridge tail cut"),
    ("--threshold", "explosion_threshold", float, "explosion threshold"),
    ("--rho-list", "rho_list", _float_list, "sweep values of rho, comma-separated"),
    ("--alpha-list", "alpha_list", _float_list, "sweep values of alpha, comma-separated"),
    ("--beta-list", "beta_list", _float_list, "sweep values of beta, comma-separated"),
]

SWITCHES = [
    ("--store-full-path", "store_full_path", "keep every grid point of simulated paths"),
    ("--no-adapt", "adapt", "disable step refinement near blow-up"),
    ("--quick-verify", "quick_verify", "add a quick verify statistic to sweep rows"),
    ("--no-envelope", "envelope_check", "skip the envelope diagnostic in verify"),
    ("--log-wandb", "log_wandb", "log to Weights & Biases"),
]


def build_parser() -> ArgumentParser:
    parser = ArgumentParser(prog="tidlab", description=__doc__.splitlines()[0])
    subparsers = parser.add_subparsers(dest="experiment", parser_class=ArgumentParser)
    for name in EXPERIMENTS:
        sub = subparsers.add_parser(name)
        sub.add_argument("--config", default=None, help="flat YAML configuration file")
        for flag, key, kind, help_text in FLAGS:
            sub.add_argument(flag, dest=key, type=kind, default=argparse.SUPPRESS, help=help_text)
        for flag, key, help_text in SWITCHES:
            negated = flag.startswith("--no-")
            sub.add_argument(
                flag,
                dest=key,
                action="store_false" if negated else "store_true",
                default=argparse.SUPPRESS,
                help=help_text,
            )
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.experiment is None:
            parser.error("a subcommand is required")
    except UsageError as error:
        print(f"tidlab: error: {error}", file=sys.stderr)
        return EXIT_USAGE

    overrides = {key: value for key, value in vars(args).items() if key != "config"}
    try:
        cfg = load_config(args.config, overrides)
        experiment = build_experiment(cfg)
        output = experiment.run()
    except ConfigError as error:
        print(f"tidlab: error: {error}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as error:
        print(f"tidlab: I/O error: {error}", file=sys.stderr)
        return EXIT_IO
    except TidlabError as error:
        print(f"tidlab: {type(error).__name__}: {error}", file=sys.stderr)
        return EXIT_INVALID if isinstance(error, ValueError) else EXIT_VERIFY

    if cfg.output_path is not None:
        try:
            write_output(output, cfg.output_path, cfg.format)
        except OSError as error:
            print(f"tidlab: I/O error: {error}", file=sys.stderr)
            return EXIT_IO

    if output.passed is False:
        return EXIT_VERIFY
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
