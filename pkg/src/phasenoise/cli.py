"""Command line entry point: ``phasenoise {kernels,correlations,validate-mc,sweep}``."""
from __future__ import annotations

import argparse
import datetime as _dt
import logging
import sys

from .config import ConfigError, RunConfig, load_config
from .errors import ConvergenceError, PhaseNoiseError
from . import experiments

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_VALIDATION = 4

log = logging.getLogger("phasenoise")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise ConfigError(message)


def _ratio_list(text):
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad ratio list {text!r}") from exc


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="YAML run configuration")
    common.add_argument("--out", help="output directory (overrides output.dir)")
    common.add_argument("--seed", type=int, help="Monte Carlo master seed")
    common.add_argument("--d-over-lambda", type=_ratio_list, help="comma separated d/lambda ratios")
    common.add_argument("--traj", type=int, help="number of Monte Carlo trajectories")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = _Parser(prog="phasenoise", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("kernels", parents=[common], help="decoherence functions and rates per d/lambda")
    sub.add_parser("correlations", parents=[common], help="C, S, T, J, D time series")
    sub.add_parser("validate-mc", parents=[common], help="Monte Carlo oracle against the kernels")
    sub.add_parser("sweep", parents=[common], help="regime summary over the d/lambda list")
    return parser


def resolve_config(args) -> RunConfig:
    cfg = load_config(args.config) if args.config else RunConfig()
    if args.out:
        cfg.out_dir = args.out
    if args.seed is not None:
        cfg.mc.seed = args.seed
    if args.d_over_lambda is not None:
        cfg.model.d_over_lambda = args.d_over_lambda
    if args.traj is not None:
        cfg.mc.n_traj = args.traj
    return cfg.validate()


def run(argv=None):
    try:
        args = build_parser().parse_args(argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
        cfg = resolve_config(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    started = _dt.datetime.now(_dt.timezone.utc).isoformat()
    code = EXIT_OK
    try:
        if args.command == "kernels":
            outputs = experiments.run_kernels(cfg)
        elif args.command == "correlations":
            outputs = experiments.run_correlations(cfg)
        elif args.command == "validate-mc":
            rows = experiments.validate_mc(cfg)
            outputs = [f"{cfg.out_dir}/validate_mc.csv"]
            for r in rows:
                print(
                    f"d/lambda={r.d_over_lambda:g} {r.coefficient}: max|diff|={r.max_abs_diff:.3e} "
                    f"max stderr={r.max_stderr:.3e} max z={r.max_z:.2f} {r.status}"
                )
            status = experiments.overall_status(rows)
            print(f"overall: {status}")
            if status == "fail":
                code = EXIT_VALIDATION
        else:
            path, _ = experiments.sweep(cfg)
            outputs = [path]
    except ConvergenceError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except experiments.NumericalFailure as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except PhaseNoiseError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    experiments.write_manifest(cfg, args.command, outputs, started=started)
    for p in outputs:
        log.info("wrote %s", p)
    return code


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
