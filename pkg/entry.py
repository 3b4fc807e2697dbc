"""
Command-line entry point.

    python entry.py fig2 --config config/fig2.json --out out/fig2 --seed 7

Exit status: 0 on success, 1 on configuration errors, 2 on runtime or numerical failures.
"""

import argparse
import sys
from typing import List, Optional

from ptgain import __version__
from ptgain.errors import ConfigError, PtgainError
from ptgain.experiment import EXPERIMENTS, default_config, load_config
from ptgain.logs import configure_logging, log_error, log_info
from reports import REPORTS

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_RUNTIME = 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ptgain", description="Feedback-engineered gain and PT-symmetric qubit experiments")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="experiment", required=True)
    helps = {
        'fig2': "SME feedback ensemble vs unconditional master equation",
        'fig3': "ideal, effective and three-level balanced gain/loss dynamics",
        'spectrum': "PT spectrum sweep across the exceptional point",
        'decay-check': "RK4 decay against the closed form",
    }
    for name in EXPERIMENTS:
        p = sub.add_parser(name, help=helps[name])
        p.add_argument("--config", type=str, default=None, help="JSON experiment document")
        p.add_argument("--out", type=str, default=None, help="output directory (overrides the config)")
        p.add_argument("--seed", type=int, default=None, help="master seed (overrides the config)")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    configure_logging(None)
    try:
        args = build_parser().parse_args(argv)
        config = load_config(args.config, args.experiment) if args.config else default_config(args.experiment)
        if args.seed is not None:
            config = config.with_seed(args.seed)
    except ConfigError as e:
        log_error(f"Invalid configuration: {e}")
        return EXIT_CONFIG

    out_dir = args.out or config.output_dir
    try:
        configure_logging(config.log_file)
        log_info(f"Running {config.experiment} (seed {config.master_seed}) into {out_dir}")
        paths = REPORTS[config.experiment].run(config, out_dir)
    except ConfigError as e:
        log_error(f"Invalid configuration: {e}")
        return EXIT_CONFIG
    except PtgainError as e:
        log_error(f"{config.experiment} failed: {e}")
        return EXIT_RUNTIME
    except Exception as e:
        log_error(f"An unexpected error occurred while running {config.experiment}: {e}")
        return EXIT_RUNTIME

    log_info(f"{config.experiment} complete: {len(paths)} files written")
    print(f"{config.experiment}: wrote {len(paths)} files to {out_dir}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
