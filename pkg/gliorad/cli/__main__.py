"""
gliorad CLI
Entry point: python -m gliorad  (or the `gliorad` console script)

    gliorad --config config/study_1d_uniform_absolute.yaml --mode optimize
    gliorad --config config/verify.yaml --output-dir results/verify --seed 7

Exit codes: 0 success, 1 solver / optimizer / verification failure,
2 invalid configuration.
"""

import argparse
import sys
from pathlib import Path

from gliorad import __version__
from gliorad.core.errors import ConfigurationError
from gliorad.io.config import RunMode, parse_config
from gliorad.io.runner import run as run_config
from gliorad.utils.logger import setup_logger


logger = setup_logger(__name__)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_CONFIG = 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gliorad",
        description="Glioma radiotherapy optimal control: forward, adjoint, optimize, verify",
    )
    parser.add_argument("--config", "-c", type=Path, help="Run file (YAML or JSON)")
    parser.add_argument(
        "--mode", "-m", choices=[mode.value for mode in RunMode], help="Override the run mode"
    )
    parser.add_argument("--output-dir", "-o", type=Path, help="Override the output directory")
    parser.add_argument("--seed", type=int, help="Override the random seed (unsigned 64-bit)")
    parser.add_argument("--version", action="version", version=f"gliorad {__version__}")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    overrides = {"mode": args.mode, "output_dir": args.output_dir, "seed": args.seed}

    try:
        config = parse_config(args.config, overrides)
        manifest = run_config(config)
    except ConfigurationError as e:
        logger.error(f"Invalid configuration: {e}")
        return EXIT_CONFIG

    if not manifest.ok:
        logger.error(f"Run failed: {manifest.error}")
        return EXIT_FAILED
    return EXIT_OK


def run():
    """Entry point for the CLI."""
    sys.exit(main())


if __name__ == "__main__":
    run()
