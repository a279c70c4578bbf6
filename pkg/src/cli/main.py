"""
NDSQ command line.

    python run_ndsq.py gen --task reverse --n 100 --seed 7
    python run_ndsq.py train --config experiment.json --hidden 128
    python run_ndsq.py eval --checkpoint runs/best.ndsq
    python run_ndsq.py gradcheck --model deque-lstm
    python run_ndsq.py params --model stack-lstm --hidden 256

Exit codes: 0 success, 1 usage/configuration/data error, 2 numeric
failure, 3 acceptance failure. Failures print a JSON error record on stderr.
"""

import argparse
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional

from config import ExperimentConfig, parse_config
from core.error_handler import ErrorHandler
from core.exceptions import ConfigError
from utils.logger import get_logger, setup_logging

from .commands import COMMANDS

# flag -> ExperimentConfig key
COMMON_FLAGS = {
    "--task": ("task", str),
    "--model": ("model", str),
    "--hidden": ("hidden", int),
    "--memory-width": ("memory_width", int),
    "--embedding": ("embedding", int),
    "--vocab-size": ("vocab_size", int),
    "--min-len": ("min_len", int),
    "--max-len": ("max_len", int),
    "--test-min-len": ("test_min_len", int),
    "--test-max-len": ("test_max_len", int),
    "--lr": ("learning_rate", float),
    "--batch-size": ("batch_size", int),
    "--clip": ("clip", float),
    "--max-batches": ("max_batches", int),
    "--seed": ("seed", int),
    "--out": ("output_dir", str),
    "--precision": ("precision", str),
    "--grammar-file": ("grammar_file", str),
    "--log-level": ("log_level", str),
}

# Commands that keep a log file under the output directory.
LOGGED_COMMANDS = ("gen", "train", "eval")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(f"{self.prog}: {message}")


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", help="JSON or YAML experiment file")
    for flag, (key, kind) in COMMON_FLAGS.items():
        common.add_argument(flag, dest=key, type=kind, default=None)
    common.add_argument("--grid", dest="grid", action="store_const", const=True, default=None,
                        help="train the learning-rate grid")

    parser = _Parser(prog="ndsq", description="Neural stack, queue and deque transduction")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    gen = sub.add_parser("gen", parents=[common], help="write a dataset")
    gen.add_argument("--n", type=int, default=100)
    gen.add_argument("--split", choices=("train", "test"), default="train")

    sub.add_parser("train", parents=[common], help="train a model")

    ev = sub.add_parser("eval", parents=[common], help="evaluate a checkpoint")
    ev.add_argument("--checkpoint", required=True)
    ev.add_argument("--n", type=int, default=None)
    ev.add_argument("--split", choices=("train", "test"), default="test")

    gc = sub.add_parser("gradcheck", parents=[common], help="finite-difference gradient checks")
    gc.add_argument("--trials", type=int, default=10)
    gc.add_argument("--tolerance", type=float, default=1e-4)

    sub.add_parser("params", parents=[common],
                   help="print parameter counts; core_total leaves out embeddings and the output layer "
                        "and is the figure published parameter tables report")
    return parser


def overrides_from_args(args: argparse.Namespace) -> Dict[str, Any]:
    keys = [key for key, _ in COMMON_FLAGS.values()] + ["grid"]
    return {key: getattr(args, key) for key in keys if getattr(args, key, None) is not None}


def dispatch(command: str, config: ExperimentConfig, args: argparse.Namespace) -> int:
    """Run one command; exceptions propagate."""
    try:
        handler = COMMANDS[command]
    except KeyError:
        raise ConfigError(f"unknown command '{command}'") from None
    return handler(config, args)


def main(argv: Optional[List[str]] = None) -> int:
    errors = ErrorHandler()
    command = None
    try:
        args = build_parser().parse_args(argv)
        command = args.command
        config = parse_config(args.config, overrides_from_args(args))
        log_dir = Path(config.output_dir) / "logs" if command in LOGGED_COMMANDS else None
        setup_logging(config.log_level, log_dir)
        get_logger("cli").debug(f"Running {command}", extra={"context": {"seed": config.seed}})
        return dispatch(command, config, args)
    except KeyboardInterrupt:
        return 130
    except Exception as e:
        info = errors.handle_error(e, command)
        print(info.to_json(), file=sys.stderr)
        return info.exit_code


if __name__ == "__main__":
    sys.exit(main())
