import argparse

from app.errors import StructuralError


class UsageParser(argparse.ArgumentParser):
    """ArgumentParser whose usage errors become exit status 1"""

    def error(self, message: str):
        raise StructuralError(f"{self.prog}: {message}")


def add_common(parser: argparse.ArgumentParser) -> argparse.ArgumentParser:
    parser.add_argument("--output", "-o", help="write the result to this file instead of stdout")
    parser.add_argument("--verbose", "-v", action="store_true", help="log at DEBUG level")
    return parser


def vertex(text: str) -> int:
    """1-based vertex or job number on the command line, 0-based inside"""
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"numbers are 1-based, got {value}")
    return value - 1


def positive(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {value}")
    return value


def seed(text: str) -> int:
    value = int(text)
    if not 0 <= value < 2 ** 64:
        raise argparse.ArgumentTypeError(f"seed must be an unsigned 64-bit integer, got {value}")
    return value
