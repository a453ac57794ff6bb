# app/utils/args_parser.py
import argparse
import json
import logging
import re
import sys

from ..constants import EXIT_USAGE
from ..verification import SUITES
from .config import RUN_KINDS

EVAL_KINDS = ("upsilon", "l", "dozz", "fali", "reflection", "shift", "liouville-reflection", "integral")

_NUMBER = r"[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?"
_Z_PATTERN = re.compile(rf"^\s*({_NUMBER})?\s*q\s*$")


class CliParser(argparse.ArgumentParser):
    """ArgumentParser whose usage errors exit with the usage exit code."""

    def error(self, message):
        self.print_usage(sys.stderr)
        logging.error(f"Invalid arguments ---- Error: {message}")
        sys.exit(EXIT_USAGE)


def validate_gamma(value):
    """
    Validates a coupling constant.

    Args:
        value (str): Coupling as text.

    Returns:
        float: Coupling in (0, 2).

    Raises:
        argparse.ArgumentTypeError: Not a number in (0, 2).
    """
    try:
        gamma = float(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"gamma must be a number, got {value!r}")
    if not 0.0 < gamma < 2.0:
        raise argparse.ArgumentTypeError(f"gamma must lie in (0, 2), got {gamma}")
    return gamma


def validate_positive(value):
    try:
        number = float(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"Expected a positive number, got {value!r}")
    if number <= 0.0:
        raise argparse.ArgumentTypeError(f"Expected a positive number, got {number}")
    return number


def validate_json(value):
    """
    Parses a JSON argument such as --weights.

    Raises:
        argparse.ArgumentTypeError: Malformed JSON.
    """
    try:
        return json.loads(value)
    except json.JSONDecodeError as e:
        raise argparse.ArgumentTypeError(f"Malformed JSON {value!r}: {e}")


def validate_z(value):
    """
    Parses a point: a real or complex literal, or a multiple of q such as "0.5q".

    Returns:
        tuple: ("q", factor) for multiples of q, ("value", complex) otherwise.
    """
    match = _Z_PATTERN.match(value)
    if match:
        return "q", float(match.group(1)) if match.group(1) else 1.0
    try:
        return "value", complex(value.replace(" ", "").replace("i", "j"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"Cannot read point {value!r}; use e.g. 0.3, 0.2+0.1j or 0.5q")


def validate_grid(value):
    """
    Parses "start:stop:step" into a list of grid values (stop included when hit).

    Raises:
        argparse.ArgumentTypeError: Malformed or empty grid.
    """
    try:
        start, stop, step = (float(x) for x in value.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"Grid must be start:stop:step, got {value!r}")
    if step <= 0.0 or stop < start:
        raise argparse.ArgumentTypeError(f"Grid {value!r} is empty")
    count = int(round((stop - start) / step)) + 1
    return [start + k * step for k in range(count) if start + k * step <= stop + 1e-12]


def validate_ring(value):
    """Parses "radius:count" into a ring of points in the complex plane."""
    try:
        radius, count = value.split(":")
        radius, count = float(radius), int(count)
    except ValueError:
        raise argparse.ArgumentTypeError(f"Ring must be radius:count, got {value!r}")
    if radius <= 0.0 or count < 1:
        raise argparse.ArgumentTypeError(f"Ring {value!r} is empty")
    return radius, count


def _usage_error(message):
    logging.error(f"Invalid arguments ---- Error: {message}")
    print(message, file=sys.stderr)
    sys.exit(EXIT_USAGE)


def validate_args(args):
    """
    Cross-argument checks that argparse cannot express.

    Args:
        args (Namespace): Parsed command-line arguments.

    Returns:
        Namespace: The arguments.

    Exits:
        With the usage exit code when a required combination is missing.
    """
    if args.command == "eval":
        needs_gamma = args.kind not in ("l", "integral")
        if needs_gamma and args.gamma is None:
            _usage_error(f"eval {args.kind} requires --gamma")
        if args.kind in ("fali", "shift", "dozz", "reflection") and args.weights is None:
            _usage_error(f"eval {args.kind} requires --weights")
        if args.kind == "upsilon" and args.z is None:
            _usage_error("eval upsilon requires --z")
        if args.kind == "l" and args.x is None:
            _usage_error("eval l requires --x")
        if args.kind == "liouville-reflection" and args.alpha is None:
            _usage_error("eval liouville-reflection requires --alpha")
        if args.kind == "integral" and (args.a is None or args.b is None):
            _usage_error("eval integral requires --a and --b")
        if args.mu is not None and len(args.mu) > 2:
            _usage_error("--mu takes one or two values")
    elif args.command == "blocks":
        if args.params is None and (args.weights is None or args.gamma is None):
            _usage_error("blocks requires --params, or --weights with --gamma")
        if args.z_grid is None and args.ring is None:
            _usage_error("blocks requires --z-grid or --ring")
    elif args.command == "mc":
        if args.config is None and (args.gamma is None or args.weights is None):
            _usage_error("mc requires --config, or --gamma and --weights")
    return args


def build_parser():
    parser = CliParser(description="sl3 Toda structure constants: exact formulas, verification and Monte-Carlo.")
    subparsers = parser.add_subparsers(dest="command", required=True, parser_class=CliParser)

    eval_parser = subparsers.add_parser("eval", help="Evaluate one special function or structure constant")
    eval_parser.add_argument("kind", choices=EVAL_KINDS)
    coupling_group = eval_parser.add_argument_group("Couplings")
    coupling_group.add_argument("--gamma", type=validate_gamma, help="Coupling (gamma_tilde for dozz)")
    coupling_group.add_argument("--mu", type=validate_positive, nargs="+", help="Cosmological constant(s)")
    argument_group = eval_parser.add_argument_group("Arguments")
    argument_group.add_argument("--weights", type=validate_json,
                                help='JSON, e.g. {"alpha0": [0.2, 0.3], "kappa": 0.5, "alpha_inf": [0.1, 0.4]}')
    argument_group.add_argument("--z", type=validate_z, help="Upsilon argument, e.g. 0.5q or 0.3+0.1j")
    argument_group.add_argument("--x", type=float, help="Argument of l")
    argument_group.add_argument("--alpha", type=float, help="Liouville momentum for liouville-reflection")
    argument_group.add_argument("--s", default="s1", help="Weyl word for reflection (Id, s1, s2, s1s2, s2s1, s1s2s1)")
    argument_group.add_argument("--i", type=int, choices=(1, 2), default=1, help="Shift index for shift")
    argument_group.add_argument("--chi", choices=("gamma", "2/gamma"), default="gamma", help="Shift step for shift")
    argument_group.add_argument("--a", type=float, help="Exponent a of the integral")
    argument_group.add_argument("--b", type=float, help="Exponent b of the integral")
    eval_parser.add_argument("--out", help="Write the JSON result to this file instead of stdout")

    verify_parser = subparsers.add_parser("verify", help="Run a verification suite")
    verify_parser.add_argument("suite", choices=SUITES + ("all",))
    verify_parser.add_argument("--gamma", type=validate_gamma, help="Restrict to one coupling")
    verify_parser.add_argument("--trials", type=int, help="Random inputs per coupling")
    verify_parser.add_argument("--seed", type=int, default=0, help="Seed of the random inputs")
    verify_parser.add_argument("--out", help="CSV file for the per-check residuals")

    mc_parser = subparsers.add_parser("mc", help="Monte-Carlo estimation of a three-point function")
    mc_parser.add_argument("--config", help="TOML or JSON run config")
    override_group = mc_parser.add_argument_group("Overrides")
    override_group.add_argument("--kind", choices=RUN_KINDS)
    override_group.add_argument("--gamma", type=validate_gamma)
    override_group.add_argument("--mu", type=validate_positive, nargs="+")
    override_group.add_argument("--weights", type=validate_json)
    override_group.add_argument("--seed", type=int)
    override_group.add_argument("--n-samples", type=int)
    override_group.add_argument("--compare", choices=("fali", "dozz"))
    mc_parser.add_argument("--out", help="JSON-lines output file")

    blocks_parser = subparsers.add_parser("blocks", help="Tabulate hypergeometric blocks on a grid")
    blocks_parser.add_argument("--params", type=validate_json, help='JSON {"A": [a1, a2, a3], "B": [b1, b2]}')
    blocks_parser.add_argument("--gamma", type=validate_gamma, help="Derive parameters from weights at this coupling")
    blocks_parser.add_argument("--weights", type=validate_json, help="Three-point weights, as for eval fali")
    blocks_parser.add_argument("--chi", choices=("gamma", "2/gamma"), default="gamma")
    grid_group = blocks_parser.add_argument_group("Grid")
    grid_group.add_argument("--z-grid", type=validate_grid, help="Real grid start:stop:step")
    grid_group.add_argument("--ring", type=validate_ring, help="Complex ring radius:count")
    blocks_parser.add_argument("--coeffs", choices=("closed", "connection"), default="closed")
    blocks_parser.add_argument("--out", help="CSV output file")
    return parser


def parse_arguments(argv=None):
    """
    Parses command-line arguments for the four subcommands.

    Returns:
        Namespace: The parsed and validated command-line arguments.
    """
    parser = build_parser()
    args = parser.parse_args(argv)
    validate_args(args)

    return args
