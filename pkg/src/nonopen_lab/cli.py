"""Command-line interface for nonopen-lab.

This module exposes the numerical experiments on the radial maps
``F(x) = exp(-1/G(x)) x``: evaluation, derivative checks and solves, radial
inversion, non-openness witnesses, no-preimage certificates and the full
property report. It handles argument parsing, configuration resolution and
output formatting.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from collections.abc import Callable
from pathlib import Path
from typing import Any

from . import service
from .config import RunConfig, load_config, resolve_seed
from .errors import ConfigurationError, ExitCode, RepresentationError
from .gauges import GaugeKind
from .printing import print_csv, print_json, save_csv, save_json
from .space_models import FAMILIES, ModelKind, Vector, vector_from_json
from .witnesses import CSV_COLUMNS

logger = logging.getLogger(__name__)

_MODEL_COLUMNS = ("model", "gauge", "provenance", "constraint")


def build_parser() -> argparse.ArgumentParser:
    """Construct the top-level argument parser.

    Returns:
        Configured ArgumentParser with all CLI commands and options.
    """
    parser = argparse.ArgumentParser(
        prog="nonopen",
        description="Numerical lab for non-open C^1 radial maps",
        allow_abbrev=False,
    )

    # Global options
    parser.add_argument("--config", dest="config", help="JSON run configuration file")
    parser.add_argument(
        "--pretty", action="store_true", help="Pretty-print JSON output"
    )
    parser.add_argument("--out", dest="out", help="Also write the output to this file")
    parser.add_argument(
        "--format",
        dest="format",
        choices=["json", "csv"],
        default="json",
        help="Output format (csv for models and nonopen)",
    )
    parser.add_argument(
        "-v",
        "--verbose",
        action="count",
        default=0,
        help="Log to stderr (-v info, -vv debug)",
    )

    subparsers = parser.add_subparsers(dest="command", required=True)

    subparsers.add_parser(
        "models", help="List admissible model/gauge pairs", allow_abbrev=False
    )
    _register_eval(subparsers)
    _register_gradcheck(subparsers)
    _register_solve(subparsers)
    _register_invert(subparsers)
    _register_nonopen(subparsers)
    _register_certify(subparsers)
    _register_report(subparsers)

    return parser


def _add_pair_flags(p: argparse.ArgumentParser) -> None:
    """Flags selecting the (model, gauge) pair and the sampling policy."""
    p.add_argument("--model", dest="model", choices=[m.value for m in ModelKind])
    hosts = [m.value for m in ModelKind if m is not ModelKind.WEAKSEP]
    p.add_argument("--host", dest="host", choices=hosts, help="Host model of a weaksep run")
    p.add_argument("--family", dest="family", choices=list(FAMILIES))
    p.add_argument("--stride", type=int, dest="stride", help="Subspace index stride")
    p.add_argument("--p", type=float, dest="p", help="Exponent of l^p / L^p")
    p.add_argument("--cells", type=int, dest="cells", help="Grid cells M")
    p.add_argument("--gauge", dest="gauge", choices=[g.value for g in GaugeKind])
    p.add_argument("--q", type=int, dest="q", help="Even exponent for lq_even")
    p.add_argument("--power", type=int, dest="power", help="Raise the gauge to this power")
    p.add_argument("--seed", type=int, dest="seed", help="Override NONOPEN_SEED")
    p.add_argument("--samples", type=int, dest="samples", help="Random samples per suite")
    p.add_argument("--max-support", type=int, dest="max_support")


def _add_command(
    subparsers: argparse._SubParsersAction[argparse.ArgumentParser], name: str, help_text: str
) -> argparse.ArgumentParser:
    command = subparsers.add_parser(name, help=help_text, allow_abbrev=False)
    _add_pair_flags(command)
    return command


def _register_eval(
    subparsers: argparse._SubParsersAction[argparse.ArgumentParser],
) -> None:
    """Register the `eval` command."""
    p = _add_command(subparsers, "eval", "Evaluate G, the norms and F at a vector")
    p.add_argument("--x", required=True, help="Vector JSON (inline or file path)")


def _register_gradcheck(
    subparsers: argparse._SubParsersAction[argparse.ArgumentParser],
) -> None:
    """Register the `gradcheck` command."""
    p = _add_command(subparsers, "gradcheck", "Finite-difference check of J_F and J_G")
    p.add_argument("--tolerance", type=float, dest="tolerance", help="Relative error bound")


def _register_solve(
    subparsers: argparse._SubParsersAction[argparse.ArgumentParser],
) -> None:
    """Register the `solve` command."""
    p = _add_command(subparsers, "solve", "Solve J_F(x) h = y")
    p.add_argument("--x", required=True, help="Base point (inline JSON or file path)")
    p.add_argument("--y", required=True, help="Right-hand side (inline JSON or file path)")


def _register_invert(
    subparsers: argparse._SubParsersAction[argparse.ArgumentParser],
) -> None:
    """Register the `invert` command."""
    p = _add_command(subparsers, "invert", "Radial preimage F^-1(y)")
    p.add_argument("--y", required=True, help="Target (inline JSON or file path)")


def _register_nonopen(
    subparsers: argparse._SubParsersAction[argparse.ArgumentParser],
) -> None:
    """Register the `nonopen` command."""
    p = _add_command(subparsers, "nonopen", "Witness table z_n -> 0 with exploding preimages")
    p.add_argument("--n-max", type=int, dest="n_max", default=100)
    p.add_argument("--s", type=float, dest="s", help="Degree for gamma_n (default: gauge degree)")


def _register_certify(
    subparsers: argparse._SubParsersAction[argparse.ArgumentParser],
) -> None:
    """Register the `certify` command."""
    p = _add_command(subparsers, "certify", "Certify delta/2 y has no preimage in the unit ball")
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--y", required=True, help="Unit vector (inline JSON or file path)")


def _register_report(
    subparsers: argparse._SubParsersAction[argparse.ArgumentParser],
) -> None:
    """Register the `report` command."""
    _add_command(subparsers, "report", "Run every property suite for the pair")


def main(argv: list[str] | None = None) -> int:
    """CLI entry point.

    Args:
        argv: Command line arguments (defaults to sys.argv).

    Returns:
        Exit code: 0 success, 1 property failure, 2 configuration error.
    """
    parser = build_parser()
    args = parser.parse_args(argv)
    _configure_logging(args.verbose)

    try:
        if args.format == "csv" and args.command not in {"models", "nonopen"}:
            raise ConfigurationError(f"csv output is not available for {args.command}")
        if args.command == "models":
            result: dict[str, Any] = {"models": service.list_models()}
        else:
            lab = service.create_service(_resolve_config(args))
            result = _dispatch(lab, args)
        _emit(result, args)
    except (ValueError, RepresentationError, OSError) as exc:
        sys.stderr.write(f"Error: {exc}\n")
        return ExitCode.CONFIGURATION
    except ArithmeticError as exc:
        sys.stderr.write(f"Error: {exc}\n")
        return ExitCode.PROPERTY_FAILURE

    if not result.get("passed", True):
        logger.warning("%s: property check failed", args.command)
        return ExitCode.PROPERTY_FAILURE
    return ExitCode.OK


def _configure_logging(verbosity: int) -> None:
    level = logging.WARNING
    if verbosity == 1:
        level = logging.INFO
    elif verbosity >= 2:
        level = logging.DEBUG
    logging.basicConfig(
        level=level, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s"
    )


def _resolve_config(args: argparse.Namespace) -> RunConfig:
    """Merge flags over the config file over the environment and defaults."""
    config = load_config(args.config) if args.config else RunConfig()
    overrides = _clean_params(
        {
            "model": args.model,
            "host": args.host,
            "family": args.family,
            "stride": args.stride,
            "p": args.p,
            "cells": args.cells,
            "gauge": args.gauge,
            "q": args.q,
            "power": args.power,
            "samples": args.samples,
            "max_support": args.max_support,
        }
    )
    seed = resolve_seed(args.seed if args.seed is not None else config.seed)
    return config.merged({**overrides, "seed": seed})


def _dispatch(lab: service.LabService, args: argparse.Namespace) -> dict[str, Any]:
    """Route to the correct service call based on the command.

    Args:
        lab: Configured LabService instance.
        args: Parsed command line arguments.

    Returns:
        Command result as dictionary.
    """
    command = args.command

    handlers: dict[str, Callable[[service.LabService, argparse.Namespace], dict[str, Any]]] = {
        "eval": _handle_eval,
        "gradcheck": _handle_gradcheck,
        "solve": _handle_solve,
        "invert": _handle_invert,
        "nonopen": _handle_nonopen,
        "certify": _handle_certify,
        "report": _handle_report,
    }

    try:
        handler = handlers[command]
    except KeyError as error:
        raise ValueError(f"Unsupported command: {command}") from error
    return handler(lab, args)


def _handle_eval(lab: service.LabService, args: argparse.Namespace) -> dict[str, Any]:
    return lab.evaluate(x=_read_vector(args.x))


def _handle_gradcheck(lab: service.LabService, args: argparse.Namespace) -> dict[str, Any]:
    return lab.gradcheck(tolerance=args.tolerance)


def _handle_solve(lab: service.LabService, args: argparse.Namespace) -> dict[str, Any]:
    return lab.solve(x=_read_vector(args.x), y=_read_vector(args.y))


def _handle_invert(lab: service.LabService, args: argparse.Namespace) -> dict[str, Any]:
    return lab.invert(y=_read_vector(args.y))


def _handle_nonopen(lab: service.LabService, args: argparse.Namespace) -> dict[str, Any]:
    return lab.nonopen(n_max=args.n_max, s=args.s)


def _handle_certify(lab: service.LabService, args: argparse.Namespace) -> dict[str, Any]:
    return lab.certify(delta=args.delta, y=_read_vector(args.y))


def _handle_report(lab: service.LabService, args: argparse.Namespace) -> dict[str, Any]:
    del args
    return lab.report()


def _emit(result: dict[str, Any], args: argparse.Namespace) -> None:
    """Write ``result`` to stdout and, with ``--out``, to a file."""
    if args.format == "csv":
        if args.command == "models":
            rows, columns = result["models"], _MODEL_COLUMNS
        else:
            rows, columns = result["records"], CSV_COLUMNS
        if args.out:
            save_csv(args.out, rows, columns)
        print_csv(rows, columns)
        return
    if args.out:
        save_json(args.out, result, pretty=args.pretty)
    print_json(result, pretty=args.pretty)


def _clean_params(raw: dict[str, Any]) -> dict[str, Any]:
    """Drop parameters whose values are None."""
    return {key: value for key, value in raw.items() if value is not None}


def _read_vector(value: str) -> Vector:
    """Parse a vector given inline as JSON or as a path to a JSON file."""
    payload = _read_arg_or_file(value)
    try:
        data = json.loads(payload)
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"vector is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise RepresentationError("a vector must be a JSON object")
    return vector_from_json(data)


def _read_arg_or_file(value: str) -> str:
    """Return inline JSON as-is, otherwise the contents of the named file."""
    if value.lstrip().startswith("{"):
        return value
    return Path(value).read_text(encoding="utf-8")


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
