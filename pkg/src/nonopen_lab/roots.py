"""Bracketed bisection for strictly increasing scalar equations."""

from __future__ import annotations

import logging
import math
from collections.abc import Callable

from scipy.optimize import root_scalar

from .errors import NumericalRangeError

logger = logging.getLogger(__name__)

MAX_BRACKET_STEPS = 1024
MAX_ITERATIONS = 200
RELATIVE_TOLERANCE = 1e-13
_EXP_CLAMP = 709.0


def safe_exp(exponent: float) -> float:
    """``exp`` clamped below overflow; callers only compare against finite targets."""
    return math.exp(min(exponent, _EXP_CLAMP))


def solve_increasing(func: Callable[[float], float], start: float) -> float:
    """Return the root of a strictly increasing ``func`` on ``(0, inf)``.

    The bracket grows from ``start`` by doubling (or halving) until the sign
    changes, then bisection refines it.

    Raises:
        NumericalRangeError: No sign change within the representable range.
    """
    if not (math.isfinite(start) and start > 0.0):
        raise NumericalRangeError(f"bracket start must be positive and finite, got {start}")
    lo = hi = start
    value = func(start)
    if value == 0.0:
        return start
    steps = 0
    if value < 0.0:
        while value < 0.0:
            steps += 1
            lo, hi = hi, hi * 2.0
            if steps > MAX_BRACKET_STEPS or not math.isfinite(hi):
                raise NumericalRangeError("root lies above the representable range")
            value = func(hi)
        if value == 0.0:
            return hi
    else:
        while value > 0.0:
            steps += 1
            lo, hi = lo / 2.0, lo
            if steps > MAX_BRACKET_STEPS or lo == 0.0:
                raise NumericalRangeError("root lies below the representable range")
            value = func(lo)
        if value == 0.0:
            return lo
    result = root_scalar(
        func,
        bracket=(lo, hi),
        method="bisect",
        # Absolute tolerance tied to the bracket keeps roots near the underflow limit relative.
        xtol=lo * RELATIVE_TOLERANCE,
        rtol=RELATIVE_TOLERANCE,
        maxiter=MAX_ITERATIONS,
    )
    if not result.converged:
        raise NumericalRangeError(f"bisection did not converge: {result.flag}")
    logger.debug(
        "root %.17g in [%.6g, %.6g] after %d bracket steps, %d iterations",
        result.root,
        lo,
        hi,
        steps,
        result.iterations,
    )
    return float(result.root)
