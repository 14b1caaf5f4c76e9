"""Unit tests for the bracketed bisection helper."""

from __future__ import annotations

import math
from collections.abc import Callable

import pytest

from nonopen_lab.errors import NumericalRangeError
from nonopen_lab.roots import safe_exp, solve_increasing


@pytest.mark.parametrize(
    ("func", "start", "root"),
    [
        (lambda t: t - 2.0, 1.0, 2.0),
        (lambda t: t**3 - 8.0, 1e6, 2.0),
        (lambda t: math.log(t) + 700.0, 1.0, math.exp(-700.0)),
        (lambda t: t - 4.0, 4.0, 4.0),
    ],
)
def test_solve_increasing_brackets_in_both_directions(
    func: Callable[[float], float], start: float, root: float
) -> None:
    """The bracket grows upward or shrinks downward from the start point."""
    assert solve_increasing(func, start) == pytest.approx(root, rel=1e-12)


def test_solve_increasing_without_sign_change_raises() -> None:
    """No root in the representable range is a numerical-range error."""
    with pytest.raises(NumericalRangeError):
        solve_increasing(lambda t: -1.0, 1.0)
    with pytest.raises(NumericalRangeError):
        solve_increasing(lambda t: 1.0, 1.0)


@pytest.mark.parametrize("start", [0.0, -1.0, math.inf, math.nan])
def test_solve_increasing_needs_positive_start(start: float) -> None:
    """The bracket starts at a positive finite point."""
    with pytest.raises(NumericalRangeError):
        solve_increasing(lambda t: t - 1.0, start)


def test_safe_exp_clamps_overflow() -> None:
    """Large exponents saturate instead of raising OverflowError."""
    assert math.isfinite(safe_exp(1e6))
    assert safe_exp(0.0) == 1.0
