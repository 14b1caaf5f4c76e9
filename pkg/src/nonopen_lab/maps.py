"""The radial map ``F(x) = exp(-1/G(x)) x``, its derivative and inverses.

``F`` is ``C^1`` everywhere, has a derivative that is invertible at every
nonzero point, and is not open at the origin. All routines take a
:class:`MapSpec` so the model/gauge pair is validated once.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Any

import numpy as np

from .errors import NotInvertibleError, NumericalRangeError
from .gauges import GaugeSpec, check_compatible, gauge_eval, gauge_grad_apply
from .roots import safe_exp, solve_increasing
from .space_models import (
    FloatArray,
    SpaceModel,
    Vector,
    basis_vector,
    check_representation,
    strong_norm,
    to_coordinates,
    vector_to_json,
    zero_vector,
)

logger = logging.getLogger(__name__)

# Above this value of 1/G the factor exp(1/G) overflows binary64.
LOG_SCALE_THRESHOLD = 700.0
# Gauge values at or below this are treated as underflow.
TINY_GAUGE = 1e-300


@dataclass(frozen=True, slots=True)
class MapSpec:
    """A validated (space model, gauge) pair."""

    model: SpaceModel
    gauge: GaugeSpec

    def __post_init__(self) -> None:
        check_compatible(self.gauge, self.model)

    @property
    def map_id(self) -> str:
        return f"{self.model.model_id}/{self.gauge.gauge_id}"


@dataclass(frozen=True, slots=True)
class SolveResult:
    """Solution of ``J_F(x) h = y``.

    When ``log_scale`` is nonzero the true solution is
    ``exp(log_scale) * solution`` and ``residual`` is a relative backward
    error instead of an absolute residual.
    """

    solution: Vector
    residual: float
    log_scale: float = 0.0

    @property
    def log_scaled(self) -> bool:
        return self.log_scale != 0.0

    def to_dict(self) -> dict[str, Any]:
        return {
            "solution": vector_to_json(self.solution),
            "residual": self.residual,
            "log_scale": self.log_scale,
            "log_scaled": self.log_scaled,
        }


def scalar_weights(gauge_value: float) -> tuple[float, float]:
    """Return ``(exp(-1/G), exp(-1/G) / G**2)``, both ``0`` when ``G`` underflows."""
    if gauge_value <= TINY_GAUGE:
        return 0.0, 0.0
    inverse = 1.0 / gauge_value
    return math.exp(-inverse), math.exp(-inverse - 2.0 * math.log(gauge_value))


def f_eval(spec: MapSpec, x: Vector) -> Vector:
    """Return ``F(x)``."""
    check_representation(spec.model, x)
    if x.is_zero:
        return x
    sigma, _ = scalar_weights(gauge_eval(spec.gauge, spec.model, x))
    return x.scaled(sigma)


def jf_apply(spec: MapSpec, x: Vector, h: Vector) -> Vector:
    """Return ``J_F(x) h = sigma h + w (J_G(x) h) x``; zero at the origin."""
    check_representation(spec.model, x)
    check_representation(spec.model, h)
    if x.is_zero:
        return zero_vector(spec.model)
    sigma, weight = scalar_weights(gauge_eval(spec.gauge, spec.model, x))
    slope = gauge_grad_apply(spec.gauge, spec.model, x, h)
    return h.scaled(sigma) + x.scaled(weight * slope)  # type: ignore[operator]


def _backward_error(spec: MapSpec, x: Vector, d: Vector, y: Vector, gauge_value: float) -> float:
    model, gauge = spec.model, spec.gauge
    g2 = gauge_value * gauge_value
    slope = gauge_grad_apply(gauge, model, x, d) / g2
    applied = d + x.scaled(slope)  # type: ignore[operator]
    numerator = strong_norm(model, applied - y)  # type: ignore[operator]
    magnitude = gauge_grad_apply(gauge, model, x.abs(), d.abs()) / g2
    denominator = (
        strong_norm(model, d) + strong_norm(model, x) * magnitude + strong_norm(model, y)
    )
    return numerator / denominator


def jf_solve(spec: MapSpec, x: Vector, y: Vector) -> SolveResult:
    """Solve ``J_F(x) h = y`` for nonzero ``x``.

    ``y`` is split as ``alpha x + r`` with ``alpha = J_G(x)y / J_G(x)x``, so
    ``r`` carries no gauge slope and the rank-one correction acts along ``x``
    only. No two nearly equal multiples of ``x`` are ever subtracted, even
    for targets on heavily down-weighted coordinates.

    The magnitude ``exp(1/G)`` moves into ``log_scale`` whenever ``1/G`` or
    ``1/G + ln||d||`` exceeds the overflow threshold.

    Raises:
        NotInvertibleError: ``x`` is the origin.
        NumericalRangeError: ``G(x)`` underflows at a nonzero ``x``.
    """
    model, gauge = spec.model, spec.gauge
    check_representation(model, x)
    check_representation(model, y)
    if x.is_zero:
        raise NotInvertibleError("J_F(0) = 0 is not invertible")
    if y.is_zero:
        return SolveResult(zero_vector(model), 0.0, 0.0)
    gauge_value = gauge_eval(gauge, model, x)
    if gauge_value <= TINY_GAUGE:
        raise NumericalRangeError(f"G(x) = {gauge_value:.3g} underflows at a nonzero point")
    g2 = gauge_value * gauge_value
    # Euler: J_G(x)x = s G(x) > 0.
    radial_slope = gauge_grad_apply(gauge, model, x, x)
    alpha = gauge_grad_apply(gauge, model, x, y) / radial_slope
    r = y - x.scaled(alpha)  # type: ignore[operator]
    beta = (alpha * g2 - gauge_grad_apply(gauge, model, x, r)) / (g2 + radial_slope)
    d = r + x.scaled(beta)
    d_norm = strong_norm(model, d)
    if d_norm == 0.0:
        raise NumericalRangeError("solution direction underflowed")
    inverse = 1.0 / gauge_value
    log_scale = inverse + math.log(d_norm)
    if inverse <= LOG_SCALE_THRESHOLD and log_scale <= LOG_SCALE_THRESHOLD:
        h = d.scaled(math.exp(inverse))
        residual = strong_norm(model, jf_apply(spec, x, h) - y)  # type: ignore[operator]
        return SolveResult(h, residual, 0.0)
    residual = _backward_error(spec, x, d, y, gauge_value)
    logger.info("log-scaled solve: 1/G=%.6g log_scale=%.6g", inverse, log_scale)
    return SolveResult(d.scaled(1.0 / d_norm), residual, log_scale)


def f_invert_radial(spec: MapSpec, y: Vector) -> Vector:
    """Return the unique ``x`` on the ray of ``y`` with ``F(x) = y``.

    Uses homogeneity: with ``u = y/||y||`` and ``x = t u`` the equation
    reduces to ``t exp(-1/(t^s G(u))) = ||y||``, solved in logarithms.
    """
    model, gauge = spec.model, spec.gauge
    check_representation(model, y)
    if y.is_zero:
        return y
    norm = strong_norm(model, y)
    direction = y.scaled(1.0 / norm)
    unit_gauge = gauge_eval(gauge, model, direction)
    if unit_gauge <= 0.0:
        raise NumericalRangeError("gauge vanishes on a nonzero direction")
    degree = gauge.degree
    log_gauge = math.log(unit_gauge)
    log_target = math.log(norm)

    def profile(t: float) -> float:
        log_t = math.log(t)
        return log_t - safe_exp(-degree * log_t - log_gauge) - log_target

    return direction.scaled(solve_increasing(profile, norm))


def assemble_jacobian(spec: MapSpec, x: Vector, dim: int) -> FloatArray:
    """Dense matrix of ``J_F(x)`` restricted to the first ``dim`` basis positions."""
    columns = [
        to_coordinates(spec.model, jf_apply(spec, x, basis_vector(spec.model, j)), dim)
        for j in range(1, dim + 1)
    ]
    return np.column_stack(columns)
