"""Homogeneous gauges, their derivatives and separating functional families.

A gauge ``G`` is a nonnegative, positively homogeneous polynomial-type
functional on a space model. Each gauge here is ``C^1`` on the strong norm,
vanishes only at the origin, and is dominated by a power of the strong norm.
"""

from __future__ import annotations

import functools
import logging
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass
from enum import StrEnum
from typing import NamedTuple

import numpy as np

from .errors import ConfigurationError, PreconditionError
from .space_models import (
    FloatArray,
    GridFunction,
    IndexArray,
    ModelKind,
    SpaceModel,
    SparseVector,
    Vector,
    check_representation,
    coefficient_norms,
    conjugate_exponent,
    int_power,
    lp_norm,
    strong_norm,
    support_positions,
)

logger = logging.getLogger(__name__)

# Weights 2**-k vanish in binary64 well before this index.
_DYADIC_CLIP = 2000


class GaugeKind(StrEnum):
    """Supported gauges."""

    WEIGHTED_L2 = "weighted_l2"
    DYADIC = "dyadic"
    LQ_EVEN = "lq_even"
    L5_ODD = "l5_odd"
    GRID_SQUARE = "grid_square"
    WEAKSEP = "weaksep"


_BASE_DEGREE = {
    GaugeKind.WEIGHTED_L2: 2,
    GaugeKind.DYADIC: 2,
    GaugeKind.L5_ODD: 5,
    GaugeKind.GRID_SQUARE: 2,
    GaugeKind.WEAKSEP: 2,
}


@dataclass(frozen=True, slots=True)
class GaugeSpec:
    """A gauge and the integer power it is raised to.

    Attributes:
        kind: Which gauge.
        q: Even exponent for ``lq_even``.
        power: Integer ``m >= 1``; the effective gauge is ``G ** m``.
    """

    kind: GaugeKind
    q: int | None = None
    power: int = 1

    def __post_init__(self) -> None:
        try:
            kind = GaugeKind(self.kind)
        except ValueError as exc:
            raise ConfigurationError(f"unknown gauge {self.kind!r}") from exc
        object.__setattr__(self, "kind", kind)
        if isinstance(self.power, bool) or int(self.power) != self.power or self.power < 1:
            raise ConfigurationError(f"gauge power must be an integer >= 1, got {self.power}")
        if kind is GaugeKind.LQ_EVEN:
            if self.q is None or int(self.q) != self.q or self.q < 2 or self.q % 2:
                raise ConfigurationError(
                    f"lq_even needs an even integer q >= 2, got q={self.q}"
                )
        elif kind is GaugeKind.L5_ODD:
            if self.q not in (None, 5):
                raise ConfigurationError("l5_odd has fixed exponent 5")
        elif self.q is not None:
            raise ConfigurationError(f"{kind} takes no exponent q")

    @property
    def base_degree(self) -> int:
        if self.kind is GaugeKind.LQ_EVEN:
            assert self.q is not None
            return int(self.q)
        return _BASE_DEGREE[self.kind]

    @property
    def degree(self) -> int:
        """Homogeneity degree ``s`` of the effective gauge."""
        return self.base_degree * self.power

    @property
    def gauge_id(self) -> str:
        name = f"lq_even(q={self.q})" if self.kind is GaugeKind.LQ_EVEN else str(self.kind)
        return name if self.power == 1 else f"{name}^{self.power}"


def check_compatible(gauge: GaugeSpec, model: SpaceModel) -> None:
    """Raise ``ConfigurationError`` unless ``gauge`` is defined on ``model``."""
    kind = model.kind
    p = model.p
    match gauge.kind:
        case GaugeKind.WEIGHTED_L2:
            ok = kind is ModelKind.L2_WEIGHTED
            reason = "weighted_l2 lives on l2_weighted"
        case GaugeKind.DYADIC:
            ok = kind in {ModelKind.LINF_DYADIC, ModelKind.C0_DYADIC}
            reason = "dyadic lives on linf_dyadic or c0_dyadic"
        case GaugeKind.LQ_EVEN:
            ok = kind is ModelKind.LP_SEQ and p is not None and gauge.base_degree >= p
            reason = f"lq_even(q={gauge.q}) needs lp_seq with p <= q"
        case GaugeKind.L5_ODD:
            ok = kind is ModelKind.LP_SEQ and p is not None and p <= 5.0
            reason = "l5_odd needs lp_seq with p <= 5"
        case GaugeKind.GRID_SQUARE:
            ok = kind is ModelKind.LP_GRID and p is not None and p >= 2.0
            reason = "grid_square needs lp_grid with p >= 2"
        case GaugeKind.WEAKSEP:
            ok = kind is ModelKind.WEAKSEP
            reason = "weaksep gauge needs a weaksep model"
        case _:
            raise ConfigurationError(f"unknown gauge {gauge.kind!r}")
    if not ok:
        raise ConfigurationError(
            f"gauge {gauge.gauge_id} is not compatible with {model.model_id}: {reason}"
        )


class FunctionalFamily(ABC):
    """A bounded separating family ``(l_k)`` of unit-norm functionals."""

    host: SpaceModel

    @abstractmethod
    def representer(self, k: int) -> Vector:
        """Coefficients ``a`` with ``l_k(x) = a . x`` in the host representation."""

    @abstractmethod
    def coefficients(self, x: Vector) -> tuple[IndexArray, FloatArray]:
        """Return ``(ks, l_k(x))`` for every ``k`` where ``l_k(x)`` may be nonzero."""

    @abstractmethod
    def annihilated_vector(self, q: int) -> Vector:
        """A nonzero vector killed by ``l_1, ..., l_q``."""

    def support_bound(self, x: Vector) -> int:
        """Index bound within which some ``l_k(x)`` is nonzero for ``x != 0``."""
        return support_positions(self.host, x).max(initial=0).item()

    def evaluate(self, k: int, x: Vector) -> float:
        ks, vals = self.coefficients(x)
        hit = np.flatnonzero(ks == k)
        return float(vals[hit[0]]) if hit.size else 0.0

    @abstractmethod
    def combine(self, ks: IndexArray, weights: FloatArray) -> Vector:
        """Return the coefficient vector of ``sum_k weights_k l_k``."""

    def norm_certificates(self, count: int) -> FloatArray:
        """Dual norms of ``l_1 .. l_count`` computed from their representers."""
        return np.array([_dual_norm(self.host, self.representer(k)) for k in range(1, count + 1)])


@dataclass(frozen=True)
class CoordinateFamily(FunctionalFamily):
    """Coordinate functionals ``l_k(x) = x_{stride * k}``."""

    host: SpaceModel
    stride: int = 1

    def representer(self, k: int) -> Vector:
        return SparseVector.unit(self.stride * k)

    def coefficients(self, x: Vector) -> tuple[IndexArray, FloatArray]:
        assert isinstance(x, SparseVector)
        return x.indices // self.stride, x.values

    def annihilated_vector(self, q: int) -> Vector:
        return SparseVector.unit(self.stride * (q + 1))

    def combine(self, ks: IndexArray, weights: FloatArray) -> Vector:
        return SparseVector.from_arrays(ks * self.stride, weights)


@dataclass(frozen=True)
class NeighborFamily(FunctionalFamily):
    """Neighbor sums ``l_k(x) = c (x_k + x_{k+1})`` scaled to unit dual norm."""

    host: SpaceModel

    @property
    def scale(self) -> float:
        # Dual norm of e_k + e_{k+1} is 2**(1/p') for the l^p host.
        p = self.host.exponent
        return math.pow(2.0, -(1.0 - 1.0 / p)) if math.isfinite(p) else 0.5

    def representer(self, k: int) -> Vector:
        return SparseVector.from_arrays([k, k + 1], [self.scale, self.scale])

    def coefficients(self, x: Vector) -> tuple[IndexArray, FloatArray]:
        assert isinstance(x, SparseVector)
        ks = np.union1d(x.indices, x.indices - 1)
        ks = ks[ks >= 1]
        return ks, self.scale * (x.lookup(ks) + x.lookup(ks + 1))

    def annihilated_vector(self, q: int) -> Vector:
        return SparseVector.unit(q + 2)

    def combine(self, ks: IndexArray, weights: FloatArray) -> Vector:
        scaled = self.scale * np.asarray(weights, dtype=np.float64)
        return SparseVector.from_arrays(
            np.concatenate([ks, ks + 1]), np.concatenate([scaled, scaled])
        )


@dataclass(frozen=True)
class CellIndicatorFamily(FunctionalFamily):
    """Cell averages ``l_k(f) = M^{-1/p} f_k`` on the probability grid."""

    host: SpaceModel

    @property
    def scale(self) -> float:
        assert self.host.p is not None and self.host.cells is not None
        return math.pow(float(self.host.cells), -1.0 / self.host.p)

    def representer(self, k: int) -> Vector:
        assert self.host.cells is not None
        return GridFunction.unit(self.host.cells, k, self.scale)

    def coefficients(self, x: Vector) -> tuple[IndexArray, FloatArray]:
        assert isinstance(x, GridFunction)
        ks = np.flatnonzero(x.values).astype(np.int64) + 1
        return ks, self.scale * x.values[ks - 1]

    def annihilated_vector(self, q: int) -> Vector:
        assert self.host.cells is not None
        if q >= self.host.cells:
            raise ConfigurationError(
                f"every vector on {self.host.cells} cells is separated by "
                f"l_1..l_{q}; no annihilated vector exists"
            )
        return GridFunction.unit(self.host.cells, q + 1)

    def combine(self, ks: IndexArray, weights: FloatArray) -> Vector:
        assert self.host.cells is not None
        values = np.zeros(self.host.cells)
        values[ks - 1] = self.scale * np.asarray(weights, dtype=np.float64)
        return GridFunction.from_values(values)


def _dual_norm(host: SpaceModel, representer: Vector) -> float:
    p_dual = conjugate_exponent(host.exponent)
    if isinstance(representer, GridFunction):
        cells = representer.cells
        return lp_norm(representer.values * cells, p_dual, measure=1.0 / cells)
    return lp_norm(representer.values, p_dual)


@functools.cache
def build_family(model: SpaceModel) -> FunctionalFamily:
    """Return the separating family of a ``weaksep`` model."""
    if model.kind is not ModelKind.WEAKSEP or model.host is None:
        raise ConfigurationError(f"{model.model_id} carries no functional family")
    match model.family:
        case "coordinate":
            return CoordinateFamily(model.host)
        case "subspace":
            return CoordinateFamily(model.host, stride=model.stride)
        case "neighbor":
            return NeighborFamily(model.host)
        case "cells":
            return CellIndicatorFamily(model.host)
    raise ConfigurationError(f"unknown family {model.family!r}")


def family_separation_check(family: FunctionalFamily, x: Vector) -> bool:
    """True if some ``l_k`` with ``k <= support_bound(x)`` is nonzero on ``x``.

    Raises:
        PreconditionError: ``x`` is the zero vector.
    """
    if x.is_zero:
        raise PreconditionError("separation is only defined for nonzero vectors")
    ks, vals = family.coefficients(x)
    bound = family.support_bound(x)
    return bool(np.any(vals[ks <= bound] != 0.0))


def dyadic_weights(ks: IndexArray, shift: int = 0) -> FloatArray:
    """Return ``2 ** (shift - k)`` for each index ``k``."""
    exponents = (shift - np.minimum(ks, _DYADIC_CLIP)).astype(np.int32)
    return np.ldexp(np.ones(ks.shape), exponents)


def _overlap(x: SparseVector, h: SparseVector) -> tuple[IndexArray, FloatArray, FloatArray]:
    common, left, right = np.intersect1d(
        x.indices, h.indices, assume_unique=True, return_indices=True
    )
    return common, x.values[left], h.values[right]


def _ipow(value: float, exponent: int) -> float:
    result = 1.0
    for _ in range(exponent):
        result *= value
    return result


def _base_value(gauge: GaugeSpec, model: SpaceModel, x: Vector) -> float:
    match gauge.kind:
        case GaugeKind.WEIGHTED_L2:
            assert isinstance(x, SparseVector)
            return float(np.sum(x.values * x.values / x.indices))
        case GaugeKind.DYADIC:
            assert isinstance(x, SparseVector)
            return float(np.sum(x.values * x.values * dyadic_weights(x.indices)))
        case GaugeKind.LQ_EVEN:
            assert isinstance(x, SparseVector)
            return float(np.sum(int_power(x.values, gauge.base_degree)))
        case GaugeKind.L5_ODD:
            assert isinstance(x, SparseVector)
            return float(np.sum(int_power(np.abs(x.values), 5)))
        case GaugeKind.GRID_SQUARE:
            assert isinstance(x, GridFunction)
            return float(np.sum(x.values * x.values)) / x.cells
        case GaugeKind.WEAKSEP:
            ks, vals = build_family(model).coefficients(x)
            return float(np.sum(vals * vals * dyadic_weights(ks)))
    raise ConfigurationError(f"unknown gauge {gauge.kind!r}")


def _base_grad(gauge: GaugeSpec, model: SpaceModel, x: Vector, h: Vector) -> float:
    match gauge.kind:
        case GaugeKind.WEIGHTED_L2:
            assert isinstance(x, SparseVector) and isinstance(h, SparseVector)
            ks, xv, hv = _overlap(x, h)
            return 2.0 * float(np.sum(xv * hv / ks))
        case GaugeKind.DYADIC:
            assert isinstance(x, SparseVector) and isinstance(h, SparseVector)
            ks, xv, hv = _overlap(x, h)
            return float(np.sum(xv * hv * dyadic_weights(ks, shift=1)))
        case GaugeKind.LQ_EVEN:
            assert isinstance(x, SparseVector) and isinstance(h, SparseVector)
            ks, xv, hv = _overlap(x, h)
            q = gauge.base_degree
            return q * float(np.sum(int_power(xv, q - 1) * hv))
        case GaugeKind.L5_ODD:
            assert isinstance(x, SparseVector) and isinstance(h, SparseVector)
            ks, xv, hv = _overlap(x, h)
            return 5.0 * float(np.sum(np.abs(xv) * int_power(xv, 3) * hv))
        case GaugeKind.GRID_SQUARE:
            assert isinstance(x, GridFunction) and isinstance(h, GridFunction)
            return 2.0 * float(np.sum(x.values * h.values)) / x.cells
        case GaugeKind.WEAKSEP:
            family = build_family(model)
            kx, lx = family.coefficients(x)
            kh, lh = family.coefficients(h)
            ks, left, right = np.intersect1d(kx, kh, assume_unique=True, return_indices=True)
            return float(np.sum(lx[left] * lh[right] * dyadic_weights(ks, shift=1)))
    raise ConfigurationError(f"unknown gauge {gauge.kind!r}")


def _base_gradient(gauge: GaugeSpec, model: SpaceModel, x: Vector) -> Vector:
    """Coefficient vector ``c`` with ``J_G(x) h = c . h`` for the base gauge."""
    match gauge.kind:
        case GaugeKind.WEIGHTED_L2:
            assert isinstance(x, SparseVector)
            return SparseVector.from_arrays(x.indices, 2.0 * x.values / x.indices)
        case GaugeKind.DYADIC:
            assert isinstance(x, SparseVector)
            weights = dyadic_weights(x.indices, shift=1)
            return SparseVector.from_arrays(x.indices, x.values * weights)
        case GaugeKind.LQ_EVEN:
            assert isinstance(x, SparseVector)
            q = gauge.base_degree
            return SparseVector.from_arrays(x.indices, q * int_power(x.values, q - 1))
        case GaugeKind.L5_ODD:
            assert isinstance(x, SparseVector)
            return SparseVector.from_arrays(
                x.indices, 5.0 * np.abs(x.values) * int_power(x.values, 3)
            )
        case GaugeKind.GRID_SQUARE:
            assert isinstance(x, GridFunction)
            return GridFunction.from_values(2.0 * x.values / x.cells)
        case GaugeKind.WEAKSEP:
            family = build_family(model)
            ks, vals = family.coefficients(x)
            return family.combine(ks, vals * dyadic_weights(ks, shift=1))
    raise ConfigurationError(f"unknown gauge {gauge.kind!r}")


def _prepare(gauge: GaugeSpec, model: SpaceModel, *vectors: Vector) -> None:
    check_compatible(gauge, model)
    for vector in vectors:
        check_representation(model, vector)


def gauge_eval(gauge: GaugeSpec, model: SpaceModel, x: Vector) -> float:
    """Return ``G(x) ** power``."""
    _prepare(gauge, model, x)
    return _ipow(_base_value(gauge, model, x), gauge.power)


def gauge_grad_apply(gauge: GaugeSpec, model: SpaceModel, x: Vector, h: Vector) -> float:
    """Return the directional derivative ``J_G(x) h``."""
    _prepare(gauge, model, x, h)
    value = _base_grad(gauge, model, x, h)
    if gauge.power > 1:
        value *= gauge.power * _ipow(_base_value(gauge, model, x), gauge.power - 1)
    return value


def gauge_gradient(gauge: GaugeSpec, model: SpaceModel, x: Vector) -> Vector:
    """Coefficient vector of the derivative functional ``J_G(x)``."""
    _prepare(gauge, model, x)
    grad = _base_gradient(gauge, model, x)
    if gauge.power > 1:
        grad = grad.scaled(gauge.power * _ipow(_base_value(gauge, model, x), gauge.power - 1))
    return grad


def weak_norm(gauge: GaugeSpec, model: SpaceModel, x: Vector) -> float:
    """Return ``G(x) ** (1/s)``, the norm the gauge induces."""
    value = gauge_eval(gauge, model, x)
    return math.pow(value, 1.0 / gauge.degree) if value > 0.0 else 0.0


class LipschitzEstimate(NamedTuple):
    """Probe estimate and analytic bound of ``||J_G(x+z) - J_G(x)||``."""

    estimate: float
    bound: float


def _gauge_norm(gauge: GaugeSpec, model: SpaceModel, x: Vector) -> float:
    # l5_odd bounds are stated in the l^5 norm, which the strong norm dominates.
    if gauge.kind is GaugeKind.L5_ODD:
        return lp_norm(x.values, 5.0)
    return strong_norm(model, x)


def _base_lipschitz_bound(
    gauge: GaugeSpec, model: SpaceModel, x: Vector, z: Vector
) -> float:
    nz = _gauge_norm(gauge, model, z)
    if gauge.kind is GaugeKind.LQ_EVEN:
        q = gauge.base_degree
        nx = _gauge_norm(gauge, model, x)
        cross = sum(
            math.comb(q - 1, i) * _ipow(nz, i) * _ipow(nx, q - 1 - i) for i in range(1, q - 1)
        )
        return q * _ipow(nz, q - 1) + q * cross
    if gauge.kind is GaugeKind.L5_ODD:
        nx = _gauge_norm(gauge, model, x)
        shifted = _gauge_norm(gauge, model, x + z)  # type: ignore[operator]
        return 5.0 * nz * _ipow(shifted, 3) + 5.0 * nz * (
            shifted * shifted + shifted * nx + nx * nx
        ) * nx
    return 2.0 * nz


def _gradient_norm_bound(gauge: GaugeSpec, model: SpaceModel, x: Vector) -> float:
    degree = gauge.base_degree
    return degree * _ipow(_gauge_norm(gauge, model, x), degree - 1)


def gradient_norm_bound(gauge: GaugeSpec, model: SpaceModel, x: Vector) -> float:
    """Upper bound on the operator norm of ``J_G(x)`` in the strong norm."""
    _prepare(gauge, model, x)
    bound = _gradient_norm_bound(gauge, model, x)
    if gauge.power > 1:
        bound *= gauge.power * _ipow(_base_value(gauge, model, x), gauge.power - 1)
    return bound


def _lipschitz_bound(gauge: GaugeSpec, model: SpaceModel, x: Vector, z: Vector) -> float:
    base = _base_lipschitz_bound(gauge, model, x, z)
    m = gauge.power
    if m == 1:
        return base
    shifted = x + z  # type: ignore[operator]
    g_shift = _ipow(_base_value(gauge, model, shifted), m - 1)
    g_here = _ipow(_base_value(gauge, model, x), m - 1)
    drift = m * abs(g_shift - g_here) * _gradient_norm_bound(gauge, model, shifted)
    return drift + m * g_here * base


def gauge_grad_lipschitz_bound(
    gauge: GaugeSpec,
    model: SpaceModel,
    x: Vector,
    z: Vector,
    *,
    rng: np.random.Generator | None = None,
    random_probes: int = 32,
) -> LipschitzEstimate:
    """Estimate ``||J_G(x+z) - J_G(x)||`` and return it with its analytic bound.

    The estimate is a supremum over probe directions of unit strong norm:
    the basis vectors on the joint support of ``x`` and ``z`` plus
    ``random_probes`` random combinations of them.
    """
    _prepare(gauge, model, x, z)
    shifted = x + z  # type: ignore[operator]
    here = gauge_gradient(gauge, model, x)
    difference = gauge_gradient(gauge, model, shifted) - here  # type: ignore[operator]
    bound = _lipschitz_bound(gauge, model, x, z)
    positions = np.union1d(support_positions(model, x), support_positions(model, z))
    if positions.size == 0:
        return LipschitzEstimate(0.0, bound)
    # Probe coefficients over the joint support, one probe per row.
    if isinstance(difference, SparseVector):
        coeffs = difference.lookup(positions * model.stride_step)
    else:
        coeffs = difference.values[positions - 1]
    generator = rng if rng is not None else np.random.default_rng(0)
    probes = np.vstack(
        [np.eye(positions.size), generator.uniform(-1.0, 1.0, size=(random_probes, positions.size))]
    )
    norms = coefficient_norms(model, probes)
    estimate = float(np.max(np.abs(probes @ coeffs) / norms))
    logger.debug("lipschitz probes=%d estimate=%.6g bound=%.6g", probes.shape[0], estimate, bound)
    return LipschitzEstimate(estimate, bound)

