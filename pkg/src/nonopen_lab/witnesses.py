"""Constructive certificates that ``F`` is not open at the origin.

The witnesses come in three flavours:

* the scalar sequence ``gamma_n`` solving ``n gamma = exp((n/gamma)^s)``,
* explicit points ``z_n -> 0`` whose preimages blow up, and
* one-shot certificates that a small ball around ``0`` misses ``delta/2 * y``.

Reports are plain dataclasses with ``to_dict``/``csv_rows`` for the printers.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass, field
from enum import StrEnum
from typing import Any, NamedTuple, Protocol

import numpy as np

from .errors import ConfigurationError, NormalizationError, ParameterError
from .gauges import (
    FunctionalFamily,
    GaugeKind,
    build_family,
    dyadic_weights,
    gauge_eval,
    weak_norm,
)
from .maps import TINY_GAUGE, MapSpec, f_invert_radial, jf_solve
from .roots import safe_exp, solve_increasing
from .space_models import (
    SparseVector,
    Vector,
    basis_vector,
    check_representation,
    lp_norm,
    strong_norm,
    support_positions,
)

logger = logging.getLogger(__name__)

SCHEMA = "witness/1"
CSV_COLUMNS = ("n", "gamma", "sqrt_n", "z_norm", "inv_norm", "satisfied")


class Record(Protocol):
    def to_dict(self) -> dict[str, Any]: ...


@dataclass(frozen=True, slots=True)
class GammaRecord:
    """One term of the scalar witness sequence."""

    n: int
    s: float
    gamma: float
    sqrt_n: float
    satisfied: bool
    residual: float

    def to_dict(self) -> dict[str, Any]:
        return {
            "n": self.n,
            "s": self.s,
            "gamma": self.gamma,
            "sqrt_n": self.sqrt_n,
            "satisfied": self.satisfied,
            "residual": self.residual,
        }


def _check_n_list(n_list: Sequence[int]) -> list[int]:
    values = [int(n) for n in n_list]
    if not values:
        raise ParameterError("need at least one n")
    if any(n < 1 for n in values):
        raise ParameterError(f"every n must be >= 1, got {min(values)}")
    return values


def gamma_sequence(s: float, n_list: Sequence[int]) -> list[GammaRecord]:
    """Solve ``ln n + ln gamma = (n/gamma)^s`` for each ``n``.

    Raises:
        ParameterError: ``s <= 0`` or some ``n < 1``.
    """
    if not s > 0.0:
        raise ParameterError(f"degree s must be > 0, got {s}")
    records = []
    for n in _check_n_list(n_list):
        log_n = math.log(n)

        def profile(gamma: float, log_n: float = log_n) -> float:
            log_gamma = math.log(gamma)
            return log_n + log_gamma - safe_exp(s * (log_n - log_gamma))

        gamma = solve_increasing(profile, math.sqrt(n))
        residual = abs(log_n + math.log(gamma) - math.pow(n / gamma, s))
        sqrt_n = math.sqrt(n)
        records.append(GammaRecord(n, s, gamma, sqrt_n, gamma >= sqrt_n, residual))
    return records


@dataclass(frozen=True, slots=True)
class NoPreimageCertificate:
    """Certificate that ``delta/2 * y`` has no preimage in the unit ball.

    Attributes:
        delta: Radius parameter in ``(0, 1)``.
        s: Gauge degree.
        threshold: ``(1/(ln 2 - ln delta))^(1/s)``.
        weak_norm_y: ``G(y)^(1/s)``.
        certified: ``weak_norm_y < threshold``.
        preimage_norm: Norm of the radial preimage of ``delta/2 * y``.
    """

    delta: float
    s: float
    threshold: float
    weak_norm_y: float
    certified: bool
    preimage_norm: float

    @property
    def sound(self) -> bool:
        """A certified case must have its preimage outside the open unit ball."""
        return (not self.certified) or self.preimage_norm >= 1.0

    def to_dict(self) -> dict[str, Any]:
        return {
            "delta": self.delta,
            "s": self.s,
            "threshold": self.threshold,
            "weak_norm_y": self.weak_norm_y,
            "certified": self.certified,
            "preimage_norm": self.preimage_norm,
            "sound": self.sound,
        }


def certify_no_preimage(
    spec: MapSpec, delta: float, y: Vector, *, tolerance: float = 1e-12
) -> NoPreimageCertificate:
    """Certify that ``F`` maps no point of the unit ball onto ``delta/2 * y``.

    Raises:
        ParameterError: ``delta`` outside ``(0, 1)``.
        NormalizationError: ``||y||`` differs from ``1`` by more than ``tolerance``.
    """
    if not 0.0 < delta < 1.0:
        raise ParameterError(f"delta must lie in (0, 1), got {delta}")
    norm = strong_norm(spec.model, y)
    if abs(norm - 1.0) > tolerance:
        raise NormalizationError(f"y must have unit norm, got {norm!r}")
    s = float(spec.gauge.degree)
    threshold = math.pow(1.0 / (math.log(2.0) - math.log(delta)), 1.0 / s)
    weak = weak_norm(spec.gauge, spec.model, y)
    preimage = f_invert_radial(spec, y.scaled(delta / 2.0))
    certificate = NoPreimageCertificate(
        delta=delta,
        s=s,
        threshold=threshold,
        weak_norm_y=weak,
        certified=weak < threshold,
        preimage_norm=strong_norm(spec.model, preimage),
    )
    if not certificate.sound:
        logger.warning("unsound certificate: %s", certificate)
    return certificate


class PointClass(StrEnum):
    CRITICAL = "critical"
    REGULAR = "regular"


@dataclass(frozen=True, slots=True)
class PointClassification:
    """Classification of a point with the evidence collected for it."""

    kind: PointClass
    probes: int = 0
    max_residual: float = 0.0
    log_scaled: bool = False
    validated: bool = True
    underflow: bool = False

    def to_dict(self) -> dict[str, Any]:
        return {
            "kind": str(self.kind),
            "probes": self.probes,
            "max_residual": self.max_residual,
            "log_scaled": self.log_scaled,
            "validated": self.validated,
            "underflow": self.underflow,
        }


def classify_point(
    spec: MapSpec, x: Vector, *, tolerance: float = 1e-9, max_probes: int = 8
) -> PointClassification:
    """Classify ``x`` as critical (the origin) or regular.

    Regularity is validated by solving ``J_F(x) h = e_j`` for basis vectors on
    the support of ``x`` and one just beyond it. A nonzero point whose gauge
    underflows is still regular but cannot be validated.
    """
    check_representation(spec.model, x)
    if x.is_zero:
        return PointClassification(PointClass.CRITICAL)
    gauge_value = gauge_eval(spec.gauge, spec.model, x)
    if gauge_value <= TINY_GAUGE:
        logger.info("G(x) = %.3g underflows; regularity not validated", gauge_value)
        return PointClassification(PointClass.REGULAR, validated=False, underflow=True)
    positions = [int(j) for j in support_positions(spec.model, x)[:max_probes]]
    beyond = int(support_positions(spec.model, x).max()) + 1
    cells = spec.model.base.cells
    if spec.model.is_sequence or (cells is not None and beyond <= cells):
        positions.append(beyond)
    worst = 0.0
    log_scaled = False
    validated = True
    for position in positions:
        target = basis_vector(spec.model, position)
        result = jf_solve(spec, x, target)
        if result.log_scaled:
            log_scaled = True
            limit = tolerance
        else:
            limit = tolerance * (1.0 + strong_norm(spec.model, target))
        worst = max(worst, result.residual)
        validated = validated and result.residual <= limit
    return PointClassification(PointClass.REGULAR, len(positions), worst, log_scaled, validated)


@dataclass(frozen=True, slots=True)
class DivergenceRecord:
    """A point ``z_n = y_n / n`` and the norm of its radial preimage."""

    n: int
    weak_norm_y: float
    z_norm: float
    inv_norm: float
    sqrt_n: float
    satisfied: bool
    gamma: float | None = None

    def to_dict(self) -> dict[str, Any]:
        return {
            "n": self.n,
            "gamma": self.gamma,
            "sqrt_n": self.sqrt_n,
            "z_norm": self.z_norm,
            "inv_norm": self.inv_norm,
            "weak_norm_y": self.weak_norm_y,
            "satisfied": self.satisfied,
        }


@dataclass(frozen=True, slots=True)
class WitnessReport:
    """Serializable bundle of witness records."""

    model_id: str
    gauge_id: str
    records: tuple[Record, ...]
    summary: dict[str, Any] = field(default_factory=dict)
    schema: str = SCHEMA

    def to_dict(self) -> dict[str, Any]:
        return {
            "schema": self.schema,
            "model": self.model_id,
            "gauge": self.gauge_id,
            "records": [record.to_dict() for record in self.records],
            "summary": dict(self.summary),
        }

    def csv_rows(self) -> list[dict[str, Any]]:
        rows = []
        for record in self.records:
            data = record.to_dict()
            rows.append({column: data.get(column) for column in CSV_COLUMNS})
        return rows


def _flat_block(n: int, p: float) -> SparseVector:
    value = math.pow(float(n), -1.0 / p)
    return SparseVector.from_arrays(np.arange(1, n + 1), np.full(n, value))


def witness_vector(spec: MapSpec, n: int) -> Vector:
    """Unit vector ``y_n`` whose weak norm tends to zero with ``n``.

    Raises:
        ConfigurationError: The pair has no strictly weaker gauge norm to exploit.
    """
    model, gauge = spec.model, spec.gauge
    match gauge.kind:
        case GaugeKind.WEIGHTED_L2:
            return SparseVector.unit(n * n)
        case GaugeKind.DYADIC:
            return SparseVector.unit(n)
        case GaugeKind.WEAKSEP if model.is_sequence:
            vector = build_family(model).annihilated_vector(n - 1)
            return vector.scaled(1.0 / strong_norm(model, vector))
        case GaugeKind.LQ_EVEN if model.p is not None and gauge.base_degree > model.p:
            block = _flat_block(n, model.p)
            return block.scaled(1.0 / strong_norm(model, block))
        case GaugeKind.L5_ODD if model.p is not None and model.p < 5.0:
            block = _flat_block(n, model.p)
            return block.scaled(1.0 / strong_norm(model, block))
    raise ConfigurationError(
        f"no divergence witness for {spec.map_id}: the gauge norm is not strictly "
        "weaker on a sequence model"
    )


def _strictly(values: list[float], *, increasing: bool) -> bool:
    pairs = zip(values, values[1:], strict=False)
    return all((b > a) if increasing else (b < a) for a, b in pairs)


def divergence_report(
    spec: MapSpec, n_list: Sequence[int], *, s: float | None = None
) -> WitnessReport:
    """Build ``z_n = y_n/n -> 0`` and measure the norms of their preimages.

    Each record carries ``gamma_n`` for degree ``s`` (the gauge degree by
    default). Where ``G(y_n) = n^-s`` holds the preimage norm is an independent
    evaluation of ``gamma_n`` and the two are compared in the summary.
    """
    ns = _check_n_list(n_list)
    degree = float(spec.gauge.degree if s is None else s)
    gammas = {record.n: record for record in gamma_sequence(degree, ns)}
    records: list[DivergenceRecord] = []
    matched: list[float] = []
    for n in ns:
        y = witness_vector(spec, n)
        z = y.scaled(1.0 / n)
        inv_norm = strong_norm(spec.model, f_invert_radial(spec, z))
        weak = weak_norm(spec.gauge, spec.model, y)
        gamma = gammas[n]
        records.append(
            DivergenceRecord(
                n=n,
                weak_norm_y=weak,
                z_norm=strong_norm(spec.model, z),
                inv_norm=inv_norm,
                sqrt_n=gamma.sqrt_n,
                satisfied=gamma.satisfied,
                gamma=gamma.gamma,
            )
        )
        if degree == spec.gauge.degree and abs(weak * n - 1.0) <= 1e-12:
            matched.append(abs(inv_norm - gamma.gamma) / gamma.gamma)
    z_norms = [record.z_norm for record in records]
    inv_norms = [record.inv_norm for record in records]
    unsatisfied = [record.n for record in records if not record.satisfied]
    summary: dict[str, Any] = {
        "s": degree,
        "count": len(records),
        "z_decreasing": _strictly(z_norms, increasing=False),
        "inverse_increasing": _strictly(inv_norms, increasing=True),
        "gamma_increasing": _strictly([r.gamma for r in records if r.gamma], increasing=True),
        "preimage_above_sqrt_n": all(r.inv_norm >= r.sqrt_n for r in records),
        "all_satisfied": not unsatisfied,
        "satisfied_from": (max(unsatisfied) + 1) if unsatisfied else min(ns),
        "gamma_matched": len(matched),
        "gamma_max_rel_diff": max(matched) if matched else None,
    }
    logger.info("divergence report %s: %d records", spec.map_id, len(records))
    return WitnessReport(spec.model.model_id, spec.gauge.gauge_id, tuple(records), summary)


class WeakSepWitness(NamedTuple):
    """A vector annihilated by ``l_1..l_q`` and its weak-norm bound."""

    vector: Vector
    weak_norm: float
    bound: float


def weaksep_witness(family: FunctionalFamily, q: int) -> WeakSepWitness:
    """Return ``x_q`` with ``l_k(x_q) = 0`` for ``k <= q`` and its weak norm.

    The weak norm is ``sqrt(sum_k 2^-k l_k(x)^2)`` and is bounded by
    ``||x_q|| / 2^(q/2)``.
    """
    if q < 0:
        raise ParameterError(f"q must be >= 0, got {q}")
    vector = family.annihilated_vector(q)
    ks, vals = family.coefficients(vector)
    weak = math.sqrt(float(np.sum(vals * vals * dyadic_weights(ks))))
    bound = strong_norm(family.host, vector) / math.sqrt(math.ldexp(1.0, q))
    return WeakSepWitness(vector, weak, bound)


class Q5Remainder(NamedTuple):
    """Remainder terms of the ``l^5`` expansion and their Hoelder bounds."""

    a: float
    b: float
    bound_a: float
    bound_b: float


def _aligned(x: SparseVector, h: SparseVector) -> tuple[np.ndarray, np.ndarray]:
    indices = np.union1d(x.indices, h.indices)
    return x.lookup(indices), h.lookup(indices)


def q5_main_term(x: SparseVector, h: SparseVector) -> float:
    """Linear term ``5 sum |x_k| x_k^3 h_k``."""
    xv, hv = _aligned(x, h)
    return 5.0 * float(np.sum(np.abs(xv) * xv * xv * xv * hv))


def q5_increment(x: SparseVector, h: SparseVector) -> float:
    """``||x + h||_5^5 - ||x||_5^5`` evaluated directly."""
    xv, hv = _aligned(x, h)
    shifted = np.abs(xv + hv)
    base = np.abs(xv)
    return float(np.sum(shifted**5) - np.sum(base**5))


def remainder_bounds_q5(x: SparseVector, h: SparseVector) -> Q5Remainder:
    """Split the ``l^5`` increment into the linear term and remainders ``A + B``.

    ``A`` is the polynomial part of ``5/4 |x|((x+h)^4 - x^4)``; ``B`` integrates
    ``5 (|u| - |x|) u^3`` along ``u = x + t h``, through ``t0 = -x/h`` when the
    segment crosses zero.
    """
    xv, hv = _aligned(x, h)
    ax = np.abs(xv)
    a_terms = 5.0 * ax * hv * (1.5 * xv * xv * hv + xv * hv * hv + 0.25 * hv * hv * hv)
    start = xv
    end = xv + hv
    crossing = start * end < 0.0

    def antiderivative(u: np.ndarray) -> np.ndarray:
        return np.abs(u) * u**4 - 1.25 * ax * u**4

    b_terms = np.where(
        crossing,
        (antiderivative(np.zeros_like(start)) - antiderivative(start))
        + (antiderivative(end) - antiderivative(np.zeros_like(end))),
        antiderivative(end) - antiderivative(start),
    )
    nx = lp_norm(xv, 5.0)
    nh = lp_norm(hv, 5.0)
    bound_a = 5.0 * (3.0 * nx**3 * nh**2 + 3.0 * nx**2 * nh**3 + nx * nh**4)
    bound_b = 5.0 * (nx + nh) ** 3 * nh**2
    return Q5Remainder(float(np.sum(a_terms)), float(np.sum(b_terms)), bound_a, bound_b)

