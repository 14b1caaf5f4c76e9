"""Seeded property suites over a configured (model, gauge) pair.

Each suite draws its own vectors from a ``numpy.random.Generator`` and
returns a :class:`SuiteResult`; nothing here raises on a failed property.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .config import RunConfig, Tolerances, resolve_seed
from .errors import ConfigurationError
from .gauges import (
    GaugeKind,
    build_family,
    family_separation_check,
    gauge_eval,
    gauge_grad_apply,
    gauge_grad_lipschitz_bound,
    gradient_norm_bound,
    weak_norm,
)
from .maps import (
    MapSpec,
    assemble_jacobian,
    f_eval,
    f_invert_radial,
    jf_apply,
    jf_solve,
    scalar_weights,
)
from .sampling import random_scale, random_unit, random_vector
from .space_models import (
    ModelKind,
    SpaceModel,
    SparseVector,
    Vector,
    norm_comparison_check,
    strong_norm,
    to_coordinates,
    zero_vector,
)
from .witnesses import (
    PointClass,
    certify_no_preimage,
    classify_point,
    divergence_report,
    gamma_sequence,
    q5_increment,
    q5_main_term,
    remainder_bounds_q5,
    weaksep_witness,
    witness_vector,
)

logger = logging.getLogger(__name__)

UNIT_ROUNDOFF = float(np.finfo(np.float64).eps) / 2.0
SMALLEST_NORMAL = float(np.finfo(np.float64).tiny)
_ROUNDING_FACTOR = 64.0
_FD_STEP = 1e-6
_ORDER_STEPS = (1e-4, 1e-5)
_DECAY_RADII = tuple(10.0**-k for k in range(1, 7))
_COMPARISON_PAIRS = ((1.0, 2.0), (1.5, 3.0), (2.0, 4.0))


@dataclass(frozen=True, slots=True)
class SuiteResult:
    """Outcome of one property suite."""

    name: str
    passed: bool
    samples: int
    worst: float
    details: dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "passed": self.passed,
            "samples": self.samples,
            "worst": self.worst,
            "details": dict(self.details),
        }


def _finish(name: str, failures: int, samples: int, worst: float, **details: Any) -> SuiteResult:
    result = SuiteResult(name, failures == 0, samples, worst, {"failures": failures, **details})
    level = logging.INFO if result.passed else logging.WARNING
    logger.log(level, "%s: passed=%s samples=%d worst=%.3g", name, result.passed, samples, worst)
    return result


def _fd_sample(spec: MapSpec, x: Vector, h: Vector, tol: Tolerances) -> dict[str, Any]:
    model, gauge = spec.model, spec.gauge
    x_norm = strong_norm(model, x)
    base = max(1.0, x_norm)
    analytic = jf_apply(spec, x, h)
    analytic_norm = strong_norm(model, analytic)
    sigma, weight = scalar_weights(gauge_eval(gauge, model, x))
    # Rounding of x + eps h is amplified by ||J_F(x)||.
    sensitivity = x_norm * (sigma + weight * x_norm * gradient_norm_bound(gauge, model, x))

    def map_error(step: float) -> tuple[float, float]:
        plus = f_eval(spec, x + h.scaled(step))  # type: ignore[operator]
        minus = f_eval(spec, x - h.scaled(step))  # type: ignore[operator]
        approx = (plus - minus).scaled(0.5 / step)  # type: ignore[operator]
        scale = max(strong_norm(model, plus), strong_norm(model, minus)) + sensitivity
        return strong_norm(model, approx - analytic), scale  # type: ignore[operator]

    err, _ = map_error(_FD_STEP * base)
    map_rel = err / analytic_norm if analytic_norm > 0.0 else err

    step = _FD_STEP * base
    g_plus = gauge_eval(gauge, model, x + h.scaled(step))  # type: ignore[operator]
    g_minus = gauge_eval(gauge, model, x - h.scaled(step))  # type: ignore[operator]
    g_fd = (g_plus - g_minus) / (2.0 * step)
    g_an = gauge_grad_apply(gauge, model, x, h)
    magnitude = gauge_grad_apply(gauge, model, x.abs(), h.abs())
    gauge_rel = abs(g_fd - g_an) / magnitude if magnitude > 0.0 else abs(g_fd - g_an)

    errors = []
    limited = False
    for order_step in _ORDER_STEPS:
        current = order_step * base
        order_err, scale = map_error(current)
        limited = limited or order_err <= _ROUNDING_FACTOR * UNIT_ROUNDOFF * scale / current
        errors.append(order_err)
    ratio = errors[0] / errors[1] if errors[1] > 0.0 else None
    low, high = tol.fd_order_window
    if limited or ratio is None:
        status = "rounding_limited"
    elif low <= ratio <= high:
        status = "second_order"
    else:
        status = "violated"
    return {"map_rel": map_rel, "gauge_rel": gauge_rel, "ratio": ratio, "status": status}


def gradcheck_suite(
    spec: MapSpec,
    rng: np.random.Generator,
    *,
    samples: int = 100,
    max_support: int = 64,
    tolerances: Tolerances | None = None,
) -> SuiteResult:
    """Compare ``jf_apply`` and ``gauge_grad_apply`` with central differences."""
    tol = tolerances or Tolerances()
    rows = []
    failures = 0
    for index in range(samples):
        x = random_vector(spec.model, rng, max_support=max_support)
        h = random_vector(spec.model, rng, max_support=max_support)
        row = _fd_sample(spec, x, h, tol)
        ok = (
            row["map_rel"] <= tol.fd_rel
            and row["gauge_rel"] <= tol.fd_rel
            and row["status"] != "violated"
        )
        failures += 0 if ok else 1
        rows.append({"index": index, **row})
    worst = max(max(row["map_rel"], row["gauge_rel"]) for row in rows)
    statuses = [row["status"] for row in rows]
    return _finish(
        "gradcheck",
        failures,
        samples,
        worst,
        second_order=statuses.count("second_order"),
        rounding_limited=statuses.count("rounding_limited"),
        per_sample=rows,
    )


def _image_underflows(spec: MapSpec, x: Vector) -> bool:
    # Entries of F(x) below the normal range cannot be inverted accurately.
    sigma, _ = scalar_weights(gauge_eval(spec.gauge, spec.model, x))
    nonzero = np.abs(x.values[x.values != 0.0])
    return sigma * float(np.min(nonzero)) < SMALLEST_NORMAL


def _solve_ok(result_residual: float, log_scaled: bool, y_norm: float, tol: Tolerances) -> bool:
    limit = tol.solve_residual if log_scaled else tol.solve_residual * (1.0 + y_norm)
    return result_residual <= limit


def solve_suite(
    spec: MapSpec,
    rng: np.random.Generator,
    *,
    samples: int = 100,
    max_support: int = 64,
    tolerances: Tolerances | None = None,
) -> SuiteResult:
    """Residuals of ``jf_solve`` and round trips through ``f_invert_radial``."""
    tol = tolerances or Tolerances()
    model = spec.model
    failures = 0
    worst = 0.0
    worst_roundtrip = 0.0
    log_scaled = 0
    underflow = 0
    for _ in range(samples):
        x = random_vector(model, rng, max_support=max_support, scale=random_scale(rng, -1.0, 0.5))
        y = random_vector(model, rng, max_support=max_support)
        result = jf_solve(spec, x, y)
        log_scaled += int(result.log_scaled)
        worst = max(worst, result.residual)
        ok = _solve_ok(result.residual, result.log_scaled, strong_norm(model, y), tol)
        roundtrip = 0.0
        if _image_underflows(spec, x):
            underflow += 1
        else:
            back = f_invert_radial(spec, f_eval(spec, x))
            roundtrip = strong_norm(model, back - x) / strong_norm(model, x)  # type: ignore[operator]
            worst_roundtrip = max(worst_roundtrip, roundtrip)
        zero = jf_solve(spec, x, zero_vector(model))
        ok = ok and roundtrip <= tol.roundtrip_rel and zero.solution.is_zero
        failures += 0 if ok else 1
    return _finish(
        "solve",
        failures,
        samples,
        worst,
        log_scaled=log_scaled,
        worst_roundtrip=worst_roundtrip,
        underflow=underflow,
    )


def oracle_suite(
    spec: MapSpec,
    rng: np.random.Generator,
    *,
    samples: int = 100,
    dim: int = 16,
    tolerances: Tolerances | None = None,
) -> SuiteResult:
    """Compare ``jf_solve`` with a dense solve on the first ``dim`` positions."""
    tol = tolerances or Tolerances()
    model = spec.model
    if not model.is_sequence:
        dim = min(dim, model.base.cells or dim)
    failures = 0
    skipped = 0
    worst = 0.0
    for _ in range(samples):
        x = random_vector(model, rng, max_support=dim, span=dim)
        y = random_vector(model, rng, max_support=dim, span=dim)
        result = jf_solve(spec, x, y)
        if result.log_scaled:
            skipped += 1
            continue
        matrix = assemble_jacobian(spec, x, dim)
        dense = np.linalg.solve(matrix, to_coordinates(model, y, dim))
        mine = to_coordinates(model, result.solution, dim)
        rel = float(np.linalg.norm(dense - mine) / np.linalg.norm(dense))
        worst = max(worst, rel)
        failures += 0 if rel <= tol.oracle_rel else 1
    return _finish("oracle", failures, samples, worst, dim=dim, skipped=skipped)


def criticality_suite(
    spec: MapSpec,
    rng: np.random.Generator,
    *,
    samples: int = 100,
    max_support: int = 64,
    tolerances: Tolerances | None = None,
    max_probes: int = 4,
) -> SuiteResult:
    """The origin is the only critical point; nonzero points validate as regular."""
    tol = tolerances or Tolerances()
    model = spec.model
    failures = 0 if classify_point(spec, zero_vector(model)).kind is PointClass.CRITICAL else 1
    worst = 0.0
    log_scaled = 0
    underflow = 0
    for _ in range(samples):
        scale = random_scale(rng, -8.0, 1.0)
        x = random_vector(model, rng, max_support=max_support, scale=scale)
        verdict = classify_point(spec, x, tolerance=tol.solve_residual, max_probes=max_probes)
        underflow += int(verdict.underflow)
        log_scaled += int(verdict.log_scaled)
        worst = max(worst, verdict.max_residual)
        ok = verdict.kind is PointClass.REGULAR and (verdict.validated or verdict.underflow)
        failures += 0 if ok else 1
    return _finish(
        "criticality", failures, samples, worst, log_scaled=log_scaled, underflow=underflow
    )


def origin_decay_suite(
    spec: MapSpec,
    rng: np.random.Generator,
    *,
    samples: int = 100,
    max_support: int = 64,
    tolerances: Tolerances | None = None,
) -> SuiteResult:
    """``||F(h)||/||h|| <= exp(-1/(C||h||)^s)`` and decreases as ``h -> 0``."""
    tol = tolerances or Tolerances()
    model, gauge = spec.model, spec.gauge
    constant = model.comparison_constant
    s = gauge.degree
    failures = 0
    worst = 0.0
    for _ in range(samples):
        direction = random_unit(model, rng, max_support=max_support)
        ratios = []
        ok = True
        for radius in _DECAY_RADII:
            h = direction.scaled(radius)
            ratio = strong_norm(model, f_eval(spec, h)) / strong_norm(model, h)
            bound = math.exp(-1.0 / math.pow(constant * radius, s))
            ok = ok and ratio <= bound * (1.0 + tol.identity_rel)
            ratios.append(ratio)
        monotone = all(
            b <= a * (1.0 + tol.identity_rel) for a, b in zip(ratios, ratios[1:], strict=False)
        )
        worst = max(worst, ratios[0])
        failures += 0 if ok and monotone else 1
    return _finish("origin_decay", failures, samples, worst, radii=list(_DECAY_RADII))


def lipschitz_suite(
    spec: MapSpec,
    rng: np.random.Generator,
    *,
    samples: int = 100,
    max_support: int = 64,
    tolerances: Tolerances | None = None,
) -> SuiteResult:
    """Probe estimates of ``||J_G(x+z) - J_G(x)||`` stay below the analytic bound."""
    tol = tolerances or Tolerances()
    model, gauge = spec.model, spec.gauge
    failures = 0
    worst = 0.0
    for _ in range(samples):
        x = random_vector(model, rng, max_support=max_support)
        z = random_vector(model, rng, max_support=max_support, scale=random_scale(rng, -2.0, 0.0))
        estimate, bound = gauge_grad_lipschitz_bound(gauge, model, x, z, rng=rng)
        if bound > 0.0:
            worst = max(worst, estimate / bound)
        ok = estimate <= bound + tol.lipschitz_slack * max(1.0, bound)
        failures += 0 if ok else 1
    return _finish("lipschitz", failures, samples, worst)


_Q5_MODEL = SpaceModel.lp_seq(5.0)


def remainder_q5_suite(
    rng: np.random.Generator,
    *,
    samples: int = 100,
    max_support: int = 64,
    tolerances: Tolerances | None = None,
) -> SuiteResult:
    """Hoelder bounds and the reconstruction identity of the ``l^5`` expansion."""
    tol = tolerances or Tolerances()
    failures = 0
    worst = 0.0
    for _ in range(samples):
        x = random_vector(_Q5_MODEL, rng, max_support=max_support)
        scale = random_scale(rng, -2.0, 0.5)
        h = random_vector(_Q5_MODEL, rng, max_support=max_support, scale=scale)
        assert isinstance(x, SparseVector) and isinstance(h, SparseVector)
        a, b, bound_a, bound_b = remainder_bounds_q5(x, h)
        increment = q5_increment(x, h)
        reference = float(np.sum(np.abs((x + h).values) ** 5) + np.sum(np.abs(x.values) ** 5))
        identity = abs(q5_main_term(x, h) + a + b - increment) / reference
        worst = max(worst, identity)
        ok = (
            abs(a) <= bound_a * (1.0 + tol.identity_rel)
            and abs(b) <= bound_b * (1.0 + tol.identity_rel)
            and identity <= tol.identity_rel
        )
        failures += 0 if ok else 1
    return _finish("remainder_q5", failures, samples, worst)


def weaksep_suite(
    spec: MapSpec,
    rng: np.random.Generator,
    *,
    samples: int = 100,
    max_support: int = 64,
    tolerances: Tolerances | None = None,
    witnesses: int = 50,
) -> SuiteResult:
    """Unit dual norms, separation and annihilated witnesses of the family."""
    tol = tolerances or Tolerances()
    model = spec.model
    if model.kind is not ModelKind.WEAKSEP:
        raise ConfigurationError(f"{model.model_id} has no separating family")
    family = build_family(model)
    cells = model.base.cells
    count = witnesses if cells is None else min(witnesses, cells)
    certificates = family.norm_certificates(count)
    failures = int(np.sum(np.abs(certificates - 1.0) > tol.norm_unit))
    worst = float(np.max(np.abs(certificates - 1.0)))
    for _ in range(samples):
        x = random_vector(model, rng, max_support=max_support)
        _, values = family.coefficients(x)
        bounded = bool(np.all(np.abs(values) <= strong_norm(model, x) * (1.0 + tol.norm_unit)))
        failures += 0 if family_separation_check(family, x) and bounded else 1
    limit = witnesses if cells is None else min(witnesses, cells - 1)
    for q in range(1, limit + 1):
        vector, weak, bound = weaksep_witness(family, q)
        ks, values = family.coefficients(vector)
        annihilated = not np.any(values[ks <= q] != 0.0)
        failures += 0 if annihilated and weak <= bound * (1.0 + tol.norm_unit) else 1
    return _finish("weaksep", failures, samples, worst, witnesses=limit)


def comparison_suite(
    spec: MapSpec,
    rng: np.random.Generator,
    *,
    samples: int = 100,
    max_support: int = 64,
    tolerances: Tolerances | None = None,
) -> SuiteResult:
    """Weak norm is a norm dominated by the strong norm; ``l^p`` monotonicity."""
    tol = tolerances or Tolerances()
    model, gauge = spec.model, spec.gauge
    slack = 1.0 + tol.identity_rel
    symmetric = gauge.base_degree == 2 and gauge.power == 1
    failures = 0 if gauge_eval(gauge, model, zero_vector(model)) == 0.0 else 1
    worst = 0.0
    for _ in range(samples):
        x = random_vector(model, rng, max_support=max_support)
        y = random_vector(model, rng, max_support=max_support)
        weak_x = weak_norm(gauge, model, x)
        strong_x = strong_norm(model, x)
        worst = max(worst, weak_x / strong_x)
        factor = float(rng.uniform(-3.0, 3.0)) or 1.0
        ok = (
            gauge_eval(gauge, model, x) > 0.0
            and weak_x <= model.comparison_constant * strong_x * slack
            and weak_norm(gauge, model, x + y)  # type: ignore[operator]
            <= (weak_x + weak_norm(gauge, model, y)) * slack
            and math.isclose(
                weak_norm(gauge, model, x.scaled(factor)), abs(factor) * weak_x, rel_tol=1e-12
            )
        )
        for p1, p2 in _COMPARISON_PAIRS:
            ok = ok and norm_comparison_check(model, p1, p2, x)[2]
        if symmetric:
            ok = ok and gauge_grad_apply(gauge, model, x, y) == gauge_grad_apply(gauge, model, y, x)
        failures += 0 if ok else 1
    return _finish("comparison", failures, samples, worst)


def certificate_suite(
    spec: MapSpec,
    rng: np.random.Generator,
    *,
    samples: int = 100,
    tolerances: Tolerances | None = None,
) -> SuiteResult:
    """Every certified no-preimage case has its preimage outside the unit ball."""
    tol = tolerances or Tolerances()
    model = spec.model
    failures = 0
    certified = 0
    worst = 0.0
    for _ in range(samples):
        delta = float(rng.uniform(0.01, 0.99))
        offset = int(rng.integers(1, 200))
        y = random_unit(model, rng, max_support=4, span=8, offset=offset, anchor=False)
        certificate = certify_no_preimage(spec, delta, y, tolerance=tol.norm_unit)
        if certificate.certified:
            certified += 1
            worst = max(worst, certificate.weak_norm_y / certificate.threshold)
        failures += 0 if certificate.sound else 1
    return _finish("certificate", failures, samples, worst, certified=certified)


def witness_suite(
    spec: MapSpec,
    *,
    n_max: int = 100,
    tolerances: Tolerances | None = None,
) -> SuiteResult:
    """The divergence witness and the scalar ``gamma_n`` sequence agree."""
    tol = tolerances or Tolerances()
    ns = list(range(1, n_max + 1))
    gammas = gamma_sequence(float(spec.gauge.degree), ns)
    worst = max(record.residual for record in gammas)
    values = [record.gamma for record in gammas]
    increasing = all(b > a for a, b in zip(values, values[1:], strict=False))
    failures = 0 if worst <= tol.gamma_residual and increasing else 1
    report = divergence_report(spec, ns)
    summary = report.summary
    failures += 0 if summary["z_decreasing"] else 1
    failures += 0 if summary["all_satisfied"] else 1
    # Preimage norms equal gamma_n only where every y_n has weak norm exactly 1/n.
    if summary["gamma_matched"] == summary["count"] and not summary["inverse_increasing"]:
        failures += 1
    agreement = summary["gamma_max_rel_diff"]
    if agreement is not None and agreement > tol.gamma_agreement:
        failures += 1
    return _finish(
        "witness",
        failures,
        n_max,
        worst,
        gamma_max_rel_diff=agreement,
        inverse_increasing=summary["inverse_increasing"],
        all_satisfied=summary["all_satisfied"],
        satisfied_from=summary["satisfied_from"],
    )


def _supports_witness(spec: MapSpec) -> bool:
    try:
        witness_vector(spec, 1)
    except ConfigurationError:
        return False
    return True


def run_all(spec: MapSpec, config: RunConfig) -> list[SuiteResult]:
    """Run every suite that applies to ``spec`` in a fixed order."""
    tol = config.tolerances
    samples = config.samples
    support = config.max_support
    children = np.random.SeedSequence(resolve_seed(config.seed)).spawn(10)
    streams = [np.random.default_rng(child) for child in children]
    results = [
        gradcheck_suite(spec, streams[0], samples=samples, max_support=support, tolerances=tol),
        solve_suite(spec, streams[1], samples=samples, max_support=support, tolerances=tol),
        oracle_suite(spec, streams[2], samples=samples, tolerances=tol),
        criticality_suite(spec, streams[3], samples=samples, max_support=support, tolerances=tol),
        origin_decay_suite(spec, streams[4], samples=samples, max_support=support, tolerances=tol),
        lipschitz_suite(spec, streams[5], samples=samples, max_support=support, tolerances=tol),
        comparison_suite(spec, streams[6], samples=samples, max_support=support, tolerances=tol),
        certificate_suite(spec, streams[7], samples=samples, tolerances=tol),
    ]
    if spec.gauge.kind is GaugeKind.L5_ODD:
        results.append(
            remainder_q5_suite(streams[8], samples=samples, max_support=support, tolerances=tol)
        )
    if spec.model.kind is ModelKind.WEAKSEP:
        results.append(
            weaksep_suite(spec, streams[9], samples=samples, max_support=support, tolerances=tol)
        )
    if _supports_witness(spec):
        results.append(witness_suite(spec, n_max=min(samples, 100), tolerances=tol))
    return results
