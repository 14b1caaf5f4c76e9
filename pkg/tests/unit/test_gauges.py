"""Unit tests for gauges, their derivatives and the separating families."""

from __future__ import annotations

import math

import numpy as np
import pytest
from conftest import BUILTIN_PAIRS

from nonopen_lab.errors import ConfigurationError, PreconditionError
from nonopen_lab.gauges import (
    GaugeKind,
    GaugeSpec,
    build_family,
    check_compatible,
    family_separation_check,
    gauge_eval,
    gauge_grad_apply,
    gauge_grad_lipschitz_bound,
    gauge_gradient,
    weak_norm,
)
from nonopen_lab.maps import MapSpec
from nonopen_lab.sampling import random_vector
from nonopen_lab.space_models import GridFunction, SpaceModel, SparseVector

WEIGHTED = GaugeSpec(GaugeKind.WEIGHTED_L2)
DYADIC = GaugeSpec(GaugeKind.DYADIC)
LQ4 = GaugeSpec(GaugeKind.LQ_EVEN, q=4)
L5 = GaugeSpec(GaugeKind.L5_ODD)


@pytest.mark.parametrize(
    ("gauge", "model", "x", "expected"),
    [
        (WEIGHTED, SpaceModel.l2_weighted(), SparseVector.unit(1), 1.0),
        (WEIGHTED, SpaceModel.l2_weighted(), SparseVector.unit(4), 0.25),
        (LQ4, SpaceModel.lp_seq(2.0), SparseVector.from_entries({1: 1.0, 2: 1.0}), 2.0),
        (DYADIC, SpaceModel.linf_dyadic(), SparseVector.unit(3), 0.125),
        (
            GaugeSpec(GaugeKind.GRID_SQUARE),
            SpaceModel.lp_grid(2.0, 4),
            GridFunction.from_values([2.0, 0.0, 0.0, 0.0]),
            1.0,
        ),
    ],
)
def test_gauge_values(gauge: GaugeSpec, model: SpaceModel, x: object, expected: float) -> None:
    """Gauge values on hand-computable vectors."""
    assert gauge_eval(gauge, model, x) == expected  # type: ignore[arg-type]


@pytest.mark.parametrize(
    ("gauge", "model", "x", "h", "expected"),
    [
        (WEIGHTED, SpaceModel.l2_weighted(), SparseVector.unit(1), SparseVector.unit(1), 2.0),
        (WEIGHTED, SpaceModel.l2_weighted(), SparseVector.unit(1), SparseVector.unit(2), 0.0),
        (L5, SpaceModel.lp_seq(2.0), SparseVector.unit(1), SparseVector.unit(1), 5.0),
        (LQ4, SpaceModel.lp_seq(2.0), SparseVector.unit(1, 2.0), SparseVector.unit(1), 32.0),
    ],
)
def test_directional_derivatives(
    gauge: GaugeSpec, model: SpaceModel, x: SparseVector, h: SparseVector, expected: float
) -> None:
    """J_G(x) h on hand-computable pairs."""
    assert gauge_grad_apply(gauge, model, x, h) == expected


def test_power_raises_degree_and_chains_derivative() -> None:
    """G**2 has degree 4 and derivative 2 G J_G."""
    squared = GaugeSpec(GaugeKind.WEIGHTED_L2, power=2)
    model = SpaceModel.l2_weighted()
    x = SparseVector.unit(1, 2.0)
    assert squared.degree == 4
    assert squared.gauge_id == "weighted_l2^2"
    assert gauge_eval(squared, model, x) == 16.0
    assert gauge_grad_apply(squared, model, x, SparseVector.unit(1)) == 2.0 * 4.0 * 4.0


def test_gauge_spec_validation() -> None:
    """Odd or missing q, fractional powers and stray q are rejected."""
    with pytest.raises(ConfigurationError):
        GaugeSpec(GaugeKind.LQ_EVEN, q=3)
    with pytest.raises(ConfigurationError):
        GaugeSpec(GaugeKind.LQ_EVEN)
    with pytest.raises(ConfigurationError):
        GaugeSpec(GaugeKind.WEIGHTED_L2, power=0)
    with pytest.raises(ConfigurationError):
        GaugeSpec(GaugeKind.DYADIC, q=2)
    with pytest.raises(ConfigurationError):
        GaugeSpec("cubic")  # type: ignore[arg-type]


@pytest.mark.parametrize(
    ("gauge", "model"),
    [
        (LQ4, SpaceModel.lp_seq(6.0)),
        (L5, SpaceModel.lp_seq(6.0)),
        (GaugeSpec(GaugeKind.GRID_SQUARE), SpaceModel.lp_grid(1.5, 8)),
        (DYADIC, SpaceModel.l2_weighted()),
        (WEIGHTED, SpaceModel.lp_seq(2.0)),
        (GaugeSpec(GaugeKind.WEAKSEP), SpaceModel.lp_seq(2.0)),
    ],
)
def test_incompatible_pairs(gauge: GaugeSpec, model: SpaceModel) -> None:
    """Pairs outside the compatibility matrix are configuration errors."""
    with pytest.raises(ConfigurationError):
        check_compatible(gauge, model)
    with pytest.raises(ConfigurationError):
        MapSpec(model, gauge)


@pytest.mark.parametrize("name", sorted(BUILTIN_PAIRS))
def test_gradient_matches_central_difference(name: str, rng: np.random.Generator) -> None:
    """J_G agrees with central differences of G on random directions."""
    spec = BUILTIN_PAIRS[name]
    model, gauge = spec.model, spec.gauge
    step = 1e-6
    for _ in range(20):
        x = random_vector(model, rng, max_support=4)
        h = random_vector(model, rng, max_support=4)
        plus = gauge_eval(gauge, model, x + h.scaled(step))  # type: ignore[operator]
        minus = gauge_eval(gauge, model, x - h.scaled(step))  # type: ignore[operator]
        analytic = gauge_grad_apply(gauge, model, x, h)
        scale = gauge_grad_apply(gauge, model, x.abs(), h.abs())
        assert abs((plus - minus) / (2.0 * step) - analytic) <= 1e-6 * scale


@pytest.mark.parametrize("name", sorted(BUILTIN_PAIRS))
def test_gradient_vector_pairs_to_directional_derivative(
    name: str, rng: np.random.Generator
) -> None:
    """The coefficient gradient paired with h reproduces J_G(x) h."""
    spec = BUILTIN_PAIRS[name]
    model, gauge = spec.model, spec.gauge
    for _ in range(10):
        x = random_vector(model, rng, max_support=16)
        h = random_vector(model, rng, max_support=16)
        paired = gauge_gradient(gauge, model, x).dot(h)  # type: ignore[arg-type]
        direct = gauge_grad_apply(gauge, model, x, h)
        scale = gauge_grad_apply(gauge, model, x.abs(), h.abs())
        assert abs(paired - direct) <= 1e-12 * scale


def test_weak_norm_is_homogeneous(rng: np.random.Generator) -> None:
    """|||t x||| = |t| |||x||| for the degree-q gauge."""
    model = SpaceModel.lp_seq(2.0)
    x = random_vector(model, rng, max_support=8)
    assert weak_norm(LQ4, model, x.scaled(-3.0)) == pytest.approx(3.0 * weak_norm(LQ4, model, x))
    assert weak_norm(LQ4, model, SparseVector.zero()) == 0.0


def test_lipschitz_examples() -> None:
    """Probe estimates and analytic bounds on hand-computable pairs."""
    dyadic = gauge_grad_lipschitz_bound(
        DYADIC, SpaceModel.linf_dyadic(), SparseVector.unit(1), SparseVector.unit(1)
    )
    assert dyadic.estimate == pytest.approx(1.0)
    assert dyadic.bound == pytest.approx(2.0)

    even = gauge_grad_lipschitz_bound(
        LQ4, SpaceModel.lp_seq(2.0), SparseVector.unit(1), SparseVector.unit(2)
    )
    assert even.estimate == pytest.approx(4.0)
    assert even.bound == pytest.approx(28.0)


@pytest.mark.parametrize("name", sorted(BUILTIN_PAIRS))
def test_lipschitz_vanishes_for_zero_shift(name: str, rng: np.random.Generator) -> None:
    """Identical points give a zero estimate and a zero bound."""
    spec = BUILTIN_PAIRS[name]
    x = random_vector(spec.model, rng, max_support=8)
    zero = x.scaled(0.0)
    estimate, bound = gauge_grad_lipschitz_bound(spec.gauge, spec.model, x, zero)
    assert estimate == 0.0
    assert bound == 0.0


def test_coordinate_family_separation() -> None:
    """Coordinate functionals separate every nonzero vector."""
    family = build_family(SpaceModel.weaksep(SpaceModel.lp_seq(2.0), "coordinate"))
    assert family_separation_check(family, SparseVector.unit(5))
    assert family_separation_check(family, SparseVector.from_entries({3: -2.0, 9: 1.0}))
    with pytest.raises(PreconditionError):
        family_separation_check(family, SparseVector.zero())


@pytest.mark.parametrize(
    "model",
    [
        SpaceModel.weaksep(SpaceModel.lp_seq(2.0), "coordinate"),
        SpaceModel.weaksep(SpaceModel.lp_seq(1.5), "subspace", stride=4),
        SpaceModel.weaksep(SpaceModel.lp_seq(3.0), "neighbor"),
        SpaceModel.weaksep(SpaceModel.c0_dyadic(), "neighbor"),
        SpaceModel.weaksep(SpaceModel.linf_dyadic(), "coordinate"),
        SpaceModel.weaksep(SpaceModel.lp_grid(3.0, 16), "cells"),
    ],
)
def test_family_functionals_have_unit_norm(model: SpaceModel) -> None:
    """Every l_k of a built-in family has dual norm one."""
    certificates = build_family(model).norm_certificates(12)
    assert np.allclose(certificates, 1.0, rtol=0.0, atol=1e-12)


def test_neighbor_family_values() -> None:
    """l_k(x) = c (x_k + x_{k+1}) with c = 1/2 on the sup-norm host."""
    family = build_family(SpaceModel.weaksep(SpaceModel.c0_dyadic(), "neighbor"))
    x = SparseVector.from_entries({2: 1.0, 3: 3.0})
    assert family.evaluate(1, x) == 0.5
    assert family.evaluate(2, x) == 2.0
    assert family.evaluate(3, x) == 1.5
    assert family.evaluate(4, x) == 0.0


def test_cells_family_runs_out_of_annihilated_vectors() -> None:
    """On M cells no nonzero function is killed by l_1 .. l_M."""
    family = build_family(SpaceModel.weaksep(SpaceModel.lp_grid(2.0, 4), "cells"))
    assert family.annihilated_vector(3) == GridFunction.unit(4, 4)
    with pytest.raises(ConfigurationError):
        family.annihilated_vector(4)


def test_weaksep_gauge_is_weighted_sum_of_squares() -> None:
    """G(x) = sum_k 2^-k l_k(x)^2 for the coordinate family."""
    model = SpaceModel.weaksep(SpaceModel.lp_seq(2.0), "coordinate")
    x = SparseVector.from_entries({1: 2.0, 3: 4.0})
    assert gauge_eval(GaugeSpec(GaugeKind.WEAKSEP), model, x) == 2.0 + 2.0
    assert math.isclose(weak_norm(GaugeSpec(GaugeKind.WEAKSEP), model, x), 2.0)
