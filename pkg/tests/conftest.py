"""Pytest configuration: shared seeded generators and the built-in map pairs."""

from __future__ import annotations

import numpy as np
import pytest

from nonopen_lab.gauges import GaugeKind, GaugeSpec
from nonopen_lab.maps import MapSpec
from nonopen_lab.space_models import SpaceModel

SEED = 20240601

BUILTIN_PAIRS: dict[str, MapSpec] = {
    "weighted_l2": MapSpec(SpaceModel.l2_weighted(), GaugeSpec(GaugeKind.WEIGHTED_L2)),
    "weighted_l2_sq": MapSpec(SpaceModel.l2_weighted(), GaugeSpec(GaugeKind.WEIGHTED_L2, power=2)),
    "lq4_on_l2": MapSpec(SpaceModel.lp_seq(2.0), GaugeSpec(GaugeKind.LQ_EVEN, q=4)),
    "lq6_on_l3": MapSpec(SpaceModel.lp_seq(3.0), GaugeSpec(GaugeKind.LQ_EVEN, q=6)),
    "l5_on_l2": MapSpec(SpaceModel.lp_seq(2.0), GaugeSpec(GaugeKind.L5_ODD)),
    "dyadic_linf": MapSpec(SpaceModel.linf_dyadic(), GaugeSpec(GaugeKind.DYADIC)),
    "dyadic_c0": MapSpec(SpaceModel.c0_dyadic(), GaugeSpec(GaugeKind.DYADIC)),
    "grid": MapSpec(SpaceModel.lp_grid(4.0, 64), GaugeSpec(GaugeKind.GRID_SQUARE)),
    "weaksep_coordinate": MapSpec(
        SpaceModel.weaksep(SpaceModel.lp_seq(2.0), "coordinate"), GaugeSpec(GaugeKind.WEAKSEP)
    ),
    "weaksep_neighbor": MapSpec(
        SpaceModel.weaksep(SpaceModel.lp_seq(3.0), "neighbor"), GaugeSpec(GaugeKind.WEAKSEP)
    ),
    "weaksep_subspace": MapSpec(
        SpaceModel.weaksep(SpaceModel.c0_dyadic(), "subspace", stride=3),
        GaugeSpec(GaugeKind.WEAKSEP),
    ),
    "weaksep_cells": MapSpec(
        SpaceModel.weaksep(SpaceModel.lp_grid(2.0, 32), "cells"), GaugeSpec(GaugeKind.WEAKSEP)
    ),
}


@pytest.fixture(name="rng")
def fixture_rng() -> np.random.Generator:
    """Deterministic generator shared by the property tests."""
    return np.random.default_rng(SEED)


@pytest.fixture(name="weighted")
def fixture_weighted() -> MapSpec:
    """The Hilbert-space pair with ``G(x) = sum x_k^2 / k``."""
    return BUILTIN_PAIRS["weighted_l2"]


@pytest.fixture(autouse=True)
def fixture_clear_seed_env(monkeypatch: pytest.MonkeyPatch) -> None:
    """Keep the seed environment variable from leaking into tests."""
    monkeypatch.delenv("NONOPEN_SEED", raising=False)
