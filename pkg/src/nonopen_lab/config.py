"""Run configuration: tolerances, seeds and (model, gauge) construction.

Values resolve as CLI flag > JSON config file > environment > default.
"""

from __future__ import annotations

import dataclasses
import json
import os
from collections.abc import Mapping
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from .errors import ConfigurationError
from .gauges import GaugeKind, GaugeSpec
from .maps import MapSpec
from .space_models import FAMILIES, ModelKind, SpaceModel

DEFAULT_SEED = 20240601
SEED_ENV = "NONOPEN_SEED"

DEFAULT_GAUGE = {
    ModelKind.L2_WEIGHTED: GaugeKind.WEIGHTED_L2,
    ModelKind.LP_SEQ: GaugeKind.LQ_EVEN,
    ModelKind.LINF_DYADIC: GaugeKind.DYADIC,
    ModelKind.C0_DYADIC: GaugeKind.DYADIC,
    ModelKind.LP_GRID: GaugeKind.GRID_SQUARE,
    ModelKind.WEAKSEP: GaugeKind.WEAKSEP,
}


@dataclass(frozen=True, slots=True)
class Tolerances:
    """Numeric acceptance thresholds shared by every check."""

    fd_rel: float = 1e-6
    fd_order_window: tuple[float, float] = (50.0, 200.0)
    solve_residual: float = 1e-9
    lipschitz_slack: float = 1e-9
    roundtrip_rel: float = 1e-9
    oracle_rel: float = 1e-9
    gamma_residual: float = 1e-9
    gamma_agreement: float = 1e-8
    identity_rel: float = 1e-12
    norm_unit: float = 1e-12

    @classmethod
    def from_mapping(cls, data: Mapping[str, Any]) -> Tolerances:
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(data) - names)
        if unknown:
            raise ConfigurationError(f"unknown tolerance keys: {', '.join(unknown)}")
        values = dict(data)
        if "fd_order_window" in values:
            low, high = values["fd_order_window"]
            values["fd_order_window"] = (float(low), float(high))
        return cls(**values)


@dataclass(frozen=True, slots=True)
class RunConfig:
    """Everything a run needs; immutable once resolved.

    For ``weaksep`` runs ``host`` names the underlying model and ``p``/``cells``
    apply to it.
    """

    model: str = ModelKind.L2_WEIGHTED.value
    p: float | None = None
    cells: int | None = None
    host: str | None = None
    family: str | None = None
    stride: int = 1
    gauge: str | None = None
    q: int | None = None
    power: int = 1
    seed: int | None = None
    samples: int = 100
    max_support: int = 64
    tolerances: Tolerances = field(default_factory=Tolerances)

    @classmethod
    def from_mapping(cls, data: Mapping[str, Any]) -> RunConfig:
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(data) - names)
        if unknown:
            raise ConfigurationError(f"unknown config keys: {', '.join(unknown)}")
        values = dict(data)
        if "tolerances" in values:
            values["tolerances"] = Tolerances.from_mapping(values["tolerances"])
        return cls(**values)

    def merged(self, overrides: Mapping[str, Any]) -> RunConfig:
        """Return a copy with every non-``None`` override applied."""
        clean = {key: value for key, value in overrides.items() if value is not None}
        return dataclasses.replace(self, **clean)


def load_config(path: str | Path) -> RunConfig:
    """Read a JSON config object from ``path``.

    Raises:
        ConfigurationError: The file is not a JSON object or has unknown keys.
        OSError: The file cannot be read.
    """
    text = Path(path).read_text(encoding="utf-8")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"invalid JSON in {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigurationError(f"config {path} must contain a JSON object")
    return RunConfig.from_mapping(data)


def resolve_seed(explicit: int | None) -> int:
    """Resolve the seed from the CLI flag, then ``NONOPEN_SEED``, then the default."""
    if explicit is not None:
        return int(explicit)
    if env_seed := os.getenv(SEED_ENV):
        try:
            return int(env_seed)
        except ValueError as exc:
            raise ConfigurationError(f"{SEED_ENV} must be an integer, got {env_seed!r}") from exc
    return DEFAULT_SEED


def _plain_model(kind: str, p: float | None, cells: int | None) -> SpaceModel:
    try:
        model_kind = ModelKind(kind)
    except ValueError as exc:
        raise ConfigurationError(f"unknown model {kind!r}") from exc
    match model_kind:
        case ModelKind.L2_WEIGHTED:
            return SpaceModel.l2_weighted()
        case ModelKind.LP_SEQ:
            return SpaceModel.lp_seq(2.0 if p is None else p)
        case ModelKind.LINF_DYADIC:
            return SpaceModel.linf_dyadic()
        case ModelKind.C0_DYADIC:
            return SpaceModel.c0_dyadic()
        case ModelKind.LP_GRID:
            return SpaceModel.lp_grid(4.0 if p is None else p, 64 if cells is None else cells)
    raise ConfigurationError(f"{kind} cannot be a host model")


def build_model(cfg: RunConfig) -> SpaceModel:
    """Construct the space model named by ``cfg``."""
    if cfg.model != ModelKind.WEAKSEP.value:
        return _plain_model(cfg.model, cfg.p, cfg.cells)
    host = _plain_model(cfg.host or ModelKind.LP_SEQ.value, cfg.p, cfg.cells)
    default_family = "cells" if host.kind is ModelKind.LP_GRID else "coordinate"
    family = cfg.family or default_family
    if family not in FAMILIES:
        raise ConfigurationError(f"unknown family {family!r}")
    return SpaceModel.weaksep(host, family, stride=cfg.stride)


def build_gauge(cfg: RunConfig, model: SpaceModel) -> GaugeSpec:
    """Construct the gauge named by ``cfg``, defaulting to the model's own."""
    kind = GaugeKind(cfg.gauge) if cfg.gauge else DEFAULT_GAUGE[model.kind]
    q = cfg.q
    if kind is GaugeKind.LQ_EVEN and q is None:
        q = 4
    return GaugeSpec(kind, q=q, power=cfg.power)


def build_pair(cfg: RunConfig) -> MapSpec:
    """Validate ``cfg`` against the compatibility matrix and build the pair."""
    if cfg.samples < 1:
        raise ConfigurationError(f"samples must be >= 1, got {cfg.samples}")
    if cfg.max_support < 1:
        raise ConfigurationError(f"max_support must be >= 1, got {cfg.max_support}")
    model = build_model(cfg)
    try:
        gauge = build_gauge(cfg, model)
    except ValueError as exc:
        raise ConfigurationError(str(exc)) from exc
    return MapSpec(model, gauge)


@dataclass(frozen=True, slots=True)
class CatalogueRow:
    """One admissible (model, gauge) combination."""

    model: str
    gauge: str
    provenance: str
    constraint: str

    def to_dict(self) -> dict[str, str]:
        return dataclasses.asdict(self)


CATALOGUE: tuple[CatalogueRow, ...] = (
    CatalogueRow(
        "l2_weighted",
        "weighted_l2",
        "non-open C^1 map on a Hilbert space, unique critical point at 0; G = sum x_k^2/k",
        "power=2 gives the degree-4 variant",
    ),
    CatalogueRow(
        "lp_seq",
        "lq_even",
        "non-open C^1 map on l^p; G = ||x||_q^q, weaker than ||x||_p for q > p",
        "q even, q >= p",
    ),
    CatalogueRow(
        "lp_seq",
        "l5_odd",
        "odd-exponent variant on l^p, J_G(x)h = 5 sum |x_k| x_k^3 h_k; G = ||x||_5^5",
        "p <= 5",
    ),
    CatalogueRow(
        "linf_dyadic",
        "dyadic",
        "non-separable l^inf; dyadic norm sum x_k^2 2^-k strictly weaker than ||x||_inf",
        "",
    ),
    CatalogueRow(
        "c0_dyadic",
        "dyadic",
        "separable c_0 with the same dyadic norm",
        "",
    ),
    CatalogueRow(
        "lp_grid",
        "grid_square",
        "L^p(P) on [0, 1], M equal cells; G = int f^2 dP, dominated by ||f||_p (Hoelder)",
        "p >= 2",
    ),
    CatalogueRow(
        "weaksep",
        "weaksep",
        "every weakly separable space: G = sum l_k(x)^2 2^-k over a bounded separating family",
        "families: coordinate, subspace, neighbor, cells",
    ),
)
