"""High-level entry points over one configured (model, gauge) pair.

``LabService`` is what the CLI talks to: every method returns a plain,
JSON-serializable dict, and methods that check a property include a boolean
``passed`` key that decides the exit code.
"""

from __future__ import annotations

import dataclasses
from collections.abc import Mapping
from typing import Any

import numpy as np

from . import checks
from .config import CATALOGUE, RunConfig, build_pair, resolve_seed
from .gauges import gauge_eval, weak_norm
from .maps import MapSpec, f_eval, f_invert_radial, jf_solve
from .space_models import Vector, strong_norm, vector_to_json
from .witnesses import certify_no_preimage, classify_point, divergence_report

REPORT_SCHEMA = "report/1"


class LabService:
    """Runs evaluations, solves, witnesses and property suites for one pair.

    Attributes:
        _config: The resolved run configuration.
        _spec: The validated (model, gauge) pair built from it.
    """

    def __init__(self, config: RunConfig) -> None:
        """Validate the configured pair.

        Args:
            config: Resolved run configuration.

        Raises:
            ConfigurationError: The pair is not in the compatibility matrix.
        """
        if config.seed is None:
            config = dataclasses.replace(config, seed=resolve_seed(None))
        self._config = config
        self._spec = build_pair(config)

    @property
    def spec(self) -> MapSpec:
        return self._spec

    @property
    def config(self) -> RunConfig:
        return self._config

    def _header(self) -> dict[str, Any]:
        return {
            "model": self._spec.model.model_id,
            "gauge": self._spec.gauge.gauge_id,
            "s": self._spec.gauge.degree,
        }

    def _rng(self) -> np.random.Generator:
        return np.random.default_rng(self._config.seed)

    def evaluate(self, *, x: Vector) -> dict[str, Any]:
        """Gauge, norms, ``F(x)`` and the classification of ``x``."""
        model, gauge = self._spec.model, self._spec.gauge
        classification = classify_point(
            self._spec, x, tolerance=self._config.tolerances.solve_residual
        )
        return {
            **self._header(),
            "gauge_value": gauge_eval(gauge, model, x),
            "weak_norm": weak_norm(gauge, model, x),
            "strong_norm": strong_norm(model, x),
            "image": vector_to_json(f_eval(self._spec, x)),
            "classification": classification.to_dict(),
            "passed": classification.validated or classification.underflow,
        }

    def solve(self, *, x: Vector, y: Vector) -> dict[str, Any]:
        """Solve ``J_F(x) h = y`` and judge the residual."""
        result = jf_solve(self._spec, x, y)
        limit = self._config.tolerances.solve_residual
        if not result.log_scaled:
            limit *= 1.0 + strong_norm(self._spec.model, y)
        return {**self._header(), **result.to_dict(), "passed": result.residual <= limit}

    def invert(self, *, y: Vector) -> dict[str, Any]:
        """Radial preimage of ``y`` with its round-trip error."""
        model = self._spec.model
        preimage = f_invert_radial(self._spec, y)
        y_norm = strong_norm(model, y)
        error = strong_norm(model, f_eval(self._spec, preimage) - y)  # type: ignore[operator]
        relative = error / y_norm if y_norm > 0.0 else error
        return {
            **self._header(),
            "preimage": vector_to_json(preimage),
            "preimage_norm": strong_norm(model, preimage),
            "roundtrip_rel": relative,
            "passed": relative <= self._config.tolerances.roundtrip_rel,
        }

    def gradcheck(self, *, tolerance: float | None = None) -> dict[str, Any]:
        """Finite-difference check of ``J_F`` and ``J_G`` on seeded samples."""
        tolerances = self._config.tolerances
        if tolerance is not None:
            tolerances = dataclasses.replace(tolerances, fd_rel=tolerance)
        result = checks.gradcheck_suite(
            self._spec,
            self._rng(),
            samples=self._config.samples,
            max_support=self._config.max_support,
            tolerances=tolerances,
        )
        return {**self._header(), "seed": self._config.seed, **result.to_dict()}

    def nonopen(self, *, n_max: int, s: float | None = None) -> dict[str, Any]:
        """Witness table for ``n = 1..n_max``."""
        report = divergence_report(self._spec, range(1, n_max + 1), s=s)
        payload = report.to_dict()
        payload["passed"] = bool(report.summary["all_satisfied"])
        return payload

    def certify(self, *, delta: float, y: Vector) -> dict[str, Any]:
        """No-preimage certificate for ``delta/2 * y``."""
        certificate = certify_no_preimage(
            self._spec, delta, y, tolerance=self._config.tolerances.norm_unit
        )
        return {**self._header(), **certificate.to_dict(), "passed": certificate.sound}

    def report(self) -> dict[str, Any]:
        """Every applicable property suite."""
        results = checks.run_all(self._spec, self._config)
        return {
            "schema": REPORT_SCHEMA,
            **self._header(),
            "seed": self._config.seed,
            "samples": self._config.samples,
            "suites": [_to_dict(result) for result in results],
            "passed": all(result.passed for result in results),
        }


def list_models() -> list[dict[str, Any]]:
    """Rows of the compatibility matrix."""
    return [_to_dict(row) for row in CATALOGUE]


def create_service(config: RunConfig) -> LabService:
    """Instantiate a LabService."""
    return LabService(config)


def _to_dict(result: Any) -> dict[str, Any]:
    """Convert a result object to a dictionary."""
    if hasattr(result, "to_dict"):
        return result.to_dict()
    if isinstance(result, Mapping):
        return dict(result)
    raise TypeError(f"Unsupported result type: {type(result)!r}")
