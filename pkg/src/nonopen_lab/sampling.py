"""Seeded random vectors for the property checks."""

from __future__ import annotations

import numpy as np

from .space_models import (
    GridFunction,
    SpaceModel,
    SparseVector,
    Vector,
    strong_norm,
)


def random_positions(
    rng: np.random.Generator,
    count: int,
    span: int,
    *,
    offset: int = 1,
    anchor: bool = True,
) -> np.ndarray:
    """Draw ``count`` distinct sorted positions from ``offset .. offset + span - 1``.

    With ``anchor`` the first position is always included.
    """
    count = max(1, min(count, span))
    pool = np.arange(offset, offset + span, dtype=np.int64)
    if anchor:
        rest = rng.choice(pool[1:], size=count - 1, replace=False) if count > 1 else []
        chosen = np.concatenate([pool[:1], np.asarray(rest, dtype=np.int64)])
    else:
        chosen = rng.choice(pool, size=count, replace=False)
    return np.sort(chosen)


def random_values(rng: np.random.Generator, count: int) -> np.ndarray:
    """Values ``sign * U(0.5, 1.5)`` bounded away from zero."""
    signs = rng.choice(np.array([-1.0, 1.0]), size=count)
    return signs * rng.uniform(0.5, 1.5, size=count)


def random_vector(
    model: SpaceModel,
    rng: np.random.Generator,
    *,
    max_support: int = 64,
    span: int | None = None,
    offset: int = 1,
    scale: float = 1.0,
    anchor: bool = True,
) -> Vector:
    """Draw a random nonzero vector of ``model``.

    Sequence vectors live on basis positions ``offset .. offset + span - 1``
    (``span`` defaults to ``4 * max_support``); grid functions on cells of
    the same window, clipped to the grid.
    """
    span = span if span is not None else 4 * max_support
    count = int(rng.integers(1, max_support + 1))
    if model.is_sequence:
        positions = random_positions(rng, count, span, offset=offset, anchor=anchor)
        values = random_values(rng, positions.size) * scale
        return SparseVector.from_arrays(positions * model.stride_step, values)
    cells = model.base.cells
    assert cells is not None
    offset = min(offset, cells)
    window = max(1, min(span, cells - offset + 1))
    positions = random_positions(rng, count, window, offset=offset, anchor=anchor)
    values = np.zeros(cells)
    values[positions - 1] = random_values(rng, positions.size) * scale
    return GridFunction.from_values(values)


def random_unit(
    model: SpaceModel,
    rng: np.random.Generator,
    *,
    max_support: int = 64,
    span: int | None = None,
    offset: int = 1,
    anchor: bool = True,
) -> Vector:
    """A random vector rescaled to unit strong norm."""
    vector = random_vector(
        model, rng, max_support=max_support, span=span, offset=offset, anchor=anchor
    )
    return vector.scaled(1.0 / strong_norm(model, vector))


def random_scale(rng: np.random.Generator, low: float, high: float) -> float:
    """Log-uniform scale ``10 ** U(low, high)``."""
    return float(10.0 ** rng.uniform(low, high))
