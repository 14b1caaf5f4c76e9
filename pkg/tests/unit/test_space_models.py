"""Unit tests for vector representations, strong norms and the vector format."""

from __future__ import annotations

import math

import numpy as np
import pytest

from nonopen_lab.errors import ConfigurationError, ParameterError, RepresentationError
from nonopen_lab.space_models import (
    GridFunction,
    SpaceModel,
    SparseVector,
    basis_vector,
    from_coordinates,
    lp_norm,
    norm_comparison_check,
    strong_norm,
    to_coordinates,
    vector_from_json,
    vector_to_json,
)


def test_sparse_vector_canonicalizes_entries() -> None:
    """Duplicates are summed, zeros dropped and indices sorted."""
    vec = SparseVector.from_arrays([5, 2, 5, 9], [1.0, 3.0, -1.0, 2.0])
    assert vec.support == (2, 9)
    assert vec.nnz == 2
    assert vec.entries() == [(2, 3.0), (9, 2.0)]
    assert vec.max_index == 9
    assert vec.get(5) == 0.0


def test_sparse_vector_rejects_zero_based_index() -> None:
    """Sequence indices start at 1."""
    with pytest.raises(RepresentationError):
        SparseVector.from_arrays([0, 1], [1.0, 1.0])


def test_sparse_vector_arrays_are_read_only() -> None:
    """Stored arrays cannot be mutated in place."""
    vec = SparseVector.unit(3, 2.0)
    with pytest.raises(ValueError, match="read-only"):
        vec.values[0] = 5.0


def test_sparse_arithmetic_cancels_exactly() -> None:
    """x - x is the empty vector and scalar products drop nothing else."""
    x = SparseVector.from_entries({1: 1.5, 1000: -2.0})
    assert (x - x).is_zero
    assert (2.0 * x).entries() == [(1, 3.0), (1000, -4.0)]
    assert (x / 2.0).get(1000) == -1.0
    assert x.dot(SparseVector.unit(1000, 3.0)) == -6.0


def test_sparse_and_grid_do_not_mix() -> None:
    """Pairing a sequence with a grid function is a representation error."""
    with pytest.raises(RepresentationError):
        SparseVector.unit(1).dot(GridFunction.unit(4, 1))  # type: ignore[arg-type]


def test_grid_cell_counts_must_match() -> None:
    """Grid functions on different grids cannot be combined."""
    with pytest.raises(RepresentationError):
        GridFunction.zero(4) + GridFunction.zero(8)


@pytest.mark.parametrize(
    ("model", "vector", "expected"),
    [
        (SpaceModel.l2_weighted(), SparseVector.zero(), 0.0),
        (SpaceModel.lp_seq(5.0), SparseVector.unit(1), 1.0),
        (SpaceModel.lp_seq(1.0), SparseVector.from_entries({1: 3.0, 4: -4.0}), 7.0),
        (SpaceModel.linf_dyadic(), SparseVector.from_entries({2: -3.0, 7: 1.0}), 3.0),
        (SpaceModel.lp_grid(2.0, 4), GridFunction.from_values([2.0, 0.0, 0.0, 0.0]), 1.0),
    ],
)
def test_strong_norm_examples(model: SpaceModel, vector: object, expected: float) -> None:
    """Strong norms on hand-computable vectors."""
    assert strong_norm(model, vector) == pytest.approx(expected, rel=1e-15)  # type: ignore[arg-type]


def test_strong_norm_rejects_wrong_representation() -> None:
    """A grid model refuses sparse vectors and vice versa."""
    with pytest.raises(RepresentationError):
        strong_norm(SpaceModel.lp_grid(2.0, 4), SparseVector.unit(1))
    with pytest.raises(RepresentationError):
        strong_norm(SpaceModel.lp_seq(2.0), GridFunction.unit(4, 1))
    with pytest.raises(RepresentationError):
        strong_norm(SpaceModel.lp_grid(2.0, 4), GridFunction.unit(8, 1))


def test_lp_norm_survives_tiny_and_huge_entries() -> None:
    """Norms of vectors far outside the unit range stay exact up to rounding."""
    tiny = np.array([3e-200, 4e-200])
    huge = np.array([3e200, 4e200])
    assert lp_norm(tiny, 2.0) == pytest.approx(5e-200, rel=1e-14)
    assert lp_norm(huge, 2.0) == pytest.approx(5e200, rel=1e-14)


def test_norm_comparison_examples() -> None:
    """Monotonicity of l^p in p for sequences and of L^p(P) for grids."""
    seq = SpaceModel.lp_seq(2.0)
    smaller, larger, holds = norm_comparison_check(seq, 2.0, 4.0, SparseVector.unit(7))
    assert (smaller, larger, holds) == (1.0, 1.0, True)

    smaller, larger, holds = norm_comparison_check(
        seq, 1.0, 2.0, SparseVector.from_entries({1: 1.0, 2: 1.0})
    )
    assert smaller == pytest.approx(math.sqrt(2.0))
    assert larger == pytest.approx(2.0)
    assert holds

    grid = SpaceModel.lp_grid(2.0, 2)
    smaller, larger, holds = norm_comparison_check(
        grid, 1.0, 2.0, GridFunction.from_values([1.0, 0.0])
    )
    assert smaller == pytest.approx(0.5)
    assert larger == pytest.approx(1.0 / math.sqrt(2.0))
    assert holds


def test_norm_comparison_requires_increasing_exponents() -> None:
    """p1 >= p2 is a parameter error."""
    with pytest.raises(ParameterError):
        norm_comparison_check(SpaceModel.lp_seq(2.0), 4.0, 2.0, SparseVector.unit(1))


def test_model_validation() -> None:
    """Invalid exponents, grids and weaksep hosts are configuration errors."""
    with pytest.raises(ConfigurationError):
        SpaceModel.lp_seq(0.5)
    with pytest.raises(ConfigurationError):
        SpaceModel.lp_grid(2.0, 0)
    with pytest.raises(ConfigurationError):
        SpaceModel.weaksep(SpaceModel.linf_dyadic(), "neighbor")
    with pytest.raises(ConfigurationError):
        SpaceModel.weaksep(SpaceModel.lp_seq(2.0), "cells")
    with pytest.raises(ConfigurationError):
        SpaceModel.weaksep(SpaceModel.lp_seq(2.0), "coordinate", stride=2)


def test_model_ids() -> None:
    """Model identifiers are stable strings used in reports."""
    assert SpaceModel.l2_weighted().model_id == "l2_weighted"
    assert SpaceModel.lp_seq(2.5).model_id == "lp_seq(p=2.5)"
    assert SpaceModel.lp_grid(4.0, 64).model_id == "lp_grid(p=4,M=64)"
    sub = SpaceModel.weaksep(SpaceModel.lp_seq(2.0), "subspace", stride=3)
    assert sub.model_id == "weaksep(lp_seq(p=2),subspace,stride=3)"


def test_subspace_basis_and_membership() -> None:
    """Basis vectors of a strided subspace live on multiples of the stride."""
    sub = SpaceModel.weaksep(SpaceModel.lp_seq(2.0), "subspace", stride=3)
    assert basis_vector(sub, 2).support == (6,)
    with pytest.raises(RepresentationError):
        strong_norm(sub, SparseVector.unit(4))


def test_coordinates_round_trip() -> None:
    """Dense coordinates on the first positions invert exactly."""
    model = SpaceModel.lp_seq(3.0)
    x = SparseVector.from_entries({1: 2.0, 5: -1.0})
    coords = to_coordinates(model, x, 6)
    assert coords.tolist() == [2.0, 0.0, 0.0, 0.0, -1.0, 0.0]
    assert from_coordinates(model, coords) == x
    with pytest.raises(RepresentationError):
        to_coordinates(model, x, 4)


def test_vector_json_format() -> None:
    """The vector file format for both representations."""
    sparse = SparseVector.from_entries({3: 0.5, 100: -1.0})
    assert vector_to_json(sparse) == {"kind": "sparse", "entries": [[3, 0.5], [100, -1.0]]}
    assert vector_from_json(vector_to_json(sparse)) == sparse

    grid = GridFunction.from_values([1.0, 0.0, 2.0])
    assert vector_to_json(grid) == {"kind": "grid", "M": 3, "values": [1.0, 0.0, 2.0]}
    assert vector_from_json(vector_to_json(grid)) == grid
    assert vector_from_json({"kind": "grid", "values": [1.0, 0.0, 2.0]}) == grid
    assert vector_from_json({"kind": "grid", "M": 3, "entries": [[3, 2.0], [1, 1.0]]}) == grid


@pytest.mark.parametrize(
    "payload",
    [
        {"kind": "tensor"},
        {"kind": "sparse", "entries": [[0, 1.0]]},
        {"kind": "sparse", "entries": [["a", 1.0]]},
        {"kind": "grid", "M": 3, "values": [1.0, 0.0]},
        {"kind": "grid", "M": 0, "values": []},
        {"kind": "grid", "entries": [[1, 1.0]]},
        {"kind": "grid", "M": 4, "entries": [[5, 1.0]]},
        {"kind": "grid", "M": 4, "values": [1.0] * 4, "entries": [[1, 1.0]]},
        {"kind": "grid"},
        {"kind": "sparse", "entries": [[1.5, 1.0]]},
        {"kind": "sparse", "entries": [[True, 1.0]]},
        {"kind": "sparse", "entries": [[2, 1.0], [2, -1.0]]},
        {"kind": "grid", "M": 4, "entries": [[1, 1.0], [1, 2.0]]},
    ],
)
def test_vector_json_rejects_malformed_payloads(payload: dict[str, object]) -> None:
    """Malformed payloads are representation errors."""
    with pytest.raises(RepresentationError):
        vector_from_json(payload)
