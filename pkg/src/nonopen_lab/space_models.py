"""Space models, vector representations and strong norms.

Vectors are exactly finitely supported. A ``SparseVector`` stores strictly
increasing 1-based indices with nonzero binary64 values; a ``GridFunction``
stores the cell values of a piecewise-constant function on ``[0, 1]`` with
``M`` equal cells. Every operation here is deterministic and pure.
"""

from __future__ import annotations

import math
from collections.abc import Iterable, Mapping
from dataclasses import dataclass
from enum import StrEnum
from typing import Any

import numpy as np
import numpy.typing as npt

from .errors import ConfigurationError, ParameterError, RepresentationError

FloatArray = npt.NDArray[np.float64]
IndexArray = npt.NDArray[np.int64]

FAMILIES = ("coordinate", "subspace", "neighbor", "cells")

# Relative slack for the norm-comparison inequalities, which are equalities
# on single-entry vectors.
_COMPARISON_SLACK = 1e-12


def _readonly(array: npt.NDArray[Any]) -> npt.NDArray[Any]:
    array.setflags(write=False)
    return array


def int_power(values: FloatArray, exponent: int) -> FloatArray:
    """Raise ``values`` to a non-negative integer power by repeated products."""
    result = np.ones_like(values)
    for _ in range(exponent):
        result = result * values
    return result


def abs_power(values: FloatArray, p: float) -> FloatArray:
    """Return ``|values| ** p`` using products for integer ``p``.

    Non-integer exponents go through ``exp(p * log|t|)`` with ``0`` mapped to
    ``0``.
    """
    magnitude = np.abs(values)
    if float(p).is_integer():
        return int_power(magnitude, int(p))
    out = np.zeros_like(magnitude)
    nonzero = magnitude > 0.0
    out[nonzero] = np.exp(p * np.log(magnitude[nonzero]))
    return out


def lp_norm(values: FloatArray, p: float, *, measure: float = 1.0) -> float:
    """Return ``(measure * sum |v|^p) ** (1/p)``, or ``max |v|`` for ``p = inf``."""
    if values.size == 0:
        return 0.0
    magnitude = np.abs(values)
    largest = float(np.max(magnitude))
    if math.isinf(p) or largest == 0.0:
        return largest
    # Scaled by the largest entry so |v|^p neither underflows nor overflows.
    total = float(np.sum(abs_power(magnitude / largest, p))) * measure
    if p == 1.0:
        return largest * total
    if p == 2.0:
        return largest * math.sqrt(total)
    return largest * math.pow(total, 1.0 / p)


def conjugate_exponent(p: float) -> float:
    """Return the Hoelder conjugate ``p'`` with ``1/p + 1/p' = 1``."""
    if p == 1.0:
        return math.inf
    if math.isinf(p):
        return 1.0
    return p / (p - 1.0)


@dataclass(frozen=True, eq=False, slots=True)
class SparseVector:
    """A finitely supported real sequence.

    Attributes:
        indices: Strictly increasing 1-based indices (read-only ``int64``).
        values: Nonzero entries aligned with ``indices`` (read-only ``float64``).
    """

    indices: IndexArray
    values: FloatArray

    def __post_init__(self) -> None:
        if self.indices.ndim != 1 or self.indices.shape != self.values.shape:
            raise RepresentationError("indices and values must be aligned 1-D arrays")
        if self.indices.size:
            if int(self.indices[0]) < 1:
                raise RepresentationError("sequence indices are 1-based")
            if np.any(np.diff(self.indices) <= 0):
                raise RepresentationError("indices must be strictly increasing")
            if np.any(self.values == 0.0):
                raise RepresentationError("stored values must be nonzero")
            if not np.all(np.isfinite(self.values)):
                raise RepresentationError("stored values must be finite")

    @classmethod
    def from_arrays(
        cls, indices: npt.ArrayLike, values: npt.ArrayLike
    ) -> SparseVector:
        """Build a canonical vector, summing duplicates and dropping zeros."""
        idx = np.asarray(indices, dtype=np.int64).reshape(-1)
        vals = np.asarray(values, dtype=np.float64).reshape(-1)
        if idx.shape != vals.shape:
            raise RepresentationError("indices and values must have equal length")
        if idx.size and int(idx.min()) < 1:
            raise RepresentationError("sequence indices are 1-based")
        unique, inverse = np.unique(idx, return_inverse=True)
        summed = np.zeros(unique.size, dtype=np.float64)
        np.add.at(summed, inverse, vals)
        keep = summed != 0.0
        return cls(_readonly(unique[keep]), _readonly(summed[keep]))

    @classmethod
    def from_entries(
        cls, entries: Mapping[int, float] | Iterable[tuple[int, float]]
    ) -> SparseVector:
        """Build a vector from ``{index: value}`` or ``(index, value)`` pairs."""
        pairs = list(entries.items() if isinstance(entries, Mapping) else entries)
        if not pairs:
            return cls.zero()
        idx, vals = zip(*pairs, strict=True)
        return cls.from_arrays(idx, vals)

    @classmethod
    def zero(cls) -> SparseVector:
        """Return the empty vector."""
        return cls(
            _readonly(np.zeros(0, dtype=np.int64)),
            _readonly(np.zeros(0, dtype=np.float64)),
        )

    @classmethod
    def unit(cls, index: int, value: float = 1.0) -> SparseVector:
        """Return ``value * e_index``."""
        return cls.from_arrays([index], [value])

    @property
    def is_zero(self) -> bool:
        return self.indices.size == 0

    @property
    def nnz(self) -> int:
        return int(self.indices.size)

    @property
    def max_index(self) -> int:
        """Largest stored index, ``0`` for the zero vector."""
        return int(self.indices[-1]) if self.indices.size else 0

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(int(i) for i in self.indices)

    def get(self, index: int) -> float:
        pos = int(np.searchsorted(self.indices, index))
        if pos < self.indices.size and int(self.indices[pos]) == index:
            return float(self.values[pos])
        return 0.0

    def lookup(self, indices: IndexArray) -> FloatArray:
        """Return the entries at ``indices`` (zero where not stored)."""
        out = np.zeros(indices.shape, dtype=np.float64)
        if self.indices.size == 0 or indices.size == 0:
            return out
        pos = np.searchsorted(self.indices, indices)
        clipped = np.minimum(pos, self.indices.size - 1)
        hit = self.indices[clipped] == indices
        out[hit] = self.values[clipped[hit]]
        return out

    def entries(self) -> list[tuple[int, float]]:
        return [(int(i), float(v)) for i, v in zip(self.indices, self.values, strict=True)]

    def scaled(self, factor: float) -> SparseVector:
        vals = self.values * float(factor)
        keep = vals != 0.0
        return SparseVector(_readonly(self.indices[keep]), _readonly(vals[keep]))

    def abs(self) -> SparseVector:
        return SparseVector(self.indices, _readonly(np.abs(self.values)))

    def dot(self, other: SparseVector) -> float:
        if not isinstance(other, SparseVector):
            raise RepresentationError("cannot pair a sequence with a grid function")
        _, left, right = np.intersect1d(
            self.indices, other.indices, assume_unique=True, return_indices=True
        )
        return float(np.sum(self.values[left] * other.values[right]))

    def __add__(self, other: object) -> SparseVector:
        if not isinstance(other, SparseVector):
            return NotImplemented
        return SparseVector.from_arrays(
            np.concatenate([self.indices, other.indices]),
            np.concatenate([self.values, other.values]),
        )

    def __sub__(self, other: object) -> SparseVector:
        if not isinstance(other, SparseVector):
            return NotImplemented
        return self + (-other)

    def __neg__(self) -> SparseVector:
        return SparseVector(self.indices, _readonly(-self.values))

    def __mul__(self, factor: float) -> SparseVector:
        return self.scaled(factor)

    __rmul__ = __mul__

    def __truediv__(self, divisor: float) -> SparseVector:
        return self.scaled(1.0 / float(divisor))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SparseVector):
            return NotImplemented
        return bool(
            np.array_equal(self.indices, other.indices)
            and np.array_equal(self.values, other.values)
        )

    __hash__ = None  # type: ignore[assignment]

    def __repr__(self) -> str:
        return f"SparseVector({dict(self.entries())!r})"


@dataclass(frozen=True, eq=False, slots=True)
class GridFunction:
    """A piecewise-constant function on ``M`` equal cells of ``[0, 1]``."""

    values: FloatArray

    def __post_init__(self) -> None:
        if self.values.ndim != 1 or self.values.size < 1:
            raise RepresentationError("a grid function needs at least one cell")
        if not np.all(np.isfinite(self.values)):
            raise RepresentationError("cell values must be finite")

    @classmethod
    def from_values(cls, values: npt.ArrayLike) -> GridFunction:
        arr = np.array(values, dtype=np.float64).reshape(-1)
        return cls(_readonly(arr))

    @classmethod
    def zero(cls, cells: int) -> GridFunction:
        return cls.from_values(np.zeros(cells))

    @classmethod
    def unit(cls, cells: int, cell: int, value: float = 1.0) -> GridFunction:
        """Return ``value`` times the indicator of the 1-based ``cell``."""
        if not 1 <= cell <= cells:
            raise RepresentationError(f"cell {cell} outside 1..{cells}")
        arr = np.zeros(cells)
        arr[cell - 1] = value
        return cls.from_values(arr)

    @property
    def cells(self) -> int:
        return int(self.values.size)

    @property
    def is_zero(self) -> bool:
        return not bool(np.any(self.values != 0.0))

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(int(i) + 1 for i in np.flatnonzero(self.values))

    @property
    def max_index(self) -> int:
        nonzero = np.flatnonzero(self.values)
        return int(nonzero[-1]) + 1 if nonzero.size else 0

    def _check(self, other: object) -> GridFunction:
        if not isinstance(other, GridFunction):
            raise RepresentationError("cannot combine a grid function with a sequence")
        if other.cells != self.cells:
            raise RepresentationError(
                f"cell counts differ: {self.cells} != {other.cells}"
            )
        return other

    def scaled(self, factor: float) -> GridFunction:
        return GridFunction.from_values(self.values * float(factor))

    def abs(self) -> GridFunction:
        return GridFunction.from_values(np.abs(self.values))

    def dot(self, other: GridFunction) -> float:
        """Coefficient pairing ``sum_i f_i g_i`` (no cell measure)."""
        other = self._check(other)
        return float(np.sum(self.values * other.values))

    def __add__(self, other: object) -> GridFunction:
        if not isinstance(other, GridFunction):
            return NotImplemented
        other = self._check(other)
        return GridFunction.from_values(self.values + other.values)

    def __sub__(self, other: object) -> GridFunction:
        if not isinstance(other, GridFunction):
            return NotImplemented
        other = self._check(other)
        return GridFunction.from_values(self.values - other.values)

    def __neg__(self) -> GridFunction:
        return GridFunction.from_values(-self.values)

    def __mul__(self, factor: float) -> GridFunction:
        return self.scaled(factor)

    __rmul__ = __mul__

    def __truediv__(self, divisor: float) -> GridFunction:
        return self.scaled(1.0 / float(divisor))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, GridFunction):
            return NotImplemented
        return bool(np.array_equal(self.values, other.values))

    __hash__ = None  # type: ignore[assignment]


Vector = SparseVector | GridFunction


class ModelKind(StrEnum):
    """Supported Banach-space models."""

    L2_WEIGHTED = "l2_weighted"
    LP_SEQ = "lp_seq"
    LINF_DYADIC = "linf_dyadic"
    C0_DYADIC = "c0_dyadic"
    LP_GRID = "lp_grid"
    WEAKSEP = "weaksep"


_SEQUENCE_KINDS = frozenset(
    {ModelKind.L2_WEIGHTED, ModelKind.LP_SEQ, ModelKind.LINF_DYADIC, ModelKind.C0_DYADIC}
)


@dataclass(frozen=True, slots=True)
class SpaceModel:
    """A Banach space together with the representation of its vectors.

    Use the classmethod constructors rather than the raw initializer.

    Attributes:
        kind: Which model this is.
        p: Exponent for ``lp_seq`` and ``lp_grid``.
        cells: Number of grid cells for ``lp_grid``.
        host: Underlying model for ``weaksep``.
        family: Separating family name for ``weaksep``.
        stride: Index stride of the closed subspace for the ``subspace`` family.
        comparison_constant: Constant ``C`` with ``weak <= C * strong``.
    """

    kind: ModelKind
    p: float | None = None
    cells: int | None = None
    host: SpaceModel | None = None
    family: str | None = None
    stride: int = 1
    comparison_constant: float = 1.0

    def __post_init__(self) -> None:
        try:
            kind = ModelKind(self.kind)
        except ValueError as exc:
            raise ConfigurationError(f"unknown model {self.kind!r}") from exc
        object.__setattr__(self, "kind", kind)
        if kind in {ModelKind.LP_SEQ, ModelKind.LP_GRID}:
            if self.p is None or not math.isfinite(self.p) or self.p < 1.0:
                raise ConfigurationError(f"{kind} requires a finite exponent p >= 1")
        if kind is ModelKind.LP_GRID and (self.cells is None or self.cells < 1):
            raise ConfigurationError("lp_grid requires cells >= 1")
        if kind is ModelKind.WEAKSEP:
            self._check_weaksep()
        elif self.stride != 1:
            raise ConfigurationError("stride only applies to the subspace family")
        if not self.comparison_constant > 0.0:
            raise ConfigurationError("comparison constant must be positive")

    def _check_weaksep(self) -> None:
        host = self.host
        if host is None or host.kind is ModelKind.WEAKSEP:
            raise ConfigurationError("weaksep needs a non-weaksep host model")
        if self.family not in FAMILIES:
            raise ConfigurationError(
                f"unknown family {self.family!r}; choose one of {', '.join(FAMILIES)}"
            )
        if self.stride < 1:
            raise ConfigurationError("stride must be >= 1")
        if self.family in {"coordinate", "subspace"} and not host.is_sequence:
            raise ConfigurationError(f"{self.family} family needs a sequence host")
        if self.family == "neighbor" and host.kind is ModelKind.LINF_DYADIC:
            raise ConfigurationError("neighbor family needs a separable host")
        if self.family == "neighbor" and not host.is_sequence:
            raise ConfigurationError("neighbor family needs a sequence host")
        if self.family == "cells" and host.kind is not ModelKind.LP_GRID:
            raise ConfigurationError("cells family needs an lp_grid host")
        if self.family != "subspace" and self.stride != 1:
            raise ConfigurationError("stride only applies to the subspace family")

    @classmethod
    def l2_weighted(cls) -> SpaceModel:
        return cls(ModelKind.L2_WEIGHTED)

    @classmethod
    def lp_seq(cls, p: float) -> SpaceModel:
        return cls(ModelKind.LP_SEQ, p=float(p))

    @classmethod
    def linf_dyadic(cls) -> SpaceModel:
        return cls(ModelKind.LINF_DYADIC)

    @classmethod
    def c0_dyadic(cls) -> SpaceModel:
        return cls(ModelKind.C0_DYADIC)

    @classmethod
    def lp_grid(cls, p: float, cells: int) -> SpaceModel:
        return cls(ModelKind.LP_GRID, p=float(p), cells=int(cells))

    @classmethod
    def weaksep(
        cls, host: SpaceModel, family: str, *, stride: int = 1
    ) -> SpaceModel:
        return cls(ModelKind.WEAKSEP, host=host, family=family, stride=stride)

    @property
    def base(self) -> SpaceModel:
        """The model whose strong norm and representation apply."""
        return self.host if self.host is not None else self

    @property
    def is_sequence(self) -> bool:
        return self.base.kind in _SEQUENCE_KINDS

    @property
    def exponent(self) -> float:
        """Exponent of the strong norm (``inf`` for the dyadic models)."""
        base = self.base
        if base.kind is ModelKind.L2_WEIGHTED:
            return 2.0
        if base.kind in {ModelKind.LINF_DYADIC, ModelKind.C0_DYADIC}:
            return math.inf
        assert base.p is not None
        return base.p

    @property
    def stride_step(self) -> int:
        """Index step between consecutive basis vectors."""
        return self.stride if self.family == "subspace" else 1

    @property
    def model_id(self) -> str:
        kind = ModelKind(self.kind)
        if kind is ModelKind.LP_SEQ:
            return f"lp_seq(p={_fmt(self.p)})"
        if kind is ModelKind.LP_GRID:
            return f"lp_grid(p={_fmt(self.p)},M={self.cells})"
        if kind is ModelKind.WEAKSEP:
            assert self.host is not None
            extra = f",stride={self.stride}" if self.family == "subspace" else ""
            return f"weaksep({self.host.model_id},{self.family}{extra})"
        return kind.value


def _fmt(value: float | None) -> str:
    if value is None:
        return "none"
    return str(int(value)) if float(value).is_integer() else repr(float(value))


def check_representation(model: SpaceModel, x: object) -> Vector:
    """Return ``x`` if it is a valid vector of ``model``.

    Raises:
        RepresentationError: Wrong representation, wrong cell count, or an
            index outside a strided subspace.
    """
    base = model.base
    if model.is_sequence:
        if not isinstance(x, SparseVector):
            raise RepresentationError(f"{model.model_id} expects a sparse sequence")
        step = model.stride_step
        if step > 1 and np.any(x.indices % step != 0):
            raise RepresentationError(
                f"vector leaves the subspace of multiples of {step}"
            )
        return x
    if not isinstance(x, GridFunction):
        raise RepresentationError(f"{model.model_id} expects a grid function")
    if x.cells != base.cells:
        raise RepresentationError(f"expected {base.cells} cells, got {x.cells}")
    return x


def strong_norm(model: SpaceModel, x: Vector) -> float:
    """Return the norm of ``x`` in the Banach space of ``model``."""
    check_representation(model, x)
    base = model.base
    if isinstance(x, GridFunction):
        assert base.p is not None and base.cells is not None
        return lp_norm(x.values, base.p, measure=1.0 / base.cells)
    return lp_norm(x.values, model.exponent)


def coefficient_norms(model: SpaceModel, rows: FloatArray) -> FloatArray:
    """Strong norms of each row of a coefficient matrix (one vector per row)."""
    p = model.exponent
    if math.isinf(p):
        return np.max(np.abs(rows), axis=1)
    measure = 1.0 if model.is_sequence else 1.0 / float(model.base.cells or 1)
    totals = np.sum(abs_power(rows, p), axis=1) * measure
    return np.power(totals, 1.0 / p)


def norm_comparison_check(
    model: SpaceModel, p1: float, p2: float, x: Vector
) -> tuple[float, float, bool]:
    """Check the monotonicity of ``l^p`` and ``L^p`` norms in ``p``.

    For sequences the ``l^{p2}`` norm is bounded by the ``l^{p1}`` norm; on the
    probability grid the ``L^{p1}`` norm is bounded by the ``L^{p2}`` norm.

    Returns:
        ``(smaller, larger, holds)`` where for sequences ``smaller`` is the
        ``p2`` norm and for grid functions it is the ``p1`` norm.
    """
    if not 1.0 <= p1 < p2:
        raise ParameterError(f"need 1 <= p1 < p2, got p1={p1}, p2={p2}")
    if isinstance(x, GridFunction):
        measure = 1.0 / x.cells
        smaller = lp_norm(x.values, p1, measure=measure)
        larger = lp_norm(x.values, p2, measure=measure)
    elif isinstance(x, SparseVector):
        smaller = lp_norm(x.values, p2)
        larger = lp_norm(x.values, p1)
    else:
        raise RepresentationError(f"unsupported vector type {type(x).__name__}")
    if not model.is_sequence and not isinstance(x, GridFunction):
        raise RepresentationError(f"{model.model_id} expects a grid function")
    holds = smaller <= larger * (1.0 + _COMPARISON_SLACK)
    return smaller, larger, holds


def zero_vector(model: SpaceModel) -> Vector:
    if model.is_sequence:
        return SparseVector.zero()
    assert model.base.cells is not None
    return GridFunction.zero(model.base.cells)


def basis_vector(model: SpaceModel, position: int, value: float = 1.0) -> Vector:
    """Return the ``position``-th basis vector of the model (1-based)."""
    if position < 1:
        raise RepresentationError("basis positions are 1-based")
    if model.is_sequence:
        return SparseVector.unit(position * model.stride_step, value)
    assert model.base.cells is not None
    return GridFunction.unit(model.base.cells, position, value)


def support_positions(model: SpaceModel, x: Vector) -> IndexArray:
    """1-based basis positions carrying nonzero entries of ``x``."""
    check_representation(model, x)
    if isinstance(x, SparseVector):
        return x.indices // model.stride_step
    return np.flatnonzero(x.values).astype(np.int64) + 1


def to_coordinates(model: SpaceModel, x: Vector, dim: int) -> FloatArray:
    """Dense coordinates of ``x`` in the first ``dim`` basis positions."""
    positions = support_positions(model, x)
    values = x.values if isinstance(x, SparseVector) else x.values[positions - 1]
    if positions.size and int(positions.max()) > dim:
        raise RepresentationError(f"vector extends beyond the first {dim} positions")
    out = np.zeros(dim)
    out[positions - 1] = values
    return out


def from_coordinates(model: SpaceModel, coords: npt.ArrayLike) -> Vector:
    """Inverse of :func:`to_coordinates`."""
    arr = np.asarray(coords, dtype=np.float64).reshape(-1)
    if model.is_sequence:
        positions = np.arange(1, arr.size + 1, dtype=np.int64)
        return SparseVector.from_arrays(positions * model.stride_step, arr)
    cells = model.base.cells
    assert cells is not None
    if arr.size > cells:
        raise RepresentationError(f"more than {cells} coordinates for the grid")
    padded = np.zeros(cells)
    padded[: arr.size] = arr
    return GridFunction.from_values(padded)


def vector_to_json(x: Vector) -> dict[str, Any]:
    """Serialize a vector to a JSON-compatible mapping."""
    if isinstance(x, GridFunction):
        return {"kind": "grid", "M": x.cells, "values": [float(v) for v in x.values]}
    return {"kind": "sparse", "entries": [[i, v] for i, v in x.entries()]}


def _json_int(raw: Any, what: str) -> int:
    if isinstance(raw, bool) or not isinstance(raw, int):
        raise RepresentationError(f"{what} must be an integer, got {raw!r}")
    return raw


def _json_entries(raw: Any) -> tuple[list[int], list[float]]:
    indices: list[int] = []
    values: list[float] = []
    for entry in raw:
        index, value = entry
        indices.append(_json_int(index, "index"))
        values.append(float(value))
    if len(set(indices)) != len(indices):
        raise RepresentationError("duplicate index in entries")
    return indices, values


def _grid_from_json(data: Mapping[str, Any]) -> GridFunction:
    cells = _json_int(data["M"], "M") if "M" in data else None
    if cells is not None and cells < 1:
        raise RepresentationError(f"M must be >= 1, got {cells}")
    if ("values" in data) == ("entries" in data):
        raise RepresentationError("a grid payload needs exactly one of values or entries")
    if "values" in data:
        grid = GridFunction.from_values(data["values"])
        if cells is not None and cells != grid.cells:
            raise RepresentationError(f"M = {cells} but {grid.cells} values were given")
        return grid
    if cells is None:
        raise RepresentationError("a grid given by entries needs M")
    indices, values = _json_entries(data["entries"])
    padded = np.zeros(cells)
    for index, value in zip(indices, values, strict=True):
        if not 1 <= index <= cells:
            raise RepresentationError(f"cell {index} outside 1..{cells}")
        padded[index - 1] = value
    return GridFunction.from_values(padded)


def vector_from_json(data: Mapping[str, Any]) -> Vector:
    """Parse a vector file payload.

    Sequences are ``{"kind": "sparse", "entries": [[index, value], ...]}``.
    Grids are ``{"kind": "grid", "M": cells, "values": [...]}`` or the same
    with ``entries`` in place of ``values``. Indices are 1-based integers and
    may not repeat.

    Raises:
        RepresentationError: Unknown kind or malformed payload.
    """
    kind = data.get("kind", "sparse")
    try:
        if kind == "sparse":
            return SparseVector.from_arrays(*_json_entries(data.get("entries", [])))
        if kind == "grid":
            return _grid_from_json(data)
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, RepresentationError):
            raise
        raise RepresentationError(f"malformed vector payload: {exc}") from exc
    raise RepresentationError(f"unknown vector kind {kind!r}")
