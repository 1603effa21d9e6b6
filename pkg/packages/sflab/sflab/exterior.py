"""Graded exterior algebra of complex-matrix-valued differential forms.

A form is stored densely per grid node: each strictly increasing multi-index
(0-based axis labels) maps to an array of shape ``chart.shape + (N, N)``.
Absent multi-indices are zero. Everything is complex, even real forms, since
every characteristic form carries powers of 1/(2πi).
"""

from __future__ import annotations

import math
from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field
from itertools import combinations
from types import MappingProxyType

import numpy as np
from loguru import logger
from scipy import fft as sfft
from scipy.integrate import simpson

from sflab.errors import ChartMismatchError, GradeError, InsufficientSamplesError, RankMismatchError

MultiIndex = tuple[int, ...]

# 4th-order one-sided stencils (times 1/(12h)) for the first two nodes of a closed interval
_EDGE_STENCIL_0 = np.array([-25.0, 48.0, -36.0, 16.0, -3.0])
_EDGE_STENCIL_1 = np.array([-3.0, -10.0, 18.0, -6.0, 1.0])


@dataclass(frozen=True)
class Axis:
    count: int
    spacing: float
    periodic: bool = True
    origin: float = 0.0

    def __post_init__(self) -> None:
        if self.count < 1:
            raise InsufficientSamplesError(f"axis needs at least one sample, got {self.count}")
        if not self.spacing > 0:
            raise ValueError(f"axis spacing must be positive, got {self.spacing}")

    @classmethod
    def circle(cls, count: int, period: float = 2 * math.pi, origin: float = 0.0) -> Axis:
        return cls(count=count, spacing=period / count, periodic=True, origin=origin)

    @classmethod
    def interval(cls, count: int, start: float, stop: float) -> Axis:
        if count < 2:
            raise InsufficientSamplesError("a closed interval axis needs at least two samples")
        return cls(count=count, spacing=(stop - start) / (count - 1), periodic=False, origin=start)

    @property
    def length(self) -> float:
        return self.count * self.spacing if self.periodic else (self.count - 1) * self.spacing

    def samples(self) -> np.ndarray:
        return self.origin + self.spacing * np.arange(self.count)


@dataclass(frozen=True, eq=False)
class Chart:
    """A rectangular coordinate grid; periodic axes close up into circles."""

    axes: tuple[Axis, ...]
    orientation: int = 1
    volume_weight: np.ndarray | None = None

    def __post_init__(self) -> None:
        if not self.axes:
            raise ValueError("chart needs at least one axis")
        if self.orientation not in (1, -1):
            raise ValueError(f"orientation must be +1 or -1, got {self.orientation}")
        if self.volume_weight is not None:
            weight = np.broadcast_to(np.asarray(self.volume_weight, dtype=float), self.shape)
            object.__setattr__(self, "volume_weight", weight)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Chart):
            return NotImplemented
        return self.axes == other.axes and self.orientation == other.orientation

    def __hash__(self) -> int:
        return hash((self.axes, self.orientation))

    @classmethod
    def torus(cls, dim: int, nodes: int, period: float = 2 * math.pi) -> Chart:
        return cls(axes=tuple(Axis.circle(nodes, period) for _ in range(dim)))

    @classmethod
    def circle(cls, nodes: int, radius: float = 1.0) -> Chart:
        """Angle chart of a circle of the given radius; the weight is the arclength factor."""
        return cls(axes=(Axis.circle(nodes),), volume_weight=np.full((nodes,), float(radius)))

    @classmethod
    def point(cls, dim: int) -> Chart:
        """A single node: pointwise algebra without differentiation."""
        return cls(axes=tuple(Axis(count=1, spacing=1.0) for _ in range(dim)))

    @property
    def dim(self) -> int:
        return len(self.axes)

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(ax.count for ax in self.axes)

    @property
    def weight(self) -> np.ndarray:
        if self.volume_weight is None:
            return np.ones(self.shape)
        return self.volume_weight

    def points(self) -> np.ndarray:
        """Node coordinates, shape ``shape + (dim,)``."""
        grids = np.meshgrid(*(ax.samples() for ax in self.axes), indexing="ij")
        return np.stack(grids, axis=-1)

    def coordinate(self, axis: int) -> np.ndarray:
        return self.points()[..., axis]

    def extend(self, axis: Axis) -> Chart:
        """Product chart with one more axis appended (the cylinder M × [a, b])."""
        weight = None
        if self.volume_weight is not None:
            weight = np.repeat(self.volume_weight[..., None], axis.count, axis=-1)
        return Chart(axes=(*self.axes, axis), orientation=self.orientation, volume_weight=weight)

    def volume_form(self) -> GradedMatrixForm:
        top = tuple(range(self.dim))
        return GradedMatrixForm.scalar(self, self.weight, top)

    def volume(self) -> float:
        return integrate_top(self.volume_form()).value.real


def _check_index(index: Iterable[int], dim: int) -> MultiIndex:
    idx = tuple(int(i) for i in index)
    if any(b <= a for a, b in zip(idx, idx[1:])):
        raise ValueError(f"multi-index must be strictly increasing, got {idx}")
    if idx and (idx[0] < 0 or idx[-1] >= dim):
        raise ValueError(f"multi-index {idx} out of range for dimension {dim}")
    return idx


@dataclass(frozen=True, eq=False)
class GradedMatrixForm:
    chart: Chart
    rank: int
    components: Mapping[MultiIndex, np.ndarray] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.rank < 1:
            raise ValueError(f"rank must be at least 1, got {self.rank}")
        expected = self.chart.shape + (self.rank, self.rank)
        frozen: dict[MultiIndex, np.ndarray] = {}
        for index, values in self.components.items():
            idx = _check_index(index, self.chart.dim)
            arr = np.asarray(values, dtype=complex)
            if arr.shape != expected:
                arr = np.broadcast_to(arr, expected)
            arr = np.array(arr, dtype=complex)
            arr.flags.writeable = False
            frozen[idx] = arr
        object.__setattr__(self, "components", MappingProxyType(frozen))

    # ── Constructors ─────────────────────────────────

    @classmethod
    def zero(cls, chart: Chart, rank: int = 1) -> GradedMatrixForm:
        return cls(chart, rank, {})

    @classmethod
    def identity(cls, chart: Chart, rank: int = 1) -> GradedMatrixForm:
        return cls(chart, rank, {(): np.eye(rank, dtype=complex)})

    @classmethod
    def constant(cls, chart: Chart, matrix: np.ndarray, index: Iterable[int] = ()) -> GradedMatrixForm:
        matrix = np.atleast_2d(np.asarray(matrix, dtype=complex))
        return cls(chart, matrix.shape[-1], {tuple(index): matrix})

    @classmethod
    def scalar(cls, chart: Chart, values: np.ndarray | complex, index: Iterable[int] = ()) -> ScalarForm:
        arr = np.broadcast_to(np.asarray(values, dtype=complex), chart.shape)
        return cls(chart, 1, {tuple(index): arr[..., None, None]})

    @classmethod
    def from_one_form(cls, chart: Chart, coefficients: np.ndarray) -> GradedMatrixForm:
        """Build from components of shape ``chart.shape + (dim, N, N)``."""
        coefficients = np.asarray(coefficients, dtype=complex)
        rank = coefficients.shape[-1]
        return cls(chart, rank, {(j,): coefficients[..., j, :, :] for j in range(chart.dim)})

    @classmethod
    def from_two_form(cls, chart: Chart, tensor: np.ndarray) -> GradedMatrixForm:
        """Build from an antisymmetric tensor of shape ``chart.shape + (dim, dim, N, N)``."""
        tensor = np.asarray(tensor, dtype=complex)
        rank = tensor.shape[-1]
        comps = {(i, j): tensor[..., i, j, :, :] for i, j in combinations(range(chart.dim), 2)}
        return cls(chart, rank, comps)

    @classmethod
    def differential(cls, chart: Chart, axis: int, rank: int = 1) -> GradedMatrixForm:
        """The coordinate 1-form dx_axis times the identity."""
        return cls(chart, rank, {(axis,): np.eye(rank, dtype=complex)})

    # ── Access ───────────────────────────────────────

    @property
    def grades(self) -> set[int]:
        return {len(idx) for idx in self.components}

    def component(self, index: Iterable[int]) -> np.ndarray:
        idx = _check_index(index, self.chart.dim)
        if idx in self.components:
            return self.components[idx]
        return np.zeros(self.chart.shape + (self.rank, self.rank), dtype=complex)

    def values(self, index: Iterable[int] = ()) -> np.ndarray:
        """Scalar coefficient array of a rank-1 form."""
        if self.rank != 1:
            raise RankMismatchError(f"values() needs a scalar form, got rank {self.rank}")
        return self.component(index)[..., 0, 0]

    def grade(self, p: int) -> GradedMatrixForm:
        return GradedMatrixForm(self.chart, self.rank, {i: c for i, c in self.components.items() if len(i) == p})

    def one_form_coefficients(self) -> np.ndarray:
        """Inverse of :meth:`from_one_form`."""
        return np.stack([self.component((j,)) for j in range(self.chart.dim)], axis=-3)

    def max_abs(self) -> float:
        if not self.components:
            return 0.0
        return max(float(np.max(np.abs(c))) for c in self.components.values())

    def adjoint(self) -> GradedMatrixForm:
        return GradedMatrixForm(
            self.chart, self.rank, {i: np.conj(np.swapaxes(c, -1, -2)) for i, c in self.components.items()}
        )

    def promote(self, rank: int) -> GradedMatrixForm:
        """Tensor a scalar form with the rank-N identity."""
        if self.rank != 1:
            raise RankMismatchError(f"only scalar forms can be promoted, got rank {self.rank}")
        eye = np.eye(rank, dtype=complex)
        return GradedMatrixForm(self.chart, rank, {i: c[..., 0:1, 0:1] * eye for i, c in self.components.items()})

    # ── Linear structure ─────────────────────────────

    def _combine(self, other: GradedMatrixForm, sign: float) -> GradedMatrixForm:
        _check_compatible(self, other)
        comps = dict(self.components)
        for idx, c in other.components.items():
            comps[idx] = comps[idx] + sign * c if idx in comps else sign * c
        return GradedMatrixForm(self.chart, self.rank, comps)

    def __add__(self, other: GradedMatrixForm) -> GradedMatrixForm:
        return self._combine(other, 1.0)

    def __sub__(self, other: GradedMatrixForm) -> GradedMatrixForm:
        return self._combine(other, -1.0)

    def __neg__(self) -> GradedMatrixForm:
        return self * -1.0

    def __mul__(self, factor: complex | np.ndarray) -> GradedMatrixForm:
        """Multiply by a constant or by a function sampled on the grid."""
        if np.ndim(factor) == 0:
            scale = complex(factor)
            return GradedMatrixForm(self.chart, self.rank, {i: scale * c for i, c in self.components.items()})
        fn = np.broadcast_to(np.asarray(factor, dtype=complex), self.chart.shape)[..., None, None]
        return GradedMatrixForm(self.chart, self.rank, {i: fn * c for i, c in self.components.items()})

    __rmul__ = __mul__


ScalarForm = GradedMatrixForm
"""A rank-1 :class:`GradedMatrixForm`."""


@dataclass(frozen=True)
class CharPowerSeries:
    """Real power series q(x) = Σ c_k x^k, kept to finitely many terms."""

    coefficients: tuple[float, ...]

    @classmethod
    def exp(cls, order: int = 8) -> CharPowerSeries:
        return cls(tuple(1.0 / math.factorial(k) for k in range(order + 1)))

    @classmethod
    def monomial(cls, degree: int) -> CharPowerSeries:
        return cls(tuple(1.0 if k == degree else 0.0 for k in range(degree + 1)))

    def coefficient(self, k: int) -> float:
        return self.coefficients[k] if k < len(self.coefficients) else 0.0

    def derivative(self) -> CharPowerSeries:
        return CharPowerSeries(tuple(k * c for k, c in enumerate(self.coefficients) if k > 0) or (0.0,))

    def truncated(self, dim: int) -> CharPowerSeries:
        return CharPowerSeries(self.coefficients[: dim // 2 + 1])


@dataclass(frozen=True)
class TopIntegral:
    value: complex
    missing_top: bool = False

    def __complex__(self) -> complex:
        return self.value


def _check_compatible(a: GradedMatrixForm, b: GradedMatrixForm) -> None:
    if a.chart != b.chart:
        raise ChartMismatchError("forms live on different charts")
    if a.rank != b.rank:
        raise RankMismatchError(f"rank {a.rank} does not match rank {b.rank}")


def _shuffle_sign(left: MultiIndex, right: MultiIndex) -> int:
    inversions = sum(1 for i in left for j in right if i > j)
    return -1 if inversions % 2 else 1


def wedge(a: GradedMatrixForm, b: GradedMatrixForm) -> GradedMatrixForm:
    """Wedge product; matrix entries multiply in the order a·b."""
    _check_compatible(a, b)
    comps: dict[MultiIndex, np.ndarray] = {}
    for left, ca in a.components.items():
        for right, cb in b.components.items():
            if set(left) & set(right):
                continue
            index = tuple(sorted(left + right))
            term = _shuffle_sign(left, right) * np.matmul(ca, cb)
            comps[index] = comps[index] + term if index in comps else term
    return GradedMatrixForm(a.chart, a.rank, comps)


def wedge_power(a: GradedMatrixForm, k: int) -> GradedMatrixForm:
    result = GradedMatrixForm.identity(a.chart, a.rank)
    for _ in range(k):
        result = wedge(result, a)
    return result


def mat_trace(a: GradedMatrixForm) -> ScalarForm:
    comps = {i: np.trace(c, axis1=-2, axis2=-1)[..., None, None] for i, c in a.components.items()}
    return GradedMatrixForm(a.chart, 1, comps)


def apply_series(q: CharPowerSeries, a: GradedMatrixForm) -> GradedMatrixForm:
    """Evaluate q(a) for a nilpotent even form; powers above the chart dimension vanish."""
    for index, c in a.components.items():
        p = len(index)
        if (p == 0 or p % 2) and np.any(c != 0):
            raise GradeError(f"apply_series needs even grades of positive degree, found grade {p}")
    dim = a.chart.dim
    result = GradedMatrixForm.identity(a.chart, a.rank) * q.coefficient(0)
    power = GradedMatrixForm.identity(a.chart, a.rank)
    for k in range(1, dim // 2 + 1):
        power = wedge(power, a)
        if q.coefficient(k):
            result = result + power * q.coefficient(k)
    return result


def partial(values: np.ndarray, chart: Chart, axis: int, scheme: str = "central4") -> np.ndarray:
    """Derivative along one chart axis of an array whose leading dims are the grid."""
    ax = chart.axes[axis]
    n, h = ax.count, ax.spacing
    if ax.periodic:
        if n < 4:
            raise InsufficientSamplesError(f"periodic axis {axis} has {n} samples, need at least 4")
        if scheme == "spectral":
            wavenumbers = 2 * math.pi * sfft.fftfreq(n, d=h)
            if n % 2 == 0:
                wavenumbers[n // 2] = 0.0
            shape = [1] * values.ndim
            shape[axis] = n
            return sfft.ifft(1j * wavenumbers.reshape(shape) * sfft.fft(values, axis=axis), axis=axis)
        return (
            -np.roll(values, -2, axis) + 8 * np.roll(values, -1, axis) - 8 * np.roll(values, 1, axis)
            + np.roll(values, 2, axis)
        ) / (12 * h)
    if n < 5:
        raise InsufficientSamplesError(f"interval axis {axis} has {n} samples, need at least 5")
    f = np.moveaxis(values, axis, 0)
    out = np.empty_like(f, dtype=complex)
    out[2:-2] = (-f[4:] + 8 * f[3:-1] - 8 * f[1:-3] + f[:-4]) / (12 * h)
    head = f[:5]
    tail = f[-5:][::-1]
    out[0] = np.tensordot(_EDGE_STENCIL_0, head, axes=1) / (12 * h)
    out[1] = np.tensordot(_EDGE_STENCIL_1, head, axes=1) / (12 * h)
    out[-1] = -np.tensordot(_EDGE_STENCIL_0, tail, axes=1) / (12 * h)
    out[-2] = -np.tensordot(_EDGE_STENCIL_1, tail, axes=1) / (12 * h)
    return np.moveaxis(out, 0, axis)


def d(a: GradedMatrixForm, scheme: str = "central4", axes: Iterable[int] | None = None) -> GradedMatrixForm:
    """Exterior derivative, grade p to p + 1; ``axes`` restricts the differentiation directions."""
    directions = range(a.chart.dim) if axes is None else sorted(axes)
    comps: dict[MultiIndex, np.ndarray] = {}
    for index, c in a.components.items():
        for j in directions:
            if j in index:
                continue
            sign = -1 if sum(1 for i in index if i < j) % 2 else 1
            target = tuple(sorted((*index, j)))
            term = sign * partial(c, a.chart, j, scheme)
            comps[target] = comps[target] + term if target in comps else term
    return GradedMatrixForm(a.chart, a.rank, comps)


def integrate_top(a: ScalarForm) -> TopIntegral:
    """Integrate the top-degree component: periodic axes by trapezoid, closed ones by Simpson."""
    if a.rank != 1:
        raise RankMismatchError(f"integrate_top needs a scalar form, got rank {a.rank}")
    top = tuple(range(a.chart.dim))
    if top not in a.components:
        logger.warning("integrate_top: form has no grade-{} component, returning 0", a.chart.dim)
        return TopIntegral(0j, missing_top=True)
    values = a.components[top][..., 0, 0]
    for axis in reversed(range(a.chart.dim)):
        ax = a.chart.axes[axis]
        if ax.periodic:
            values = values.sum(axis=axis) * ax.spacing
        else:
            values = simpson(values, dx=ax.spacing, axis=axis)
    return TopIntegral(complex(values) * a.chart.orientation)


def stack_slices(cylinder: Chart, slices: list[GradedMatrixForm]) -> GradedMatrixForm:
    """Assemble per-t forms on the base into one form on base × [a, b] (t is the last axis)."""
    if len(slices) != cylinder.shape[-1]:
        raise ChartMismatchError(f"{len(slices)} slices for {cylinder.shape[-1]} t-samples")
    base = slices[0]
    indices = set().union(*(s.components.keys() for s in slices))
    comps = {idx: np.stack([s.component(idx) for s in slices], axis=base.chart.dim) for idx in indices}
    return GradedMatrixForm(cylinder, base.rank, comps)
