"""One-parameter families of metric connections, their pullbacks, and the lift to M × [a, b]."""

from __future__ import annotations

import math
from collections.abc import Callable
from dataclasses import dataclass, field, replace
from itertools import combinations
from typing import Literal

import numpy as np

from sflab.config import settings
from sflab.errors import ChartMismatchError, NotMetricError, ParameterRangeError, SmoothingError
from sflab.exterior import Axis, Chart, GradedMatrixForm, d, partial, stack_slices, wedge

OneFormProvider = Callable[[float, np.ndarray], np.ndarray]
"""(s, points[..., dim]) -> components[..., dim, N, N]"""

TwoFormProvider = Callable[[float, np.ndarray], np.ndarray]
"""(s, points[..., dim]) -> antisymmetric tensor[..., dim, dim, N, N]"""

_RANGE_SLACK = 1e-12


@dataclass(frozen=True)
class ConnectionFamily:
    """s ↦ ω^s on a fixed frame, sampled on ``chart``."""

    chart: Chart
    rank: int
    interval: tuple[float, float]
    omega: OneFormProvider
    curvature_mode: Literal["exact", "structural"] = "structural"
    curvature_fn: TwoFormProvider | None = None
    ds_omega: OneFormProvider | None = None
    h_s: float | None = None
    fd_scheme: str = field(default_factory=lambda: settings.fd_scheme)
    name: str = ""

    def __post_init__(self) -> None:
        a, b = self.interval
        if not a < b:
            raise ParameterRangeError(f"family interval needs a < b, got [{a}, {b}]")
        if self.curvature_mode == "exact" and self.curvature_fn is None:
            raise ValueError("exact curvature mode needs a curvature callback")

    @property
    def step(self) -> float:
        a, b = self.interval
        return self.h_s if self.h_s is not None else (b - a) / 1024

    def check_parameter(self, s: float) -> None:
        a, b = self.interval
        if s < a - _RANGE_SLACK or s > b + _RANGE_SLACK:
            raise ParameterRangeError(f"s = {s} outside [{a}, {b}]")

    def omega_at(self, s: float) -> GradedMatrixForm:
        self.check_parameter(s)
        return GradedMatrixForm.from_one_form(self.chart, self.omega(s, self.chart.points()))

    def ds_provider(self) -> OneFormProvider:
        """∂_s ω as a provider: the callback if given, else a difference quotient in s."""
        if self.ds_omega is not None:
            return self.ds_omega
        a, b = self.interval
        h = self.step
        omega = self.omega

        def difference(s: float, points: np.ndarray) -> np.ndarray:
            if s - h < a:
                return (-3 * omega(s, points) + 4 * omega(s + h, points) - omega(s + 2 * h, points)) / (2 * h)
            if s + h > b:
                return (3 * omega(s, points) - 4 * omega(s - h, points) + omega(s - 2 * h, points)) / (2 * h)
            return (omega(s + h, points) - omega(s - h, points)) / (2 * h)

        return difference

    def ds_omega_at(self, s: float) -> GradedMatrixForm:
        self.check_parameter(s)
        return GradedMatrixForm.from_one_form(self.chart, self.ds_provider()(s, self.chart.points()))

    def check_metric(self, s: float, tol: float = 1e-12) -> None:
        omega = self.omega_at(s)
        defect = (omega + omega.adjoint()).max_abs()
        if defect > tol:
            raise NotMetricError(f"{self.name or 'family'}: ω^{s} is not skew-Hermitian (defect {defect:.2e})")

    def reparametrize(self, smoothing: Smoothing) -> ConnectionFamily:
        """The family t ↦ ∇^{φ(t)}."""
        phi, dphi = smoothing.fn, smoothing.derivative
        omega, ds = self.omega, self.ds_provider()
        curvature_fn = self.curvature_fn

        def reparam_omega(t: float, points: np.ndarray) -> np.ndarray:
            return omega(float(phi(t)), points)

        def reparam_ds(t: float, points: np.ndarray) -> np.ndarray:
            return float(dphi(t)) * ds(float(phi(t)), points)

        reparam_curv = None
        if curvature_fn is not None:

            def reparam_curv(t: float, points: np.ndarray) -> np.ndarray:
                return curvature_fn(float(phi(t)), points)

        return replace(
            self,
            interval=smoothing.interval,
            omega=reparam_omega,
            ds_omega=reparam_ds,
            curvature_fn=reparam_curv,
            name=f"{self.name}∘{smoothing.name}",
        )


def curvature(fam: ConnectionFamily, s: float) -> GradedMatrixForm:
    """Ω^s, from the callback or from the structural equation dω + ω∧ω."""
    fam.check_parameter(s)
    if fam.curvature_mode == "exact":
        return GradedMatrixForm.from_two_form(fam.chart, fam.curvature_fn(s, fam.chart.points()))
    omega = fam.omega_at(s)
    return d(omega, fam.fd_scheme) + wedge(omega, omega)


@dataclass(frozen=True)
class ChartMap:
    """A smooth map between charts with its Jacobian; both are callables on coordinates."""

    source: Chart
    target: Chart
    fn: Callable[[np.ndarray], np.ndarray]
    jacobian: Callable[[np.ndarray], np.ndarray]
    name: str = ""

    @classmethod
    def identity(cls, chart: Chart) -> ChartMap:
        eye = np.eye(chart.dim)
        return cls(chart, chart, lambda p: p, lambda p: np.broadcast_to(eye, p.shape[:-1] + eye.shape), "id")

    @classmethod
    def linear(cls, source: Chart, target: Chart, matrix: np.ndarray) -> ChartMap:
        matrix = np.asarray(matrix, dtype=float)
        return cls(
            source,
            target,
            lambda p: p @ matrix.T,
            lambda p: np.broadcast_to(matrix, p.shape[:-1] + matrix.shape),
            "linear",
        )

    @classmethod
    def circle_cover(cls, source: Chart, target: Chart, degree: int, wobble: float = 0.0) -> ChartMap:
        """θ ↦ dθ + ε sin θ between circle charts; degree d for |ε| < |d| or d = 0 and any ε."""
        if source.dim != 1 or target.dim != 1:
            raise ChartMismatchError("circle_cover maps a circle chart to a circle chart")

        def fn(p: np.ndarray) -> np.ndarray:
            return degree * p + wobble * np.sin(p)

        def jac(p: np.ndarray) -> np.ndarray:
            return (degree + wobble * np.cos(p))[..., None]

        return cls(source, target, fn, jac, f"cover(d={degree}, ε={wobble})")

    @property
    def values(self) -> np.ndarray:
        return self.fn(self.source.points())

    @property
    def differential(self) -> np.ndarray:
        return self.jacobian(self.source.points())

    def check_differential(self) -> float:
        """Max deviation between the Jacobian and difference quotients of the sampled map, O(h²)."""
        values, jac = self.values, self.differential
        periods = np.array([ax.length if ax.periodic else np.inf for ax in self.target.axes])
        worst = 0.0
        for j, ax in enumerate(self.source.axes):
            if ax.count < 2:
                continue
            step = np.roll(values, -1, axis=j) - values
            finite = np.isfinite(periods)
            step[..., finite] -= periods[finite] * np.round(step[..., finite] / periods[finite])
            mean_jac = 0.5 * (jac[..., j] + np.roll(jac[..., j], -1, axis=j))
            error = np.abs(step / ax.spacing - mean_jac)
            if not ax.periodic:
                error = np.take(error, np.arange(ax.count - 1), axis=j)
            worst = max(worst, float(error.max()))
        return worst


def _pull_one(components: np.ndarray, jac: np.ndarray) -> np.ndarray:
    return np.einsum("...iab,...ij->...jab", components, jac)


def _pull_two(tensor: np.ndarray, jac: np.ndarray) -> np.ndarray:
    return np.einsum("...ijab,...ik,...jl->...klab", tensor, jac, jac)


def pullback(fam: ConnectionFamily, f: ChartMap) -> ConnectionFamily:
    """f*∇^s, sampled on the source chart; exact callbacks are composed with f."""
    if fam.chart != f.target:
        raise ChartMismatchError(f"family lives on a different chart than the target of {f.name or 'the map'}")
    omega, ds, curv = fam.omega, fam.ds_omega, fam.curvature_fn

    def pulled_omega(s: float, points: np.ndarray) -> np.ndarray:
        return _pull_one(omega(s, f.fn(points)), f.jacobian(points))

    pulled_ds = None
    if ds is not None:

        def pulled_ds(s: float, points: np.ndarray) -> np.ndarray:
            return _pull_one(ds(s, f.fn(points)), f.jacobian(points))

    pulled_curv = None
    if curv is not None:

        def pulled_curv(s: float, points: np.ndarray) -> np.ndarray:
            return _pull_two(curv(s, f.fn(points)), f.jacobian(points))

    return replace(
        fam,
        chart=f.source,
        omega=pulled_omega,
        ds_omega=pulled_ds,
        curvature_fn=pulled_curv,
        name=f"{f.name}*{fam.name}",
    )


def _node_indices(f: ChartMap) -> tuple[np.ndarray, ...]:
    """Target grid indices hit by f at every source node; f must map nodes onto nodes."""
    values = f.values
    indices = []
    for j, ax in enumerate(f.target.axes):
        position = (values[..., j] - ax.origin) / ax.spacing
        nearest = np.round(position)
        if np.max(np.abs(position - nearest)) > 1e-9:
            raise ChartMismatchError(f"{f.name or 'map'} does not send grid nodes to grid nodes along axis {j}")
        idx = nearest.astype(int)
        if ax.periodic:
            idx %= ax.count
        elif idx.min() < 0 or idx.max() >= ax.count:
            raise ChartMismatchError(f"{f.name or 'map'} leaves the target interval along axis {j}")
        indices.append(idx)
    return tuple(indices)


def pullback_form(form: GradedMatrixForm, f: ChartMap) -> GradedMatrixForm:
    """f*α for a sampled form, by lookup at the image nodes and Jacobian minors."""
    if form.chart != f.target:
        raise ChartMismatchError("form does not live on the target chart of the map")
    nodes = _node_indices(f)
    jac = f.differential
    comps: dict[tuple[int, ...], np.ndarray] = {}
    for index, values in form.components.items():
        at_image = values[nodes]
        if not index:
            comps[()] = comps[()] + at_image if () in comps else at_image
            continue
        for target in combinations(range(f.source.dim), len(index)):
            minor = np.linalg.det(jac[..., list(index), :][..., list(target)])
            term = minor[..., None, None] * at_image
            comps[target] = comps[target] + term if target in comps else term
    return GradedMatrixForm(f.source, form.rank, comps)


def _transition(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return np.where(x > 0, np.exp(-1.0 / np.where(x > 0, x, 1.0)), 0.0)


def _transition_prime(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    safe = np.where(x > 0, x, 1.0)
    return np.where(x > 0, np.exp(-1.0 / safe) / safe**2, 0.0)


@dataclass(frozen=True)
class Smoothing:
    """A monotone reparametrization φ: [a, b] → [a, b] fixing the endpoints."""

    interval: tuple[float, float]
    fn: Callable[[float | np.ndarray], float | np.ndarray]
    derivative: Callable[[float | np.ndarray], float | np.ndarray]
    name: str = "φ"

    @classmethod
    def identity(cls, a: float, b: float) -> Smoothing:
        return cls((a, b), lambda t: t, lambda t: np.ones_like(np.asarray(t, dtype=float)), "id")

    @classmethod
    def smoothstep(cls, a: float, b: float, collar: float | None = None) -> Smoothing:
        """C^∞ step built from the primitive of a bump, constant on both collars."""
        w = (b - a) / 8 if collar is None else collar
        if not 0 <= w < (b - a) / 2:
            raise SmoothingError(f"collar {w} does not fit into [{a}, {b}]")
        core = b - a - 2 * w

        def unit(u: np.ndarray) -> np.ndarray:
            u = np.clip(u, 0.0, 1.0)
            left, right = _transition(u), _transition(1.0 - u)
            return left / (left + right)

        def unit_prime(u: np.ndarray) -> np.ndarray:
            inside = (u > 0) & (u < 1)
            u = np.clip(u, 0.0, 1.0)
            left, right = _transition(u), _transition(1.0 - u)
            num = _transition_prime(u) * right + left * _transition_prime(1.0 - u)
            return np.where(inside, num / (left + right) ** 2, 0.0)

        def fn(t):
            out = a + (b - a) * unit((np.asarray(t, dtype=float) - a - w) / core)
            return float(out) if np.ndim(out) == 0 else out

        def derivative(t):
            out = (b - a) / core * unit_prime((np.asarray(t, dtype=float) - a - w) / core)
            return float(out) if np.ndim(out) == 0 else out

        return cls((a, b), fn, derivative, "smoothstep")

    def check(self, samples: int = 513) -> None:
        a, b = self.interval
        t = np.linspace(a, b, samples)
        values = np.asarray(self.fn(t), dtype=float)
        if np.any(np.diff(values) < -1e-14):
            raise SmoothingError(f"{self.name} is not monotone on [{a}, {b}]")
        if not (math.isclose(values[0], a, abs_tol=1e-12) and math.isclose(values[-1], b, abs_tol=1e-12)):
            raise SmoothingError(f"{self.name} does not fix the endpoints of [{a}, {b}]")


@dataclass(frozen=True)
class LiftedConnection:
    """∇̄ on π*E over X = M × [a, b]: ω̄(v + α∂t) = ω^{φ(t)}(v), no dt component."""

    base: ConnectionFamily
    smoothing: Smoothing
    t_samples: int

    @property
    def family(self) -> ConnectionFamily:
        return self.base.reparametrize(self.smoothing)

    @property
    def cylinder(self) -> Chart:
        a, b = self.base.interval
        return self.base.chart.extend(Axis.interval(self.t_samples, a, b))

    @property
    def t_values(self) -> np.ndarray:
        return self.cylinder.axes[-1].samples()

    def _stack(self, build: Callable[[float], GradedMatrixForm]) -> GradedMatrixForm:
        return stack_slices(self.cylinder, [build(float(t)) for t in self.t_values])

    def omega_bar(self) -> GradedMatrixForm:
        return self._stack(self.family.omega_at)

    def curvature_structural(self) -> GradedMatrixForm:
        """Ω̄ = dω̄ + ω̄∧ω̄ on the cylinder grid.

        Base directions of dω̄ are differenced on the grid; the t direction is
        dt ∧ ∂_t ω̄ with ∂_t ω̄ = φ′(t)·∂_sω^{φ(t)} taken from the family.
        """
        omega_bar = self.omega_bar()
        t_axis = self.cylinder.dim - 1
        dt = GradedMatrixForm.differential(self.cylinder, t_axis, self.base.rank)
        horizontal = d(omega_bar, self.base.fd_scheme, axes=range(t_axis))
        return horizontal + wedge(dt, self.dt_derivative()) + wedge(omega_bar, omega_bar)

    def curvature_decomposed(self) -> GradedMatrixForm:
        """π*Ω^{φ(t)} + dt ∧ π*∂_t ω^{φ(t)}."""
        fam = self.family
        horizontal = self._stack(lambda t: curvature(fam, t))
        vertical = self._stack(fam.ds_omega_at)
        dt = GradedMatrixForm.differential(self.cylinder, self.cylinder.dim - 1, self.base.rank)
        return horizontal + wedge(dt, vertical)

    def dt_derivative(self) -> GradedMatrixForm:
        """∂_t ω̄ by the chain rule, slice by slice."""
        return self._stack(self.family.ds_omega_at)

    def dt_difference(self) -> GradedMatrixForm:
        """∂_t ω̄ by differencing the stacked slices along t."""
        omega_bar = self.omega_bar()
        axis = self.cylinder.dim - 1
        return GradedMatrixForm(
            self.cylinder,
            self.base.rank,
            {idx: partial(c, self.cylinder, axis) for idx, c in omega_bar.components.items()},
        )


def lift(fam: ConnectionFamily, smoothing: Smoothing | None = None, t_samples: int = 129) -> LiftedConnection:
    a, b = fam.interval
    smoothing = smoothing or Smoothing.smoothstep(a, b)
    if smoothing.interval != fam.interval:
        raise SmoothingError(f"smoothing interval {smoothing.interval} differs from family interval {fam.interval}")
    smoothing.check()
    return LiftedConnection(fam, smoothing, t_samples)
