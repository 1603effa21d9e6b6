"""Built-in connection families, selectable by name.

Each family is defined on the chart it naturally lives on (the U(1) loop, the
circle hypersurface, the 3-torus); scenarios pull them back along chart maps.
"""

from __future__ import annotations

import inspect
import math
from collections.abc import Callable

import numpy as np

from sflab.config import settings
from sflab.connections import ConnectionFamily
from sflab.errors import FamilyKindError, RankMismatchError
from sflab.exterior import Chart

CLIFFORD_CIRCLE = -1j
"""γ(e₁) on S¹ with the complex volume element acting trivially."""

PAULI = (
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)


def circle_weingarten(radius: float) -> float:
    """Shape operator of the round circle of radius r with inward normal: W = (1/r)·id."""
    if not radius > 0:
        raise ValueError(f"radius must be positive, got {radius}")
    return 1.0 / radius


def _wedge_tensor(omega: np.ndarray) -> np.ndarray:
    """(ω∧ω)_{ij} = ω_i ω_j − ω_j ω_i from coefficients of shape (..., dim, N, N)."""
    prod = np.einsum("...iab,...jbc->...ijac", omega, omega)
    return prod - np.swapaxes(prod, -3, -4)


def maurer_cartan_family(
    chart: Chart,
    g: Callable[[np.ndarray], np.ndarray],
    dg: Callable[[np.ndarray], np.ndarray],
    name: str = "maurer-cartan",
) -> ConnectionFamily:
    """∇^s = d + s·g⁻¹dg on s ∈ [0, 1] for a unitary-valued map g, with Ω^s = s(s−1)·ω∧ω."""
    sample = g(chart.points())
    rank = sample.shape[-1]

    def mc(points: np.ndarray) -> np.ndarray:
        g_inv = np.conj(np.swapaxes(g(points), -1, -2))
        return np.einsum("...ab,...jbc->...jac", g_inv, dg(points))

    def omega(s: float, points: np.ndarray) -> np.ndarray:
        return s * mc(points)

    def ds_omega(s: float, points: np.ndarray) -> np.ndarray:
        return mc(points)

    def curv(s: float, points: np.ndarray) -> np.ndarray:
        return s * (s - 1) * _wedge_tensor(mc(points))

    return ConnectionFamily(
        chart=chart,
        rank=rank,
        interval=(0.0, 1.0),
        omega=omega,
        curvature_mode="exact",
        curvature_fn=curv,
        ds_omega=ds_omega,
        name=name,
    )


def maurer_cartan_u1(nodes: int | None = None) -> ConnectionFamily:
    """Maurer–Cartan family of U(1) = S¹ in the angle chart: ω^s = i s dφ."""
    chart = Chart.circle(nodes or settings.grid_nodes)
    return maurer_cartan_family(
        chart,
        lambda p: np.exp(1j * p[..., 0])[..., None, None],
        lambda p: (1j * np.exp(1j * p[..., 0]))[..., None, None, None],
        name="maurer-cartan-u1",
    )


def mixing_unitary(rank: int, mixing: float) -> np.ndarray:
    """Rotation by ``mixing`` in the plane of the first two basis vectors of ℂ^N."""
    u = np.eye(rank, dtype=complex)
    if rank >= 2:
        c, s = math.cos(mixing), math.sin(mixing)
        u[:2, :2] = [[c, -s], [s, c]]
    return u


def maurer_cartan_un(nodes: int | None = None, rank: int = 2, mixing: float = 0.3) -> ConnectionFamily:
    """Maurer–Cartan family restricted to the generator loop φ ↦ U·diag(e^{iφ}, 1, …, 1)·U† of U(N)."""
    if rank < 1:
        raise RankMismatchError(f"rank must be at least 1, got {rank}")
    chart = Chart.circle(nodes or settings.grid_nodes)
    u = mixing_unitary(rank, mixing)
    projector = u @ np.diag([1.0] + [0.0] * (rank - 1)).astype(complex) @ u.conj().T
    eye = np.eye(rank, dtype=complex)

    def g(p: np.ndarray) -> np.ndarray:
        phase = np.exp(1j * p[..., 0])[..., None, None]
        return eye + (phase - 1) * projector

    def dg(p: np.ndarray) -> np.ndarray:
        phase = (1j * np.exp(1j * p[..., 0]))[..., None, None]
        return (phase * projector)[..., None, :, :]

    return maurer_cartan_family(chart, g, dg, name=f"maurer-cartan-u{rank}")


def torus_test_u2(nodes: int = 32) -> ConnectionFamily:
    """g(x, y, z) = exp(ixσ₁)·exp(iyσ₂)·exp(izσ₃) on the 3-torus."""
    chart = Chart.torus(3, nodes)
    eye = np.eye(2, dtype=complex)

    def rot(angle: np.ndarray, sigma: np.ndarray) -> np.ndarray:
        return np.cos(angle)[..., None, None] * eye + 1j * np.sin(angle)[..., None, None] * sigma

    def g(p: np.ndarray) -> np.ndarray:
        a, b, c = (rot(p[..., j], PAULI[j]) for j in range(3))
        return a @ b @ c

    def dg(p: np.ndarray) -> np.ndarray:
        a, b, c = (rot(p[..., j], PAULI[j]) for j in range(3))
        s1, s2, s3 = (1j * sigma for sigma in PAULI)
        return np.stack([a @ s1 @ b @ c, a @ b @ s2 @ c, a @ b @ c @ s3], axis=-3)

    return maurer_cartan_family(chart, g, dg, name="torus-test-u2")


def hypersurface_circle(nodes: int | None = None, radius: float = 1.0) -> ConnectionFamily:
    """∇^s = ∇^{½} + s·γ∘W on the spinor bundle of a round circle, s ∈ [−½, ½].

    In the frame of spinors parallel for the ambient flat connection, the
    induced spin connection is −½γ∘W, so ω^s = (s − ½)·γ∘W. With the angle
    coordinate, γ∘W(∂θ) = γ(e₁)·r·(1/r) is independent of the radius.
    """
    chart = Chart.circle(nodes or settings.grid_nodes, radius)
    gamma_w = CLIFFORD_CIRCLE * radius * circle_weingarten(radius)

    def omega(s: float, points: np.ndarray) -> np.ndarray:
        return np.full(points.shape[:-1] + (1, 1, 1), (s - 0.5) * gamma_w, dtype=complex)

    def ds_omega(s: float, points: np.ndarray) -> np.ndarray:
        return np.full(points.shape[:-1] + (1, 1, 1), gamma_w, dtype=complex)

    def curv(s: float, points: np.ndarray) -> np.ndarray:
        return np.zeros(points.shape[:-1] + (1, 1, 1, 1), dtype=complex)

    return ConnectionFamily(
        chart=chart,
        rank=1,
        interval=(-0.5, 0.5),
        omega=omega,
        curvature_mode="exact",
        curvature_fn=curv,
        ds_omega=ds_omega,
        name="hypersurface-circle",
    )


def abelian_family(
    chart: Chart,
    potential: Callable[[np.ndarray], np.ndarray],
    field_strength: Callable[[np.ndarray], np.ndarray] | None = None,
    interval: tuple[float, float] = (0.0, 1.0),
    name: str = "abelian",
) -> ConnectionFamily:
    """U(1) family ω^s = i·s·A for a real 1-form A (..., dim); field_strength gives dA as (..., dim, dim)."""

    def omega(s: float, points: np.ndarray) -> np.ndarray:
        return (1j * s * potential(points))[..., None, None]

    def ds_omega(s: float, points: np.ndarray) -> np.ndarray:
        return (1j * potential(points))[..., None, None]

    curv = None
    if field_strength is not None:

        def curv(s: float, points: np.ndarray) -> np.ndarray:
            return (1j * s * field_strength(points))[..., None, None]

    return ConnectionFamily(
        chart=chart,
        rank=1,
        interval=interval,
        omega=omega,
        curvature_mode="exact" if curv is not None else "structural",
        curvature_fn=curv,
        ds_omega=ds_omega,
        name=name,
    )


FAMILY_BUILDERS: dict[str, Callable[..., ConnectionFamily]] = {
    "maurer-cartan-u1": maurer_cartan_u1,
    "maurer-cartan-uN": maurer_cartan_un,
    "hypersurface-circle": hypersurface_circle,
    "torus-test-u2": torus_test_u2,
}


def build_family(name: str, **params) -> ConnectionFamily:
    """Look up a builder by name and call it with the parameters it accepts."""
    try:
        builder = FAMILY_BUILDERS[name]
    except KeyError:
        raise FamilyKindError(f"unknown family {name!r}; known: {', '.join(FAMILY_BUILDERS)}") from None
    accepted = inspect.signature(builder).parameters
    return builder(**{k: v for k, v in params.items() if k in accepted and v is not None})
