"""Characteristic forms of connection families and the geometric side of the index formula."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from joblib import Parallel, delayed
from loguru import logger
from scipy.integrate import simpson

from sflab.config import settings
from sflab.connections import ConnectionFamily, LiftedConnection, curvature
from sflab.errors import DimensionError, QuadratureError, StructuralEquationError
from sflab.exterior import (
    Chart,
    CharPowerSeries,
    GradedMatrixForm,
    ScalarForm,
    apply_series,
    d,
    integrate_top,
    mat_trace,
    stack_slices,
    wedge,
    wedge_power,
)

TWO_PI_I = 2j * math.pi
EXP = CharPowerSeries.exp()


@dataclass(frozen=True)
class GeometricSideResult:
    value: complex
    imag_residue: float
    s_samples: int
    grid_shape: tuple[int, ...]

    @property
    def real(self) -> float:
        return self.value.real


def char_form(fam: ConnectionFamily, q: CharPowerSeries, s: float) -> ScalarForm:
    """tr q(Ω^s/2πi)."""
    omega_curv = curvature(fam, s) * (1 / TWO_PI_I)
    return mat_trace(apply_series(q.truncated(fam.chart.dim), omega_curv))


def chern_character(fam: ConnectionFamily, s: float) -> ScalarForm:
    return char_form(fam, EXP, s)


def _odd_integrand(fam: ConnectionFamily, dq: CharPowerSeries, s: float) -> ScalarForm:
    omega_curv = curvature(fam, s) * (1 / TWO_PI_I)
    ds = fam.ds_omega_at(s) * (1 / TWO_PI_I)
    return mat_trace(wedge(ds, apply_series(dq, omega_curv)))


def odd_char_form(fam: ConnectionFamily, q: CharPowerSeries = EXP, s_samples: int | None = None) -> ScalarForm:
    """∫_a^b tr(∂_sω^s/2πi ∧ q′(Ω^s/2πi)) ds by composite Simpson over odd ``s_samples``."""
    n = s_samples or settings.s_samples
    if n < 3 or n % 2 == 0:
        raise QuadratureError(f"Simpson quadrature needs an odd number ≥ 3 of s-samples, got {n}")
    a, b = fam.interval
    grid = np.linspace(a, b, n)
    dq = q.derivative()
    slices = Parallel(n_jobs=settings.n_jobs, prefer="threads")(
        delayed(_odd_integrand)(fam, dq, float(s)) for s in grid
    )
    indices = set().union(*(sl.components.keys() for sl in slices))
    comps = {idx: simpson(np.stack([sl.component(idx) for sl in slices]), x=grid, axis=0) for idx in indices}
    return GradedMatrixForm(fam.chart, 1, comps)


def mc_coefficient(k: int) -> Fraction:
    """(1/k!)·∫₀¹ s^k(s−1)^k ds = (−1)^k k!/(2k+1)!."""
    return Fraction((-1) ** k * math.factorial(k), math.factorial(2 * k + 1))


def mc_moment(k: int, s_samples: int = 65) -> float:
    """∫₀¹ s^k(s−1)^k ds by the same Simpson rule the quadrature path uses."""
    grid = np.linspace(0.0, 1.0, s_samples)
    return float(simpson(grid**k * (grid - 1) ** k, x=grid))


def maurer_cartan_cs_closed(
    omega: GradedMatrixForm,
    dim: int | None = None,
    tol: float = 1e-6,
    scheme: str | None = None,
) -> ScalarForm:
    """cs of ∇^s = d + sω for a Maurer–Cartan form ω, summed in closed form."""
    defect = (d(omega, scheme or settings.fd_scheme) + wedge(omega, omega)).max_abs()
    if defect > tol:
        raise StructuralEquationError(f"‖dω + ω∧ω‖∞ = {defect:.2e} exceeds {tol:.0e}")
    dim = omega.chart.dim if dim is None else dim
    result = GradedMatrixForm.zero(omega.chart)
    for k in range((dim - 1) // 2 + 1):
        term = mat_trace(wedge_power(omega, 2 * k + 1))
        result = result + term * (float(mc_coefficient(k)) / TWO_PI_I ** (k + 1))
    return result


def a_hat_form(source: GradedMatrixForm | Chart) -> ScalarForm:
    """Â of the tangent bundle: 1 in dimension ≤ 3 or for a chart tag, else 1 − p₁/24."""
    chart = source if isinstance(source, Chart) else source.chart
    if chart.dim > 7:
        raise DimensionError(f"Â truncation needs dim ≤ 7, got {chart.dim}")
    one = GradedMatrixForm.identity(chart)
    if isinstance(source, Chart) or chart.dim <= 3:
        return one
    return one - pontryagin_first(source) * (1 / 24)


def pontryagin_first(riem_curv: GradedMatrixForm) -> ScalarForm:
    """p₁ = −tr(R∧R)/(8π²) for a real skew curvature form."""
    return mat_trace(wedge(riem_curv, riem_curv)) * (-1 / (8 * math.pi**2))


def geometric_side(
    fam: ConnectionFamily,
    ahat: ScalarForm | None = None,
    s_samples: int | None = None,
    q: CharPowerSeries = EXP,
) -> GeometricSideResult:
    """−∫_M Â ∧ cs(∇•)."""
    ahat = ahat if ahat is not None else a_hat_form(fam.chart)
    cs = odd_char_form(fam, q, s_samples)
    value = -integrate_top(wedge(ahat, cs)).value
    residue = abs(value.imag)
    if residue > settings.imag_tol:
        raise QuadratureError(f"geometric side of {fam.name} has imaginary part {residue:.2e}")
    if residue > 1e-8:
        logger.warning("geometric side of {} has imaginary residue {:.2e}", fam.name, residue)
    return GeometricSideResult(value, residue, s_samples or settings.s_samples, fam.chart.shape)


def transgression_defect(fam: ConnectionFamily, s_samples: int | None = None) -> ScalarForm:
    """d cs(∇•) − (ch(∇^b) − ch(∇^a)); vanishes up to discretization."""
    a, b = fam.interval
    cs = odd_char_form(fam, EXP, s_samples)
    return d(cs, fam.fd_scheme) - (chern_character(fam, b) - chern_character(fam, a))


def pull_to_cylinder(form: GradedMatrixForm, cylinder: Chart) -> GradedMatrixForm:
    """π*form on M × [a, b]: constant along t, no dt components."""
    return stack_slices(cylinder, [form] * cylinder.shape[-1])


def lifted_char_forms(
    lifted: LiftedConnection, q: CharPowerSeries = EXP
) -> tuple[ScalarForm, ScalarForm]:
    """Both sides of tr q(Ω̄/2πi) = π*tr q(Ω^t/2πi) + dt ∧ π*tr(∂_tω^t/2πi ∧ q′(Ω^t/2πi)).

    The left side uses the structurally computed Ω̄ on the cylinder grid, the
    right side is assembled slice by slice from the reparametrized family.
    """
    cylinder = lifted.cylinder
    q = q.truncated(cylinder.dim)
    lhs = mat_trace(apply_series(q, lifted.curvature_structural() * (1 / TWO_PI_I)))
    fam = lifted.family
    dq = q.derivative()
    horizontal = stack_slices(cylinder, [char_form(fam, q, float(t)) for t in lifted.t_values])
    vertical = stack_slices(cylinder, [_odd_integrand(fam, dq, float(t)) for t in lifted.t_values])
    dt = GradedMatrixForm.differential(cylinder, cylinder.dim - 1)
    return lhs, horizontal + wedge(dt, vertical)


def cylinder_side(lifted: LiftedConnection, ahat: ScalarForm | None = None) -> complex:
    """∫_{M×[a,b]} π*Â ∧ ch(∇̄), orientation M axes first and t last."""
    cylinder = lifted.cylinder
    base_ahat = ahat if ahat is not None else a_hat_form(lifted.base.chart)
    ch_bar = mat_trace(
        apply_series(EXP.truncated(cylinder.dim), lifted.curvature_structural() * (1 / TWO_PI_I))
    )
    return integrate_top(wedge(pull_to_cylinder(base_ahat, cylinder), ch_bar)).value
