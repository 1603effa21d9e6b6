import math
from dataclasses import replace
from fractions import Fraction
from itertools import combinations

import numpy as np
import pytest
from numpy.testing import assert_allclose

from sflab.charforms import (
    TWO_PI_I,
    a_hat_form,
    char_form,
    chern_character,
    cylinder_side,
    geometric_side,
    lifted_char_forms,
    maurer_cartan_cs_closed,
    mc_coefficient,
    mc_moment,
    odd_char_form,
    transgression_defect,
)
from sflab.connections import ChartMap, ConnectionFamily, Smoothing, curvature, lift, pullback
from sflab.errors import DimensionError, QuadratureError, StructuralEquationError
from sflab.exterior import Chart, CharPowerSeries, GradedMatrixForm, d, integrate_top, mat_trace
from sflab.families import abelian_family, hypersurface_circle, maurer_cartan_u1, torus_test_u2


def _winding(m: int, nodes: int = 64) -> ConnectionFamily:
    base = maurer_cartan_u1(nodes)
    return pullback(base, ChartMap.circle_cover(Chart.circle(nodes), base.chart, m))


def _hypersurface(degree: int, nodes: int = 64) -> ConnectionFamily:
    base = hypersurface_circle(nodes)
    return pullback(base, ChartMap.circle_cover(Chart.circle(nodes), base.chart, degree))


def _field_tensor(components: dict[tuple[int, int], np.ndarray], shape: tuple[int, ...], dim: int) -> np.ndarray:
    tensor = np.zeros(shape + (dim, dim))
    for (i, j), value in components.items():
        tensor[..., i, j] = value
        tensor[..., j, i] = -value
    return tensor


def _abelian_t3(nodes: int) -> ConnectionFamily:
    """ω^s = i·s·(sin y dx + sin z dy + sin x dz) on the 3-torus, with its exact field strength."""

    def potential(p: np.ndarray) -> np.ndarray:
        x, y, z = p[..., 0], p[..., 1], p[..., 2]
        return np.stack([np.sin(y), np.sin(z), np.sin(x)], axis=-1)

    def field(p: np.ndarray) -> np.ndarray:
        x, y, z = p[..., 0], p[..., 1], p[..., 2]
        return _field_tensor({(0, 1): -np.cos(y), (0, 2): np.cos(x), (1, 2): -np.cos(z)}, p.shape[:-1], 3)

    fam = abelian_family(Chart.torus(3, nodes), potential, field, name="abelian-t3")
    return replace(fam, fd_scheme="spectral")


def test_flat_chern_character_is_the_rank():
    fam = torus_test_u2(8)
    for s in (0.0, 1.0):
        ch = chern_character(fam, s)
        assert_allclose(ch.values(), 2.0)
        assert ch.grade(2).max_abs() == 0.0


def test_chern_character_of_winding_family():
    ch = chern_character(_winding(3, 32), 0.4)
    assert_allclose(ch.values(), 1.0)
    assert ch.grades == {0}


def test_degree_two_part_is_the_trace_of_curvature():
    fam = _abelian_t3(8)
    ch = chern_character(fam, 0.7)
    expected = mat_trace(curvature(fam, 0.7)) * (1 / TWO_PI_I)
    assert (ch.grade(2) - expected).max_abs() < 1e-14


@pytest.mark.parametrize("m", [-2, 1, 3])
def test_winding_chern_simons(m):
    cs = odd_char_form(_winding(m))
    assert_allclose(cs.values((0,)), m / (2 * math.pi), atol=1e-12)
    assert abs(integrate_top(cs).value - m) < 1e-10


@pytest.mark.parametrize("degree", [0, 1, 2, -3])
def test_hypersurface_chern_simons(degree):
    cs = odd_char_form(_hypersurface(degree))
    assert abs(integrate_top(cs).value + degree) < 1e-10


def test_constant_family_has_no_chern_simons():
    chart = Chart.circle(32)

    def omega(s: float, p: np.ndarray) -> np.ndarray:
        return np.full(p.shape[:-1] + (1, 1, 1), 0.7j)

    def ds(s: float, p: np.ndarray) -> np.ndarray:
        return np.zeros(p.shape[:-1] + (1, 1, 1), dtype=complex)

    fam = ConnectionFamily(chart, 1, (0.0, 1.0), omega=omega, ds_omega=ds)
    assert odd_char_form(fam).max_abs() == 0.0
    assert geometric_side(fam).real == 0.0


def test_quadrature_needs_odd_samples():
    with pytest.raises(QuadratureError):
        odd_char_form(_winding(1, 16), s_samples=64)
    with pytest.raises(QuadratureError):
        odd_char_form(_winding(1, 16), s_samples=1)


def test_maurer_cartan_coefficients():
    assert mc_coefficient(0) == 1
    assert mc_coefficient(1) == Fraction(-1, 6)
    assert mc_coefficient(2) == Fraction(1, 60)
    assert abs(mc_moment(1) + 1 / 6) < 1e-10
    assert abs(mc_moment(0) - 1) < 1e-12


def test_closed_form_matches_quadrature_on_circle():
    fam = _winding(3, 64)
    closed = maurer_cartan_cs_closed(fam.omega_at(1.0))
    assert (closed - odd_char_form(fam)).max_abs() < 1e-8


def test_closed_form_matches_quadrature_on_torus():
    fam = torus_test_u2(12)
    closed = maurer_cartan_cs_closed(fam.omega_at(1.0), tol=1e-8, scheme="spectral")
    assert (closed - odd_char_form(fam, s_samples=5)).max_abs() < 1e-8
    assert abs(integrate_top(closed).value.imag) < 1e-8


def test_closed_form_refuses_non_maurer_cartan_forms():
    chart = Chart.torus(2, 16)
    y = chart.coordinate(1)
    omega = GradedMatrixForm.scalar(chart, 1j * np.sin(y), (0,))
    with pytest.raises(StructuralEquationError):
        maurer_cartan_cs_closed(omega, scheme="spectral")


def test_a_hat_is_trivial_in_low_dimension():
    ahat = a_hat_form(Chart.torus(3, 4))
    assert_allclose(ahat.values(), 1.0)
    assert ahat.grades == {0}
    with pytest.raises(DimensionError):
        a_hat_form(Chart.point(8))


def test_first_pontryagin_form_on_four_torus():
    chart = Chart.torus(4, 3)
    rng = np.random.default_rng(11)
    comps = {}
    for idx in combinations(range(4), 2):
        raw = rng.standard_normal(chart.shape + (4, 4))
        comps[idx] = raw - np.swapaxes(raw, -1, -2)
    curv = GradedMatrixForm(chart, 4, comps)
    ahat = a_hat_form(curv)

    def r(i: int, j: int) -> np.ndarray:
        return comps[(i, j)]

    def tr(a: np.ndarray, b: np.ndarray) -> np.ndarray:
        return np.trace(a @ b, axis1=-2, axis2=-1)

    tr_rr = 2 * (tr(r(0, 1), r(2, 3)) - tr(r(0, 2), r(1, 3)) + tr(r(0, 3), r(1, 2)))
    p1 = -tr_rr / (8 * math.pi**2)
    assert_allclose(ahat.values((0, 1, 2, 3)), -p1 / 24, atol=1e-12)
    direct = -p1.sum() * chart.axes[0].spacing**4 / 24
    assert abs(integrate_top(ahat).value - direct) < 1e-10 * max(1.0, abs(direct))


@pytest.mark.parametrize("m", [1, -2])
def test_geometric_side_of_winding(m):
    result = geometric_side(_winding(m))
    assert abs(result.real + m) < 1e-8
    assert result.imag_residue < 1e-8
    assert result.grid_shape == (64,)


def test_geometric_side_of_hypersurface():
    assert abs(geometric_side(_hypersurface(2)).real - 2) < 1e-8


def test_transgression_converges_at_fourth_order():
    defects = []
    for nodes in (32, 64):

        def potential(p: np.ndarray) -> np.ndarray:
            return np.stack([np.sin(p[..., 0] + 2 * p[..., 1]), np.zeros(p.shape[:-1])], axis=-1)

        def field(p: np.ndarray) -> np.ndarray:
            return _field_tensor({(0, 1): -2 * np.cos(p[..., 0] + 2 * p[..., 1])}, p.shape[:-1], 2)

        fam = abelian_family(Chart.torus(2, nodes), potential, field)
        defects.append(transgression_defect(fam, s_samples=5).max_abs())
    assert 12 <= defects[0] / defects[1] <= 20


def test_transgression_is_exact_with_spectral_derivatives():
    assert transgression_defect(_abelian_t3(8), s_samples=5).max_abs() < 1e-12


def test_chern_character_is_closed_up_to_discretization():
    errors = []
    for nodes in (16, 32):

        def potential(p: np.ndarray) -> np.ndarray:
            zero = np.zeros(p.shape[:-1])
            return np.stack([zero, zero, np.sin(p[..., 0] + 2 * p[..., 1])], axis=-1)

        def field(p: np.ndarray) -> np.ndarray:
            u = p[..., 0] + 2 * p[..., 1]
            return _field_tensor({(0, 2): np.cos(u), (1, 2): 2 * np.cos(u)}, p.shape[:-1], 3)

        fam = abelian_family(Chart.torus(3, nodes), potential, field)
        errors.append(d(chern_character(fam, 1.0)).max_abs())
    assert 12 <= errors[0] / errors[1] <= 20


@pytest.mark.parametrize("q", [CharPowerSeries.exp(), CharPowerSeries.monomial(2)])
def test_lifted_characteristic_form_splits(q):
    lifted = lift(_abelian_t3(8), Smoothing.identity(0.0, 1.0), t_samples=17)
    lhs, rhs = lifted_char_forms(lifted, q)
    assert (lhs - rhs).max_abs() < 1e-8
    assert lhs.grade(4).max_abs() > 1e-3


def test_lifted_characteristic_form_on_circle_with_smoothstep():
    lifted = lift(_winding(2, 32), t_samples=129)
    lhs, rhs = lifted_char_forms(lifted)
    assert (lhs - rhs).max_abs() < 1e-6


def test_lifted_characteristic_form_on_the_torus_with_smoothstep():
    lifted = lift(_abelian_t3(8), t_samples=129)
    lhs, rhs = lifted_char_forms(lifted)
    assert (lhs - rhs).max_abs() < 1e-6
    assert lhs.grade(4).max_abs() > 1e-3


def test_cylinder_side_is_minus_chern_simons():
    fam = _winding(2, 32)
    exact = cylinder_side(lift(fam, Smoothing.identity(0.0, 1.0), t_samples=33))
    assert abs(exact + 2) < 1e-9
    smooth = cylinder_side(lift(fam, t_samples=129))
    assert abs(smooth + 2) < 1e-6


def test_char_form_with_monomial_on_circle_is_zero():
    assert char_form(_winding(1, 16), CharPowerSeries.monomial(2), 0.5).max_abs() == 0.0
