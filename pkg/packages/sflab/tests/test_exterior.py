import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from sflab.connections import ChartMap, pullback_form
from sflab.errors import ChartMismatchError, GradeError, InsufficientSamplesError, RankMismatchError
from sflab.exterior import (
    Axis,
    Chart,
    CharPowerSeries,
    GradedMatrixForm,
    apply_series,
    d,
    integrate_top,
    mat_trace,
    partial,
    wedge,
)

from .conftest import random_form


def test_one_forms_on_a_circle_wedge_to_zero(circle):
    nilpotent = GradedMatrixForm.constant(circle, [[0, 1], [0, 0]], (0,))
    other = random_form(circle, 1, rank=2, seed=3)
    assert wedge(nilpotent, other).max_abs() == 0.0


def test_identity_is_unit_for_wedge(torus3):
    b = random_form(torus3, 2, rank=2, seed=1)
    result = wedge(GradedMatrixForm.identity(torus3, 2), b)
    assert (result - b).max_abs() == 0.0


@given(st.integers(0, 2**16), st.integers(0, 3), st.integers(0, 3))
def test_scalar_wedge_graded_commutative(seed, p, q):
    chart = Chart.torus(3, 4)
    a, b = random_form(chart, p, seed=seed), random_form(chart, q, seed=seed + 1)
    sign = (-1) ** (p * q)
    assert (wedge(a, b) - wedge(b, a) * sign).max_abs() < 1e-12


@given(st.integers(0, 2**16))
def test_wedge_associative(seed):
    chart = Chart.torus(3, 4)
    a, b, c = (random_form(chart, 1, rank=2, seed=seed + i) for i in range(3))
    lhs, rhs = wedge(wedge(a, b), c), wedge(a, wedge(b, c))
    assert (lhs - rhs).max_abs() < 1e-12 * max(1.0, lhs.max_abs())


def test_wedge_rejects_mismatched_inputs(torus3):
    with pytest.raises(ChartMismatchError):
        wedge(random_form(torus3, 1), random_form(Chart.torus(3, 5), 1))
    with pytest.raises(RankMismatchError):
        wedge(random_form(torus3, 1, rank=1), random_form(torus3, 1, rank=2))


def test_trace_of_identity(torus3):
    assert_allclose(mat_trace(GradedMatrixForm.identity(torus3, 3)).values(), 3.0)


def test_trace_kills_graded_commutators(torus3):
    for p, q in ((1, 1), (1, 2), (2, 1)):
        a, b = random_form(torus3, p, rank=3, seed=p), random_form(torus3, q, rank=3, seed=10 + q)
        commutator = wedge(a, b) - wedge(b, a) * (-1) ** (p * q)
        assert mat_trace(commutator).max_abs() < 1e-11


def test_trace_of_cube_vanishes_on_circle(circle):
    omega = GradedMatrixForm.scalar(circle, 3j, (0,))
    assert mat_trace(wedge(wedge(omega, omega), omega)).max_abs() == 0.0


def test_apply_series_basics(torus3):
    exp = CharPowerSeries.exp()
    zero = GradedMatrixForm.zero(torus3, 2)
    assert (apply_series(exp, zero) - GradedMatrixForm.identity(torus3, 2)).max_abs() == 0.0

    a = random_form(torus3, 2, rank=2, seed=7)
    truncated = apply_series(exp, a) - GradedMatrixForm.identity(torus3, 2) - a
    assert truncated.max_abs() < 1e-14


def test_apply_series_rejects_odd_and_constant_parts(torus3):
    exp = CharPowerSeries.exp()
    with pytest.raises(GradeError):
        apply_series(exp, random_form(torus3, 1))
    with pytest.raises(GradeError):
        apply_series(exp, GradedMatrixForm.identity(torus3))


def test_series_truncation_and_derivative():
    q = CharPowerSeries.exp(order=6)
    assert q.truncated(3).coefficients == (1.0, 1.0)
    assert q.derivative().coefficients[:3] == (1.0, 1.0, 0.5)
    assert CharPowerSeries.monomial(2).derivative().coefficients == (0.0, 2.0)


def test_d_of_constant_vanishes(torus3):
    assert d(GradedMatrixForm.constant(torus3, np.eye(2), (1,))).max_abs() == 0.0
    circle = Chart.circle(16)
    assert d(GradedMatrixForm.scalar(circle, 3j, (0,))).max_abs() == 0.0


@pytest.mark.parametrize("scheme", ["central4", "spectral"])
def test_d_squared_vanishes(scheme):
    chart = Chart.torus(3, 12)
    a = random_form(chart, 1, seed=5)
    assert d(d(a, scheme), scheme).max_abs() < 1e-9 * max(1.0, a.max_abs())


def test_leibniz_rule_on_trigonometric_forms():
    chart = Chart.torus(2, 32)
    x, y = chart.coordinate(0), chart.coordinate(1)
    a = GradedMatrixForm.scalar(chart, np.sin(x), (1,))
    b = GradedMatrixForm.scalar(chart, np.cos(x + y))
    lhs = d(wedge(a, b), "spectral")
    rhs = wedge(d(a, "spectral"), b) - wedge(a, d(b, "spectral"))
    assert (lhs - rhs).max_abs() < 1e-10


def test_central_differences_are_fourth_order():
    errors = []
    for n in (32, 64):
        chart = Chart.circle(n)
        x = chart.coordinate(0)
        errors.append(np.max(np.abs(partial(np.sin(2 * x), chart, 0) - 2 * np.cos(2 * x))))
    assert 12 <= errors[0] / errors[1] <= 20


def test_interval_stencils_exact_on_quartics():
    chart = Chart((Axis.interval(17, 0.0, 1.0),))
    t = chart.coordinate(0)
    assert_allclose(partial(t**4 - t**3, chart, 0).real, 4 * t**3 - 3 * t**2, atol=1e-10)


def test_differentiation_needs_samples():
    with pytest.raises(InsufficientSamplesError):
        partial(np.zeros(3), Chart.circle(3), 0)
    with pytest.raises(InsufficientSamplesError):
        partial(np.zeros(4), Chart((Axis.interval(4, 0.0, 1.0),)), 0)


def test_integrate_top_on_circle(circle):
    assert abs(integrate_top(GradedMatrixForm.scalar(circle, 1 / (2 * math.pi), (0,))).value - 1) < 1e-12
    assert abs(integrate_top(GradedMatrixForm.scalar(circle, 3 / (2 * math.pi), (0,))).value - 3) < 1e-10


def test_integrate_top_flags_missing_top(circle):
    result = integrate_top(GradedMatrixForm.identity(circle))
    assert result.missing_top
    assert result.value == 0


def test_integrate_top_respects_orientation():
    chart = Chart((Axis.circle(16),), orientation=-1)
    assert abs(integrate_top(GradedMatrixForm.scalar(chart, 1.0, (0,))).value + 2 * math.pi) < 1e-12


def test_exact_top_form_integrates_to_zero():
    chart = Chart.torus(2, 24)
    x, y = chart.coordinate(0), chart.coordinate(1)
    b = GradedMatrixForm.scalar(chart, np.sin(x) * np.cos(2 * y), (1,))
    assert abs(integrate_top(d(b)).value) < 1e-12


def test_simpson_on_closed_interval():
    chart = Chart((Axis.interval(33, 0.0, 1.0),))
    t = chart.coordinate(0)
    assert abs(integrate_top(GradedMatrixForm.scalar(chart, t**2, (0,))).value - 1 / 3) < 1e-12


def test_volume_form_carries_the_weight():
    assert abs(Chart.circle(64, radius=2.0).volume() - 4 * math.pi) < 1e-12
    assert abs(Chart.torus(2, 8).volume() - (2 * math.pi) ** 2) < 1e-10


def test_degree_two_self_map_doubles_volume():
    torus = Chart.torus(3, 8)
    doubling = ChartMap.linear(torus, torus, np.diag([2.0, 1.0, 1.0]))
    pulled = pullback_form(torus.volume_form(), doubling)
    assert abs(integrate_top(pulled).value - 2 * (2 * math.pi) ** 3) < 1e-9
