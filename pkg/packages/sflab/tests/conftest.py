from itertools import combinations

import numpy as np
import pytest
from hypothesis import settings as hypothesis_settings

from sflab.exterior import Chart, GradedMatrixForm
from sflab.harness.ledger import ConventionLedger, calibrate

hypothesis_settings.register_profile("sflab", derandomize=True, deadline=None)
hypothesis_settings.load_profile("sflab")


def random_form(chart: Chart, grade: int, rank: int = 1, seed: int = 0) -> GradedMatrixForm:
    """Dense random complex form of a single grade."""
    rng = np.random.default_rng(seed)
    shape = chart.shape + (rank, rank)
    comps = {
        idx: rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
        for idx in combinations(range(chart.dim), grade)
    }
    return GradedMatrixForm(chart, rank, comps)


@pytest.fixture
def circle() -> Chart:
    return Chart.circle(64)


@pytest.fixture
def torus3() -> Chart:
    return Chart.torus(3, 4)


@pytest.fixture(scope="session")
def ledger() -> ConventionLedger:
    return calibrate(persist=False)
