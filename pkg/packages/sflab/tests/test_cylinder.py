import numpy as np
import pytest

from sflab.cylinder import aps_index
from sflab.dirac import DiracFamily
from sflab.errors import FamilyKindError
from sflab.families import maurer_cartan_u1
from sflab.spectralflow import crossing_oracle, flow


def _random_family(rng: np.random.Generator) -> DiracFamily:
    slope = float(rng.integers(-4, 5))
    if rng.random() < 0.5:
        offsets = rng.choice([0.0, 0.25, 0.5], size=129)
    else:
        offsets = rng.uniform(-0.5, 0.5, size=129)
    return DiracFamily.affine(slope, offsets)


def test_upward_crossings():
    result = aps_index(DiracFamily.affine(2.0))
    assert result.kernel_modes == (-1,)
    assert result.cokernel_modes == ()
    assert (result.h_a, result.h_b) == (1, 1)
    assert (result.ind_aps, result.ind_maps) == (1, 2)


def test_constant_family():
    result = aps_index(DiracFamily.affine(0.0, 0.5))
    assert (result.ind_aps, result.ind_maps, result.h_a, result.h_b) == (0, 0, 0, 0)


def test_downward_crossing():
    fam = DiracFamily.affine(-1.0)
    result = aps_index(fam)
    assert result.cokernel_modes == (0, 1)
    assert result.maps_cokernel_modes == (0,)
    assert (result.ind_aps, result.ind_maps) == (-2, -1)
    assert crossing_oracle(fam) == -1


def test_flow_is_the_modified_index():
    rng = np.random.default_rng(31)
    for _ in range(200):
        fam = _random_family(rng)
        result = aps_index(fam)
        sf = crossing_oracle(fam)
        assert sf == result.ind_aps + result.h_b
        assert sf == result.ind_maps


def test_certified_flow_agrees_with_the_index():
    rng = np.random.default_rng(5)
    for _ in range(10):
        fam = _random_family(rng)
        result = aps_index(fam)
        assert flow(fam).sf == result.ind_aps + result.h_b


def test_reversal():
    rng = np.random.default_rng(17)
    for _ in range(50):
        fam = _random_family(rng)
        rev = fam.reversed()
        forward, backward = aps_index(fam), aps_index(rev)
        assert crossing_oracle(rev) == -crossing_oracle(fam)
        assert backward.ind_aps == -forward.ind_aps - forward.h_a - forward.h_b
        assert (backward.h_a, backward.h_b) == (forward.h_b, forward.h_a)


def test_only_diagonal_families():
    fam = DiracFamily.fourier_circle(maurer_cartan_u1(16), cutoff=4)
    with pytest.raises(FamilyKindError):
        aps_index(fam)
