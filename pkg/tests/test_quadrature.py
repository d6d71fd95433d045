import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from choquard.errors import ParameterError
from choquard.quadrature import (Ball, ConstantField, QuadratureSpec, directions,
                                 riesz_convolution, two_level)
from oracles import riesz_of_one_in_ball


def test_directions_weights_sum_to_sphere_area():
    for level in range(3):
        d, w = directions(3, level)
        assert w.sum() == pytest.approx(4 * math.pi, rel=1e-13)
        assert np.allclose(np.linalg.norm(d, axis=1), 1.0)
    d, w = directions(4, 0)
    assert w.sum() == pytest.approx(2 * math.pi ** 2, rel=1e-13)


def test_constant_at_origin():
    s = riesz_convolution(ConstantField(), [0, 0, 0], 1.0, 1.0)
    assert s.value == pytest.approx(2 * math.pi, rel=1e-8)


@settings(max_examples=15)
@given(st.floats(0.0, 0.9), st.floats(0.2, 2.8), st.integers(0, 2**31 - 1))
def test_constant_field_against_polar_oracle(r, alpha, seed):
    rng = np.random.default_rng(seed)
    d = rng.standard_normal(3)
    x = r * d / np.linalg.norm(d)
    s = riesz_convolution(ConstantField(), x, alpha, 2.0)
    assert s.value == pytest.approx(riesz_of_one_in_ball(x, alpha), rel=5e-3)


def test_lambda_power_applied():
    one = riesz_convolution(ConstantField(2.0), [0.1, 0.2, 0.0], 1.5, 1.0).value
    three = riesz_convolution(ConstantField(2.0), [0.1, 0.2, 0.0], 1.5, 3.0).value
    assert three / one == pytest.approx(4.0, rel=1e-10)


def test_zero_field_gives_zero():
    s = riesz_convolution(ConstantField(0.0), [0.2, 0.0, 0.0], 1.0, 1.0)
    assert s.value == 0.0 and s.error == 0.0


def test_exclusion_removes_mass():
    full = riesz_convolution(ConstantField(), [0, 0, 0], 1.0, 1.0).value
    holed = riesz_convolution(ConstantField(), [0, 0, 0], 1.0, 1.0,
                              exclude=[Ball((0.0, 0.0, 0.0), 0.5)]).value
    # int_{1/2 < |y| < 1} |y|^{-1} dy = 2 pi (1 - 1/4)
    assert holed == pytest.approx(2 * math.pi * 0.75, rel=1e-6)
    assert holed < full


def test_two_level_difference_bounds_error(sublow3_family):
    fam = sublow3_family
    x = fam.centers[0] + 0.3 * fam.radii[0] * np.array([0.0, 1.0, 0.0])
    a, b, diff = two_level(fam, x, 1.0, 1.0, spec=QuadratureSpec(max_depth=3))
    s = riesz_convolution(fam, x, 1.0, 1.0)
    assert diff <= 5e-3 * abs(b) * 10
    assert s.value == pytest.approx(b, rel=2e-2)


def test_field_with_integrable_pole():
    class Pole:
        features = ()

        def __call__(self, pts):
            return 1.0 / np.linalg.norm(pts, axis=1)

    # evaluation at the pole of the field itself is fine: u^lam is integrable there
    s = riesz_convolution(Pole(), [0.3, 0, 0], 1.0, 1.0)
    assert np.isfinite(s.value) and s.value > 0


@pytest.mark.parametrize("kw", [dict(alpha=3.0, lam=1.0), dict(alpha=1.0, lam=0.0)])
def test_domain_errors(kw):
    with pytest.raises(ParameterError):
        riesz_convolution(ConstantField(), [0, 0, 0], **kw)


def test_spec_validation():
    with pytest.raises(ParameterError):
        QuadratureSpec(max_depth=0)
    with pytest.raises(ParameterError):
        QuadratureSpec(target_rel=0.0)


def test_deterministic():
    a = riesz_convolution(ConstantField(), [0.1, 0.4, 0.2], 1.3, 1.0)
    b = riesz_convolution(ConstantField(), [0.1, 0.4, 0.2], 1.3, 1.0)
    assert a == b
