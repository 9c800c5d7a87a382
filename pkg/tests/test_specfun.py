import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from scatterkalman import specfun
from scatterkalman.specfun import DomainError, bessel_j0, bessel_y0, hankel1_0

# frozen from the extended-precision series oracle (tests/oracles.py)
J0_AT_1 = 0.765197686557967
Y0_AT_1 = 0.088256964215677


def test_oracle_frozen_values():
    assert oracles.j0_series(1.0) == pytest.approx(J0_AT_1, abs=1e-15)
    assert oracles.y0_series(1.0) == pytest.approx(Y0_AT_1, abs=1e-15)


def test_values_at_one():
    assert bessel_j0(1.0) == pytest.approx(J0_AT_1, rel=1e-13)
    assert bessel_y0(1.0) == pytest.approx(Y0_AT_1, rel=1e-13)
    assert hankel1_0(1.0) == pytest.approx(complex(J0_AT_1, Y0_AT_1), rel=1e-13)


def test_j0_small_argument_limit():
    assert bessel_j0(1e-8) == pytest.approx(1.0, abs=1e-15)


def test_y0_log_structure_bounded():
    xs = np.geomspace(1e-8, 1e-2, 20)
    remainder = bessel_y0(xs) - (2 / math.pi) * (np.log(xs / 2) + specfun.EULER_GAMMA) * bessel_j0(xs)
    assert np.all(np.abs(remainder) < 1e-4)


def test_large_argument_matches_asymptotic_form():
    ref = oracles.hankel_asymptotic(100.0)
    scale = abs(ref)
    assert abs(bessel_j0(100.0) - ref.real) <= 1e-3 * scale
    assert abs(bessel_y0(100.0) - ref.imag) <= 1e-3 * scale
    # the bare leading term is only good to about 1/(8x)
    bare = math.sqrt(2 / (math.pi * 100.0)) * np.exp(1j * (100.0 - math.pi / 4))
    assert abs(hankel1_0(100.0) - bare) <= 1.3e-3 * scale


def test_hankel_large_argument():
    assert abs(hankel1_0(100.0) - oracles.hankel_asymptotic(100.0)) <= 1e-3 * abs(hankel1_0(100.0))


def test_against_series_oracle(bessel_reference):
    xs, j0, y0 = bessel_reference
    ref = j0 + 1j * y0
    got = hankel1_0(xs)
    rel = np.abs(got - ref) / np.abs(ref)
    assert rel.max() <= 1e-12
    # individual parts, measured against the Hankel modulus since J0 and Y0 have zeros
    assert np.max(np.abs(bessel_j0(xs) - j0) / np.abs(ref)) <= 1e-12
    assert np.max(np.abs(bessel_y0(xs) - y0) / np.abs(ref)) <= 1e-12


@pytest.mark.parametrize("x", [specfun.SERIES_MAX, specfun.ASYMPTOTIC_MIN])
def test_bands_agree_at_crossovers(x):
    below = np.array([np.nextafter(x, 0)])
    above = np.array([np.nextafter(x, np.inf)])
    for a, b in zip(specfun.bessel_all(below), specfun.bessel_all(above)):
        assert a[0] == pytest.approx(b[0], rel=1e-12, abs=1e-13)


def test_wronskian():
    xs = np.geomspace(1e-3, 200.0, 100)
    j0, y0, j1, y1 = specfun.bessel_all(xs)
    # J0 Y0' - J0' Y0 with J0' = -J1, Y0' = -Y1
    w = -j0 * y1 + j1 * y0
    np.testing.assert_allclose(w, 2 / (math.pi * xs), rtol=1e-10)


@given(st.floats(min_value=1e-3, max_value=200.0))
@settings(max_examples=200, deadline=None)
def test_hankel_parts_are_exactly_the_bessel_values(x):
    h = hankel1_0(x)
    assert h.real == bessel_j0(x)
    assert h.imag == bessel_y0(x)


@pytest.mark.parametrize("bad", [0.0, -1.0, float("nan"), float("inf")])
@pytest.mark.parametrize("fn", [bessel_j0, bessel_y0, hankel1_0])
def test_domain_errors(fn, bad):
    with pytest.raises(DomainError):
        fn(bad)


def test_array_shape_preserved():
    x = np.linspace(0.5, 40, 12).reshape(3, 4)
    assert hankel1_0(x).shape == (3, 4)
    assert isinstance(bessel_j0(2.0), float)
