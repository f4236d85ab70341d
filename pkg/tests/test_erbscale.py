import numpy as np
import pytest
from hypothesis import given, strategies as st

from hisim.erbscale import (erb_bandwidth, erb_rate_derivative, erb_rate_to_hz,
                            hz_to_erb_rate)


def test_bandwidth_at_dc():
    assert erb_bandwidth(0.0) == pytest.approx(24.7)


def test_bandwidth_reference_values():
    assert erb_bandwidth(1000.0) == pytest.approx(132.64, abs=0.01)
    assert erb_bandwidth(4000.0) == pytest.approx(456.46, abs=0.01)


def test_bandwidth_rejects_negative():
    with pytest.raises(ValueError):
        erb_bandwidth(-1.0)


def test_erb_rate_at_dc():
    assert hz_to_erb_rate(0.0) == 0.0
    assert erb_rate_to_hz(0.0) == 0.0


def test_erb_rate_reference_value():
    assert hz_to_erb_rate(1000.0) == pytest.approx(15.62, abs=0.01)


def test_inverse_reference_value():
    assert erb_rate_to_hz(hz_to_erb_rate(1000.0)) == pytest.approx(1000.0, abs=0.01)


def test_round_trip_grid():
    freqs = np.geomspace(20.0, 20000.0, 200)
    back = erb_rate_to_hz(hz_to_erb_rate(freqs))
    assert np.max(np.abs(back - freqs) / freqs) < 1e-9


def test_specific_round_trip():
    assert erb_rate_to_hz(hz_to_erb_rate(2345.0)) == pytest.approx(2345.0, abs=1e-6)


def test_negative_inputs_rejected():
    for fn in (hz_to_erb_rate, erb_rate_to_hz):
        with pytest.raises(ValueError):
            fn(-0.5)


@given(st.floats(min_value=1.0, max_value=20000.0),
       st.floats(min_value=1.0, max_value=20000.0))
def test_monotonicity(f1, f2):
    lo, hi = sorted((f1, f2))
    if hi - lo < 1e-9 * hi:   # below float granularity of the conversion
        return
    assert hz_to_erb_rate(lo) < hz_to_erb_rate(hi)
    assert erb_bandwidth(lo) < erb_bandwidth(hi)


@given(st.floats(min_value=0.1, max_value=33.0))
def test_inverse_monotonicity(e):
    assert erb_rate_to_hz(e) < erb_rate_to_hz(e + 0.1)


def test_derivative_matches_finite_differences():
    freqs = np.geomspace(30.0, 18000.0, 50)
    h = 1e-3
    numeric = (hz_to_erb_rate(freqs + h) - hz_to_erb_rate(freqs - h)) / (2 * h)
    analytic = erb_rate_derivative(freqs)
    assert np.max(np.abs(numeric - analytic) / analytic) < 1e-6
