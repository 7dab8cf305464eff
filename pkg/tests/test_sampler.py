import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from reprologit.core import SupportSet, ThetaPoint, ValidationError
from reprologit.sampler import (
    RngStream,
    draw_ar_gaussian,
    draw_logistic,
    draw_uniform,
    synth_response,
)


def logistic_cdf(t):
    return 1.0 / (1.0 + np.exp(-t))


class TestDrawLogistic:
    def test_inverse_cdf_values(self):
        # u = 0.5 maps to the median 0; u = 0.9 maps to log 9
        assert math.log(0.5 / 0.5) == 0.0
        assert math.log(0.9 / 0.1) == pytest.approx(2.19722, abs=1e-5)
        # draws are the inverse CDF applied to the stream's uniforms
        stream = RngStream(seed=123, stream_id=5)
        u = draw_uniform(stream, 1000)
        eps = draw_logistic(stream, 1000)
        assert np.allclose(eps, np.log(u) - np.log1p(-u))

    def test_ks_distance(self):
        eps = np.sort(draw_logistic(RngStream(seed=2024, stream_id=0), 100_000))
        n = eps.shape[0]
        cdf = logistic_cdf(eps)
        upper = np.max(np.arange(1, n + 1) / n - cdf)
        lower = np.max(cdf - np.arange(0, n) / n)
        assert max(upper, lower) < 0.01

    def test_determinism_bit_identical(self):
        a = draw_logistic(RngStream(seed=9, stream_id=77), 4096)
        b = draw_logistic(RngStream(seed=9, stream_id=77), 4096)
        assert a.tobytes() == b.tobytes()

    def test_stream_independence(self):
        n = 100_000
        a = draw_logistic(RngStream(seed=5, stream_id=1), n)
        b = draw_logistic(RngStream(seed=5, stream_id=2), n)
        assert abs(np.corrcoef(a, b)[0, 1]) < 0.02

    def test_rejects_zero_draws(self):
        with pytest.raises(ValidationError):
            draw_logistic(RngStream(seed=1), 0)


class TestSynthResponse:
    def test_zero_coef_sign_of_noise(self):
        theta = ThetaPoint(support=SupportSet(()), coef=np.zeros(0))
        y = synth_response(np.zeros((2, 3)), theta, np.array([-1.0, 2.0]))
        assert list(y) == [0, 1]

    def test_single_row(self):
        theta = ThetaPoint(support=SupportSet((0,)), coef=np.array([1.0]))
        y = synth_response(np.array([[3.0]]), theta, np.array([-2.0]))
        assert list(y) == [1]

    def test_tie_maps_to_zero(self):
        theta = ThetaPoint(support=SupportSet((0,)), coef=np.array([1.0]))
        y = synth_response(np.array([[2.0]]), theta, np.array([-2.0]))
        assert list(y) == [0]

    def test_inversion_identity(self):
        # responses regenerate exactly from the same (theta, noise) pair
        rng = np.random.default_rng(11)
        x = rng.standard_normal((50, 6))
        theta = ThetaPoint(support=SupportSet((0, 2)), coef=np.array([1.5, -2.0]))
        eps = draw_logistic(RngStream(seed=3), 50)
        y1 = synth_response(x, theta, eps)
        y2 = synth_response(x, theta, eps)
        assert np.array_equal(y1, y2)

    def test_support_out_of_range(self):
        theta = ThetaPoint(support=SupportSet((5,)), coef=np.array([1.0]))
        with pytest.raises(ValidationError):
            synth_response(np.zeros((2, 3)), theta, np.zeros(2))

    @given(st.integers(0, 10_000))
    @settings(max_examples=50, deadline=None)
    def test_monotone_in_noise(self, seed):
        rng = np.random.default_rng(seed)
        x = rng.standard_normal((20, 4))
        theta = ThetaPoint(support=SupportSet((0, 3)), coef=rng.standard_normal(2))
        eps = rng.standard_normal(20)
        y_lo = synth_response(x, theta, eps)
        bump = np.zeros(20)
        bump[rng.integers(0, 20)] = abs(rng.standard_normal()) + 0.1
        y_hi = synth_response(x, theta, eps + bump)
        assert np.all(y_hi >= y_lo)


class TestArGaussian:
    def test_rho_zero_identity_cov(self):
        x = draw_ar_gaussian(RngStream(seed=1, stream_id=0), 10_000, 5, 0.0)
        cov = np.cov(x, rowvar=False)
        off = cov - np.diag(np.diag(cov))
        assert np.max(np.abs(off)) < 0.05
        assert np.max(np.abs(np.diag(cov) - 1.0)) < 0.06

    def test_rho_training_value(self):
        x = draw_ar_gaussian(RngStream(seed=2, stream_id=0), 10_000, 4, 0.2)
        cov = np.cov(x, rowvar=False)
        assert cov[0, 1] == pytest.approx(0.2, abs=0.05)
        assert cov[1, 2] == pytest.approx(0.2, abs=0.05)
        assert cov[0, 2] == pytest.approx(0.04, abs=0.05)

    def test_rho_new_observation_value(self):
        x = draw_ar_gaussian(RngStream(seed=3, stream_id=0), 10_000, 3, 0.3)
        cov = np.cov(x, rowvar=False)
        assert cov[0, 1] == pytest.approx(0.3, abs=0.05)

    def test_rejects_unit_rho(self):
        with pytest.raises(ValidationError):
            draw_ar_gaussian(RngStream(seed=1), 10, 3, 1.0)

    def test_deterministic(self):
        a = draw_ar_gaussian(RngStream(seed=4, stream_id=9), 100, 7, 0.2)
        b = draw_ar_gaussian(RngStream(seed=4, stream_id=9), 100, 7, 0.2)
        assert a.tobytes() == b.tobytes()
