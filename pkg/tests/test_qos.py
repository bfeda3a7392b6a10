import math

import numpy as np
import pytest

from edgeqos.qos import (EPANECHNIKOV, EPS, GAUSSIAN, InsufficientDataError,
                         InvalidStepError, KdeWindow, QosConfig,
                         UndefinedEpochError, epoch_rt, epoch_tp, erf_approx,
                         fuse_probabilities, kde_cdf, kde_pdf,
                         kde_pdf_incremental, violation_probabilities)


def window_of(samples, h=0.1, kernel=GAUSSIAN, W=50):
    w = KdeWindow(W=W, h=h, kernel=kernel)
    for s in samples:
        w.push(s)
    return w


class TestEpochStats:
    def test_mean_response_time(self):
        assert epoch_rt([0.2, 0.4, 0.6]) == pytest.approx(0.4)

    def test_singleton(self):
        assert epoch_rt([0.7]) == 0.7

    def test_uniform_sample_mean(self):
        rng = np.random.default_rng(11)
        rts = rng.random(100)
        assert abs(epoch_rt(list(rts)) - 0.5) < 0.1
        assert epoch_rt(list(rts)) == pytest.approx(float(np.sum(rts)) / 100)

    def test_empty_epoch_rejected(self):
        with pytest.raises(UndefinedEpochError):
            epoch_rt([])

    def test_throughput_raw(self):
        assert epoch_tp(10, 5) == 2.0

    def test_throughput_zero_tasks(self):
        assert epoch_tp(0, 5) == 0.0

    def test_throughput_normalized(self):
        assert epoch_tp(10, 5, max_tp=4.0) == 0.5

    def test_throughput_clipped_at_one(self):
        assert epoch_tp(10, 5, max_tp=1.0) == 1.0

    def test_zero_duration_rejected(self):
        with pytest.raises(UndefinedEpochError):
            epoch_tp(10, 0)


class TestErfApprox:
    def test_absolute_error_bound(self):
        xs = np.linspace(-6, 6, 4001)
        err = np.abs(erf_approx(xs) - np.array([math.erf(x) for x in xs]))
        assert err.max() <= 1.5e-7

    def test_odd_symmetry(self):
        assert erf_approx(0.0) == 0.0
        assert erf_approx(1.3) == pytest.approx(-erf_approx(-1.3), abs=1e-15)


class TestKdePdf:
    def test_single_sample_gaussian_peak(self):
        w = window_of([0.5], h=0.1)
        expected = (1.0 / 0.1) * (1.0 / math.sqrt(2 * math.pi))
        assert kde_pdf(w, 0.5) == pytest.approx(expected, abs=1e-9)
        assert expected == pytest.approx(3.989, abs=1e-3)

    def test_epanechnikov_compact_support(self):
        w = window_of([0.3, 0.5], h=0.05, kernel=EPANECHNIKOV)
        assert kde_pdf(w, 0.7) == 0.0

    def test_density_integrates_to_one(self):
        # trapezoid quadrature as the normalization oracle
        rng = np.random.default_rng(5)
        for kernel in (GAUSSIAN, EPANECHNIKOV):
            w = window_of(rng.random(50), h=0.08, kernel=kernel)
            xs = np.linspace(-3.0, 4.0, 7001)
            ys = [kde_pdf(w, x) for x in xs]
            assert np.trapezoid(ys, xs) == pytest.approx(1.0, abs=1e-3)

    def test_empty_window_rejected(self):
        with pytest.raises(InsufficientDataError):
            kde_pdf(KdeWindow(W=10, h=0.1), 0.5)


class TestKdePdfIncremental:
    def test_first_step_ignores_previous(self):
        k = (1.0 / math.sqrt(2 * math.pi)) * math.exp(-0.5 * ((0.4 - 0.6) / 0.1) ** 2)
        expected = k / 0.1
        for prev in (0.0, 5.0, -3.0):
            assert kde_pdf_incremental(prev, 0.6, 0.4, 1, 0.1) == pytest.approx(expected, abs=1e-15)

    def test_matches_batch_after_full_window(self):
        rng = np.random.default_rng(9)
        samples = rng.random(50)
        w = window_of(samples, h=0.07)
        for x in (0.1, 0.35, 0.8):
            est = 0.0
            for j, s in enumerate(samples, start=1):
                est = kde_pdf_incremental(est, s, x, j, 0.07)
            assert abs(est - kde_pdf(w, x)) <= 1e-9

    def test_identical_samples_degenerate(self):
        h = 0.1
        est = 0.0
        for j in range(1, 31):
            est = kde_pdf_incremental(est, 0.5, 0.42, j, h)
        single = kde_pdf(window_of([0.5], h=h), 0.42)
        assert est == pytest.approx(single, abs=1e-12)

    def test_invalid_step_rejected(self):
        with pytest.raises(InvalidStepError):
            kde_pdf_incremental(0.0, 0.5, 0.5, 0, 0.1)


class TestKdeCdf:
    def test_single_sample_at_query_point(self):
        assert kde_cdf(window_of([0.4]), 0.4) == pytest.approx(0.5, abs=1e-9)

    def test_right_tail_saturates(self):
        w = window_of([0.2, 0.5, 0.9], h=0.1)
        assert kde_cdf(w, 0.9 + 10 * 0.1) >= 1.0 - 1e-6

    def test_left_tail_vanishes(self):
        w = window_of([0.2, 0.5, 0.9], h=0.1)
        assert kde_cdf(w, 0.2 - 10 * 0.1) <= 1e-6

    def test_matches_closed_form_normal_mixture(self):
        # oracle: mean of exact Gaussian cdfs via the stdlib error function
        samples = [0.2, 0.4, 0.6]
        h = 0.1
        w = window_of(samples, h=h)
        oracle = np.mean([0.5 * (1 + math.erf((0.4 - s) / (h * math.sqrt(2))))
                          for s in samples])
        assert kde_cdf(w, 0.4) == pytest.approx(oracle, abs=1e-6)

    def test_monotone_and_bounded(self):
        rng = np.random.default_rng(13)
        w = window_of(rng.random(30), h=0.05)
        xs = np.linspace(-0.5, 1.5, 1000)
        vals = [kde_cdf(w, x) for x in xs]
        assert all(b - a >= -1e-15 for a, b in zip(vals, vals[1:]))
        assert all(-1e-12 <= v <= 1.0 + 1e-12 for v in vals)

    def test_uses_gaussian_even_for_epanechnikov_window(self):
        samples = [0.3, 0.5]
        we = window_of(samples, h=0.1, kernel=EPANECHNIKOV)
        wg = window_of(samples, h=0.1, kernel=GAUSSIAN)
        assert kde_cdf(we, 0.45) == kde_cdf(wg, 0.45)


class TestViolationProbabilities:
    def cfg(self, **kw):
        return QosConfig(**kw)

    def test_not_ready_signal(self):
        cfg = self.cfg(min_samples=5)
        rt = window_of([0.5] * 3)
        tp = window_of([0.5] * 3)
        assert violation_probabilities(rt, tp, cfg) is None

    def test_low_rt_means_low_violation(self):
        cfg = self.cfg()
        rt = window_of([0.05, 0.06, 0.04, 0.05], h=0.01)
        tp = window_of([0.9, 0.92, 0.88, 0.9], h=0.01)
        p_rt, p_tp = violation_probabilities(rt, tp, cfg)
        assert p_rt == pytest.approx(EPS, abs=1e-6)
        assert p_tp == pytest.approx(EPS, abs=1e-6)

    def test_low_tp_means_high_violation(self):
        cfg = self.cfg()
        rt = window_of([0.9, 0.95, 0.92, 0.9], h=0.01)
        tp = window_of([0.05, 0.04, 0.06, 0.05], h=0.01)
        p_rt, p_tp = violation_probabilities(rt, tp, cfg)
        assert p_rt == pytest.approx(1.0 - EPS, abs=1e-6)
        assert p_tp == pytest.approx(1.0 - EPS, abs=1e-6)

    def test_symmetric_samples_near_half(self):
        cfg = self.cfg()
        th = cfg.threshold_rt
        rt = window_of([th - 0.1, th - 0.05, th + 0.05, th + 0.1], h=0.05)
        tp = window_of([0.5] * 4, h=0.05)
        p_rt, _ = violation_probabilities(rt, tp, cfg)
        assert p_rt == pytest.approx(0.5, abs=1e-3)


class TestFusion:
    def test_half_half(self):
        assert fuse_probabilities(0.5, 0.5, 0.5, 0.5) == pytest.approx(0.5, abs=1e-15)

    def test_idempotent_at_equal_inputs(self):
        for p in np.linspace(0.01, 0.99, 25):
            assert abs(fuse_probabilities(p, p, 0.5, 0.5) - p) <= 1e-12

    def test_worked_example(self):
        # direct evaluation: sqrt(0.48) / (sqrt(0.48) + sqrt(0.08))
        expected = math.sqrt(0.48) / (math.sqrt(0.48) + math.sqrt(0.08))
        got = fuse_probabilities(0.8, 0.6, 0.5, 0.5)
        assert got == pytest.approx(expected, abs=1e-12)
        assert got == pytest.approx(0.7101, abs=1e-4)

    def test_weight_degenerate_reduction(self):
        for p_rt in (0.1, 0.25, 0.5, 0.77, 0.93):
            assert fuse_probabilities(p_rt, 0.3, 1.0, 0.0) == p_rt

    def test_monotone_in_each_argument(self):
        grid = np.linspace(EPS, 1 - EPS, 50)
        for q in (0.2, 0.6):
            vals = [fuse_probabilities(p, q, 0.5, 0.5) for p in grid]
            assert all(b >= a for a, b in zip(vals, vals[1:]))
            vals = [fuse_probabilities(q, p, 0.5, 0.5) for p in grid]
            assert all(b >= a for a, b in zip(vals, vals[1:]))

    def test_output_strictly_inside_unit_interval(self):
        for p in (EPS, 0.5, 1 - EPS):
            for q in (EPS, 0.5, 1 - EPS):
                v = fuse_probabilities(p, q, 0.5, 0.5)
                assert 0.0 < v < 1.0


class TestQosConfig:
    def test_default_thresholds_shared(self):
        cfg = QosConfig()
        assert cfg.th == 0.3
        assert cfg.threshold_rt == 0.3
        assert cfg.threshold_tp == 0.3

    def test_per_parameter_override(self):
        cfg = QosConfig(th_rt=0.4)
        assert cfg.threshold_rt == 0.4
        assert cfg.threshold_tp == 0.3

    def test_rejects_bad_threshold(self):
        with pytest.raises(ValueError):
            QosConfig(th=1.5)

    def test_rejects_bad_weights(self):
        with pytest.raises(ValueError):
            QosConfig(w_rt=0.8, w_tp=0.8)
        with pytest.raises(ValueError):
            QosConfig(w_rt=-0.5, w_tp=1.5)

    def test_window_factory(self):
        w = QosConfig(window=10, bandwidth=0.2).make_window()
        assert w.W == 10
        assert w.bandwidth() == 0.2


class TestBandwidth:
    def test_silverman_default_with_floor(self):
        w = KdeWindow(W=50)
        w.push(0.5)
        assert w.bandwidth() == 0.01  # floor with < 2 samples
        for v in (0.5,) * 10:
            w.push(v)
        assert w.bandwidth() == 0.01  # zero variance hits the floor

    def test_silverman_scales_with_spread(self):
        rng = np.random.default_rng(3)
        w = KdeWindow(W=50)
        data = rng.random(50)
        for v in data:
            w.push(v)
        expected = max(0.01, 1.06 * float(np.std(data)) * 50 ** (-0.2))
        assert w.bandwidth() == pytest.approx(expected)
