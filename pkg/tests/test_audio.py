import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from avfusion.audio import (
    BCE_EPS,
    LabeledCrop,
    LossWeights,
    aggregate_max,
    class_weights,
    clip_score,
    derive_boundary_labels,
    derive_frame_labels,
    dynamic_label,
    joint_loss,
    pad_and_crop,
    sliding_windows,
)
from avfusion.core import FrameScoreSeries, TimeInterval

from oracles import dynamic_label_raster, frame_overlap_labels


def pairs(windows):
    return [w.as_pair() for w in windows]


class TestPadAndCrop:
    def test_direct_window(self):
        spec = pad_and_crop(10, 2, 3)
        assert spec.crop.as_pair() == (3, 5) and not spec.tiled

    def test_short_source_is_tiled(self):
        spec = pad_and_crop(1.2, 2, 0)
        assert spec.crop.as_pair() == (0, 2) and spec.tiled

    def test_exact_fit(self):
        spec = pad_and_crop(2, 2, 0)
        assert spec.crop.as_pair() == (0, 2) and not spec.tiled

    def test_decimal_offsets_stay_decimal(self):
        assert pad_and_crop(10, 2, 0.3).crop.end_s == 2.3

    @pytest.mark.parametrize("target", [0, -1])
    def test_bad_target(self, target):
        with pytest.raises(ValueError):
            pad_and_crop(10, target, 0)

    def test_offset_past_end(self):
        with pytest.raises(ValueError):
            pad_and_crop(10, 2, 8.5)


class TestDynamicLabel:
    def test_no_forged_segments_keeps_label(self):
        for offset in (0, 3, 8):
            assert dynamic_label(0, [], pad_and_crop(10, 2, offset)).label == 0

    def test_short_fake_audio_is_fake(self):
        forged = [TimeInterval(0.1, 0.3)]
        assert dynamic_label(1, forged, pad_and_crop(1.2, 2, 0)).label == 1

    def test_overlap_decides(self):
        forged = [TimeInterval(6, 7)]
        assert dynamic_label(1, forged, pad_and_crop(10, 2, 3)).label == 0
        assert dynamic_label(1, forged, pad_and_crop(10, 2, 5.5)).label == 1

    def test_touching_crop_is_real(self):
        forged = [TimeInterval(6, 7)]
        assert dynamic_label(1, forged, pad_and_crop(10, 2, 4)).label == 0
        assert dynamic_label(1, forged, pad_and_crop(10, 2, 7)).label == 0

    def test_forged_outside_source(self):
        with pytest.raises(ValueError):
            dynamic_label(1, [TimeInterval(9, 11)], pad_and_crop(10, 2, 0))

    @settings(max_examples=300, deadline=None)
    @given(st.data())
    def test_matches_raster_oracle(self, data):
        duration_ms = data.draw(st.integers(300, 10_000))
        k = data.draw(st.integers(0, 3))
        forged_ms = []
        for _ in range(k):
            s = data.draw(st.integers(0, duration_ms - 1))
            e = data.draw(st.integers(s + 1, duration_ms))
            forged_ms.append((s, e))
        offset_steps = max(0, (duration_ms - 2000) // 100)
        step = data.draw(st.integers(0, offset_steps))
        forged = [TimeInterval(s / 1000, e / 1000) for s, e in forged_ms]
        spec = pad_and_crop(duration_ms / 1000, 2.0, step / 10)
        got = dynamic_label(1 if forged else 0, forged, spec).label
        assert got == dynamic_label_raster(1 if forged else 0, forged_ms, duration_ms, step * 100, 2000)


class TestClassWeights:
    def crops(self, n_real, n_fake):
        c = TimeInterval(0, 2)
        return [LabeledCrop(c, 0)] * n_real + [LabeledCrop(c, 1)] * n_fake

    def test_balanced(self):
        w = class_weights(self.crops(50, 50))
        assert (w.class_weight_real, w.class_weight_fake) == (1.0, 1.0)

    def test_imbalanced(self):
        w = class_weights(self.crops(80, 20))
        assert w.class_weight_real == pytest.approx(0.4)
        assert w.class_weight_fake == pytest.approx(1.6)

    def test_degenerate(self):
        with pytest.raises(ValueError):
            class_weights(self.crops(10, 0))
        with pytest.raises(ValueError):
            class_weights(self.crops(0, 3))

    @given(st.integers(1, 500), st.integers(1, 500))
    def test_ratio_and_mean(self, n_real, n_fake):
        w = class_weights(self.crops(n_real, n_fake))
        assert w.class_weight_real / w.class_weight_fake == pytest.approx(n_fake / n_real)
        assert (w.class_weight_real + w.class_weight_fake) / 2 == pytest.approx(1.0)


class TestSlidingWindows:
    def test_five_seconds(self):
        assert pairs(sliding_windows(5)) == [(0, 2), (1, 3), (2, 4), (3, 5)]

    def test_exact_window(self):
        assert pairs(sliding_windows(2)) == [(0, 2)]

    def test_remainder_is_back_extended(self):
        assert pairs(sliding_windows(4.5)) == [(0, 2), (1, 3), (2, 4), (2.5, 4.5)]

    def test_short_clip(self):
        (w,) = sliding_windows(1.2)
        assert w.as_pair() == (0, 1.2) and w.length < 2

    @pytest.mark.parametrize("args", [(0, 2, 1), (5, 0, 1), (5, 2, 0), (5, 2, 3)])
    def test_bad_arguments(self, args):
        with pytest.raises(ValueError):
            sliding_windows(*args)

    @given(
        st.floats(0.1, 60),
        st.sampled_from([(2.0, 1.0), (2.0, 2.0), (2.0, 0.5), (3.0, 1.5), (1.0, 0.25)]),
    )
    def test_coverage_and_strides(self, duration, ws):
        window, stride = ws
        wins = sliding_windows(duration, window, stride)
        assert wins[0].start_s == 0.0
        assert wins[-1].end_s == pytest.approx(duration)
        for a, b in zip(wins, wins[1:]):
            assert b.start_s <= a.end_s  # no gap
        for a, b in zip(wins[:-2], wins[1:-1]):
            assert b.start_s - a.start_s == pytest.approx(stride)
        if duration >= window:
            assert all(w.length == pytest.approx(window) for w in wins)


class TestAggregateMax:
    @pytest.mark.parametrize(
        "scores, expected", [([0.1, 0.9, 0.3], 0.9), ([0.5], 0.5), ([0.0, 0.0], 0.0)]
    )
    def test_examples(self, scores, expected):
        assert aggregate_max(scores) == expected

    def test_empty(self):
        with pytest.raises(ValueError):
            aggregate_max([])

    @given(st.lists(st.floats(0, 1), min_size=1), st.data())
    def test_monotone(self, scores, data):
        base = aggregate_max(scores)
        assert all(base >= s for s in scores)
        i = data.draw(st.integers(0, len(scores) - 1))
        raised = list(scores)
        raised[i] = data.draw(st.floats(scores[i], 1))
        assert aggregate_max(raised) >= base


class TestClipScore:
    def test_partial_forgery_hits_one(self):
        scores = [0.0] * 250
        scores[100:105] = [1.0] * 5
        assert clip_score(FrameScoreSeries(25, tuple(scores))) == 1.0

    def test_real_clip(self):
        assert clip_score(FrameScoreSeries(25, (0.0,) * 130)) == 0.0

    def test_short_clip(self):
        assert clip_score(FrameScoreSeries(25, (0.2, 0.7, 0.1))) == 0.7


class TestFrameLabels:
    def test_segment_frames(self):
        y = derive_frame_labels([TimeInterval(0.4, 0.6)], 25, 25)
        assert np.flatnonzero(y).tolist() == [10, 11, 12, 13, 14]

    def test_no_forgery(self):
        assert derive_frame_labels([], 25, 30).sum() == 0

    def test_full_forgery(self):
        assert derive_frame_labels([TimeInterval(0, 2.0)], 25, 50).tolist() == [1] * 50

    @given(
        st.lists(
            st.tuples(st.integers(0, 999), st.integers(1, 400)).map(
                lambda t: (t[0] / 100, (t[0] + t[1]) / 100)
            ),
            max_size=4,
        ),
        st.sampled_from([10, 25, 30, 50]),
    )
    def test_matches_rational_oracle(self, forged, fps):
        n = 15 * fps
        got = derive_frame_labels([TimeInterval(s, e) for s, e in forged], fps, n)
        assert got.tolist() == frame_overlap_labels(forged, fps, n)


class TestBoundaryLabels:
    def test_both_sides_of_transition(self):
        assert derive_boundary_labels([0, 0, 1, 1, 0]).tolist() == [0, 1, 1, 1, 1]

    def test_constant(self):
        assert derive_boundary_labels([1, 1, 1]).tolist() == [0, 0, 0]

    def test_pair(self):
        assert derive_boundary_labels([0, 1]).tolist() == [1, 1]

    def test_empty(self):
        with pytest.raises(ValueError):
            derive_boundary_labels([])

    @given(st.lists(st.integers(0, 1), min_size=1, max_size=200))
    def test_zero_iff_constant(self, y):
        b = derive_boundary_labels(y)
        assert (b.sum() == 0) == (len(set(y)) == 1)

    @given(st.lists(st.integers(2, 20), min_size=1, max_size=20), st.integers(0, 1))
    def test_two_marks_per_isolated_transition(self, run_lengths, first):
        y = [(first + k) % 2 for k, n in enumerate(run_lengths) for _ in range(n)]
        b = derive_boundary_labels(y)
        assert b.sum() == 2 * (len(run_lengths) - 1)


class TestJointLoss:
    def test_perfect_predictions(self):
        Y = [0, 1, 1, 0]
        B = [0, 1, 0, 1]
        loss = joint_loss(Y, Y, B, B)
        assert 0 <= loss <= 2 * BCE_EPS * abs(math.log(BCE_EPS))

    def test_formula_arithmetic(self):
        # single-frame vectors whose BCE is exactly 0.6 and 0.4
        loss = joint_loss([math.exp(-0.6)], [1], [math.exp(-0.4)], [1])
        assert loss == pytest.approx(0.6 + 0.5 * 0.4, abs=1e-12)

    def test_uniform_half(self):
        loss = joint_loss([0.5] * 6, [0, 1, 1, 0, 1, 0], [0.5] * 6, [0, 1, 0, 1, 1, 0])
        assert loss == pytest.approx(1.5 * math.log(2), abs=1e-12)

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            joint_loss([0.5, 0.5], [1], [0.5], [1])

    def test_class_weights_scale_terms(self):
        w = LossWeights(lambda_boundary=0.0, class_weight_real=0.5, class_weight_fake=2.0)
        loss = joint_loss([0.5, 0.5], [0, 1], [0.5, 0.5], [0, 0], w)
        assert loss == pytest.approx((0.5 + 2.0) / 2 * math.log(2))

    @given(
        st.lists(st.tuples(st.floats(0.01, 0.99), st.integers(0, 1)), min_size=1, max_size=50),
        st.lists(st.tuples(st.floats(0.01, 0.99), st.integers(0, 1)), min_size=1, max_size=50),
    )
    def test_lambda_zero_is_frame_term(self, frames, bounds):
        y_hat, Y = zip(*frames)
        b_hat, B = zip(*bounds)
        no_b = joint_loss(y_hat, Y, b_hat, B, LossWeights(lambda_boundary=0.0))
        other_b = joint_loss(y_hat, Y, [0.5] * len(B), B, LossWeights(lambda_boundary=0.0))
        assert no_b == other_b
        assert no_b >= 0

    @given(
        st.lists(st.tuples(st.floats(0.05, 0.95), st.integers(0, 1)), min_size=1, max_size=30),
        st.data(),
    )
    def test_moving_toward_label_decreases(self, frames, data):
        y_hat, Y = (list(v) for v in zip(*frames))
        B = [0] * len(Y)
        before = joint_loss(y_hat, Y, [0.3] * len(B), B)
        i = data.draw(st.integers(0, len(Y) - 1))
        y_hat[i] += 0.01 if Y[i] == 1 else -0.01
        assert joint_loss(y_hat, Y, [0.3] * len(B), B) < before
