import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from avfusion.core import (
    Category,
    FrameScoreSeries,
    TimeInterval,
    VideoMeta,
    frames_to_intervals,
    merge_touching,
    overlaps,
    partition_timeline,
    rasterize,
    resample_series,
)


def iv(a, b):
    return TimeInterval(a, b)


class TestTimeInterval:
    def test_rejects_empty_and_reversed(self):
        with pytest.raises(ValueError):
            iv(1.0, 1.0)
        with pytest.raises(ValueError):
            iv(2.0, 1.0)

    def test_rejects_negative_start(self):
        with pytest.raises(ValueError):
            iv(-0.5, 1.0)

    def test_length(self):
        assert iv(1.5, 4.0).length == 2.5


@pytest.mark.parametrize(
    "a, b, expected",
    [
        ((0, 2), (1, 3), True),
        ((0, 1), (1, 2), False),
        ((3, 5), (6, 7), False),
        ((0, 10), (4, 5), True),
    ],
)
def test_overlaps_examples(a, b, expected):
    assert overlaps(iv(*a), iv(*b)) is expected
    assert overlaps(iv(*b), iv(*a)) is expected


intervals = st.tuples(
    st.floats(0, 100, allow_nan=False), st.floats(0.001, 50, allow_nan=False)
).map(lambda t: TimeInterval(t[0], t[0] + t[1]))


@given(intervals, intervals)
def test_overlaps_symmetric(a, b):
    assert overlaps(a, b) == overlaps(b, a)


@given(intervals, st.floats(0.001, 10))
def test_touching_never_overlaps(a, length):
    after = TimeInterval(a.end_s, a.end_s + length)
    assert not overlaps(a, after)


class TestPartitionTimeline:
    def test_sorts_and_dedupes(self):
        parts = partition_timeline({1, 3, 2, 5}, 6)
        assert [p.as_pair() for p in parts] == [(0, 1), (1, 2), (2, 3), (3, 5), (5, 6)]

    def test_no_boundaries(self):
        assert [p.as_pair() for p in partition_timeline([], 4)] == [(0, 4)]

    def test_duplicates(self):
        assert [p.as_pair() for p in partition_timeline([2, 2], 4)] == [(0, 2), (2, 4)]

    def test_near_duplicates_within_tolerance(self):
        parts = partition_timeline([2.0, 2.0 + 1e-12, 4.0 - 1e-12], 4.0)
        assert [p.as_pair() for p in parts] == [(0, 2), (2, 4)]

    @pytest.mark.parametrize("bad", [[-1.0], [7.0]])
    def test_out_of_range(self, bad):
        with pytest.raises(ValueError):
            partition_timeline(bad, 6)

    def test_nonpositive_duration(self):
        with pytest.raises(ValueError):
            partition_timeline([], 0)

    @given(st.lists(st.floats(0, 30, allow_nan=False), max_size=40), st.floats(0.01, 30))
    def test_covers_exactly(self, points, duration):
        points = [min(p, duration) for p in points]
        parts = partition_timeline(points, duration)
        assert parts[0].start_s == 0.0 and parts[-1].end_s == duration
        for a, b in zip(parts, parts[1:]):
            assert a.end_s == b.start_s
        assert math.isclose(sum(p.length for p in parts), duration, abs_tol=1e-9)


class TestFramesToIntervals:
    def test_single_run(self):
        segs = frames_to_intervals(FrameScoreSeries(25, (0.1, 0.9, 0.9, 0.1)), 0.5)
        assert len(segs) == 1
        assert segs[0].interval.as_pair() == pytest.approx((0.04, 0.12))
        assert segs[0].confidence == pytest.approx(0.9)

    def test_nothing_above_threshold(self):
        assert frames_to_intervals(FrameScoreSeries(25, (0.1, 0.2, 0.3)), 0.5) == []

    def test_everything_above_threshold(self):
        scores = (0.6, 0.9, 0.7, 1.0)
        segs = frames_to_intervals(FrameScoreSeries(25, scores), 0.5)
        assert [s.interval.as_pair() for s in segs] == [(0.0, 0.16)]
        assert segs[0].confidence == pytest.approx(np.mean(scores))

    def test_threshold_is_inclusive(self):
        segs = frames_to_intervals(FrameScoreSeries(10, (0.5, 0.4)), 0.5)
        assert [s.interval.as_pair() for s in segs] == [(0.0, 0.1)]

    def test_empty_series(self):
        with pytest.raises(ValueError):
            frames_to_intervals(FrameScoreSeries(25, ()), 0.5)

    @settings(max_examples=200)
    @given(
        st.lists(st.floats(0, 1), min_size=1, max_size=300),
        st.sampled_from([10.0, 24.0, 25.0, 29.97, 30.0, 50.0]),
        st.floats(0, 1),
    )
    def test_rasterizing_back_reproduces_mask(self, scores, fps, thr):
        series = FrameScoreSeries(fps, tuple(scores))
        segs = frames_to_intervals(series, thr)
        mask = rasterize([s.interval for s in segs], fps, len(scores))
        np.testing.assert_array_equal(mask, (np.asarray(scores) >= thr).astype(np.int8))

    @given(st.lists(st.floats(0, 1), min_size=1, max_size=200), st.floats(0, 1))
    def test_runs_are_sorted_and_disjoint(self, scores, thr):
        segs = frames_to_intervals(FrameScoreSeries(25, tuple(scores)), thr)
        for a, b in zip(segs, segs[1:]):
            assert a.end_s < b.start_s


class TestResample:
    def test_identity(self):
        s = FrameScoreSeries(25, (0.1, 0.7, 0.3))
        assert resample_series(s, 25) == s

    def test_downsample(self):
        out = resample_series(FrameScoreSeries(50, (0.2, 0.2, 0.8, 0.8)), 25)
        assert out.fps == 25 and out.scores == (0.2, 0.8)

    def test_upsample(self):
        out = resample_series(FrameScoreSeries(25, (0.4,)), 50)
        assert out.scores == (0.4, 0.4)

    def test_length_is_ceiling_of_duration(self):
        out = resample_series(FrameScoreSeries(30, (0.1,) * 3), 25)
        assert len(out) == math.ceil(3 / 30 * 25)

    def test_errors(self):
        with pytest.raises(ValueError):
            resample_series(FrameScoreSeries(25, ()), 25)
        with pytest.raises(ValueError):
            resample_series(FrameScoreSeries(25, (0.1,)), 0)

    @given(
        st.lists(st.floats(0, 1), min_size=1, max_size=100),
        st.sampled_from([12.5, 24.0, 25.0, 30.0, 50.0]),
        st.sampled_from([10.0, 25.0, 29.97, 60.0]),
    )
    def test_range_and_idempotence(self, scores, fps, target):
        out = resample_series(FrameScoreSeries(fps, tuple(scores)), target)
        assert all(0.0 <= s <= 1.0 for s in out.scores)
        assert set(out.scores) <= set(scores)
        assert resample_series(out, target) == out


class TestVideoMeta:
    def test_labels_and_category_follow_segments(self):
        m = VideoMeta("v", 10.0, (iv(1, 2),), ())
        assert (m.audio_label, m.visual_label, m.label) == (1, 0, 1)
        assert m.category is Category.FAKE_AUDIO_REAL_VISUAL

    def test_real_video(self):
        m = VideoMeta("v", 5.0)
        assert m.category is Category.REAL_AUDIO_REAL_VISUAL and m.label == 0

    def test_full_forgery(self):
        m = VideoMeta("v", 5.0, (), (iv(0, 5.0),))
        assert m.is_fully_forged("visual") and not m.is_fully_forged("audio")

    def test_segment_outside_duration(self):
        with pytest.raises(ValueError):
            VideoMeta("v", 5.0, (iv(4, 6),))

    def test_category_labels_roundtrip(self):
        for cat in Category:
            assert Category.from_labels(*cat.labels) is cat


def test_merge_touching_joins_touching_and_overlapping():
    merged = merge_touching([iv(3, 4), iv(0, 1), iv(1, 2), iv(3.5, 5)])
    assert [m.as_pair() for m in merged] == [(0, 2), (3, 5)]


def test_frame_score_range_checked():
    with pytest.raises(ValueError):
        FrameScoreSeries(25, (0.5, 1.5))
    with pytest.raises(ValueError):
        FrameScoreSeries(0, (0.5,))
