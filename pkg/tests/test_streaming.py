import numpy as np
import pytest

from wodkit.config import PipelineConfig
from wodkit.errors import ConfigError, DataError
from wodkit.streaming import StreamConfig, StreamDetector, run_window

NAMES = ("a", "b")


def stream(n, seed=0):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(n, 2))
    X[::7] += 6.0
    return X


def detector(capacity=4, mode="tumbling", stride=1, **over):
    cfg = PipelineConfig({"cluster.k": 1, "score.min_pts": 1, "weighting.scheme": "uniform", **over})
    return StreamDetector(StreamConfig(capacity, mode, stride, cfg), NAMES)


def push_all(det, X):
    out = []
    for i, row in enumerate(X):
        v = det.push(row, str(i))
        if v is not None:
            out.append((i + 1, v))
        assert len(det) <= det.cfg.capacity
    return out


def test_tumbling_window_arithmetic():
    got = push_all(detector(4), stream(8))
    assert [p for p, _ in got] == [4, 8]
    assert got[0][1].row_ids == ("0", "1", "2", "3") and got[1][1].row_ids == ("4", "5", "6", "7")


def test_sliding_window_arithmetic():
    got = push_all(detector(4, "sliding", 2), stream(8))
    assert [p for p, _ in got] == [4, 6, 8]
    assert got[1][1].row_ids == ("2", "3", "4", "5")


@pytest.mark.parametrize("capacity,over", [
    (4, {}),
    (16, {"cluster.k": 2, "weighting.scheme": "pattern_frequency"}),
    (25, {"cluster.k": 3, "cluster.seed": 11, "weighting.scheme": "knn_distance", "weighting.k": 3}),
])
def test_tumbling_equals_batch(capacity, over):
    X = stream(3 * capacity + 1, seed=capacity)
    det = detector(capacity, **over)
    verdicts = [v for _, v in push_all(det, X)]
    base = det.cfg.pipeline
    for w, v in enumerate(verdicts):
        ids = [str(i) for i in range(w * capacity, (w + 1) * capacity)]
        ref = run_window(X[w * capacity:(w + 1) * capacity], ids, NAMES, base, w)
        assert v.window == w
        np.testing.assert_array_equal(v.result.scores, ref.result.scores)
        np.testing.assert_array_equal(v.result.flags, ref.result.flags)
        assert v.result.threshold == ref.result.threshold


def test_flush_partial_and_idempotent():
    det = detector(4)
    assert det.flush() is None and det.unprocessed == 0
    push_all(det, stream(3))
    v = det.flush()
    assert v is not None and v.partial and len(v.row_ids) == 3
    assert det.flush() is None


def test_flush_too_few_rows_reports_count():
    det = detector(8, **{"cluster.k": 2, "score.min_pts": 3})
    push_all(det, stream(3))
    assert det.flush() is None and det.unprocessed == 3


def test_every_row_covered_tumbling_and_sliding():
    X = stream(23)
    det = detector(5)
    seen = [r for _, v in push_all(det, X) for r in v.row_ids]
    tail = det.flush()
    seen += list(tail.row_ids)
    assert sorted(seen, key=int) == [str(i) for i in range(23)]

    det = detector(6, "sliding", 2)
    counts = {}
    for _, v in push_all(det, X):
        for r in v.row_ids:
            counts[r] = counts.get(r, 0) + 1
    assert max(counts.values()) <= 3  # ceil(6 / 2)


def test_push_dimension_mismatch():
    with pytest.raises(DataError):
        detector(4).push([1.0, 2.0, 3.0], "x")


def test_stream_config_validation():
    cfg = PipelineConfig()
    with pytest.raises(ConfigError):
        StreamConfig(1, "tumbling", 1, cfg)
    with pytest.raises(ConfigError):
        StreamConfig(4, "sliding", 5, cfg)
    with pytest.raises(ConfigError):
        StreamConfig(4, "hopping", 1, cfg)
