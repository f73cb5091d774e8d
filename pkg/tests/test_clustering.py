import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from teerkit import DataError
from teerkit.clustering import (
    EmbeddingWindow,
    cosine_affinity,
    kmeans,
    labels_to_annotation,
    make_windows,
    spectral_cluster,
)
from teerkit.timeline import Timeline, TimeSpan, span


def planted(rng, n_a, n_b, dim=16, noise=0.03):
    """Two clusters around orthogonal unit means."""
    q, _ = np.linalg.qr(rng.normal(size=(dim, 2)))
    means = q.T
    truth = np.array([0] * n_a + [1] * n_b)
    rng.shuffle(truth)
    vecs = means[truth] + noise * rng.normal(size=(truth.size, dim))
    windows = [EmbeddingWindow(span(i, i + 1), v) for i, v in enumerate(vecs)]
    return windows, truth


def same_partition(a, b):
    return len(set(zip(a, b))) == len(set(a)) == len(set(b))


def test_make_windows_examples():
    assert make_windows(Timeline([span(0, 2.2)])) == [
        span(0, 1), span(0.5, 1.5), span(1, 2), span(1.2, 2.2)
    ]
    assert make_windows(Timeline([span(0, 0.6)])) == [span(0, 0.6)]
    assert make_windows(Timeline([span(0, 1)])) == [span(0, 1)]


@given(st.lists(st.tuples(st.integers(0, 400), st.integers(1, 400)), max_size=5))
def test_make_windows_cover_each_region(raw):
    speech = Timeline(TimeSpan(a * 10_000, (a + d) * 10_000) for a, d in raw)
    ws = make_windows(speech)
    assert Timeline(ws) == speech
    for w in ws:
        assert w.duration_us <= 1_000_000
        assert any(r.contains(w) for r in speech)


def test_affinity_examples():
    e = [
        EmbeddingWindow(span(0, 1), [1.0, 0.0]),
        EmbeddingWindow(span(1, 2), [2.0, 0.0]),
        EmbeddingWindow(span(2, 3), [0.0, 3.0]),
        EmbeddingWindow(span(3, 4), [-1.0, 0.0]),
    ]
    a = cosine_affinity(e)
    assert a[0, 1] == pytest.approx(1.0)
    assert a[0, 2] == pytest.approx(0.5)
    assert a[0, 3] == pytest.approx(0.0)
    assert np.array_equal(a, a.T)


def test_affinity_recomputed_directly():
    rng = np.random.default_rng(3)
    vecs = rng.normal(size=(7, 5))
    a = cosine_affinity([EmbeddingWindow(span(i, i + 1), v) for i, v in enumerate(vecs)])
    for i, j in itertools.product(range(7), repeat=2):
        cos = vecs[i] @ vecs[j] / np.sqrt((vecs[i] @ vecs[i]) * (vecs[j] @ vecs[j]))
        assert a[i, j] == pytest.approx((cos + 1) / 2, abs=1e-12)


def test_affinity_errors():
    with pytest.raises(DataError):
        cosine_affinity([EmbeddingWindow(span(0, 1), [1.0])])
    with pytest.raises(DataError):
        cosine_affinity([EmbeddingWindow(span(0, 1), [1.0]), EmbeddingWindow(span(1, 2), [1.0, 0.0])])
    with pytest.raises(DataError):
        EmbeddingWindow(span(0, 1), [0.0, 0.0])
    with pytest.raises(DataError):
        EmbeddingWindow(span(0, 1), [np.inf, 0.0])


@pytest.mark.parametrize("seed", range(10))
def test_planted_clusters_recovered(seed):
    rng = np.random.default_rng(seed)
    windows, truth = planted(rng, 12, 15)
    labels = spectral_cluster(cosine_affinity(windows))
    assert len(set(labels)) == 2
    assert same_partition(labels, truth)


def test_three_planted_clusters():
    rng = np.random.default_rng(7)
    q, _ = np.linalg.qr(rng.normal(size=(8, 3)))
    truth = np.repeat([0, 1, 2], 10)
    vecs = q.T[truth] + 0.03 * rng.normal(size=(30, 8))
    windows = [EmbeddingWindow(span(i, i + 1), v) for i, v in enumerate(vecs)]
    labels = spectral_cluster(cosine_affinity(windows))
    assert same_partition(labels, truth)


def test_degenerate_k():
    rng = np.random.default_rng(0)
    windows, _ = planted(rng, 3, 3)
    a = cosine_affinity(windows)
    assert spectral_cluster(a, k=1).tolist() == [0] * 6
    assert sorted(spectral_cluster(a, k=6).tolist()) == list(range(6))


def test_spectral_errors():
    with pytest.raises(DataError):
        spectral_cluster(np.ones((2, 3)))
    with pytest.raises(DataError):
        spectral_cluster(np.array([[1.0, 0.2], [0.3, 1.0]]))
    with pytest.raises(DataError):
        spectral_cluster(np.eye(3), k=4)
    with pytest.raises(DataError):
        spectral_cluster(np.eye(10), k=9, k_max=8)


def test_permutation_of_windows_permutes_labels():
    rng = np.random.default_rng(5)
    windows, _ = planted(rng, 10, 10)
    a = cosine_affinity(windows)
    base = spectral_cluster(a)
    perm = rng.permutation(len(windows))
    moved = spectral_cluster(a[np.ix_(perm, perm)])
    assert same_partition(base[perm], moved)


def test_kmeans_deterministic():
    x = np.random.default_rng(2).normal(size=(40, 3))
    assert np.array_equal(kmeans(x, 3, seed=0), kmeans(x, 3, seed=0))


def test_labels_to_annotation_examples():
    one = labels_to_annotation([span(0, 1)], [0], "r")
    assert [(s.span, s.speaker) for s in one] == [(span(0, 1), "spk0")]
    two = labels_to_annotation([span(0, 1), span(0.5, 1.5)], [1, 1], "r")
    assert [(s.span, s.speaker) for s in two] == [(span(0, 1.5), "spk1")]
    split = labels_to_annotation([span(0, 1), span(0.5, 1.5)], [0, 1], "r")
    # centres 0.5 and 1.0: the equidistant microsecond at 0.75 goes to the earlier window
    assert [(s.span, s.speaker) for s in split] == [
        (TimeSpan(0, 750_001), "spk0"),
        (TimeSpan(750_001, 1_500_000), "spk1"),
    ]
    with pytest.raises(DataError):
        labels_to_annotation([span(0, 1)], [0, 1])


def grid_labels(windows, labels, step):
    """Label per grid instant ``k * step`` by scanning every covering window."""
    end = max(w.end_us for w in windows)
    out = {}
    for t in range(0, end, step):
        best = None
        for i, w in enumerate(windows):
            if w.start_us <= t < w.end_us:
                d = abs(2 * t - (w.start_us + w.end_us))
                key = (d, w.start_us + w.end_us, i)
                if best is None or key < best[0]:
                    best = (key, labels[i])
        if best is not None:
            out[t] = f"spk{best[1]}"
    return out


@pytest.mark.parametrize("seed", range(15))
def test_labels_to_annotation_matches_grid(seed):
    rng = np.random.default_rng(seed)
    speech = Timeline(
        TimeSpan(int(a) * 10_000, int(a + d) * 10_000)
        for a, d in zip(rng.integers(0, 800, 5), rng.integers(20, 300, 5))
    )
    windows = make_windows(speech)
    labels = rng.integers(0, 3, len(windows)).tolist()
    ann = labels_to_annotation(windows, labels)
    want = grid_labels(windows, labels, 1_000)
    got = {}
    for seg in ann:
        for t in range(seg.span.start_us - seg.span.start_us % 1_000, seg.span.end_us, 1_000):
            if t >= seg.span.start_us:
                got[t] = seg.speaker
    assert got == want
