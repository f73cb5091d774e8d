"""Speaker clustering of per-window embeddings into a diarisation."""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from teerkit.errors import DataError
from teerkit.timeline import Annotation, RichSegment, Timeline, TimeSpan, to_us


@dataclass(frozen=True, eq=False)
class EmbeddingWindow:
    span: TimeSpan
    vector: np.ndarray

    def __post_init__(self) -> None:
        v = np.asarray(self.vector, dtype=float)
        if v.ndim != 1 or v.size == 0:
            raise DataError("embedding must be a non-empty 1-d vector")
        if not np.all(np.isfinite(v)):
            raise DataError(f"non-finite embedding value in window {self.span}")
        if not np.any(v):
            raise DataError(f"zero-norm embedding in window {self.span}")
        v.setflags(write=False)
        object.__setattr__(self, "vector", v)

    @property
    def dim(self) -> int:
        return self.vector.size

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, EmbeddingWindow):
            return NotImplemented
        return self.span == other.span and np.array_equal(self.vector, other.vector)


def make_windows(speech: Timeline, length: float = 1.0, overlap: float = 0.5) -> list[TimeSpan]:
    """Fixed-length windows inside each speech region.

    Windows advance by ``length - overlap``; the last window of a region is
    right-aligned to the region end, and a region shorter than ``length``
    becomes a single window.
    """
    length_us = to_us(length)
    hop_us = length_us - to_us(overlap)
    if length_us <= 0 or hop_us <= 0:
        raise DataError("window length must exceed the overlap and be positive")
    out = []
    for region in speech:
        if region.duration_us <= length_us:
            out.append(region)
            continue
        start = region.start_us
        while start + length_us < region.end_us:
            out.append(TimeSpan(start, start + length_us))
            start += hop_us
        out.append(TimeSpan(region.end_us - length_us, region.end_us))
    return out


def _stack(windows: Sequence[EmbeddingWindow]) -> np.ndarray:
    dims = {w.dim for w in windows}
    if len(dims) > 1:
        raise DataError(f"embedding dimensions differ: {sorted(dims)}")
    return np.vstack([w.vector for w in windows])


def cosine_affinity(windows: Sequence[EmbeddingWindow]) -> np.ndarray:
    """Pairwise cosine similarity mapped to ``[0, 1]`` by ``(cos + 1) / 2``."""
    if len(windows) < 2:
        raise DataError("affinity needs at least two windows")
    x = _stack(windows)
    x = x / np.linalg.norm(x, axis=1, keepdims=True)
    cos = np.clip(x @ x.T, -1.0, 1.0)
    cos = (cos + cos.T) / 2
    np.fill_diagonal(cos, 1.0)
    return (cos + 1.0) / 2.0


def kmeans(
    points: np.ndarray,
    k: int,
    seed: int = 0,
    n_init: int = 10,
    max_iter: int = 300,
    tol: float = 1e-10,
) -> np.ndarray:
    """Lloyd's k-means with k-means++ seeding; lowest-inertia restart wins."""
    n = points.shape[0]
    if not 1 <= k <= n:
        raise DataError(f"cannot form {k} clusters from {n} points")
    rng = np.random.default_rng(seed)
    best_labels, best_inertia = None, np.inf
    for _ in range(n_init):
        centers = _kmeans_pp(points, k, rng)
        labels = np.zeros(n, dtype=int)
        for _ in range(max_iter):
            d2 = ((points[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
            labels = d2.argmin(axis=1)
            new = centers.copy()
            for j in range(k):
                members = points[labels == j]
                if len(members):
                    new[j] = members.mean(axis=0)
            shift = ((new - centers) ** 2).sum()
            centers = new
            if shift <= tol:
                break
        d2 = ((points[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
        labels = d2.argmin(axis=1)
        inertia = d2[np.arange(n), labels].sum()
        if inertia < best_inertia:
            best_labels, best_inertia = labels, inertia
    return best_labels


def _kmeans_pp(points: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = points.shape[0]
    centers = [points[rng.integers(n)]]
    d2 = ((points - centers[0]) ** 2).sum(axis=1)
    for _ in range(1, k):
        total = d2.sum()
        if total <= 0:
            idx = int(rng.integers(n))
        else:
            idx = int(rng.choice(n, p=d2 / total))
        centers.append(points[idx])
        d2 = np.minimum(d2, ((points - points[idx]) ** 2).sum(axis=1))
    return np.array(centers, dtype=float)


def _canonical(labels: np.ndarray) -> np.ndarray:
    """Renumber labels by first appearance so the output is order-stable."""
    remap: dict[int, int] = {}
    for lab in labels:
        remap.setdefault(int(lab), len(remap))
    return np.array([remap[int(lab)] for lab in labels], dtype=int)


def estimate_num_clusters(eigenvalues: np.ndarray, k_max: int) -> int:
    """Index of the largest gap among the ``k_max`` smallest Laplacian eigenvalues."""
    vals = np.sort(eigenvalues)[: max(k_max, 1)]
    if len(vals) < 2:
        return 1
    return int(np.argmax(np.diff(vals))) + 1


def spectral_cluster(
    affinity: np.ndarray,
    k: int | None = None,
    k_max: int = 8,
    seed: int = 0,
    floor: float = 0.5,
) -> np.ndarray:
    """Cluster label in ``0..k-1`` for every row of ``affinity``.

    Affinities at or below ``floor`` are treated as unrelated: entries are
    rescaled by ``max(0, (a - floor) / (1 - floor))`` before building the
    normalised Laplacian.  With the default floor this undoes the
    ``(cos + 1) / 2`` shift of :func:`cosine_affinity`, which otherwise leaves
    a dense 0.5 background that hides the eigengap.  Pass ``floor=0`` to use
    the affinity unchanged.
    """
    a = np.asarray(affinity, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DataError("affinity must be a square matrix")
    if not np.allclose(a, a.T, atol=1e-12):
        raise DataError("affinity must be symmetric")
    n = a.shape[0]
    if k is not None and not 1 <= k <= k_max:
        raise DataError(f"k={k} outside [1, k_max={k_max}]")
    if k is not None and k > n:
        raise DataError(f"cannot form {k} clusters from {n} windows")
    if n == 1 or k == 1:
        return np.zeros(n, dtype=int)
    if not 0 <= floor < 1:
        raise DataError(f"floor must lie in [0, 1), got {floor}")

    w = np.clip((a - floor) / (1 - floor), 0.0, None)
    w = (w + w.T) / 2
    deg = w.sum(axis=1)
    inv_sqrt = np.where(deg > 0, 1.0 / np.sqrt(np.where(deg > 0, deg, 1.0)), 0.0)
    lap = np.eye(n) - inv_sqrt[:, None] * w * inv_sqrt[None, :]
    lap = (lap + lap.T) / 2
    vals, vecs = np.linalg.eigh(lap)
    if k is None:
        k = estimate_num_clusters(vals, min(k_max, n))
    if k == 1:
        return np.zeros(n, dtype=int)
    if k == n:
        return np.arange(n)
    emb = vecs[:, :k]
    norms = np.linalg.norm(emb, axis=1, keepdims=True)
    emb = emb / np.where(norms > 0, norms, 1.0)
    return _canonical(kmeans(emb, k, seed=seed))


def labels_to_annotation(
    windows: Sequence[EmbeddingWindow | TimeSpan],
    labels: Sequence[int],
    recording_id: str = "",
) -> Annotation:
    """Diarisation from labelled windows.

    Every instant covered by at least one window takes the label of the
    covering window whose centre is nearest; on a tie the earlier window wins.
    Consecutive instants with the same label form one ``spk<label>`` segment.
    """
    if len(windows) != len(labels):
        raise DataError(f"{len(windows)} windows but {len(labels)} labels")
    spans = [w.span if isinstance(w, EmbeddingWindow) else w for w in windows]
    order = sorted(range(len(spans)), key=lambda i: (spans[i], i))
    spans = [spans[i] for i in order]
    labs = [int(labels[i]) for i in order]
    # doubled microseconds keep window centres integral
    centers2 = [s.start_us + s.end_us for s in spans]

    bounds = sorted({t for s in spans for t in (s.start_us, s.end_us)})
    pieces: list[tuple[int, int, int]] = []
    active: list[int] = []
    nxt = 0
    for lo, hi in zip(bounds, bounds[1:]):
        active = [i for i in active if spans[i].end_us > lo]
        while nxt < len(spans) and spans[nxt].start_us <= lo:
            if spans[nxt].end_us > lo:
                active.append(nxt)
            nxt += 1
        if not active:
            continue
        cuts = _nearest_center_cuts(lo, hi, sorted(active, key=lambda i: (centers2[i], i)), centers2)
        for a, b, i in cuts:
            pieces.append((a, b, labs[i]))

    segments = []
    for a, b, lab in pieces:
        if segments and segments[-1][2] == lab and segments[-1][1] == a:
            segments[-1][1] = b
        else:
            segments.append([a, b, lab])
    return Annotation(
        recording_id,
        tuple(RichSegment(TimeSpan(a, b), f"spk{lab}") for a, b, lab in segments),
    )


def _nearest_center_cuts(
    lo: int, hi: int, cands: list[int], centers2: list[int]
) -> list[tuple[int, int, int]]:
    # drop candidates whose centre coincides with an earlier-indexed one
    uniq: list[int] = []
    for i in cands:
        if uniq and centers2[uniq[-1]] == centers2[i]:
            if i < uniq[-1]:
                uniq[-1] = i
            continue
        uniq.append(i)
    out = []
    cur = lo
    for j, i in enumerate(uniq):
        if j + 1 < len(uniq):
            mid4 = centers2[i] + centers2[uniq[j + 1]]
            # instants t with 4t <= mid4 are no farther from the left centre
            end = min(hi, mid4 // 4 + 1)
        else:
            end = hi
        if end > cur:
            out.append((cur, end, i))
            cur = end
        if cur >= hi:
            break
    return out
