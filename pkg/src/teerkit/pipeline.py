"""Automatic segmentation: posteriors to speech, speech plus embeddings to speakers."""

from __future__ import annotations

from collections.abc import Sequence

from teerkit.clustering import (
    EmbeddingWindow,
    cosine_affinity,
    labels_to_annotation,
    make_windows,
    spectral_cluster,
)
from teerkit.config import Config
from teerkit.errors import DataError
from teerkit.timeline import Annotation, Timeline, TimeSpan
from teerkit.vad import FramePosteriorTrack, merge_windows, postprocess


def vad_merge(tracks: Sequence[FramePosteriorTrack], config: Config = Config()) -> Timeline:
    speech = merge_windows(tracks, config.vad_window, config.vad_hop, config.vad_threshold)
    return postprocess(speech, config.min_duration, config.postprocess_order)


def match_embeddings(
    windows: Sequence[TimeSpan], embeddings: Sequence[EmbeddingWindow]
) -> list[EmbeddingWindow]:
    """Embedding for each window: the record overlapping it most (earliest on ties)."""
    ordered = sorted(embeddings, key=lambda e: e.span)
    out = []
    j = 0
    for w in windows:
        while j < len(ordered) and ordered[j].span.end_us <= w.start_us:
            j += 1
        best, best_ov = None, 0
        k = j
        while k < len(ordered) and ordered[k].span.start_us < w.end_us:
            ov = ordered[k].span.overlap_us(w)
            if ov > best_ov:
                best, best_ov = ordered[k], ov
            k += 1
        if best is None:
            raise DataError(f"no embedding overlaps window [{w.start:g}, {w.end:g})")
        out.append(EmbeddingWindow(w, best.vector))
    return out


def diarize(
    speech: Timeline,
    embeddings: Sequence[EmbeddingWindow],
    recording_id: str = "",
    config: Config = Config(),
) -> Annotation:
    windows = make_windows(speech, config.emb_window, config.emb_overlap)
    if not windows:
        return Annotation(recording_id)
    matched = match_embeddings(windows, embeddings)
    if len(matched) == 1:
        labels = [0]
    else:
        k = config.num_speakers
        if k is not None:
            k = min(k, len(matched))
        labels = spectral_cluster(
            cosine_affinity(matched), k=k, k_max=config.k_max, seed=config.seed
        )
    return labels_to_annotation(matched, labels, recording_id)
