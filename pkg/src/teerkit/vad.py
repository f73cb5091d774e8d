"""Frame posteriors over sliding windows to a clean speech timeline."""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass
from typing import Literal

import numpy as np

from teerkit.errors import DataError
from teerkit.timeline import Timeline, TimeSpan, to_us

DEFAULT_FRAME_PERIOD = 0.02


@dataclass(frozen=True, eq=False)
class FramePosteriorTrack:
    """Speech probabilities for consecutive frames of one analysis window.

    Frame ``i`` covers ``[start + i*frame_period, start + (i+1)*frame_period)``.
    """

    start: float
    probs: np.ndarray
    frame_period: float = DEFAULT_FRAME_PERIOD

    def __post_init__(self) -> None:
        probs = np.asarray(self.probs, dtype=float)
        if probs.ndim != 1 or probs.size == 0:
            raise DataError("posterior track needs a non-empty 1-d probability array")
        if not np.all(np.isfinite(probs)):
            raise DataError("posterior track contains non-finite probabilities")
        bad = np.flatnonzero((probs < 0) | (probs > 1))
        if bad.size:
            raise DataError(
                f"probability {probs[bad[0]]!r} at frame {bad[0]} outside [0, 1]"
            )
        if not self.frame_period > 0:
            raise DataError(f"frame period must be positive, got {self.frame_period}")
        if self.start < 0:
            raise DataError(f"negative window start {self.start}")
        probs.setflags(write=False)
        object.__setattr__(self, "probs", probs)

    @property
    def start_us(self) -> int:
        return to_us(self.start)

    @property
    def frame_us(self) -> int:
        return to_us(self.frame_period)

    @property
    def window_span(self) -> TimeSpan:
        return TimeSpan(self.start_us, self.start_us + len(self.probs) * self.frame_us)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, FramePosteriorTrack):
            return NotImplemented
        return (
            self.start_us == other.start_us
            and self.frame_us == other.frame_us
            and np.array_equal(self.probs, other.probs)
        )


@dataclass(frozen=True)
class WindowedDecision:
    window_span: TimeSpan
    kept_span: TimeSpan
    frame_labels: tuple[bool, ...]

    def __post_init__(self) -> None:
        if not self.window_span.contains(self.kept_span):
            raise AssertionError(f"kept span {self.kept_span} outside {self.window_span}")


def threshold_posteriors(track: FramePosteriorTrack, threshold: float = 0.5) -> np.ndarray:
    """Boolean speech label per frame; a probability equal to the threshold is speech."""
    if not 0 < threshold < 1 or not math.isfinite(threshold):
        raise DataError(f"threshold must lie in (0, 1), got {threshold}")
    probs = np.asarray(track.probs, dtype=float)
    if not np.all(np.isfinite(probs)):
        raise DataError("non-finite posterior probability")
    return probs >= threshold


def frames_to_timeline(
    labels: Sequence[bool] | np.ndarray, start_us: int, frame_us: int, clip: TimeSpan | None = None
) -> Timeline:
    labels = np.asarray(labels, dtype=bool)
    padded = np.concatenate(([False], labels, [False])).astype(np.int8)
    edges = np.flatnonzero(np.diff(padded))
    spans = []
    for on, off in zip(edges[::2], edges[1::2]):
        lo = start_us + int(on) * frame_us
        hi = start_us + int(off) * frame_us
        if clip is not None:
            lo, hi = max(lo, clip.start_us), min(hi, clip.end_us)
        if hi > lo:
            spans.append(TimeSpan(lo, hi))
    return Timeline(spans)


def kept_spans(
    windows: Sequence[TimeSpan], window_length: float = 3.0, hop: float = 1.0
) -> list[TimeSpan]:
    """Portion of each window whose decisions survive merging.

    Interior windows keep their centred hop-length slice; the first window
    also keeps its leading context and the last window its trailing part.
    Raises AssertionError if the kept spans fail to tile the windows' extent.
    """
    if not windows:
        return []
    lead = to_us((window_length - hop) / 2)
    hop_us = to_us(hop)
    n = len(windows)
    kept = []
    for i, w in enumerate(windows):
        lo = w.start_us if i == 0 else w.start_us + lead
        hi = w.end_us if i == n - 1 else w.start_us + lead + hop_us
        hi = min(hi, w.end_us)
        if hi <= lo:
            raise AssertionError(f"window {i} at {w.start:g}s keeps nothing")
        kept.append(TimeSpan(lo, hi))
    for a, b in zip(kept, kept[1:]):
        if a.end_us != b.start_us:
            raise AssertionError(
                f"kept spans do not tile: {a} followed by {b}"
            )
    return kept


def merge_windows(
    tracks: Sequence[FramePosteriorTrack],
    window_length: float = 3.0,
    hop: float = 1.0,
    threshold: float = 0.5,
) -> Timeline:
    """Speech timeline assembled from the kept portion of each window."""
    return Timeline(
        s
        for d in windowed_decisions(tracks, window_length, hop, threshold)
        for s in frames_to_timeline(
            d.frame_labels,
            d.window_span.start_us,
            (d.window_span.duration_us // len(d.frame_labels)),
            clip=d.kept_span,
        )
    )


def windowed_decisions(
    tracks: Sequence[FramePosteriorTrack],
    window_length: float = 3.0,
    hop: float = 1.0,
    threshold: float = 0.5,
) -> list[WindowedDecision]:
    if not tracks:
        return []
    tracks = sorted(tracks, key=lambda t: t.start_us)
    hop_us = to_us(hop)
    for a, b in zip(tracks, tracks[1:]):
        if b.start_us - a.start_us != hop_us:
            raise DataError(
                f"window starts {a.start:g}s and {b.start:g}s are not one hop ({hop:g}s) apart"
            )
    windows = [t.window_span for t in tracks]
    kept = kept_spans(windows, window_length, hop)
    return [
        WindowedDecision(w, k, tuple(bool(x) for x in threshold_posteriors(t, threshold)))
        for t, w, k in zip(tracks, windows, kept)
    ]


def _fill_gaps(speech: Timeline, min_us: int) -> Timeline:
    short = [g for g in speech.gaps() if g.duration_us < min_us]
    return speech | Timeline(short)


def _drop_islands(speech: Timeline, min_us: int) -> Timeline:
    return Timeline(s for s in speech if s.duration_us >= min_us)


def postprocess(
    speech: Timeline,
    min_duration: float = 0.25,
    order: Literal["fill-first", "drop-first"] = "fill-first",
) -> Timeline:
    """Remove speech islands and internal silences shorter than ``min_duration``."""
    if min_duration < 0:
        raise DataError(f"min_duration must be >= 0, got {min_duration}")
    min_us = to_us(min_duration)
    if order == "fill-first":
        return _drop_islands(_fill_gaps(speech, min_us), min_us)
    if order == "drop-first":
        return _fill_gaps(_drop_islands(speech, min_us), min_us)
    raise DataError(f"unknown post-processing order {order!r}")


def sliding_windows(
    extent: TimeSpan, window_length: float = 3.0, hop: float = 1.0
) -> list[TimeSpan]:
    """Window spans covering ``extent``, the last one truncated at its end."""
    length_us, hop_us = to_us(window_length), to_us(hop)
    out = []
    start = extent.start_us
    while True:
        end = min(start + length_us, extent.end_us)
        out.append(TimeSpan(start, end))
        if end >= extent.end_us:
            return out
        start += hop_us
