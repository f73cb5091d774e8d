"""Exact interval arithmetic over time spans, timelines and annotations.

Times are held as integer microseconds so that every union, intersection and
duration sum is exact.  Conversion from seconds rounds to the nearest
microsecond; all public accessors report seconds as floats.
"""

from __future__ import annotations

import bisect
import enum
from collections import defaultdict
from collections.abc import Callable, Iterable, Iterator, Sequence
from dataclasses import dataclass, field

from teerkit.errors import DataError

US_PER_S = 1_000_000


def to_us(seconds: float) -> int:
    """Round a time in seconds to integer microseconds."""
    return int(round(seconds * US_PER_S))


def to_s(us: int) -> float:
    return us / US_PER_S


class EmotionLabel(str, enum.Enum):
    HAPPY = "happy"
    SAD = "sad"
    ANGRY = "angry"
    NEUTRAL = "neutral"
    OTHER = "other"
    NMA = "NMA"

    @classmethod
    def parse(cls, value: str | EmotionLabel) -> EmotionLabel:
        if isinstance(value, cls):
            return value
        try:
            return cls(value)
        except ValueError:
            raise DataError(
                f"unknown emotion label {value!r}; expected one of "
                + ", ".join(e.value for e in cls)
            ) from None

    def __str__(self) -> str:
        return self.value


EMOTIONS: tuple[EmotionLabel, ...] = tuple(EmotionLabel)
FOUR_WAY: tuple[EmotionLabel, ...] = (
    EmotionLabel.HAPPY,
    EmotionLabel.SAD,
    EmotionLabel.ANGRY,
    EmotionLabel.NEUTRAL,
)


@dataclass(frozen=True, order=True)
class TimeSpan:
    """Half-open interval ``[start, end)`` in integer microseconds."""

    start_us: int
    end_us: int

    def __post_init__(self) -> None:
        if self.start_us < 0:
            raise DataError(f"negative start time {to_s(self.start_us)}")
        if self.end_us <= self.start_us:
            raise DataError(
                f"empty or inverted span [{to_s(self.start_us)}, {to_s(self.end_us)})"
            )

    @classmethod
    def from_seconds(cls, start: float, end: float) -> TimeSpan:
        return cls(to_us(start), to_us(end))

    @property
    def start(self) -> float:
        return to_s(self.start_us)

    @property
    def end(self) -> float:
        return to_s(self.end_us)

    @property
    def duration_us(self) -> int:
        return self.end_us - self.start_us

    @property
    def duration(self) -> float:
        return to_s(self.duration_us)

    @property
    def center(self) -> float:
        return (self.start + self.end) / 2

    def contains(self, other: TimeSpan) -> bool:
        return self.start_us <= other.start_us and other.end_us <= self.end_us

    def overlap_us(self, other: TimeSpan) -> int:
        return max(0, min(self.end_us, other.end_us) - max(self.start_us, other.start_us))

    def __repr__(self) -> str:
        return f"TimeSpan({self.start:g}, {self.end:g})"


def span(start: float, end: float) -> TimeSpan:
    """Shorthand for :meth:`TimeSpan.from_seconds`."""
    return TimeSpan.from_seconds(start, end)


def _normalize(spans: Iterable[TimeSpan]) -> tuple[TimeSpan, ...]:
    out: list[TimeSpan] = []
    for s in sorted(spans):
        if out and s.start_us <= out[-1].end_us:
            if s.end_us > out[-1].end_us:
                out[-1] = TimeSpan(out[-1].start_us, s.end_us)
        else:
            out.append(s)
    return tuple(out)


class Timeline:
    """Sorted, disjoint, non-adjacent set of spans.

    Any iterable of spans is accepted; overlapping and touching spans are
    merged at construction.
    """

    __slots__ = ("spans",)

    def __init__(self, spans: Iterable[TimeSpan] = ()):
        self.spans: tuple[TimeSpan, ...] = _normalize(spans)

    @classmethod
    def from_seconds(cls, pairs: Iterable[tuple[float, float]]) -> Timeline:
        return cls(span(s, e) for s, e in pairs)

    def __iter__(self) -> Iterator[TimeSpan]:
        return iter(self.spans)

    def __len__(self) -> int:
        return len(self.spans)

    def __bool__(self) -> bool:
        return bool(self.spans)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Timeline):
            return NotImplemented
        return self.spans == other.spans

    def __hash__(self) -> int:
        return hash(self.spans)

    def __repr__(self) -> str:
        inner = ", ".join(f"({s.start:g}, {s.end:g})" for s in self.spans)
        return f"Timeline([{inner}])"

    @property
    def duration_us(self) -> int:
        return sum(s.duration_us for s in self.spans)

    @property
    def duration(self) -> float:
        return to_s(self.duration_us)

    def to_seconds(self) -> list[tuple[float, float]]:
        return [(s.start, s.end) for s in self.spans]

    def gaps(self) -> Timeline:
        """Internal gaps between consecutive spans."""
        return Timeline(
            TimeSpan(a.end_us, b.start_us) for a, b in zip(self.spans, self.spans[1:])
        )

    def extent(self) -> TimeSpan | None:
        if not self.spans:
            return None
        return TimeSpan(self.spans[0].start_us, self.spans[-1].end_us)

    def union(self, other: Timeline) -> Timeline:
        return timeline_union(self, other)

    def intersect(self, other: Timeline) -> Timeline:
        return timeline_intersect(self, other)

    def subtract(self, other: Timeline) -> Timeline:
        return timeline_subtract(self, other)

    __or__ = union
    __and__ = intersect
    __sub__ = subtract


def _combine(a: Timeline, b: Timeline, keep: Callable[[bool, bool], bool]) -> Timeline:
    bounds = sorted({t for s in (*a.spans, *b.spans) for t in (s.start_us, s.end_us)})
    out = []
    ia = ib = 0
    for lo, hi in zip(bounds, bounds[1:]):
        while ia < len(a.spans) and a.spans[ia].end_us <= lo:
            ia += 1
        while ib < len(b.spans) and b.spans[ib].end_us <= lo:
            ib += 1
        in_a = ia < len(a.spans) and a.spans[ia].start_us <= lo
        in_b = ib < len(b.spans) and b.spans[ib].start_us <= lo
        if keep(in_a, in_b):
            out.append(TimeSpan(lo, hi))
    return Timeline(out)


def timeline_union(a: Timeline, b: Timeline) -> Timeline:
    return Timeline((*a.spans, *b.spans))


def timeline_intersect(a: Timeline, b: Timeline) -> Timeline:
    return _combine(a, b, lambda x, y: x and y)


def timeline_subtract(a: Timeline, b: Timeline) -> Timeline:
    return _combine(a, b, lambda x, y: x and not y)


@dataclass(frozen=True)
class RichSegment:
    """A span with speaker, and optionally emotion and words."""

    span: TimeSpan
    speaker: str
    emotion: EmotionLabel | None = None
    words: tuple[str, ...] | None = None

    def __post_init__(self) -> None:
        if not self.speaker:
            raise DataError("segment speaker label must be non-empty")
        if self.emotion is not None and not isinstance(self.emotion, EmotionLabel):
            object.__setattr__(self, "emotion", EmotionLabel.parse(self.emotion))
        if self.words is not None and not isinstance(self.words, tuple):
            object.__setattr__(self, "words", tuple(self.words))

    @property
    def start(self) -> float:
        return self.span.start

    @property
    def end(self) -> float:
        return self.span.end


@dataclass(frozen=True)
class Annotation:
    """All segments of one recording.

    Segments of one speaker must be pairwise disjoint; different speakers may
    overlap.  Segments are stored sorted by (start, end, speaker).
    """

    recording_id: str
    segments: tuple[RichSegment, ...] = field(default=())

    def __post_init__(self) -> None:
        segs = tuple(sorted(self.segments, key=lambda s: (s.span, s.speaker)))
        object.__setattr__(self, "segments", segs)
        last_end: dict[str, int] = {}
        for seg in segs:
            prev = last_end.get(seg.speaker)
            if prev is not None and seg.span.start_us < prev:
                raise DataError(
                    f"{self.recording_id}: overlapping segments for speaker "
                    f"{seg.speaker!r} at {seg.start:g}s"
                )
            last_end[seg.speaker] = max(prev or 0, seg.span.end_us)

    def __len__(self) -> int:
        return len(self.segments)

    def __iter__(self) -> Iterator[RichSegment]:
        return iter(self.segments)

    @property
    def speakers(self) -> list[str]:
        return sorted({s.speaker for s in self.segments})

    def speech(self) -> Timeline:
        """Union of all segments, ignoring speaker."""
        return Timeline(s.span for s in self.segments)

    def speaker_timeline(self, speaker: str) -> Timeline:
        return Timeline(s.span for s in self.segments if s.speaker == speaker)

    def by_speaker(self) -> dict[str, list[RichSegment]]:
        out: dict[str, list[RichSegment]] = defaultdict(list)
        for seg in self.segments:
            out[seg.speaker].append(seg)
        return dict(out)

    def end_us(self) -> int:
        return max((s.span.end_us for s in self.segments), default=0)

    def boundaries_us(self) -> list[int]:
        return sorted({t for s in self.segments for t in (s.span.start_us, s.span.end_us)})

    def relabel(self, mapping: dict[str, str]) -> Annotation:
        """Rename speakers; labels absent from ``mapping`` are kept."""
        return Annotation(
            self.recording_id,
            tuple(
                RichSegment(s.span, mapping.get(s.speaker, s.speaker), s.emotion, s.words)
                for s in self.segments
            ),
        )


def default_extent(*annotations: Annotation) -> TimeSpan:
    """``[0, last segment end)`` over the given annotations."""
    end = max((a.end_us() for a in annotations), default=0)
    if end == 0:
        raise DataError("cannot derive a scoring extent from empty annotations")
    return TimeSpan(0, end)


def scoring_mask(reference: Annotation, collar: float, extent: TimeSpan) -> Timeline:
    """Region of ``extent`` outside the forgiveness collar of every reference boundary."""
    if collar < 0:
        raise DataError(f"collar must be >= 0, got {collar}")
    full = Timeline([extent])
    c = to_us(collar)
    if c == 0:
        return full
    holes = Timeline(
        TimeSpan(max(0, b - c), b + c) for b in reference.boundaries_us()
    )
    return full - holes


def pieces(
    timelines: Sequence[Iterable[TimeSpan]],
) -> tuple[list[int], list[list[int]]]:
    """Elementary intervals induced by several span collections.

    Returns the sorted boundary list and, per elementary interval
    ``[bounds[i], bounds[i+1])``, the indices of every input span covering it.
    Input spans are numbered in iteration order across all collections.
    """
    flat = [s for group in timelines for s in group]
    bounds = sorted({t for s in flat for t in (s.start_us, s.end_us)})
    cover: list[list[int]] = [[] for _ in range(max(len(bounds) - 1, 0))]
    for idx, s in enumerate(flat):
        lo = bisect.bisect_left(bounds, s.start_us)
        hi = bisect.bisect_left(bounds, s.end_us)
        for i in range(lo, hi):
            cover[i].append(idx)
    return bounds, cover
