from __future__ import annotations

import numpy as np
from hypothesis import settings
from hypothesis import strategies as st

from teerkit.timeline import EMOTIONS, Annotation, RichSegment, Timeline, TimeSpan

settings.register_profile("default", deadline=None, max_examples=150)
settings.load_profile("default")

MS = 1000  # microseconds per millisecond


@st.composite
def ms_timelines(draw, horizon_ms: int = 200, max_spans: int = 6) -> Timeline:
    """Timelines whose boundaries sit on whole milliseconds in [0, horizon)."""
    n = draw(st.integers(0, max_spans))
    spans = []
    for _ in range(n):
        a = draw(st.integers(0, horizon_ms - 1))
        b = draw(st.integers(a + 1, horizon_ms))
        spans.append(TimeSpan(a * MS, b * MS))
    return Timeline(spans)


def mask_ms(tl: Timeline, horizon_ms: int) -> np.ndarray:
    out = np.zeros(horizon_ms, dtype=bool)
    for s in tl:
        out[s.start_us // MS : s.end_us // MS] = True
    return out


def timeline_from_mask(mask: np.ndarray) -> Timeline:
    spans = []
    start = None
    for i, v in enumerate(list(mask) + [False]):
        if v and start is None:
            start = i
        elif not v and start is not None:
            spans.append(TimeSpan(start * MS, i * MS))
            start = None
    return Timeline(spans)


def random_annotation(
    rng: np.random.Generator,
    speakers: list[str],
    length: float = 20.0,
    emotions: bool = True,
    rec: str = "r",
    off_grid: bool = False,
) -> Annotation:
    """Segments per speaker with boundaries on a 10 ms grid; speakers may overlap.

    With ``off_grid`` every boundary is nudged by up to 9 ms so it falls
    between grid points.
    """
    ticks = int(round(length / 0.01))
    segs = []
    for spk in speakers:
        t = int(rng.integers(0, 50))
        while t < ticks - 10:
            end = min(t + int(rng.integers(10, 400)), ticks)
            a, b = t * 10_000, end * 10_000
            if off_grid:
                a += int(rng.integers(1, 9_000))
                b += int(rng.integers(1, 9_000))
            emo = EMOTIONS[int(rng.integers(len(EMOTIONS)))] if emotions else None
            segs.append(RichSegment(TimeSpan(a, b), spk, emo))
            t = end + int(rng.integers(2, 300))
    return Annotation(rec, tuple(segs))
