"""Parsers and canonical writers for the toolkit's text formats.

RTTM
    ``SPEAKER <rec> <chan> <onset> <dur> <NA> <NA> <speaker> <NA> <NA>``.
    Lines of any other type and ``;;`` comments are skipped.
Rich segments (JSON lines)
    ``{"recording_id", "start", "end", "speaker", "emotion"?, "words"?}``.
Posteriors (CSV)
    ``start,frame_period,p0,p1,...`` per analysis window.
Embeddings (CSV)
    ``start,end,v0,...,v{d-1}`` per window.

The CSV formats accept ``# recording_id=<id>`` header lines; rows after a
header belong to that recording.  Times are written with six decimals and
parsed to the nearest microsecond, so writing a parsed canonical file
reproduces it byte for byte.
"""

from __future__ import annotations

import json
import math
from collections.abc import Iterable, Mapping, Sequence

import numpy as np

from teerkit.clustering import EmbeddingWindow
from teerkit.errors import DataError, ParseError
from teerkit.timeline import (
    Annotation,
    EmotionLabel,
    RichSegment,
    Timeline,
    TimeSpan,
    to_us,
)
from teerkit.vad import FramePosteriorTrack

NA = "<NA>"


def format_time(us: int) -> str:
    """Six-decimal seconds rendered exactly from integer microseconds."""
    sign = "-" if us < 0 else ""
    q, r = divmod(abs(us), 1_000_000)
    return f"{sign}{q}.{r:06d}"


def _float(tok: str, line: int, column: int, what: str) -> float:
    try:
        v = float(tok)
    except ValueError:
        raise ParseError(f"{what} {tok!r} is not a number", line, column) from None
    if not math.isfinite(v):
        raise ParseError(f"{what} {tok!r} is not finite", line, column)
    return v


def _lines(text: str) -> Iterable[tuple[int, str]]:
    for n, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if line:
            yield n, line


def _group(
    recs: Mapping[str, list[RichSegment]], lines: Mapping[str, int]
) -> list[Annotation]:
    out = []
    for rec in sorted(recs):
        try:
            out.append(Annotation(rec, tuple(recs[rec])))
        except DataError as e:
            raise ParseError(str(e), lines[rec]) from None
    return out


# -- RTTM ---------------------------------------------------------------------


def parse_rttm(text: str) -> list[Annotation]:
    recs: dict[str, list[RichSegment]] = {}
    first_line: dict[str, int] = {}
    for n, line in _lines(text):
        if line.startswith(";;"):
            continue
        f = line.split()
        if f[0] != "SPEAKER":
            continue
        if len(f) < 8:
            raise ParseError(f"expected at least 8 fields, got {len(f)}", n)
        onset = _float(f[3], n, 4, "onset")
        dur = _float(f[4], n, 5, "duration")
        if onset < 0:
            raise ParseError(f"negative onset {f[3]}", n, 4)
        if dur <= 0:
            raise ParseError(f"non-positive duration {f[4]}", n, 5)
        start = to_us(onset)
        end = start + to_us(dur)
        if end <= start:
            raise ParseError(f"duration {f[4]} rounds to zero", n, 5)
        recs.setdefault(f[1], []).append(RichSegment(TimeSpan(start, end), f[7]))
        first_line.setdefault(f[1], n)
    return _group(recs, first_line)


def rttm_line(recording_id: str, span: TimeSpan, speaker: str, channel: int = 1) -> str:
    return (
        f"SPEAKER {recording_id} {channel} {format_time(span.start_us)} "
        f"{format_time(span.duration_us)} {NA} {NA} {speaker} {NA} {NA}"
    )


def write_rttm(annotations: Iterable[Annotation]) -> str:
    lines = [
        rttm_line(a.recording_id, s.span, s.speaker)
        for a in sorted(annotations, key=lambda a: a.recording_id)
        for s in a.segments
    ]
    return "".join(line + "\n" for line in lines)


def timeline_to_annotation(recording_id: str, timeline: Timeline, label: str = "speech") -> Annotation:
    return Annotation(recording_id, tuple(RichSegment(s, label) for s in timeline))


# -- rich segments ------------------------------------------------------------

_RICH_KEYS = {"recording_id", "start", "end", "speaker", "emotion", "words"}


def parse_rich(text: str) -> list[Annotation]:
    recs: dict[str, list[RichSegment]] = {}
    first_line: dict[str, int] = {}
    for n, line in _lines(text):
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as e:
            raise ParseError(f"invalid JSON: {e.msg}", n, e.colno) from None
        if not isinstance(obj, dict):
            raise ParseError("expected a JSON object", n)
        unknown = set(obj) - _RICH_KEYS
        if unknown:
            raise ParseError(f"unknown fields {sorted(unknown)}", n)
        for key in ("recording_id", "start", "end", "speaker"):
            if key not in obj:
                raise ParseError(f"missing field {key!r}", n)
        rec, spk = obj["recording_id"], obj["speaker"]
        if not isinstance(rec, str) or not rec:
            raise ParseError("recording_id must be a non-empty string", n)
        if not isinstance(spk, str) or not spk:
            raise ParseError("speaker must be a non-empty string", n)
        times = []
        for key in ("start", "end"):
            v = obj[key]
            if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
                raise ParseError(f"{key} must be a finite number", n)
            times.append(to_us(v))
        start, end = times
        if start < 0:
            raise ParseError(f"negative start {obj['start']}", n)
        if end <= start:
            raise ParseError(f"start {obj['start']} not before end {obj['end']}", n)
        emotion = obj.get("emotion")
        if emotion is not None:
            try:
                emotion = EmotionLabel.parse(emotion)
            except DataError as e:
                raise ParseError(str(e), n) from None
        words = obj.get("words")
        if words is not None:
            if not isinstance(words, str):
                raise ParseError("words must be a string", n)
            words = tuple(words.split())
        recs.setdefault(rec, []).append(
            RichSegment(TimeSpan(start, end), spk, emotion, words)
        )
        first_line.setdefault(rec, n)
    return _group(recs, first_line)


def rich_line(recording_id: str, seg: RichSegment) -> str:
    parts = [
        f'"recording_id": {json.dumps(recording_id)}',
        f'"start": {format_time(seg.span.start_us)}',
        f'"end": {format_time(seg.span.end_us)}',
        f'"speaker": {json.dumps(seg.speaker)}',
    ]
    if seg.emotion is not None:
        parts.append(f'"emotion": {json.dumps(seg.emotion.value)}')
    if seg.words is not None:
        parts.append(f'"words": {json.dumps(" ".join(seg.words))}')
    return "{" + ", ".join(parts) + "}"


def write_rich(annotations: Iterable[Annotation]) -> str:
    return "".join(
        rich_line(a.recording_id, s) + "\n"
        for a in sorted(annotations, key=lambda a: a.recording_id)
        for s in a.segments
    )


# -- posteriors and embeddings ------------------------------------------------


def _csv_records(text: str, default_id: str) -> Iterable[tuple[str, int, list[str]]]:
    rec = default_id
    for n, line in _lines(text):
        if line.startswith("#"):
            body = line[1:].strip()
            if body.startswith("recording_id="):
                rec = body.split("=", 1)[1].strip()
                if not rec:
                    raise ParseError("empty recording_id header", n)
            continue
        yield rec, n, [tok.strip() for tok in line.split(",")]


def parse_posteriors(text: str, default_id: str = "") -> dict[str, list[FramePosteriorTrack]]:
    out: dict[str, list[FramePosteriorTrack]] = {}
    for rec, n, toks in _csv_records(text, default_id):
        if len(toks) < 3:
            raise ParseError("expected start,frame_period,p0[,p1...]", n)
        start = _float(toks[0], n, 1, "window start")
        period = _float(toks[1], n, 2, "frame period")
        if start < 0:
            raise ParseError(f"negative window start {toks[0]}", n, 1)
        if period <= 0:
            raise ParseError(f"non-positive frame period {toks[1]}", n, 2)
        probs = np.empty(len(toks) - 2)
        for i, tok in enumerate(toks[2:]):
            p = _float(tok, n, i + 3, "probability")
            if not 0.0 <= p <= 1.0:
                raise ParseError(f"probability {tok} outside [0, 1]", n, i + 3)
            probs[i] = p
        tracks = out.setdefault(rec, [])
        track = FramePosteriorTrack(start=to_us(start) / 1e6, probs=probs, frame_period=period)
        if tracks and track.start_us <= tracks[-1].start_us:
            raise ParseError(
                f"window start {toks[0]} does not increase past {tracks[-1].start:g}", n, 1
            )
        tracks.append(track)
    return out


def write_posteriors(tracks: Mapping[str, Sequence[FramePosteriorTrack]]) -> str:
    lines = []
    for rec in sorted(tracks):
        lines.append(f"# recording_id={rec}")
        for t in sorted(tracks[rec], key=lambda t: t.start_us):
            probs = ",".join(f"{p:.6f}" for p in t.probs)
            lines.append(f"{format_time(t.start_us)},{format_time(t.frame_us)},{probs}")
    return "".join(line + "\n" for line in lines)


def parse_embeddings(text: str, default_id: str = "") -> dict[str, list[EmbeddingWindow]]:
    out: dict[str, list[EmbeddingWindow]] = {}
    dims: dict[str, int] = {}
    for rec, n, toks in _csv_records(text, default_id):
        if len(toks) < 3:
            raise ParseError("expected start,end,v0[,v1...]", n)
        start = _float(toks[0], n, 1, "start")
        end = _float(toks[1], n, 2, "end")
        s_us, e_us = to_us(start), to_us(end)
        if s_us < 0:
            raise ParseError(f"negative start {toks[0]}", n, 1)
        if e_us <= s_us:
            raise ParseError(f"start {toks[0]} not before end {toks[1]}", n, 2)
        vec = np.array([_float(t, n, i + 3, "embedding value") for i, t in enumerate(toks[2:])])
        d = dims.setdefault(rec, vec.size)
        if vec.size != d:
            raise ParseError(f"embedding dimension {vec.size} differs from {d}", n, len(toks))
        windows = out.setdefault(rec, [])
        if windows and s_us <= windows[-1].span.start_us:
            raise ParseError(
                f"window start {toks[0]} does not increase past {windows[-1].span.start:g}", n, 1
            )
        try:
            windows.append(EmbeddingWindow(TimeSpan(s_us, e_us), vec))
        except DataError as e:
            raise ParseError(str(e), n) from None
    return out


def write_embeddings(windows: Mapping[str, Sequence[EmbeddingWindow]]) -> str:
    lines = []
    for rec in sorted(windows):
        lines.append(f"# recording_id={rec}")
        for w in sorted(windows[rec], key=lambda w: w.span):
            vec = ",".join(repr(float(v)) for v in w.vector)
            lines.append(f"{format_time(w.span.start_us)},{format_time(w.span.end_us)},{vec}")
    return "".join(line + "\n" for line in lines)
