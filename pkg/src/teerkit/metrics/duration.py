"""Time-weighted error rates: FAR/MSR, DER, TEER and sTEER."""

from __future__ import annotations

from collections import Counter
from collections.abc import Iterable
from dataclasses import dataclass
from typing import Literal

import numpy as np

from teerkit.errors import DataError
from teerkit.timeline import (
    Annotation,
    Timeline,
    TimeSpan,
    default_extent,
    pieces,
    scoring_mask,
    to_s,
)

Overlap = Literal["multi", "single"]
FarDenominator = Literal["speech", "nonspeech"]


@dataclass(frozen=True)
class MetricReport:
    """Error decomposition in seconds; ``rate = (MS + FA + CONF) / TOTAL``."""

    missed: float
    false_alarm: float
    confusion: float
    total: float

    def __post_init__(self) -> None:
        if min(self.missed, self.false_alarm, self.confusion, self.total) < 0:
            raise DataError("metric components must be non-negative")

    @property
    def rate(self) -> float:
        if self.total <= 0:
            raise DataError("no reference speech to score against")
        return (self.missed + self.false_alarm + self.confusion) / self.total

    def __add__(self, other: MetricReport) -> MetricReport:
        return MetricReport(
            self.missed + other.missed,
            self.false_alarm + other.false_alarm,
            self.confusion + other.confusion,
            self.total + other.total,
        )

    @classmethod
    def zero(cls) -> MetricReport:
        return cls(0.0, 0.0, 0.0, 0.0)

    @classmethod
    def from_us(cls, missed: int, false_alarm: int, confusion: int, total: int) -> MetricReport:
        return cls(to_s(missed), to_s(false_alarm), to_s(confusion), to_s(total))


@dataclass(frozen=True)
class SpeakerMapping:
    """Partial bijection from reference to hypothesis speaker labels."""

    pairs: tuple[tuple[str, str], ...]

    def __post_init__(self) -> None:
        refs = [r for r, _ in self.pairs]
        hyps = [h for _, h in self.pairs]
        if len(set(refs)) != len(refs) or len(set(hyps)) != len(hyps):
            raise DataError("speaker mapping must be injective in both directions")

    def as_dict(self) -> dict[str, str]:
        return dict(self.pairs)

    def inverse(self) -> dict[str, str]:
        return {h: r for r, h in self.pairs}


@dataclass(frozen=True)
class _Piece:
    duration: int
    ref: tuple[tuple[str, object], ...]
    hyp: tuple[tuple[str, object], ...]


def _masked_pieces(ref: Annotation, hyp: Annotation, mask: Timeline) -> list[_Piece]:
    nr, nh = len(ref.segments), len(hyp.segments)
    spans: list[Iterable[TimeSpan]] = [
        [s.span for s in ref.segments],
        [s.span for s in hyp.segments],
        list(mask),
    ]
    bounds, cover = pieces(spans)
    out = []
    for i, idx in enumerate(cover):
        if not any(j >= nr + nh for j in idx):
            continue
        r = tuple(
            (ref.segments[j].speaker, ref.segments[j].emotion) for j in idx if j < nr
        )
        h = tuple(
            (hyp.segments[j - nr].speaker, hyp.segments[j - nr].emotion)
            for j in idx
            if nr <= j < nr + nh
        )
        if r or h:
            out.append(_Piece(bounds[i + 1] - bounds[i], r, h))
    return out


def _mask(ref: Annotation, hyp: Annotation, collar: float, extent: TimeSpan | None) -> Timeline:
    if extent is None:
        extent = default_extent(ref, hyp)
    return scoring_mask(ref, collar, extent)


def _mapping_from_pieces(ps: list[_Piece]) -> SpeakerMapping:
    ref_spk = sorted({s for p in ps for s, _ in p.ref})
    hyp_spk = sorted({s for p in ps for s, _ in p.hyp})
    if not ref_spk or not hyp_spk:
        return SpeakerMapping(())
    ri = {s: i for i, s in enumerate(ref_spk)}
    hi = {s: i for i, s in enumerate(hyp_spk)}
    overlap = np.zeros((len(ref_spk), len(hyp_spk)), dtype=np.int64)
    for p in ps:
        for r, _ in p.ref:
            for h, _ in p.hyp:
                overlap[ri[r], hi[h]] += p.duration
    from scipy.optimize import linear_sum_assignment

    rows, cols = linear_sum_assignment(overlap, maximize=True)
    return SpeakerMapping(
        tuple(
            (ref_spk[r], hyp_spk[c]) for r, c in zip(rows, cols) if overlap[r, c] > 0
        )
    )


def optimal_mapping(
    ref: Annotation,
    hyp: Annotation,
    collar: float = 0.0,
    extent: TimeSpan | None = None,
) -> SpeakerMapping:
    """Reference-to-hypothesis speaker mapping with maximal total overlap.

    Overlap is measured inside the scoring mask for ``collar``.
    """
    if not ref.segments or not hyp.segments:
        return SpeakerMapping(())
    return _mapping_from_pieces(_masked_pieces(ref, hyp, _mask(ref, hyp, collar, extent)))


def _miss_fa(nr: int, nh: int, d: int) -> tuple[int, int]:
    return max(nr - nh, 0) * d, max(nh - nr, 0) * d


def _score(
    ps: list[_Piece],
    correct_fn,
    overlap: Overlap = "multi",
) -> MetricReport:
    ms = fa = conf = total = 0
    for p in ps:
        nr, nh = len(p.ref), len(p.hyp)
        correct = correct_fn(p) if nr and nh else 0
        if overlap == "single":
            nr, nh, correct = min(nr, 1), min(nh, 1), min(correct, 1)
        m, f = _miss_fa(nr, nh, p.duration)
        ms += m
        fa += f
        conf += (min(nr, nh) - correct) * p.duration
        total += nr * p.duration
    if total == 0:
        raise DataError("no reference speech inside the scoring region")
    return MetricReport.from_us(ms, fa, conf, total)


def _check_overlap(overlap: str) -> None:
    if overlap not in ("multi", "single"):
        raise DataError(f"overlap must be 'multi' or 'single', got {overlap!r}")


def der(
    ref: Annotation,
    hyp: Annotation,
    collar: float = 0.25,
    extent: TimeSpan | None = None,
) -> MetricReport:
    """Diarisation error with overlap multiplicity under the optimal mapping."""
    ps = _masked_pieces(ref, hyp, _mask(ref, hyp, collar, extent))
    mapping = _mapping_from_pieces(ps).as_dict()

    def correct(p: _Piece) -> int:
        hyp_spk = {h for h, _ in p.hyp}
        return sum(1 for r, _ in p.ref if mapping.get(r) in hyp_spk)

    return _score(ps, correct)


def _require_emotions(ref: Annotation) -> None:
    for seg in ref.segments:
        if seg.emotion is None:
            raise DataError(
                f"{ref.recording_id}: reference segment at {seg.start:g}s has no emotion label"
            )


def teer(
    ref: Annotation,
    hyp: Annotation,
    collar: float = 0.25,
    extent: TimeSpan | None = None,
    overlap: Overlap = "multi",
) -> MetricReport:
    """Time-weighted emotion error rate.

    Confusion is the speech time where reference and hypothesis emotions
    disagree.  With overlapping speech the emotions active at an instant are
    matched as multisets, independent of speaker identity.  Hypothesis
    segments without an emotion never match.
    """
    _require_emotions(ref)
    _check_overlap(overlap)
    ps = _masked_pieces(ref, hyp, _mask(ref, hyp, collar, extent))

    def correct(p: _Piece) -> int:
        r = Counter(e for _, e in p.ref)
        h = Counter(e for _, e in p.hyp if e is not None)
        return sum((r & h).values())

    return _score(ps, correct, overlap)


def steer(
    ref: Annotation,
    hyp: Annotation,
    collar: float = 0.25,
    extent: TimeSpan | None = None,
    overlap: Overlap = "multi",
) -> MetricReport:
    """Speaker-attributed TEER.

    An instant is correct only if the hypothesis speaker mapped (by the
    DER-optimal mapping) to a reference speaker carries that speaker's
    reference emotion.
    """
    _require_emotions(ref)
    _check_overlap(overlap)
    ps = _masked_pieces(ref, hyp, _mask(ref, hyp, collar, extent))
    mapping = _mapping_from_pieces(ps).as_dict()

    def correct(p: _Piece) -> int:
        hyp_items = {(h, e) for h, e in p.hyp if e is not None}
        return sum(1 for r, e in p.ref if (mapping.get(r), e) in hyp_items)

    return _score(ps, correct, overlap)


@dataclass(frozen=True)
class VadReport:
    missed: float
    false_alarm: float
    speech: float
    nonspeech: float
    far_denominator: FarDenominator = "speech"

    @property
    def msr(self) -> float:
        if self.speech <= 0:
            raise DataError("no reference speech; missed-speech rate undefined")
        return self.missed / self.speech

    @property
    def far(self) -> float:
        denom = self.speech if self.far_denominator == "speech" else self.nonspeech
        if denom <= 0:
            raise DataError(f"false-alarm denominator ({self.far_denominator}) is zero")
        return self.false_alarm / denom

    def __add__(self, other: VadReport) -> VadReport:
        return VadReport(
            self.missed + other.missed,
            self.false_alarm + other.false_alarm,
            self.speech + other.speech,
            self.nonspeech + other.nonspeech,
            self.far_denominator,
        )


def vad_errors(
    ref_speech: Timeline,
    hyp_speech: Timeline,
    extent: TimeSpan,
    far_denominator: FarDenominator = "speech",
) -> VadReport:
    if far_denominator not in ("speech", "nonspeech"):
        raise DataError(f"unknown FAR denominator {far_denominator!r}")
    region = Timeline([extent])
    ref = ref_speech & region
    hyp = hyp_speech & region
    return VadReport(
        missed=(ref - hyp).duration,
        false_alarm=(hyp - ref).duration,
        speech=ref.duration,
        nonspeech=(region - ref).duration,
        far_denominator=far_denominator,
    )


def far_msr(
    ref_speech: Timeline,
    hyp_speech: Timeline,
    extent: TimeSpan,
    far_denominator: FarDenominator = "speech",
) -> tuple[float, float]:
    """(false-alarm rate, missed-speech rate).

    Both are normalised by reference speech duration by default;
    ``far_denominator="nonspeech"`` normalises false alarms by reference
    non-speech duration instead.
    """
    report = vad_errors(ref_speech, hyp_speech, extent, far_denominator)
    return report.far, report.msr
