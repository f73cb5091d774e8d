"""Synthetic dialogues with planted errors.

All randomness comes from ``numpy.random.default_rng(seed)`` (PCG64), so a
spec and seed reproduce identical fixtures.  Every generated time is a
multiple of ``resolution``.

Hypothesis corruption touches only the part of each utterance that no other
reference speaker overlaps.  That part is split evenly between the
corruptions drawn for the utterance (missed speech, wrong emotion, wrong
speaker); false alarms extend an utterance into the following silence.
Because the corrupted regions are disjoint and per-speaker miss and swap time
is capped at 20% of that speaker's speech, the identity speaker mapping is
the unique optimum and the recorded injected durations equal what an exact
scorer reports at collar 0 (when ``jitter`` is 0).
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, fields
from pathlib import Path

import numpy as np

from teerkit.clustering import EmbeddingWindow, make_windows
from teerkit.errors import DataError
from teerkit.timeline import (
    EMOTIONS,
    Annotation,
    RichSegment,
    Timeline,
    TimeSpan,
    to_s,
    to_us,
)
from teerkit.vad import FramePosteriorTrack, sliding_windows

VOCAB = (
    "yeah i know what you mean but that is not the point we were talking about "
    "it just feels like nobody ever listens to me when i say something really "
    "important okay fine whatever you want so tell me about your day honestly"
).split()

MAX_CORRUPT_FRACTION = 0.2
MAX_OVERLAP_FRACTION = 0.15


@dataclass(frozen=True)
class SynthSpec:
    num_speakers: int = 2
    dialogue_length: float = 60.0
    utt_min: float = 1.0
    utt_max: float = 6.0
    gap_min: float = 0.3
    gap_max: float = 1.5
    overlap_prob: float = 0.0
    overlap_max: float = 0.5
    jitter: float = 0.0
    miss_prob: float = 0.0
    fa_prob: float = 0.0
    fa_max: float = 0.5
    emotion_confusion_prob: float = 0.0
    speaker_swap_prob: float = 0.0
    word_sub_rate: float = 0.0
    word_ins_rate: float = 0.0
    word_del_rate: float = 0.0
    words_per_second: float = 2.5
    posterior_flip_prob: float = 0.0
    embedding_dim: int = 16
    embedding_noise: float = 0.05
    resolution: float = 0.02
    frame_period: float = 0.02
    vad_window: float = 3.0
    vad_hop: float = 1.0
    emb_window: float = 1.0
    emb_overlap: float = 0.5
    seed: int = 0
    recording_id: str = "sim"

    def __post_init__(self) -> None:
        probs = (
            "overlap_prob", "miss_prob", "fa_prob", "emotion_confusion_prob",
            "speaker_swap_prob", "word_sub_rate", "word_ins_rate", "word_del_rate",
            "posterior_flip_prob",
        )
        for name in probs:
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise DataError(f"{name} must lie in [0, 1], got {v}")
        if self.num_speakers < 1:
            raise DataError("num_speakers must be >= 1")
        if self.embedding_dim < self.num_speakers:
            raise DataError("embedding_dim must be >= num_speakers")
        for name in ("dialogue_length", "utt_min", "resolution", "frame_period"):
            if getattr(self, name) <= 0:
                raise DataError(f"{name} must be positive")
        for name in ("gap_min", "jitter", "overlap_max", "fa_max", "embedding_noise"):
            if getattr(self, name) < 0:
                raise DataError(f"{name} must be >= 0")
        if self.utt_max < self.utt_min or self.gap_max < self.gap_min:
            raise DataError("utterance/gap maxima must not be below their minima")
        if self.utt_max + self.gap_min > self.dialogue_length:
            raise DataError("utterances cannot fit in the dialogue")
        if to_us(self.resolution) % to_us(self.frame_period):
            raise DataError("resolution must be a multiple of the frame period")
        if self.jitter > 0 and 2 * self.jitter >= min(self.gap_min, self.utt_min):
            raise DataError("jitter must be below half the minimum gap and utterance length")

    @classmethod
    def from_dict(cls, data: dict) -> SynthSpec:
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise DataError(f"unknown spec fields: {sorted(unknown)}")
        return cls(**data)

    @classmethod
    def from_file(cls, path: str | Path) -> SynthSpec:
        try:
            data = json.loads(Path(path).read_text())
        except json.JSONDecodeError as e:
            raise DataError(f"{path}: invalid JSON ({e.msg})") from None
        if not isinstance(data, dict):
            raise DataError(f"{path}: spec must be a JSON object")
        return cls.from_dict(data)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class Injected:
    """Exact durations (seconds) and word counts of the planted errors."""

    missed: float = 0.0
    false_alarm: float = 0.0
    emotion_confusion: float = 0.0
    speaker_confusion: float = 0.0
    steer_confusion: float = 0.0
    word_substitutions: int = 0
    word_deletions: int = 0
    word_insertions: int = 0


@dataclass(frozen=True)
class SynthResult:
    spec: SynthSpec
    ref: Annotation
    hyp: Annotation
    hyp_utterances: Annotation
    posteriors: list[FramePosteriorTrack]
    embeddings: list[EmbeddingWindow]
    injected: Injected


@dataclass
class _Utt:
    start: int
    end: int
    speaker: int
    emotion: int
    words: list[str]


class _Gen:
    def __init__(self, spec: SynthSpec):
        self.spec = spec
        self.rng = np.random.default_rng(spec.seed)
        self.tick = to_us(spec.resolution)

    def ticks(self, seconds: float) -> int:
        return int(round(to_us(seconds) / self.tick))

    def draw(self, lo: float, hi: float) -> int:
        a, b = self.ticks(lo), self.ticks(hi)
        return int(self.rng.integers(a, b + 1)) if b > a else a


def _reference(g: _Gen) -> list[_Utt]:
    spec, rng = g.spec, g.rng
    total = g.ticks(spec.dialogue_length)
    gap_min = g.ticks(spec.gap_min)
    utts: list[_Utt] = []
    last_end = {k: -(10**12) for k in range(spec.num_speakers)}
    cursor = g.draw(0, spec.gap_max)
    while True:
        prev = utts[-1] if utts else None
        if prev is None:
            spk = int(rng.integers(spec.num_speakers))
        elif spec.num_speakers == 1:
            spk = 0
        else:
            choices = [k for k in range(spec.num_speakers) if k != prev.speaker]
            spk = int(choices[rng.integers(len(choices))])
        length = max(g.draw(spec.utt_min, spec.utt_max), 1)
        # earliest start that keeps overlaps to the immediate predecessor only
        floor = last_end[spk] + gap_min
        if len(utts) >= 2:
            floor = max(floor, max(u.end for u in utts[:-1]) + gap_min)
        start = None
        if prev is not None and spec.num_speakers > 1 and rng.random() < spec.overlap_prob:
            cap = min(
                g.ticks(spec.overlap_max),
                int(MAX_OVERLAP_FRACTION * (prev.end - prev.start)),
                int(MAX_OVERLAP_FRACTION * length),
            )
            if cap >= 1:
                ov = int(rng.integers(1, cap + 1))
                if prev.end - ov >= max(floor, prev.start + 1):
                    start = prev.end - ov
        if start is None:
            base = cursor if prev is None else prev.end + g.draw(spec.gap_min, spec.gap_max)
            start = max(base, floor, 0)
        end = start + length
        if end > total:
            break
        n_words = max(1, int(round(to_s(length * g.tick) * spec.words_per_second)))
        words = [VOCAB[i] for i in rng.integers(len(VOCAB), size=n_words)]
        utts.append(_Utt(start, end, spk, int(rng.integers(len(EMOTIONS))), words))
        last_end[spk] = end
    if not utts:
        raise DataError("spec produced no utterances; lengthen the dialogue")
    return utts


def _corrupt_words(g: _Gen, words: list[str]) -> tuple[list[str], int, int, int]:
    spec, rng = g.spec, g.rng
    out: list[str] = []
    s = d = i = 0
    for w in words:
        r = rng.random()
        if r < spec.word_del_rate:
            d += 1
        elif r < spec.word_del_rate + spec.word_sub_rate:
            alt = [v for v in VOCAB if v != w]
            out.append(alt[rng.integers(len(alt))])
            s += 1
        else:
            out.append(w)
        if rng.random() < spec.word_ins_rate:
            out.append(VOCAB[rng.integers(len(VOCAB))])
            i += 1
    return out, s, d, i


def generate(spec: SynthSpec) -> SynthResult:
    g = _Gen(spec)
    rng = g.rng
    utts = _reference(g)
    tick = g.tick
    n_spk = spec.num_speakers
    names = [f"S{k + 1}" for k in range(n_spk)]
    total_end = g.ticks(spec.dialogue_length)

    spk_total = [0] * n_spk
    for u in utts:
        spk_total[u.speaker] += u.end - u.start
    missed_by = [0] * n_spk
    swapped_by = [0] * n_spk
    jit = g.ticks(spec.jitter)

    ms = fa = conf_emo = conf_spk = 0
    ws = wd = wi = 0
    hyp_pieces: list[tuple[int, int, int, int, list[str] | None]] = []
    # oracle-segmentation hypothesis: reference spans, recognised words and emotion
    utt_emotion = [u.emotion for u in utts]
    utt_words: list[list[str]] = []
    for idx, u in enumerate(utts):
        prev_end = utts[idx - 1].end if idx > 0 else None
        next_start = utts[idx + 1].start if idx + 1 < len(utts) else None
        c0 = max(u.start, prev_end) if prev_end is not None and prev_end > u.start else u.start
        c1 = min(u.end, next_start) if next_start is not None and next_start < u.end else u.end

        kinds = []
        if rng.random() < spec.miss_prob:
            kinds.append("miss")
        if rng.random() < spec.emotion_confusion_prob:
            kinds.append("emo")
        if n_spk > 1 and rng.random() < spec.speaker_swap_prob:
            kinds.append("swap")
        core = c1 - c0
        if kinds and core < len(kinds):
            kinds = []
        parts: list[tuple[int, int, int, int]] = []  # start, end, speaker, emotion
        if c0 > u.start:
            parts.append((u.start, c0, u.speaker, u.emotion))
        if kinds:
            cuts = [c0 + (core * j) // len(kinds) for j in range(len(kinds) + 1)]
            for kind, a, b in zip(kinds, cuts, cuts[1:]):
                size = b - a
                if kind == "miss" and (
                    missed_by[u.speaker] + size <= MAX_CORRUPT_FRACTION * spk_total[u.speaker]
                ):
                    missed_by[u.speaker] += size
                    ms += size
                    continue
                if kind == "emo":
                    wrong = [e for e in range(len(EMOTIONS)) if e != u.emotion]
                    utt_emotion[idx] = int(wrong[rng.integers(len(wrong))])
                    parts.append((a, b, u.speaker, utt_emotion[idx]))
                    conf_emo += size
                    continue
                if kind == "swap" and (
                    swapped_by[u.speaker] + size <= MAX_CORRUPT_FRACTION * spk_total[u.speaker]
                ):
                    others = [k for k in range(n_spk) if k != u.speaker]
                    parts.append((a, b, int(others[rng.integers(len(others))]), u.emotion))
                    swapped_by[u.speaker] += size
                    conf_spk += size
                    continue
                parts.append((a, b, u.speaker, u.emotion))
        else:
            parts.append((c0, c1, u.speaker, u.emotion))
        if c1 < u.end:
            parts.append((c1, u.end, u.speaker, u.emotion))
        parts = _merge_parts(parts)

        silence = (next_start if next_start is not None else total_end) - u.end
        if parts and parts[-1][1] == u.end and rng.random() < spec.fa_prob:
            room = min(g.ticks(spec.fa_max), silence // 2, silence - 2 * jit - 1)
            if room >= 1:
                ext = int(rng.integers(1, room + 1))
                a, b, sp, em = parts[-1]
                parts[-1] = (a, b + ext, sp, em)
                fa += ext

        if jit and parts:
            a, b, sp, em = parts[0]
            if a == u.start:
                shift = int(rng.integers(-jit, jit + 1))
                parts[0] = (min(max(a + shift, 0), b - 1), b, sp, em)
            a, b, sp, em = parts[-1]
            if b >= u.end:
                shift = int(rng.integers(-jit, jit + 1))
                parts[-1] = (a, max(b + shift, a + 1), sp, em)

        hyp_words, s, d, i = _corrupt_words(g, u.words)
        utt_words.append(hyp_words)
        ws, wd, wi = ws + s, wd + d, wi + i
        own = [k for k, p in enumerate(parts) if p[2] == u.speaker]
        for k, (a, b, sp, em) in enumerate(parts):
            words = hyp_words if own and k == own[0] else None
            hyp_pieces.append((a, b, sp, em, words))

    hyp_pieces = _resolve_self_overlap(hyp_pieces)
    ref = Annotation(
        spec.recording_id,
        tuple(
            RichSegment(
                TimeSpan(u.start * tick, u.end * tick),
                names[u.speaker],
                EMOTIONS[u.emotion],
                tuple(u.words),
            )
            for u in utts
        ),
    )
    hyp = Annotation(
        spec.recording_id,
        tuple(
            RichSegment(
                TimeSpan(a * tick, b * tick),
                names[sp],
                EMOTIONS[em],
                tuple(words) if words is not None else None,
            )
            for a, b, sp, em, words in hyp_pieces
        ),
    )
    hyp_utterances = Annotation(
        spec.recording_id,
        tuple(
            RichSegment(
                TimeSpan(u.start * tick, u.end * tick),
                names[u.speaker],
                EMOTIONS[utt_emotion[k]],
                tuple(utt_words[k]),
            )
            for k, u in enumerate(utts)
        ),
    )
    injected = Injected(
        missed=to_s(ms * tick),
        false_alarm=to_s(fa * tick),
        emotion_confusion=to_s(conf_emo * tick),
        speaker_confusion=to_s(conf_spk * tick),
        steer_confusion=to_s((conf_emo + conf_spk) * tick),
        word_substitutions=ws,
        word_deletions=wd,
        word_insertions=wi,
    )
    extent = TimeSpan(0, total_end * tick)
    return SynthResult(
        spec=spec,
        ref=ref,
        hyp=hyp,
        hyp_utterances=hyp_utterances,
        posteriors=_posteriors(g, ref.speech(), extent),
        embeddings=_embeddings(g, ref, names, extent),
        injected=injected,
    )


def _merge_parts(parts):
    out: list[tuple[int, int, int, int]] = []
    for a, b, sp, em in parts:
        if out and out[-1][1] == a and out[-1][2:] == (sp, em):
            out[-1] = (out[-1][0], b, sp, em)
        else:
            out.append((a, b, sp, em))
    return out


def _resolve_self_overlap(pieces):
    # jittered boundaries can push a speaker's piece into its own neighbour
    out = []
    last_end: dict[int, int] = {}
    for a, b, sp, em, words in sorted(pieces, key=lambda p: (p[0], p[1])):
        a = max(a, last_end.get(sp, 0))
        if b > a:
            out.append((a, b, sp, em, words))
            last_end[sp] = b
    return out


def _posteriors(g: _Gen, speech: Timeline, extent: TimeSpan) -> list[FramePosteriorTrack]:
    spec = g.spec
    frame = to_us(spec.frame_period)
    bounds = np.array([t for s in speech for t in (s.start_us, s.end_us)], dtype=np.int64)
    tracks = []
    for w in sliding_windows(extent, spec.vad_window, spec.vad_hop):
        n = -(-w.duration_us // frame)
        centers = w.start_us + frame * np.arange(n) + frame // 2
        # a centre is speech iff an odd number of boundaries lie at or before it
        probs = (np.searchsorted(bounds, centers, side="right") % 2).astype(float)
        if spec.posterior_flip_prob > 0:
            flip = g.rng.random(n) < spec.posterior_flip_prob
            probs[flip] = 1.0 - probs[flip]
        tracks.append(FramePosteriorTrack(start=w.start, probs=probs, frame_period=spec.frame_period))
    return tracks


def _embeddings(
    g: _Gen, ref: Annotation, names: list[str], extent: TimeSpan
) -> list[EmbeddingWindow]:
    """One planted vector per window over the whole extent.

    Speech windows carry the dominant speaker's cluster.  Windows in silence
    carry the cluster of the speaker whose segment is nearest in time, so a
    false-alarm region found by VAD still has an embedding to cluster.
    """
    spec, rng = g.spec, g.rng
    q, _ = np.linalg.qr(rng.standard_normal((spec.embedding_dim, spec.num_speakers)))
    means = q.T
    spans = {
        name: np.array([(s.start_us, s.end_us) for s in ref.speaker_timeline(name)], dtype=np.int64).reshape(-1, 2)
        for name in names
    }
    speech = ref.speech()
    windows = make_windows(speech, spec.emb_window, spec.emb_overlap)
    windows += make_windows(Timeline([extent]) - speech, spec.emb_window, spec.emb_overlap)
    out = []
    for w in sorted(windows):
        share = [
            np.clip(
                np.minimum(spans[n][:, 1], w.end_us) - np.maximum(spans[n][:, 0], w.start_us), 0, None
            ).sum()
            for n in names
        ]
        if max(share) > 0:
            k = int(np.argmax(share))
        else:
            mid = (w.start_us + w.end_us) // 2
            dist = [
                np.maximum(spans[n][:, 0] - mid, mid - spans[n][:, 1]).min() if len(spans[n]) else np.inf
                for n in names
            ]
            k = int(np.argmin(dist))
        noise = rng.standard_normal(spec.embedding_dim) * spec.embedding_noise / np.sqrt(spec.embedding_dim)
        out.append(EmbeddingWindow(w, means[k] + noise))
    return out
