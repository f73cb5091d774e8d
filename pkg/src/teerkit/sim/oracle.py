"""Brute-force frame-grid scoring used as an independent check.

Deliberately self-contained: time is sampled at frame centres on a fixed
grid, speaker mappings are enumerated exhaustively, and nothing is shared
with :mod:`teerkit.metrics` beyond the input annotation types.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from teerkit.errors import DataError
from teerkit.timeline import EMOTIONS, Annotation

MAX_SPEAKERS = 4


@dataclass(frozen=True)
class GridScore:
    missed: float
    false_alarm: float
    confusion: float
    total: float

    @property
    def rate(self) -> float:
        return (self.missed + self.false_alarm + self.confusion) / self.total


@dataclass(frozen=True)
class GridReport:
    der: GridScore
    teer: GridScore | None
    steer: GridScore | None
    far: float
    msr: float
    mapping: dict[str, str]


def _tracks(ann: Annotation, centers: np.ndarray):
    """Per-speaker activity and emotion code arrays (emotion -1 when absent)."""
    codes = {e: i for i, e in enumerate(EMOTIONS)}
    speakers = sorted({s.speaker for s in ann.segments})
    active = np.zeros((len(speakers), centers.size), dtype=bool)
    emo = np.full((len(speakers), centers.size), -1, dtype=int)
    for seg in ann.segments:
        k = speakers.index(seg.speaker)
        inside = (centers >= seg.span.start) & (centers < seg.span.end)
        active[k] |= inside
        emo[k, inside] = codes[seg.emotion] if seg.emotion is not None else -1
    return speakers, active, emo


def _partial_injections(n_ref: int, n_hyp: int):
    for k in range(min(n_ref, n_hyp), -1, -1):
        for refs in itertools.combinations(range(n_ref), k):
            for hyps in itertools.permutations(range(n_hyp), k):
                yield tuple(zip(refs, hyps))


def frame_grid_oracle(
    ref: Annotation,
    hyp: Annotation,
    collar: float = 0.0,
    grid: float = 0.01,
    extent_end: float | None = None,
    far_denominator: str = "speech",
) -> GridReport:
    """Score ``hyp`` against ``ref`` by counting grid frames.

    Frame ``k`` stands for the instant ``(k + 0.5) * grid``.  Frames closer
    than ``collar`` to a reference boundary (``b - collar <= t < b + collar``)
    are excluded from DER/TEER/sTEER; FAR and MSR use every frame.
    """
    if grid > 0.01 + 1e-12:
        raise DataError(f"oracle grid must be at most 10 ms, got {grid}")
    if extent_end is None:
        extent_end = max(
            [s.span.end for s in ref.segments] + [s.span.end for s in hyp.segments]
        )
    n_frames = int(np.ceil(extent_end / grid - 0.5))
    centers = (np.arange(n_frames) + 0.5) * grid
    centers = centers[centers < extent_end]

    ref_spk, r_act, r_emo = _tracks(ref, centers)
    hyp_spk, h_act, h_emo = _tracks(hyp, centers)
    if len(ref_spk) > MAX_SPEAKERS or len(hyp_spk) > MAX_SPEAKERS:
        raise DataError(f"exhaustive oracle supports at most {MAX_SPEAKERS} speakers per side")

    keep = np.ones(centers.size, dtype=bool)
    if collar > 0:
        for seg in ref.segments:
            for b in (seg.span.start, seg.span.end):
                keep &= ~((centers >= b - collar) & (centers < b + collar))

    nr = r_act.sum(axis=0)
    nh = h_act.sum(axis=0)
    both = np.minimum(nr, nh)

    best, best_err = (), None
    for pairs in _partial_injections(len(ref_spk), len(hyp_spk)):
        correct = np.zeros(centers.size, dtype=int)
        for r, h in pairs:
            correct += r_act[r] & h_act[h]
        err = int(((np.maximum(nr, nh) - correct) * keep).sum())
        if best_err is None or err < best_err:
            best, best_err = pairs, err

    def score(correct: np.ndarray) -> GridScore:
        return GridScore(
            missed=float((np.maximum(nr - nh, 0) * keep).sum() * grid),
            false_alarm=float((np.maximum(nh - nr, 0) * keep).sum() * grid),
            confusion=float(((both - correct) * keep).sum() * grid),
            total=float((nr * keep).sum() * grid),
        )

    spk_correct = np.zeros(centers.size, dtype=int)
    for r, h in best:
        spk_correct += r_act[r] & h_act[h]
    der_score = score(spk_correct)

    teer_score = steer_score = None
    if all(seg.emotion is not None for seg in ref.segments):
        emo_correct = np.zeros(centers.size, dtype=int)
        for code in range(len(EMOTIONS)):
            rc = ((r_emo == code) & r_act).sum(axis=0)
            hc = ((h_emo == code) & h_act).sum(axis=0)
            emo_correct += np.minimum(rc, hc)
        teer_score = score(emo_correct)
        joint = np.zeros(centers.size, dtype=int)
        for r, h in best:
            joint += r_act[r] & h_act[h] & (r_emo[r] == h_emo[h]) & (h_emo[h] >= 0)
        steer_score = score(joint)

    ref_speech = r_act.any(axis=0)
    hyp_speech = h_act.any(axis=0)
    speech = ref_speech.sum()
    nonspeech = (~ref_speech).sum()
    msr = (ref_speech & ~hyp_speech).sum() / speech if speech else float("nan")
    denom = speech if far_denominator == "speech" else nonspeech
    far = (hyp_speech & ~ref_speech).sum() / denom if denom else float("nan")

    return GridReport(
        der=der_score,
        teer=teer_score,
        steer=steer_score,
        far=float(far),
        msr=float(msr),
        mapping={ref_spk[r]: hyp_spk[h] for r, h in best},
    )


def grid_tolerance(ref: Annotation, hyp: Annotation, collar: float, grid: float, total: float) -> float:
    """Admissible rate difference between exact and grid scoring.

    ``2 * grid`` per boundary that can fall inside a frame: every segment
    boundary on either side plus the two collar edges of each reference
    boundary.
    """
    bounds = {t for a in (ref, hyp) for s in a.segments for t in (s.span.start, s.span.end)}
    n = len(bounds)
    if collar > 0:
        n += 2 * len({t for s in ref.segments for t in (s.span.start, s.span.end)})
    return 2 * grid * n / total
