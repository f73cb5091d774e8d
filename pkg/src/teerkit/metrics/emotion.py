"""Utterance-level emotion classification accuracy and confusion."""

from __future__ import annotations

from collections.abc import Iterable
from dataclasses import dataclass

import numpy as np

from teerkit.errors import DataError
from teerkit.timeline import EMOTIONS, FOUR_WAY, EmotionLabel

_INDEX = {e: i for i, e in enumerate(EMOTIONS)}


@dataclass(frozen=True, eq=False)
class EmotionReport:
    """Counts-based accuracy; ``confusion[i, j]`` counts reference i predicted as j."""

    confusion: np.ndarray

    @property
    def total(self) -> int:
        return int(self.confusion.sum())

    @property
    def accuracy(self) -> float:
        if self.total == 0:
            raise DataError("no utterances scored")
        return float(np.trace(self.confusion)) / self.total

    @property
    def four_way_accuracy(self) -> float:
        """Accuracy over references labelled happy, sad, angry or neutral.

        Predictions outside those four classes count as errors.
        """
        idx = [_INDEX[e] for e in FOUR_WAY]
        sub = self.confusion[idx]
        n = int(sub.sum())
        if n == 0:
            raise DataError("no references in the four basic classes")
        return float(sum(sub[k, i] for k, i in enumerate(idx))) / n

    @property
    def normalized(self) -> np.ndarray:
        """Row-normalised confusion; rows without references stay zero."""
        rows = self.confusion.sum(axis=1, keepdims=True)
        return np.divide(
            self.confusion, rows, out=np.zeros(self.confusion.shape), where=rows > 0
        )

    def __add__(self, other: EmotionReport) -> EmotionReport:
        return EmotionReport(self.confusion + other.confusion)


def emotion_accuracy(
    ref_utts: Iterable[tuple[object, EmotionLabel | str]],
    hyp_utts: Iterable[tuple[object, EmotionLabel | str]],
) -> EmotionReport:
    ref = {}
    for uid, lab in ref_utts:
        if uid in ref:
            raise DataError(f"duplicate reference utterance id {uid!r}")
        ref[uid] = EmotionLabel.parse(lab)
    hyp = {}
    for uid, lab in hyp_utts:
        if uid in hyp:
            raise DataError(f"duplicate hypothesis utterance id {uid!r}")
        hyp[uid] = EmotionLabel.parse(lab)
    if ref.keys() != hyp.keys():
        missing = sorted(map(str, ref.keys() - hyp.keys()))[:3]
        extra = sorted(map(str, hyp.keys() - ref.keys()))[:3]
        raise DataError(f"utterance ids differ (missing {missing}, unexpected {extra})")
    conf = np.zeros((len(EMOTIONS), len(EMOTIONS)), dtype=np.int64)
    for uid, lab in ref.items():
        conf[_INDEX[lab], _INDEX[hyp[uid]]] += 1
    return EmotionReport(conf)
