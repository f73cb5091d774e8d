"""Word error rate and concatenated minimum-permutation WER."""

from __future__ import annotations

import re
from collections.abc import Mapping, Sequence
from dataclasses import dataclass

import numpy as np

from teerkit.errors import DataError
from teerkit.timeline import Annotation

_PUNCT = re.compile(r"[^\w\s']", flags=re.UNICODE)


def normalize_words(text: str | Sequence[str]) -> list[str]:
    """Lowercase, drop punctuation other than apostrophes, split on whitespace."""
    if not isinstance(text, str):
        text = " ".join(text)
    return _PUNCT.sub(" ", text.lower().replace("_", " ")).split()


@dataclass(frozen=True)
class WerReport:
    substitutions: int
    deletions: int
    insertions: int
    ref_words: int

    def __post_init__(self) -> None:
        if min(self.substitutions, self.deletions, self.insertions, self.ref_words) < 0:
            raise DataError("WER counts must be non-negative")

    @property
    def errors(self) -> int:
        return self.substitutions + self.deletions + self.insertions

    @property
    def wer(self) -> float:
        if self.ref_words == 0:
            raise DataError("empty reference; WER undefined")
        return self.errors / self.ref_words

    def __add__(self, other: WerReport) -> WerReport:
        return WerReport(
            self.substitutions + other.substitutions,
            self.deletions + other.deletions,
            self.insertions + other.insertions,
            self.ref_words + other.ref_words,
        )

    @classmethod
    def zero(cls) -> WerReport:
        return cls(0, 0, 0, 0)


def _encode(ref: Sequence[str], hyp: Sequence[str]) -> tuple[list[int], list[int]]:
    vocab: dict[str, int] = {}
    r = [vocab.setdefault(w, len(vocab)) for w in ref]
    h = [vocab.setdefault(w, len(vocab)) for w in hyp]
    return r, h


_SMALL = 400


def _dp_small(ref: Sequence, hyp: Sequence) -> list[list[int]]:
    m = len(hyp)
    table = [list(range(m + 1))]
    for i, r in enumerate(ref, start=1):
        prev = table[-1]
        cur = [i]
        for j, h in enumerate(hyp, start=1):
            best = prev[j - 1] + (r != h)
            if prev[j] + 1 < best:
                best = prev[j] + 1
            if cur[j - 1] + 1 < best:
                best = cur[j - 1] + 1
            cur.append(best)
        table.append(cur)
    return table


def _dp(ref: Sequence[int], hyp: Sequence[int]):
    """Full Levenshtein table, one vectorised row per reference word."""
    n, m = len(ref), len(hyp)
    if n * m <= _SMALL:
        return _dp_small(ref, hyp)
    h = np.asarray(hyp, dtype=np.int64)
    cols = np.arange(m + 1, dtype=np.int64)
    table = np.empty((n + 1, m + 1), dtype=np.int64)
    table[0] = cols
    cur = np.empty(m + 1, dtype=np.int64)
    for i in range(1, n + 1):
        prev = table[i - 1]
        cur[0] = i
        cur[1:] = np.minimum(prev[:-1] + (h != ref[i - 1]), prev[1:] + 1)
        # insertions: cur[j] = min over k <= j of cur[k] + (j - k)
        table[i] = np.minimum.accumulate(cur - cols) + cols
    return table


def align(ref: Sequence[str], hyp: Sequence[str]) -> tuple[int, int, int]:
    """(substitutions, deletions, insertions) of a minimum edit-distance alignment.

    The backtrace prefers match/substitution, then deletion, then insertion.
    """
    if len(ref) * len(hyp) <= _SMALL:
        r, h = ref, hyp
    else:
        r, h = _encode(ref, hyp)
    table = _dp(r, h)
    i, j = len(r), len(h)
    s = d = ins = 0
    while i > 0 or j > 0:
        here = table[i][j]
        if i > 0 and j > 0 and here == table[i - 1][j - 1] + (r[i - 1] != h[j - 1]):
            s += r[i - 1] != h[j - 1]
            i, j = i - 1, j - 1
        elif i > 0 and here == table[i - 1][j] + 1:
            d += 1
            i -= 1
        else:
            ins += 1
            j -= 1
    return int(s), d, ins


def edit_distance(ref: Sequence[str], hyp: Sequence[str]) -> int:
    if not ref or not hyp:
        return max(len(ref), len(hyp))
    if len(ref) * len(hyp) <= _SMALL:
        return _dp_small(ref, hyp)[-1][-1]
    r, h = _encode(ref, hyp)
    return int(_dp(r, h)[-1][-1])


def wer(ref_words: Sequence[str], hyp_words: Sequence[str]) -> WerReport:
    if not ref_words:
        raise DataError("empty reference; WER undefined")
    s, d, i = align(ref_words, hyp_words)
    return WerReport(s, d, i, len(ref_words))


def cpwer(
    ref_by_speaker: Mapping[str, Sequence[str]],
    hyp_by_speaker: Mapping[str, Sequence[str]],
) -> WerReport:
    """WER under the speaker assignment minimising total edit distance.

    The smaller side is padded with empty streams so every stream is paired.
    """
    from scipy.optimize import linear_sum_assignment

    refs = [list(ref_by_speaker[k]) for k in sorted(ref_by_speaker)]
    hyps = [list(hyp_by_speaker[k]) for k in sorted(hyp_by_speaker)]
    if sum(len(r) for r in refs) == 0:
        raise DataError("no reference words; cpWER undefined")
    size = max(len(refs), len(hyps))
    refs += [[]] * (size - len(refs))
    hyps += [[]] * (size - len(hyps))
    cost = np.array([[edit_distance(r, h) for h in hyps] for r in refs], dtype=np.int64)
    rows, cols = linear_sum_assignment(cost)
    total = WerReport.zero()
    for r, c in zip(rows, cols):
        s, d, i = align(refs[r], hyps[c])
        total = total + WerReport(s, d, i, len(refs[r]))
    return total


def words_by_speaker(annotation: Annotation) -> dict[str, list[str]]:
    """Each speaker's words concatenated in segment start order."""
    out: dict[str, list[str]] = {}
    for seg in annotation.segments:
        words = out.setdefault(seg.speaker, [])
        if seg.words:
            words.extend(seg.words)
    return out
