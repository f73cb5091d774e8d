"""Corpus-level scoring: per-recording results plus a micro-averaged total.

Machine-readable reports are JSON lines, one record per recording in sorted
``recording_id`` order followed by a ``TOTAL`` record.  Durations are written
with six decimals; rates are full-precision floats.
"""

from __future__ import annotations

import json
import math
from collections.abc import Sequence
from dataclasses import dataclass, field

from teerkit.config import Config
from teerkit.errors import DataError
from teerkit.io import format_time
from teerkit.metrics import (
    EmotionReport,
    MetricReport,
    VadReport,
    WerReport,
    cpwer,
    der,
    emotion_accuracy,
    normalize_words,
    steer,
    teer,
    vad_errors,
    wer,
)
from teerkit.timeline import EMOTIONS, Annotation, default_extent, to_us

METRICS = ("der", "teer", "steer", "vad", "wer", "cpwer", "acc", "joint")
TOTAL_ID = "TOTAL"


@dataclass
class ScoreTable:
    metric: str
    rows: list[tuple[str, object]] = field(default_factory=list)
    total: object = None

    def records(self) -> list[dict]:
        out = [_record(self.metric, rec, r) for rec, r in self.rows]
        out.append(_record(self.metric, TOTAL_ID, self.total))
        return out


def _pair(refs: Sequence[Annotation], hyps: Sequence[Annotation]) -> list[tuple[Annotation, Annotation]]:
    ref_by = {a.recording_id: a for a in refs}
    hyp_by = {a.recording_id: a for a in hyps}
    extra = sorted(set(hyp_by) - set(ref_by))
    if extra:
        raise DataError(f"hypothesis recordings missing from reference: {extra}")
    if not ref_by:
        raise DataError("reference contains no recordings")
    return [(ref_by[r], hyp_by.get(r, Annotation(r))) for r in sorted(ref_by)]


def _utterances(ann: Annotation) -> dict[tuple[str, int, int], object]:
    out = {}
    for seg in ann.segments:
        key = (ann.recording_id, seg.span.start_us, seg.span.end_us)
        if key in out:
            raise DataError(
                f"{ann.recording_id}: two utterances share span [{seg.start:g}, {seg.end:g})"
            )
        out[key] = seg
    return out


def _wer_for(ref: Annotation, hyp: Annotation) -> WerReport:
    r_utts, h_utts = _utterances(ref), _utterances(hyp)
    if r_utts.keys() != h_utts.keys():
        raise DataError(f"{ref.recording_id}: utterance spans differ between reference and hypothesis")
    total = WerReport.zero()
    for key, seg in r_utts.items():
        r_words = normalize_words(seg.words or ())
        h_words = normalize_words(h_utts[key].words or ())
        if r_words:
            total = total + wer(r_words, h_words)
        elif h_words:
            total = total + WerReport(0, 0, len(h_words), 0)
    return total


def _cpwer_for(ref: Annotation, hyp: Annotation) -> WerReport:
    def streams(ann: Annotation) -> dict[str, list[str]]:
        out: dict[str, list[str]] = {}
        for seg in ann.segments:
            out.setdefault(seg.speaker, []).extend(normalize_words(seg.words or ()))
        return out

    return cpwer(streams(ref), streams(hyp))


def _acc_for(ref: Annotation, hyp: Annotation) -> EmotionReport:
    r_utts, h_utts = _utterances(ref), _utterances(hyp)
    for key, seg in [*r_utts.items(), *h_utts.items()]:
        if seg.emotion is None:
            raise DataError(f"{key[0]}: utterance at {seg.start:g}s has no emotion label")
    return emotion_accuracy(
        [(k, s.emotion) for k, s in r_utts.items()],
        [(k, s.emotion) for k, s in h_utts.items()],
    )


@dataclass(frozen=True)
class JointResult:
    cpwer: WerReport
    steer: MetricReport
    teer: MetricReport

    def __add__(self, other: JointResult) -> JointResult:
        return JointResult(self.cpwer + other.cpwer, self.steer + other.steer, self.teer + other.teer)


def score(
    metric: str,
    refs: Sequence[Annotation],
    hyps: Sequence[Annotation],
    config: Config = Config(),
) -> ScoreTable:
    """Score every reference recording and micro-average across them."""
    if metric not in METRICS:
        raise DataError(f"unknown metric {metric!r}; choose from {', '.join(METRICS)}")
    table = ScoreTable(metric)
    for ref, hyp in _pair(refs, hyps):
        rid = ref.recording_id
        if metric in ("der", "teer", "steer", "vad", "joint"):
            if not ref.segments:
                raise DataError(f"{rid}: empty reference")
            extent = default_extent(ref, hyp)
        if metric == "der":
            r = der(ref, hyp, config.collar, extent)
        elif metric == "teer":
            r = teer(ref, hyp, config.collar, extent, config.overlap)
        elif metric == "steer":
            r = steer(ref, hyp, config.collar, extent, config.overlap)
        elif metric == "vad":
            r = vad_errors(ref.speech(), hyp.speech(), extent, config.far_denominator)
        elif metric == "wer":
            r = _wer_for(ref, hyp)
        elif metric == "cpwer":
            r = _cpwer_for(ref, hyp)
        elif metric == "acc":
            r = _acc_for(ref, hyp)
        else:
            r = JointResult(
                _cpwer_for(ref, hyp),
                steer(ref, hyp, config.collar, extent, config.overlap),
                teer(ref, hyp, config.collar, extent, config.overlap),
            )
        table.rows.append((rid, r))
    total = table.rows[0][1]
    for _, r in table.rows[1:]:
        total = total + r
    table.total = total
    return table


def _safe(fn):
    try:
        return fn()
    except DataError:
        return None


def _record(metric: str, rid: str, r) -> dict:
    if isinstance(r, MetricReport):
        return {
            "recording_id": rid,
            "MS": to_us(r.missed),
            "FA": to_us(r.false_alarm),
            "CONF": to_us(r.confusion),
            "TOTAL": to_us(r.total),
            "rate": _safe(lambda: r.rate),
        }
    if isinstance(r, VadReport):
        return {
            "recording_id": rid,
            "MS": to_us(r.missed),
            "FA": to_us(r.false_alarm),
            "SPEECH": to_us(r.speech),
            "NONSPEECH": to_us(r.nonspeech),
            "MSR": _safe(lambda: r.msr),
            "FAR": _safe(lambda: r.far),
        }
    if isinstance(r, WerReport):
        return {
            "recording_id": rid,
            "SUB": r.substitutions,
            "DEL": r.deletions,
            "INS": r.insertions,
            "REF_WORDS": r.ref_words,
            "rate": _safe(lambda: r.wer),
        }
    if isinstance(r, EmotionReport):
        return {
            "recording_id": rid,
            "N": r.total,
            "CORRECT": int(r.confusion.trace()),
            "accuracy": _safe(lambda: r.accuracy),
            "accuracy_4way": _safe(lambda: r.four_way_accuracy),
            "confusion": r.confusion.tolist(),
        }
    if isinstance(r, JointResult):
        return {
            "recording_id": rid,
            "cpWER": _safe(lambda: r.cpwer.wer),
            "sTEER": _safe(lambda: r.steer.rate),
            "TEER": _safe(lambda: r.teer.rate),
        }
    raise TypeError(f"cannot report {type(r).__name__}")


_DURATION_KEYS = {"MS", "FA", "CONF", "TOTAL", "SPEECH", "NONSPEECH"}


def _json_value(key: str, value) -> str:
    if key in _DURATION_KEYS:
        return format_time(value)
    if isinstance(value, float):
        return repr(value) if math.isfinite(value) else "null"
    return json.dumps(value)


def format_report(table: ScoreTable) -> str:
    """JSON-lines machine report."""
    lines = []
    for rec in table.records():
        body = ", ".join(f"{json.dumps(k)}: {_json_value(k, v)}" for k, v in rec.items())
        lines.append("{" + body + "}")
    return "".join(line + "\n" for line in lines)


def _pct(v) -> str:
    return "-" if v is None else f"{100 * v:.2f}"


def _secs(us: int) -> str:
    return f"{us / 1e6:.2f}"


def format_table(table: ScoreTable) -> str:
    """Fixed-width human-readable table."""
    recs = table.records()
    m = table.metric
    if m in ("der", "teer", "steer"):
        name = {"der": "DER", "teer": "TEER", "steer": "sTEER"}[m]
        header = ["recording", "MS(s)", "FA(s)", "CONF(s)", "TOTAL(s)", f"%{name}"]
        rows = [
            [r["recording_id"], _secs(r["MS"]), _secs(r["FA"]), _secs(r["CONF"]),
             _secs(r["TOTAL"]), _pct(r["rate"])]
            for r in recs
        ]
    elif m == "vad":
        header = ["recording", "MS(s)", "FA(s)", "SPEECH(s)", "%MSR", "%FAR"]
        rows = [
            [r["recording_id"], _secs(r["MS"]), _secs(r["FA"]), _secs(r["SPEECH"]),
             _pct(r["MSR"]), _pct(r["FAR"])]
            for r in recs
        ]
    elif m in ("wer", "cpwer"):
        header = ["recording", "SUB", "DEL", "INS", "REF", "%cpWER" if m == "cpwer" else "%WER"]
        rows = [
            [r["recording_id"], str(r["SUB"]), str(r["DEL"]), str(r["INS"]),
             str(r["REF_WORDS"]), _pct(r["rate"])]
            for r in recs
        ]
    elif m == "acc":
        header = ["recording", "N", "CORRECT", "%Acc", "%Acc4"]
        rows = [
            [r["recording_id"], str(r["N"]), str(r["CORRECT"]), _pct(r["accuracy"]),
             _pct(r["accuracy_4way"])]
            for r in recs
        ]
    else:
        header = ["recording", "%cpWER", "%sTEER", "%TEER"]
        rows = [
            [r["recording_id"], _pct(r["cpWER"]), _pct(r["sTEER"]), _pct(r["TEER"])]
            for r in recs
        ]
    widths = [max(len(x) for x in col) for col in zip(header, *rows)]
    fmt = lambda cells: "  ".join(  # noqa: E731
        c.ljust(w) if i == 0 else c.rjust(w) for i, (c, w) in enumerate(zip(cells, widths))
    )
    out = [fmt(header), fmt(["-" * w for w in widths])]
    out += [fmt(r) for r in rows[:-1]]
    out += [fmt(["-" * w for w in widths]), fmt(rows[-1])]
    if m == "acc":
        out.append("")
        out.append("confusion (rows: reference, columns: hypothesis)")
        labels = [e.value for e in EMOTIONS]
        conf = recs[-1]["confusion"]
        w = max(max(len(x) for x in labels), max(len(str(v)) for row in conf for v in row))
        out.append(" " * w + "  " + "  ".join(x.rjust(w) for x in labels))
        for lab, row in zip(labels, conf):
            out.append(lab.ljust(w) + "  " + "  ".join(str(v).rjust(w) for v in row))
    return "\n".join(out) + "\n"
