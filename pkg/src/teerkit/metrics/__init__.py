from teerkit.metrics.duration import (
    MetricReport,
    SpeakerMapping,
    VadReport,
    der,
    far_msr,
    optimal_mapping,
    steer,
    teer,
    vad_errors,
)
from teerkit.metrics.emotion import EmotionReport, emotion_accuracy
from teerkit.metrics.wer import (
    WerReport,
    align,
    cpwer,
    edit_distance,
    normalize_words,
    wer,
    words_by_speaker,
)

__all__ = [
    "EmotionReport",
    "MetricReport",
    "SpeakerMapping",
    "VadReport",
    "WerReport",
    "align",
    "cpwer",
    "der",
    "edit_distance",
    "emotion_accuracy",
    "far_msr",
    "normalize_words",
    "optimal_mapping",
    "steer",
    "teer",
    "vad_errors",
    "wer",
    "words_by_speaker",
]
