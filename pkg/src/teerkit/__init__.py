"""Segmentation and time-weighted scoring for conversational speech pipelines."""

from teerkit.errors import DataError, ParseError
from teerkit.timeline import (
    EMOTIONS,
    Annotation,
    EmotionLabel,
    RichSegment,
    Timeline,
    TimeSpan,
    scoring_mask,
    span,
    timeline_intersect,
    timeline_subtract,
    timeline_union,
)

__version__ = "0.1.0"

__all__ = [
    "EMOTIONS",
    "Annotation",
    "DataError",
    "EmotionLabel",
    "ParseError",
    "RichSegment",
    "TimeSpan",
    "Timeline",
    "scoring_mask",
    "span",
    "timeline_intersect",
    "timeline_subtract",
    "timeline_union",
]
