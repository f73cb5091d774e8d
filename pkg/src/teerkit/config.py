from __future__ import annotations

from dataclasses import dataclass

from teerkit.errors import DataError


@dataclass(frozen=True)
class Config:
    """Pipeline and scoring settings; field names mirror the CLI flags."""

    collar: float = 0.25
    vad_threshold: float = 0.5
    min_duration: float = 0.25
    postprocess_order: str = "fill-first"
    vad_window: float = 3.0
    vad_hop: float = 1.0
    emb_window: float = 1.0
    emb_overlap: float = 0.5
    num_speakers: int | None = None
    k_max: int = 8
    far_denominator: str = "speech"
    overlap: str = "multi"
    seed: int = 0

    def __post_init__(self) -> None:
        if self.collar < 0:
            raise DataError("collar must be >= 0")
        if not 0 < self.vad_threshold < 1:
            raise DataError("vad-threshold must lie in (0, 1)")
        if self.min_duration < 0:
            raise DataError("min-duration must be >= 0")
        for name in ("vad_window", "vad_hop", "emb_window"):
            if getattr(self, name) <= 0:
                raise DataError(f"{name.replace('_', '-')} must be positive")
        if self.vad_hop > self.vad_window:
            raise DataError("vad-hop must not exceed vad-window")
        if not 0 <= self.emb_overlap < self.emb_window:
            raise DataError("emb-overlap must lie in [0, emb-window)")
        if self.k_max < 1:
            raise DataError("k-max must be >= 1")
        if self.num_speakers is not None and not 1 <= self.num_speakers <= self.k_max:
            raise DataError("num-speakers must lie in [1, k-max]")
        if self.far_denominator not in ("speech", "nonspeech"):
            raise DataError("far-denominator must be 'speech' or 'nonspeech'")
        if self.overlap not in ("multi", "single"):
            raise DataError("overlap must be 'multi' or 'single'")
        if self.postprocess_order not in ("fill-first", "drop-first"):
            raise DataError("postprocess-order must be 'fill-first' or 'drop-first'")
