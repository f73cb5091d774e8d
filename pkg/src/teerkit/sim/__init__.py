from teerkit.sim.generate import Injected, SynthResult, SynthSpec, generate
from teerkit.sim.oracle import GridReport, GridScore, frame_grid_oracle, grid_tolerance

__all__ = [
    "GridReport",
    "GridScore",
    "Injected",
    "SynthResult",
    "SynthSpec",
    "frame_grid_oracle",
    "generate",
    "grid_tolerance",
]
