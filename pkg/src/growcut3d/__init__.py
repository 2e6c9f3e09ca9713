"""Interactive 3D GrowCut segmentation toolkit."""

from .grid import (
    Axis,
    BinaryMask,
    InputError,
    Label,
    Roi,
    SeedSet,
    VolumeGrid,
    compute_roi,
    crop,
    neighbors,
    uncrop,
)
from .contours import ContourSet, ContourSlice, voxelize_contours
from .engine import (
    AutomatonState,
    GrowCutConfig,
    SegmentationResult,
    dist,
    g,
    initialize,
    run,
    run_reference,
    step,
)
from .metrics import EvaluationReport, SummaryStats, dice, evaluate, hausdorff, summarize, volume_mm3
from .morphology import StructuringElement, component_count, dilate, erode, remove_islands
from .phantom import PhantomSpec, ShapeSpec, auto_seeds, generate

__version__ = "0.1.0"

__all__ = [
    "Axis", "BinaryMask", "InputError", "Label", "Roi", "SeedSet", "VolumeGrid",
    "compute_roi", "crop", "neighbors", "uncrop",
    "ContourSet", "ContourSlice", "voxelize_contours",
    "AutomatonState", "GrowCutConfig", "SegmentationResult",
    "dist", "g", "initialize", "run", "run_reference", "step",
    "EvaluationReport", "SummaryStats", "dice", "evaluate", "hausdorff",
    "summarize", "volume_mm3",
    "StructuringElement", "component_count", "dilate", "erode", "remove_islands",
    "PhantomSpec", "ShapeSpec", "auto_seeds", "generate",
    "__version__",
]
