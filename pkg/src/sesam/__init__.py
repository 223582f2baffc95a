"""Weak-label refinement toolkit: turns sparse semantic annotations into
dense per-pixel labels by orchestrating a promptable instance-mask oracle."""

from .raster import IGNORE_VALUE, BinaryMask, Box, LabelMap, ScalarField
from .refine import RefinementConfig, WeakAnnotation, WeakKind
from .sampling import PointPrompt, SamplerSpec, Strategy
from .selection import CandidateMaskSet, SelectionConfig, SelectionStrategy

__all__ = [
    "IGNORE_VALUE",
    "BinaryMask",
    "Box",
    "LabelMap",
    "ScalarField",
    "RefinementConfig",
    "WeakAnnotation",
    "WeakKind",
    "PointPrompt",
    "SamplerSpec",
    "Strategy",
    "CandidateMaskSet",
    "SelectionConfig",
    "SelectionStrategy",
]
