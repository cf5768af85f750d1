"""Exact simulation of staircase cutting-and-stacking transformations."""
from .analysis import (
    CaseRecord,
    DelayDecomposition,
    DelayProfile,
    Rake,
    Segment,
    build_rake,
    classify_case,
    decompose_delay,
    delay_profile,
    find_multiplier,
    good_delay_density,
    mixing_sweep,
    rake_bound_check,
)
from .construction import (
    Affine,
    ConstantHeight,
    ConstructionParams,
    EqualHeight,
    ExplicitList,
    ExplicitSpacers,
    InTower,
    Spacer,
    Stage,
    StageTable,
    Staircase,
    build_stage_table,
    coarse_coords,
    column_offset,
    measure,
    refine,
)
from .dynamics import (
    CertifiedImage,
    Infinite,
    Probability,
    blum_hanson_check,
    cesaro_norm_sq,
    correlation,
    image,
    measure_intersection,
    preimage,
)
from .intervals import MeasureInterval
from .levelset import LevelSet

__version__ = "0.1.0"

__all__ = [
    "LevelSet",
    "MeasureInterval",
    "Affine",
    "CaseRecord",
    "CertifiedImage",
    "ConstantHeight",
    "ConstructionParams",
    "DelayDecomposition",
    "DelayProfile",
    "EqualHeight",
    "ExplicitList",
    "ExplicitSpacers",
    "InTower",
    "Infinite",
    "Probability",
    "Rake",
    "Segment",
    "Spacer",
    "Stage",
    "StageTable",
    "Staircase",
    "blum_hanson_check",
    "build_rake",
    "build_stage_table",
    "cesaro_norm_sq",
    "classify_case",
    "coarse_coords",
    "column_offset",
    "correlation",
    "decompose_delay",
    "delay_profile",
    "find_multiplier",
    "good_delay_density",
    "image",
    "measure",
    "measure_intersection",
    "mixing_sweep",
    "preimage",
    "rake_bound_check",
    "refine",
]
