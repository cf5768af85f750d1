"""Sets of tower levels at a fixed stage."""
from __future__ import annotations

import numpy as np

from .kernels import level_dtype


class LevelSet:
    """A union of whole levels of the stage-``stage`` tower.

    ``levels`` is kept as a sorted, duplicate-free numpy array; its dtype is
    int64 unless the indices outgrow it, in which case it holds Python ints.
    """

    __slots__ = ("stage", "levels")

    def __init__(self, stage: int, levels, *, trusted: bool = False):
        self.stage = int(stage)
        if trusted:
            self.levels = levels
            return
        vals = sorted({int(v) for v in (levels.tolist() if isinstance(levels, np.ndarray) else levels)})
        top = vals[-1] if vals else 0
        if vals and vals[0] < 0:
            raise ValueError("level indices must be nonnegative")
        self.levels = np.array(vals, dtype=level_dtype(top))

    def __len__(self) -> int:
        return int(self.levels.shape[0])

    def __iter__(self):
        return iter(self.levels.tolist())

    def __eq__(self, other):
        if not isinstance(other, LevelSet):
            return NotImplemented
        return self.stage == other.stage and self.levels.tolist() == other.levels.tolist()

    def __hash__(self):
        return hash((self.stage, tuple(self.levels.tolist())))

    def __repr__(self) -> str:
        vals = self.levels.tolist()
        shown = ", ".join(map(str, vals[:8])) + (", ..." if len(vals) > 8 else "")
        return f"LevelSet(stage={self.stage}, levels=[{shown}])"

    def to_list(self) -> list[int]:
        return self.levels.tolist()
