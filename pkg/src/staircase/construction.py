"""Cutting-and-stacking recursion for rank-one towers.

Levels of the stage-``j`` tower are numbered ``0..h_j`` from the base upward.
Passing from stage ``j`` to ``j+1`` cuts the tower into ``r_j`` columns of
equal width, tops column ``i`` with ``s_j(i)`` spacers and stacks column
``i+1`` on top of column ``i``.  Column ``i`` therefore starts at level
``column_offset(j, i)`` of the stage-``(j+1)`` tower.
"""
from __future__ import annotations

import os
import threading
from dataclasses import dataclass, field
from fractions import Fraction
from math import isqrt
from typing import Optional, Union

import numpy as np

from . import kernels
from .errors import (
    CellBudgetExceeded,
    ColumnOutOfRange,
    LevelOutOfRange,
    PolicyUndefined,
    StageMissing,
)
from .levelset import LevelSet

DEFAULT_MAX_CELLS = 50_000_000


def max_cells() -> int:
    """Upper bound on the length of any level array the package materializes."""
    raw = os.environ.get("STAIRCASE_MAX_STAGE_CELLS")
    return int(raw) if raw else DEFAULT_MAX_CELLS


def check_budget(n: int, what: str = "level array") -> None:
    cap = max_cells()
    if n > cap:
        raise CellBudgetExceeded(f"{what} needs {n} cells, above STAIRCASE_MAX_STAGE_CELLS={cap}")


# ------------------------------------------------------------------ policies


@dataclass(frozen=True)
class Staircase:
    """``s_j(i) = i - 1``."""

    def spacer(self, j: int, i: int, r: int) -> int:
        return i - 1

    def total(self, j: int, r: int) -> int:
        return r * (r - 1) // 2

    def __str__(self):
        return "staircase"


@dataclass(frozen=True)
class ConstantHeight:
    k: int

    def __post_init__(self):
        if self.k < 0:
            raise ValueError("spacer height must be nonnegative")

    def spacer(self, j: int, i: int, r: int) -> int:
        return self.k

    def total(self, j: int, r: int) -> int:
        return self.k * r

    def __str__(self):
        return f"const:{self.k}"


@dataclass(frozen=True)
class ExplicitSpacers:
    """Per-stage spacer vectors; ``vectors[j-1]`` is ``(s_j(1), ..., s_j(r_j))``."""

    vectors: tuple

    def __post_init__(self):
        vecs = tuple(tuple(int(s) for s in v) for v in self.vectors)
        if any(s < 0 for v in vecs for s in v):
            raise ValueError("spacer counts must be nonnegative")
        object.__setattr__(self, "vectors", vecs)

    def vector(self, j: int, r: int) -> tuple:
        if j - 1 >= len(self.vectors):
            raise PolicyUndefined(f"no spacer vector given for stage {j}")
        v = self.vectors[j - 1]
        if len(v) != r:
            raise PolicyUndefined(f"stage {j} spacer vector has {len(v)} entries, r_{j} = {r}")
        return v

    def spacer(self, j: int, i: int, r: int) -> int:
        return self.vector(j, r)[i - 1]

    def total(self, j: int, r: int) -> int:
        return sum(self.vector(j, r))

    def __str__(self):
        return "explicit"


SpacerPolicy = Union[Staircase, ConstantHeight, ExplicitSpacers]


@dataclass(frozen=True)
class ExplicitList:
    values: tuple

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(int(v) for v in self.values))

    def cut(self, j: int, h: int) -> int:
        if j - 1 >= len(self.values):
            raise PolicyUndefined(f"cut list has no entry for stage {j}")
        return self.values[j - 1]

    def __str__(self):
        return "list:" + ",".join(map(str, self.values))


@dataclass(frozen=True)
class Affine:
    """``r_j = a*j + b``."""

    a: int
    b: int

    def cut(self, j: int, h: int) -> int:
        return self.a * j + self.b

    def __str__(self):
        return f"affine:{self.a},{self.b}"


@dataclass(frozen=True)
class EqualHeight:
    """``r_j = h_j``."""

    def cut(self, j: int, h: int) -> int:
        return h

    def __str__(self):
        return "equal-height"


CutPolicy = Union[ExplicitList, Affine, EqualHeight]


@dataclass(frozen=True)
class ConstructionParams:
    h1: int
    cuts: CutPolicy
    spacers: SpacerPolicy = field(default_factory=Staircase)
    base_width: Fraction = Fraction(1)

    def __post_init__(self):
        object.__setattr__(self, "base_width", Fraction(self.base_width))
        if self.h1 < 1:
            raise ValueError("h1 must be >= 1")
        if self.base_width <= 0:
            raise ValueError("base_width must be positive")


# -------------------------------------------------------------------- stages


@dataclass(frozen=True)
class Stage:
    j: int
    h: int
    r: Optional[int]  # None when the cut policy is undefined at this stage
    w: Fraction
    spacer_total: Optional[int] = None

    @property
    def total(self) -> Fraction:
        return (self.h + 1) * self.w

    @property
    def levels(self) -> int:
        return self.h + 1


@dataclass(frozen=True)
class InTower:
    """Level ``level`` of the coarse tower.

    ``chain`` lists the column taken at each descent step, finest stage first;
    ``column`` is the last of them (the column of the coarse stage), or None
    when no descent happened.
    """

    level: int
    column: Optional[int] = None
    chain: tuple = ()


@dataclass(frozen=True)
class Spacer:
    added_at_stage: int
    column: int
    spacer_index: int


TowerCoord = Union[InTower, Spacer]


class StageTable:
    """Append-only record of stages ``1..depth``.

    Reads never mutate; :meth:`extend` is the only writer and is serialized by a
    lock, so a pre-extended table can be shared by concurrent readers.
    """

    def __init__(self, params: ConstructionParams):
        self.params = params
        self._stages: list[Stage] = []
        self._offsets: dict[int, np.ndarray] = {}
        self._lock = threading.Lock()
        self._stages.append(self._make_stage(1, params.h1, params.base_width))

    def __getstate__(self):
        state = self.__dict__.copy()
        del state["_lock"]
        state["_offsets"] = {}
        return state

    def __setstate__(self, state):
        self.__dict__.update(state)
        self._lock = threading.Lock()

    def _make_stage(self, j: int, h: int, w: Fraction) -> Stage:
        try:
            r = self.params.cuts.cut(j, h)
        except PolicyUndefined:
            return Stage(j, h, None, w)
        if r < 2:
            return Stage(j, h, None, w)
        try:
            total = self.params.spacers.total(j, r)
        except PolicyUndefined:
            return Stage(j, h, None, w)
        return Stage(j, h, r, w, total)

    @property
    def stages(self) -> tuple:
        return tuple(self._stages)

    @property
    def depth(self) -> int:
        return len(self._stages)

    @property
    def deepest(self) -> Stage:
        return self._stages[-1]

    def __len__(self):
        return len(self._stages)

    def extend(self, J: int) -> "StageTable":
        """Build stages up to ``J``; raises PolicyUndefined if the policy stops earlier."""
        if J <= len(self._stages):
            return self
        with self._lock:
            while len(self._stages) < J:
                last = self._stages[-1]
                if last.r is None:
                    r = None
                    try:
                        r = self.params.cuts.cut(last.j, last.h)
                        if r >= 2:
                            self.params.spacers.total(last.j, r)
                    except PolicyUndefined as exc:
                        raise PolicyUndefined(f"cannot build stage {last.j + 1}: {exc}") from None
                    raise PolicyUndefined(f"cannot build stage {last.j + 1}: r_{last.j} = {r} < 2")
                h_next = (last.h + 1) * last.r + last.spacer_total - 1
                self._stages.append(self._make_stage(last.j + 1, h_next, last.w / last.r))
        return self

    def ensure(self, J: int) -> Stage:
        """Stage ``J``, extending if the policy allows; StageMissing otherwise."""
        if J > len(self._stages):
            try:
                self.extend(J)
            except PolicyUndefined as exc:
                raise StageMissing(str(exc)) from None
        return self._stages[J - 1]

    def stage(self, j: int) -> Stage:
        if j < 1 or j > len(self._stages):
            raise StageMissing(f"stage {j} not built (depth {len(self._stages)})")
        return self._stages[j - 1]

    def width(self, j: int) -> Fraction:
        return self.stage(j).w

    def cut(self, j: int) -> int:
        r = self.stage(j).r
        if r is None:
            raise StageMissing(f"cut count r_{j} undefined; stage {j + 1} cannot be built")
        return r

    def spacer(self, j: int, i: int) -> int:
        return self.params.spacers.spacer(j, i, self.cut(j))

    # ------------------------------------------------------------ offsets

    def column_offset(self, j: int, i: int) -> int:
        st = self.stage(j)
        r = self.cut(j)
        if not 1 <= i <= r:
            raise ColumnOutOfRange(f"column {i} outside [1, {r}] at stage {j}")
        sp = self.params.spacers
        if isinstance(sp, Staircase):
            return (i - 1) * (st.h + 1) + (i - 1) * (i - 2) // 2
        if isinstance(sp, ConstantHeight):
            return (i - 1) * (st.h + 1 + sp.k)
        return int(self.offsets(j)[i - 1])

    def offsets(self, j: int) -> np.ndarray:
        """All ``r_j`` column offsets as an array (cached, budget-checked)."""
        cached = self._offsets.get(j)
        if cached is not None:
            return cached
        st = self.stage(j)
        r = self.cut(j)
        check_budget(r, f"offset array of stage {j}")
        top = self.stage(j + 1).h if j + 1 <= len(self._stages) else (st.h + 1) * r + st.spacer_total
        dt = kernels.level_dtype(top)
        sp = self.params.spacers
        if isinstance(sp, Staircase) and dt is np.int64:
            i = np.arange(r, dtype=np.int64)
            out = i * (st.h + 1) + i * (i - 1) // 2
        elif isinstance(sp, ConstantHeight) and dt is np.int64:
            out = np.arange(r, dtype=np.int64) * (st.h + 1 + sp.k)
        else:
            svec = sp.vector(j, r) if isinstance(sp, ExplicitSpacers) else [sp.spacer(j, i, r) for i in range(1, r + 1)]
            steps = [st.h + 1 + s for s in svec[:-1]]
            acc, vals = 0, [0]
            for s in steps:
                acc += s
                vals.append(acc)
            out = np.array(vals, dtype=dt)
        self._offsets[j] = out
        return out

    def column_of(self, j: int, n: int):
        """Column ``i`` of stage ``j`` whose block in tower ``j+1`` holds level ``n``.

        Returns ``(i, n - column_offset(j, i))``.
        """
        r = self.cut(j)
        sp = self.params.spacers
        h = self.stage(j).h
        if isinstance(sp, Staircase):
            # largest i with (i-1)(h+1) + (i-1)(i-2)/2 <= n, via x = i-1
            b = 2 * h + 1
            x = (isqrt(b * b + 8 * n) - b) // 2
            x = max(0, min(x, r - 1))
            while x + 1 <= r - 1 and self.column_offset(j, x + 2) <= n:
                x += 1
            while x > 0 and self.column_offset(j, x + 1) > n:
                x -= 1
            i = x + 1
        elif isinstance(sp, ConstantHeight):
            i = min(n // (h + 1 + sp.k), r - 1) + 1
        else:
            off = self.offsets(j)
            i = int(np.searchsorted(off, n, side="right"))
        return i, n - self.column_offset(j, i)


def build_stage_table(params: ConstructionParams, J: int) -> StageTable:
    if J < 1:
        raise ValueError("J must be >= 1")
    return StageTable(params).extend(J)


def column_offset(table: StageTable, j: int, i: int) -> int:
    return table.column_offset(j, i)


def coarse_coords(table: StageTable, J: int, n: int, j: int) -> TowerCoord:
    """Express level ``n`` of tower ``J`` in the coordinates of tower ``j <= J``."""
    if j > J:
        raise ValueError("target stage must not exceed source stage")
    top = table.stage(J).h
    if not 0 <= n <= top:
        raise LevelOutOfRange(f"level {n} outside [0, {top}] at stage {J}")
    table.stage(j)
    chain = []
    for K in range(J, j, -1):
        i, local = table.column_of(K - 1, n)
        h_prev = table.stage(K - 1).h
        if local > h_prev:
            return Spacer(added_at_stage=K, column=i, spacer_index=local - h_prev)
        chain.append(i)
        n = local
    return InTower(level=n, column=chain[-1] if chain else None, chain=tuple(chain))


def refine_levels(table: StageTable, levels: np.ndarray, j: int, J: int) -> np.ndarray:
    """Map a sorted level array of stage ``j`` to its copy at stage ``J >= j``."""
    for k in range(j, J):
        table.ensure(k + 1)
        off = table.offsets(k)
        check_budget(levels.shape[0] * off.shape[0], f"refinement to stage {k + 1}")
        if off.dtype != levels.dtype:
            levels = levels.astype(object)
            off = off.astype(object)
        levels = kernels.refine(levels, off)
    return levels


def refine(table: StageTable, s: LevelSet, J: int) -> LevelSet:
    if s.stage > J:
        raise ValueError(f"cannot refine stage-{s.stage} set to coarser stage {J}")
    if s.stage == J:
        return s
    return LevelSet(J, refine_levels(table, s.levels, s.stage, J), trusted=True)


def measure(table: StageTable, s: LevelSet) -> Fraction:
    return len(s) * table.stage(s.stage).w


def validate(table: StageTable, s: LevelSet) -> LevelSet:
    top = table.ensure(s.stage).h
    if len(s) and s.levels[-1] > top:
        raise LevelOutOfRange(f"level {s.levels[-1]} above roof {top} of stage {s.stage}")
    return s
