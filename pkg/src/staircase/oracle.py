"""Brute-force cell counting at one deep stage.

This is a test instrument.  It rebuilds the tower of stage ``K`` by literally
cutting an indicator array into columns and stacking them with their spacers,
so it never touches the offset formulas, refinement or descent code used by
:mod:`staircase.dynamics`.  Cells pushed over the roof by the shift are not
guessed; they are counted into ``error_bound``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np

from . import kernels
from .construction import ConstructionParams, StageTable
from .dynamics import Infinite, NormalizationMode, measure_intersection, resolve_mode
from .errors import CellBudgetExceeded, DepthInsufficient, StaircaseError
from .intervals import MeasureInterval
from .levelset import LevelSet

ORACLE_MAX_CELLS = 10**6


@dataclass(frozen=True)
class OracleResult:
    value: Fraction
    error_bound: Fraction

    @property
    def interval(self) -> MeasureInterval:
        return MeasureInterval(self.value - self.error_bound, self.value + self.error_bound)


def _spacer_vector(params: ConstructionParams, j: int, r: int) -> np.ndarray:
    return np.array([params.spacers.spacer(j, i, r) for i in range(1, r + 1)], dtype=np.int64)


@lru_cache(maxsize=256)
def _tower(params: ConstructionParams, stage: int, levels: tuple, K: int):
    """Indicator of a level set re-drawn at stage ``K``, plus the cell width there."""
    h = params.h1
    w = params.base_width
    for j in range(1, stage):
        r = params.cuts.cut(j, h)
        h = (h + 1) * r + int(_spacer_vector(params, j, r).sum()) - 1
        w /= r
    if levels and max(levels) > h:
        raise ValueError(f"level {max(levels)} above roof {h} of stage {stage}")
    ind = np.zeros(h + 1, dtype=bool)
    ind[list(levels)] = True
    for j in range(stage, K):
        r = params.cuts.cut(j, len(ind) - 1)
        sp = _spacer_vector(params, j, r)
        if r * len(ind) + int(sp.sum()) > ORACLE_MAX_CELLS:
            raise CellBudgetExceeded(f"oracle stage {K} exceeds {ORACLE_MAX_CELLS} cells")
        ind = kernels.stack(ind, sp)
        w /= r
    ind.setflags(write=False)
    return ind, w


def cells(params: ConstructionParams, s: LevelSet, K: int):
    if K < s.stage:
        raise DepthInsufficient(f"oracle stage {K} shallower than operand stage {s.stage}")
    return _tower(params, s.stage, tuple(s.to_list()), K)


def oracle_measure_intersection(table: StageTable, A: LevelSet, B: LevelSet, m: int, K: int) -> OracleResult:
    """``mu(T^m A & B)`` by counting cells of the stage-``K`` tower."""
    a, w = cells(table.params, A, K)
    b, _ = cells(table.params, B, K)
    top = len(a) - 1
    if m > top:
        raise DepthInsufficient(f"shift {m} exceeds roof {top} of oracle stage {K}")
    hits, lost = kernels.shifted_overlap(a, b, m)
    return OracleResult(hits * w, lost * w)


def oracle_correlation(table: StageTable, B: LevelSet, n: int, mode: NormalizationMode, K: int) -> OracleResult:
    mode = resolve_mode(table, mode)
    raw = oracle_measure_intersection(table, B, B, n, K)
    if isinstance(mode, Infinite):
        return raw
    b, w = cells(table.params, B, K)
    p = int(np.count_nonzero(b)) * w / mode.mu_ref
    return OracleResult(raw.value / mode.mu_ref - p * p, raw.error_bound / mode.mu_ref)


@dataclass(frozen=True)
class Instance:
    A: LevelSet
    B: LevelSet
    m: int
    K: int
    tol: Fraction = Fraction(1, 2**20)


@dataclass
class OracleReport:
    checked: int = 0
    failures: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures


def oracle_check(table: StageTable, instances) -> OracleReport:
    """Check that each certified interval meets the oracle's ``value +- error_bound``."""
    report = OracleReport()
    for inst in instances:
        report.checked += 1
        try:
            got = measure_intersection(table, inst.A, inst.B, inst.m, inst.tol)
            ref = oracle_measure_intersection(table, inst.A, inst.B, inst.m, inst.K)
        except StaircaseError as exc:
            report.failures.append({"instance": inst, "error": repr(exc)})
            continue
        if not got.overlaps(ref.interval):
            report.failures.append({"instance": inst, "certified": got, "oracle": ref})
    return report
