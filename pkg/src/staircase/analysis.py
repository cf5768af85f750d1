"""Staircase-specific analysis of ``T^m`` on a single tower.

For ``m`` between ``h_j`` and ``h_{j+1}`` the image ``T^m E_j`` is cut by the
roof of the stage-``j`` tower into domains on which consecutive columns land
at levels that drop by a constant amount (the delay).  This module computes
the arithmetic side (delay decomposition, case ratios, multipliers), the
geometric side (delay profiles, rakes) and the empirical correlation checks
built on them.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from functools import partial
from math import isqrt
from typing import Optional, Sequence

import numpy as np

from . import kernels
from .construction import Staircase, StageTable, check_budget, measure, refine_levels
from .dynamics import (
    Infinite,
    MeasureInterval,
    NormalizationMode,
    Probability,
    cesaro_norm_sq,
    correlation,
    measure_intersection,
    resolve_mode,
)
from .errors import ColumnOutOfRange, LevelOutOfRange, MultiplierNotFound
from .levelset import LevelSet
from .parallel import pmap

# ------------------------------------------------------- delay arithmetic


@dataclass(frozen=True)
class DelayDecomposition:
    d: int
    t: int


def roof_count(d: int, h: int) -> int:
    """``sum_{i=1}^{d} (h + i - 1)``: steps needed to cross the roof ``d`` times."""
    return d * h + d * (d - 1) // 2


def decompose_delay(m: int, h: int) -> DelayDecomposition:
    """Unique ``(d, t)`` with ``m = d*h + d(d-1)/2 + t`` and ``0 <= t < d + h``."""
    if m < 0 or h < 1:
        raise ValueError("need m >= 0 and h >= 1")
    b = 2 * h - 1
    # largest d with d^2 + (2h-1) d <= 2m
    d = (isqrt(b * b + 8 * m) - b) // 2
    while roof_count(d + 1, h) <= m:
        d += 1
    while d > 0 and roof_count(d, h) > m:
        d -= 1
    return DelayDecomposition(d, m - roof_count(d, h))


DEFAULT_THRESHOLDS = (Fraction(1, 10), Fraction(10))


@dataclass(frozen=True)
class CaseRecord:
    j: int
    m: int
    d: int
    t: int
    ratio: Fraction
    tag: str  # "0", "C", "inf" or "unclassified"


def stage_of(table: StageTable, m: int) -> int:
    """The ``j`` with ``h_j <= m < h_{j+1}``, extending the table as needed."""
    if m < table.stage(1).h:
        raise ValueError(f"m = {m} lies below h_1 = {table.stage(1).h}")
    j = 1
    while True:
        nxt = table.ensure(j + 1)
        if m < nxt.h:
            return j
        j += 1


def classify_case(table: StageTable, ms: Sequence[int], thresholds=DEFAULT_THRESHOLDS) -> list:
    """Case records for each ``m``; the tag is a heuristic label, the ratio is exact.

    ``thresholds=(lo, hi)`` tags ratios below ``lo`` as ``"0"``, above ``hi``
    as ``"inf"`` and the rest as ``"C"``; ``None`` leaves everything
    unclassified.
    """
    out = []
    for m in ms:
        j = stage_of(table, m)
        h = table.stage(j).h
        dec = decompose_delay(m, h)
        ratio = Fraction(dec.d * dec.d, h)
        if thresholds is None:
            tag = "unclassified"
        elif ratio < thresholds[0]:
            tag = "0"
        elif ratio > thresholds[1]:
            tag = "inf"
        else:
            tag = "C"
        out.append(CaseRecord(j, m, dec.d, dec.t, ratio, tag))
    return out


@dataclass(frozen=True)
class Multiplier:
    p: int
    q: int
    h: int


def find_multiplier(table: StageTable, d: int, stage: Optional[int] = None) -> Multiplier:
    """Smallest built stage ``p`` admitting ``q`` with ``q*d`` in ``[h_p, 2 h_p]``."""
    if d < 1:
        raise ValueError("d must be >= 1")
    candidates = [stage] if stage is not None else range(1, table.depth + 1)
    for p in candidates:
        h = table.stage(p).h
        q = -(-h // d)
        if q * d <= 2 * h:
            return Multiplier(p, q, h)
    raise MultiplierNotFound(f"no built stage admits a multiple of d = {d} in [h_p, 2h_p]")


# ------------------------------------------------------------ delay profile

TOWER, SPACER, BOUNDARY = "tower", "spacer", "boundary"


@dataclass(frozen=True)
class Segment:
    first_column: int
    last_column: int
    kind: str
    landing: Optional[int] = None  # tower-j level hit by the first column
    delay: Optional[int] = None  # drop between consecutive columns; None off-tower
    landing_column: Optional[int] = None

    @property
    def columns(self) -> int:
        return self.last_column - self.first_column + 1

    def landing_at(self, i: int) -> int:
        return self.landing - (i - self.first_column) * self.delay

    def to_spec(self) -> str:
        land = str(self.landing) if self.kind == TOWER else self.kind
        delay = str(self.delay) if self.kind == TOWER else "boundary"
        return f"cols={self.first_column}..{self.last_column};land={land};delay={delay}"


@dataclass(frozen=True)
class DelayProfile:
    j: int
    m: int
    h: int
    r: int
    segments: tuple

    def tower_segments(self) -> list:
        return [s for s in self.segments if s.kind == TOWER]

    def segment_of(self, i: int) -> Segment:
        for s in self.segments:
            if s.first_column <= i <= s.last_column:
                return s
        raise ColumnOutOfRange(i)


def _landing(table: StageTable, j: int, i: int, m: int):
    """Where ``T^m`` sends the bottom of column ``i``: ``(kind, c, q)``.

    ``c`` is the stage-``j`` column whose block in tower ``j+1`` is hit and
    ``q`` the height inside that block; ``q > h_j`` means a spacer.
    """
    p = table.column_offset(j, i) + m
    if p > table.stage(j + 1).h:
        return BOUNDARY, None, None
    c, q = table.column_of(j, p)
    return (TOWER if q <= table.stage(j).h else SPACER), c, q


def _intrinsic_delay(table: StageTable, j: int, i: int, c: int) -> int:
    return table.spacer(j, c) - table.spacer(j, i)


def _profile_staircase(table: StageTable, j: int, m: int) -> list:
    h = table.stage(j).h
    r = table.cut(j)
    segs: list = []
    i = 1
    while i <= r:
        kind, c, q = _landing(table, j, i, m)
        if kind == BOUNDARY:
            segs.append(Segment(i, r, BOUNDARY))
            break
        delta = c - i
        # consecutive columns advance one block and drop by delta until q < 0
        run = min(r - i + 1, r - c + 1)
        if delta > 0:
            run = min(run, q // delta + 1)
        n_spacer = 0
        if q > h:
            n_spacer = run if delta == 0 else min(run, (q - h - 1) // delta + 1)
        if n_spacer:
            if segs and segs[-1].kind == SPACER:
                segs[-1] = Segment(segs[-1].first_column, i + n_spacer - 1, SPACER)
            else:
                segs.append(Segment(i, i + n_spacer - 1, SPACER))
        if run > n_spacer:
            first = i + n_spacer
            segs.append(Segment(first, i + run - 1, TOWER, q - n_spacer * delta, delta, c + n_spacer))
        i += run
    return segs


def _profile_generic(table: StageTable, j: int, m: int) -> list:
    r = table.cut(j)
    check_budget(r, f"per-column profile of stage {j}")
    segs: list = []
    cur = None  # [first, last, kind, landing, delay, landing_column, last_c, last_q]
    for i in range(1, r + 1):
        kind, c, q = _landing(table, j, i, m)
        if cur is not None and cur[2] == kind:
            if kind != TOWER:
                cur[1] = i
                continue
            step = cur[7] - q
            if c == cur[6] + 1 and (cur[4] is None or cur[4] == step):
                if cur[4] is None:
                    cur[4] = step
                cur[1], cur[6], cur[7] = i, c, q
                continue
        if cur is not None:
            segs.append(cur)
        cur = [i, i, kind, q if kind == TOWER else None, None, c if kind == TOWER else None, c, q]
    segs.append(cur)
    out = []
    for first, last, kind, land, delay, lc, _, _ in segs:
        if kind == TOWER and delay is None:
            delay = _intrinsic_delay(table, j, first, lc)
        out.append(Segment(first, last, kind, land, delay if kind == TOWER else None, lc))
    return out


def delay_profile(table: StageTable, j: int, m: int, *, method: str = "auto") -> DelayProfile:
    """Partition the columns of stage ``j`` by where ``T^m`` sends their bases.

    Columns whose base is pushed past the roof of tower ``j+1`` are reported
    as one trailing boundary segment.  For staircase spacers the profile is
    computed run by run in time proportional to the number of segments;
    ``method="columns"`` forces the per-column scan.
    """
    if m < 0:
        raise ValueError("m must be >= 0")
    table.ensure(j + 1)
    st = table.stage(j)
    r = table.cut(j)
    if method == "auto":
        method = "runs" if isinstance(table.params.spacers, Staircase) else "columns"
    segs = _profile_staircase(table, j, m) if method == "runs" else _profile_generic(table, j, m)
    return DelayProfile(j, m, st.h, r, tuple(segs))


# -------------------------------------------------------------------- rakes


@dataclass(frozen=True)
class Rake:
    j: int
    start_column: int
    tooth_count: int
    tooth_step: int
    n_lo: int
    n_hi: int
    body: LevelSet

    @property
    def tooth_columns(self) -> list:
        return [self.start_column + l * self.tooth_step for l in range(self.tooth_count)]

    def to_spec(self) -> str:
        return (f"j={self.j};s={self.start_column};L={self.tooth_count};"
                f"step={self.tooth_step};levels={self.n_lo}..{self.n_hi}")


def build_rake(table: StageTable, j: int, s: int, L: int, tooth_step: int, n_lo: int, n_hi: int) -> Rake:
    """Levels ``n_lo..n_hi`` of ``L`` columns ``s, s+step, ...``, as a stage-``j+1`` set."""
    if L < 1 or tooth_step < 1:
        raise ValueError("need L >= 1 and tooth_step >= 1")
    table.ensure(j + 1)
    r = table.cut(j)
    h = table.stage(j).h
    last = s + (L - 1) * tooth_step
    if s < 1 or last > r:
        raise ColumnOutOfRange(f"rake columns {s}..{last} outside [1, {r}]")
    if not 0 <= n_lo <= n_hi <= h:
        raise LevelOutOfRange(f"rake levels {n_lo}..{n_hi} outside [0, {h}]")
    check_budget(L * (n_hi - n_lo + 1), "rake body")
    dt = kernels.level_dtype(table.stage(j + 1).h)
    band = np.arange(n_lo, n_hi + 1, dtype=np.int64).astype(dt)
    bases = np.array([table.column_offset(j, c) for c in range(s, last + 1, tooth_step)], dtype=dt)
    body = kernels.refine(band, bases)
    return Rake(j, s, L, tooth_step, n_lo, n_hi, LevelSet(j + 1, body, trusted=True))


def intersect_sets(table: StageTable, X: LevelSet, Y: LevelSet) -> LevelSet:
    K = max(X.stage, Y.stage)
    a = refine_levels(table, X.levels, X.stage, K)
    b = refine_levels(table, Y.levels, Y.stage, K)
    if a.dtype != b.dtype:
        a, b = a.astype(object), b.astype(object)
    return LevelSet(K, np.intersect1d(a, b, assume_unique=True), trusted=True)


@dataclass(frozen=True)
class RakeReport:
    lhs: MeasureInterval
    rhs: MeasureInterval
    holds: bool
    valid_regime: bool
    band_ok: bool
    in_single_domain: bool
    d: int
    shift: int
    measure_rake: Fraction


def rake_bound_check(table: StageTable, A: LevelSet, B: LevelSet, m: int, rake: Rake, delta,
                     mode: NormalizationMode, tol=0) -> RakeReport:
    """Compare the rake-conditioned discrepancy with its Cesaro-norm bound.

    The Cesaro average uses the shift between consecutive teeth: the tooth
    step times the delay of the domain holding the rake, or times the
    arithmetic delay of ``m`` when the rake straddles domains.
    """
    delta = Fraction(delta)
    mode = resolve_mode(table, mode)
    j = rake.j
    h = table.stage(j).h
    d = decompose_delay(m, h).d
    prof = delay_profile(table, j, m)
    teeth = rake.tooth_columns
    seg = prof.segment_of(teeth[0])
    in_domain = seg.kind == TOWER and seg.first_column <= teeth[0] and teeth[-1] <= seg.last_column
    shift = rake.tooth_step * (seg.delay if in_domain else d)

    BY = intersect_sets(table, B, rake.body)
    hit = measure_intersection(table, A, BY, m, tol)
    mu_Y = measure(table, rake.body)
    if isinstance(mode, Probability):
        pA = measure(table, A) / mode.mu_ref
        pB = measure(table, B) / mode.mu_ref
        pY = mu_Y / mode.mu_ref
        disc = hit.scale(1 / mode.mu_ref) - pA * pB * pY
        weight = pY
    else:
        disc = hit
        weight = mu_Y
    lhs = disc.abs()
    norm = cesaro_norm_sq(table, B, shift, rake.tooth_count, mode, tol).sqrt()
    rhs = norm.scale(weight / delta)
    v = rake.n_hi if rake.n_lo == 0 else rake.n_lo
    band_ok = delta * h < v < (1 - delta) * h
    return RakeReport(
        lhs=lhs,
        rhs=rhs,
        holds=lhs.hi <= rhs.lo,
        valid_regime=band_ok and in_domain,
        band_ok=band_ok,
        in_single_domain=in_domain,
        d=d,
        shift=shift,
        measure_rake=mu_Y,
    )


# ------------------------------------------------------ good delay density


@dataclass(frozen=True)
class DensityReport:
    fraction: Fraction
    good: int
    total: int
    good_delays: tuple = field(default=(), repr=False)


def _is_good(d: int, table, B, L, eps, mode, tol) -> bool:
    for l in range(1, L):
        if not correlation(table, B, l * d, mode, tol).hi < eps:
            return False
    return True


def good_delay_density(table: StageTable, B: LevelSet, d_lo: int, d_hi: int, L: int, eps,
                       mode: NormalizationMode, tol=0, jobs: int = 1) -> DensityReport:
    """Fraction of ``d`` in ``[d_lo, d_hi]`` whose correlations at ``d, 2d, ..., (L-1)d``
    all stay below ``eps``."""
    if d_lo > d_hi or d_lo < 0:
        raise ValueError("need 0 <= d_lo <= d_hi")
    if L < 2:
        raise ValueError("L must be >= 2")
    eps = Fraction(eps)
    mode = resolve_mode(table, mode)
    ds = list(range(d_lo, d_hi + 1))
    flags = pmap(partial(_is_good, table=table, B=B, L=L, eps=eps, mode=mode, tol=tol), ds, jobs)
    good = tuple(d for d, ok in zip(ds, flags) if ok)
    return DensityReport(Fraction(len(good), len(ds)), len(good), len(ds), good)


# ----------------------------------------------------------- mixing sweep


@dataclass(frozen=True)
class SweepRecord:
    m: int
    interval: MeasureInterval
    target: Fraction
    residual_to_target: Fraction


def window_range(table: StageTable, w) -> tuple:
    """A stage index ``j`` means ``[h_j, 2 h_j]``; a pair is taken literally."""
    if isinstance(w, tuple):
        return int(w[0]), int(w[1])
    h = table.stage(int(w)).h
    return h, 2 * h


def sample_window(lo: int, hi: int, samples: int, seed: int) -> list:
    """Deterministic distinct samples from ``[lo, hi]``, sorted."""
    if hi - lo + 1 <= samples:
        return list(range(lo, hi + 1))
    rng = random.Random(f"{seed}:{lo}:{hi}")
    picked: set = set()
    while len(picked) < samples:
        picked.add(rng.randint(lo, hi))
    return sorted(picked)


def _sweep_one(m: int, table, A, B, mode, tol, target) -> SweepRecord:
    iv = measure_intersection(table, A, B, m, tol)
    return SweepRecord(m, iv, target, max(abs(iv.lo - target), abs(iv.hi - target)))


def sweep_target(table: StageTable, A: LevelSet, B: LevelSet, mode: NormalizationMode) -> Fraction:
    if isinstance(mode, Infinite):
        return Fraction(0)
    return measure(table, A) * measure(table, B) / mode.mu_ref


def mixing_sweep(table: StageTable, A: LevelSet, B: LevelSet, windows, samples: int, seed: int,
                 mode: NormalizationMode, tol=0, jobs: int = 1) -> list:
    """``mu(T^m A & B)`` against its mixing target over seeded samples of ``m``.

    The target is ``mu(A) mu(B) / mu_ref`` in probability mode and 0 in
    infinite mode; records come back sorted by ``m``.
    """
    mode = resolve_mode(table, mode)
    ms: set = set()
    for w in windows:
        lo, hi = window_range(table, w)
        ms.update(sample_window(lo, hi, samples, seed))
    target = sweep_target(table, A, B, mode)
    fn = partial(_sweep_one, table=table, A=A, B=B, mode=mode, tol=tol, target=target)
    return pmap(fn, sorted(ms), jobs)


def window_max(records: list, lo: int, hi: int) -> Fraction:
    return max(r.residual_to_target for r in records if lo <= r.m <= hi)
