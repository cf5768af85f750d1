"""Certified images, intersection measures and correlations.

``T`` is undefined on the roof of every finite tower, so ``T^m`` of a level set
is only known after refining the part that sits within ``m`` of the roof.  All
results here carry that unresolved mass explicitly: a :class:`CertifiedImage`
has an exact residual and every measure comes back as a
:class:`~staircase.intervals.MeasureInterval` that contains the true value.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Union

import numpy as np

from . import kernels
from .construction import StageTable, check_budget, measure, refine_levels
from .errors import BadReference, CannotExtend, StageMissing
from .intervals import MeasureInterval
from .levelset import LevelSet

# Refinement stops this many stages past the starting stage even if the
# policy could go on (e.g. tol=0 on a set that never clears the roof).
MAX_EXTRA_STAGES = 64


@dataclass(frozen=True)
class CertifiedImage:
    resolved: LevelSet
    residual: Fraction


@dataclass(frozen=True)
class Probability:
    """Normalize by ``mu_ref``; ``None`` means the deepest built stage's mass."""

    mu_ref: Optional[Fraction] = None

    def __str__(self):
        return "probability" if self.mu_ref is None else f"probability(mu_ref={self.mu_ref})"


@dataclass(frozen=True)
class Infinite:
    def __str__(self):
        return "infinite"


NormalizationMode = Union[Probability, Infinite]


def resolve_mode(table: StageTable, mode: NormalizationMode) -> NormalizationMode:
    """Pin the default reference measure to the table's current depth."""
    if isinstance(mode, Probability):
        if mode.mu_ref is None:
            return Probability(table.deepest.total)
        mu = Fraction(mode.mu_ref)
        if mu <= 0:
            raise BadReference(f"mu_ref must be positive, got {mu}")
        return Probability(mu)
    return mode


# ------------------------------------------------------------------ images


@dataclass
class _Pieces:
    """Shifted levels, grouped by the stage at which they were resolved."""

    pieces: list
    residual: Fraction
    stage: int


def _shift_pieces(table: StageTable, s: LevelSet, m: int, tol, sign: int = 1) -> _Pieces:
    if m < 0:
        raise ValueError("shift must be nonnegative")
    tol = Fraction(tol)
    J = s.stage
    st = table.ensure(J)
    if len(s) and s.levels[-1] > st.h:
        raise ValueError(f"level {s.levels[-1]} above roof of stage {J}")
    pending = s.levels
    pieces = []
    limit = J + MAX_EXTRA_STAGES
    while True:
        h = st.h
        if sign > 0:
            # T^m is defined on level k iff k + m <= h
            cut = int(np.searchsorted(pending, h - m, side="right")) if h >= m else 0
            done, pending = pending[:cut], pending[cut:]
            if done.shape[0]:
                pieces.append((J, done + m))
        else:
            # T^-m is defined on level k iff k >= m
            cut = int(np.searchsorted(pending, m, side="left")) if m <= h else pending.shape[0]
            pending, done = pending[:cut], pending[cut:]
            if done.shape[0]:
                pieces.append((J, done - m))
        residual = pending.shape[0] * st.w
        if residual <= tol:
            return _Pieces(pieces, residual, J)
        if J >= limit:
            raise CannotExtend(f"residual {residual} above tol {tol} after {MAX_EXTRA_STAGES} refinements")
        try:
            st = table.ensure(J + 1)
        except StageMissing as exc:
            raise CannotExtend(f"residual {residual} above tol {tol} at stage {J}: {exc}") from None
        pending = refine_levels(table, pending, J, J + 1)
        J += 1


def _merge_pieces(table: StageTable, pieces: list, stage: int) -> LevelSet:
    parts = [refine_levels(table, arr, J, stage) for J, arr in pieces]
    if not parts:
        return LevelSet(stage, np.zeros(0, dtype=kernels.level_dtype(table.stage(stage).h)), trusted=True)
    check_budget(sum(p.shape[0] for p in parts), "merged image")
    if any(p.dtype == object for p in parts):
        parts = [p.astype(object) for p in parts]
    out = np.sort(np.concatenate(parts))
    return LevelSet(stage, out, trusted=True)


def image(table: StageTable, A: LevelSet, m: int, tol=0) -> CertifiedImage:
    """Certified ``T^m(A)``.

    The resolved part is reported at the finest stage the refinement reached;
    ``residual`` is the exact mass of ``A`` whose image is still undetermined.
    """
    got = _shift_pieces(table, A, m, tol)
    return CertifiedImage(_merge_pieces(table, got.pieces, got.stage), got.residual)


def preimage(table: StageTable, B: LevelSet, m: int, tol=0) -> CertifiedImage:
    """Certified ``T^-m(B)``, same conventions as :func:`image`."""
    got = _shift_pieces(table, B, m, tol, sign=-1)
    return CertifiedImage(_merge_pieces(table, got.pieces, got.stage), got.residual)


def _count_in(table: StageTable, levels: np.ndarray, J: int, target: LevelSet) -> int:
    """How many of the stage-``J`` levels lie inside ``target``."""
    b = target.stage
    if J < b:
        levels = refine_levels(table, levels, J, b)
        return kernels.count_in_sorted(levels, target.levels)
    x = levels
    for K in range(J, b, -1):
        off = table.offsets(K - 1)
        if off.dtype != x.dtype:
            x, off = x.astype(object), off.astype(object)
        _, local, inside = kernels.descend(x, off, table.stage(K - 1).h)
        x = local[inside]
        if x.shape[0] == 0:
            return 0
    if x.dtype != target.levels.dtype:
        x = x.astype(object)
        return kernels.count_in_sorted(x, target.levels.astype(object))
    return kernels.count_in_sorted(x, target.levels)


def measure_intersection(table: StageTable, A: LevelSet, B: LevelSet, m: int, tol=0,
                         via: str = "image") -> MeasureInterval:
    """Enclosure of ``mu(T^m A & B)``.

    ``via="image"`` pushes ``A`` forward; ``via="preimage"`` pulls ``B`` back,
    i.e. evaluates ``mu(A & T^-m B)``.  Both give the same quantity and are
    independent enough to cross-check each other.  Each resolved piece is
    compared against the other operand at its own stage, so nothing is
    refined to the deepest stage reached.
    """
    if via == "image":
        got = _shift_pieces(table, A, m, tol)
        other = B
    elif via == "preimage":
        got = _shift_pieces(table, B, m, tol, sign=-1)
        other = A
    else:
        raise ValueError(f"unknown route {via!r}")
    table.ensure(other.stage)
    lo = Fraction(0)
    for J, arr in got.pieces:
        c = _count_in(table, arr, J, other)
        if c:
            lo += c * table.stage(max(J, other.stage)).w
    return MeasureInterval(lo, lo + got.residual)


# ------------------------------------------------------------ correlations


def _prob_of(table: StageTable, B: LevelSet, mode: Probability) -> Fraction:
    mu_B = measure(table, B)
    if mode.mu_ref < mu_B:
        raise BadReference(f"mu_ref {mode.mu_ref} is smaller than mu(B) = {mu_B}")
    return mu_B / mode.mu_ref


def correlation(table: StageTable, B: LevelSet, n: int, mode: NormalizationMode, tol=0) -> MeasureInterval:
    """``<T^n f, f>`` for ``f = 1_B - P(B)`` (probability) or ``f = 1_B`` (infinite)."""
    mode = resolve_mode(table, mode)
    raw = measure_intersection(table, B, B, n, tol)
    if isinstance(mode, Infinite):
        return raw
    p = _prob_of(table, B, mode)
    return raw.scale(1 / mode.mu_ref) - p * p


def _correlations(table, B, d, L, mode, tol) -> list:
    """``C(k*d)`` for ``k = 0..L-1``; shared by the Cesaro and Blum-Hanson code."""
    mode = resolve_mode(table, mode)
    cache = {}
    out = []
    for k in range(L):
        n = k * d
        if n not in cache:
            cache[n] = correlation(table, B, n, mode, tol)
        out.append(cache[n])
    return out


def _gram(corr: list) -> MeasureInterval:
    L = len(corr)
    total = corr[0].scale(L)
    for k in range(1, L):
        total = total + corr[k].scale(2 * (L - k))
    return total.scale(Fraction(1, L * L)).clamp_nonneg()


def cesaro_norm_sq(table: StageTable, B: LevelSet, d: int, L: int, mode: NormalizationMode,
                   tol=0) -> MeasureInterval:
    """``||(1/L) sum_{l<L} T^{l d} f||^2`` through its Gram expansion.

    Uses ``<T^a f, T^b f> = C(|a-b|)``, so only ``L`` correlations are needed.
    The lower end is clamped at 0, which keeps the enclosure valid.
    """
    if L < 1:
        raise ValueError("L must be >= 1")
    if d < 0:
        raise ValueError("d must be >= 0")
    return _gram(_correlations(table, B, d, L, mode, tol))


@dataclass(frozen=True)
class BlumHansonReport:
    max_cross: MeasureInterval
    norm_sq: MeasureInterval
    bound: Fraction
    sharp_bound: Fraction
    premise_holds: bool
    conclusion_holds: bool
    sharp_conclusion_holds: bool
    mu_ref: Optional[Fraction]

    @property
    def violated(self) -> bool:
        return self.premise_holds and not self.sharp_conclusion_holds


def blum_hanson_check(table: StageTable, B: LevelSet, d: int, L: int, eps, mode: NormalizationMode,
                      tol=0) -> BlumHansonReport:
    """Evaluate the Blum-Hanson inequality on certified correlations.

    ``bound`` is ``eps + C(0)/L``; ``sharp_bound`` is the unrelaxed
    ``(eps*L*(L-1) + L*C(0)) / L**2``.  Both conclusions use upper endpoints
    of the same enclosures that decide the premise, so a premise that holds
    forces both conclusions.
    """
    if L < 2:
        raise ValueError("L must be >= 2")
    eps = Fraction(eps)
    mode = resolve_mode(table, mode)
    corr = _correlations(table, B, d, L, mode, tol)
    cross = corr[1:]
    max_cross = MeasureInterval(max(c.lo for c in cross), max(c.hi for c in cross))
    norm_sq = _gram(corr)
    c0 = corr[0].hi
    bound = eps + c0 / L
    sharp = (eps * L * (L - 1) + L * c0) / (L * L)
    return BlumHansonReport(
        max_cross=max_cross,
        norm_sq=norm_sq,
        bound=bound,
        sharp_bound=sharp,
        premise_holds=max_cross.hi < eps,
        conclusion_holds=norm_sq.hi <= bound,
        sharp_conclusion_holds=norm_sq.hi <= sharp,
        mu_ref=getattr(mode, "mu_ref", None),
    )
