"""Acceptance criteria 1-10, one verdict line each.

Pinned values were produced by a first run whose certified intervals were
checked against the brute-force oracle (the oracle checks are repeated here
wherever the oracle's cell cap allows).
"""
import random
import time
from fractions import Fraction

from staircase import (
    Affine,
    ConstructionParams,
    ExplicitList,
    ExplicitSpacers,
    Infinite,
    LevelSet,
    Probability,
    Staircase,
    blum_hanson_check,
    build_stage_table,
    decompose_delay,
    delay_profile,
    good_delay_density,
    image,
    measure,
    mixing_sweep,
)
from staircase.analysis import roof_count, window_max, window_range
from staircase.cli import run
from staircase.oracle import Instance, oracle_check, oracle_correlation, oracle_measure_intersection

TOL = Fraction(1, 2**20)
B0 = LevelSet(2, [0])


def _random_policy(rng):
    h1 = rng.randint(1, 5)
    cuts = tuple(rng.randint(2, 9) for _ in range(4))
    if rng.random() < 0.5:
        return ConstructionParams(h1, ExplicitList(cuts), Staircase())
    vectors = tuple(tuple(rng.randint(0, 9) for _ in range(r)) for r in cuts)
    return ConstructionParams(h1, ExplicitList(cuts), ExplicitSpacers(vectors))


def test_1_height_recursion(verdict):
    rng = random.Random(1)
    start = time.perf_counter()
    bad = 0
    for _ in range(100):
        params = _random_policy(rng)
        t = build_stage_table(params, 5)
        for j in range(1, 5):
            h, r = t.stage(j).h, t.cut(j)
            spacers = sum(params.spacers.spacer(j, i, r) for i in range(1, r + 1))
            ok = t.stage(j + 1).h + 1 == (h + 1) * r + spacers
            # the last column plus its spacers reaches the new roof
            ok &= t.column_offset(j, r) + h + params.spacers.spacer(j, r, r) == t.stage(j + 1).h
            bad += not ok
    elapsed = time.perf_counter() - start
    verdict("1 height recursion", bad == 0 and elapsed < 1,
            f"100 policies, {bad} mismatches, {elapsed:.2f}s")


def test_2_oracle_equivalence(verdict):
    # Cuts 2,3,4 continued by r_j = j+1: the plain list [2,3,4] stops at
    # stage 4, where tol 2^-20 is out of reach for m near 60.
    t = build_stage_table(ConstructionParams(1, Affine(1, 1)), 4)
    assert [s.h for s in t.stages] == [1, 4, 17, 77]
    start = time.perf_counter()
    insts = [Instance(LevelSet(2, [a]), LevelSet(2, [b]), m, K, TOL)
             for K in (4, 6) for a in range(5) for b in range(5) for m in range(61)]
    rep = oracle_check(t, insts)
    elapsed = time.perf_counter() - start
    verdict("2 oracle equivalence", rep.ok and elapsed < 30,
            f"{rep.checked} instances (oracle at h=77 and h=2414), {len(rep.failures)} incompatible, {elapsed:.1f}s")


def test_3_conservation(verdict):
    t = build_stage_table(ConstructionParams(1, Affine(1, 1)), 5)
    rng = random.Random(3)
    start = time.perf_counter()
    bad = 0
    for _ in range(500):
        j = rng.choice([2, 3])
        h = t.stage(j).h
        A = LevelSet(j, rng.sample(range(h + 1), rng.randint(1, min(6, h + 1))))
        # tolerance 0 only for short shifts: an exact image near the roof
        # refines through many stages
        tol = rng.choice([Fraction(0), Fraction(1, 2**8), Fraction(1, 2**12)])
        m = rng.randint(0, 11) if tol == 0 else rng.randint(0, 200)
        img = image(t, A, m, tol)
        bad += measure(t, img.resolved) + img.residual != measure(t, A) or img.residual > tol
    elapsed = time.perf_counter() - start
    verdict("3 conservation", bad == 0 and elapsed < 10, f"500 image calls, {bad} violations, {elapsed:.1f}s")


def test_4_delay_decomposition(verdict):
    rng = random.Random(4)
    start = time.perf_counter()
    bad = 0
    for _ in range(10**5):
        m, h = rng.randrange(10**12), rng.randint(1, 10**6)
        dec = decompose_delay(m, h)
        bad += roof_count(dec.d, h) + dec.t != m or not 0 <= dec.t < dec.d + h
    elapsed = time.perf_counter() - start
    spots = [(decompose_delay(11, 4).d, decompose_delay(11, 4).t), (decompose_delay(4, 4).d, decompose_delay(4, 4).t),
             (decompose_delay(0, 9).d, decompose_delay(0, 9).t)]
    ok = bad == 0 and spots == [(2, 2), (1, 0), (0, 0)] and elapsed < 1
    verdict("4 delay decomposition", ok, f"1e5 pairs, {bad} failures, spots {spots}, {elapsed:.2f}s")


def test_5_delay_step_law(verdict):
    t = build_stage_table(ConstructionParams(1, Affine(1, 1)), 6)
    h4, h5 = t.stage(4).h, t.stage(5).h
    ms = sorted(random.Random(5).sample(range(h4, h5), 50))
    start = time.perf_counter()
    bad = 0
    for m in ms:
        p = delay_profile(t, 4, m)
        delays = [s.delay for s in p.tower_segments()]
        bad += not all(a - b == 1 for a, b in zip(delays, delays[1:]))
        bad += sum(s.columns for s in p.segments) != p.r
    elapsed = time.perf_counter() - start
    verdict("5 delay-step law", bad == 0 and elapsed < 30, f"50 m in [{h4}, {h5}), {bad} violations, {elapsed:.2f}s")


def test_6_blum_hanson(verdict):
    t = build_stage_table(ConstructionParams(1, Affine(1, 1)), 5)
    rng = random.Random(6)
    mode_p = Probability(Fraction(10, 3))
    start = time.perf_counter()
    bad = premises = 0
    for _ in range(200):
        j = rng.choice([2, 3])
        h = t.stage(j).h
        # the top level of a tower only resolves once r_J exceeds the shift
        B = LevelSet(j, rng.sample(range(h - 1), rng.randint(1, 2)))
        d, L = rng.randint(1, 30), rng.randint(2, 6)
        eps = Fraction(rng.randint(-5, 60), 400)
        rep = blum_hanson_check(t, B, d, L, eps, mode_p if rng.random() < 0.5 else Infinite(), tol=0)
        assert rep.max_cross.width == 0 and rep.norm_sq.width == 0
        premises += rep.premise_holds
        bad += rep.premise_holds and not (rep.conclusion_holds and rep.sharp_conclusion_holds)
    elapsed = time.perf_counter() - start
    verdict("6 Blum-Hanson", bad == 0 and elapsed < 60,
            f"200 residual-0 instances, {premises} with premise, {bad} violations, {elapsed:.1f}s")


W5 = Fraction(5034273077, 165495052800)
W7 = Fraction(1205127817, 107571784320)


def test_7_mixing_trend(verdict):
    t = build_stage_table(ConstructionParams(1, Affine(1, 1)), 8)
    assert t.stage(8).h == 135435
    mode = Probability(t.deepest.total)
    assert mode.mu_ref == Fraction(4837, 1440)
    start = time.perf_counter()
    recs = mixing_sweep(t, B0, B0, [5, 7], 64, 7, mode, TOL)
    w5 = window_max(recs, *window_range(t, 5))
    w7 = window_max(recs, *window_range(t, 7))
    # stage-5 window against brute force at h_8 = 135435
    lo, hi = window_range(t, 5)
    oracle_ok = all(r.interval.overlaps(oracle_measure_intersection(t, B0, B0, r.m, 8).interval)
                    for r in recs if lo <= r.m <= hi)
    elapsed = time.perf_counter() - start
    ok = w7 < w5 and (w5, w7) == (W5, W7) and oracle_ok and elapsed < 600
    verdict("7 mixing decay trend", ok,
            f"max residual {float(w5):.5f} (stage 5) > {float(w7):.5f} (stage 7), oracle ok={oracle_ok}, {elapsed:.1f}s")


INF_W2 = Fraction(1, 10)
INF_W3 = Fraction(4507, 102960)


def test_8_infinite_decay(verdict):
    # r_j about h_j / 2, so sum r_j / h_j grows linearly
    t = build_stage_table(ConstructionParams(4, ExplicitList((2, 5, 32, 1287))), 5)
    assert [s.h for s in t.stages] == [4, 10, 64, 2575, 4142852]
    start = time.perf_counter()
    recs = mixing_sweep(t, B0, B0, [2, 3], 64, 7, Infinite(), TOL)
    w2 = window_max(recs, *window_range(t, 2))
    w3 = window_max(recs, *window_range(t, 3))
    oracle_ok = all(r.interval.overlaps(oracle_measure_intersection(t, B0, B0, r.m, 4).interval) for r in recs)
    elapsed = time.perf_counter() - start
    ok = w3 < w2 and (w2, w3) == (INF_W2, INF_W3) and oracle_ok and elapsed < 300
    verdict("8 infinite-measure decay", ok,
            f"max raw overlap {w2} (stage 2) > {w3} (stage 3), oracle ok={oracle_ok}, {elapsed:.1f}s")


def _oracle_fraction(t, B, ds, L, eps, mode, K):
    good = 0
    for d in ds:
        vals = [oracle_correlation(t, B, l * d, mode, K) for l in range(1, L)]
        his = [v.value + v.error_bound for v in vals]
        los = [v.value - v.error_bound for v in vals]
        if all(x < eps for x in his):
            good += 1
        elif not any(x >= eps for x in los):
            raise AssertionError(f"oracle at stage {K} cannot decide d={d}")
    return Fraction(good, len(ds))


def test_9_good_delay_density(verdict):
    t = build_stage_table(ConstructionParams(1, Affine(1, 1)), 5)
    mode = Probability(t.deepest.total)  # mu(X_5) = 10/3
    h3 = t.stage(3).h
    start = time.perf_counter()
    a = good_delay_density(t, B0, h3, h3 + 50, 3, Fraction(1, 20), mode, TOL)
    b = good_delay_density(t, B0, h3, h3 + 50, 3, Fraction(1, 10), mode, TOL)
    oracle = _oracle_fraction(t, B0, range(h3, h3 + 51), 3, Fraction(1, 20), mode, 7)
    elapsed = time.perf_counter() - start
    ok = a.fraction == oracle == Fraction(51, 51) and b.fraction >= a.fraction and elapsed < 120
    verdict("9 good-delay density", ok,
            f"fraction {a.good}/{a.total} at eps=1/20 (oracle {oracle}), {b.good}/{b.total} at eps=1/10, {elapsed:.1f}s")


COMMANDS = {
    "stages": ["stages", "--cuts", "affine:1,1", "--stages", "6"],
    "measure": ["measure", "--cuts", "affine:1,1", "--A", "stage=2:levels=0", "--B", "stage=2:levels=0..2",
                "--m", "300"],
    "sweep": ["sweep", "--cuts", "affine:1,1", "--A", "stage=2:levels=0", "--B", "stage=2:levels=0",
              "--windows", "4,5", "--samples", "24", "--seed", "7"],
    "delays": ["delays", "--cuts", "affine:1,1", "--windows", "4,5", "--samples", "24", "--seed", "7"],
    "profile": ["profile", "--cuts", "affine:1,1", "--j", "4", "--m", "500"],
    "rake-check": ["rake-check", "--cuts", "affine:1,1", "--stages", "5", "--A", "stage=2:levels=0",
                   "--B", "stage=2:levels=0", "--m", "30", "--rake", "j=3;s=1;L=2;step=1;levels=0..8",
                   "--delta", "1/4"],
    "bh-check": ["bh-check", "--cuts", "affine:1,1", "--B", "stage=2:levels=0", "--d", "20", "--L", "4",
                 "--eps", "1/20"],
    "good-density": ["good-density", "--cuts", "affine:1,1", "--stages", "5", "--B", "stage=2:levels=0",
                     "--d-range", "17..40", "--L", "3", "--eps", "1/20"],
    "find-q": ["find-q", "--cuts", "affine:1,1", "--d", "33"],
}


def test_10_determinism(verdict, tmp_path):
    differing = []
    for name, argv in COMMANDS.items():
        outs = []
        for jobs in (1, 8):
            out = tmp_path / f"{name}-{jobs}.csv"
            code = run(argv + ["--jobs", str(jobs), "--seed", "7", "--out", str(out)])
            assert code == 0, name
            blob = out.read_bytes()
            svg = out.with_suffix(".svg")
            if svg.exists():
                blob += svg.read_bytes()
            outs.append(blob)
        if outs[0] != outs[1] or not outs[0]:
            differing.append(name)
    verdict("10 determinism", not differing,
            f"{len(COMMANDS)} commands at jobs 1 and 8, differing: {differing or 'none'}")
