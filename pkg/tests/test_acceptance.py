"""Acceptance suite: structural exactness checks plus directional trend
checks at desk scale. Each criterion emits one PASS/FAIL line on the real
stdout so the verdicts survive pytest's capture.
"""

import random

import pytest

from ndpsim import addr
from ndpsim.config import SimConfig
from ndpsim.engine import simulate
from ndpsim.memhier import Cache, CacheConfig, Kind, MemoryHierarchy, MemoryModel
from ndpsim.mmu import LruArray
from ndpsim.report import build_report, to_json
from ndpsim.trace import GeneratorSpec, Workload, generate_workload, parse_trace

BASE = 0x0000_1000_0000_0000

# 1GB footprint, 4x accesses per page: occupancy / PWC / metadata trends
BIG_SPEC = GeneratorSpec("gups", pages=262_144, accesses=1_048_576, seed=42)
# 256MB footprint (far beyond TLB reach): mechanism speedup direction
CMP_SPEC = GeneratorSpec("gups", pages=65_536, accesses=262_144, seed=43)
# identical per-core streams over one shared footprint: controller scaling
SCALE_CORES = (1, 4, 8)


def scale_spec(cores: int) -> GeneratorSpec:
    return GeneratorSpec("gups", pages=65_536, accesses=131_072,
                         cores=cores, seed=44, shared=True)


@pytest.fixture
def emit(capfd):
    """One PASS/FAIL verdict line per criterion, past pytest's capture."""

    def _emit(criterion: int, ok: bool, detail: str):
        verdict = "PASS" if ok else "FAIL"
        with capfd.disabled():
            print(f"criterion {criterion:02d}: {verdict} - {detail}",
                  flush=True)
        assert ok, f"criterion {criterion}: {detail}"

    return _emit


# -- shared runs (module-scoped: criteria 6-12 reuse them) -----------------

@pytest.fixture(scope="module")
def big_workload():
    return generate_workload(BIG_SPEC)


@pytest.fixture(scope="module")
def radix_big(big_workload):
    cfg = SimConfig(mechanism="radix")
    return cfg, simulate(cfg, big_workload)


@pytest.fixture(scope="module")
def flat_big(big_workload):
    cfg = SimConfig(mechanism="flat")
    return cfg, simulate(cfg, big_workload)


@pytest.fixture(scope="module")
def mechanism_runs():
    workload = generate_workload(CMP_SPEC)
    runs = {}
    for mechanism in ("radix", "flat", "huge", "ndpage", "ideal"):
        cfg = SimConfig(mechanism=mechanism)
        runs[mechanism] = (cfg, simulate(cfg, workload))
    return workload, runs


@pytest.fixture(scope="module")
def scaling_runs():
    runs = {}
    for cores in SCALE_CORES:
        cfg = SimConfig(cores=cores, mechanism="ndpage")
        runs[cores] = (cfg, generate_workload(scale_spec(cores)))
        runs[cores] = (cfg, runs[cores][1], simulate(cfg, runs[cores][1]))
    return runs


# -- criteria ----------------------------------------------------------------

def test_criterion_01_walk_step_exactness(emit):
    workload = Workload.from_records(parse_trace(f"0 R {BASE:#x}\n"))
    counts = {}
    for mechanism in ("radix", "flat", "huge"):
        stats = simulate(SimConfig(mechanism=mechanism), workload)
        counts[mechanism] = stats.totals["metadata_requests"]
    ok = counts == {"radix": 4, "flat": 3, "huge": 3}
    emit(1, ok, f"cold-walk metadata requests {counts} "
                "(expected radix=4, flat=3, huge=3)")


def test_criterion_02_address_codec(emit):
    rng = random.Random(20_260_823)
    checks = failures = 0
    for _ in range(200_000):
        va = rng.getrandbits(48)
        if va & (1 << 47):
            va |= 0xFFFF << 48
        r = addr.split_radix(va)
        f = addr.split_flattened(va)
        h = addr.split_huge(va)
        for ok in (addr.compose_radix(r) == va,
                   addr.compose_flattened(f) == va,
                   addr.compose_huge(h) == va,
                   f.i21 == (r.i2 << 9) | r.i1,
                   h.offset21 == (r.i1 << 12) | r.offset):
            checks += 1
            failures += not ok
    emit(2, failures == 0 and checks == 1_000_000,
         f"{checks} randomized codec checks, {failures} failures")


def test_criterion_03_mode_equivalence(emit):
    from ndpsim.pagetable import PageTableMode, PageTableSet
    rng = random.Random(301)
    radix = PageTableSet(PageTableMode.RADIX4, 64 << 30)
    flat = PageTableSet(PageTableMode.FLATTENED_L21, 64 << 30)
    mismatches = 0
    for _ in range(10_000):
        va = rng.getrandbits(36) & ~0xFFF
        mismatches += radix.map(va) != flat.map(va)
    emit(3, mismatches == 0,
         f"10000 random maps, {mismatches} frame-assignment mismatches")


def _random_requests(rng, n):
    out = []
    for _ in range(n):
        if rng.random() < 0.3:
            out.append((Kind.METADATA, (1 << 30) + rng.randrange(8192) * 64))
        else:
            out.append((Kind.DATA, rng.randrange(32_768) * 64))
    return out


def _replay(requests, bypass):
    mh = MemoryHierarchy(1, [SimConfig().l1], MemoryModel(110, 2),
                         bypass, 16 << 30)
    for kind, address in requests:
        mh.access(0, address, kind, False, 0)
    return mh


def test_criterion_04_bypass_purity_and_monotonicity(emit):
    rng = random.Random(404)
    purity = monotone = True
    for _ in range(20):
        requests = _random_requests(rng, 100_000)
        on = _replay(requests, bypass=True)
        off = _replay(requests, bypass=False)
        stripped = _replay([r for r in requests if r[0] is Kind.DATA],
                           bypass=False)
        purity &= (on.hits[0]["L1"][Kind.DATA]
                   == stripped.hits[0]["L1"][Kind.DATA])
        purity &= (on.misses[0]["L1"][Kind.DATA]
                   == stripped.misses[0]["L1"][Kind.DATA])
        monotone &= (on.misses[0]["L1"][Kind.DATA]
                     <= off.misses[0]["L1"][Kind.DATA])
    emit(4, purity and monotone,
         f"20 traces x 100000 requests: purity={purity}, "
         f"data-miss monotonicity={monotone}")


class _ReferenceLru:
    """Independent per-set MRU-ordered list model."""

    def __init__(self, n_sets, ways):
        self.n_sets, self.ways = n_sets, ways
        self.sets = [[] for _ in range(n_sets)]

    def touch(self, key):
        entries = self.sets[key % self.n_sets]
        hit = key in entries
        if hit:
            entries.remove(key)
        elif len(entries) >= self.ways:
            entries.pop()
        entries.insert(0, key)
        return hit


def _lru_array_faithful(entries, ways, key_space, seed):
    lru = LruArray(entries, ways)
    ref = _ReferenceLru(lru.n_sets, lru.ways)
    rng = random.Random(seed)
    for _ in range(100_000):
        key = rng.randrange(key_space)
        hit, _ = lru.lookup(key)
        if not hit:
            lru.insert(key, key)
        if hit != ref.touch(key):
            return False
    return all(list(lru.sets[s].keys()) == list(reversed(ref.sets[s]))
               for s in range(lru.n_sets))


def test_criterion_05_lru_fidelity(emit):
    tlb_ok = _lru_array_faithful(64, 4, 1024, seed=51)   # L1 TLB geometry
    pwc_ok = _lru_array_faithful(16, 4, 256, seed=52)    # PWC geometry
    cache = Cache(CacheConfig("L1", 32 << 10, 8, 4))
    ref = _ReferenceLru(cache.n_sets, 8)
    rng = random.Random(53)
    cache_ok = True
    for _ in range(100_000):
        tag = rng.randrange(4096)
        hit, _ = cache.access(tag << 6, rng.random() < 0.4)
        cache_ok &= hit == ref.touch(tag)
    cache_ok &= all(cache.resident_tags(s) == list(reversed(ref.sets[s]))
                    for s in range(cache.n_sets))
    emit(5, tlb_ok and pwc_ok and cache_ok,
         f"100000-op reference-model match: tlb={tlb_ok}, pwc={pwc_ok}, "
         f"cache={cache_ok}")


def test_criterion_06_occupancy_trend(emit, radix_big):
    _, stats = radix_big
    occ = {lvl: row["occupancy"] for lvl, row in stats.occupancy.items()}
    ok = (occ["PL1"] >= 0.90 and occ["PL2"] >= 0.90
          and occ["PL4"] <= 0.01 and occ["PL3"] <= 0.10)
    emit(6, ok, "1GB gups occupancy "
         + ", ".join(f"{l}={occ[l]:.4f}" for l in ("PL4", "PL3", "PL2", "PL1")))


def test_criterion_07_pwc_trend(emit, radix_big):
    _, stats = radix_big
    pwc = stats.totals["pwc"]
    rate = {lvl: v["hits"] / v["probes"] for lvl, v in pwc.items()}
    leaf_miss = stats.totals["leaf_fetches"] / stats.totals["ptw_count"]
    ok = rate["PL4"] >= 0.99 and rate["PL3"] >= 0.90 and leaf_miss >= 0.60
    emit(7, ok, f"pwc hit rates PL4={rate['PL4']:.4f}, PL3={rate['PL3']:.4f}; "
                f"leaf miss rate={leaf_miss:.4f}")


def test_criterion_08_metadata_irregularity(emit, flat_big):
    _, stats = flat_big
    meta = stats.cache["L1"]["total"]["metadata"]
    miss_rate = meta["misses"] / (meta["hits"] + meta["misses"])
    emit(8, miss_rate >= 0.90,
         f"bypass-off metadata L1 miss rate {miss_rate:.4f} (>= 0.90)")


def test_criterion_09_speedup_direction(emit, mechanism_runs):
    _, runs = mechanism_runs
    cycles = {m: stats.totals["total_cycles"] for m, (_, stats) in runs.items()}
    speedup = {m: cycles["radix"] / c for m, c in cycles.items()}
    ordered = cycles["ndpage"] < cycles["flat"] < cycles["radix"]
    ideal_best = speedup["ideal"] == max(speedup.values())
    emit(9, ordered and ideal_best,
         "total cycles " + ", ".join(f"{m}={cycles[m]}" for m in
                                     ("radix", "flat", "ndpage", "ideal"))
         + f"; ideal speedup max={ideal_best}")


def test_criterion_10_multicore_scaling(emit, scaling_runs):
    avg = {}
    for cores, (_, _, stats) in scaling_runs.items():
        avg[cores] = (stats.totals["ptw_latency_sum"]
                      / stats.totals["ptw_count"])
    ok = avg[8] >= avg[4] >= avg[1]
    emit(10, ok, "avg PTW latency by cores "
         + ", ".join(f"{c}->{avg[c]:.2f}" for c in SCALE_CORES))


def _identities_hold(cfg: SimConfig, workload, stats) -> bool:
    t = stats.totals
    checks = [
        t["translation_cycles"] + t["data_access_cycles"] == t["total_cycles"],
        all(c["translation_cycles"] + c["data_access_cycles"]
            == c["total_cycles"] for c in stats.per_core),
        t["tlb"]["l1_hits"] + t["tlb"]["l1_misses"] == len(workload),
        t["tlb"]["l1_misses"] == t["tlb"]["l2_hits"] + t["tlb"]["l2_misses"],
        t["ptw_count"] == t["tlb"]["l2_misses"],
        t["leaf_fetches"] == t["ptw_count"],
        all(v["probes"] == t["ptw_count"] for v in t["pwc"].values()),
    ]
    l1 = stats.cache["L1"]["total"]
    data, meta = l1["data"], l1["metadata"]
    checks.append(data["hits"] + data["misses"] == len(workload))
    checks.append(stats.memory["requests"]["data"] == data["misses"])
    if cfg.effective_bypass:
        checks.append(meta["hits"] + meta["misses"] == 0)
        checks.append(stats.memory["bypassed_metadata"]
                      == t["metadata_requests"])
        checks.append(stats.memory["requests"]["metadata"]
                      == stats.memory["bypassed_metadata"])
    else:
        checks.append(meta["hits"] + meta["misses"] == t["metadata_requests"])
        checks.append(stats.memory["requests"]["metadata"] == meta["misses"])
        checks.append(stats.memory["bypassed_metadata"] == 0)
    return all(checks)


def test_criterion_11_accounting_closure(emit, big_workload, radix_big, flat_big,
                                         mechanism_runs, scaling_runs):
    cmp_workload, runs = mechanism_runs
    cases = [(radix_big[0], big_workload, radix_big[1]),
             (flat_big[0], big_workload, flat_big[1])]
    cases += [(cfg, cmp_workload, stats) for cfg, stats in runs.values()]
    cases += [(cfg, wl, stats) for cfg, wl, stats in scaling_runs.values()]
    bad = sum(not _identities_hold(*case) for case in cases)
    emit(11, bad == 0,
         f"{len(cases)} runs checked, {bad} with broken identities")


def test_criterion_12_determinism(emit, big_workload, radix_big, flat_big,
                                  mechanism_runs, scaling_runs):
    mismatches = []

    def recheck(label, cfg, spec, baseline_stats):
        baseline = to_json(build_report(cfg, baseline_stats)).encode()
        rerun = simulate(cfg, generate_workload(spec))
        if to_json(build_report(cfg, rerun)).encode() != baseline:
            mismatches.append(label)

    recheck("radix-1gb", radix_big[0], BIG_SPEC, radix_big[1])
    recheck("flat-1gb", flat_big[0], BIG_SPEC, flat_big[1])
    for mechanism, (cfg, stats) in mechanism_runs[1].items():
        recheck(f"compare-{mechanism}", cfg, CMP_SPEC, stats)
    for cores, (cfg, _, stats) in scaling_runs.items():
        recheck(f"scaling-{cores}core", cfg, scale_spec(cores), stats)
    emit(12, not mismatches,
         "byte-identical reports on seeded reruns"
         + (f"; mismatches: {mismatches}" if mismatches else " (11 runs)"))
