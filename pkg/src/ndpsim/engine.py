"""The simulation loop: warm-up mapping pass, translate-then-access record
execution, deterministic multi-core interleaving, statistics aggregation,
and mechanism comparison.

Cores are blocking and in-order: per record, the core first pays the full
translation latency (TLB probes, then the walk's metadata fetches), then
the data access latency, and only then advances. The globally next record
always comes from the core with the smallest local clock (ties broken by
core id), so contention at the shared memory controller is deterministic.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

from .config import SimConfig
from .errors import ConfigMismatch
from .memhier import Kind, MemoryHierarchy, MemoryModel
from .mmu import TranslationUnit
from .pagetable import PageTableSet
from .trace import Workload

logger = logging.getLogger(__name__)

HUGE_PAGE_CAVEAT = ("huge-page results exclude page-fault and memory-bloat "
                    "effects; real multi-core degradation is not modeled")


@dataclass
class Simulation:
    """Wires one run's page table, memory hierarchy, and per-core MMUs."""

    config: SimConfig

    def __post_init__(self):
        cfg = self.config
        self.pagetable = PageTableSet(cfg.page_table_mode, cfg.phys_bytes)
        self.memhier = MemoryHierarchy(
            cfg.cores, cfg.cache_levels,
            MemoryModel(cfg.memory.latency, cfg.memory.service_interval),
            cfg.effective_bypass, cfg.phys_bytes)
        self.units = [TranslationUnit(c, cfg.dtlb, cfg.l2tlb, cfg.pwc,
                                      self.pagetable, self.memhier)
                      for c in range(cfg.cores)]
        self.clocks = [0] * cfg.cores

    def warmup(self, workload: Workload) -> PageTableSet:
        """Map every distinct page touched by the trace; no timing.

        Mapping follows global trace order, so frame assignment is
        deterministic and identical for any mechanism pair sharing a page
        size.
        """
        shift = self.pagetable.page_shift
        seen: set[int] = set()
        page_mask = ~((1 << shift) - 1)
        for va in workload.vas:
            page = va & page_mask
            if page not in seen:
                seen.add(page)
                self.pagetable.map(page)
        return self.pagetable

    def run(self, workload: Workload) -> "SimStats":
        """Execute the trace after warm-up; returns aggregated statistics."""
        cfg = self.config
        per_core_vas: list[list[int]] = [[] for _ in range(cfg.cores)]
        per_core_writes: list[list[bool]] = [[] for _ in range(cfg.cores)]
        for core, va, write in zip(workload.cores, workload.vas, workload.writes):
            per_core_vas[core].append(va)
            per_core_writes[core].append(write)

        clocks = self.clocks
        index = [0] * cfg.cores
        remaining = [len(v) for v in per_core_vas]
        active = [c for c in range(cfg.cores) if remaining[c]]
        translation_cycles = [0] * cfg.cores
        data_cycles = [0] * cfg.cores
        units = self.units
        access = self.memhier.access

        data_kind = Kind.DATA
        if cfg.cores == 1 and remaining[0]:
            # Hot path: no interleaving decisions to make.
            translate = units[0].translate
            clock = clocks[0]
            t_total = d_total = 0
            for va, write in zip(per_core_vas[0], per_core_writes[0]):
                pa, t_cycles = translate(va, clock)
                d_cycles = access(0, pa, data_kind, write, clock + t_cycles)
                t_total += t_cycles
                d_total += d_cycles
                clock += t_cycles + d_cycles
            translation_cycles[0] = t_total
            data_cycles[0] = d_total
            clocks[0] = clock
            active = []

        while active:
            core = active[0]
            best = clocks[core]
            for c in active[1:]:
                if clocks[c] < best:
                    best = clocks[c]
                    core = c
            i = index[core]
            va = per_core_vas[core][i]
            pa, t_cycles = units[core].translate(va, clocks[core])
            d_cycles = access(core, pa, data_kind,
                              per_core_writes[core][i], clocks[core] + t_cycles)
            translation_cycles[core] += t_cycles
            data_cycles[core] += d_cycles
            clocks[core] += t_cycles + d_cycles
            index[core] = i + 1
            if index[core] == remaining[core]:
                active.remove(core)

        return SimStats.collect(self, translation_cycles, data_cycles)


@dataclass
class SimStats:
    """Raw integer counters of one run; everything derived comes later."""

    per_core: list[dict]
    totals: dict
    cache: dict
    memory: dict
    occupancy: dict
    metadata_bytes: int
    pages_mapped: int

    @classmethod
    def collect(cls, sim: Simulation, translation_cycles: list[int],
                data_cycles: list[int]) -> "SimStats":
        per_core = []
        for core, tu in enumerate(sim.units):
            total = translation_cycles[core] + data_cycles[core]
            assert total == sim.clocks[core]
            per_core.append({
                "core": core,
                "total_cycles": total,
                "translation_cycles": translation_cycles[core],
                "data_access_cycles": data_cycles[core],
                "ptw_count": tu.ptw_count,
                "ptw_latency_sum": tu.ptw_latency_sum,
                "ptw_latency_max": tu.ptw_latency_max,
                "tlb": {"l1_hits": tu.tlb_l1_hits, "l1_misses": tu.tlb_l1_misses,
                        "l2_hits": tu.tlb_l2_hits, "l2_misses": tu.tlb_l2_misses},
                "pwc": {lvl: {"probes": tu.pwc_probes[lvl],
                              "hits": tu.pwc_hits[lvl]}
                        for lvl in tu.pwc_levels},
                "leaf_fetches": tu.leaf_fetches,
                "metadata_requests": tu.metadata_requests,
            })

        def sum_field(path: str) -> int:
            return sum(c[path] for c in per_core)

        pwc_levels = sim.units[0].pwc_levels if sim.units else ()
        totals = {
            "total_cycles": sum_field("total_cycles"),
            "translation_cycles": sum_field("translation_cycles"),
            "data_access_cycles": sum_field("data_access_cycles"),
            "makespan_cycles": max(sim.clocks) if sim.clocks else 0,
            "ptw_count": sum_field("ptw_count"),
            "ptw_latency_sum": sum_field("ptw_latency_sum"),
            "ptw_latency_max": max((c["ptw_latency_max"] for c in per_core),
                                   default=0),
            "tlb": {k: sum(c["tlb"][k] for c in per_core)
                    for k in ("l1_hits", "l1_misses", "l2_hits", "l2_misses")},
            "pwc": {lvl: {k: sum(c["pwc"][lvl][k] for c in per_core)
                          for k in ("probes", "hits")} for lvl in pwc_levels},
            "leaf_fetches": sum_field("leaf_fetches"),
            "metadata_requests": sum_field("metadata_requests"),
        }

        mh = sim.memhier
        cache = {}
        for name in mh.levels:
            level = {"per_core": [], "total": {}}
            for core in range(mh.cores):
                level["per_core"].append({
                    kind.value: {"hits": mh.hits[core][name][kind],
                                 "misses": mh.misses[core][name][kind]}
                    for kind in Kind})
            level["total"] = {
                kind.value: {
                    "hits": sum(mh.hits[c][name][kind] for c in range(mh.cores)),
                    "misses": sum(mh.misses[c][name][kind] for c in range(mh.cores)),
                } for kind in Kind}
            cache[name] = level

        memory = {
            "requests": {k.value: mh.memory.requests[k] for k in Kind},
            "bypassed_metadata": mh.bypassed_metadata,
            "writebacks": mh.writebacks,
            "writes": mh.memory.writes,
        }

        occupancy = {
            level: {"nodes": occ.nodes, "valid_entries": occ.valid_entries,
                    "occupancy": occ.ratio}
            for level, occ in sim.pagetable.occupancy_report().items()}

        return cls(per_core, totals, cache, memory, occupancy,
                   sim.pagetable.metadata_bytes(), sim.pagetable.pages_mapped)

    def to_dict(self) -> dict:
        return {
            "per_core": self.per_core,
            "totals": self.totals,
            "cache": self.cache,
            "memory": self.memory,
            "occupancy": self.occupancy,
            "metadata_bytes": self.metadata_bytes,
            "pages_mapped": self.pages_mapped,
        }


def simulate(config: SimConfig, workload: Workload) -> SimStats:
    """Warm-up pass plus timed run over one workload."""
    sim = Simulation(config)
    sim.warmup(workload)
    return sim.run(workload)


def compare(config: SimConfig, workload: Workload,
            mechanisms: list[str]) -> list[dict]:
    """Run each mechanism on the same trace; speedups are over radix.

    Radix is always run (it is the speedup denominator) even when absent
    from `mechanisms`, but only requested mechanisms appear in the table.
    """
    if len(set(mechanisms)) != len(mechanisms):
        raise ConfigMismatch("duplicate mechanism in comparison")
    wanted = list(mechanisms)
    to_run = wanted if "radix" in wanted else ["radix"] + wanted
    stats = {m: simulate(config.with_mechanism(m), workload) for m in to_run}
    radix_cycles = stats["radix"].totals["total_cycles"]
    rows = []
    for m in wanted:
        totals = stats[m].totals
        ptw = totals["ptw_count"]
        rows.append({
            "mechanism": m,
            "total_cycles": totals["total_cycles"],
            "speedup": radix_cycles / totals["total_cycles"],
            "avg_ptw_latency": (totals["ptw_latency_sum"] / ptw) if ptw else 0.0,
            "translation_fraction":
                totals["translation_cycles"] / totals["total_cycles"],
            "note": HUGE_PAGE_CAVEAT if m == "huge" else "",
        })
    return rows
