"""Run reports: raw counters plus derived metrics, serialized as JSON.

Every derived metric is recomputable from the raw integer counters in the
same document; serialization is deterministic (sorted keys, no
timestamps) so identical runs produce byte-identical files.
"""

from __future__ import annotations

import json

from .config import SimConfig
from .engine import SimStats


def _rate(num: int, den: int) -> float:
    return num / den if den else 0.0


def derived_metrics(stats: SimStats) -> dict:
    t = stats.totals
    tlb = t["tlb"]
    lookups = tlb["l1_hits"] + tlb["l1_misses"]
    l1 = stats.cache.get("L1", {"total": {}})["total"]
    data = l1.get("data", {"hits": 0, "misses": 0})
    meta = l1.get("metadata", {"hits": 0, "misses": 0})
    return {
        "avg_ptw_latency": _rate(t["ptw_latency_sum"], t["ptw_count"]),
        "max_ptw_latency": t["ptw_latency_max"],
        "translation_fraction": _rate(t["translation_cycles"], t["total_cycles"]),
        "l1_miss_rate_data": _rate(data["misses"],
                                   data["hits"] + data["misses"]),
        "l1_miss_rate_metadata": _rate(meta["misses"],
                                       meta["hits"] + meta["misses"]),
        "tlb_miss_rate": _rate(tlb["l2_misses"], lookups),
        "pwc_hit_rate": {lvl: _rate(v["hits"], v["probes"])
                         for lvl, v in t["pwc"].items()},
        "leaf_miss_rate": _rate(t["leaf_fetches"], t["ptw_count"]),
        "occupancy": {lvl: v["occupancy"] for lvl, v in stats.occupancy.items()},
    }


def build_report(config: SimConfig, stats: SimStats) -> dict:
    return {
        "config": config.echo(),
        "stats": stats.to_dict(),
        "derived": derived_metrics(stats),
    }


def to_json(document: dict) -> str:
    return json.dumps(document, indent=2, sort_keys=True) + "\n"


def occupancy_csv(stats: SimStats) -> str:
    lines = ["level,nodes,valid_entries,occupancy"]
    for level, row in stats.occupancy.items():
        lines.append(f"{level},{row['nodes']},{row['valid_entries']},"
                     f"{row['occupancy']:.6f}")
    return "\n".join(lines) + "\n"


def speedup_csv(rows: list[dict]) -> str:
    lines = ["mechanism,total_cycles,speedup,avg_ptw_latency,"
             "translation_fraction,note"]
    for r in rows:
        lines.append(f"{r['mechanism']},{r['total_cycles']},"
                     f"{r['speedup']:.6f},{r['avg_ptw_latency']:.6f},"
                     f"{r['translation_fraction']:.6f},{r['note']}")
    return "\n".join(lines) + "\n"
