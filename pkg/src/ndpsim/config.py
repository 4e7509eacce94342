"""Simulation configuration: defaults, JSON loading, validation.

Defaults follow the evaluated system configuration: per-core 32KB 8-way
4-cycle L1 (plus 512KB/16/16 L2 and 2MB/16/35 L3 in CPU mode), 64-entry
4-way 1-cycle DTLB, 128-entry ITLB, 1536-entry 12-cycle L2 TLB, 16GB of
physical memory. Memory timing is a knob: HBM2 110-cycle access / 2-cycle
service interval, DDR4 165 / 4 (cycle values chosen from public part
datasheets; every report echoes the values used).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any

from .errors import ConfigError
from .memhier import CacheConfig
from .mmu import PwcConfig, TlbConfig
from .pagetable import PageTableMode

MECHANISMS = ("radix", "flat", "huge", "ideal", "ndpage")

MEMORY_KINDS = {
    "hbm2": (110, 2),
    "ddr4": (165, 4),
}

_MECHANISM_MODE = {
    "radix": PageTableMode.RADIX4,
    "flat": PageTableMode.FLATTENED_L21,
    "huge": PageTableMode.HUGE_2M,
    "ideal": PageTableMode.IDEAL,
    "ndpage": PageTableMode.FLATTENED_L21,
}


@dataclass(frozen=True)
class MemoryConfig:
    kind: str
    latency: int
    service_interval: int


@dataclass(frozen=True)
class SimConfig:
    mode: str = "ndp"                 # "ndp" | "cpu"
    mechanism: str = "radix"
    cores: int = 1
    bypass: bool = False
    seed: int = 0
    phys_gb: int = 16
    dtlb: TlbConfig = TlbConfig(64, 4, 1)
    itlb: TlbConfig = TlbConfig(128, 4, 1)
    l2tlb: TlbConfig = TlbConfig(1536, 12, 12)
    pwc: PwcConfig = PwcConfig(16, 4, 1)
    l1: CacheConfig = CacheConfig("L1", 32 << 10, 8, 4)
    l2: CacheConfig = CacheConfig("L2", 512 << 10, 16, 16)
    l3: CacheConfig = CacheConfig("L3", 2 << 20, 16, 35)
    memory: MemoryConfig = MemoryConfig("hbm2", 110, 2)

    def __post_init__(self):
        if self.mode not in ("ndp", "cpu"):
            raise ConfigError(f"mode: expected 'ndp' or 'cpu', got {self.mode!r}")
        if self.mechanism not in MECHANISMS:
            raise ConfigError(
                f"mechanism: expected one of {MECHANISMS}, got {self.mechanism!r}")
        if self.cores < 1:
            raise ConfigError("cores: must be >= 1")
        if self.effective_bypass and self.mode != "ndp":
            raise ConfigError(
                "bypass (and the ndpage mechanism) require mode == 'ndp': "
                "bypassing an inclusive multi-level cache is invalid")

    @property
    def effective_bypass(self) -> bool:
        return self.bypass or self.mechanism == "ndpage"

    @property
    def page_table_mode(self) -> PageTableMode:
        return _MECHANISM_MODE[self.mechanism]

    @property
    def phys_bytes(self) -> int:
        return self.phys_gb << 30

    @property
    def cache_levels(self) -> list[CacheConfig]:
        if self.mode == "ndp":
            return [self.l1]
        return [self.l1, self.l2, self.l3]

    def with_mechanism(self, mechanism: str) -> "SimConfig":
        bypass = self.bypass if mechanism == self.mechanism else False
        return SimConfig(**{**self.to_dict_flat(), "mechanism": mechanism,
                            "bypass": bypass})

    def to_dict_flat(self) -> dict:
        return {
            "mode": self.mode, "mechanism": self.mechanism,
            "cores": self.cores, "bypass": self.bypass, "seed": self.seed,
            "phys_gb": self.phys_gb, "dtlb": self.dtlb, "itlb": self.itlb,
            "l2tlb": self.l2tlb, "pwc": self.pwc, "l1": self.l1,
            "l2": self.l2, "l3": self.l3, "memory": self.memory,
        }

    def echo(self) -> dict:
        """Full effective configuration for embedding in reports."""
        def tlb(t: TlbConfig) -> dict:
            return {"entries": t.entries, "ways": t.ways, "latency": t.latency}

        def cache(c: CacheConfig) -> dict:
            return {"size_kb": c.size_bytes >> 10, "ways": c.ways,
                    "latency": c.latency, "line_bytes": c.line_bytes}

        out = {
            "mode": self.mode,
            "mechanism": self.mechanism,
            "cores": self.cores,
            "bypass": self.effective_bypass,
            "seed": self.seed,
            "phys_gb": self.phys_gb,
            "dtlb": tlb(self.dtlb),
            "itlb": tlb(self.itlb),
            "l2tlb": tlb(self.l2tlb),
            "pwc": {"entries": self.pwc.entries, "ways": self.pwc.ways,
                    "latency": self.pwc.latency},
            "l1": cache(self.l1),
            "memory": {"kind": self.memory.kind,
                       "latency": self.memory.latency,
                       "service_interval": self.memory.service_interval},
        }
        if self.mode == "cpu":
            out["l2"] = cache(self.l2)
            out["l3"] = cache(self.l3)
        return out


_TLB_KEYS = {"entries", "ways", "latency"}
_CACHE_KEYS = {"size_kb", "ways", "latency"}
_MEMORY_KEYS = {"kind", "latency", "service_interval"}
_TOP_KEYS = {"mode", "mechanism", "cores", "bypass", "seed", "phys_gb",
             "dtlb", "itlb", "l2tlb", "pwc", "l1", "l2", "l3", "memory"}


def _sub(raw: dict, key: str, allowed: set[str]) -> dict:
    section = raw.get(key, {})
    if not isinstance(section, dict):
        raise ConfigError(f"{key}: expected an object")
    for k in section:
        if k not in allowed:
            raise ConfigError(f"{key}.{k}: unknown key")
    return section


def load_config(raw: dict[str, Any]) -> SimConfig:
    """Build a SimConfig from a (possibly empty) JSON object.

    Unspecified keys take the documented defaults; unknown keys are
    rejected with their path.
    """
    if not isinstance(raw, dict):
        raise ConfigError("config: expected a JSON object at top level")
    for key in raw:
        if key not in _TOP_KEYS:
            raise ConfigError(f"{key}: unknown key")
    defaults = SimConfig()
    mode = raw.get("mode", "ndp")

    def tlb(key: str, base: TlbConfig) -> TlbConfig:
        s = _sub(raw, key, _TLB_KEYS)
        return TlbConfig(int(s.get("entries", base.entries)),
                         int(s.get("ways", base.ways)),
                         int(s.get("latency", base.latency)))

    def cache(key: str, base: CacheConfig) -> CacheConfig:
        s = _sub(raw, key, _CACHE_KEYS)
        return CacheConfig(base.name,
                           int(s.get("size_kb", base.size_bytes >> 10)) << 10,
                           int(s.get("ways", base.ways)),
                           int(s.get("latency", base.latency)))

    mem_raw = _sub(raw, "memory", _MEMORY_KEYS)
    kind = mem_raw.get("kind", "hbm2" if mode == "ndp" else "ddr4")
    if kind not in MEMORY_KINDS:
        raise ConfigError(f"memory.kind: expected one of {sorted(MEMORY_KINDS)}, "
                          f"got {kind!r}")
    k_lat, k_int = MEMORY_KINDS[kind]
    memory = MemoryConfig(kind, int(mem_raw.get("latency", k_lat)),
                          int(mem_raw.get("service_interval", k_int)))

    pwc_raw = _sub(raw, "pwc", _TLB_KEYS)
    pwc = PwcConfig(int(pwc_raw.get("entries", defaults.pwc.entries)),
                    int(pwc_raw.get("ways", defaults.pwc.ways)),
                    int(pwc_raw.get("latency", defaults.pwc.latency)))

    return SimConfig(
        mode=mode,
        mechanism=raw.get("mechanism", "radix"),
        cores=int(raw.get("cores", 1)),
        bypass=bool(raw.get("bypass", False)),
        seed=int(raw.get("seed", 0)),
        phys_gb=int(raw.get("phys_gb", 16)),
        dtlb=tlb("dtlb", defaults.dtlb),
        itlb=tlb("itlb", defaults.itlb),
        l2tlb=tlb("l2tlb", defaults.l2tlb),
        pwc=pwc,
        l1=cache("l1", defaults.l1),
        l2=cache("l2", defaults.l2),
        l3=cache("l3", defaults.l3),
        memory=memory,
    )
