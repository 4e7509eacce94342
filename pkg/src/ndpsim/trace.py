"""Trace records, the text trace format, and synthetic workload generators.

Text format (bit-exact, UTF-8): one record per line,
``<core:decimal> <R|W> <va:0x-hex>`` with single spaces and a trailing
newline; lines starting with ``#`` are comments. Generators approximate
the access-pattern classes of data-intensive NDP workloads (uniform
random GUPS, streaming, pointer chasing, Zipf-skewed) at desk scale.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from . import addr
from .errors import InvalidSpec, NonCanonicalAddress, ParseError

logger = logging.getLogger(__name__)

# Mid-canonical-space default base keeps low PL4 slots sparse like a real heap.
DEFAULT_BASE = 0x0000_1000_0000_0000

GENERATOR_KINDS = ("gups", "stream", "linked", "zipf")


@dataclass(frozen=True, slots=True)
class TraceRecord:
    core: int
    write: bool
    va: int


@dataclass(frozen=True)
class GeneratorSpec:
    kind: str
    pages: int
    accesses: int          # records per core
    cores: int = 1
    seed: int = 0
    zipf_s: float = 1.2
    write_fraction: float = 0.5   # gups read-modify-write default
    base: int = DEFAULT_BASE
    shared: bool = False          # all cores replay the identical stream

    def __post_init__(self):
        if self.kind not in GENERATOR_KINDS:
            raise InvalidSpec(f"unknown generator kind {self.kind!r}")
        if self.pages < 1 or self.accesses < 1 or self.cores < 1:
            raise InvalidSpec("pages, accesses, and cores must all be >= 1")
        if not 0.0 <= self.write_fraction <= 1.0:
            raise InvalidSpec("write_fraction must be in [0, 1]")
        if not addr.is_canonical(self.base):
            raise InvalidSpec(f"base {self.base:#x} is not canonical")


@dataclass
class Workload:
    """Global-order trace as parallel columns (compact for large runs)."""
    cores: list[int]
    vas: list[int]
    writes: list[bool]
    n_cores: int

    def __len__(self) -> int:
        return len(self.vas)

    @classmethod
    def from_records(cls, records: list[TraceRecord]) -> "Workload":
        n_cores = max((r.core for r in records), default=-1) + 1
        return cls([r.core for r in records], [r.va for r in records],
                   [r.write for r in records], max(n_cores, 1))


# -- text format ---------------------------------------------------------

def parse_trace(text: str) -> list[TraceRecord]:
    records = []
    for line_no, line in enumerate(text.splitlines(), start=1):
        if not line or line.startswith("#"):
            continue
        parts = line.split(" ")
        if len(parts) != 3:
            raise ParseError(line_no, f"expected 3 fields, got {len(parts)}")
        core_s, op, va_s = parts
        if not core_s.isdigit():
            raise ParseError(line_no, f"bad core id {core_s!r}")
        if op not in ("R", "W"):
            raise ParseError(line_no, f"bad op {op!r} (expected R or W)")
        if not va_s.startswith("0x"):
            raise ParseError(line_no, f"address {va_s!r} must be 0x-hex")
        try:
            va = int(va_s, 16)
        except ValueError:
            raise ParseError(line_no, f"bad address {va_s!r}") from None
        if not addr.is_canonical(va):
            raise NonCanonicalAddress(
                f"line {line_no}: non-canonical address {va_s}")
        records.append(TraceRecord(int(core_s), op == "W", va))
    return records


def write_trace(records: list[TraceRecord]) -> str:
    return "".join(
        f"{r.core} {'W' if r.write else 'R'} {r.va:#x}\n" for r in records)


# -- generators ----------------------------------------------------------

def _core_stream(spec: GeneratorSpec, rng: np.random.Generator,
                 base: int) -> tuple[np.ndarray, np.ndarray]:
    """One core's (va, write) arrays for the given region base."""
    n, pages = spec.accesses, spec.pages
    if spec.kind == "gups":
        page = rng.integers(0, pages, n, dtype=np.int64)
        word = rng.integers(0, addr.PAGE_SIZE // 8, n, dtype=np.int64)
        vas = base + page * addr.PAGE_SIZE + word * 8
        writes = rng.random(n) < spec.write_fraction
    elif spec.kind == "stream":
        offs = (np.arange(n, dtype=np.int64) * 64) % (pages * addr.PAGE_SIZE)
        vas = base + offs
        writes = np.zeros(n, dtype=bool)
    elif spec.kind == "linked":
        perm = rng.permutation(pages)
        visit = np.empty(n, dtype=np.int64)
        p = 0
        for i in range(n):
            visit[i] = p
            p = perm[p]
        vas = base + visit * addr.PAGE_SIZE
        writes = np.zeros(n, dtype=bool)
    else:  # zipf
        weights = np.arange(1, pages + 1, dtype=np.float64) ** -spec.zipf_s
        page = rng.choice(pages, size=n, p=weights / weights.sum())
        word = rng.integers(0, addr.PAGE_SIZE // 8, n, dtype=np.int64)
        vas = base + page * addr.PAGE_SIZE + word * 8
        writes = np.zeros(n, dtype=bool)
    return vas, writes


def _region_stride(spec: GeneratorSpec) -> int:
    # Per-core regions rounded up to a 2MB boundary so huge-page frames
    # never straddle two cores' footprints.
    footprint = spec.pages * addr.PAGE_SIZE
    return (footprint + addr.HUGE_SIZE - 1) // addr.HUGE_SIZE * addr.HUGE_SIZE


def generate_workload(spec: GeneratorSpec) -> Workload:
    """Deterministic multi-core workload, cores interleaved round-robin."""
    rng = np.random.default_rng(spec.seed)
    stride = _region_stride(spec)
    streams = []
    if spec.shared:
        vas, writes = _core_stream(spec, rng, spec.base)
        streams = [(vas, writes)] * spec.cores
    else:
        for core in range(spec.cores):
            streams.append(_core_stream(spec, rng, spec.base + core * stride))
    top = spec.base + (1 if spec.shared else spec.cores) * stride
    if not addr.is_canonical(top - 1):
        raise InvalidSpec("footprint exceeds the canonical address space")

    vas = np.stack([s[0] for s in streams], axis=1).ravel()
    writes = np.stack([s[1] for s in streams], axis=1).ravel()
    cores = np.tile(np.arange(spec.cores), spec.accesses)
    return Workload(cores.tolist(), vas.tolist(),
                    writes.tolist(), spec.cores)


def generate(spec: GeneratorSpec) -> list[TraceRecord]:
    wl = generate_workload(spec)
    return [TraceRecord(c, w, v)
            for c, w, v in zip(wl.cores, wl.vas, wl.writes)]
