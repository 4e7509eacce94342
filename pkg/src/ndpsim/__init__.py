"""Trace-driven simulator of virtual-to-physical address translation and
the memory hierarchy in near-data-processing systems."""

from .config import SimConfig, load_config
from .engine import SimStats, Simulation, compare, simulate
from .pagetable import PageTableMode, PageTableSet
from .trace import (GeneratorSpec, TraceRecord, Workload, generate,
                    generate_workload, parse_trace, write_trace)

__version__ = "0.1.0"

__all__ = [
    "GeneratorSpec",
    "PageTableMode",
    "PageTableSet",
    "SimConfig",
    "SimStats",
    "Simulation",
    "TraceRecord",
    "Workload",
    "compare",
    "generate",
    "generate_workload",
    "load_config",
    "parse_trace",
    "simulate",
    "write_trace",
    "__version__",
]
