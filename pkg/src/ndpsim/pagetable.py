"""Functional page tables in four structural modes, plus the frame allocator.

Modes:

* RADIX4        -- classic 4-level x86-64 table (PL4 -> PL3 -> PL2 -> PL1).
* FLATTENED_L21 -- PL4 -> PL3 -> one 2MB node with 262,144 entries that
                   replaces each PL2 node and its 512 PL1 children.
* HUGE_2M       -- PL4 -> PL3 -> PL2 whose leaves map 2MB frames.
* IDEAL         -- no table at all; identity-like frame mapping.

The allocator hands data frames out bottom-up and table-node frames
top-down from one physical space. That keeps data-frame assignment order
identical across RADIX4 and FLATTENED_L21 for the same map() sequence
(table-node allocation patterns differ between the modes, so a single
shared cursor would not).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Optional

from . import addr
from .errors import IndexOutOfRange, OutOfPhysicalMemory, PageNotMapped

logger = logging.getLogger(__name__)

PTE_BYTES = 8
NODE_ENTRIES = 512
FLAT_ENTRIES = 1 << 18
FRAMES_PER_2MB = 512

PL4 = "PL4"
PL3 = "PL3"
PL2 = "PL2"
PL1 = "PL1"
PL21 = "PL21"
PL21_COMBINED = "PL2/PL1"

LEVELS_4K = (PL4, PL3, PL2, PL1)


class PageTableMode(str, Enum):
    RADIX4 = "radix"
    FLATTENED_L21 = "flat"
    HUGE_2M = "huge"
    IDEAL = "ideal"


@dataclass
class PageTableEntry:
    """Materialized view of one 64-bit entry."""
    valid: bool
    frame: int = 0
    flattened_bit: bool = False


class TableNode:
    """One table node: 512 entries (4KB) or 262,144 entries (2MB, flattened).

    Storage is sparse: `entries` maps index -> frame the entry points to
    (child node base frame, or data frame at the leaf). Presence == valid.
    """

    __slots__ = ("level", "base", "entry_count", "entries", "children")

    def __init__(self, level: str, base: int, entry_count: int):
        self.level = level
        self.base = base                      # physical byte address, node start
        self.entry_count = entry_count
        self.entries: dict[int, int] = {}
        self.children: dict[int, "TableNode"] = {}

    @property
    def byte_size(self) -> int:
        return self.entry_count * PTE_BYTES


@dataclass
class WalkPath:
    """Result of resolve(): ordered PTE addresses plus the terminal frame."""
    entries: list[tuple[str, int]]            # (level, pte physical address)
    frame: int
    page_shift: int


@dataclass
class OccupancyLevel:
    nodes: int
    valid_entries: int
    ratio: float


class FrameAllocator:
    """Deterministic bump allocator over 4KB frames, no deallocation.

    Data frames grow up from frame 0; table-node frames grow down from the
    top. 2MB allocations (huge data frames, flattened nodes) are 512-frame
    aligned. The two regions colliding raises OutOfPhysicalMemory.
    """

    def __init__(self, total_bytes: int):
        self.total_frames = total_bytes // addr.PAGE_SIZE
        self._data_next = 0
        self._table_next = self.total_frames
        self.data_allocs = 0
        self.table_log: list[tuple[str, int, int]] = []

    def alloc_data(self, frames: int = 1, align: int = 1) -> int:
        start = self._data_next
        if align > 1 and start % align:
            start += align - start % align
        if start + frames > self._table_next:
            raise OutOfPhysicalMemory(
                f"cannot allocate {frames} data frame(s); "
                f"{self._table_next - self._data_next} left")
        self._data_next = start + frames
        self.data_allocs += 1
        return start

    def alloc_table(self, level: str, frames: int = 1) -> int:
        start = self._table_next - frames
        start -= start % frames                # natural alignment
        if start < self._data_next:
            raise OutOfPhysicalMemory(
                f"cannot allocate {frames} table frame(s) for {level}")
        self._table_next = start
        self.table_log.append((level, start, frames))
        return start

    @property
    def frames_used(self) -> int:
        return self._data_next + (self.total_frames - self._table_next)


class PageTableSet:
    """One address space's page table forest plus its physical allocator."""

    def __init__(self, mode: PageTableMode, phys_bytes: int = 16 << 30):
        self.mode = PageTableMode(mode)
        self.allocator = FrameAllocator(phys_bytes)
        self.nodes_by_level: dict[str, list[TableNode]] = {}
        self.table_frames: set[int] = set()
        self.data_frames: set[int] = set()
        self.pages_mapped = 0
        self._ideal_pages: set[int] = set()
        self.root: Optional[TableNode] = None
        if self.mode is not PageTableMode.IDEAL:
            # CR3 always points somewhere: the root exists from creation.
            self.root = self._new_node(PL4)
        self.resolve_ptes = {
            PageTableMode.RADIX4: self._resolve_radix,
            PageTableMode.FLATTENED_L21: self._resolve_flat,
            PageTableMode.HUGE_2M: self._resolve_huge,
            PageTableMode.IDEAL: self._resolve_ideal,
        }[self.mode]

    # -- structure -----------------------------------------------------

    @property
    def page_shift(self) -> int:
        return addr.HUGE_SHIFT if self.mode is PageTableMode.HUGE_2M else addr.PAGE_SHIFT

    @property
    def walk_levels(self) -> tuple[str, ...]:
        if self.mode is PageTableMode.RADIX4:
            return (PL4, PL3, PL2, PL1)
        if self.mode is PageTableMode.FLATTENED_L21:
            return (PL4, PL3, PL21)
        if self.mode is PageTableMode.HUGE_2M:
            return (PL4, PL3, PL2)
        return ()

    def _new_node(self, level: str) -> TableNode:
        frames = FRAMES_PER_2MB if level == PL21 else 1
        entry_count = FLAT_ENTRIES if level == PL21 else NODE_ENTRIES
        base_frame = self.allocator.alloc_table(level, frames)
        node = TableNode(level, base_frame << addr.PAGE_SHIFT, entry_count)
        self.nodes_by_level.setdefault(level, []).append(node)
        self.table_frames.update(range(base_frame, base_frame + frames))
        return node

    def _child(self, node: TableNode, index: int, level: str) -> TableNode:
        child = node.children.get(index)
        if child is None:
            child = self._new_node(level)
            node.children[index] = child
            node.entries[index] = child.base >> addr.PAGE_SHIFT
        return child

    # -- operations ------------------------------------------------------

    def map(self, va: int) -> int:
        """Ensure va's whole path exists; return its physical address.

        Idempotent: re-mapping an already-mapped va allocates nothing and
        returns the same physical address.
        """
        mode = self.mode
        if mode is PageTableMode.IDEAL:
            idx = addr.split_radix(va)
            vpn = va >> addr.PAGE_SHIFT
            if vpn not in self._ideal_pages:
                self._ideal_pages.add(vpn)
                self.pages_mapped += 1
            return (self.ideal_frame(va) << addr.PAGE_SHIFT) | idx.offset

        if mode is PageTableMode.RADIX4:
            idx = addr.split_radix(va)
            node = self._child(
                self._child(self._child(self.root, idx.i4, PL3), idx.i3, PL2),
                idx.i2, PL1)
            leaf_index, offset, shift = idx.i1, idx.offset, addr.PAGE_SHIFT
            frame = node.entries.get(leaf_index)
            if frame is None:
                frame = self.allocator.alloc_data()
                self.data_frames.add(frame)
        elif mode is PageTableMode.FLATTENED_L21:
            fidx = addr.split_flattened(va)
            node = self._child(self._child(self.root, fidx.i4, PL3), fidx.i3, PL21)
            leaf_index, offset, shift = fidx.i21, fidx.offset, addr.PAGE_SHIFT
            frame = node.entries.get(leaf_index)
            if frame is None:
                frame = self.allocator.alloc_data()
                self.data_frames.add(frame)
        else:  # HUGE_2M
            hidx = addr.split_huge(va)
            node = self._child(self._child(self.root, hidx.i4, PL3), hidx.i3, PL2)
            leaf_index, offset, shift = hidx.i2, hidx.offset21, addr.HUGE_SHIFT
            frame = node.entries.get(leaf_index)
            if frame is None:
                base = self.allocator.alloc_data(FRAMES_PER_2MB, align=FRAMES_PER_2MB)
                self.data_frames.update(range(base, base + FRAMES_PER_2MB))
                frame = base >> 9  # 2MB frame number
        if leaf_index not in node.entries:
            node.entries[leaf_index] = frame
            self.pages_mapped += 1
        return (frame << shift) | offset

    def resolve(self, va: int) -> WalkPath:
        """Return the PTE addresses a walker visits for va, plus its frame."""
        addr.require_canonical(va)
        ptes, frame = self.resolve_ptes(va)
        return WalkPath(list(zip(self.walk_levels, ptes)), frame,
                        self.page_shift)

    # Walker-facing fast paths: direct bit extraction and dict access, no
    # intermediate objects. Addresses are assumed canonical (enforced at
    # trace parse / generation time and by the public resolve()).

    def _resolve_radix(self, va: int):
        i4 = (va >> 39) & 511
        i3 = (va >> 30) & 511
        i2 = (va >> 21) & 511
        i1 = (va >> 12) & 511
        root = self.root
        n3 = root.children.get(i4)
        if n3 is None:
            raise PageNotMapped(va, PL4)
        n2 = n3.children.get(i3)
        if n2 is None:
            raise PageNotMapped(va, PL3)
        n1 = n2.children.get(i2)
        if n1 is None:
            raise PageNotMapped(va, PL2)
        frame = n1.entries.get(i1)
        if frame is None:
            raise PageNotMapped(va, PL1)
        return (root.base + i4 * 8, n3.base + i3 * 8, n2.base + i2 * 8,
                n1.base + i1 * 8), frame

    def _resolve_flat(self, va: int):
        i4 = (va >> 39) & 511
        i3 = (va >> 30) & 511
        i21 = (va >> 12) & 0x3FFFF
        root = self.root
        n3 = root.children.get(i4)
        if n3 is None:
            raise PageNotMapped(va, PL4)
        n21 = n3.children.get(i3)
        if n21 is None:
            raise PageNotMapped(va, PL3)
        frame = n21.entries.get(i21)
        if frame is None:
            raise PageNotMapped(va, PL21)
        return (root.base + i4 * 8, n3.base + i3 * 8, n21.base + i21 * 8), frame

    def _resolve_huge(self, va: int):
        i4 = (va >> 39) & 511
        i3 = (va >> 30) & 511
        i2 = (va >> 21) & 511
        root = self.root
        n3 = root.children.get(i4)
        if n3 is None:
            raise PageNotMapped(va, PL4)
        n2 = n3.children.get(i3)
        if n2 is None:
            raise PageNotMapped(va, PL3)
        frame = n2.entries.get(i2)
        if frame is None:
            raise PageNotMapped(va, PL2)
        return (root.base + i4 * 8, n3.base + i3 * 8, n2.base + i2 * 8), frame

    def _resolve_ideal(self, va: int):
        return (), (va >> addr.PAGE_SHIFT) % self.allocator.total_frames

    @staticmethod
    def pte_address(node: TableNode, index: int) -> int:
        if not 0 <= index < node.entry_count:
            raise IndexOutOfRange(
                f"entry index {index} out of range for {node.level} node")
        return node.base + index * PTE_BYTES

    @staticmethod
    def entry(node: TableNode, index: int) -> PageTableEntry:
        if not 0 <= index < node.entry_count:
            raise IndexOutOfRange(
                f"entry index {index} out of range for {node.level} node")
        frame = node.entries.get(index)
        if frame is None:
            return PageTableEntry(valid=False)
        return PageTableEntry(valid=True, frame=frame,
                              flattened_bit=(index in node.children
                                             and node.children[index].level == PL21))

    def occupancy(self, level: str) -> OccupancyLevel:
        """Valid-entry fraction over all allocated nodes at `level`.

        The PL2/PL1 combined view (RADIX4 only) counts PL1 entries against
        the flattened capacity of the existing PL2 nodes.
        """
        if level == PL21_COMBINED:
            pl2 = self.nodes_by_level.get(PL2, [])
            valid = sum(len(n.entries) for n in self.nodes_by_level.get(PL1, []))
            cap = FLAT_ENTRIES * len(pl2)
            return OccupancyLevel(len(pl2), valid, valid / cap if cap else 0.0)
        nodes = self.nodes_by_level.get(level, [])
        if not nodes:
            return OccupancyLevel(0, 0, 0.0)
        valid = sum(len(n.entries) for n in nodes)
        return OccupancyLevel(len(nodes), valid,
                              valid / (nodes[0].entry_count * len(nodes)))

    def occupancy_report(self) -> dict[str, OccupancyLevel]:
        levels = list(self.walk_levels)
        if self.mode is PageTableMode.RADIX4:
            levels.append(PL21_COMBINED)
        return {level: self.occupancy(level) for level in levels}

    def is_metadata(self, pa: int) -> bool:
        """True iff pa falls inside an allocated table node."""
        return (pa >> addr.PAGE_SHIFT) in self.table_frames

    def metadata_bytes(self) -> int:
        return sum(node.byte_size
                   for nodes in self.nodes_by_level.values() for node in nodes)

    def ideal_frame(self, va: int) -> int:
        addr.require_canonical(va)
        return (va >> addr.PAGE_SHIFT) % self.allocator.total_frames
