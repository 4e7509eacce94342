"""Bit-exact codecs for 48-bit canonical x86-64 virtual addresses.

Three indexing schemes share the same 4KB offset layout:

* radix      -- four 9-bit indices (i4..i1) + 12-bit offset
* flattened  -- i4, i3, then one 18-bit combined index (i2:i1 concatenated)
* huge (2MB) -- i4, i3, i2, then a 21-bit in-page offset (i1:offset)

Addresses are plain ints. Canonicality (bits 48..63 equal to bit 47) is
checked, never silently masked, so malformed trace input fails loudly.
"""

from __future__ import annotations

from typing import NamedTuple

from .errors import IndexOutOfRange, NonCanonicalAddress

PAGE_SHIFT = 12
PAGE_SIZE = 1 << PAGE_SHIFT
HUGE_SHIFT = 21
HUGE_SIZE = 1 << HUGE_SHIFT

LEVEL_MASK = 0x1FF           # 9-bit per-level index
FLAT_MASK = 0x3FFFF          # 18-bit combined L2/L1 index
OFFSET_MASK = PAGE_SIZE - 1
HUGE_OFFSET_MASK = HUGE_SIZE - 1

_SIGN_EXT = 0xFFFF << 48


class RadixIndices(NamedTuple):
    i4: int
    i3: int
    i2: int
    i1: int
    offset: int


class FlatIndices(NamedTuple):
    i4: int
    i3: int
    i21: int
    offset: int


class HugeIndices(NamedTuple):
    i4: int
    i3: int
    i2: int
    offset21: int


def is_canonical(va: int) -> bool:
    """True iff va is a 64-bit value whose top 17 bits are all-0 or all-1."""
    if not 0 <= va < (1 << 64):
        return False
    top = va >> 47
    return top == 0 or top == 0x1FFFF


def require_canonical(va: int) -> int:
    if not is_canonical(va):
        raise NonCanonicalAddress(f"non-canonical virtual address {va:#x}")
    return va


def split_radix(va: int) -> RadixIndices:
    """Decompose va into the four radix walk indices and page offset."""
    require_canonical(va)
    return RadixIndices(
        (va >> 39) & LEVEL_MASK,
        (va >> 30) & LEVEL_MASK,
        (va >> 21) & LEVEL_MASK,
        (va >> 12) & LEVEL_MASK,
        va & OFFSET_MASK,
    )


def split_flattened(va: int) -> FlatIndices:
    """Decompose va for the merged-L2/L1 table: 18 bits index one node."""
    require_canonical(va)
    return FlatIndices(
        (va >> 39) & LEVEL_MASK,
        (va >> 30) & LEVEL_MASK,
        (va >> 12) & FLAT_MASK,
        va & OFFSET_MASK,
    )


def split_huge(va: int) -> HugeIndices:
    """Decompose va for 2MB leaves: i1 and offset collapse into offset21."""
    require_canonical(va)
    return HugeIndices(
        (va >> 39) & LEVEL_MASK,
        (va >> 30) & LEVEL_MASK,
        (va >> 21) & LEVEL_MASK,
        va & HUGE_OFFSET_MASK,
    )


def _check(value: int, limit: int, name: str) -> int:
    if not 0 <= value < limit:
        raise IndexOutOfRange(f"{name}={value} out of range [0, {limit})")
    return value


def _sign_extend(va48: int) -> int:
    return va48 | _SIGN_EXT if va48 & (1 << 47) else va48


def compose_radix(idx: RadixIndices) -> int:
    i4, i3, i2, i1, off = idx
    _check(i4, 512, "i4")
    _check(i3, 512, "i3")
    _check(i2, 512, "i2")
    _check(i1, 512, "i1")
    _check(off, PAGE_SIZE, "offset")
    return _sign_extend((i4 << 39) | (i3 << 30) | (i2 << 21) | (i1 << 12) | off)


def compose_flattened(idx: FlatIndices) -> int:
    i4, i3, i21, off = idx
    _check(i4, 512, "i4")
    _check(i3, 512, "i3")
    _check(i21, 1 << 18, "i21")
    _check(off, PAGE_SIZE, "offset")
    return _sign_extend((i4 << 39) | (i3 << 30) | (i21 << 12) | off)


def compose_huge(idx: HugeIndices) -> int:
    i4, i3, i2, off21 = idx
    _check(i4, 512, "i4")
    _check(i3, 512, "i3")
    _check(i2, 512, "i2")
    _check(off21, HUGE_SIZE, "offset21")
    return _sign_extend((i4 << 39) | (i3 << 30) | (i2 << 21) | off21)
