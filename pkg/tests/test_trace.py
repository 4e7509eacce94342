import pytest
from hypothesis import given, strategies as st

from ndpsim import addr
from ndpsim.errors import InvalidSpec, NonCanonicalAddress, ParseError
from ndpsim.trace import (DEFAULT_BASE, GeneratorSpec, TraceRecord, Workload,
                          generate, generate_workload, parse_trace,
                          write_trace)


# -- text format ---------------------------------------------------------

def test_parse_trivial_examples():
    text = "0 R 0x1000\n1 W 0xffff800000000000\n"
    assert parse_trace(text) == [
        TraceRecord(0, False, 0x1000),
        TraceRecord(1, True, 0xFFFF_8000_0000_0000),
    ]


def test_comments_and_blank_lines_skipped():
    text = "# header\n\n0 R 0x0\n# trailer\n"
    assert parse_trace(text) == [TraceRecord(0, False, 0)]


@pytest.mark.parametrize("line,fragment", [
    ("0 R", "3 fields"),
    ("0 R 0x0 extra", "3 fields"),
    ("x R 0x0", "core"),
    ("0 Q 0x0", "op"),
    ("0 R 1000", "0x-hex"),
    ("0 R 0xzz", "address"),
])
def test_parse_errors_carry_line_number(line, fragment):
    with pytest.raises(ParseError) as exc:
        parse_trace("# comment\n" + line + "\n")
    assert exc.value.line_no == 2
    assert fragment in str(exc.value)


def test_parse_rejects_non_canonical():
    with pytest.raises(NonCanonicalAddress):
        parse_trace("0 R 0x800000000000\n")


def test_write_format_is_exact():
    records = [TraceRecord(3, True, 0xABC), TraceRecord(0, False, 0)]
    assert write_trace(records) == "3 W 0xabc\n0 R 0x0\n"


records_strategy = st.lists(st.builds(
    TraceRecord,
    core=st.integers(0, 63),
    write=st.booleans(),
    va=st.integers(0, (1 << 48) - 1).map(
        lambda v: v | (0xFFFF << 48) if v & (1 << 47) else v),
), max_size=50)


@given(records_strategy)
def test_round_trip(records):
    assert parse_trace(write_trace(records)) == records


# -- generators ----------------------------------------------------------

def test_spec_validation():
    with pytest.raises(InvalidSpec):
        GeneratorSpec("bogus", 1, 1)
    with pytest.raises(InvalidSpec):
        GeneratorSpec("gups", 0, 1)
    with pytest.raises(InvalidSpec):
        GeneratorSpec("gups", 1, 1, write_fraction=1.5)
    with pytest.raises(InvalidSpec):
        GeneratorSpec("gups", 1, 1, base=1 << 47)


@pytest.mark.parametrize("kind", ["gups", "stream", "linked", "zipf"])
def test_generator_determinism(kind):
    spec = GeneratorSpec(kind, pages=64, accesses=500, cores=2, seed=7)
    assert generate(spec) == generate(spec)


@pytest.mark.parametrize("kind", ["gups", "stream", "linked", "zipf"])
def test_generator_bounds_and_shape(kind):
    spec = GeneratorSpec(kind, pages=64, accesses=200, cores=3, seed=1)
    wl = generate_workload(spec)
    assert len(wl) == 200 * 3
    assert wl.cores[:6] == [0, 1, 2, 0, 1, 2]  # round-robin interleave
    stride = 2 << 20  # 64 pages round up to one 2MB region per core
    for core, va in zip(wl.cores, wl.vas):
        lo = spec.base + core * stride
        assert lo <= va < lo + 64 * addr.PAGE_SIZE
        assert addr.is_canonical(va)


def test_per_core_regions_disjoint():
    spec = GeneratorSpec("gups", pages=600, accesses=300, cores=4, seed=3)
    wl = generate_workload(spec)
    regions = {}
    for core, va in zip(wl.cores, wl.vas):
        regions.setdefault(core, set()).add(va >> 21)
    seen = [r for c in sorted(regions) for r in regions[c]]
    assert len(seen) == len(set(seen))


def test_shared_flag_replicates_one_stream():
    spec = GeneratorSpec("gups", pages=32, accesses=100, cores=3, seed=9,
                         shared=True)
    wl = generate_workload(spec)
    per_core = {c: [] for c in range(3)}
    for core, va, w in zip(wl.cores, wl.vas, wl.writes):
        per_core[core].append((va, w))
    assert per_core[0] == per_core[1] == per_core[2]


def test_stream_is_sequential_lines():
    spec = GeneratorSpec("stream", pages=16, accesses=64, seed=0)
    wl = generate_workload(spec)
    assert wl.vas[0] == DEFAULT_BASE
    deltas = {b - a for a, b in zip(wl.vas, wl.vas[1:])}
    assert deltas == {64}
    assert not any(wl.writes)


def test_linked_visits_form_a_cycle_permutation():
    spec = GeneratorSpec("linked", pages=32, accesses=32, seed=5)
    wl = generate_workload(spec)
    pages = [(va - DEFAULT_BASE) >> 12 for va in wl.vas]
    assert pages[0] == 0
    # successors are a function: same page always chased to the same next
    succ = {}
    for a, b in zip(pages, pages[1:]):
        assert succ.setdefault(a, b) == b


def test_zipf_is_skewed_toward_low_pages():
    spec = GeneratorSpec("zipf", pages=1024, accesses=20_000, seed=11,
                         zipf_s=1.2)
    wl = generate_workload(spec)
    pages = [(va - DEFAULT_BASE) >> 12 for va in wl.vas]
    hot = sum(1 for p in pages if p < 16)
    assert hot > len(pages) * 0.3  # top 1.6% of pages draw >30% of traffic


def test_gups_write_fraction_controls_writes():
    reads_only = GeneratorSpec("gups", 64, 5000, seed=2, write_fraction=0.0)
    assert not any(generate_workload(reads_only).writes)
    writes_only = GeneratorSpec("gups", 64, 5000, seed=2, write_fraction=1.0)
    assert all(generate_workload(writes_only).writes)


def test_workload_from_records_round_trip():
    spec = GeneratorSpec("gups", pages=8, accesses=50, cores=2, seed=4)
    records = generate(spec)
    wl = Workload.from_records(records)
    assert wl.n_cores == 2
    assert wl.vas == [r.va for r in records]
    assert wl.writes == [r.write for r in records]


def test_footprint_must_stay_canonical():
    spec = GeneratorSpec("gups", pages=1, accesses=1, cores=2,
                         base=0x0000_7FFF_FFE0_0000)  # core 1 spills past 2^47
    with pytest.raises(InvalidSpec):
        generate_workload(spec)
