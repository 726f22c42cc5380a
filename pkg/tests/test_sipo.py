import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from topoveil.errors import WidthMismatch, ZeroWidth
from topoveil.obnocs import ActivationPackage
from topoveil.sipo import clock, load_package, reset

bitstrings = st.text(alphabet="01", min_size=1, max_size=64)


def test_reset_widths():
    assert reset(4).state == "0000"
    assert reset(32).state == "0" * 32
    with pytest.raises(ZeroWidth):
        reset(0)


def test_single_shift_enters_at_serial_end():
    r = reset(4)
    r = clock(r, 1, 1)
    assert r.state == "1000"


def test_gated_clock_is_noop():
    r = clock(reset(4), 1, 1)
    assert r.state == "1000"
    r2 = clock(r, 0, 0)
    assert r2.state == "1000"
    assert not r2.load_enabled


def test_shift_word_in():
    r = reset(4)
    for bit in "1011"[::-1]:
        r = clock(r, int(bit), 1)
    assert r.state == "1011"


def test_overshift_drops_oldest():
    r = reset(2)
    for bit in (1, 0, 1):
        r = clock(r, bit, 1)
    assert r.state == "10"  # first 1 fell off


def test_load_package_reproduces_bits():
    rng = random.Random(8)
    for _ in range(100):
        width = rng.randint(8, 64)
        bits = "".join(rng.choice("01") for _ in range(width))
        reg, trace = load_package(reset(width), ActivationPackage(bits))
        assert reg.state == bits
        assert len(trace.steps) == width + 1
        assert trace.steps[-1].load_en == 0
        cycles = [s.cycle for s in trace.steps]
        assert cycles == sorted(cycles) and cycles[0] == 0


@given(bitstrings)
def test_load_reproduces_any_package(bits):
    reg, _ = load_package(reset(len(bits)), ActivationPackage(bits))
    assert reg.state == bits


@given(bitstrings, st.integers(min_value=0, max_value=8))
def test_gated_cycles_never_change_state(bits, idle):
    reg, _ = load_package(reset(len(bits)), ActivationPackage(bits))
    for i in range(idle):
        reg = clock(reg, i & 1, 0)
    assert reg.state == bits


def test_width_mismatch():
    with pytest.raises(WidthMismatch):
        load_package(reset(4), ActivationPackage("10111"))


def test_partial_load_differs_for_non_degenerate_packages():
    # w-1 enabled cycles must not already equal the package unless the
    # package equals its own one-bit shift
    rng = random.Random(9)
    for _ in range(50):
        width = rng.randint(2, 24)
        bits = "".join(rng.choice("01") for _ in range(width))
        degenerate = bits == ("0" + bits[:-1])
        r = reset(width)
        stream = bits[::-1]
        for i in range(width - 1):
            r = clock(r, int(stream[i]), 1)
        if not degenerate:
            assert r.state != bits


def test_idle_after_load_is_stable():
    bits = "110010"
    reg, _ = load_package(reset(6), ActivationPackage(bits))
    for _ in range(5):
        reg = clock(reg, 1, 0)
    assert reg.state == bits


def test_trace_csv_shape():
    reg, trace = load_package(reset(4), ActivationPackage("1011"))
    lines = trace.to_csv().strip().splitlines()
    assert lines[0] == "cycle,ap_in,load_en,state_hex"
    assert len(lines) == 6
    assert lines[-1].endswith(",0,b")


def test_load_then_induce_matches_direct_key(fig4_tree):
    from topoveil.obnocs import induce_topology, insert_switches
    from topoveil.topology import topology_equal

    design, ap = insert_switches(fig4_tree, {"R1"}, seed=4)
    reg, _ = load_package(reset(design.key_length), ap)
    via_loader = induce_topology(design, reg.state)
    direct = induce_topology(design, ap.bits)
    assert topology_equal(via_loader, direct)
    assert topology_equal(via_loader, fig4_tree)
