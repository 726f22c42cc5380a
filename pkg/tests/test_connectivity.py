import random

import pytest

from topoveil.connectivity import (
    ConnectivityMatrix,
    extract_connectivity,
    merge_connectivity,
)
from topoveil.errors import RouterMismatch, UnknownSignal
from topoveil.netlist import Cell, Netlist, Port


def wire_netlist():
    return Netlist.build(
        "wire", [Port("a", 1)], [Port("y", 1)], ["a", "y"],
        [Cell.make("b", "BUF", a="a", y="y")])


def router000_pre():
    """All six interface signals reach some output before synthesis."""
    ins = ["sink_data", "sink_endofpacket", "sink_startofpacket",
           "sink_valid", "src_ready", "src_valid"]
    cells = [
        Cell.make("g0", "AND", a="sink_data", b="sink_valid", y="w0"),
        Cell.make("g1", "OR", a="sink_endofpacket", b="sink_startofpacket", y="w1"),
        Cell.make("g2", "XOR", a="w0", b="w1", y="out_data"),
        Cell.make("g3", "AND", a="src_ready", b="src_valid", y="out_ctrl"),
    ]
    nets = ins + ["w0", "w1", "out_data", "out_ctrl"]
    return Netlist.build(
        "router_000_pre", [Port(x, 1) for x in ins],
        [Port("out_data", 1), Port("out_ctrl", 1)], nets, cells)


def router000_post():
    """Synthesis kept only sink_data and src_valid."""
    ins = ["sink_data", "src_valid"]
    cells = [
        Cell.make("g0", "AND", a="sink_data", b="src_valid", y="out_data"),
        Cell.make("g1", "BUF", a="src_valid", y="out_ctrl"),
    ]
    return Netlist.build(
        "router_000_post", [Port(x, 1) for x in ins],
        [Port("out_data", 1), Port("out_ctrl", 1)],
        ins + ["out_data", "out_ctrl"], cells)


def test_straight_wire():
    m = extract_connectivity(wire_netlist(), "r", ["a"], ["y"])
    assert m.entries == ((True,),)


def test_unknown_signal():
    with pytest.raises(UnknownSignal):
        extract_connectivity(wire_netlist(), "r", ["nope"], ["y"])


def test_router000_survivors():
    pre_sigs = ["sink_data", "sink_endofpacket", "sink_startofpacket",
                "sink_valid", "src_ready", "src_valid"]
    pre = extract_connectivity(router000_pre(), "router_000", pre_sigs,
                               ["out_data", "out_ctrl"])
    assert pre.preserved_rows() == pre_sigs
    post = extract_connectivity(router000_post(), "router_000",
                                ["sink_data", "src_valid"],
                                ["out_data", "out_ctrl"])
    merged = merge_connectivity(pre, post)
    assert merged.preserved_rows() == ["sink_data", "src_valid"]


def test_dff_blocks_paths():
    n = Netlist.build(
        "seq", [Port("a", 1), Port("clk", 1)], [Port("y", 1)],
        ["a", "clk", "q", "y"],
        [Cell.make("f", "DFF", d="a", clk="clk", q="q"),
         Cell.make("o", "BUF", a="q", y="y")])
    m = extract_connectivity(n, "r", ["a"], ["y"])
    assert m.entries == ((False,),)


def test_extract_matches_networkx_oracle():
    nx = pytest.importorskip("networkx")
    rng = random.Random(5)
    for case in range(20):
        k = rng.randint(2, 5)
        inputs = [Port(f"i{j}", 1) for j in range(k)]
        nets = [p.name for p in inputs]
        cells = []
        for g in range(rng.randint(2, 15)):
            w = f"w{g}"
            a, b = rng.choice(nets), rng.choice(nets)
            cells.append(Cell.make(f"g{g}", rng.choice(("AND", "OR", "XOR")),
                                   a=a, b=b, y=w))
            nets.append(w)
        outs = rng.sample(nets[k:] or nets, min(3, max(1, len(nets) - k)))
        out_cells = [Cell.make(f"ob{i}", "BUF", a=w, y=f"o{i}")
                     for i, w in enumerate(outs)]
        n = Netlist.build(
            f"dag{case}", inputs, [Port(f"o{i}", 1) for i in range(len(outs))],
            nets + [f"o{i}" for i in range(len(outs))], cells + out_cells)

        g = nx.DiGraph()
        for c in n.cells:
            for src in c.inputs():
                g.add_edge(src, c.output())
        m = extract_connectivity(n, "r", [p.name for p in inputs],
                                 [f"o{i}" for i in range(len(outs))])
        for i, row in enumerate(m.rows):
            for j, col in enumerate(m.cols):
                want = g.has_node(row) and g.has_node(col) and (
                    row == col or nx.has_path(g, row, col))
                assert m.entries[i][j] == want


def test_merge_absorbing_and_cellwise():
    rng = random.Random(7)
    rows = ("r0", "r1", "r2")
    cols = ("c0", "c1")
    all_true = ConnectivityMatrix("r", rows, cols,
                                  tuple(tuple(True for _ in cols) for _ in rows))
    all_false = ConnectivityMatrix("r", rows, cols,
                                   tuple(tuple(False for _ in cols) for _ in rows))
    merged = merge_connectivity(all_true, all_false)
    assert all(not v for line in merged.entries for v in line)

    for _ in range(200):
        a = ConnectivityMatrix("r", rows, cols, tuple(
            tuple(rng.random() < 0.5 for _ in cols) for _ in rows))
        b = ConnectivityMatrix("r", rows, cols, tuple(
            tuple(rng.random() < 0.5 for _ in cols) for _ in rows))
        m = merge_connectivity(a, b)
        for i, r in enumerate(rows):
            for j, c in enumerate(cols):
                assert m.get(r, c) == (a.entries[i][j] and b.entries[i][j])
        # commutative, idempotent, bounded above by both operands
        m2 = merge_connectivity(b, a)
        assert m.entries == m2.entries
        assert merge_connectivity(m, m).entries == m.entries
        assert all(
            not m.get(r, c) or (a.get(r, c) and b.get(r, c))
            for r in rows for c in cols)


def test_merge_name_universes():
    a = ConnectivityMatrix("r", ("sink_data", "sink_valid"), ("o",),
                           ((True,), (True,)))
    b = ConnectivityMatrix("r", ("sink_data",), ("o",), ((True,),))
    m = merge_connectivity(a, b)
    assert m.preserved_rows() == ["sink_data"]
    assert m.get("sink_valid", "o") is False


def test_merge_router_mismatch():
    a = ConnectivityMatrix("r1", ("x",), ("y",), ((True,),))
    b = ConnectivityMatrix("r2", ("x",), ("y",), ((True,),))
    with pytest.raises(RouterMismatch):
        merge_connectivity(a, b)


def test_csv_roundtrip():
    m = ConnectivityMatrix("r", ("sink_data", "src_valid"), ("o0", "o1"),
                           ((True, False), (False, True)))
    text = m.to_csv()
    again = ConnectivityMatrix.from_csv("r", text)
    assert again.rows == m.rows and again.cols == m.cols
    assert again.entries == m.entries
