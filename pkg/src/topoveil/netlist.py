"""Flat structural gate-level IR: parsing, elaboration, synthesis-lite.

Netlists are JSON-serializable values: named single-bit nets, a small cell
library (AND, OR, NOT, XOR, MUX2, BUF, CONST0/1, DFF), and ordered I/O
ports with bit widths. A port of width 1 owns the net of its own name; a
wider port owns ``name[i]`` per bit. Every net has at most one driver and
combinational cycles are rejected; DFFs break combinational paths.

Evaluation is bit-parallel: each net carries a Python big-int whose bit
``s`` is the net's value in evaluation slot ``s``, so a full truth table
over k free inputs is one topological sweep with 2^k-bit integers.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .errors import (
    CombLoopError,
    MultiDriverError,
    SchemaError,
    SequentialNetlist,
    UnknownSignal,
)
from .topology import Endpoint

CELL_PINS: dict[str, tuple[tuple[str, ...], str]] = {
    "AND": (("a", "b"), "y"),
    "OR": (("a", "b"), "y"),
    "XOR": (("a", "b"), "y"),
    "NOT": (("a",), "y"),
    "BUF": (("a",), "y"),
    "MUX2": (("a", "b", "sel"), "y"),
    "CONST0": ((), "y"),
    "CONST1": ((), "y"),
    "DFF": (("d", "clk"), "q"),
}

COMMUTATIVE = {"AND", "OR", "XOR"}


@dataclass(frozen=True)
class Port:
    name: str
    width: int

    def nets(self) -> list[str]:
        if self.width == 1:
            return [self.name]
        return [f"{self.name}[{i}]" for i in range(self.width)]


@dataclass(frozen=True)
class Cell:
    id: str
    kind: str
    pins: tuple[tuple[str, str], ...]  # (pin name, net) pairs

    def pin(self, name: str) -> str:
        for p, net in self.pins:
            if p == name:
                return net
        raise SchemaError(f"cell {self.id}: missing pin {name}")

    def inputs(self) -> list[str]:
        ins, _ = CELL_PINS[self.kind]
        return [self.pin(p) for p in ins]

    def output(self) -> str:
        _, out = CELL_PINS[self.kind]
        return self.pin(out)

    @staticmethod
    def make(cid: str, kind: str, **pins: str) -> "Cell":
        return Cell(cid, kind, tuple(sorted(pins.items())))


@dataclass(frozen=True)
class Netlist:
    name: str
    inputs: tuple[Port, ...]
    outputs: tuple[Port, ...]
    nets: tuple[str, ...]
    cells: tuple[Cell, ...]

    @staticmethod
    def build(name: str, inputs: Sequence[Port], outputs: Sequence[Port],
              nets: Iterable[str], cells: Iterable[Cell]) -> "Netlist":
        n = Netlist(
            name=name,
            inputs=tuple(inputs),
            outputs=tuple(outputs),
            nets=tuple(sorted(set(nets))),
            cells=tuple(sorted(cells, key=lambda c: c.id)),
        )
        validate_netlist(n)
        return n

    def input_nets(self) -> list[str]:
        return [net for p in self.inputs for net in p.nets()]

    def output_nets(self) -> list[str]:
        return [net for p in self.outputs for net in p.nets()]

    def port(self, name: str) -> Port:
        for p in (*self.inputs, *self.outputs):
            if p.name == name:
                return p
        raise UnknownSignal(name)

    def has_dff(self) -> bool:
        return any(c.kind == "DFF" for c in self.cells)


def validate_netlist(n: Netlist) -> None:
    """Schema, single-driver, and combinational-cycle checks."""
    net_set = set(n.nets)
    if len(net_set) != len(n.nets):
        raise SchemaError("duplicate net names")
    seen_cells: set[str] = set()
    port_names = [p.name for p in (*n.inputs, *n.outputs)]
    if len(port_names) != len(set(port_names)):
        raise SchemaError("duplicate port names")
    for p in (*n.inputs, *n.outputs):
        if p.width < 1:
            raise SchemaError(f"port {p.name}: width must be >= 1")
        for net in p.nets():
            if net not in net_set:
                raise SchemaError(f"port {p.name}: net {net} not declared")

    drivers: dict[str, str] = {}
    for p in n.inputs:
        for net in p.nets():
            drivers[net] = f"input:{p.name}"
    for c in n.cells:
        if c.kind not in CELL_PINS:
            raise SchemaError(f"cell {c.id}: unknown kind {c.kind}")
        if c.id in seen_cells:
            raise SchemaError(f"duplicate cell id {c.id}")
        seen_cells.add(c.id)
        want = set(CELL_PINS[c.kind][0]) | {CELL_PINS[c.kind][1]}
        got = {p for p, _ in c.pins}
        if want != got:
            raise SchemaError(f"cell {c.id}: pins {sorted(got)} != {sorted(want)}")
        for _, net in c.pins:
            if net not in net_set:
                raise SchemaError(f"cell {c.id}: net {net} not declared")
        out = c.output()
        if out in drivers:
            raise MultiDriverError(f"net {out}: {drivers[out]} and cell:{c.id}")
        drivers[out] = f"cell:{c.id}"

    topo_order(n)  # raises CombLoopError on cycles


def topo_order(n: Netlist) -> list[Cell]:
    """Combinational cells in evaluation order; DFFs excluded (q is a source)."""
    comb = [c for c in n.cells if c.kind != "DFF"]
    driver: dict[str, Cell] = {c.output(): c for c in comb}
    order: list[Cell] = []
    state: dict[str, int] = {}  # 0 visiting, 1 done

    for root in comb:
        if state.get(root.id) == 1:
            continue
        stack: list[tuple[Cell, int]] = [(root, 0)]
        while stack:
            cell, idx = stack.pop()
            if idx == 0:
                if state.get(cell.id) == 1:
                    continue
                state[cell.id] = 0
            deps = [driver[net] for net in cell.inputs() if net in driver]
            while idx < len(deps) and state.get(deps[idx].id) == 1:
                idx += 1
            if idx < len(deps):
                dep = deps[idx]
                if state.get(dep.id) == 0:
                    raise CombLoopError(f"cycle through {dep.id}")
                stack.append((cell, idx + 1))
                stack.append((dep, 0))
            else:
                state[cell.id] = 1
                order.append(cell)
    return order


# -- serialization ------------------------------------------------------------


def to_dict(n: Netlist) -> dict:
    return {
        "name": n.name,
        "inputs": [{"name": p.name, "width": p.width} for p in n.inputs],
        "outputs": [{"name": p.name, "width": p.width} for p in n.outputs],
        "nets": list(n.nets),
        "cells": [
            {"id": c.id, "kind": c.kind, "pins": dict(c.pins)} for c in n.cells
        ],
    }


def from_dict(data: Mapping) -> Netlist:
    try:
        return Netlist.build(
            name=str(data["name"]),
            inputs=[Port(d["name"], int(d["width"])) for d in data["inputs"]],
            outputs=[Port(d["name"], int(d["width"])) for d in data["outputs"]],
            nets=[str(x) for x in data["nets"]],
            cells=[
                Cell(str(c["id"]), str(c["kind"]),
                     tuple(sorted((str(k), str(v)) for k, v in c["pins"].items())))
                for c in data["cells"]
            ],
        )
    except KeyError as e:
        raise SchemaError(f"missing field {e}") from e


def serialize(n: Netlist) -> str:
    """Canonical form: key-sorted JSON, nets sorted, cells sorted by id."""
    return json.dumps(to_dict(n), sort_keys=True, indent=2) + "\n"


def parse(text: str) -> Netlist:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise SchemaError(str(e)) from e
    return from_dict(data)


# -- evaluation ---------------------------------------------------------------


def eval_masks(n: Netlist, input_masks: Mapping[str, int], slots: int) -> dict[str, int]:
    """Bit-parallel sweep: mask bit s = net value in slot s. Undriven nets read 0."""
    if n.has_dff():
        raise SequentialNetlist(n.name)
    full = (1 << slots) - 1
    values: dict[str, int] = {}
    for net in n.input_nets():
        values[net] = input_masks.get(net, 0) & full
    for cell in topo_order(n):
        k = cell.kind
        if k == "CONST0":
            v = 0
        elif k == "CONST1":
            v = full
        else:
            ins = [values.get(net, 0) for net in cell.inputs()]
            if k == "AND":
                v = ins[0] & ins[1]
            elif k == "OR":
                v = ins[0] | ins[1]
            elif k == "XOR":
                v = ins[0] ^ ins[1]
            elif k == "NOT":
                v = full ^ ins[0]
            elif k == "BUF":
                v = ins[0]
            else:  # MUX2: pins ordered a, b, sel
                a, b, sel = ins
                v = (a & (full ^ sel)) | (b & sel)
        values[cell.output()] = v
    return values


def evaluate(n: Netlist, port_values: Mapping[str, int]) -> dict[str, int]:
    """Single-vector evaluation; port values are integers over the port's bits."""
    masks: dict[str, int] = {}
    for p in n.inputs:
        if p.name not in port_values:
            raise UnknownSignal(f"missing input {p.name}")
        v = int(port_values[p.name])
        for i, net in enumerate(p.nets()):
            masks[net] = (v >> i) & 1
    values = eval_masks(n, masks, 1)
    out: dict[str, int] = {}
    for p in n.outputs:
        out[p.name] = sum((values.get(net, 0) & 1) << i for i, net in enumerate(p.nets()))
    return out


def port_value_from_bits(bits: str) -> int:
    """MSB-first bitstring -> port value (net name[i] carries bits[i])."""
    return int(bits[::-1], 2) if bits else 0


def bits_from_port_value(value: int, width: int) -> str:
    return format(value, f"0{width}b")[::-1] if width else ""


def input_patterns(k: int) -> list[int]:
    """Standard truth-table patterns: bit s of pattern i equals (s >> i) & 1."""
    total = 1 << k
    full = (1 << total) - 1
    return [(full // ((1 << (1 << i)) + 1)) << (1 << i) for i in range(k)]


def truth_tables(
    n: Netlist, fixed_ports: Mapping[str, int] | None = None
) -> tuple[list[str], dict[str, int], int]:
    """Exhaustive tables over all unbound input bits.

    Returns (free bit nets in port order, net -> mask, slot count).
    """
    fixed_ports = dict(fixed_ports or {})
    for name in fixed_ports:
        n.port(name)
    free: list[str] = []
    masks: dict[str, int] = {}
    for p in n.inputs:
        if p.name in fixed_ports:
            continue
        free.extend(p.nets())
    slots = 1 << len(free)
    full = (1 << slots) - 1
    for i, net in enumerate(free):
        masks[net] = (full // ((1 << (1 << i)) + 1)) << (1 << i)
    for name, v in fixed_ports.items():
        for i, net in enumerate(n.port(name).nets()):
            masks[net] = full if (v >> i) & 1 else 0
    return free, eval_masks(n, masks, slots), slots


def output_signature(
    n: Netlist, fixed_ports: Mapping[str, int] | None = None
) -> tuple[int, ...]:
    """Truth-table masks of every output bit net, in port order."""
    _, values, _ = truth_tables(n, fixed_ports)
    return tuple(values.get(net, 0) for net in n.output_nets())


def comb_equivalent(
    a: Netlist,
    b: Netlist,
    *,
    bind_a: Mapping[str, int] | None = None,
    bind_b: Mapping[str, int] | None = None,
    max_exhaustive_bits: int = 20,
    samples: int = 10_000,
    seed: int = 7,
) -> bool:
    """I/O equivalence; exhaustive when the free input space is small, else sampled."""
    bind_a = dict(bind_a or {})
    bind_b = dict(bind_b or {})
    free_a = [net for p in a.inputs if p.name not in bind_a for net in p.nets()]
    free_b = [net for p in b.inputs if p.name not in bind_b for net in p.nets()]
    if free_a != free_b or a.output_nets() != b.output_nets():
        return False
    if len(free_a) <= max_exhaustive_bits:
        return output_signature(a, bind_a) == output_signature(b, bind_b)

    from .rng import SplitMix64

    rng = SplitMix64(seed)
    rounds = (samples + 63) // 64
    for _ in range(rounds):
        masks = {net: rng.next_u64() for net in free_a}
        for bind, n in ((bind_a, a), (bind_b, b)):
            for name, v in bind.items():
                for i, net in enumerate(n.port(name).nets()):
                    masks[net] = ((1 << 64) - 1) if (v >> i) & 1 else 0
        va = eval_masks(a, masks, 64)
        vb = eval_masks(b, masks, 64)
        for net in a.output_nets():
            if va.get(net, 0) != vb.get(net, 0):
                return False
    return True


# -- elaboration --------------------------------------------------------------


class NetlistBuilder:
    """Incremental construction helper; tracks nets, cells, and a shared zero."""

    def __init__(self, name: str):
        self.name = name
        self.inputs: list[Port] = []
        self.outputs: list[Port] = []
        self.nets: set[str] = set()
        self.cells: list[Cell] = []
        self._auto = 0
        self._zero: str | None = None
        self._one: str | None = None

    def add_net(self, net: str) -> str:
        self.nets.add(net)
        return net

    def fresh_net(self, hint: str) -> str:
        while True:
            net = f"{hint}_{self._auto}"
            self._auto += 1
            if net not in self.nets:
                return self.add_net(net)

    def add_input(self, name: str, width: int = 1) -> list[str]:
        port = Port(name, width)
        self.inputs.append(port)
        return [self.add_net(x) for x in port.nets()]

    def add_output(self, name: str, width: int = 1) -> list[str]:
        port = Port(name, width)
        self.outputs.append(port)
        return [self.add_net(x) for x in port.nets()]

    def cell(self, kind: str, out: str | None = None, **pins: str) -> str:
        cid = f"g{len(self.cells)}"
        y_pin = CELL_PINS[kind][1]
        out = out if out is not None else self.fresh_net(kind.lower())
        self.add_net(out)
        self.cells.append(Cell.make(cid, kind, **pins, **{y_pin: out}))
        return out

    def zero(self) -> str:
        if self._zero is None:
            self._zero = self.cell("CONST0", out=self.fresh_net("zero"))
        return self._zero

    def one(self) -> str:
        if self._one is None:
            self._one = self.cell("CONST1", out=self.fresh_net("one"))
        return self._one

    def mux_tree(self, inputs: list[str], sel_bits: list[str],
                 out: str | None = None) -> str:
        """Balanced MUX2 tree; select value v (sel_bits MSB-first) picks
        inputs[v], and out-of-range codes yield constant zero."""

        def build(ins: list[str], bits: list[str], dest: str | None) -> str:
            if not bits:
                if dest is not None:
                    return self.cell("BUF", a=ins[0], out=dest)
                return ins[0]
            half = 1 << (len(bits) - 1)
            left = build(ins[:half], bits[1:], None) if ins[:half] else self.zero()
            right = build(ins[half:], bits[1:], None) if ins[half:] else self.zero()
            return self.cell("MUX2", a=left, b=right, sel=bits[0], out=dest)

        if not inputs:
            raise SchemaError("mux tree needs at least one input")
        return build(list(inputs), list(sel_bits), out)

    def finish(self) -> Netlist:
        return Netlist.build(self.name, self.inputs, self.outputs,
                             self.nets, self.cells)


def elaborate(design, bus_width: int = 1) -> Netlist:
    """Lower a design's switch groups to a gate-level fabric.

    Inputs: one bus per redacted (router, out-port) named ``<router>_o<p>``
    and a ``key`` port whose bits ``key[i]`` follow the canonical lane
    packing. Outputs: one bus per candidate endpoint named ``<node>_i<p>``.
    Under a key the fabric passes exactly the buses that induce_topology
    connects; unconnected endpoints read constant zero.
    """
    from .obnocs import SwitchSide  # local import avoids a module cycle

    if bus_width < 1:
        raise SchemaError(f"bus_width must be >= 1, got {bus_width}")

    b = NetlistBuilder(f"{design.base.label or 'design'}_fabric")

    port_nets: dict[tuple[str, int], list[str]] = {}
    for router in design.routers():
        for port, _ep in design.redacted[router]:
            port_nets[(router, port)] = b.add_input(f"{router}_o{port}", bus_width)
    key_nets = b.add_input("key", design.key_length) if design.key_length else []

    out_nets: dict[Endpoint, list[str]] = {}
    for router in design.routers():
        for ep in design.universe(router):
            name = f"{ep[0]}_i{ep[1]}"
            if any(p.name == name for p in b.outputs):
                raise SchemaError(
                    f"endpoint {name} claimed by two switch groups; "
                    "overlapping extensions are not elaboratable")
            out_nets[ep] = b.add_output(name, bus_width)

    # canonical lane offsets follow the group order
    offset = 0
    lane_bits: dict[tuple[str, str, int], list[str]] = {}
    for g in design.groups:
        for j, lane in enumerate(g.lanes):
            lane_bits[(g.router, g.side.value, j)] = key_nets[offset:offset + lane.width]
            offset += lane.width

    for router in design.routers():
        universe = design.universe(router)
        port_map = design.port_of(router)

        def source_nets(label) -> list[str] | None:
            port = port_map.get(label)
            return None if port is None else port_nets[(router, port)]

        demux = next(g for g in design.groups
                     if g.router == router and g.side is SwitchSide.DEMUX)
        rails: list[list[str]] = []
        for j, lane in enumerate(demux.lanes):
            bits = lane_bits[(router, "demux", j)]
            rail = []
            for bit in range(bus_width):
                ins = [
                    (src[bit] if (src := source_nets(c)) is not None else b.zero())
                    for c in lane.candidates
                ]
                dest = None
                if design.stages == 1:
                    dest = out_nets[universe[j]][bit]
                rail.append(b.mux_tree(ins, bits, out=dest))
            rails.append(rail)

        if design.stages == 2:
            mux = next(g for g in design.groups
                       if g.router == router and g.side is SwitchSide.MUX)
            index = {ep: i for i, ep in enumerate(universe)}
            for j, lane in enumerate(mux.lanes):
                bits = lane_bits[(router, "mux", j)]
                for bit in range(bus_width):
                    ins = [rails[index[c]][bit] for c in lane.candidates]
                    b.mux_tree(ins, bits, out=out_nets[universe[j]][bit])

    return b.finish()


def count_cells(n: Netlist, kind: str) -> int:
    return sum(1 for c in n.cells if c.kind == kind)


def drop_outputs(n: Netlist, names: Iterable[str]) -> Netlist:
    """Remove output ports (their logic cones become optimizer fodder)."""
    names = set(names)
    unknown = names - {p.name for p in n.outputs}
    if unknown:
        raise UnknownSignal(", ".join(sorted(unknown)))
    return Netlist.build(
        n.name,
        n.inputs,
        [p for p in n.outputs if p.name not in names],
        n.nets,
        n.cells,
    )


# -- synthesis-lite optimizer --------------------------------------------------


def synthesize_lite(n: Netlist) -> Netlist:
    """Constant propagation, BUF collapsing, structural hashing, dead-net
    elimination, iterated to a fixpoint. Preserves the I/O function and the
    port signature; a second application is a no-op.
    """
    validate_netlist(n)
    cells: dict[str, Cell] = {c.id: c for c in n.cells}
    output_nets = set(n.output_nets())
    input_nets = set(n.input_nets())
    alias: dict[str, str] = {}

    def resolve(net: str) -> str:
        seen = []
        while net in alias:
            seen.append(net)
            net = alias[net]
        for s in seen:  # path compression
            alias[s] = net
        return net

    def remap(cell: Cell) -> Cell:
        pins = tuple((p, resolve(net)) for p, net in cell.pins)
        return Cell(cell.id, cell.kind, pins) if pins != cell.pins else cell

    def set_alias(cell: Cell, src: str) -> bool:
        """Replace cell's output with src; outputs keep a BUF stub."""
        y = cell.output()
        src = resolve(src)
        if y == src:
            return False
        if y in output_nets:
            if cell.kind == "BUF" and cell.pin("a") == src:
                return False
            cells[cell.id] = Cell.make(cell.id, "BUF", a=src, y=y)
            return True
        del cells[cell.id]
        alias[y] = src
        return True

    def set_const(cell: Cell, value: int, const_nets: dict[int, str]) -> bool:
        y = cell.output()
        kind = "CONST1" if value else "CONST0"
        if value in const_nets and resolve(const_nets[value]) != y:
            return set_alias(cell, const_nets[value])
        if cell.kind == kind:
            return False
        cells[cell.id] = Cell.make(cell.id, kind, y=y)
        return True

    changed = True
    while changed:
        changed = False

        # normalize pins against the alias map
        for cid in list(cells):
            new = remap(cells[cid])
            if new is not cells[cid]:
                cells[cid] = new
                changed = True

        consts: dict[str, int] = {}
        const_nets: dict[int, str] = {}
        for c in cells.values():
            if c.kind == "CONST0":
                consts[c.output()] = 0
                const_nets.setdefault(0, c.output())
            elif c.kind == "CONST1":
                consts[c.output()] = 1
                const_nets.setdefault(1, c.output())

        for cid in list(cells):
            cell = cells.get(cid)
            if cell is None or cell.kind in ("CONST0", "CONST1", "DFF"):
                continue
            k = cell.kind
            ins = cell.inputs()
            cv = [consts.get(net) for net in ins]

            if k == "BUF":
                changed |= set_alias(cell, ins[0])
            elif k == "NOT":
                if cv[0] is not None:
                    changed |= set_const(cell, 1 - cv[0], const_nets)
            elif k == "AND":
                if 0 in cv:
                    changed |= set_const(cell, 0, const_nets)
                elif cv[0] == 1:
                    changed |= set_alias(cell, ins[1])
                elif cv[1] == 1:
                    changed |= set_alias(cell, ins[0])
                elif ins[0] == ins[1]:
                    changed |= set_alias(cell, ins[0])
            elif k == "OR":
                if 1 in cv:
                    changed |= set_const(cell, 1, const_nets)
                elif cv[0] == 0:
                    changed |= set_alias(cell, ins[1])
                elif cv[1] == 0:
                    changed |= set_alias(cell, ins[0])
                elif ins[0] == ins[1]:
                    changed |= set_alias(cell, ins[0])
            elif k == "XOR":
                if ins[0] == ins[1]:
                    changed |= set_const(cell, 0, const_nets)
                elif cv[0] is not None and cv[1] is not None:
                    changed |= set_const(cell, cv[0] ^ cv[1], const_nets)
                elif cv[0] == 0:
                    changed |= set_alias(cell, ins[1])
                elif cv[1] == 0:
                    changed |= set_alias(cell, ins[0])
                elif cv[0] == 1:
                    cells[cid] = Cell.make(cid, "NOT", a=ins[1], y=cell.output())
                    changed = True
                elif cv[1] == 1:
                    cells[cid] = Cell.make(cid, "NOT", a=ins[0], y=cell.output())
                    changed = True
            elif k == "MUX2":
                a, bnet, sel = ins
                sv = consts.get(sel)
                if sv == 0:
                    changed |= set_alias(cell, a)
                elif sv == 1:
                    changed |= set_alias(cell, bnet)
                elif a == bnet:
                    changed |= set_alias(cell, a)
                elif consts.get(a) == 0 and consts.get(bnet) == 1:
                    changed |= set_alias(cell, sel)
                elif consts.get(a) == 1 and consts.get(bnet) == 0:
                    cells[cid] = Cell.make(cid, "NOT", a=sel, y=cell.output())
                    changed = True

        # structural hashing: identical comb cells share one output
        seen: dict[tuple, str] = {}
        for cid in sorted(cells):
            cell = cells.get(cid)
            if cell is None or cell.kind == "DFF":
                continue
            ins = cell.inputs()
            key_ins = tuple(sorted(ins)) if cell.kind in COMMUTATIVE else tuple(ins)
            key = (cell.kind, key_ins)
            if key in seen:
                keeper = seen[key]
                if resolve(keeper) != resolve(cell.output()):
                    changed |= set_alias(cell, keeper)
            else:
                seen[key] = cell.output()

        # dead elimination: keep only cones of outputs and DFF inputs
        sinks = set(resolve(net) for net in output_nets)
        for c in cells.values():
            if c.kind == "DFF":
                sinks.update(resolve(net) for net in c.inputs())
        driver = {resolve(c.output()): c for c in cells.values()}
        live: set[str] = set()
        stack = [s for s in sinks]
        while stack:
            net = stack.pop()
            if net in live:
                continue
            live.add(net)
            cell = driver.get(net)
            if cell is not None:
                stack.extend(resolve(x) for x in cell.inputs())
        for cid in list(cells):
            cell = cells[cid]
            if cell.kind == "DFF":
                continue
            if resolve(cell.output()) not in live:
                del cells[cid]
                changed = True

    referenced: set[str] = set(input_nets) | set(output_nets)
    for c in cells.values():
        referenced.update(net for _, net in c.pins)
    return Netlist.build(n.name, n.inputs, n.outputs, referenced, cells.values())
