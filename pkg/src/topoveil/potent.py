"""Keyed permutation switches over synthesis-preserved router signals.

A switch covers the n signals that survive in the merged connectivity
matrix. Keys below n! index permutations in Lehmer (factorial number
system / lexicographic) order; the 2^b - n! surplus keys are ZERO keys
that clamp every switch output to constant zero. At integration time the
designer picks the correct key; the raw permutation table is composed
with a fixed offset so that exactly that key realizes the identity, which
keeps arbitrary correct keys possible without key 0 being special.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Optional, Sequence

from .connectivity import ConnectivityMatrix
from .errors import (
    KeyOutOfRange,
    KeyWidthTooSmall,
    SignalWidthMismatch,
    TooFewSignals,
    UnknownSignal,
)
from .netlist import Cell, Netlist, NetlistBuilder
from .topology import Link, Node, NodeKind, Topology


def permutation_from_index(index: int, n: int) -> tuple[int, ...]:
    """index-th permutation of range(n) in lexicographic (Lehmer) order."""
    if not 0 <= index < math.factorial(n):
        raise KeyOutOfRange(f"{index} not in [0, {n}!)")
    pool = list(range(n))
    out = []
    for i in range(n, 0, -1):
        f = math.factorial(i - 1)
        q, index = divmod(index, f)
        out.append(pool.pop(q))
    return tuple(out)


def index_from_permutation(perm: Sequence[int]) -> int:
    pool = list(range(len(perm)))
    index = 0
    for i, p in enumerate(perm):
        q = pool.index(p)
        index += q * math.factorial(len(perm) - 1 - i)
        pool.pop(q)
    return index


def compose(outer: Sequence[int], inner: Sequence[int]) -> tuple[int, ...]:
    """(outer . inner)(i) = outer[inner[i]]."""
    return tuple(outer[x] for x in inner)


def invert(perm: Sequence[int]) -> tuple[int, ...]:
    inv = [0] * len(perm)
    for i, p in enumerate(perm):
        inv[p] = i
    return tuple(inv)


@dataclass(frozen=True)
class ObfSwitch:
    """Keyed permutation over n preserved signals; surplus keys are ZERO."""

    signals: tuple[str, ...]
    key_width: int

    @property
    def n(self) -> int:
        return len(self.signals)

    @property
    def valid_keys(self) -> int:
        return math.factorial(self.n)

    @property
    def zero_keys(self) -> int:
        return (1 << self.key_width) - self.valid_keys

    def to_dict(self) -> dict:
        return {
            "signals": list(self.signals),
            "key_width": self.key_width,
            "order": "lehmer",
        }


def generate_switch(
    m_final: ConnectivityMatrix, key_width: int | None = None
) -> ObfSwitch:
    """Build the switch over the matrix's preserved rows.

    ``key_width`` defaults to ceil(log2 n!); anything smaller cannot give
    every permutation a unique key.
    """
    signals = tuple(m_final.preserved_rows())
    n = len(signals)
    if n < 2:
        raise TooFewSignals(f"{n} preserved signal(s)")
    need = math.factorial(n)
    if key_width is None:
        key_width = (need - 1).bit_length()
    if (1 << key_width) < need:
        raise KeyWidthTooSmall(f"2^{key_width} < {n}!")
    return ObfSwitch(signals=signals, key_width=key_width)


def apply_key(s: ObfSwitch, key: int) -> Optional[tuple[int, ...]]:
    """Raw mapping for a key: a permutation for keys < n!, None for ZERO keys.

    The permutation is read as "output slot i carries input perm[i]".
    """
    if not 0 <= key < (1 << s.key_width):
        raise KeyOutOfRange(f"{key} not in [0, 2^{s.key_width})")
    if key >= s.valid_keys:
        return None
    return permutation_from_index(key, s.n)


def effective_permutation(
    s: ObfSwitch, key: int, correct_key: int
) -> Optional[tuple[int, ...]]:
    """Mapping after re-labeling so that ``correct_key`` is the identity.

    Every raw permutation is composed with the inverse of the correct key's
    raw permutation; the map stays a bijection from [0, n!) onto all n!
    permutations, and ZERO keys stay ZERO.
    """
    raw = apply_key(s, key)
    if raw is None:
        return None
    anchor = invert(permutation_from_index(correct_key, s.n))
    return compose(raw, anchor)


@dataclass(frozen=True)
class ObfuscatedRouter:
    netlist: Netlist
    switch: ObfSwitch
    correct_key: int
    key_port: str


@dataclass(frozen=True)
class KeyedSystem:
    routers: tuple[ObfuscatedRouter, ...]


def keyspace(sys: KeyedSystem) -> int:
    """Total key space 2^(sum of per-router key widths); 1 for no routers."""
    return 1 << sum(r.switch.key_width for r in sys.routers)


def integrate(
    router_netlist: Netlist,
    s: ObfSwitch,
    correct_key: int,
    *,
    key_port: str = "key",
) -> tuple[Netlist, ConnectivityMatrix]:
    """Insert the switch in front of the router's preserved input signals.

    Consumers of each covered signal are rewired to read the switch output
    (``<net>__sw``) while the primary input keeps feeding the switch. The
    switch is a MUX2 network keyed by ``s.key_width`` new primary inputs
    (net ``key[t]`` carries bit t of the key's MSB-first bitstring); select
    lines are decoded from per-key comparators and a "key is valid"
    disjunction AND-gates every output, so surplus keys null the switch.

    Returns (R_obf, updated connectivity matrix); the matrix is extracted
    from R_obf itself, so an entry is valid iff a path exists under some
    key.
    """
    from .connectivity import extract_connectivity

    if not 0 <= correct_key < s.valid_keys:
        raise KeyOutOfRange(f"correct key {correct_key} not in [0, {s.n}!)")
    port_map = {p.name: p for p in router_netlist.inputs}
    for sig in s.signals:
        if sig not in port_map:
            raise UnknownSignal(sig)
    widths = {port_map[sig].width for sig in s.signals}
    if len(widths) != 1:
        raise SignalWidthMismatch(f"signal widths differ: {sorted(widths)}")
    if any(p.name == key_port for p in (*router_netlist.inputs, *router_netlist.outputs)):
        raise UnknownSignal(f"port name {key_port!r} already taken")
    width = widths.pop()

    b = NetlistBuilder(f"{router_netlist.name}_obf")
    rename = {}
    for sig in s.signals:
        for net in port_map[sig].nets():
            rename[net] = f"{net}__sw"

    for p in router_netlist.inputs:
        b.inputs.append(p)
        for net in p.nets():
            b.add_net(net)
    key_bits = b.add_input(key_port, s.key_width)
    for p in router_netlist.outputs:
        b.outputs.append(p)
        for net in p.nets():
            b.add_net(net)
    for net in router_netlist.nets:
        b.add_net(net)
    for c in router_netlist.cells:
        pins = tuple((pin, rename.get(net, net)) for pin, net in c.pins)
        for _, net in pins:
            b.add_net(net)
        b.cells.append(Cell(f"r_{c.id}", c.kind, pins))

    # decode: one comparator per valid key, then per-slot select lines
    eq_nets = []
    for k in range(s.valid_keys):
        bits_eq = []
        for t in range(s.key_width):
            bit = (k >> (s.key_width - 1 - t)) & 1
            kb = key_bits[t]
            bits_eq.append(kb if bit else b.cell("NOT", a=kb))
        acc = bits_eq[0]
        for x in bits_eq[1:]:
            acc = b.cell("AND", a=acc, b=x)
        eq_nets.append(acc)
    valid = eq_nets[0]
    for x in eq_nets[1:]:
        valid = b.cell("OR", a=valid, b=x)

    perms = [effective_permutation(s, k, correct_key) for k in range(s.valid_keys)]
    sel_width = max(1, (s.n - 1).bit_length())
    raw_inputs = [port_map[sig].nets() for sig in s.signals]
    for i, sig in enumerate(s.signals):
        # select lines for output slot i: binary code of the chosen source
        sel_bits = []
        for t in range(sel_width):
            terms = [eq_nets[k] for k in range(s.valid_keys)
                     if (perms[k][i] >> (sel_width - 1 - t)) & 1]
            if not terms:
                sel_bits.append(b.zero())
                continue
            acc = terms[0]
            for x in terms[1:]:
                acc = b.cell("OR", a=acc, b=x)
            sel_bits.append(acc)
        for bit in range(width):
            ins = [raw_inputs[j][bit] for j in range(s.n)]
            picked = b.mux_tree(ins, sel_bits)
            b.cell("AND", a=picked, b=valid,
                   out=rename[port_map[sig].nets()[bit]])

    obf = b.finish()
    updated = extract_connectivity(
        obf,
        router_netlist.name,
        [p.name for p in router_netlist.inputs],
        [p.name for p in router_netlist.outputs],
    )
    return obf, updated


def update_connectivity(
    m: ConnectivityMatrix, s: ObfSwitch
) -> ConnectivityMatrix:
    """Matrix after integration: a preserved input reaches everything any
    preserved slot reached before (reachable under some key); other rows
    are untouched."""
    preserved = set(s.signals)
    union = [False] * len(m.cols)
    for r, line in zip(m.rows, m.entries):
        if r in preserved:
            union = [u or v for u, v in zip(union, line)]
    entries = tuple(
        tuple(union) if r in preserved else line
        for r, line in zip(m.rows, m.entries)
    )
    return ConnectivityMatrix(m.router, m.rows, m.cols, entries)


def induced_mapping_topology(s: ObfSwitch, key: int, correct_key: int) -> Topology:
    """Key-to-topology map Phi at switch granularity.

    Sources and sinks are modeled as one node per signal; a valid key k
    yields links src[perm_k(i)] -> sink[i], a ZERO key yields no links.
    """
    perm = effective_permutation(s, key, correct_key)
    nodes = [Node(f"src_{sig}", NodeKind.IP, in_ports=0, out_ports=1)
             for sig in s.signals]
    nodes += [Node(f"sink_{sig}", NodeKind.IP, in_ports=1, out_ports=0)
              for sig in s.signals]
    links = []
    if perm is not None:
        for i, sig in enumerate(s.signals):
            links.append(Link(src=(f"src_{s.signals[perm[i]]}", 0),
                              dst=(f"sink_{sig}", 0)))
    return Topology.build(f"switch_key_{key}", nodes, links)


def switch_to_json(s: ObfSwitch, correct_key: int) -> str:
    data = s.to_dict()
    data["correct_key"] = correct_key
    return json.dumps(data, sort_keys=True, indent=2) + "\n"


def switch_from_json(text: str) -> tuple[ObfSwitch, int]:
    data = json.loads(text)
    s = ObfSwitch(signals=tuple(data["signals"]), key_width=int(data["key_width"]))
    return s, int(data["correct_key"])


def system_key_bits(sys: KeyedSystem, keys: Sequence[int]) -> str:
    """Per-router key segments concatenated in canonical router order."""
    if len(keys) != len(sys.routers):
        raise KeyOutOfRange(f"expected {len(sys.routers)} keys")
    parts = []
    for r, k in zip(sys.routers, keys):
        if not 0 <= k < (1 << r.switch.key_width):
            raise KeyOutOfRange(f"{k} exceeds router key width")
        parts.append(format(k, f"0{r.switch.key_width}b"))
    return "".join(parts)
