"""MUX/DEMUX switch insertion, key-induced topologies, and legality enumeration.

Redacting a router removes all of its outgoing links and replaces them with
keyed switch groups. Per router the candidate universe is the sorted list of
its original destination endpoints plus any extension endpoints; every lane
is a k:1 selector over that universe, lowered later to a (k-1)-cell MUX2
tree by the netlist elaborator.

Wiring semantics (frozen):

* stage 1 ("demux" side): lane ``j`` drives *rail* ``j`` (rails are labeled
  by the sorted universe). Its select field picks which original signal the
  rail carries; candidate labels stand for "the signal originally destined
  for that endpoint". Extension labels carry no signal (constant zero).
* stage 2 ("mux" side, only when ``stages == 2``): lane ``j`` feeds endpoint
  ``universe[j]`` and its select field picks which rail to listen to. With
  one stage, endpoint ``j`` is wired straight to rail ``j``.

A key therefore induces, per endpoint, at most one incoming connection; a
key is functional exactly when every group's composed selection is a
bijection onto the router's original endpoints. Select fields are packed
MSB-first per lane, demux lanes before mux lanes, routers in lexicographic
order. Candidate orders are a seeded Fisher-Yates shuffle (splitmix64);
seed 0 keeps the sorted ("unshuffled") order, which is handy for fixtures.
"""

from __future__ import annotations

import enum
import hashlib
import json
import math
from dataclasses import dataclass
from typing import Iterator, Mapping, NamedTuple, Optional, Sequence

from .errors import (
    BadStages,
    DegreeTooSmall,
    InvalidTopology,
    KeyLengthMismatch,
    KeyspaceTooLarge,
    RouterNotFound,
    UnknownEndpoint,
)
from .rng import SplitMix64
from .topology import (
    Endpoint,
    Link,
    NodeKind,
    Topology,
    TopologyClass,
    validate,
)

ENUM_CAP_BITS = 24


class SwitchSide(enum.Enum):
    DEMUX = "demux"  # stage 1: assigns signals onto rails
    MUX = "mux"      # stage 2: picks the rail feeding each endpoint


@dataclass(frozen=True)
class Lane:
    """One k:1 selector: candidates in wired (shuffled) order."""

    switch_id: str
    candidates: tuple[Endpoint, ...]
    width: int


@dataclass(frozen=True)
class SwitchGroup:
    router: str
    side: SwitchSide
    lanes: tuple[Lane, ...]
    wiring_seed: int


@dataclass(frozen=True)
class ActivationPackage:
    """The key bitstring restoring the intended wiring; bits[0] is the MSB
    of the first canonical lane."""

    bits: str

    def __len__(self):
        return len(self.bits)

    def hex(self) -> str:
        return key_bits_to_hex(self.bits)


@dataclass
class ObfuscatedDesign:
    """Redacted base topology plus the switch groups that rewire it.

    ``redacted`` records, per router, the original (out-port, endpoint)
    associations that the switches replace; without it the intended wiring
    could not be reconstructed from the shuffled candidate lists.
    """

    base: Topology
    groups: tuple[SwitchGroup, ...]
    stages: int
    key_length: int
    redacted: dict[str, tuple[tuple[int, Endpoint], ...]]

    def routers(self) -> list[str]:
        return sorted(self.redacted)

    def universe(self, router: str) -> list[Endpoint]:
        group = next(g for g in self.groups if g.router == router)
        return sorted(set(group.lanes[0].candidates))

    def port_of(self, router: str) -> dict[Endpoint, int]:
        return {ep: port for port, ep in self.redacted[router]}

    def intended_topology(self) -> Topology:
        links = set(self.base.links)
        for router, pairs in self.redacted.items():
            for port, ep in pairs:
                links.add(Link(src=(router, port), dst=ep))
        return Topology(label=self.base.label, nodes=self.base.nodes,
                        links=frozenset(links))


class KeyRecord(NamedTuple):
    key: str
    topo_class: TopologyClass
    digest: str


def _width_for(count: int) -> int:
    return max(1, (count - 1).bit_length())


def insert_switches(
    t: Topology,
    routers: set[str] | Sequence[str],
    stages: int = 1,
    seed: int = 0,
    extensions: Mapping[str, Sequence[Endpoint]] | None = None,
) -> tuple[ObfuscatedDesign, ActivationPackage]:
    """Redact the given routers and return the design plus its activation package.

    Parameters
    ----------
    t : Topology
        Intended topology; must be functional.
    routers : collection of node ids
        Routers whose outgoing links get redacted. Each needs out-degree >= 2.
    stages : 1 or 2
        One stage inserts the rail-assignment switches only; two stages add
        the rail-pick switches behind them (the MUX-DEMUX structure).
    seed : 64-bit unsigned
        Drives the candidate shuffles; 0 keeps sorted order.
    extensions : router id -> extra endpoints
        Additional candidate endpooints joining the universe before the
        shuffle (they must resolve to existing in-ports). They enlarge the
        key space; configurations routing signals there are non-functional.
    """
    if stages not in (1, 2):
        raise BadStages(f"stages must be 1 or 2, got {stages}")
    report = validate(t)
    if not report.ok:
        raise InvalidTopology("; ".join(str(f) for f in report.findings))
    nodes = t.node_map()
    extensions = dict(extensions or {})

    router_list = sorted(set(routers))
    for r in router_list:
        node = nodes.get(r)
        if node is None or node.kind is not NodeKind.ROUTER:
            raise RouterNotFound(r)
    for r, eps in extensions.items():
        if r not in router_list:
            raise RouterNotFound(f"extension target {r} is not being redacted")
        for nid, port in eps:
            n = nodes.get(nid)
            if n is None or not 0 <= port < n.in_ports:
                raise UnknownEndpoint(f"{nid}.in{port}")

    rng = SplitMix64(seed)
    groups: list[SwitchGroup] = []
    redacted: dict[str, tuple[tuple[int, Endpoint], ...]] = {}
    ap_bits: list[str] = []
    removed: set[Link] = set()

    for r in router_list:
        out_links = t.out_links(r)
        if len(out_links) < 2:
            raise DegreeTooSmall(f"{r} has out-degree {len(out_links)}")
        pairs = tuple(sorted((l.src[1], l.dst) for l in out_links))
        redacted[r] = pairs
        removed.update(out_links)

        universe = sorted(set(ep for _, ep in pairs) | set(extensions.get(r, ())))
        width = _width_for(len(universe))

        for side in (SwitchSide.DEMUX, SwitchSide.MUX)[: stages]:
            lanes = []
            for j, label in enumerate(universe):
                cands = list(universe)
                if seed != 0:
                    rng.shuffle(cands)
                sel = cands.index(label)  # rail j carries / endpoint j hears its own label
                ap_bits.append(format(sel, f"0{width}b"))
                lanes.append(Lane(
                    switch_id=f"{r}_{side.value}{j}",
                    candidates=tuple(cands),
                    width=width,
                ))
            groups.append(SwitchGroup(router=r, side=side, lanes=tuple(lanes),
                                      wiring_seed=seed))

    base = Topology(label=t.label, nodes=t.nodes,
                    links=frozenset(t.links - removed))
    design = ObfuscatedDesign(
        base=base,
        groups=tuple(groups),
        stages=stages,
        key_length=sum(len(g.lanes) * g.lanes[0].width for g in groups),
        redacted=redacted,
    )
    return design, ActivationPackage("".join(ap_bits))


# -- key decoding -------------------------------------------------------------


class _RouterTable:
    """Per-router decode tables mapping select fields to universe indices."""

    def __init__(self, design: ObfuscatedDesign, router: str):
        self.router = router
        self.universe = design.universe(router)
        index = {ep: i for i, ep in enumerate(self.universe)}
        port_map = design.port_of(router)
        self.port = [port_map.get(ep) for ep in self.universe]  # None = extension
        self.original = [p is not None for p in self.port]
        self.n_original = sum(self.original)
        demux = next(g for g in design.groups
                     if g.router == router and g.side is SwitchSide.DEMUX)
        self.demux = [[index[c] for c in lane.candidates] for lane in demux.lanes]
        self.mux = None
        if design.stages == 2:
            mux = next(g for g in design.groups
                       if g.router == router and g.side is SwitchSide.MUX)
            self.mux = [[index[c] for c in lane.candidates] for lane in mux.lanes]
        self.width = demux.lanes[0].width

    def compose(self, demux_sel: list[int], mux_sel: list[int] | None) -> list[int]:
        """Source universe index per endpoint; -1 where nothing connects."""
        m = len(self.universe)
        rail = [-1] * m
        for j in range(m):
            v = demux_sel[j]
            rail[j] = self.demux[j][v] if v < m else -1
        if mux_sel is None:
            return rail
        out = [-1] * m
        for j in range(m):
            v = mux_sel[j]
            if v < m:
                out[j] = rail[self.mux[j][v]]
        return out


class _Decoder:
    def __init__(self, design: ObfuscatedDesign):
        self.design = design
        self.tables = [_RouterTable(design, r) for r in design.routers()]
        self.nbits = design.key_length
        # (shift, mask) per lane in canonical key order
        self.fields: list[list[tuple[int, int]]] = []
        pos = 0
        for tab in self.tables:
            per_router = []
            lanes = len(tab.universe) * design.stages
            for _ in range(lanes):
                shift = self.nbits - pos - tab.width
                per_router.append((shift, (1 << tab.width) - 1))
                pos += tab.width
            self.fields.append(per_router)

    def select_fields(self, key_int: int) -> list[tuple[list[int], list[int] | None]]:
        out = []
        for tab, fields in zip(self.tables, self.fields):
            m = len(tab.universe)
            raw = [(key_int >> s) & mk for s, mk in fields]
            demux_sel = raw[:m]
            mux_sel = raw[m:] if self.design.stages == 2 else None
            out.append((demux_sel, mux_sel))
        return out

    def config(self, key_int: int) -> tuple:
        """Canonical per-lane wiring assignment (the dedup unit).

        Selections are resolved to universe indices so distinct out-of-range
        codes collapse onto the same disconnected sentinel.
        """
        parts = []
        for tab, (demux_sel, mux_sel) in zip(self.tables, self.select_fields(key_int)):
            m = len(tab.universe)
            parts.append(tuple(
                tab.demux[j][v] if (v := demux_sel[j]) < m else -1 for j in range(m)
            ))
            if mux_sel is not None:
                parts.append(tuple(
                    tab.mux[j][v] if (v := mux_sel[j]) < m else -1 for j in range(m)
                ))
        return tuple(parts)

    def composed_sources(self, key_int: int) -> list[list[int]]:
        return [
            tab.compose(demux_sel, mux_sel)
            for tab, (demux_sel, mux_sel) in zip(self.tables, self.select_fields(key_int))
        ]

    def classify_fast(self, sources: list[list[int]]) -> TopologyClass:
        intended = True
        for tab, src in zip(self.tables, sources):
            used = set()
            for j, s in enumerate(src):
                if tab.original[j]:
                    if s < 0 or not tab.original[s] or s in used:
                        return TopologyClass.NON_FUNCTIONAL
                    used.add(s)
                    if s != j:
                        intended = False
                else:
                    # extension endpoints must stay unconnected
                    if s >= 0 and tab.original[s]:
                        return TopologyClass.NON_FUNCTIONAL
        return TopologyClass.INTENDED if intended else TopologyClass.LEGAL_ALTERNATE

    def links(self, sources: list[list[int]]) -> set[Link]:
        links: set[Link] = set()
        for tab, src in zip(self.tables, sources):
            for j, s in enumerate(src):
                if s >= 0 and tab.original[s]:
                    links.add(Link(src=(tab.router, tab.port[s]),
                                   dst=tab.universe[j]))
        return links

    def digest(self, key_int: int) -> str:
        payload = repr(self.config(key_int)).encode()
        return hashlib.sha256(payload).hexdigest()


def induce_topology(design: ObfuscatedDesign, key: str) -> Topology:
    """Topology induced by an arbitrary key; total over the whole key space."""
    if len(key) != design.key_length:
        raise KeyLengthMismatch(
            f"expected {design.key_length} bits, got {len(key)}")
    dec = _Decoder(design)
    key_int = int(key, 2) if key else 0
    links = dec.links(dec.composed_sources(key_int))
    return Topology(label=design.base.label, nodes=design.base.nodes,
                    links=frozenset(design.base.links | links))


def enumerate_keys(
    design: ObfuscatedDesign,
    *,
    cap: int = ENUM_CAP_BITS,
    sample: int | None = None,
    seed: int = 1,
    subrange: tuple[int, int] | None = None,
) -> Iterator[KeyRecord]:
    """Visit all keys (or a seeded sample) with class and wiring digest.

    The digest hashes the per-lane wiring assignment, i.e. the sorted link
    list of the switch fabric under the key; equal digests mean equal
    induced wiring. Exhaustive enumeration beyond ``cap`` bits raises
    KeyspaceTooLarge unless ``sample`` is given. ``subrange`` restricts the
    exhaustive walk to ``[lo, hi)`` so disjoint ranges can run concurrently.
    """
    n = design.key_length
    dec = _Decoder(design)

    def record(key_int: int) -> KeyRecord:
        klass = dec.classify_fast(dec.composed_sources(key_int))
        return KeyRecord(format(key_int, f"0{n}b") if n else "",
                         klass, dec.digest(key_int))

    if sample is not None and n > cap:
        rng = SplitMix64(seed)
        seen: set[int] = set()
        space = 1 << n
        while len(seen) < min(sample, space):
            k = rng.next_u64() % space
            if k not in seen:
                seen.add(k)
                yield record(k)
        return
    if n > cap:
        raise KeyspaceTooLarge(f"{n} key bits exceed the {cap}-bit cap")

    lo, hi = subrange if subrange is not None else (0, 1 << n)
    for key_int in range(lo, hi):
        yield record(key_int)


def count_legal(
    design: ObfuscatedDesign, *, cap: int = ENUM_CAP_BITS
) -> tuple[int, int]:
    """(exhaustively enumerated legal count, analytic product of stage factorials)."""
    legal_digests = {
        rec.digest
        for rec in enumerate_keys(design, cap=cap)
        if rec.topo_class is not TopologyClass.NON_FUNCTIONAL
    }
    formula = 1
    for g in design.groups:
        formula *= math.factorial(len(g.lanes))
    return len(legal_digests), formula


def recover_key_for(
    design: ObfuscatedDesign, target: Topology, *, cap: int = ENUM_CAP_BITS
) -> Optional[str]:
    """Some key whose induced topology equals ``target`` exactly, else None."""
    if design.key_length > cap:
        raise KeyspaceTooLarge(
            f"{design.key_length} key bits exceed the {cap}-bit cap")
    if target.nodes != design.base.nodes or not design.base.links <= target.links:
        return None
    want = set(target.links - design.base.links)
    dec = _Decoder(design)
    for key_int in range(1 << design.key_length):
        if dec.links(dec.composed_sources(key_int)) == want:
            return format(key_int, f"0{design.key_length}b")
    return None


# -- serialization ------------------------------------------------------------


def key_bits_to_hex(bits: str) -> str:
    digits = max(1, math.ceil(len(bits) / 4))
    value = int(bits, 2) if bits else 0
    return format(value, f"0{digits}x")


def key_hex_to_bits(hex_str: str, length: int) -> str:
    value = int(hex_str, 16) if hex_str else 0
    if value >= (1 << length):
        raise KeyLengthMismatch(f"hex value does not fit in {length} bits")
    return format(value, f"0{length}b") if length else ""


def ap_to_file_text(ap: ActivationPackage) -> str:
    """Two-line format: decimal bit length, then zero-padded MSB-first hex."""
    return f"{len(ap.bits)}\n{ap.hex()}\n"


def ap_from_file_text(text: str) -> ActivationPackage:
    lines = text.strip().splitlines()
    if len(lines) < 2:
        raise KeyLengthMismatch("activation package file needs two lines")
    length = int(lines[0])
    return ActivationPackage(key_hex_to_bits(lines[1].strip(), length))


def design_to_dict(design: ObfuscatedDesign) -> dict:
    from .topology import to_dict as topo_to_dict

    return {
        "base": topo_to_dict(design.base),
        "groups": [
            {
                "router": g.router,
                "side": g.side.value,
                "lanes": [
                    {"candidates": [list(c) for c in lane.candidates],
                     "width": lane.width}
                    for lane in g.lanes
                ],
            }
            for g in design.groups
        ],
        "stages": design.stages,
        "key_length": design.key_length,
        "redacted": {
            r: [[port, list(ep)] for port, ep in pairs]
            for r, pairs in sorted(design.redacted.items())
        },
    }


def design_from_dict(data: Mapping) -> ObfuscatedDesign:
    from .topology import from_dict as topo_from_dict

    base = topo_from_dict(data["base"])
    groups = []
    for gd in data["groups"]:
        lanes = tuple(
            Lane(
                switch_id=f"{gd['router']}_{gd['side']}{j}",
                candidates=tuple((c[0], int(c[1])) for c in ld["candidates"]),
                width=int(ld["width"]),
            )
            for j, ld in enumerate(gd["lanes"])
        )
        groups.append(SwitchGroup(router=gd["router"], side=SwitchSide(gd["side"]),
                                  lanes=lanes, wiring_seed=int(data.get("seed", 0))))
    groups.sort(key=lambda g: (g.router, g.side is SwitchSide.MUX))
    redacted = {
        r: tuple(sorted((int(p), (ep[0], int(ep[1]))) for p, ep in pairs))
        for r, pairs in data["redacted"].items()
    }
    return ObfuscatedDesign(
        base=base,
        groups=tuple(groups),
        stages=int(data["stages"]),
        key_length=int(data["key_length"]),
        redacted=redacted,
    )


def design_to_json(design: ObfuscatedDesign) -> str:
    return json.dumps(design_to_dict(design), sort_keys=True, indent=2) + "\n"


def design_from_json(text: str) -> ObfuscatedDesign:
    return design_from_dict(json.loads(text))


def eligible_routers(t: Topology) -> list[str]:
    """Routers with out-degree >= 2; the ones a full redaction targets."""
    degree: dict[str, int] = {}
    for link in t.links:
        degree[link.src[0]] = degree.get(link.src[0], 0) + 1
    return [r for r in t.routers() if degree.get(r, 0) >= 2]
