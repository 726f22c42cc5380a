"""Canonical NoC topology model: nodes, port-indexed links, legality.

A topology is a directed graph over routers and IP blocks with fixed port
counts per node. A *functional* topology is a perfect matching on ports:
every in-port has exactly one driver and every out-port feeds exactly one
in-port. A candidate topology is *legal* with respect to an intended one
when it is functional and preserves every node's in/out degree; the
intended topology is itself one of the legal topologies, distinguished
only by exact (labeled) equality of its link set.
"""

from __future__ import annotations

import enum
import hashlib
import json
from dataclasses import dataclass
from typing import Iterable, Mapping

from .errors import InvalidTopology, NodeSetMismatch

Endpoint = tuple[str, int]  # (node id, port index)


class NodeKind(enum.Enum):
    ROUTER = "router"
    IP = "ip"


@dataclass(frozen=True)
class Node:
    """One router or IP block with fixed port counts."""

    id: str
    kind: NodeKind
    in_ports: int = 0
    out_ports: int = 0

    def __post_init__(self):
        if not self.id:
            raise ValueError("node id must be non-empty")
        if self.in_ports < 0 or self.out_ports < 0:
            raise ValueError(f"negative port count on {self.id!r}")


@dataclass(frozen=True, order=True)
class Link:
    """Directed connection from an out-port to an in-port."""

    src: Endpoint
    dst: Endpoint


@dataclass(frozen=True)
class Topology:
    label: str
    nodes: frozenset[Node]
    links: frozenset[Link]

    @staticmethod
    def build(label: str, nodes: Iterable[Node], links: Iterable[Link]) -> "Topology":
        nodes = frozenset(nodes)
        ids = [n.id for n in nodes]
        if len(ids) != len(set(ids)):
            raise ValueError("duplicate node ids")
        return Topology(label=label, nodes=nodes, links=frozenset(links))

    def node_map(self) -> dict[str, Node]:
        return {n.id: n for n in self.nodes}

    def routers(self) -> list[str]:
        return sorted(n.id for n in self.nodes if n.kind is NodeKind.ROUTER)

    def ips(self) -> list[str]:
        return sorted(n.id for n in self.nodes if n.kind is NodeKind.IP)

    def out_links(self, node_id: str) -> list[Link]:
        return sorted(l for l in self.links if l.src[0] == node_id)


class TopologyClass(enum.Enum):
    INTENDED = "intended"
    LEGAL_ALTERNATE = "legal_alternate"
    NON_FUNCTIONAL = "non_functional"


@dataclass(frozen=True)
class Finding:
    """One validation defect; kind is a stable machine-readable tag."""

    kind: str
    where: str

    def __str__(self):
        return f"{self.kind}({self.where})"


@dataclass(frozen=True)
class ValidationReport:
    findings: tuple[Finding, ...]

    @property
    def ok(self) -> bool:
        return not self.findings

    def __iter__(self):
        return iter(self.findings)


def validate(t: Topology) -> ValidationReport:
    """Check structural sanity and functionality.

    Reports unknown link endpoints, out-of-range port indices, multi-driven
    in-ports, out-ports feeding more than one in-port, and dangling ports.
    An empty report is equivalent to the topology being functional.
    """
    nodes = t.node_map()
    findings: list[Finding] = []
    in_drivers: dict[Endpoint, int] = {}
    out_uses: dict[Endpoint, int] = {}

    for link in sorted(t.links):
        (sn, sp), (dn, dp) = link.src, link.dst
        bad = False
        for nid, tag in ((sn, "src"), (dn, "dst")):
            if nid not in nodes:
                findings.append(Finding("UnknownNode", f"{tag}={nid}"))
                bad = True
        if bad:
            continue
        if not 0 <= sp < nodes[sn].out_ports:
            findings.append(Finding("BadPortIndex", f"{sn}.out{sp}"))
            bad = True
        if not 0 <= dp < nodes[dn].in_ports:
            findings.append(Finding("BadPortIndex", f"{dn}.in{dp}"))
            bad = True
        if bad:
            continue
        in_drivers[(dn, dp)] = in_drivers.get((dn, dp), 0) + 1
        out_uses[(sn, sp)] = out_uses.get((sn, sp), 0) + 1

    for (dn, dp), count in sorted(in_drivers.items()):
        if count > 1:
            findings.append(Finding("MultiDriven", f"{dn}.in{dp}"))
    for (sn, sp), count in sorted(out_uses.items()):
        if count > 1:
            findings.append(Finding("MultiFanout", f"{sn}.out{sp}"))
    for node in sorted(nodes.values(), key=lambda n: n.id):
        for p in range(node.in_ports):
            if (node.id, p) not in in_drivers:
                findings.append(Finding("DanglingInPort", f"{node.id}.in{p}"))
        for p in range(node.out_ports):
            if (node.id, p) not in out_uses:
                findings.append(Finding("DanglingOutPort", f"{node.id}.out{p}"))

    return ValidationReport(tuple(findings))


def degree_signature(t: Topology) -> dict[str, tuple[int, int]]:
    """Exact (in-degree, out-degree) per node, counted from links.

    Raises InvalidTopology when the topology does not validate; the
    signature of a malformed graph is not meaningful.
    """
    report = validate(t)
    if not report.ok:
        raise InvalidTopology("; ".join(str(f) for f in report.findings))
    sig = {n.id: [0, 0] for n in t.nodes}
    for link in t.links:
        sig[link.src[0]][1] += 1
        sig[link.dst[0]][0] += 1
    return {nid: (i, o) for nid, (i, o) in sig.items()}


def _check_same_nodes(a: Topology, b: Topology) -> None:
    if {n.id for n in a.nodes} != {n.id for n in b.nodes}:
        raise NodeSetMismatch(f"{a.label!r} vs {b.label!r}")


def is_legal(candidate: Topology, intended: Topology) -> bool:
    """True iff candidate is functional and degree-matches the intended topology."""
    _check_same_nodes(candidate, intended)
    if not validate(candidate).ok:
        return False
    cand_sig = degree_signature(candidate)
    want_sig = degree_signature(intended)
    return cand_sig == want_sig


def topology_equal(a: Topology, b: Topology) -> bool:
    """Labeled exact equality of node and link sets; no isomorphism search."""
    return a.nodes == b.nodes and a.links == b.links


def classify(candidate: Topology, intended: Topology) -> TopologyClass:
    """Total, exhaustive classification of a candidate against the intended topology."""
    _check_same_nodes(candidate, intended)
    if topology_equal(candidate, intended):
        return TopologyClass.INTENDED
    if is_legal(candidate, intended):
        return TopologyClass.LEGAL_ALTERNATE
    return TopologyClass.NON_FUNCTIONAL


# -- serialization ------------------------------------------------------------


def to_dict(t: Topology) -> dict:
    return {
        "label": t.label,
        "nodes": [
            {
                "id": n.id,
                "kind": n.kind.value,
                "in_ports": n.in_ports,
                "out_ports": n.out_ports,
            }
            for n in sorted(t.nodes, key=lambda n: n.id)
        ],
        "links": [
            {"src": list(l.src), "dst": list(l.dst)} for l in sorted(t.links)
        ],
    }


def from_dict(data: Mapping) -> Topology:
    nodes = [
        Node(
            id=nd["id"],
            kind=NodeKind(nd["kind"]),
            in_ports=int(nd["in_ports"]),
            out_ports=int(nd["out_ports"]),
        )
        for nd in data["nodes"]
    ]
    links = [
        Link(src=(l["src"][0], int(l["src"][1])), dst=(l["dst"][0], int(l["dst"][1])))
        for l in data["links"]
    ]
    return Topology.build(str(data.get("label", "")), nodes, links)


def to_json(t: Topology) -> str:
    """Canonical key-sorted JSON; byte-stable for identical topologies."""
    return json.dumps(to_dict(t), sort_keys=True, indent=2) + "\n"


def from_json(text: str) -> Topology:
    return from_dict(json.loads(text))


def digest(t: Topology) -> str:
    """Canonical-form hash of the sorted link list (plus node table)."""
    return hashlib.sha256(to_json(t).encode()).hexdigest()


def to_dot(t: Topology) -> str:
    """Graphviz export: routers as boxes, IPs as ellipses, one edge per link."""
    lines = [f'digraph "{t.label}" {{']
    for n in sorted(t.nodes, key=lambda n: n.id):
        shape = "box" if n.kind is NodeKind.ROUTER else "ellipse"
        lines.append(f'  "{n.id}" [shape={shape}];')
    for l in sorted(t.links):
        lines.append(
            f'  "{l.src[0]}" -> "{l.dst[0]}" [label="o{l.src[1]}-i{l.dst[1]}"];'
        )
    lines.append("}")
    return "\n".join(lines) + "\n"
