"""Functional-divergence experiments: route messages, compare ALU outputs.

Message-level simulation only: no flits, buffering, or contention. Each
message walks hop by hop from its source IP; routers forward via
shortest-path tables built over the induced topology, IPs terminate. One
designated IP acts as a small ALU, and any message arriving there (whether
or not it was addressed there) produces a result, so mis-routed traffic is
observable exactly the way the multi-DUT comparison needs it to be.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from typing import Mapping, Optional, Sequence

from .errors import NonFunctionalTopology, WorkloadMismatch
from .obnocs import ObfuscatedDesign, induce_topology
from .topology import NodeKind, Topology, TopologyClass, classify, validate

ALU_OPS = ("ADD", "SUB", "AND", "OR", "XOR")
_MASK32 = 0xFFFFFFFF


def alu_compute(op: str, a: int, b: int) -> int:
    """32-bit two's-complement ALU; results reported as unsigned words."""
    a &= _MASK32
    b &= _MASK32
    if op == "ADD":
        return (a + b) & _MASK32
    if op == "SUB":
        return (a - b) & _MASK32
    if op == "AND":
        return a & b
    if op == "OR":
        return a | b
    if op == "XOR":
        return a ^ b
    raise ValueError(f"unknown opcode {op}")


@dataclass(frozen=True)
class Message:
    src: str
    dst: str
    op: str
    a: int
    b: int

    def __post_init__(self):
        if self.op not in ALU_OPS:
            raise ValueError(f"unknown opcode {self.op}")


@dataclass(frozen=True)
class Workload:
    messages: tuple[Message, ...]
    alu: str

    def digest(self) -> str:
        body = json.dumps(
            [vars(m) for m in self.messages] + [self.alu], sort_keys=True
        )
        return hashlib.sha256(body.encode()).hexdigest()


def workload_to_json(w: Workload) -> str:
    return json.dumps(
        [{"src": m.src, "dst": m.dst, "op": m.op, "a": m.a, "b": m.b}
         for m in w.messages],
        indent=2,
    ) + "\n"


def workload_from_json(text: str, alu: str) -> Workload:
    data = json.loads(text)
    msgs = tuple(
        Message(src=d["src"], dst=d["dst"], op=d["op"], a=int(d["a"]), b=int(d["b"]))
        for d in data
    )
    return Workload(messages=msgs, alu=alu)


@dataclass(frozen=True)
class RoutingTable:
    """Per router: destination node -> out-port of the first hop."""

    next_port: Mapping[str, Mapping[str, int]]


def build_routes(t: Topology) -> RoutingTable:
    """BFS shortest-path tables; ties broken by lexicographic next-hop id.

    Paths forward only through routers. Destinations are the IP blocks.
    """
    if not validate(t).ok:
        raise NonFunctionalTopology(t.label)
    nodes = t.node_map()
    fwd: dict[str, list[tuple[int, str]]] = {nid: [] for nid in nodes}
    rev: dict[str, list[str]] = {nid: [] for nid in nodes}
    for link in sorted(t.links):
        fwd[link.src[0]].append((link.src[1], link.dst[0]))
        rev[link.dst[0]].append(link.src[0])

    table: dict[str, dict[str, int]] = {
        nid: {} for nid, n in nodes.items() if n.kind is NodeKind.ROUTER
    }
    for dest, dnode in nodes.items():
        if dnode.kind is not NodeKind.IP:
            continue
        dist = {dest: 0}
        frontier = [dest]
        while frontier:
            nxt = []
            for y in frontier:
                # a hop x -> y is usable when y forwards (router) or y is the goal
                if y != dest and nodes[y].kind is not NodeKind.ROUTER:
                    continue
                for x in rev[y]:
                    if x not in dist:
                        dist[x] = dist[y] + 1
                        nxt.append(x)
            frontier = nxt
        for router in table:
            if router not in dist or router == dest:
                continue
            hops = [
                (nid, port) for port, nid in fwd[router]
                if dist.get(nid, -1) == dist[router] - 1
                and (nid == dest or nodes[nid].kind is NodeKind.ROUTER)
            ]
            if hops:
                hops.sort()
                table[router][dest] = hops[0][1]
    return RoutingTable(next_port={r: dict(v) for r, v in table.items()})


@dataclass(frozen=True)
class DutRun:
    key: str
    topo_class: TopologyClass
    statuses: tuple[str, ...]          # delivered | misdelivered | undelivered
    arrivals: tuple[Optional[str], ...]
    alu_results: tuple[int, ...]
    workload_digest: str


class _Walker:
    def __init__(self, t: Topology, table: RoutingTable):
        self.nodes = t.node_map()
        self.next_node = {(l.src[0], l.src[1]): l.dst[0] for l in t.links}
        self.ip_out: dict[str, int] = {}
        for (nid, port) in self.next_node:
            if self.nodes[nid].kind is NodeKind.IP:
                self.ip_out[nid] = min(port, self.ip_out.get(nid, port))
        self.table = table
        self.limit = 2 * len(self.nodes) + 4

    def walk(self, src: str, dst: str,
             trace: set | None = None) -> tuple[str, Optional[str]]:
        if src == dst:
            return "delivered", dst
        cur = src
        for _ in range(self.limit):
            node = self.nodes[cur]
            if node.kind is NodeKind.ROUTER:
                port = self.table.next_port.get(cur, {}).get(dst)
            else:
                port = self.ip_out.get(cur) if cur == src else None
            if port is None:
                return "undelivered", None
            if trace is not None:
                trace.add((cur, port))
            cur = self.next_node.get((cur, port))
            if cur is None:
                return "undelivered", None
            if cur == dst:
                return "delivered", cur
            if self.nodes[cur].kind is NodeKind.IP:
                return "misdelivered", cur
        return "undelivered", None


def run_dut(design: ObfuscatedDesign, key: str, w: Workload) -> DutRun:
    """Induce the topology for a key, classify it, and drive the workload.

    Routing tables are the designer's: built over the *intended* topology,
    exactly as a deployed configuration would be. Messages then hop over
    the induced physical wiring, so alternate wirings misdeliver. A
    non-functional key models a bricked fabric (contended or dangling
    ports): nothing is delivered and the ALU stays silent.
    """
    induced = induce_topology(design, key)
    intended = design.intended_topology()
    klass = classify(induced, intended)
    if klass is TopologyClass.NON_FUNCTIONAL:
        return DutRun(
            key=key,
            topo_class=klass,
            statuses=tuple("undelivered" for _ in w.messages),
            arrivals=tuple(None for _ in w.messages),
            alu_results=(),
            workload_digest=w.digest(),
        )
    walker = _Walker(induced, build_routes(intended))
    statuses, arrivals, results = [], [], []
    for m in w.messages:
        status, arrival = walker.walk(m.src, m.dst)
        statuses.append(status)
        arrivals.append(arrival)
        if arrival == w.alu:
            results.append(alu_compute(m.op, m.a, m.b))
    return DutRun(
        key=key,
        topo_class=klass,
        statuses=tuple(statuses),
        arrivals=tuple(arrivals),
        alu_results=tuple(results),
        workload_digest=w.digest(),
    )


@dataclass(frozen=True)
class DutVerdict:
    key: str
    topo_class: TopologyClass
    match: bool


@dataclass(frozen=True)
class DivergenceReport:
    per_dut: tuple[DutVerdict, ...]
    tallies: Mapping[str, int]

    def to_dict(self) -> dict:
        return {
            "per_dut": [
                {"key": v.key, "class": v.topo_class.value, "match": v.match}
                for v in self.per_dut
            ],
            "tallies": dict(self.tallies),
        }


def compare_runs(golden: DutRun, others: Sequence[DutRun]) -> DivergenceReport:
    """Match flags and class tallies for a set of DUT runs against golden."""
    verdicts = []
    tallies = {"match": 0, "functional_mismatch": 0, "silent": 0}
    for run in others:
        if run.workload_digest != golden.workload_digest:
            raise WorkloadMismatch(run.key)
        if run.topo_class is TopologyClass.NON_FUNCTIONAL:
            tallies["silent"] += 1
            verdicts.append(DutVerdict(run.key, run.topo_class, False))
            continue
        match = (
            run.alu_results == golden.alu_results
            and run.statuses == golden.statuses
            and run.arrivals == golden.arrivals
        )
        tallies["match" if match else "functional_mismatch"] += 1
        verdicts.append(DutVerdict(run.key, run.topo_class, match))
    return DivergenceReport(per_dut=tuple(verdicts), tallies=tallies)


def workload_coverage(design: ObfuscatedDesign, w: Workload) -> list:
    """Redacted links the workload never exercises on the intended topology.

    A workload that leaves this list non-empty cannot distinguish all the
    alternate wirings; experiments should reject or at least report it.
    """
    intended = design.intended_topology()
    walker = _Walker(intended, build_routes(intended))
    traversed: set = set()
    for m in w.messages:
        walker.walk(m.src, m.dst, trace=traversed)
    link_by_port = {(l.src[0], l.src[1]): l for l in intended.links}
    redacted = {
        link_by_port[(router, port)]
        for router, pairs in design.redacted.items()
        for port, _ep in pairs
    }
    missing = {l for l in redacted if (l.src[0], l.src[1]) not in traversed}
    return sorted(missing)
