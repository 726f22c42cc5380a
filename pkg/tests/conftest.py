import random

import pytest

from topoveil.topology import Link, Node, NodeKind, Topology


def node(nid, kind, i=0, o=0):
    return Node(nid, NodeKind(kind), in_ports=i, out_ports=o)


def link(s, sp, d, dp):
    return Link(src=(s, sp), dst=(d, dp))


@pytest.fixture
def fig4_tree() -> Topology:
    """Five-router tree with nine IPs; R1 fans out to R3, R4, R5 and IP6.

    Four routers have out-degree 4, so full redaction is 16 four-way lanes
    (32 key bits). R1 has in-degree 1 and out-degree 4.
    """
    nodes = [
        node("R1", "router", 1, 4), node("R2", "router", 1, 4),
        node("R3", "router", 1, 4), node("R4", "router", 1, 4),
        node("R5", "router", 1, 1),
        node("IP1", "ip", 1, 1), node("IP2", "ip", 1, 0),
        node("IP3", "ip", 1, 0), node("IP4", "ip", 1, 0),
        node("IP5", "ip", 1, 0), node("IP6", "ip", 2, 0),
        node("IP7", "ip", 2, 0), node("IP8", "ip", 2, 0),
        node("IP9", "ip", 2, 0),
    ]
    links = [
        link("R2", 0, "R1", 0),
        link("R1", 0, "R3", 0), link("R1", 1, "R4", 0),
        link("R1", 2, "R5", 0), link("R1", 3, "IP6", 0),
        link("IP1", 0, "R2", 0),
        link("R2", 1, "IP7", 0), link("R2", 2, "IP8", 0), link("R2", 3, "IP9", 0),
        link("R3", 0, "IP1", 0), link("R3", 1, "IP2", 0),
        link("R3", 2, "IP3", 0), link("R3", 3, "IP4", 0),
        link("R4", 0, "IP5", 0), link("R4", 1, "IP6", 1),
        link("R4", 2, "IP7", 1), link("R4", 3, "IP8", 1),
        link("R5", 0, "IP9", 1),
    ]
    return Topology.build("fig4", nodes, links)


@pytest.fixture
def hub() -> Topology:
    """One source, one 4-way hub router, four sink IPs."""
    nodes = [
        node("SRC", "ip", 0, 1), node("R0", "router", 1, 4),
        node("A", "ip", 1, 0), node("B", "ip", 1, 0),
        node("C", "ip", 1, 0), node("D", "ip", 1, 0),
    ]
    links = [
        link("SRC", 0, "R0", 0),
        link("R0", 0, "A", 0), link("R0", 1, "B", 0),
        link("R0", 2, "C", 0), link("R0", 3, "D", 0),
    ]
    return Topology.build("hub", nodes, links)


def random_functional_topology(rng: random.Random, routers: int, label="rand") -> Topology:
    """Random functional topology: sources feed a router chain that fans out.

    Every router r gets out-degree in [2, 4] wired to fresh sink IPs or the
    next router; every in-port ends up driven exactly once.
    """
    nodes = []
    links = []
    sink_count = 0
    src_count = 0
    prev = None
    for r in range(routers):
        rid = f"R{r:02d}"
        fan = rng.randint(2, 4)
        in_ports = 1
        nodes.append(node(rid, "router", in_ports, fan))
        if prev is None:
            sid = f"S{src_count:02d}"
            src_count += 1
            nodes.append(node(sid, "ip", 0, 1))
            links.append(link(sid, 0, rid, 0))
        else:
            links.append(link(prev[0], prev[1], rid, 0))
        next_port = None
        for p in range(fan):
            if r + 1 < routers and next_port is None:
                next_port = p
                continue
            tid = f"T{sink_count:02d}"
            sink_count += 1
            nodes.append(node(tid, "ip", 1, 0))
            links.append(link(rid, p, tid, 0))
        prev = (rid, next_port) if next_port is not None else None
        if prev is None and r + 1 < routers:
            # fan never went to the next router; feed it from a fresh source
            sid = f"S{src_count:02d}"
            src_count += 1
            nodes.append(node(sid, "ip", 0, 1))
            prev = (sid, 0)
    if prev is not None:
        tid = f"T{sink_count:02d}"
        nodes.append(node(tid, "ip", 1, 0))
        links.append(link(prev[0], prev[1], tid, 0))
    return Topology.build(label, nodes, links)
