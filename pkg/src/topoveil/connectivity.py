"""Router connectivity matrices: pre/post-synthesis extraction and merge.

An entry (i, j) is true when a combinational path exists from input signal
i to output signal j; DFFs end paths (the attack surface is the
combinational frame). Signals are bus-level port names, one row/column per
name regardless of width. Merging pre- and post-synthesis matrices keeps
exactly the connections preserved in both.
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from typing import Mapping, Sequence

from .errors import RouterMismatch, UnknownSignal
from .netlist import Netlist


@dataclass(frozen=True)
class ConnectivityMatrix:
    router: str
    rows: tuple[str, ...]
    cols: tuple[str, ...]
    entries: tuple[tuple[bool, ...], ...]

    def get(self, row: str, col: str) -> bool:
        if row not in self.rows or col not in self.cols:
            return False
        return self.entries[self.rows.index(row)][self.cols.index(col)]

    def preserved_rows(self) -> list[str]:
        """Row signals with at least one surviving connection."""
        return [r for r, line in zip(self.rows, self.entries) if any(line)]

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("input\\output," + ",".join(self.cols) + "\n")
        for r, line in zip(self.rows, self.entries):
            buf.write(r + "," + ",".join("1" if v else "0" for v in line) + "\n")
        return buf.getvalue()

    def to_dict(self) -> dict:
        return {
            "router": self.router,
            "rows": list(self.rows),
            "cols": list(self.cols),
            "entries": [[1 if v else 0 for v in line] for line in self.entries],
        }

    @staticmethod
    def from_dict(data: Mapping) -> "ConnectivityMatrix":
        return ConnectivityMatrix(
            router=str(data["router"]),
            rows=tuple(data["rows"]),
            cols=tuple(data["cols"]),
            entries=tuple(tuple(bool(v) for v in line) for line in data["entries"]),
        )

    @staticmethod
    def from_csv(router: str, text: str) -> "ConnectivityMatrix":
        lines = [l for l in text.strip().splitlines() if l]
        cols = tuple(lines[0].split(",")[1:])
        rows, entries = [], []
        for line in lines[1:]:
            parts = line.split(",")
            rows.append(parts[0])
            entries.append(tuple(p.strip() == "1" for p in parts[1:]))
        return ConnectivityMatrix(router, tuple(rows), cols, tuple(entries))


def _comb_reachable(n: Netlist, start_nets: set[str]) -> set[str]:
    readers: dict[str, list] = {}
    for c in n.cells:
        if c.kind == "DFF":
            continue  # sequential boundary
        for net in c.inputs():
            readers.setdefault(net, []).append(c)
    reached = set(start_nets)
    stack = list(start_nets)
    while stack:
        net = stack.pop()
        for cell in readers.get(net, ()):
            out = cell.output()
            if out not in reached:
                reached.add(out)
                stack.append(out)
    return reached


def extract_connectivity(
    n: Netlist, router: str, in_signals: Sequence[str], out_signals: Sequence[str]
) -> ConnectivityMatrix:
    """Reachability matrix between the named input and output ports."""
    port_names = {p.name for p in (*n.inputs, *n.outputs)}
    for name in (*in_signals, *out_signals):
        if name not in port_names:
            raise UnknownSignal(name)
    out_bits = {name: set(n.port(name).nets()) for name in out_signals}
    entries = []
    for src in in_signals:
        reached = _comb_reachable(n, set(n.port(src).nets()))
        entries.append(tuple(bool(out_bits[dst] & reached) for dst in out_signals))
    return ConnectivityMatrix(router, tuple(in_signals), tuple(out_signals),
                              tuple(entries))


def merge_connectivity(
    pre: ConnectivityMatrix, post: ConnectivityMatrix
) -> ConnectivityMatrix:
    """Cellwise AND over the union of names; absent names count as false."""
    if pre.router != post.router:
        raise RouterMismatch(f"{pre.router} vs {post.router}")
    rows = tuple(sorted(set(pre.rows) | set(post.rows)))
    cols = tuple(sorted(set(pre.cols) | set(post.cols)))
    entries = tuple(
        tuple(pre.get(r, c) and post.get(r, c) for c in cols) for r in rows
    )
    return ConnectivityMatrix(pre.router, rows, cols, entries)
