"""Analytic overhead reporting over obfuscation levels.

FPGA-specific metrics (adaptive logic modules, device power, synthesis
timing) are deliberately replaced by analytic cell/bit counts: per redacted
router with m candidates, key bits are lanes * ceil(log2 m) * stages, the
MUX2 cost is (m-1) * bus_width * lanes * stages, and the load register
grows by the key bits. Timing is reported only as added combinational
depth (ceil(log2 m) * stages mux levels), never as nanoseconds.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Sequence

from .errors import LevelExceedsRouters
from .obnocs import eligible_routers
from .rng import SplitMix64
from .topology import Topology

LEVEL_ROUTERS = {"0": 0, "I": 2, "II": 4, "III": 8, "IV": 16}
LEVEL_ORDER = ("0", "I", "II", "III", "IV")


@dataclass(frozen=True)
class ObfuscationLevel:
    level: str
    router_count: int

    @staticmethod
    def named(name: str) -> "ObfuscationLevel":
        if name not in LEVEL_ROUTERS:
            raise LevelExceedsRouters(f"unknown level {name!r}")
        return ObfuscationLevel(level=name, router_count=LEVEL_ROUTERS[name])


@dataclass(frozen=True)
class RunConfig:
    """Defaulted knobs shared by the CLI and service."""

    seed: int = 0
    stages: int = 1
    bus_width: int = 1
    routers: tuple[str, ...] = ()
    level: str | None = None
    attack_budget: int | None = None
    oracle: str = "exact"


@dataclass(frozen=True)
class LevelRow:
    level: str
    router_count: int
    mux2_cells: float
    key_bits: float
    added_register_bits: float
    added_depth: float
    delta_mux2: float
    delta_key_bits: float
    delta_register_bits: float


@dataclass(frozen=True)
class OverheadReport:
    topology: str
    samples: int
    seed: int
    stages: int
    bus_width: int
    rows: tuple[LevelRow, ...]

    def to_dict(self) -> dict:
        return {
            "topology": self.topology,
            "samples": self.samples,
            "seed": self.seed,
            "stages": self.stages,
            "bus_width": self.bus_width,
            "rows": [vars(r) for r in self.rows],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"


def subset_costs(
    t: Topology, routers: Sequence[str], stages: int, bus_width: int
) -> tuple[int, int, int]:
    """(mux2 cells, key bits, added depth) for one concrete router subset."""
    degree: dict[str, int] = {}
    for link in t.links:
        degree[link.src[0]] = degree.get(link.src[0], 0) + 1
    mux2 = key_bits = depth = 0
    for r in routers:
        m = degree.get(r, 0)
        lanes = m
        width = max(1, (m - 1).bit_length())
        key_bits += lanes * width * stages
        mux2 += (m - 1) * bus_width * lanes * stages
        depth = max(depth, width * stages)
    return mux2, key_bits, depth


def overhead_report(
    t: Topology,
    level: ObfuscationLevel,
    samples: int,
    seed: int,
    *,
    stages: int = 1,
    bus_width: int = 1,
) -> OverheadReport:
    """Mean analytic costs over seeded random router subsets, per level.

    Rows cover level 0 up to the requested level; deltas are against the
    unobfuscated level 0 (all zeros). Raises LevelExceedsRouters when the
    level wants more (eligible) routers than the topology offers.
    """
    eligible = eligible_routers(t)
    if level.router_count > len(t.routers()):
        raise LevelExceedsRouters(
            f"level {level.level} wants {level.router_count} routers, "
            f"topology has {len(t.routers())}")
    if level.router_count > len(eligible):
        raise LevelExceedsRouters(
            f"level {level.level} wants {level.router_count} routers, "
            f"only {len(eligible)} have out-degree >= 2")

    rng = SplitMix64(seed)
    rows = []
    for name in LEVEL_ORDER:
        count = LEVEL_ROUTERS[name]
        if count > level.router_count:
            break
        totals = [0.0, 0.0, 0.0]
        for _ in range(max(1, samples)):
            pool = list(eligible)
            rng.shuffle(pool)
            mux2, bits, depth = subset_costs(t, pool[:count], stages, bus_width)
            totals[0] += mux2
            totals[1] += bits
            totals[2] += depth
        k = max(1, samples)
        mean_mux2, mean_bits, mean_depth = (x / k for x in totals)
        rows.append(LevelRow(
            level=name,
            router_count=count,
            mux2_cells=mean_mux2,
            key_bits=mean_bits,
            added_register_bits=mean_bits,
            added_depth=mean_depth,
            delta_mux2=mean_mux2,
            delta_key_bits=mean_bits,
            delta_register_bits=mean_bits,
        ))
    return OverheadReport(
        topology=t.label,
        samples=max(1, samples),
        seed=seed,
        stages=stages,
        bus_width=bus_width,
        rows=tuple(rows),
    )
