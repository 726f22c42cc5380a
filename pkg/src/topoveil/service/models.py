"""Pydantic request/response models mirroring the file schemas."""

from __future__ import annotations

from typing import Literal, Optional

from pydantic import BaseModel, Field


class NodeModel(BaseModel):
    id: str
    kind: Literal["router", "ip"]
    in_ports: int = 0
    out_ports: int = 0


class LinkModel(BaseModel):
    src: tuple[str, int]
    dst: tuple[str, int]


class TopologyModel(BaseModel):
    label: str = ""
    nodes: list[NodeModel]
    links: list[LinkModel]


class FindingModel(BaseModel):
    kind: str
    where: str


class ValidateRequest(BaseModel):
    topology: TopologyModel


class ValidateResponse(BaseModel):
    functional: bool
    findings: list[FindingModel]


class LaneModel(BaseModel):
    candidates: list[tuple[str, int]]
    width: int


class GroupModel(BaseModel):
    router: str
    side: Literal["demux", "mux"]
    lanes: list[LaneModel]


class DesignModel(BaseModel):
    base: TopologyModel
    groups: list[GroupModel]
    stages: int
    key_length: int
    redacted: dict[str, list[tuple[int, tuple[str, int]]]]


class ObfuscateObnocsRequest(BaseModel):
    topology: TopologyModel
    routers: list[str] = Field(default_factory=list)
    all_routers: bool = False
    stages: int = 1
    seed: int = 0
    extensions: dict[str, list[tuple[str, int]]] = Field(default_factory=dict)


class ActivationPackageModel(BaseModel):
    length: int
    hex: str


class ObfuscateObnocsResponse(BaseModel):
    design: DesignModel
    activation_package: ActivationPackageModel


class InduceRequest(BaseModel):
    design: DesignModel
    key: str


class InduceResponse(BaseModel):
    topology: TopologyModel
    topology_class: Literal["intended", "legal_alternate", "non_functional"]


class EnumerateRequest(BaseModel):
    design: DesignModel
    cap: int = 24
    sample: Optional[int] = None
    seed: int = 1


class EnumerateResponse(BaseModel):
    legal: int
    formula: int
    sampled: bool


class LoadApRequest(BaseModel):
    package_hex: str
    length: int


class TraceStepModel(BaseModel):
    cycle: int
    ap_in: int
    load_en: int
    state_hex: str


class LoadApResponse(BaseModel):
    state: str
    state_hex: str
    trace: list[TraceStepModel]


class PortModel(BaseModel):
    name: str
    width: int


class CellModel(BaseModel):
    id: str
    kind: str
    pins: dict[str, str]


class NetlistModel(BaseModel):
    name: str
    inputs: list[PortModel]
    outputs: list[PortModel]
    nets: list[str]
    cells: list[CellModel]


class ElaborateRequest(BaseModel):
    design: DesignModel
    bus_width: int = 1


class ElaborateResponse(BaseModel):
    netlist: NetlistModel
    mux2_cells: int


class OptimizeRequest(BaseModel):
    netlist: NetlistModel


class OptimizeResponse(BaseModel):
    netlist: NetlistModel
    cells_before: int
    cells_after: int


class MatrixModel(BaseModel):
    router: str
    rows: list[str]
    cols: list[str]
    entries: list[list[int]]


class ConnectivityRequest(BaseModel):
    netlist: NetlistModel
    router: str
    inputs: list[str]
    outputs: list[str]


class MergeRequest(BaseModel):
    pre: MatrixModel
    post: MatrixModel


class PotentGenerateRequest(BaseModel):
    matrix: MatrixModel
    key_width: Optional[int] = None


class SwitchModel(BaseModel):
    signals: list[str]
    key_width: int
    order: Literal["lehmer"] = "lehmer"


class PotentGenerateResponse(BaseModel):
    switch: SwitchModel
    valid_keys: int
    zero_keys: int


class PotentIntegrateRequest(BaseModel):
    netlist: NetlistModel
    switch: SwitchModel
    correct_key: int


class PotentIntegrateResponse(BaseModel):
    netlist: NetlistModel
    matrix: MatrixModel


class KeyspaceRequest(BaseModel):
    router_count: int
    key_width: int


class KeyspaceResponse(BaseModel):
    keyspace: str  # decimal string; 2^(N_R * b) overflows JSON numbers


class OracleSpec(BaseModel):
    kind: Literal["exact", "behavioral"] = "exact"
    correct_key: Optional[str] = None
    design: Optional[DesignModel] = None
    seed: int = 0


class AttackRequest(BaseModel):
    locked: NetlistModel
    oracle: OracleSpec
    budget: Optional[int] = None
    seed: int = 0
    ground_truth_key: Optional[str] = None
    ground_truth_design: Optional[DesignModel] = None


class AttackResponse(BaseModel):
    recovered_key: str
    recovered_key_hex: str
    dip_count: int
    queries: int
    verdict: Optional[str] = None
    phi_digest: Optional[str] = None
    consistent_keys: Optional[list[str]] = None


class MessageModel(BaseModel):
    src: str
    dst: str
    op: Literal["ADD", "SUB", "AND", "OR", "XOR"]
    a: int
    b: int


class SimulateRequest(BaseModel):
    design: DesignModel
    keys: list[str]
    workload: list[MessageModel]
    alu: str


class DutVerdictModel(BaseModel):
    key: str
    topo_class: str
    match: bool


class SimulateResponse(BaseModel):
    golden_key: str
    coverage_missing: list[LinkModel]
    per_dut: list[DutVerdictModel]
    tallies: dict[str, int]


class OverheadRequest(BaseModel):
    topology: TopologyModel
    level: Literal["0", "I", "II", "III", "IV"]
    samples: int = 10
    seed: int = 0
    stages: int = 1
    bus_width: int = 1


class LevelRowModel(BaseModel):
    level: str
    router_count: int
    mux2_cells: float
    key_bits: float
    added_register_bits: float
    added_depth: float


class OverheadResponse(BaseModel):
    rows: list[LevelRowModel]


class DotResponse(BaseModel):
    dot: str
