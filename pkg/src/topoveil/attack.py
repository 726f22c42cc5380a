"""Oracle-guided attack harness: CNF export, DIP loop, brute force, verdicts.

The flow mirrors the usual de-obfuscation evaluation: lower the locked
combinational netlist to CNF (Tseitin), search for distinguishing input
patterns on a two-copy miter, query an oracle for the true response, pin
both copies to agree on it, and repeat until no distinguishing input
remains; any key consistent with the accumulated responses is then
extracted. Verdicts against ground truth are computed afterwards, never by
the attack itself.

Two oracle fidelities are exposed: Exact (black-box evaluation of the
unlocked design) and Behavioral (accepts any behavior produced by a legal
topology, answering value queries from an undisclosed legal member). The
satisfiability engine is pluggable; anything with the CdclSolver surface
works, and instances round-trip through DIMACS for external tools.
"""

from __future__ import annotations

import enum
import json
import time
from dataclasses import dataclass
from typing import Callable, Iterable, Mapping, Optional, Sequence

from .errors import (
    BudgetExhausted,
    KeyspaceTooLarge,
    SequentialNetlist,
    UnsatFromStart,
)
from .netlist import (
    Netlist,
    bits_from_port_value,
    comb_equivalent,
    output_signature,
    port_value_from_bits,
)
from .obnocs import ActivationPackage, ObfuscatedDesign, induce_topology, key_bits_to_hex
from .rng import SplitMix64
from .solver import CdclSolver, to_dimacs
from .topology import Topology, TopologyClass, classify, digest as topo_digest


# -- CNF encoding -------------------------------------------------------------


@dataclass
class CnfInstance:
    """Tseitin encoding of one or two netlist copies.

    Non-key input nets are shared between copies; key nets and internal
    nets get per-copy variables. ``var_of[(copy, net)]`` maps to DIMACS
    variables.
    """

    nvars: int
    clauses: list[tuple[int, ...]]
    var_of: dict[tuple[int, str], int]
    copies: int
    key_ports: tuple[str, ...]
    source: str

    def vars_for_port(self, n: Netlist, name: str, copy: int = 0) -> list[int]:
        return [self.var_of[(copy, net)] for net in n.port(name).nets()]


_GATE_CLAUSES = {
    "AND": lambda y, a, b: [(-y, a), (-y, b), (y, -a, -b)],
    "OR": lambda y, a, b: [(y, -a), (y, -b), (-y, a, b)],
    "XOR": lambda y, a, b: [(-y, -a, -b), (-y, a, b), (y, -a, b), (y, a, -b)],
}


def to_cnf(
    n: Netlist, copies: int = 1, key_ports: Iterable[str] = ("key",)
) -> CnfInstance:
    """Encode the netlist; models are exactly its consistent evaluations."""
    if n.has_dff():
        raise SequentialNetlist(n.name)
    if copies not in (1, 2):
        raise ValueError("copies must be 1 or 2")
    key_ports = tuple(p for p in key_ports if any(q.name == p for q in n.inputs))
    key_net_order = [net for p in key_ports for net in n.port(p).nets()]
    key_nets = set(key_net_order)
    shared_inputs = [net for net in n.input_nets() if net not in key_nets]

    nvars = 0
    var_of: dict[tuple[int, str], int] = {}

    def new_var() -> int:
        nonlocal nvars
        nvars += 1
        return nvars

    for net in shared_inputs:
        v = new_var()
        for c in range(copies):
            var_of[(c, net)] = v

    clauses: list[tuple[int, ...]] = []
    driven = {c.output() for c in n.cells} | set(n.input_nets())
    for copy in range(copies):
        def var(net: str) -> int:
            if (copy, net) not in var_of:
                var_of[(copy, net)] = new_var()
            return var_of[(copy, net)]

        for net in key_net_order:
            var(net)
        for cell in n.cells:
            y = var(cell.output())
            kind = cell.kind
            if kind == "CONST0":
                clauses.append((-y,))
            elif kind == "CONST1":
                clauses.append((y,))
            elif kind in _GATE_CLAUSES:
                a, b = (var(x) for x in cell.inputs())
                clauses.extend(tuple(c) for c in _GATE_CLAUSES[kind](y, a, b))
            elif kind in ("NOT", "BUF"):
                a = var(cell.inputs()[0])
                if kind == "NOT":
                    clauses.extend([(y, a), (-y, -a)])
                else:
                    clauses.extend([(y, -a), (-y, a)])
            else:  # MUX2
                a, b, sel = (var(x) for x in cell.inputs())
                clauses.extend([
                    (-sel, -b, y), (-sel, b, -y), (sel, -a, y), (sel, a, -y),
                ])
        for net in n.nets:
            if net not in driven and (copy, net) in var_of:
                clauses.append((-var_of[(copy, net)],))  # floating reads 0
        for net in n.output_nets():
            var(net)

    return CnfInstance(
        nvars=nvars,
        clauses=clauses,
        var_of=var_of,
        copies=copies,
        key_ports=key_ports,
        source=n.name,
    )


def cnf_to_dimacs(cnf: CnfInstance) -> str:
    comments = [f"source {cnf.source}", f"copies {cnf.copies}"]
    comments += [
        f"var {v} = {net}@{copy}"
        for (copy, net), v in sorted(cnf.var_of.items(), key=lambda kv: kv[1])
    ]
    return to_dimacs(cnf.nvars, cnf.clauses, comments)


# -- oracles -------------------------------------------------------------------


class OracleKind(enum.Enum):
    EXACT = "exact"
    BEHAVIORAL = "behavioral"


class ExactOracle:
    """Black-box evaluation of the unlocked design (locked + correct key).

    Deterministic per input vector; access is serialized (query_count is
    exact under the GIL, concurrent callers must not interleave).
    """

    kind = OracleKind.EXACT

    def __init__(self, locked: Netlist, correct_key_bits: str, key_port: str = "key"):
        self._net = locked
        self._key_port = key_port
        self._key_value = port_value_from_bits(correct_key_bits)
        self.query_count = 0

    def query(self, inputs: Mapping[str, int]) -> dict[str, int]:
        self.query_count += 1
        from .netlist import evaluate

        return evaluate(self._net, {**inputs, self._key_port: self._key_value})

    def signature(self) -> tuple[int, ...]:
        return output_signature(self._net, {self._key_port: self._key_value})


class BehavioralOracle:
    """Functional-validation oracle: accepts any legal-class behavior.

    Value queries are answered by an undisclosed member of the legal class
    (seed-chosen), never revealing which member is intended. Acceptance is
    membership of a full I/O signature in the legal behavior set.
    """

    kind = OracleKind.BEHAVIORAL

    def __init__(
        self,
        locked: Netlist,
        legal_keys: Sequence[str],
        seed: int = 0,
        key_port: str = "key",
    ):
        if not legal_keys:
            raise ValueError("behavioral oracle needs a non-empty legal class")
        self._net = locked
        self._key_port = key_port
        self._signatures = {
            output_signature(locked, {key_port: port_value_from_bits(k)})
            for k in legal_keys
        }
        rng = SplitMix64(seed)
        self._hidden_key = legal_keys[rng.next_below(len(legal_keys))]
        self.query_count = 0

    def query(self, inputs: Mapping[str, int]) -> dict[str, int]:
        self.query_count += 1
        from .netlist import evaluate

        return evaluate(
            self._net,
            {**inputs, self._key_port: port_value_from_bits(self._hidden_key)},
        )

    def accepts_signature(self, sig: tuple[int, ...]) -> bool:
        return sig in self._signatures


def behavioral_oracle_for_design(
    design: ObfuscatedDesign, locked: Netlist, seed: int = 0, key_port: str = "key"
):
    """Build the legal-class oracle by enumerating the design's legal keys."""
    from .obnocs import enumerate_keys

    legal = [
        rec.key
        for rec in enumerate_keys(design)
        if rec.topo_class is not TopologyClass.NON_FUNCTIONAL
    ]
    return BehavioralOracle(locked, legal, seed=seed, key_port=key_port)


# -- results and verdicts -------------------------------------------------------


class Verdict(enum.Enum):
    FUNCTIONAL_EQUIVALENT = "functional_equivalent"
    LEGAL_ALTERNATE = "legal_alternate"
    FAILED = "failed"


@dataclass
class AttackResult:
    recovered_key: str
    dip_count: int
    wall_time: float
    seed: int
    queries: int
    verdict: Optional[Verdict] = None
    phi_digest: Optional[str] = None
    consistent_keys: Optional[tuple[str, ...]] = None


@dataclass(frozen=True)
class GroundTruth:
    """What only the designer knows: intended topology, correct key, and
    the key-to-topology map Phi."""

    intended: Topology
    correct_key: str
    phi: Callable[[str], Topology]


def ground_truth_for_design(
    design: ObfuscatedDesign, ap: ActivationPackage
) -> GroundTruth:
    return GroundTruth(
        intended=design.intended_topology(),
        correct_key=ap.bits,
        phi=lambda bits: induce_topology(design, bits),
    )


def ground_truth_for_switch(switch, correct_key: int) -> GroundTruth:
    """Phi for a permutation switch: keys map to signal-level topologies."""
    from .potent import induced_mapping_topology

    def phi(bits: str):
        return induced_mapping_topology(switch, int(bits, 2), correct_key)

    return GroundTruth(
        intended=phi(format(correct_key, f"0{switch.key_width}b")),
        correct_key=format(correct_key, f"0{switch.key_width}b"),
        phi=phi,
    )


def verdict(
    locked: Netlist,
    result_key: str,
    ground: GroundTruth,
    *,
    key_port: str = "key",
) -> tuple[Verdict, str]:
    """Post-hoc classification of a recovered key against ground truth."""
    image = ground.phi(result_key)
    phi_digest = topo_digest(image)
    equivalent = comb_equivalent(
        locked,
        locked,
        bind_a={key_port: port_value_from_bits(result_key)},
        bind_b={key_port: port_value_from_bits(ground.correct_key)},
    )
    if equivalent:
        return Verdict.FUNCTIONAL_EQUIVALENT, phi_digest
    klass = classify(image, ground.intended)
    if klass is not TopologyClass.NON_FUNCTIONAL:
        return Verdict.LEGAL_ALTERNATE, phi_digest
    return Verdict.FAILED, phi_digest


def attack_report_json(result: AttackResult) -> str:
    return json.dumps(
        {
            "recovered_key_hex": key_bits_to_hex(result.recovered_key),
            "dip_count": result.dip_count,
            "verdict": result.verdict.value if result.verdict else None,
            "phi_digest": result.phi_digest,
            "seed": result.seed,
        },
        sort_keys=True,
        indent=2,
    ) + "\n"


# -- the DIP loop ----------------------------------------------------------------


class _IoEncoder:
    """Re-encodes the locked netlist with inputs/outputs pinned to constants
    and key nets mapped onto shared solver variables."""

    def __init__(self, locked: Netlist, key_port: str):
        self.n = locked
        self.key_nets = locked.port(key_port).nets()
        self.in_ports = [p for p in locked.inputs if p.name != key_port]
        self.out_ports = list(locked.outputs)

    def add_constraint(
        self,
        solver: CdclSolver,
        key_vars: Sequence[int],
        next_var: int,
        di: Mapping[str, int],
        do: Mapping[str, int],
    ) -> int:
        """Append clauses asserting locked(di, key) == do; returns next free var."""
        var_of: dict[str, int] = {}

        def var(net: str) -> int:
            nonlocal next_var
            if net not in var_of:
                var_of[net] = next_var
                next_var += 1
            return var_of[net]

        for net, kv in zip(self.key_nets, key_vars):
            var_of[net] = kv
        unit: list[int] = []
        for p in self.in_ports:
            for i, net in enumerate(p.nets()):
                v = var(net)
                unit.append(v if (di[p.name] >> i) & 1 else -v)
        driven = {c.output() for c in self.n.cells} | set(self.n.input_nets())
        for cell in self.n.cells:
            y = var(cell.output())
            kind = cell.kind
            if kind == "CONST0":
                solver.add_clause([-y])
            elif kind == "CONST1":
                solver.add_clause([y])
            elif kind in _GATE_CLAUSES:
                a, b = (var(x) for x in cell.inputs())
                for c in _GATE_CLAUSES[kind](y, a, b):
                    solver.add_clause(list(c))
            elif kind == "NOT":
                a = var(cell.inputs()[0])
                solver.add_clause([y, a])
                solver.add_clause([-y, -a])
            elif kind == "BUF":
                a = var(cell.inputs()[0])
                solver.add_clause([y, -a])
                solver.add_clause([-y, a])
            else:
                a, b, sel = (var(x) for x in cell.inputs())
                for c in ((-sel, -b, y), (-sel, b, -y), (sel, -a, y), (sel, a, -y)):
                    solver.add_clause(list(c))
        for net in self.n.nets:
            if net not in driven and net in var_of:
                solver.add_clause([-var_of[net]])
        for lit in unit:
            solver.add_clause([lit])
        for p in self.out_ports:
            for i, net in enumerate(p.nets()):
                v = var(net)
                solver.add_clause([v if (do[p.name] >> i) & 1 else -v])
        return next_var


def sat_attack(
    locked: Netlist,
    oracle,
    budget: int | None = None,
    *,
    key_port: str = "key",
    seed: int = 0,
    solver_factory: Callable[[], CdclSolver] | None = None,
) -> AttackResult:
    """Classic oracle-guided key recovery on the combinational frame.

    Finds distinguishing inputs on a two-copy miter, queries the oracle,
    constrains both copies (and a key-feasibility solver) to agree, and
    stops when no distinguishing input remains. Raises BudgetExhausted
    past the query cap and UnsatFromStart when no key can match the
    oracle's answers.
    """
    start = time.perf_counter()
    factory = solver_factory or (lambda: CdclSolver(seed=seed))
    key_width = locked.port(key_port).width

    cnf = to_cnf(locked, copies=2, key_ports=(key_port,))
    miter = factory()
    miter.ensure_vars(cnf.nvars)
    miter.add_clauses(cnf.clauses)
    next_var = cnf.nvars + 1

    # at least one output bit differs between the two key copies
    diff_lits = []
    for net in locked.output_nets():
        y0, y1 = cnf.var_of[(0, net)], cnf.var_of[(1, net)]
        d = next_var
        next_var += 1
        for c in _GATE_CLAUSES["XOR"](d, y0, y1):
            miter.add_clause(list(c))
        diff_lits.append(d)
    miter.add_clause(diff_lits)

    feas = factory()
    fcnf = to_cnf(locked, copies=1, key_ports=(key_port,))
    feas.ensure_vars(fcnf.nvars)
    feas.add_clauses(fcnf.clauses)
    feas_next = fcnf.nvars + 1
    feas_keys = [fcnf.var_of[(0, net)] for net in locked.port(key_port).nets()]

    enc = _IoEncoder(locked, key_port)
    key_vars = [
        [cnf.var_of[(c, net)] for net in locked.port(key_port).nets()]
        for c in (0, 1)
    ]
    in_ports = [p for p in locked.inputs if p.name != key_port]

    dips = 0
    while miter.solve():
        model = miter.model()
        di = {
            p.name: sum(
                (1 << i) if model[cnf.var_of[(0, net)]] else 0
                for i, net in enumerate(p.nets())
            )
            for p in in_ports
        }
        do = oracle.query(di)
        dips += 1
        if budget is not None and dips > budget:
            raise BudgetExhausted(f"{dips} queries exceed budget {budget}")
        for c in (0, 1):
            next_var = enc.add_constraint(miter, key_vars[c], next_var, di, do)
        feas_next = enc.add_constraint(feas, feas_keys, feas_next, di, do)

    if not feas.solve():
        raise UnsatFromStart("no key is consistent with the oracle")
    model = feas.model()
    port_value = sum(
        (1 << i) if model[feas_keys[i]] else 0 for i in range(key_width)
    )
    recovered = bits_from_port_value(port_value, key_width)
    return AttackResult(
        recovered_key=recovered,
        dip_count=dips,
        wall_time=time.perf_counter() - start,
        seed=seed,
        queries=getattr(oracle, "query_count", dips),
    )


def brute_force_attack(
    locked: Netlist,
    oracle,
    *,
    key_port: str = "key",
    max_key_bits: int = 24,
    max_input_bits: int = 20,
) -> AttackResult:
    """Independent baseline: test every key exhaustively against the oracle.

    Returns the full consistent-key set (recovered_key is its first
    member); used to cross-check the DIP attack and to realize the
    legal-class ambiguity measurement with the behavioral oracle.
    """
    start = time.perf_counter()
    key_width = locked.port(key_port).width
    if key_width > max_key_bits:
        raise KeyspaceTooLarge(f"{key_width} key bits exceed {max_key_bits}")
    in_ports = [p for p in locked.inputs if p.name != key_port]
    free_bits = sum(p.width for p in in_ports)
    if free_bits > max_input_bits:
        raise KeyspaceTooLarge(f"{free_bits} input bits exceed {max_input_bits}")

    if oracle.kind is OracleKind.EXACT:
        reference: list[int] = [0] * len(locked.output_nets())
        for slot in range(1 << free_bits):
            assignment = {}
            pos = 0
            for p in in_ports:
                assignment[p.name] = (slot >> pos) & ((1 << p.width) - 1)
                pos += p.width
            out = oracle.query(assignment)
            bit = 0
            for p in locked.outputs:
                for i in range(p.width):
                    if (out[p.name] >> i) & 1:
                        reference[bit] |= 1 << slot
                    bit += 1
        target = tuple(reference)
        accept = lambda sig: sig == target
    else:
        accept = oracle.accepts_signature

    consistent = []
    for k in range(1 << key_width):
        bits = format(k, f"0{key_width}b")
        sig = output_signature(locked, {key_port: port_value_from_bits(bits)})
        if accept(sig):
            consistent.append(bits)
    if not consistent:
        raise UnsatFromStart("no key is consistent with the oracle")
    return AttackResult(
        recovered_key=consistent[0],
        dip_count=0,
        wall_time=time.perf_counter() - start,
        seed=0,
        queries=getattr(oracle, "query_count", 0),
        consistent_keys=tuple(consistent),
    )
