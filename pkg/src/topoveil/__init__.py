"""topoveil: NoC interconnect topology obfuscation and evaluation toolkit.

Two obfuscation stages are covered: architectural switch redaction with an
activation package (keyed MUX groups over router links) and post-synthesis
keyed permutation switches over synthesis-preserved signals, plus the
machinery to evaluate both: legality enumeration, a bit-accurate package
loader, a synthesis-lite optimizer, connectivity matrices, workload
simulation, and oracle-guided SAT / brute-force attacks.
"""

from .errors import TopoveilError
from .topology import (
    Link,
    Node,
    NodeKind,
    Topology,
    TopologyClass,
    classify,
    degree_signature,
    is_legal,
    topology_equal,
    validate,
)
from .obnocs import (
    ActivationPackage,
    ObfuscatedDesign,
    count_legal,
    enumerate_keys,
    induce_topology,
    insert_switches,
    recover_key_for,
)
from .sipo import SipoRegister, clock, load_package, reset
from .netlist import Netlist, elaborate, parse, serialize, synthesize_lite
from .connectivity import ConnectivityMatrix, extract_connectivity, merge_connectivity
from .potent import (
    KeyedSystem,
    ObfSwitch,
    ObfuscatedRouter,
    apply_key,
    generate_switch,
    integrate,
    keyspace,
)
from .attack import (
    AttackResult,
    BehavioralOracle,
    ExactOracle,
    Verdict,
    brute_force_attack,
    sat_attack,
    to_cnf,
    verdict,
)
from .sim import Message, Workload, build_routes, compare_runs, run_dut
from .reports import ObfuscationLevel, OverheadReport, overhead_report

__version__ = "0.1.0"
