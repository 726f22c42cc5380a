"""Exception hierarchy for topoveil.

Every domain error raised by the library derives from :class:`TopoveilError`,
so callers (CLI, service) can map the whole family to one exit code / HTTP
status without enumerating subclasses.
"""


class TopoveilError(Exception):
    """Base class for all domain errors."""


# -- topology ---------------------------------------------------------------

class InvalidTopology(TopoveilError):
    """Operation requires a functional topology but validation found issues."""


class NodeSetMismatch(TopoveilError):
    """Two topologies that must share a node set do not."""


# -- obnocs transform -------------------------------------------------------

class RouterNotFound(TopoveilError):
    """Requested redaction target is not a router of the topology."""


class DegreeTooSmall(TopoveilError):
    """Router has fewer than two outgoing candidates; a switch is pointless."""


class BadStages(TopoveilError):
    """Stage count outside {1, 2}."""


class UnknownEndpoint(TopoveilError):
    """Extension endpoint does not resolve to an existing in-port."""


class KeyLengthMismatch(TopoveilError):
    """Key bitstring length differs from the design's key length."""


class KeyspaceTooLarge(TopoveilError):
    """Exhaustive enumeration requested beyond the configured bit cap."""


# -- ap loader --------------------------------------------------------------

class ZeroWidth(TopoveilError):
    """Shift register width must be at least one."""


class WidthMismatch(TopoveilError):
    """Activation package width differs from the register width."""


# -- netlist IR -------------------------------------------------------------

class SchemaError(TopoveilError):
    """Netlist JSON violates the schema or references undeclared names."""


class MultiDriverError(TopoveilError):
    """A net has more than one driver."""


class CombLoopError(TopoveilError):
    """The netlist contains a combinational cycle."""


class UnknownSignal(TopoveilError):
    """A referenced signal name does not exist in the netlist."""


class RouterMismatch(TopoveilError):
    """Connectivity matrices belong to different routers."""


class SignalWidthMismatch(TopoveilError):
    """Permuted signals must share one bit width."""


# -- potent switch ----------------------------------------------------------

class KeyWidthTooSmall(TopoveilError):
    """2^b < n!; the key space cannot index every permutation."""


class TooFewSignals(TopoveilError):
    """A permutation switch needs at least two preserved signals."""


class KeyOutOfRange(TopoveilError):
    """Key value outside the switch's key space (or not a valid mapping)."""


# -- attack harness ---------------------------------------------------------

class SequentialNetlist(TopoveilError):
    """CNF encoding requires a combinational netlist; cut DFFs first."""


class BudgetExhausted(TopoveilError):
    """Attack exceeded its oracle-query budget."""


class UnsatFromStart(TopoveilError):
    """No key is consistent with the oracle; instance over-constrained."""


# -- workload simulation ----------------------------------------------------

class NonFunctionalTopology(TopoveilError):
    """Routing tables can only be built over functional topologies."""


class WorkloadMismatch(TopoveilError):
    """DUT runs being compared were driven by different workloads."""


# -- reports ----------------------------------------------------------------

class LevelExceedsRouters(TopoveilError):
    """Obfuscation level demands more routers than the topology offers."""
