"""Bit-accurate model of the activation-package load circuit.

A serial-in parallel-out register bank, clock-gated by a load-enable
signal, in the style of a scan chain. Conventions (frozen):

* ``state`` is a bitstring; index 0 is the serial end. An enabled clock
  shifts everything one place toward higher indices and the new bit enters
  at index 0; the oldest bit falls off. Disabled clocks are no-ops.
* ``load_package`` streams the package last-bit-first, so that after
  exactly ``width`` enabled cycles ``state == package.bits`` and the bit at
  the serial end is the most significant select bit of the first canonical
  lane. One trailing gated cycle records the de-assert.

Parallel outputs are exposed continuously while shifting; real hardware
may latch them only at de-assert, which changes nothing observable here.
"""

from __future__ import annotations

import io
from dataclasses import dataclass

from .errors import WidthMismatch, ZeroWidth
from .obnocs import ActivationPackage, key_bits_to_hex


@dataclass(frozen=True)
class SipoRegister:
    width: int
    state: str
    load_enabled: bool


@dataclass(frozen=True)
class TraceStep:
    cycle: int
    ap_in: int
    load_en: int
    state: str


@dataclass(frozen=True)
class LoadTrace:
    steps: tuple[TraceStep, ...]

    def __iter__(self):
        return iter(self.steps)

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("cycle,ap_in,load_en,state_hex\n")
        for s in self.steps:
            buf.write(f"{s.cycle},{s.ap_in},{s.load_en},{key_bits_to_hex(s.state)}\n")
        return buf.getvalue()


def reset(width: int) -> SipoRegister:
    if width < 1:
        raise ZeroWidth(f"width must be >= 1, got {width}")
    return SipoRegister(width=width, state="0" * width, load_enabled=False)


def clock(r: SipoRegister, ap_in: int, load_en: int) -> SipoRegister:
    """One clock edge; shifts only while load_en is asserted (clock gating)."""
    if not load_en:
        return SipoRegister(r.width, r.state, load_enabled=False)
    bit = "1" if ap_in else "0"
    return SipoRegister(r.width, bit + r.state[:-1], load_enabled=True)


def load_package(r: SipoRegister, ap: ActivationPackage) -> tuple[SipoRegister, LoadTrace]:
    """Shift a whole package in, then de-assert; returns register and trace."""
    if r.width != len(ap.bits):
        raise WidthMismatch(f"register width {r.width} != package width {len(ap.bits)}")
    steps = []
    for cycle in range(r.width):
        bit = int(ap.bits[r.width - 1 - cycle])
        r = clock(r, bit, 1)
        steps.append(TraceStep(cycle, bit, 1, r.state))
    r = clock(r, 0, 0)
    steps.append(TraceStep(r.width, 0, 0, r.state))
    return r, LoadTrace(tuple(steps))
