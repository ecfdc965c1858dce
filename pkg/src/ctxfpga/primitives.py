"""Configurable primitives built from FeFET states.

* :class:`LutConfig` - a k-input LUT, one FeFET per truth-table entry.
* :class:`DualLut` - two LUT planes behind a select mux.
* :class:`DualSwitch` - the 2T-2FeFET routing element used in CBs and SBs:
  two FeFET branches, each gated by a serial enable transistor.
* :class:`DualBit` - a plain two-plane register bit (flip-flop init value).

LUT inputs index the truth table little-endian: input 0 is the least
significant bit of the cell index.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple, Sequence, Union

from .device import (
    DEFAULT_PARAMS,
    Conduction,
    DeviceParams,
    FeFETArray,
    FeFETState,
    ProgramResult,
    program_two_step,
    read_conductance,
)
from .errors import ContextInUseError, DimensionError, DomainError

CONTEXTS = (1, 2)


def _check_ctx(ctx: int) -> int:
    if ctx not in CONTEXTS:
        raise DomainError(f"context id must be 1 or 2, got {ctx!r}")
    return ctx


def truth_index(inputs: Sequence[int]) -> int:
    idx = 0
    for i, bit in enumerate(inputs):
        if bit:
            idx |= 1 << i
    return idx


@dataclass(frozen=True)
class LutConfig:
    k: int
    cells: tuple[FeFETState, ...]
    v_b: float = 0.5   # pull-up PMOS gate bias; the sense amp is treated as ideal
    params: DeviceParams = DEFAULT_PARAMS

    def __post_init__(self) -> None:
        if not 0 <= self.k <= 6:
            raise DomainError(f"LUT arity must be in [0, 6], got {self.k}")
        if len(self.cells) != 1 << self.k:
            raise DimensionError(f"{self.k}-LUT needs {1 << self.k} cells, got {len(self.cells)}")

    @classmethod
    def from_bits(cls, bits: Sequence[int], params: DeviceParams = DEFAULT_PARAMS) -> "LutConfig":
        n = len(bits)
        k = n.bit_length() - 1
        if n == 0 or 1 << k != n:
            raise DimensionError(f"truth table length must be a power of two, got {n}")
        return cls(k, tuple(FeFETState.from_bit(int(b)) for b in bits), params=params)

    @property
    def bits(self) -> tuple[int, ...]:
        return tuple(_sense(c, self.params) for c in self.cells)

    def as_array(self) -> FeFETArray:
        return FeFETArray((self.cells,))


def _sense(cell: FeFETState, params: DeviceParams) -> int:
    # conducting FeFET overpowers the pull-up: output low; cut-off: output high
    return 0 if read_conductance(cell, params.v_read, params) is Conduction.ON else 1


def lut_eval(lut: LutConfig, inputs: Sequence[int]) -> int:
    if len(inputs) != lut.k:
        raise DimensionError(f"{lut.k}-LUT evaluated with {len(inputs)} inputs")
    return _sense(lut.cells[truth_index(inputs)], lut.params)


class DualLut:
    """Two LUT planes; the select mux routes only the active plane to the output."""

    def __init__(self, k: int, planes: Sequence[Sequence[int]] | None = None, active: int = 1,
                 params: DeviceParams = DEFAULT_PARAMS):
        self.k = k
        self.params = params
        zeros = [0] * (1 << k)
        init = planes or (zeros, zeros)
        self.planes = [LutConfig.from_bits(list(p), params) for p in init]
        if any(p.k != k for p in self.planes):
            raise DimensionError("plane size does not match k")
        self.active = _check_ctx(active)
        self.last_program: ProgramResult | None = None

    def plane(self, ctx: int) -> LutConfig:
        return self.planes[_check_ctx(ctx) - 1]

    def switch(self, ctx: int) -> None:
        self.active = _check_ctx(ctx)

    def program(self, ctx: int, bits: Sequence[int], *, running: bool = True) -> ProgramResult:
        """Two-step program plane *ctx*; the other plane shares the body contacts.

        With ``running`` the other plane is held at V_READ (it is being read)
        and suffers whatever the bias scheme does to it.
        """
        ctx = _check_ctx(ctx)
        if len(bits) != 1 << self.k:
            raise DimensionError(f"{self.k}-LUT plane needs {1 << self.k} bits, got {len(bits)}")
        other = 2 if ctx == 1 else 1
        res = _program_row(self.plane(ctx).cells, tuple(int(b) for b in bits),
                           self.plane(other).cells, running, self.params)
        self.planes[ctx - 1] = LutConfig(self.k, res.array.cells[0], params=self.params)
        self.planes[other - 1] = LutConfig(self.k, res.neighbors[0], params=self.params)
        self.last_program = res
        return res


def dual_lut_eval(d: DualLut, inputs: Sequence[int]) -> int:
    return lut_eval(d.planes[d.active - 1], inputs)


class SwitchOutput(NamedTuple):
    passed: bool
    level: int   # blocked outputs read as logic low


BLOCKED = SwitchOutput(False, 0)


@dataclass
class Branch:
    state: FeFETState
    enable: bool


class DualSwitch:
    """2T-2FeFET routing switch: a branch conducts iff it is the active one,
    its enable transistor is on and its FeFET is low-V_TH."""

    def __init__(self, states: Sequence[FeFETState] = (FeFETState.HIGH_VTH, FeFETState.HIGH_VTH),
                 active: int = 1, params: DeviceParams = DEFAULT_PARAMS):
        self.params = params
        self.active = _check_ctx(active)
        self.branches = [Branch(s, enable=(i + 1 == self.active)) for i, s in enumerate(states)]
        self.last_program: ProgramResult | None = None

    @classmethod
    def closed(cls, ctx_on: Sequence[bool], active: int = 1, params: DeviceParams = DEFAULT_PARAMS):
        return cls([FeFETState.LOW_VTH if on else FeFETState.HIGH_VTH for on in ctx_on], active, params)

    def gate_bias(self, ctx: int) -> float:
        # de-activated branch: read bias removed, FeFET cut off irrespective of state
        return self.params.v_read if ctx == self.active else 0.0

    def conducts(self, ctx: int) -> bool:
        b = self.branches[ctx - 1]
        return b.enable and read_conductance(b.state, self.gate_bias(ctx), self.params) is Conduction.ON

    def is_on(self, ctx: int) -> bool:
        """Configured connection of plane *ctx* (independent of which is active)."""
        return read_conductance(self.branches[ctx - 1].state, self.params.v_read, self.params) is Conduction.ON

    def switch(self, ctx: int) -> None:
        self.active = _check_ctx(ctx)
        for i, b in enumerate(self.branches):
            b.enable = i + 1 == self.active

    def program(self, ctx: int, state: FeFETState, *, running: bool = True) -> ProgramResult:
        ctx = _check_ctx(ctx)
        other = 2 if ctx == 1 else 1
        target = self.branches[ctx - 1]
        target.enable = False
        res = _program_cell(target.state, state, self.branches[other - 1].state, running, self.params)
        target.state = res.array.cells[0][0]
        self.branches[other - 1].state = res.neighbors[0][0]
        target.enable = ctx == self.active
        self.last_program = res
        return res


@lru_cache(maxsize=4096)
def _program_row(old: tuple[FeFETState, ...], bits: tuple[int, ...], neighbor: tuple[FeFETState, ...],
                 running: bool, params: DeviceParams) -> ProgramResult:
    return program_two_step(FeFETArray((old,)), [list(bits)], params, neighbors=[neighbor],
                            neighbor_bias=params.v_read if running else 0.0)


@lru_cache(maxsize=None)
def _program_cell(old: FeFETState, new: FeFETState, neighbor: FeFETState, running: bool,
                  params: DeviceParams) -> ProgramResult:
    # fabrics hold thousands of identical switches; the pulse outcome only
    # depends on these arguments
    return program_two_step(FeFETArray(((old,),)), [[new.to_bit()]], params,
                            neighbors=[(neighbor,)],
                            neighbor_bias=params.v_read if running else 0.0)


def switch_transmit(s: DualSwitch, input_level: int) -> SwitchOutput:
    if s.conducts(s.active):
        return SwitchOutput(True, 1 if input_level else 0)
    return BLOCKED


class DualBit:
    """A two-plane configuration register bit."""

    def __init__(self, values: Sequence[int] = (0, 0), active: int = 1):
        self.values = [int(v) for v in values]
        self.active = _check_ctx(active)

    def switch(self, ctx: int) -> None:
        self.active = _check_ctx(ctx)

    def program(self, ctx: int, value: int, *, running: bool = True) -> None:
        self.values[_check_ctx(ctx) - 1] = 1 if value else 0

    @property
    def value(self) -> int:
        return self.values[self.active - 1]


Primitive = Union[DualLut, DualSwitch, DualBit]


def reprogram_inactive(p: Primitive, ctx_id: int, new_bits) -> Primitive:
    """Load new configuration into the plane/branch that is not active.

    For a :class:`DualSwitch`, ``new_bits`` is either a :class:`FeFETState`
    or a connection flag (truthy = conducting = low-V_TH).
    """
    _check_ctx(ctx_id)
    if ctx_id == p.active:
        raise ContextInUseError(f"context {ctx_id} is active and cannot be reprogrammed")
    if isinstance(p, DualSwitch):
        if not isinstance(new_bits, FeFETState):
            if isinstance(new_bits, (list, tuple)):
                (new_bits,) = new_bits
            new_bits = FeFETState.LOW_VTH if new_bits else FeFETState.HIGH_VTH
        p.program(ctx_id, new_bits)
    elif isinstance(p, DualBit):
        p.program(ctx_id, new_bits if isinstance(new_bits, int) else new_bits[0])
    else:
        p.program(ctx_id, list(new_bits))
    return p
