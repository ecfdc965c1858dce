"""Behavioral FeFET model.

A FeFET is a two-state threshold machine. Polarization switching follows the
nucleation-limited law ``t_sw(V) = t0 * exp(-(V - v0) / v_s)``: a write pulse
flips the state when its width reaches ``t_sw`` at its amplitude, and is a
no-op otherwise.

Arrays are programmed only through word lines (gate) and body contacts, with
an erase-then-selective-write scheme and V_W/2 inhibition of half-selected
cells (:func:`program_two_step`).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .errors import DimensionError, DomainError, ValidationError


class FeFETState(enum.Enum):
    LOW_VTH = "LVT"
    HIGH_VTH = "HVT"

    @classmethod
    def from_bit(cls, bit: int) -> "FeFETState":
        # storage convention: '1' <-> high V_TH, '0' <-> low V_TH
        return cls.HIGH_VTH if bit else cls.LOW_VTH

    def to_bit(self) -> int:
        return 1 if self is FeFETState.HIGH_VTH else 0


class Conduction(enum.Enum):
    OFF = 0
    ON = 1


def _nucleation_slope(v_write: float, t_write: float, t_half: float) -> float:
    return (v_write / 2) / math.log(t_half / t_write)


@dataclass(frozen=True)
class DeviceParams:
    """Threshold, bias and switching-law parameters of one FeFET technology.

    Defaults reproduce the two published anchors: ``t_sw(4 V) = 10 ns`` and a
    half-select exposure (2 V) that needs 10 ms to switch, four decades above
    the 1 us write pulse.
    """

    v_th_low: float = 0.2
    v_th_high: float = 1.4
    v_read: float = 0.8
    v_write: float = 4.0
    r_on: float = 10e3
    r_off: float = 10e6
    t0: float = 10e-9
    v0: float = 4.0
    v_s: float = _nucleation_slope(4.0, 10e-9, 10e-3)
    pulse_width: float = 1e-6

    def __post_init__(self) -> None:
        if not self.memory_window > 0:
            raise ValidationError("memory window must be positive", field="v_th_high")
        if not self.v_th_low < self.v_read < self.v_th_high:
            raise ValidationError("read bias must sit inside the memory window", field="v_read")
        if self.r_on <= 0 or self.r_off / self.r_on < 100:
            raise ValidationError("ON/OFF ratio must be at least 100", field="r_off")
        for name in ("t0", "v_s", "v_write", "pulse_width"):
            if getattr(self, name) <= 0:
                raise ValidationError("must be positive", field=name)

    @property
    def memory_window(self) -> float:
        return self.v_th_high - self.v_th_low

    @classmethod
    def calibrated(cls, t_at_write: float = 10e-9, t_at_half: float = 10e-3,
                   v_write: float = 4.0, **kw) -> "DeviceParams":
        """Solve the switching law for ``t_sw(v_write)`` and ``t_sw(v_write/2)``."""
        if not t_at_half > t_at_write > 0:
            raise DomainError("need 0 < t_sw(V_W) < t_sw(V_W/2)")
        return cls(v_write=v_write, t0=t_at_write, v0=v_write,
                   v_s=_nucleation_slope(v_write, t_at_write, t_at_half), **kw)


DEFAULT_PARAMS = DeviceParams()


@dataclass(frozen=True)
class WritePulse:
    amplitude: float  # signed gate-to-body voltage
    width: float

    def __post_init__(self) -> None:
        if not self.width > 0:
            raise DomainError(f"pulse width must be positive, got {self.width}")


def switching_time(params: DeviceParams, amplitude: float) -> float:
    """Time for a pulse of the given (positive) amplitude to flip polarization."""
    if not amplitude > 0:
        raise DomainError(f"switching time needs a positive amplitude, got {amplitude}")
    exponent = -(amplitude - params.v0) / params.v_s
    if exponent > 700:
        return math.inf
    return params.t0 * math.exp(exponent)


def apply_pulse(state: FeFETState, pulse: WritePulse,
                params: DeviceParams = DEFAULT_PARAMS) -> FeFETState:
    if pulse.amplitude == 0:
        return state
    if pulse.width < switching_time(params, abs(pulse.amplitude)):
        return state
    return FeFETState.LOW_VTH if pulse.amplitude > 0 else FeFETState.HIGH_VTH


def read_conductance(state: FeFETState, v_gate: float,
                     params: DeviceParams = DEFAULT_PARAMS) -> Conduction:
    vth = params.v_th_low if state is FeFETState.LOW_VTH else params.v_th_high
    return Conduction.ON if v_gate > vth else Conduction.OFF


@dataclass(frozen=True)
class FeFETArray:
    """rows x cols FeFETs; one word line per row, one body contact per column.

    Source/drain lines carry signals only and never appear in a pulse plan.
    """

    cells: tuple[tuple[FeFETState, ...], ...]

    @classmethod
    def filled(cls, rows: int, cols: int,
               state: FeFETState = FeFETState.HIGH_VTH) -> "FeFETArray":
        return cls(tuple(tuple(state for _ in range(cols)) for _ in range(rows)))

    @classmethod
    def from_bits(cls, bits) -> "FeFETArray":
        arr = np.atleast_2d(np.asarray(bits, dtype=int))
        return cls(tuple(tuple(FeFETState.from_bit(int(b)) for b in row) for row in arr))

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.cells), (len(self.cells[0]) if self.cells else 0)

    def to_bits(self) -> np.ndarray:
        return np.array([[c.to_bit() for c in row] for row in self.cells], dtype=np.uint8)

    def read(self, params: DeviceParams = DEFAULT_PARAMS) -> np.ndarray:
        """Sense every cell at V_READ: conducting -> 0, cut-off -> 1."""
        return np.array([[0 if read_conductance(c, params.v_read, params) is Conduction.ON else 1
                          for c in row] for row in self.cells], dtype=np.uint8)


@dataclass(frozen=True)
class BiasStep:
    """One write phase: terminal voltages held for ``width`` seconds."""

    label: str
    wl: tuple[float, ...]      # per programmed row
    body: tuple[float, ...]    # per column
    width: float
    neighbor_wl: tuple[float, ...] = ()   # rows sharing the bodies but not programmed

    def seen(self, row: int, col: int) -> float:
        return self.wl[row] - self.body[col]

    def neighbor_seen(self, row: int, col: int) -> float:
        return self.neighbor_wl[row] - self.body[col]


@dataclass(frozen=True)
class Disturb:
    row: int
    col: int
    neighbor: bool
    worst_amplitude: float
    exposure: float   # accumulated fraction of t_sw toward the unwanted state


@dataclass(frozen=True)
class ProgramResult:
    plan: tuple[BiasStep, ...]
    array: FeFETArray
    disturbs: tuple[Disturb, ...]
    neighbors: tuple[tuple[FeFETState, ...], ...] = field(default=())


def program_two_step(array: FeFETArray, target, params: DeviceParams = DEFAULT_PARAMS,
                     neighbors: Sequence[Sequence[FeFETState]] = (),
                     neighbor_bias: float | None = None) -> ProgramResult:
    """Erase the block to low-V_TH, then write '1' cells to high-V_TH row by row.

    Step 1 drives every word line to +V_W with bodies grounded. Step 2, for
    each row holding a '1', grounds that row's word line and raises the body
    of target columns to V_W and of the other columns to V_W/2; unselected
    rows sit at V_W/2. Every cell not being written therefore sees at most
    V_W/2.

    ``neighbors`` are rows of another configuration block that share the
    body contacts (e.g. the active plane of a dual LUT) held at
    ``neighbor_bias`` (default V_READ). They receive the same pulses and are
    returned in ``ProgramResult.neighbors``.

    The disturb report lists every cell, programmed or neighboring, whose
    accumulated exposure toward the wrong state reached one full ``t_sw``.
    """
    tgt = np.atleast_2d(np.asarray(target, dtype=int))
    rows, cols = array.shape
    if tgt.shape != (rows, cols):
        raise DimensionError(f"target shape {tgt.shape} does not match array {(rows, cols)}")
    if not np.isin(tgt, (0, 1)).all():
        raise DomainError("target must be a 0/1 matrix")
    nb = [list(r) for r in neighbors]
    if any(len(r) != cols for r in nb):
        raise DimensionError("neighbor rows must span the same columns")
    vw = params.v_write
    hold = params.v_read if neighbor_bias is None else neighbor_bias
    w = params.pulse_width

    plan = [BiasStep("erase", wl=(vw,) * rows, body=(0.0,) * cols, width=w,
                     neighbor_wl=(hold,) * len(nb))]
    for r in range(rows):
        if not tgt[r].any():
            continue
        wl = tuple(0.0 if i == r else vw / 2 for i in range(rows))
        body = tuple(vw if tgt[r, c] else vw / 2 for c in range(cols))
        plan.append(BiasStep(f"write-row{r}", wl=wl, body=body, width=w,
                             neighbor_wl=(hold,) * len(nb)))

    cells = [list(row) for row in array.cells]
    exposure: dict[tuple[int, int, bool], list[float]] = {}

    def expose(key, amplitude, width, wanted):
        # accumulate nucleation progress toward the state this cell must not take
        if amplitude == 0:
            return
        pushes_to = FeFETState.LOW_VTH if amplitude > 0 else FeFETState.HIGH_VTH
        if wanted is not None and pushes_to is wanted:
            return
        frac = width / switching_time(params, abs(amplitude))
        acc = exposure.setdefault(key, [0.0, 0.0])
        acc[0] += frac
        acc[1] = amplitude if abs(amplitude) > abs(acc[1]) else acc[1]

    for i, step in enumerate(plan):
        for r in range(rows):
            for c in range(cols):
                a = step.seen(r, c)
                cells[r][c] = apply_pulse(cells[r][c], WritePulse(a, step.width), params)
                if i > 0:   # erase drives everything to LOW_VTH on purpose
                    expose((r, c, False), a, step.width, FeFETState.from_bit(tgt[r, c]))
        for r, row in enumerate(nb):
            for c in range(cols):
                a = step.neighbor_seen(r, c)
                original = neighbors[r][c]
                row[c] = apply_pulse(row[c], WritePulse(a, step.width), params)
                expose((r, c, True), a, step.width, original)

    disturbs = tuple(
        Disturb(r, c, is_nb, worst, frac)
        for (r, c, is_nb), (frac, worst) in sorted(exposure.items())
        if frac >= 1.0
    )
    return ProgramResult(tuple(plan), FeFETArray(tuple(tuple(r) for r in cells)), disturbs,
                         tuple(tuple(r) for r in nb))


def with_overrides(params: DeviceParams, **kw) -> DeviceParams:
    return replace(params, **{k: v for k, v in kw.items() if v is not None})
