"""Virtual-time model of the two configuration planes.

A :class:`ContextStore` wraps anything configurable: a whole
:class:`~ctxfpga.fabric.runtime.Fabric` or a single primitive in a
:class:`PrimitiveHarness`. Loads, switches and evaluations are events on one
virtual timeline. A load streams bits at ``rate`` from ``t_start``. Each
primitive's bit group commits atomically as soon as the stream has delivered
all of its bits, so a half-programmed primitive is never observable. The
load ends at exactly ``t_start + bits / rate``.

Switching re-targets every LUT, CB and SB in one step (planes are not
switched independently), takes ``switch_latency`` (1 ns by default), and
re-initializes the flip-flops from the new plane's init bits.
"""

from __future__ import annotations

import enum
import zlib
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .device import FeFETState
from .errors import ContextInUseError, DomainError, NotReadyError
from .primitives import (
    DualLut,
    DualSwitch,
    Primitive,
    _check_ctx,
    dual_lut_eval,
    reprogram_inactive,
    switch_transmit,
)

DEFAULT_SWITCH_LATENCY = 1e-9


class LoadState(enum.Enum):
    IDLE = "IDLE"
    LOADING = "LOADING"
    COMPLETE = "COMPLETE"


class EventKind(str, enum.Enum):
    LOAD_START = "load-start"
    LOAD_END = "load-end"
    SWITCH = "switch"
    EVAL = "eval"


@dataclass(frozen=True)
class Event:
    time: float
    kind: EventKind
    ctx: int
    digest: str = ""
    latency: float = 0.0

    def to_line(self) -> str:
        return f"{self.time!r}\t{self.kind.value}\t{self.ctx}\t{self.digest}"

    @classmethod
    def from_line(cls, line: str) -> "Event":
        t, kind, ctx, digest = line.rstrip("\n").split("\t")
        return cls(float(t), EventKind(kind), int(ctx), digest)


@dataclass
class EventTrace:
    events: list[Event] = field(default_factory=list)

    def append(self, e: Event) -> Event:
        if self.events and e.time < self.events[-1].time:
            raise DomainError(f"event at {e.time} precedes the last event at {self.events[-1].time}")
        self.events.append(e)
        return e

    def to_text(self) -> str:
        return "".join(e.to_line() + "\n" for e in self.events)

    @classmethod
    def from_text(cls, text: str) -> "EventTrace":
        return cls([Event.from_line(l) for l in text.splitlines() if l.strip()])

    def records(self) -> list[dict]:
        return [{"record": "event", "time_s": e.time, "event": e.kind.value, "ctx": e.ctx,
                 "digest": e.digest} for e in self.events]

    def kinds(self) -> list[str]:
        return [e.kind.value for e in self.events]


def digest(data) -> str:
    if isinstance(data, np.ndarray):
        raw = data.astype(np.uint8).tobytes()
    else:
        raw = repr(data).encode()
    return f"{zlib.crc32(raw):08x}"


class PrimitiveHarness:
    """Presents one dual-plane primitive with the configurable-target API."""

    def __init__(self, prim: DualLut | DualSwitch):
        self.prim = prim
        width = 1 << prim.k if isinstance(prim, DualLut) else 1
        self.groups: list[tuple[Primitive, int, int]] = [(prim, 0, width)]

    @property
    def active(self) -> int:
        return self.prim.active

    def load_group(self, index: int, ctx: int, bits: np.ndarray) -> None:
        if isinstance(self.prim, DualSwitch):
            reprogram_inactive(self.prim, ctx, FeFETState.LOW_VTH if bits[0] else FeFETState.HIGH_VTH)
        else:
            reprogram_inactive(self.prim, ctx, [int(b) for b in bits])

    def switch(self, ctx: int) -> None:
        self.prim.switch(ctx)

    def reset(self) -> None:
        pass

    @property
    def ff_state(self) -> list[int]:
        return []

    @ff_state.setter
    def ff_state(self, value) -> None:
        pass

    def evaluate(self, vec: Sequence[int], io=None) -> tuple[int, ...]:
        if isinstance(self.prim, DualLut):
            return (dual_lut_eval(self.prim, list(vec)),)
        return (switch_transmit(self.prim, vec[0]).level,)


@dataclass
class Plane:
    state: LoadState = LoadState.IDLE
    bits: np.ndarray | None = None
    n_bits: int = 0
    start: float = 0.0
    end: float = 0.0
    rate: float = 0.0
    committed: int = 0          # groups committed so far
    io: object = None           # IoMap of the design held by the plane
    label: str = ""


@dataclass(frozen=True)
class LoadAction:
    ctx: int
    bits: object                # Bitstream, bit vector, or a plain bit count
    t_start: float
    rate: float
    io: object = None
    label: str = ""


def _as_bits(bits) -> tuple[np.ndarray | None, int]:
    if isinstance(bits, (int, np.integer)):
        return None, int(bits)
    if hasattr(bits, "bits"):
        bits = bits.bits
    arr = np.asarray(bits, dtype=np.uint8)
    return arr, int(arr.size)


class ContextStore:
    def __init__(self, target=None, switch_latency: float = DEFAULT_SWITCH_LATENCY,
                 loaded: Sequence[int] = (1,), io: dict[int, object] | None = None,
                 reset_on_switch: bool = True):
        if switch_latency < 0:
            raise DomainError("switch latency must be non-negative")
        self.target = target
        self.switch_latency = switch_latency
        self.reset_on_switch = reset_on_switch
        self.planes = {1: Plane(), 2: Plane()}
        for c in loaded:
            self.planes[_check_ctx(c)].state = LoadState.COMPLETE
        for c, m in (io or {}).items():
            self.planes[c].io = m
        self.active = target.active if target is not None else 1
        self.trace = EventTrace()
        self.now = 0.0
        self.ready_at = 0.0

    def _log(self, e: Event) -> Event:
        self.now = max(self.now, e.time)
        return self.trace.append(e)

    def load_state(self, ctx: int) -> LoadState:
        return self.planes[_check_ctx(ctx)].state

    def begin_load(self, ctx: int, bits, t_start: float, rate: float, io=None, label: str = "") -> Event:
        ctx = _check_ctx(ctx)
        if ctx == self.active:
            raise ContextInUseError(f"context {ctx} is active; load the inactive plane")
        if not rate > 0:
            raise DomainError("load rate must be positive")
        self.advance(t_start)
        p = self.planes[ctx]
        if p.state is LoadState.LOADING:
            raise NotReadyError(f"context {ctx} is still loading")
        arr, n = _as_bits(bits)
        if n <= 0:
            raise DomainError("bitstream must hold at least one bit")
        self.planes[ctx] = Plane(LoadState.LOADING, arr, n, t_start, t_start + n / rate, rate,
                                 0, io, label)
        return self._log(Event(t_start, EventKind.LOAD_START, ctx,
                               digest(arr) if arr is not None else f"{n}b"))

    def advance(self, t: float) -> None:
        """Commit whatever the active loads have delivered by time *t*."""
        for ctx in (1, 2):
            p = self.planes[ctx]
            if p.state is not LoadState.LOADING:
                continue
            done = p.n_bits if t >= p.end else int((t - p.start) * p.rate)
            if self.target is not None and p.bits is not None:
                groups = self.target.groups
                while p.committed < len(groups):
                    _, off, width = groups[p.committed]
                    if off + width > done:
                        break
                    self.target.load_group(p.committed, ctx, p.bits)
                    p.committed += 1
            if t >= p.end:
                p.state = LoadState.COMPLETE
                self._log(Event(p.end, EventKind.LOAD_END, ctx, digest(p.bits) if p.bits is not None
                                else f"{p.n_bits}b"))

    def switch_context(self, ctx: int, t: float) -> Event:
        ctx = _check_ctx(ctx)
        self.advance(t)
        if ctx == self.active:
            return Event(t, EventKind.SWITCH, ctx, "noop", 0.0)
        p = self.planes[ctx]
        if p.state is LoadState.LOADING:
            raise NotReadyError(f"context {ctx} is still loading until t={p.end!r}")
        if p.state is LoadState.IDLE:
            raise NotReadyError(f"context {ctx} was never loaded")
        if self.target is not None:
            self.target.switch(ctx)
            if self.reset_on_switch:
                self.target.reset()
        self.active = ctx
        self.ready_at = t + self.switch_latency
        return self._log(Event(t, EventKind.SWITCH, ctx, f"{self.switch_latency!r}s",
                               self.switch_latency))

    def eval(self, vec: Sequence[int], t: float, io=None) -> tuple[int, ...]:
        if t < self.ready_at:
            raise NotReadyError(f"context switch completes at t={self.ready_at!r}")
        self.advance(t)
        io = io if io is not None else self.planes[self.active].io
        out = self.target.evaluate(vec, io)
        self._log(Event(t, EventKind.EVAL, self.active, "".join(map(str, out))))
        return out


def begin_load(store: ContextStore, ctx_id: int, bitstream, t_start: float, load_rate: float) -> Event:
    return store.begin_load(ctx_id, bitstream, t_start, load_rate)


def switch_context(store: ContextStore, ctx_id: int, t: float) -> Event:
    return store.switch_context(ctx_id, t)


@dataclass
class CoSimResult:
    with_load: list[tuple[int, ...]]
    without_load: list[tuple[int, ...]]
    equal: bool
    trace: EventTrace


def co_simulate(store: ContextStore, vectors: Sequence[Sequence[int]], plan: Sequence[LoadAction] = (),
                t0: float = 0.0, period: float = 10e-9, io=None) -> CoSimResult:
    """Run *vectors* on the active plane once undisturbed and once while *plan*
    streams into the inactive plane, on the same virtual-time grid."""
    for a in plan:
        if a.ctx == store.active:
            raise ContextInUseError(f"load plan targets active context {a.ctx}")
    times = [t0 + i * period for i in range(len(vectors))]
    saved_ff = list(store.target.ff_state)

    without = [store.target.evaluate(v, io if io is not None else store.planes[store.active].io)
               for v in vectors]
    store.target.ff_state = list(saved_ff)

    pending = sorted(plan, key=lambda a: a.t_start)
    with_load = []
    for t, vec in zip(times, vectors):
        while pending and pending[0].t_start <= t:
            a = pending.pop(0)
            store.begin_load(a.ctx, a.bits, a.t_start, a.rate, a.io, a.label)
        with_load.append(store.eval(vec, t, io))
    for a in pending:   # loads that start after the last evaluation still run to completion
        store.begin_load(a.ctx, a.bits, a.t_start, a.rate, a.io, a.label)
    if plan:
        store.advance(max(max(p.end for p in store.planes.values()), store.now))
    return CoSimResult(with_load, without, with_load == without, store.trace)


# ----------------------------------------------------- CB experiment replay

@dataclass
class ReplayResult:
    outputs: list[int]          # one sample per phase, A then B, per cycle
    stable: bool                # every phase read the same before and after its load
    trace: EventTrace


def replay_cb_experiment(branch1: FeFETState, branch2: FeFETState, cycles: int = 3,
                         phase: float = 10e-6, write_time: float = 2e-6) -> ReplayResult:
    """Re-enact the run-time configure-and-switch test of one dual CB switch.

    Both branches start high-V_TH (state initialization). Each cycle has a
    phase A, with branch 2 active while branch 1 is programmed to *branch1*,
    then a phase B, with branch 1 active while branch 2 is programmed to
    *branch2*. The input is held high, so a sample reads 1 when the active
    branch passes and 0 when it blocks.
    """
    sw = DualSwitch((FeFETState.HIGH_VTH, FeFETState.HIGH_VTH), active=2)
    store = ContextStore(PrimitiveHarness(sw), loaded=(1, 2))
    rate = 1 / write_time   # one bit, erase plus write pulse
    outs, stable = [], True
    for cycle in range(cycles):
        for k, (active, target, state) in enumerate(((2, 1, branch1), (1, 2, branch2))):
            t = (2 * cycle + k) * phase
            store.switch_context(active, t)
            t_eval = t + store.switch_latency
            before = store.eval([1], t_eval)
            store.begin_load(target, [1 if state is FeFETState.LOW_VTH else 0], t_eval, rate)
            after = store.eval([1], t_eval + write_time)
            stable &= before == after
            outs.append(after[0])
    return ReplayResult(outs, stable, store.trace)
