"""A configurable dual-context fabric built from device-level primitives.

Every LUT is a :class:`DualLut` and every programmable connection (BLE
output select, local crossbar, CB, SB) a :class:`DualSwitch`. Loading a
bitstream programs each primitive's plane through the two-step scheme.

Evaluation derives connectivity only from what the active plane conducts:
starting at every driving pin, it follows conducting switches to the input
pins they reach. Every cycle then pushes values through each switch on those
paths with :func:`switch_transmit` and through each LUT with
:func:`dual_lut_eval`, so a disturbed switch or cell shows up in the output.
Flip-flop outputs break combinational dependencies; an unbroken loop is a
:class:`CycleError`.

The flip-flops themselves are ordinary registers shared by both contexts.
"""

from __future__ import annotations

import graphlib
from collections import deque
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from ..device import DEFAULT_PARAMS, DeviceParams, FeFETState
from ..errors import ContextInUseError, CycleError, DimensionError
from ..primitives import (
    DualBit,
    DualLut,
    DualSwitch,
    Primitive,
    _check_ctx,
    dual_lut_eval,
    reprogram_inactive,
    switch_transmit,
)
from .arch import FabricArch, NodeKind, SwitchKind, build_rrgraph
from .bitstream import Bitstream, Layout, generate_bitstream
from .netlist import Netlist, simulate_netlist
from .route import RoutedDesign

Pad = tuple[int, int, int]


@dataclass(frozen=True)
class IoMap:
    inputs: tuple[Pad, ...]
    outputs: tuple[Pad, ...]

    @classmethod
    def of(cls, r: RoutedDesign) -> "IoMap":
        n = r.netlist
        return cls(tuple(r.placement.sites[f"in:{i}"] for i in n.inputs),
                   tuple(r.placement.sites[f"out:{o}"] for o in n.outputs))


def _switch_state(bit) -> FeFETState:
    return FeFETState.LOW_VTH if bit else FeFETState.HIGH_VTH


class Fabric:
    def __init__(self, arch: FabricArch, params: DeviceParams = DEFAULT_PARAMS):
        self.arch = arch
        self.params = params
        self.layout = Layout(arch)
        self.rrg = build_rrgraph(arch)
        a = arch
        n_src = self.layout.xbar_sources
        n_bles = a.n_clb * a.n_ble
        self.luts = [DualLut(a.k, params=params) for _ in range(n_bles)]
        self.out_lut = [DualSwitch(params=params) for _ in range(n_bles)]
        self.out_ff = [DualSwitch(params=params) for _ in range(n_bles)]
        self.ff_init = [DualBit() for _ in range(n_bles)]
        self.xbar = [[DualSwitch(params=params) for _ in range(a.k * n_src)] for _ in range(n_bles)]
        self.routing = [DualSwitch(params=params) for _ in self.rrg.switches]
        self.ff_state = [0] * n_bles
        self.active = 1
        self.version = 0
        self._plan_cache: tuple[int, _Plan] | None = None

        self.groups: list[tuple[Primitive, int, int]] = []
        for i in range(n_bles):
            base = i * self.layout.ble_bits
            self.groups.append((self.luts[i], base, self.layout.lut_bits))
            self.groups.append((self.out_lut[i], self.layout.out_lut(base), 1))
            self.groups.append((self.out_ff[i], self.layout.out_ff(base), 1))
            self.groups.append((self.ff_init[i], self.layout.ff_init(base), 1))
            for s_idx, sw in enumerate(self.xbar[i]):
                self.groups.append((sw, self.layout.xbar(base, 0, 0) + s_idx, 1))
        for sid, sw in enumerate(self.routing):
            self.groups.append((sw, self.layout.switch(sid), 1))

    @property
    def primitives(self) -> Iterable[Primitive]:
        return (p for p, _, _ in self.groups)

    # ---------------------------------------------------------- configuration

    def load_group(self, index: int, ctx: int, bits: np.ndarray) -> None:
        """Program one primitive's plane *ctx* from the full bit vector."""
        p, off, width = self.groups[index]
        chunk = bits[off:off + width]
        if isinstance(p, DualSwitch):
            reprogram_inactive(p, ctx, _switch_state(chunk[0]))
        elif isinstance(p, DualBit):
            reprogram_inactive(p, ctx, int(chunk[0]))
        else:
            reprogram_inactive(p, ctx, [int(b) for b in chunk])
        self.version += 1

    def load(self, ctx: int, bs: Bitstream | np.ndarray) -> None:
        bits = bs.bits if isinstance(bs, Bitstream) else bs
        if ctx == self.active:
            raise ContextInUseError(f"context {ctx} is active and cannot be reprogrammed")
        for i in range(len(self.groups)):
            self.load_group(i, ctx, bits)

    def power_on(self, bs: Bitstream | np.ndarray, ctx: int = 1) -> None:
        """Initial configuration with the fabric idle, then activate *ctx*."""
        bits = bs.bits if isinstance(bs, Bitstream) else bs
        if bits.shape != (self.layout.length,):
            raise DimensionError("bitstream does not match the fabric")
        _check_ctx(ctx)
        for p, off, width in self.groups:
            chunk = bits[off:off + width]
            if isinstance(p, DualSwitch):
                p.program(ctx, _switch_state(chunk[0]), running=False)
            elif isinstance(p, DualBit):
                p.program(ctx, int(chunk[0]), running=False)
            else:
                p.program(ctx, [int(b) for b in chunk], running=False)
        self.switch(ctx)
        self.reset()
        self.version += 1

    def switch(self, ctx: int) -> None:
        _check_ctx(ctx)
        for p in self.primitives:
            p.switch(ctx)
        self.active = ctx
        self.version += 1

    def reset(self) -> None:
        self.ff_state = [b.value for b in self.ff_init]

    def plane_bits(self, ctx: int) -> np.ndarray:
        """Read back plane *ctx* of every primitive as a bitstream vector."""
        bits = np.zeros(self.layout.length, dtype=np.uint8)
        for p, off, width in self.groups:
            if isinstance(p, DualSwitch):
                bits[off] = p.is_on(ctx)
            elif isinstance(p, DualBit):
                bits[off] = p.values[ctx - 1]
            else:
                bits[off:off + width] = p.plane(ctx).bits
        return bits

    # ------------------------------------------------------------ evaluation

    def _plan(self) -> "_Plan":
        if self._plan_cache is None or self._plan_cache[0] != self.version:
            self._plan_cache = (self.version, _Plan(self))
        return self._plan_cache[1]

    def step(self, inputs: dict[Pad, int], outputs: Sequence[Pad]) -> tuple[int, ...]:
        plan = self._plan()
        g = self.rrg
        opin_val: dict[int, int] = {}
        for (x, y, z), v in inputs.items():
            opin_val[g.node(NodeKind.OPIN, x, y, z)] = 1 if v else 0
        ipin_cache: dict[int, int] = {}

        def ipin_value(node: int) -> int:
            if node not in ipin_cache:
                level = 0
                for src, path in plan.ipin_sources.get(node, ()):
                    v = opin_val.get(src, 0)
                    for sid in path:
                        v = switch_transmit(self.routing[sid], v).level
                    level |= v
                ipin_cache[node] = level
            return ipin_cache[node]

        lut_val: dict[int, int] = {}
        ble_out: dict[int, int] = {}
        # register-only outputs are known before any LUT settles
        for i in plan.registered_only:
            ble_out[i] = switch_transmit(self.out_ff[i], self.ff_state[i]).level
            opin_val[plan.opin_of[i]] = ble_out[i]
        for i in plan.order:
            ins = []
            for j, srcs in enumerate(plan.xbar_sources[i]):
                level = 0
                for s_idx, src in srcs:
                    if src[0] == "pin":
                        v = ipin_value(src[1])
                    else:
                        v = ble_out.get(src[1], 0)
                    level |= switch_transmit(self.xbar[i][s_idx], v).level
                ins.append(level)
            lut_val[i] = dual_lut_eval(self.luts[i], ins)
            out = (switch_transmit(self.out_lut[i], lut_val[i]).level
                   | switch_transmit(self.out_ff[i], self.ff_state[i]).level)
            ble_out[i] = out
            opin_val[plan.opin_of[i]] = out
        result = []
        for x, y, z in outputs:
            result.append(ipin_value(g.node(NodeKind.IPIN, x, y, z)))
        for i, v in lut_val.items():
            self.ff_state[i] = v
        return tuple(result)

    def evaluate(self, vec: Sequence[int], io: IoMap) -> tuple[int, ...]:
        if len(vec) != len(io.inputs):
            raise DimensionError(f"vector width {len(vec)} != {len(io.inputs)} primary inputs")
        return self.step(dict(zip(io.inputs, vec)), io.outputs)

    def run(self, vectors: Iterable[Sequence[int]], io: IoMap) -> list[tuple[int, ...]]:
        return [self.evaluate(vec, io) for vec in vectors]


class _Plan:
    """Connectivity of the active plane, rebuilt whenever the fabric changes."""

    def __init__(self, fab: Fabric):
        g = fab.rrg
        a = fab.arch
        act = fab.active
        n_src = fab.layout.xbar_sources
        out_edges: dict[int, list[tuple[int, int]]] = {}
        for sid, sw in enumerate(fab.routing):
            if not sw.conducts(act):
                continue
            s = g.switches[sid]
            out_edges.setdefault(s.a, []).append((s.b, sid))
            if s.kind is SwitchKind.SB:
                out_edges.setdefault(s.b, []).append((s.a, sid))

        # every driving pin -> the input pins it reaches, with the switch path
        self.ipin_sources: dict[int, list[tuple[int, list[int]]]] = {}
        for src in sorted(n for n in out_edges if g.nodes[n].kind is NodeKind.OPIN):
            seen = {src: []}
            queue = deque([src])
            while queue:
                u = queue.popleft()
                for v, sid in out_edges.get(u, ()):
                    if v in seen:
                        continue
                    seen[v] = seen[u] + [sid]
                    if g.nodes[v].kind is NodeKind.IPIN:
                        self.ipin_sources.setdefault(v, []).append((src, seen[v]))
                    else:
                        queue.append(v)

        coords = [(x, y) for y in range(1, a.height + 1) for x in range(1, a.width + 1)]
        self.opin_of: dict[int, int] = {}
        self.xbar_sources: dict[int, list[list[tuple[int, tuple]]]] = {}
        owner_of_opin: dict[int, int] = {}
        live = []
        for c, (x, y) in enumerate(coords):
            for b in range(a.n_ble):
                i = c * a.n_ble + b
                opin = g.clb_opin(x, y, b)
                self.opin_of[i] = opin
                owner_of_opin[opin] = i
                if fab.out_lut[i].conducts(act) or fab.out_ff[i].conducts(act):
                    live.append(i)
        live_set = set(live)
        deps: dict[int, set[int]] = {}
        for i in live:
            c, b = divmod(i, a.n_ble)
            x, y = coords[c]
            per_input = []
            d: set[int] = set()
            for j in range(a.k):
                srcs = []
                for s in range(n_src):
                    s_idx = j * n_src + s
                    if not fab.xbar[i][s_idx].conducts(act):
                        continue
                    if s < a.clb_inputs:
                        node = g.clb_ipin(x, y, s)
                        srcs.append((s_idx, ("pin", node)))
                        for opin, _ in self.ipin_sources.get(node, ()):
                            if opin in owner_of_opin:
                                d.add(owner_of_opin[opin])
                    else:
                        q = c * a.n_ble + (s - a.clb_inputs)
                        srcs.append((s_idx, ("ble", q)))
                        d.add(q)
                per_input.append(srcs)
            self.xbar_sources[i] = per_input
            # only a combinational (LUT-selected) driver is a dependency
            deps[i] = {u for u in d if u in live_set and fab.out_lut[u].conducts(act)}
        self.registered_only = [i for i in live if not fab.out_lut[i].conducts(act)]
        ts = graphlib.TopologicalSorter(deps)
        try:
            self.order = list(ts.static_order())
        except graphlib.CycleError as exc:
            raise CycleError([f"ble{i}" for i in exc.args[1]]) from None


def simulate(design: Netlist | RoutedDesign, vectors: Iterable[Sequence[int]], ctx: int = 1,
             fabric: Fabric | None = None) -> list[tuple[int, ...]]:
    """Reference simulation for a netlist; device-level simulation for a
    routed design (on *fabric* if given, otherwise a freshly configured one)."""
    if isinstance(design, Netlist):
        return simulate_netlist(design, vectors)
    if fabric is None:
        fabric = Fabric(design.arch)
        fabric.power_on(generate_bitstream(design, ctx), ctx)
    return fabric.run(vectors, IoMap.of(design))
