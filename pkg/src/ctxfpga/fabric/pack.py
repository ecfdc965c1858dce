"""Packing: LUTs and flip-flops into BLEs, BLEs into CLB clusters.

A LUT absorbs a flip-flop when the FF's D input is the LUT's only fanout
and the LUT output is not a primary output; a lone flip-flop gets a buffer
LUT. Clustering is the greedy connectivity-driven scheme of VPack: seed each
cluster with the unclustered BLE that has the most inputs, then keep adding
the feasible BLE that shares the most nets with the cluster until it is full
or nothing fits. Ties resolve by BLE name, so the result is deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..errors import ResourceError
from .arch import FabricArch
from .netlist import Latch, Netlist


@dataclass(frozen=True)
class Ble:
    name: str                   # net driven out of the BLE
    inputs: tuple[str, ...]     # nets on LUT inputs 0..n-1
    table: tuple[int, ...]      # 2**len(inputs) entries, little-endian
    lut_net: str                # net at the LUT output (internal when registered)
    ff: Latch | None = None

    @property
    def registered(self) -> bool:
        return self.ff is not None

    @property
    def nets(self) -> frozenset[str]:
        return frozenset(self.inputs) | {self.name}


@dataclass
class Cluster:
    index: int
    bles: list[Ble] = field(default_factory=list)

    @property
    def driven(self) -> set[str]:
        return {b.name for b in self.bles}

    @property
    def inputs(self) -> list[str]:
        """External nets entering the cluster, in first-use order."""
        driven = self.driven
        seen: dict[str, None] = {}
        for b in self.bles:
            for i in b.inputs:
                if i not in driven:
                    seen.setdefault(i)
        return list(seen)

    @property
    def nets(self) -> set[str]:
        out: set[str] = set()
        for b in self.bles:
            out |= b.nets
        return out


@dataclass
class PackedNetlist:
    netlist: Netlist
    arch: FabricArch
    clusters: list[Cluster]
    ble_of: dict[str, tuple[int, int]]   # driven net -> (cluster, slot)

    def driver_block(self, net: str) -> str:
        if net in self.ble_of:
            return f"clb{self.ble_of[net][0]}"
        return f"in:{net}"

    def sink_blocks(self, net: str) -> list[str]:
        blocks = [f"clb{c.index}" for c in self.clusters if net in c.inputs]
        blocks += [f"out:{o}" for o in self.netlist.outputs if o == net]
        return blocks

    @property
    def io_blocks(self) -> list[str]:
        return [f"in:{i}" for i in self.netlist.inputs] + [f"out:{o}" for o in self.netlist.outputs]

    def inter_block_nets(self) -> dict[str, tuple[str, list[str]]]:
        """net -> (driver block, sink blocks) for every net leaving its block."""
        nets = {}
        candidates = list(self.netlist.inputs) + list(self.ble_of)
        for net in candidates:
            sinks = self.sink_blocks(net)
            if sinks:
                nets[net] = (self.driver_block(net), sinks)
        return nets


def form_bles(n: Netlist, k: int) -> list[Ble]:
    for lut in n.luts.values():
        if lut.arity > k:
            raise ResourceError(f"LUT {lut.output!r} has {lut.arity} inputs, fabric k = {k}")
    fanout = n.fanout
    absorbed: dict[str, Latch] = {}
    for latch in n.latches.values():
        d = latch.d
        if (d in n.luts and fanout.get(d) == [latch.q] and d not in n.outputs
                and d not in absorbed):
            absorbed[d] = latch
    bles = []
    for out, lut in n.luts.items():
        if out in absorbed:
            ff = absorbed[out]
            bles.append(Ble(ff.q, lut.inputs, lut.table, out, ff))
        else:
            bles.append(Ble(out, lut.inputs, lut.table, out))
    taken = {l.q for l in absorbed.values()}
    for latch in n.latches.values():
        if latch.q not in taken:
            bles.append(Ble(latch.q, (latch.d,), (0, 1), f"{latch.q}$buf", latch))
    return sorted(bles, key=lambda b: b.name)


def _external(nets_in: set[str], driven: set[str]) -> int:
    return len(nets_in - driven)


def pack(n: Netlist, arch: FabricArch, seed: int = 0) -> PackedNetlist:
    """Greedy clustering; ``seed`` is accepted for interface symmetry with the
    other passes (the algorithm itself has no random choices)."""
    bles = form_bles(n, arch.k)
    n_io = len(n.inputs) + len(n.outputs)
    if n_io > arch.n_io_pads:
        raise ResourceError(f"{n_io} IO blocks exceed {arch.n_io_pads} pads")
    for b in bles:
        if len(set(b.inputs)) > arch.clb_inputs:
            raise ResourceError(f"BLE {b.name!r} needs more than {arch.clb_inputs} CLB inputs")

    remaining = list(bles)
    clusters: list[Cluster] = []
    while remaining:
        seed_ble = min(remaining, key=lambda b: (-len(set(b.inputs)), b.name))
        remaining.remove(seed_ble)
        cl = Cluster(len(clusters), [seed_ble])
        ins = set(seed_ble.inputs)
        driven = {seed_ble.name}
        nets = set(seed_ble.nets)
        while len(cl.bles) < arch.n_ble and remaining:
            best, best_key = None, None
            for b in remaining:
                if _external(ins | set(b.inputs), driven | {b.name}) > arch.clb_inputs:
                    continue
                key = len(b.nets & nets)
                if best_key is None or key > best_key:   # first (by name) wins ties
                    best, best_key = b, key
            if best is None:
                break
            remaining.remove(best)
            cl.bles.append(best)
            ins |= set(best.inputs)
            driven.add(best.name)
            nets |= best.nets
        clusters.append(cl)

    if len(clusters) > arch.n_clb:
        raise ResourceError(f"design needs {len(clusters)} CLBs, grid has {arch.n_clb}")
    ble_of = {b.name: (c.index, s) for c in clusters for s, b in enumerate(c.bles)}
    return PackedNetlist(n, arch, clusters, ble_of)
