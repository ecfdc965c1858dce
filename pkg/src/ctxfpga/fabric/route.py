"""Negotiated-congestion (PathFinder) routing over the RR graph.

Node cost is ``base * (1 + hist) * (1 + pres_fac * overuse_if_taken)``.
``pres_fac`` starts at 0.5 and grows by 1.5x per iteration; history grows by
the overuse left after each iteration. Every iteration rips up and reroutes
every net (largest fanout first, then by name). Each sink is reached by an
A* search seeded with the whole partial route tree; the heuristic is the
Manhattan distance minus one segment, which never overestimates because
each hop advances at most one unit and costs at least one.

Routing gives up after ``MAX_ITERATIONS`` with :class:`CongestionError`.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field

from ..errors import CongestionError
from .arch import FabricArch, NodeKind, RRGraph, SwitchKind, build_rrgraph
from .pack import PackedNetlist
from .place import Placement

MAX_ITERATIONS = 50
PRES_FAC_FIRST = 0.5
PRES_FAC_MULT = 1.5
HIST_FAC = 1.0


@dataclass
class RouteTree:
    net: str
    source: int
    parent: dict[int, tuple[int, int | None]] = field(default_factory=dict)  # node -> (prev, switch)
    sinks: dict[str, int] = field(default_factory=dict)                       # block -> SINK node

    @property
    def nodes(self) -> list[int]:
        return [self.source, *self.parent]

    def path(self, node: int) -> list[tuple[int, int | None]]:
        """(node, switch used to enter it) from the source to *node*."""
        out = []
        while node != self.source:
            prev, sw = self.parent[node]
            out.append((node, sw))
            node = prev
        out.append((self.source, None))
        return out[::-1]

    @property
    def switches(self) -> set[int]:
        return {sw for _, sw in self.parent.values() if sw is not None}


@dataclass
class RoutedDesign:
    packed: PackedNetlist
    placement: Placement
    arch: FabricArch
    rrg: RRGraph
    routes: dict[str, RouteTree]
    iterations: int

    @property
    def netlist(self):
        return self.packed.netlist

    def ipin(self, net: str, block: str) -> int:
        """IPIN node through which *net* enters *block*."""
        tree = self.routes[net]
        sink = tree.sinks[block]
        return tree.parent[sink][0]

    def connection(self, net: str, block: str) -> tuple[int, int]:
        """(#CB taps, #SB turns) on the route from the driver to *block*."""
        tree = self.routes[net]
        kinds = [self.rrg.switches[sw].kind for _, sw in tree.path(tree.sinks[block]) if sw is not None]
        return kinds.count(SwitchKind.CB), kinds.count(SwitchKind.SB)

    @property
    def wirelength(self) -> int:
        return sum(1 for t in self.routes.values() for n in t.nodes if self.rrg.is_track(n))

    def used_switches(self) -> set[int]:
        out: set[int] = set()
        for t in self.routes.values():
            out |= t.switches
        return out

    def pad_of(self, block: str) -> tuple[int, int, int]:
        return self.placement.sites[block]


def _terminals(packed: PackedNetlist, pl: Placement, g: RRGraph):
    nets = []
    for name, (drv, sinks) in packed.inter_block_nets().items():
        x, y, z = pl.sites[drv]
        if drv.startswith("clb"):
            src = g.clb_opin(x, y, packed.ble_of[name][1])
        else:
            src = g.node(NodeKind.OPIN, x, y, z)
        targets = {}
        for b in sinks:
            sx, sy, sz = pl.sites[b]
            targets[b] = g.clb_sink(sx, sy) if b.startswith("clb") else g.node(NodeKind.SINK, sx, sy, sz)
        nets.append((name, src, targets))
    nets.sort(key=lambda n: (-len(n[2]), n[0]))
    return nets


def route(packed: PackedNetlist, placement: Placement, arch: FabricArch | None = None,
          max_iterations: int = MAX_ITERATIONS) -> RoutedDesign:
    arch = arch or packed.arch
    g = build_rrgraph(arch)
    nets = _terminals(packed, placement, g)
    n_nodes = len(g.nodes)
    cap = g.capacity
    base = [0.0 if g.nodes[i].kind is NodeKind.SINK else 1.0 for i in range(n_nodes)]
    hist = [0.0] * n_nodes
    occ = [0] * n_nodes
    coords = g.coords
    trees: dict[str, RouteTree] = {}
    pres_fac = PRES_FAC_FIRST

    for it in range(1, max_iterations + 1):
        for name, src, targets in nets:
            old = trees.get(name)
            if old is not None:
                for n in old.nodes:
                    occ[n] -= 1
            tree = _route_net(g, name, src, targets, base, hist, occ, cap, pres_fac, coords)
            for n in tree.nodes:
                occ[n] += 1
            trees[name] = tree
        overuse = [occ[i] - cap[i] for i in range(n_nodes) if occ[i] > cap[i]]
        if not overuse:
            return RoutedDesign(packed, placement, arch, g, dict(sorted(trees.items())), it)
        for i in range(n_nodes):
            if occ[i] > cap[i]:
                hist[i] += HIST_FAC * (occ[i] - cap[i])
        pres_fac *= PRES_FAC_MULT
    raise CongestionError(f"unroutable at channel width {arch.channel_width} after "
                          f"{max_iterations} iterations", max_overuse=max(overuse))


def _route_net(g, name, src, targets, base, hist, occ, cap, pres_fac, coords) -> RouteTree:
    tree = RouteTree(name, src)
    in_tree = {src}
    sx, sy = coords[src]
    order = sorted(targets.items(),
                   key=lambda kv: (abs(coords[kv[1]][0] - sx) + abs(coords[kv[1]][1] - sy), kv[0]))
    sink_kind = NodeKind.SINK
    nodes = g.nodes
    adj = g.adj

    def node_cost(n):
        over = occ[n] + 1 - cap[n]
        return base[n] * (1.0 + hist[n]) * (1.0 + pres_fac * over if over > 0 else 1.0)

    for block, target in order:
        tx, ty = coords[target]

        def h(n):
            x, y = coords[n]
            return max(0.0, abs(x - tx) + abs(y - ty) - 1.0)

        dist: dict[int, float] = {}
        prev: dict[int, tuple[int, int | None]] = {}
        heap = []
        for n in sorted(in_tree):
            if nodes[n].kind is sink_kind:
                continue
            dist[n] = 0.0
            heapq.heappush(heap, (h(n), 0.0, n))
        done = set()
        while heap:
            f, d, u = heapq.heappop(heap)
            if u in done:
                continue
            done.add(u)
            if u == target:
                break
            for v, sw in adj[u]:
                if v in done or (nodes[v].kind is sink_kind and v != target):
                    continue
                nd = d + node_cost(v)
                if nd < dist.get(v, float("inf")):
                    dist[v] = nd
                    prev[v] = (u, sw)
                    heapq.heappush(heap, (nd + h(v), nd, v))
        if target not in done:
            raise CongestionError(f"net {name!r} cannot reach {block}", max_overuse=0)
        n = target
        while n not in in_tree:
            p, sw = prev[n]
            tree.parent[n] = (p, sw)
            in_tree.add(n)
            n = p
        tree.sinks[block] = target
    return tree
