"""Placement: greedy construction followed by simulated annealing on
half-perimeter wirelength (HPWL).

Annealing schedule (fixed, VPR-style):

* moves per temperature: ``max(10, int(INNER * n_blocks ** (4/3)))``
* initial temperature: 20 x the standard deviation of the cost change of
  ``n_blocks`` random moves from the greedy placement
* cooling: ``T *= 0.5 / 0.9 / 0.95 / 0.8`` for acceptance rates above
  0.96 / 0.8 / 0.15 / otherwise
* range limit: ``rlim *= 1 - 0.44 + rate``, clamped to ``[1, max(W, H) + 1]``
* stop when ``T < 0.005 * cost / n_nets``, then one zero-temperature pass

The best placement seen is returned. All randomness comes from
``random.Random(seed)``.
"""

from __future__ import annotations

import math
import random
import statistics
from dataclasses import dataclass

from ..errors import ResourceError
from .arch import FabricArch
from .pack import PackedNetlist

INNER = 1.0

Site = tuple[int, int, int]   # (x, y, z); z = 0 for CLB sites, pad number for IO


@dataclass
class Placement:
    sites: dict[str, Site]   # block -> site
    cost: int

    def hpwl(self, packed: PackedNetlist) -> int:
        return total_hpwl(packed.inter_block_nets(), self.sites)

    def net_hpwl(self, packed: PackedNetlist, net: str) -> int:
        drv, sinks = packed.inter_block_nets()[net]
        return _bbox([self.sites[b] for b in [drv, *sinks]])


def _bbox(sites) -> int:
    xs = [s[0] for s in sites]
    ys = [s[1] for s in sites]
    return (max(xs) - min(xs)) + (max(ys) - min(ys))


def total_hpwl(nets: dict[str, tuple[str, list[str]]], sites: dict[str, Site]) -> int:
    return sum(_bbox([sites[b] for b in (d, *s)]) for d, s in nets.values())


def _clb_sites(arch: FabricArch) -> list[Site]:
    return [(x, y, 0) for y in range(1, arch.height + 1) for x in range(1, arch.width + 1)]


def _io_sites(arch: FabricArch) -> list[Site]:
    return [(x, y, z) for x, y in arch.io_tiles for z in range(arch.io_capacity)]


def place(packed: PackedNetlist, arch: FabricArch | None = None, seed: int = 0) -> Placement:
    arch = arch or packed.arch
    clbs = [f"clb{c.index}" for c in packed.clusters]
    ios = packed.io_blocks
    clb_sites, io_sites = _clb_sites(arch), _io_sites(arch)
    if len(clbs) > len(clb_sites) or len(ios) > len(io_sites):
        raise ResourceError("design does not fit the grid")
    nets = packed.inter_block_nets()
    nets_of: dict[str, list[str]] = {b: [] for b in clbs + ios}
    for name, (d, sinks) in nets.items():
        for b in {d, *sinks}:
            nets_of[b].append(name)

    sites = _greedy(clbs, ios, clb_sites, io_sites, nets, nets_of)
    if not nets:
        return Placement(sites, 0)
    sites = _anneal(sites, clbs, ios, clb_sites, io_sites, nets, nets_of, arch, random.Random(seed))
    return Placement(sites, total_hpwl(nets, sites))


def _greedy(clbs, ios, clb_sites, io_sites, nets, nets_of) -> dict[str, Site]:
    sites: dict[str, Site] = {}
    # IO pads spread evenly around the ring in block order
    step = len(io_sites) / max(1, len(ios))
    for i, b in enumerate(ios):
        sites[b] = io_sites[int(i * step)]
    free = list(clb_sites)
    placed = set(ios)
    # visit CLBs by decreasing connectivity to what is already placed
    todo = list(clbs)
    while todo:
        def attach(b):
            return sum(1 for n in nets_of[b] for blk in _blocks(nets[n]) if blk in placed)
        b = max(todo, key=lambda blk: (attach(blk), -todo.index(blk)))
        todo.remove(b)
        best, best_cost = None, None
        for s in free:
            sites[b] = s
            cost = sum(_bbox([sites[x] for x in _blocks(nets[n]) if x in sites]) for n in nets_of[b])
            if best_cost is None or cost < best_cost:
                best, best_cost = s, cost
        sites[b] = best
        free.remove(best)
        placed.add(b)
    return sites


def _blocks(net) -> list[str]:
    d, sinks = net
    return [d, *sinks]


def _anneal(sites, clbs, ios, clb_sites, io_sites, nets, nets_of, arch, rng) -> dict[str, Site]:
    occupant = {s: b for b, s in sites.items()}
    blocks = clbs + ios
    n_blocks = len(blocks)
    net_cost = {n: _bbox([sites[b] for b in _blocks(v)]) for n, v in nets.items()}
    cost = sum(net_cost.values())
    span = max(arch.width, arch.height) + 1

    def propose(rlim: float):
        b = blocks[rng.randrange(n_blocks)]
        pool = clb_sites if b.startswith("clb") else io_sites
        x0, y0, _ = sites[b]
        r = max(1, int(rlim))
        near = [s for s in pool if abs(s[0] - x0) <= r and abs(s[1] - y0) <= r and s != sites[b]]
        if not near:
            return None
        return b, near[rng.randrange(len(near))]

    def delta_of(b, target):
        other = occupant.get(target)
        old = sites[b]
        touched = set(nets_of[b]) | (set(nets_of[other]) if other else set())
        sites[b] = target
        if other:
            sites[other] = old
        new_costs = {n: _bbox([sites[x] for x in _blocks(nets[n])]) for n in touched}
        sites[b] = old
        if other:
            sites[other] = target
        return sum(new_costs[n] - net_cost[n] for n in touched), new_costs, other

    def commit(b, target, other, new_costs):
        old = sites[b]
        sites[b] = target
        occupant[target] = b
        if other:
            sites[other] = old
            occupant[old] = other
        else:
            del occupant[old]
        net_cost.update(new_costs)

    samples = []
    for _ in range(n_blocks):
        mv = propose(span)
        if mv:
            samples.append(delta_of(*mv)[0])
    temp = 20 * statistics.pstdev(samples) if len(samples) > 1 else 1.0
    moves = max(10, int(INNER * n_blocks ** (4 / 3)))
    rlim = float(span)
    best_sites, best_cost = dict(sites), cost
    n_nets = max(1, len(nets))

    def sweep(t):
        nonlocal cost, best_sites, best_cost
        accepted = 0
        for _ in range(moves):
            mv = propose(rlim)
            if mv is None:
                continue
            b, target = mv
            d, new_costs, other = delta_of(b, target)
            if d <= 0 or (t > 0 and rng.random() < math.exp(-d / t)):
                commit(b, target, other, new_costs)
                cost += d
                accepted += 1
                if cost < best_cost:
                    best_sites, best_cost = dict(sites), cost
        return accepted / moves

    while temp > 0 and cost > 0 and temp >= 0.005 * cost / n_nets:
        rate = sweep(temp)
        if rate > 0.96:
            temp *= 0.5
        elif rate > 0.8:
            temp *= 0.9
        elif rate > 0.15:
            temp *= 0.95
        else:
            temp *= 0.8
        rlim = min(float(span), max(1.0, rlim * (1 - 0.44 + rate)))
    if cost > 0:
        sweep(0.0)
    return best_sites
