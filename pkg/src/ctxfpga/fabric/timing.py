"""Static timing analysis by longest path over a DAG.

Arrival times are carried as integer counts ``(LUTs, CB taps, SB turns)``
and turned into seconds by one fixed formula, so the reported critical path
and its breakdown are the same float and scaling every tech delay by ``c``
scales the result by exactly ``c`` whenever ``c`` is a power of two.
"""

from __future__ import annotations

import graphlib
from dataclasses import dataclass, field

from ..errors import CycleError
from ..techlib import Kind, TechModel
from .route import RoutedDesign

Counts = tuple[int, int, int]


@dataclass
class TimingGraph:
    lut: dict[str, int] = field(default_factory=dict)              # node -> LUT delays at the node
    edges: dict[str, list[tuple[str, int, int]]] = field(default_factory=dict)   # v <- (u, cb, sb)
    endpoints: set[str] = field(default_factory=set)

    def add_node(self, name: str, lut: int = 0, endpoint: bool = False) -> None:
        self.lut.setdefault(name, lut)
        self.edges.setdefault(name, [])
        if endpoint:
            self.endpoints.add(name)

    def add_edge(self, u: str, v: str, cb: int = 0, sb: int = 0) -> None:
        self.add_node(u)
        self.add_node(v)
        self.edges[v].append((u, cb, sb))


@dataclass
class TechDelays:
    lut: float
    cb: float
    sb: float

    @classmethod
    def of(cls, tech: TechModel) -> "TechDelays":
        return cls(tech.cost(Kind.LUT6).delay, tech.cost(Kind.CB_SWITCH).delay,
                   tech.cost(Kind.SB_SWITCH).delay)

    def seconds(self, c: Counts) -> float:
        b = self.breakdown(c)
        return b["lut"] + b["cb"] + b["sb"]

    def breakdown(self, c: Counts) -> dict[str, float]:
        return {"lut": c[0] * self.lut, "cb": c[1] * self.cb, "sb": c[2] * self.sb}


@dataclass
class TimingReport:
    tech: str
    critical_path: float
    path: list[str]
    counts: Counts
    breakdown: dict[str, float]
    slack: dict[str, float]

    def records(self) -> list[dict]:
        rec = [{"record": "critical_path", "tech": self.tech, "delay_s": self.critical_path,
                "lut_s": self.breakdown["lut"], "cb_s": self.breakdown["cb"],
                "sb_s": self.breakdown["sb"], "n_lut": self.counts[0], "n_cb": self.counts[1],
                "n_sb": self.counts[2], "path": self.path}]
        rec += [{"record": "slack", "tech": self.tech, "endpoint": e, "slack_s": s}
                for e, s in sorted(self.slack.items())]
        return rec

    def to_text(self) -> str:
        b = self.breakdown
        lines = [f"tech {self.tech}: critical path {self.critical_path * 1e12:.1f} ps",
                 f"  LUT {b['lut'] * 1e12:.1f} ps ({self.counts[0]} x), "
                 f"CB {b['cb'] * 1e12:.1f} ps ({self.counts[1]} x), "
                 f"SB {b['sb'] * 1e12:.1f} ps ({self.counts[2]} x)"]
        if self.path:
            lines.append("  path: " + " -> ".join(self.path))
        return "\n".join(lines)


def critical_path(g: TimingGraph, delays: TechDelays, tech: str = "") -> TimingReport:
    ts = graphlib.TopologicalSorter({v: [u for u, _, _ in ins] for v, ins in g.edges.items()})
    try:
        order = list(ts.static_order())
    except graphlib.CycleError as exc:
        raise CycleError(list(exc.args[1])) from None
    arrival: dict[str, Counts] = {}
    pred: dict[str, str | None] = {}
    for v in order:
        best, best_t, best_u = (0, 0, 0), -1.0, None
        for u, cb, sb in g.edges.get(v, ()):
            a = arrival[u]
            c = (a[0], a[1] + cb, a[2] + sb)
            t = delays.seconds(c)
            if t > best_t:
                best, best_t, best_u = c, t, u
        lut = g.lut.get(v, 0)
        arrival[v] = (best[0] + lut, best[1], best[2])
        pred[v] = best_u
    ends = sorted(g.endpoints)
    if not ends:
        return TimingReport(tech, 0.0, [], (0, 0, 0), delays.breakdown((0, 0, 0)), {})
    worst = max(ends, key=lambda e: delays.seconds(arrival[e]))
    counts = arrival[worst]
    path = [worst]
    while pred[path[-1]] is not None:
        path.append(pred[path[-1]])
    cp = delays.seconds(counts)
    slack = {e: cp - delays.seconds(arrival[e]) for e in ends}
    return TimingReport(tech, cp, path[::-1], counts, delays.breakdown(counts), slack)


def build_timing_graph(r: RoutedDesign) -> TimingGraph:
    """Nodes: ``pi:``/``po:`` pads, ``lut:`` BLE LUTs, ``ff:`` flip-flop outputs
    and ``d:`` flip-flop inputs. Intra-CLB connections cost nothing."""
    p = r.packed
    g = TimingGraph()
    src: dict[str, str] = {}
    for i in r.netlist.inputs:
        g.add_node(f"pi:{i}")
        src[i] = f"pi:{i}"
    bles = [(c, b) for c in p.clusters for b in c.bles]
    for c, b in bles:
        g.add_node(f"lut:{b.lut_net}", lut=1)
        if b.registered:
            g.add_node(f"ff:{b.name}")
            g.add_node(f"d:{b.name}", endpoint=True)
            g.add_edge(f"lut:{b.lut_net}", f"d:{b.name}")
            src[b.name] = f"ff:{b.name}"
        else:
            src[b.name] = f"lut:{b.name}"
    for c, b in bles:
        blk = f"clb{c.index}"
        for net in b.inputs:
            if p.ble_of.get(net, (None,))[0] == c.index:
                cb, sb = 0, 0
            else:
                cb, sb = r.connection(net, blk)
            g.add_edge(src[net], f"lut:{b.lut_net}", cb, sb)
    for o in r.netlist.outputs:
        g.add_node(f"po:{o}", endpoint=True)
        cb, sb = r.connection(o, f"out:{o}")
        g.add_edge(src[o], f"po:{o}", cb, sb)
    return g


def timing_analyze(r: RoutedDesign | TimingGraph, tech: TechModel) -> TimingReport:
    g = r if isinstance(r, TimingGraph) else build_timing_graph(r)
    return critical_path(g, TechDelays.of(tech), tech.name)
