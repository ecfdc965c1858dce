"""Island-style fabric architecture and its routing-resource graph.

Grid layout (VPR convention): CLBs occupy ``(x, y)`` for ``1 <= x <= width``
and ``1 <= y <= height``; IO tiles ring the grid on the perimeter, corners
excluded, each holding ``io_capacity`` pads. Horizontal channel segment
``CHANX(x, y)`` runs above tile row ``y`` (``y`` in ``0..height``) across
column ``x``; ``CHANY(x, y)`` runs right of column ``x`` (``x`` in
``0..width``) along row ``y``. All segments have length one.

A switch box sits at every channel crossing ``(x, y)`` with ``0 <= x <= width``
and ``0 <= y <= height``. Its sides are LEFT ``CHANX(x, y)``, RIGHT
``CHANX(x+1, y)``, BOTTOM ``CHANY(x, y)`` and TOP ``CHANY(x, y+1)``, when they
exist. Each pair of sides gets ``W`` bidirectional switches wired by the
Wilton or the disjoint permutation.

Every CLB pin reaches all four adjacent channels; an IO pad reaches the one
channel beside its tile. A pin taps ``max(1, round(fc * W))`` tracks of each
channel it reaches.

Architecture files are TOML::

    [grid]
    width = 4
    height = 4
    io_capacity = 2

    [clb]
    k = 6
    n_ble = 8
    inputs = 27

    [routing]
    channel_width = 12
    sb_pattern = "wilton"   # or "disjoint"
    fc = 0.5
"""

from __future__ import annotations

import enum
import json
import zlib
from dataclasses import asdict, dataclass, fields
from functools import cached_property, lru_cache
from importlib import resources
from pathlib import Path
from typing import NamedTuple

from ..errors import ValidationError
from ..tomlio import line_of, load_toml

SB_PATTERNS = ("wilton", "disjoint")


@dataclass(frozen=True)
class FabricArch:
    width: int = 4
    height: int = 4
    k: int = 6
    n_ble: int = 8
    clb_inputs: int = 27
    channel_width: int = 12
    sb_pattern: str = "wilton"
    fc: float = 0.5
    io_capacity: int = 2
    name: str = "default"

    def __post_init__(self) -> None:
        checks = (
            ("width", self.width >= 1),
            ("height", self.height >= 1),
            ("k", 1 <= self.k <= 6),
            ("n_ble", self.n_ble >= 1),
            ("clb_inputs", self.clb_inputs >= 1),
            ("channel_width", self.channel_width >= 1),
            ("sb_pattern", self.sb_pattern in SB_PATTERNS),
            ("fc", 0 < self.fc <= 1),
            ("io_capacity", self.io_capacity >= 1),
        )
        for name, ok in checks:
            if not ok:
                raise ValidationError(f"invalid value {getattr(self, name)!r}", field=name)

    @property
    def n_clb(self) -> int:
        return self.width * self.height

    @property
    def io_tiles(self) -> list[tuple[int, int]]:
        w, h = self.width, self.height
        tiles = [(x, 0) for x in range(1, w + 1)]
        tiles += [(0, y) for y in range(1, h + 1)] + [(w + 1, y) for y in range(1, h + 1)]
        tiles += [(x, h + 1) for x in range(1, w + 1)]
        return sorted(tiles, key=lambda t: (t[1], t[0]))

    @property
    def n_io_pads(self) -> int:
        return len(self.io_tiles) * self.io_capacity

    @property
    def tracks_per_pin(self) -> int:
        return max(1, min(self.channel_width, round(self.fc * self.channel_width)))

    @property
    def ble_config_bits(self) -> int:
        # LUT cells + output select (LUT, FF) + FF init + local crossbar
        return (1 << self.k) + 3 + self.k * (self.clb_inputs + self.n_ble)

    def cb_switch_count(self) -> int:
        clb_pins = self.clb_inputs + self.n_ble
        return self.tracks_per_pin * (4 * clb_pins * self.n_clb + 2 * self.n_io_pads)

    def sb_switch_count(self) -> int:
        total = 0
        for x in range(self.width + 1):
            for y in range(self.height + 1):
                s = (x >= 1) + (x + 1 <= self.width) + (y >= 1) + (y + 1 <= self.height)
                total += s * (s - 1) // 2
        return total * self.channel_width

    def bitstream_length(self) -> int:
        return (self.n_clb * self.n_ble * self.ble_config_bits
                + self.cb_switch_count() + self.sb_switch_count())

    @property
    def hash(self) -> int:
        doc = {f.name: getattr(self, f.name) for f in fields(self) if f.name != "name"}
        return zlib.crc32(json.dumps(doc, sort_keys=True).encode())

    def replace(self, **kw) -> "FabricArch":
        return FabricArch(**{**asdict(self), **kw})


_ARCH_KEYS = {
    "grid": {"width": "width", "height": "height", "io_capacity": "io_capacity"},
    "clb": {"k": "k", "n_ble": "n_ble", "inputs": "clb_inputs"},
    "routing": {"channel_width": "channel_width", "sb_pattern": "sb_pattern", "fc": "fc"},
}


def load_arch(text: str, source: str | None = None) -> FabricArch:
    doc = load_toml(text, source)
    kw: dict = {}
    if "name" in doc:
        kw["name"] = str(doc["name"])
    for section, keys in _ARCH_KEYS.items():
        sec = doc.get(section, {})
        for key in sec:
            if key not in keys:
                raise ValidationError("unknown key", field=f"{section}.{key}",
                                      line=line_of(text, f"{section}.{key}"), source=source)
        for key, attr in keys.items():
            if key in sec:
                kw[attr] = sec[key]
    if "clb" in doc and "inputs" not in doc["clb"]:
        k, n = kw.get("k", 6), kw.get("n_ble", 8)
        kw["clb_inputs"] = max(k, k * (n + 1) // 2)
    try:
        return FabricArch(**kw)
    except ValidationError as exc:
        path = next((f"{s}.{k}" for s, ks in _ARCH_KEYS.items() for k, a in ks.items()
                     if a == exc.field), exc.field or "")
        raise ValidationError(str(exc).split(": ", 1)[-1], field=path,
                              line=line_of(text, path), source=source) from None
    except TypeError as exc:
        raise ValidationError(str(exc), source=source) from None


def shipped_arch_path(name: str) -> Path:
    return Path(str(resources.files("ctxfpga") / "data" / "arch" / f"{name}.toml"))


def load_arch_file(path: str | Path) -> FabricArch:
    p = Path(path)
    if not p.exists() and not p.suffix:
        p = shipped_arch_path(str(path))
    return load_arch(p.read_text(encoding="utf-8"), source=str(path))


# ---------------------------------------------------------------- RR graph

class NodeKind(enum.IntEnum):
    OPIN = 0
    IPIN = 1
    SINK = 2
    CHANX = 3
    CHANY = 4


class SwitchKind(enum.IntEnum):
    CB = 0
    SB = 1


class Node(NamedTuple):
    kind: NodeKind
    x: int
    y: int
    index: int   # pin / pad / track number; 0 for a CLB sink


class RRSwitch(NamedTuple):
    kind: SwitchKind
    a: int
    b: int


LEFT, RIGHT, BOTTOM, TOP = range(4)


def _wilton(frm: int, to: int, t: int, w: int) -> int:
    if frm == LEFT:
        return {RIGHT: t, TOP: (w - t) % w, BOTTOM: (w + t - 1) % w}[to]
    if frm == RIGHT:
        return {LEFT: t, TOP: (w + t - 1) % w, BOTTOM: (2 * w - 2 - t) % w}[to]
    if frm == BOTTOM:
        return {TOP: t, LEFT: (t + 1) % w, RIGHT: (2 * w - 2 - t) % w}[to]
    return {BOTTOM: t, LEFT: (w - t) % w, RIGHT: (t + 1) % w}[to]


class RRGraph:
    """Routing-resource graph; node and switch numbering is deterministic."""

    def __init__(self, arch: FabricArch):
        self.arch = arch
        self.nodes: list[Node] = []
        self.index: dict[Node, int] = {}
        self.capacity: list[int] = []
        self.switches: list[RRSwitch] = []
        self.adj: list[list[tuple[int, int | None]]] = []   # (to, switch id or None)
        self._build()

    def _add(self, node: Node, cap: int = 1) -> int:
        i = len(self.nodes)
        self.nodes.append(node)
        self.index[node] = i
        self.capacity.append(cap)
        self.adj.append([])
        return i

    def _wire(self, kind: SwitchKind, a: int, b: int, directed: bool) -> None:
        sid = len(self.switches)
        self.switches.append(RRSwitch(kind, a, b))
        self.adj[a].append((b, sid))
        if not directed:
            self.adj[b].append((a, sid))

    def node(self, kind: NodeKind, x: int, y: int, index: int = 0) -> int:
        return self.index[Node(kind, x, y, index)]

    def _track_set(self, pin: int) -> list[int]:
        w, n = self.arch.channel_width, self.arch.tracks_per_pin
        return sorted({(pin + (j * w) // n) % w for j in range(n)})

    def clb_channels(self, x: int, y: int) -> list[tuple[NodeKind, int, int]]:
        return [(NodeKind.CHANX, x, y), (NodeKind.CHANX, x, y - 1),
                (NodeKind.CHANY, x, y), (NodeKind.CHANY, x - 1, y)]

    def io_channel(self, x: int, y: int) -> tuple[NodeKind, int, int]:
        a = self.arch
        if y == 0:
            return NodeKind.CHANX, x, 0
        if y == a.height + 1:
            return NodeKind.CHANX, x, a.height
        if x == 0:
            return NodeKind.CHANY, 0, y
        return NodeKind.CHANY, a.width, y

    def _build(self) -> None:
        a = self.arch
        w = a.channel_width
        for y in range(0, a.height + 1):
            for x in range(1, a.width + 1):
                for t in range(w):
                    self._add(Node(NodeKind.CHANX, x, y, t))
        for y in range(1, a.height + 1):
            for x in range(0, a.width + 1):
                for t in range(w):
                    self._add(Node(NodeKind.CHANY, x, y, t))

        io = set(a.io_tiles)
        tiles = sorted([(x, y) for x in range(1, a.width + 1) for y in range(1, a.height + 1)] + list(io),
                       key=lambda t: (t[1], t[0]))
        self.pin_nodes: list[int] = []
        for x, y in tiles:
            if (x, y) in io:
                chans = [self.io_channel(x, y)]
                ipins = [self._add(Node(NodeKind.IPIN, x, y, z)) for z in range(a.io_capacity)]
                opins = [self._add(Node(NodeKind.OPIN, x, y, z)) for z in range(a.io_capacity)]
                for z, ip in enumerate(ipins):
                    self.adj[ip].append((self._add(Node(NodeKind.SINK, x, y, z)), None))
            else:
                chans = self.clb_channels(x, y)
                ipins = [self._add(Node(NodeKind.IPIN, x, y, p)) for p in range(a.clb_inputs)]
                opins = [self._add(Node(NodeKind.OPIN, x, y, q))
                         for q in range(a.clb_inputs, a.clb_inputs + a.n_ble)]
                sink = self._add(Node(NodeKind.SINK, x, y, 0), cap=a.clb_inputs)
                for ip in ipins:
                    self.adj[ip].append((sink, None))
            for pin_num, pin in enumerate(ipins + opins):
                is_out = pin_num >= len(ipins)
                for kind, cx, cy in chans:
                    for t in self._track_set(pin_num):
                        trk = self.node(kind, cx, cy, t)
                        # output pins drive tracks; tracks drive input pins
                        if is_out:
                            self._wire(SwitchKind.CB, pin, trk, directed=True)
                        else:
                            self._wire(SwitchKind.CB, trk, pin, directed=True)

        self.n_cb = len(self.switches)
        for y in range(0, a.height + 1):
            for x in range(0, a.width + 1):
                sides = {}
                if x >= 1:
                    sides[LEFT] = (NodeKind.CHANX, x, y)
                if x + 1 <= a.width:
                    sides[RIGHT] = (NodeKind.CHANX, x + 1, y)
                if y >= 1:
                    sides[BOTTOM] = (NodeKind.CHANY, x, y)
                if y + 1 <= a.height:
                    sides[TOP] = (NodeKind.CHANY, x, y + 1)
                present = sorted(sides)
                for i, s1 in enumerate(present):
                    for s2 in present[i + 1:]:
                        for t in range(w):
                            t2 = _wilton(s1, s2, t, w) if a.sb_pattern == "wilton" else t
                            self._wire(SwitchKind.SB, self.node(*sides[s1], t),
                                       self.node(*sides[s2], t2), directed=False)
        self.n_sb = len(self.switches) - self.n_cb

    def coord(self, i: int) -> tuple[float, float]:
        n = self.nodes[i]
        if n.kind is NodeKind.CHANX:
            return n.x, n.y + 0.5
        if n.kind is NodeKind.CHANY:
            return n.x + 0.5, n.y
        return n.x, n.y

    def is_track(self, i: int) -> bool:
        return self.nodes[i].kind in (NodeKind.CHANX, NodeKind.CHANY)

    def clb_opin(self, x: int, y: int, ble: int) -> int:
        return self.node(NodeKind.OPIN, x, y, self.arch.clb_inputs + ble)

    def clb_ipin(self, x: int, y: int, pin: int) -> int:
        return self.node(NodeKind.IPIN, x, y, pin)

    def clb_sink(self, x: int, y: int) -> int:
        return self.node(NodeKind.SINK, x, y, 0)

    @cached_property
    def coords(self) -> list[tuple[float, float]]:
        return [self.coord(i) for i in range(len(self.nodes))]


@lru_cache(maxsize=16)
def build_rrgraph(arch: FabricArch) -> RRGraph:
    return RRGraph(arch)
