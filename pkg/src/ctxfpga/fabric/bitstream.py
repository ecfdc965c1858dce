"""Configuration bitstreams: one context's worth of fabric configuration.

Scan order:

1. CLBs row-major (``y`` outer, ``x`` inner, both from 1). Inside a CLB,
   BLE 0..N-1; each BLE contributes ``2**k`` LUT bits (entry order,
   little-endian index), output-select LUT, output-select FF, FF init, then
   the local crossbar ``k x (I + N)``: for LUT input ``j``, sources are the
   CLB input pins ``0..I-1`` followed by the BLE outputs ``0..N-1``.
2. CB switches in RR-graph switch order.
3. SB switches in RR-graph switch order.

Length is ``n_clb * N * (2**k + 3 + k*(I+N)) + #CB + #SB``
(:meth:`FabricArch.bitstream_length`). Every switch bit means "connected";
every LUT bit is the stored truth-table value. The all-zero stream is the
unconfigured fabric.

Binary dump: a 16-byte little-endian header ``magic b"FFPG", arch hash
(crc32), context id, bit length`` followed by the bits packed MSB-first.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from ..errors import DimensionError, ParseError
from .arch import FabricArch, build_rrgraph
from .route import RoutedDesign

MAGIC = b"FFPG"
HEADER = struct.Struct("<4sIII")


class Layout:
    """Bit offsets for one architecture."""

    def __init__(self, arch: FabricArch):
        self.arch = arch
        self.lut_bits = 1 << arch.k
        self.xbar_sources = arch.clb_inputs + arch.n_ble
        self.ble_bits = arch.ble_config_bits
        self.cb_base = arch.n_clb * arch.n_ble * self.ble_bits
        self.length = arch.bitstream_length()

    def clb_index(self, x: int, y: int) -> int:
        return (y - 1) * self.arch.width + (x - 1)

    def ble_base(self, x: int, y: int, ble: int) -> int:
        return (self.clb_index(x, y) * self.arch.n_ble + ble) * self.ble_bits

    def out_lut(self, base: int) -> int:
        return base + self.lut_bits

    def out_ff(self, base: int) -> int:
        return base + self.lut_bits + 1

    def ff_init(self, base: int) -> int:
        return base + self.lut_bits + 2

    def xbar(self, base: int, j: int, src: int) -> int:
        return base + self.lut_bits + 3 + j * self.xbar_sources + src

    def switch(self, sid: int) -> int:
        return self.cb_base + sid   # CB ids precede SB ids in the RR graph

    def groups(self) -> list[tuple[str, int, int]]:
        """(kind, offset, width) for every primitive, in scan order."""
        out = []
        a = self.arch
        for y in range(1, a.height + 1):
            for x in range(1, a.width + 1):
                for b in range(a.n_ble):
                    base = self.ble_base(x, y, b)
                    out.append(("lut", base, self.lut_bits))
                    out.append(("switch", self.out_lut(base), 1))
                    out.append(("switch", self.out_ff(base), 1))
                    out.append(("bit", self.ff_init(base), 1))
                    for j in range(a.k):
                        for s in range(self.xbar_sources):
                            out.append(("switch", self.xbar(base, j, s), 1))
        out += [("switch", off, 1) for off in range(self.cb_base, self.length)]
        return out


@dataclass(frozen=True)
class Bitstream:
    arch: FabricArch
    ctx: int
    bits: np.ndarray   # uint8, one entry per bit

    def __post_init__(self) -> None:
        if self.bits.shape != (self.arch.bitstream_length(),):
            raise DimensionError(f"bitstream has {self.bits.size} bits, arch needs "
                                 f"{self.arch.bitstream_length()}")

    def __len__(self) -> int:
        return int(self.bits.size)

    def __eq__(self, other) -> bool:
        return (isinstance(other, Bitstream) and self.arch == other.arch and self.ctx == other.ctx
                and np.array_equal(self.bits, other.bits))

    def diff(self, other: "Bitstream") -> list[int]:
        return [int(i) for i in np.flatnonzero(self.bits != other.bits)]

    def to_bytes(self) -> bytes:
        return HEADER.pack(MAGIC, self.arch.hash, self.ctx, len(self)) + np.packbits(self.bits).tobytes()

    @classmethod
    def from_bytes(cls, data: bytes, arch: FabricArch) -> "Bitstream":
        if len(data) < HEADER.size:
            raise ParseError("bitstream shorter than its header")
        magic, arch_hash, ctx, n = HEADER.unpack_from(data)
        if magic != MAGIC:
            raise ParseError(f"bad magic {magic!r}")
        if arch_hash != arch.hash:
            raise ParseError("bitstream was generated for a different architecture")
        payload = np.frombuffer(data, dtype=np.uint8, offset=HEADER.size)
        if payload.size * 8 < n:
            raise ParseError("truncated bitstream payload")
        return cls(arch, ctx, np.unpackbits(payload)[:n].astype(np.uint8))


def empty_bitstream(arch: FabricArch, ctx: int = 1) -> Bitstream:
    return Bitstream(arch, ctx, np.zeros(arch.bitstream_length(), dtype=np.uint8))


@dataclass
class BleSetting:
    lut: tuple[int, ...]
    out_lut: int
    out_ff: int
    ff_init: int
    xbar: tuple[tuple[int, ...], ...]   # per LUT input, the connected sources


@dataclass
class FabricConfig:
    """Decoded view of a bitstream."""

    arch: FabricArch
    bles: dict[tuple[int, int, int], BleSetting]   # (x, y, ble) -> setting
    switches: frozenset[int]                      # RR switch ids that are on

    def __eq__(self, other) -> bool:
        return (isinstance(other, FabricConfig) and self.arch == other.arch
                and self.bles == other.bles and self.switches == other.switches)


def load_bitstream(bs: Bitstream) -> FabricConfig:
    lay = Layout(bs.arch)
    a = bs.arch
    bits = bs.bits
    bles = {}
    for y in range(1, a.height + 1):
        for x in range(1, a.width + 1):
            for b in range(a.n_ble):
                base = lay.ble_base(x, y, b)
                xbar = tuple(tuple(s for s in range(lay.xbar_sources) if bits[lay.xbar(base, j, s)])
                             for j in range(a.k))
                bles[(x, y, b)] = BleSetting(tuple(int(v) for v in bits[base:base + lay.lut_bits]),
                                             int(bits[lay.out_lut(base)]), int(bits[lay.out_ff(base)]),
                                             int(bits[lay.ff_init(base)]), xbar)
    on = frozenset(int(i) for i in np.flatnonzero(bits[lay.cb_base:]))
    return FabricConfig(a, bles, on)


def encode_config(cfg: FabricConfig, ctx: int = 1) -> Bitstream:
    lay = Layout(cfg.arch)
    bits = np.zeros(lay.length, dtype=np.uint8)
    for (x, y, b), s in cfg.bles.items():
        base = lay.ble_base(x, y, b)
        bits[base:base + lay.lut_bits] = s.lut
        bits[lay.out_lut(base)] = s.out_lut
        bits[lay.out_ff(base)] = s.out_ff
        bits[lay.ff_init(base)] = s.ff_init
        for j, srcs in enumerate(s.xbar):
            for src in srcs:
                bits[lay.xbar(base, j, src)] = 1
    for sid in cfg.switches:
        bits[lay.switch(sid)] = 1
    return Bitstream(cfg.arch, ctx, bits)


def generate_bitstream(r: RoutedDesign, ctx: int = 1) -> Bitstream:
    a = r.arch
    lay = Layout(a)
    bits = np.zeros(lay.length, dtype=np.uint8)
    g = build_rrgraph(a)
    for c in r.packed.clusters:
        x, y, _ = r.placement.sites[f"clb{c.index}"]
        for slot, b in enumerate(c.bles):
            base = lay.ble_base(x, y, slot)
            bits[base:base + len(b.table)] = b.table   # unused upper entries stay 0
            bits[lay.out_ff(base) if b.registered else lay.out_lut(base)] = 1
            bits[lay.ff_init(base)] = b.ff.init if b.ff else 0
            for j, net in enumerate(b.inputs):
                owner = r.packed.ble_of.get(net)
                if owner is not None and owner[0] == c.index:
                    src = a.clb_inputs + owner[1]
                else:
                    src = g.nodes[r.ipin(net, f"clb{c.index}")].index
                bits[lay.xbar(base, j, src)] = 1
    for sid in r.used_switches():
        bits[lay.switch(sid)] = 1
    return Bitstream(a, ctx, bits)
