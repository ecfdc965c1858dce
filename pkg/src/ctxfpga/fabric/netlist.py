"""Logic netlists in a subset of BLIF, and cycle-based reference simulation.

Accepted constructs: ``.model``, ``.inputs``, ``.outputs``, ``.names`` with
single-output covers, ``.latch <d> <q> [<type> <ctrl>] [<init>]``,
``.clock`` (ignored: one implicit global clock) and ``.end``. ``#`` starts a
comment, a trailing ``\\`` continues a line.

Truth tables are stored little-endian: entry ``i`` is the output for the
input assignment whose bit ``j`` is input ``j``.
"""

from __future__ import annotations

import graphlib
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

from ..errors import CycleError, DimensionError, ParseError


@dataclass(frozen=True)
class LutNode:
    output: str
    inputs: tuple[str, ...]
    table: tuple[int, ...]

    @property
    def arity(self) -> int:
        return len(self.inputs)

    def eval(self, values: Sequence[int]) -> int:
        idx = 0
        for i, v in enumerate(values):
            if v:
                idx |= 1 << i
        return self.table[idx]


@dataclass(frozen=True)
class Latch:
    d: str
    q: str
    init: int = 0


@dataclass
class Netlist:
    name: str
    inputs: list[str]
    outputs: list[str]
    luts: dict[str, LutNode] = field(default_factory=dict)
    latches: dict[str, Latch] = field(default_factory=dict)

    def driver_kind(self, net: str) -> str | None:
        if net in self.luts:
            return "lut"
        if net in self.latches:
            return "latch"
        if net in self.inputs:
            return "pi"
        return None

    @cached_property
    def fanout(self) -> dict[str, list[str]]:
        """net -> names of LUT outputs / latch Qs consuming it."""
        out: dict[str, list[str]] = {}
        for lut in self.luts.values():
            for i in lut.inputs:
                out.setdefault(i, []).append(lut.output)
        for latch in self.latches.values():
            out.setdefault(latch.d, []).append(latch.q)
        return out

    @cached_property
    def lut_order(self) -> list[str]:
        return _topo_luts(self)

    def validate(self) -> "Netlist":
        drivers: dict[str, str] = {}
        for kind, names in (("input", self.inputs), ("lut", self.luts), ("latch", self.latches)):
            for n in names:
                if n in drivers:
                    raise ParseError(f"net {n!r} has more than one driver ({drivers[n]}, {kind})")
                drivers[n] = kind
        used = [i for lut in self.luts.values() for i in lut.inputs]
        used += [l.d for l in self.latches.values()] + list(self.outputs)
        for n in used:
            if n not in drivers:
                raise ParseError(f"net {n!r} has no driver")
        _topo_luts(self)
        return self


def _topo_luts(n: Netlist) -> list[str]:
    ts = graphlib.TopologicalSorter()
    for lut in n.luts.values():
        ts.add(lut.output, *[i for i in lut.inputs if i in n.luts])
    try:
        return list(ts.static_order())
    except graphlib.CycleError as exc:
        cycle = list(exc.args[1])
        raise CycleError(cycle) from None


def _logical_lines(text: str) -> Iterable[tuple[int, list[str]]]:
    buf: list[str] = []
    start = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].rstrip()
        if start is None:
            start = lineno
        if line.endswith("\\"):
            buf.append(line[:-1])
            continue
        buf.append(line)
        toks = " ".join(buf).split()
        if toks:
            yield start, toks
        buf, start = [], None
    if buf and " ".join(buf).split():
        yield start or 0, " ".join(buf).split()


def _cover_to_table(nin: int, rows: list[tuple[str, str, int]], lineno: int, source) -> tuple[int, ...]:
    if not rows:
        return tuple([0] * (1 << nin))   # empty cover: constant 0
    for _, o, row_line in rows:
        if o not in ("0", "1"):
            raise ParseError(f"bad output value {o!r}", line=row_line, source=source)
    out_vals = {o for _, o, _ in rows}
    if len(out_vals) != 1:
        raise ParseError("cover mixes on-set and off-set rows", line=lineno, source=source)
    onset = out_vals == {"1"}
    hit = [False] * (1 << nin)
    for cube, _, row_line in rows:
        if len(cube) != nin or any(c not in "01-" for c in cube):
            raise ParseError(f"bad cube {cube!r} for {nin} inputs", line=row_line, source=source)
        for idx in range(1 << nin):
            if all(c == "-" or int(c) == (idx >> j) & 1 for j, c in enumerate(cube)):
                hit[idx] = True
    return tuple(int(h) if onset else int(not h) for h in hit)


def parse_netlist(text: str, source: str | None = None) -> Netlist:
    """Parse BLIF-subset text into a validated :class:`Netlist`."""
    name = "top"
    inputs: list[str] = []
    outputs: list[str] = []
    luts: dict[str, LutNode] = {}
    latches: dict[str, Latch] = {}
    pending: tuple[int, list[str], list[tuple[str, str, int]]] | None = None

    def flush():
        nonlocal pending
        if pending is None:
            return
        lineno, sig, rows = pending
        *ins, out = sig
        if out in luts:
            raise ParseError(f"net {out!r} defined twice", line=lineno, source=source)
        luts[out] = LutNode(out, tuple(ins), _cover_to_table(len(ins), rows, lineno, source))
        pending = None

    for lineno, toks in _logical_lines(text):
        head = toks[0]
        if head.startswith("."):
            flush()
            args = toks[1:]
            if head == ".model":
                name = args[0] if args else name
            elif head == ".inputs":
                inputs += args
            elif head == ".outputs":
                outputs += args
            elif head == ".names":
                if not args:
                    raise ParseError(".names needs an output", line=lineno, source=source)
                pending = (lineno, args, [])
            elif head == ".latch":
                if len(args) not in (2, 3, 4, 5):
                    raise ParseError("malformed .latch", line=lineno, source=source)
                d, q = args[0], args[1]
                init = 0
                if len(args) in (3, 5):
                    try:
                        init = int(args[-1])
                    except ValueError:
                        raise ParseError(f"bad latch init {args[-1]!r}", line=lineno, source=source) from None
                    init = 1 if init == 1 else 0   # 2 (don't care) and 3 (unknown) reset to 0
                if q in latches:
                    raise ParseError(f"net {q!r} defined twice", line=lineno, source=source)
                latches[q] = Latch(d, q, init)
            elif head == ".end":
                break
            elif head in (".clock",):
                pass
            else:
                raise ParseError(f"unsupported construct {head}", line=lineno, source=source)
        else:
            if pending is None:
                raise ParseError("cover row outside .names", line=lineno, source=source)
            nin = len(pending[1]) - 1
            if nin == 0:
                if len(toks) != 1:
                    raise ParseError("constant cover takes one value", line=lineno, source=source)
                pending[2].append(("", toks[0], lineno))
            else:
                if len(toks) != 2:
                    raise ParseError("cover row needs <cube> <value>", line=lineno, source=source)
                pending[2].append((toks[0], toks[1], lineno))
    flush()
    n = Netlist(name, inputs, outputs, luts, latches)
    try:
        return n.validate()
    except CycleError as exc:
        raise CycleError(exc.cycle, source=source) from None
    except ParseError as exc:
        raise ParseError(str(exc), source=source) from None


def write_netlist(n: Netlist) -> str:
    lines = [f".model {n.name}", ".inputs " + " ".join(n.inputs), ".outputs " + " ".join(n.outputs)]
    for lut in n.luts.values():
        lines.append(".names " + " ".join(lut.inputs + (lut.output,)))
        for idx, v in enumerate(lut.table):
            if v:
                lines.append("".join(str((idx >> j) & 1) for j in range(lut.arity)) + (" 1" if lut.arity else "1"))
    for l in n.latches.values():
        lines.append(f".latch {l.d} {l.q} re clk {l.init}")
    lines.append(".end")
    return "\n".join(lines) + "\n"


def simulate_netlist(n: Netlist, vectors: Iterable[Sequence[int]],
                     state: dict[str, int] | None = None) -> list[tuple[int, ...]]:
    """One vector per clock cycle; outputs are sampled after combinational
    settling and before the clock edge."""
    regs = {q: l.init for q, l in n.latches.items()} if state is None else dict(state)
    trace = []
    order = n.lut_order
    for vec in vectors:
        if len(vec) != len(n.inputs):
            raise DimensionError(f"vector width {len(vec)} != {len(n.inputs)} primary inputs")
        values = dict(zip(n.inputs, (1 if v else 0 for v in vec)))
        values.update(regs)
        for out in order:
            lut = n.luts[out]
            values[out] = lut.eval([values[i] for i in lut.inputs])
        trace.append(tuple(values[o] for o in n.outputs))
        regs = {q: values[l.d] for q, l in n.latches.items()}
    if state is not None:
        state.clear()
        state.update(regs)
    return trace


def exhaustive_vectors(width: int) -> list[tuple[int, ...]]:
    return [tuple((i >> j) & 1 for j in range(width)) for i in range(1 << width)]
