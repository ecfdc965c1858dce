"""pack -> place -> route -> timing -> bitstream, plus post-route equivalence."""

from __future__ import annotations

import random
from contextlib import contextmanager
from dataclasses import dataclass, field

from ..errors import CadError
from ..techlib import TechModel
from .arch import FabricArch
from .bitstream import Bitstream, generate_bitstream
from .netlist import Netlist, exhaustive_vectors, simulate_netlist
from .pack import PackedNetlist, pack
from .place import Placement, place
from .route import RoutedDesign, route
from .runtime import simulate
from .timing import TimingReport, timing_analyze

EXHAUSTIVE_LIMIT = 10
RANDOM_VECTORS = 10_000


def verification_vectors(n: Netlist, seed: int = 0, count: int = RANDOM_VECTORS) -> list[tuple[int, ...]]:
    """Every input vector for up to 10 primary inputs, else ``count`` random ones."""
    width = len(n.inputs)
    if width <= EXHAUSTIVE_LIMIT:
        vecs = exhaustive_vectors(width)
        if n.latches:
            # walk each vector from many register states
            vecs = vecs * max(2, 64 // len(vecs))
        return vecs
    rng = random.Random(seed)
    return [tuple(rng.getrandbits(1) for _ in range(width)) for _ in range(count)]


@dataclass
class FlowResult:
    circuit: str
    arch: FabricArch
    seed: int
    packed: PackedNetlist
    placement: Placement
    routed: RoutedDesign
    bitstream: Bitstream
    timing: list[TimingReport] = field(default_factory=list)
    equivalent: bool | None = None
    vectors: int = 0

    def records(self) -> list[dict]:
        rec = [{"record": "flow", "circuit": self.circuit, "arch": self.arch.name,
                "seed": self.seed, "clbs": len(self.packed.clusters),
                "hpwl": self.placement.cost, "wirelength": self.routed.wirelength,
                "route_iterations": self.routed.iterations, "bits": len(self.bitstream)}]
        for t in self.timing:
            rec += t.records()
        if self.equivalent is not None:
            rec.append({"record": "equivalence", "circuit": self.circuit,
                        "verdict": "PASS" if self.equivalent else "FAIL", "vectors": self.vectors})
        return rec

    def to_text(self) -> str:
        lines = [f"circuit {self.circuit} on arch {self.arch.name} (seed {self.seed})",
                 f"  CLBs {len(self.packed.clusters)}, HPWL {self.placement.cost}, "
                 f"wirelength {self.routed.wirelength}, route iterations {self.routed.iterations}",
                 f"  bitstream {len(self.bitstream)} bits"]
        lines += [t.to_text() for t in self.timing]
        if self.equivalent is not None:
            lines.append(f"post-route equivalence: {'PASS' if self.equivalent else 'FAIL'} "
                         f"({self.vectors} vectors)")
        return "\n".join(lines)


@contextmanager
def _stage(name: str):
    try:
        yield
    except CadError as exc:
        exc.stage = name
        msg = str(exc)
        if not msg.startswith(f"{name}: "):
            exc.args = (f"{name}: {msg}",)
        raise


def run_flow(n: Netlist, arch: FabricArch, techs: list[TechModel] = (), seed: int = 0,
             verify: bool = True, ctx: int = 1) -> FlowResult:
    with _stage("pack"):
        packed = pack(n, arch, seed)
    with _stage("place"):
        pl = place(packed, arch, seed)
    with _stage("route"):
        routed = route(packed, pl, arch)
    bs = generate_bitstream(routed, ctx)
    res = FlowResult(n.name, arch, seed, packed, pl, routed, bs,
                     [timing_analyze(routed, t) for t in techs])
    if verify:
        vecs = verification_vectors(n, seed)
        res.vectors = len(vecs)
        res.equivalent = simulate_netlist(n, vecs) == simulate(routed, vecs, ctx)
    return res
