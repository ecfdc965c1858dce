"""Mini CAD flow over an island-style dual-context fabric."""

from .arch import FabricArch, RRGraph, build_rrgraph, load_arch, load_arch_file
from .bitstream import (
    Bitstream,
    FabricConfig,
    Layout,
    empty_bitstream,
    encode_config,
    generate_bitstream,
    load_bitstream,
)
from .flow import FlowResult, run_flow, verification_vectors
from .netlist import Latch, LutNode, Netlist, exhaustive_vectors, parse_netlist, simulate_netlist
from .pack import PackedNetlist, pack
from .place import Placement, place
from .route import RoutedDesign, RouteTree, route
from .runtime import Fabric, IoMap, simulate
from .timing import TimingGraph, TimingReport, critical_path, timing_analyze

__all__ = [
    "Bitstream", "Fabric", "FabricArch", "FabricConfig", "FlowResult", "IoMap", "Latch", "Layout",
    "LutNode", "Netlist", "PackedNetlist", "Placement", "RRGraph", "RouteTree", "RoutedDesign",
    "TimingGraph", "TimingReport", "build_rrgraph", "critical_path", "empty_bitstream",
    "encode_config", "exhaustive_vectors", "generate_bitstream", "load_arch", "load_arch_file",
    "load_bitstream", "pack", "parse_netlist", "place", "route", "run_flow", "simulate",
    "simulate_netlist", "timing_analyze", "verification_vectors",
]
