"""Dual-context FeFET FPGA toolkit.

Device model, primitive cost library, dual-context primitives, a mini CAD
flow for an island-style fabric, a virtual-time context engine and a
reconfiguration scheduler.
"""

from importlib.metadata import PackageNotFoundError, version

try:
    __version__ = version("artifact")
except PackageNotFoundError:   # running from a source tree
    __version__ = "0.1.0"
