import sys
from importlib import resources
from pathlib import Path

import pytest

from ctxfpga.fabric import load_arch_file, parse_netlist
from ctxfpga.techlib import load_shipped

DATA = Path(str(resources.files("ctxfpga") / "data"))


def circuit_text(name: str) -> str:
    return (DATA / "circuits" / f"{name}.blif").read_text(encoding="utf-8")


def circuit(name: str):
    return parse_netlist(circuit_text(name), source=name)


@pytest.fixture(scope="session")
def small_arch():
    return load_arch_file("small")


@pytest.fixture(scope="session")
def default_arch():
    return load_arch_file("default")


@pytest.fixture(scope="session")
def techs():
    return {n: load_shipped(n) for n in ("SRAM", "FEFET_1CFG", "FEFET_2CFG", "RRAM", "STT_MRAM")}


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = sorted(getattr(mod, "VERDICTS", []), key=lambda s: int(s.split()[2].rstrip(":")))
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
