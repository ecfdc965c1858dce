import itertools

import numpy as np
import pytest

from ctxfpga.errors import ContextInUseError, CycleError, DimensionError
from ctxfpga.fabric import (
    Fabric,
    FabricArch,
    IoMap,
    exhaustive_vectors,
    generate_bitstream,
    pack,
    place,
    route,
    run_flow,
    simulate,
    simulate_netlist,
    verification_vectors,
)

from conftest import circuit


def routed(name, arch, seed=0):
    p = pack(circuit(name), arch)
    return route(p, place(p, arch, seed), arch)


def test_xor_netlist_and_routed(small_arch):
    vecs = [(0, 0), (0, 1), (1, 0), (1, 1)]
    assert simulate(circuit("xor2"), vecs) == [(0,), (1,), (1,), (0,)]
    assert simulate(routed("xor2", small_arch), vecs) == [(0,), (1,), (1,), (0,)]


def test_routed_counter_sequence(small_arch):
    assert simulate(routed("counter2", small_arch), [()] * 4) == [(0, 0), (0, 1), (1, 0), (1, 1)]


@pytest.mark.parametrize("name", ["xor2", "and2", "full_adder", "ripple4", "mux6", "counter2",
                                  "counter3", "lut_chain"])
@pytest.mark.parametrize("seed", [0, 5])
def test_post_route_equivalence_small(name, seed, small_arch):
    n = circuit(name)
    r = routed(name, small_arch, seed)
    vecs = verification_vectors(n, seed)
    assert simulate(r, vecs) == simulate_netlist(n, vecs)


def test_random_vectors_above_ten_inputs():
    from ctxfpga.fabric.netlist import Netlist, LutNode
    n = Netlist("wide", [f"i{j}" for j in range(11)], ["y"],
                {"y": LutNode("y", ("i0", "i10"), (0, 1, 1, 0))}, {}).validate()
    vecs = verification_vectors(n, seed=1)
    assert len(vecs) == 10_000 and all(len(v) == 11 for v in vecs)
    assert vecs == verification_vectors(n, seed=1)


def test_unconfigured_fabric_reads_zero(small_arch):
    r = routed("xor2", small_arch)
    f = Fabric(small_arch)
    io = IoMap.of(r)
    assert f.run(exhaustive_vectors(2), io) == [(0,)] * 4


def test_second_context_runs_other_design(small_arch):
    x, a = routed("xor2", small_arch, 1), routed("and2", small_arch, 1)
    f = Fabric(small_arch)
    f.power_on(generate_bitstream(x), ctx=1)
    f.load(2, generate_bitstream(a, 2))
    vecs = exhaustive_vectors(2)
    assert f.run(vecs, IoMap.of(x)) == [(0,), (1,), (1,), (0,)]
    f.switch(2)
    assert f.run(vecs, IoMap.of(a)) == [(0,), (0,), (0,), (1,)]
    f.switch(1)
    assert f.run(vecs, IoMap.of(x)) == [(0,), (1,), (1,), (0,)]


def test_plane_read_back(small_arch):
    x, a = routed("xor2", small_arch), routed("ripple4", small_arch)
    bx, ba = generate_bitstream(x), generate_bitstream(a, 2)
    f = Fabric(small_arch)
    f.power_on(bx)
    f.load(2, ba)
    assert np.array_equal(f.plane_bits(1), bx.bits)
    assert np.array_equal(f.plane_bits(2), ba.bits)


def test_load_active_plane_rejected(small_arch):
    f = Fabric(small_arch)
    with pytest.raises(ContextInUseError):
        f.load(1, generate_bitstream(routed("xor2", small_arch)))


def test_power_on_size_checked(small_arch):
    with pytest.raises(DimensionError):
        Fabric(small_arch).power_on(np.zeros(3, dtype=np.uint8))


def test_vector_width_checked(small_arch):
    r = routed("xor2", small_arch)
    f = Fabric(small_arch)
    f.power_on(generate_bitstream(r))
    with pytest.raises(DimensionError):
        f.evaluate((1,), IoMap.of(r))


def test_complementary_planes_invert_outputs(small_arch):
    # every full-adder LUT reads primary inputs only, so inverting each LUT
    # table in plane 2 must invert every output
    from ctxfpga.fabric import Layout
    r = routed("full_adder", small_arch)
    bs = generate_bitstream(r)
    inv = bs.bits.copy()
    lay = Layout(small_arch)
    for c in r.packed.clusters:
        x, y, _ = r.placement.sites[f"clb{c.index}"]
        for slot, b in enumerate(c.bles):
            base = lay.ble_base(x, y, slot)
            inv[base:base + len(b.table)] ^= 1
    f = Fabric(small_arch)
    f.power_on(bs)
    f.load(2, inv)
    io = IoMap.of(r)
    vecs = exhaustive_vectors(3)
    before = f.run(vecs, io)
    f.switch(2)
    after = f.run(vecs, io)
    assert after == [tuple(1 - v for v in out) for out in before]


def test_run_flow_report(small_arch, techs):
    res = run_flow(circuit("full_adder"), small_arch, [techs["SRAM"], techs["FEFET_1CFG"]], seed=3)
    assert res.equivalent is True and res.vectors == 8
    kinds = [r["record"] for r in res.records()]
    assert kinds.count("critical_path") == 2 and "equivalence" in kinds
    assert "post-route equivalence: PASS" in res.to_text()


def test_congested_flow_names_stage():
    from ctxfpga.errors import CongestionError
    from ctxfpga.fabric import load_arch_file
    with pytest.raises(CongestionError) as ei:
        run_flow(circuit("full_adder"), load_arch_file("tiny"))
    assert ei.value.stage == "route" and str(ei.value).startswith("route: ")
