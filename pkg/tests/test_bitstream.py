import dataclasses

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ctxfpga.errors import DimensionError, ParseError
from ctxfpga.fabric import (
    Bitstream,
    FabricArch,
    Layout,
    empty_bitstream,
    encode_config,
    generate_bitstream,
    load_bitstream,
    pack,
    parse_netlist,
    place,
    route,
)
from ctxfpga.fabric.bitstream import HEADER, MAGIC
from ctxfpga.fabric.netlist import LutNode

from conftest import circuit


def routed(n, arch, seed=0):
    p = pack(n, arch)
    return route(p, place(p, arch, seed), arch)


def test_empty_bitstream_length(small_arch, default_arch):
    for a in (small_arch, default_arch):
        bs = empty_bitstream(a)
        assert len(bs) == a.bitstream_length()
        assert not bs.bits.any()
        cfg = load_bitstream(bs)
        assert cfg.switches == frozenset()
        assert all(not any(s.lut) for s in cfg.bles.values())


def test_small_arch_length_by_hand(small_arch):
    a = small_arch
    per_ble = 2 ** a.k + 3 + a.k * (a.clb_inputs + a.n_ble)
    assert Layout(a).length == a.n_clb * a.n_ble * per_ble + a.cb_switch_count() + a.sb_switch_count()


@pytest.mark.parametrize("name", ["xor2", "full_adder", "ripple4", "mux6", "counter3"])
def test_generate_load_generate_round_trip(name, small_arch):
    bs = generate_bitstream(routed(circuit(name), small_arch))
    again = encode_config(load_bitstream(bs), bs.ctx)
    assert again == bs


def test_binary_round_trip(small_arch):
    bs = generate_bitstream(routed(circuit("ripple4"), small_arch), ctx=2)
    data = bs.to_bytes()
    magic, arch_hash, ctx, n = HEADER.unpack_from(data)
    assert (magic, arch_hash, ctx, n) == (MAGIC, small_arch.hash, 2, len(bs))
    assert len(data) == HEADER.size + (len(bs) + 7) // 8
    assert Bitstream.from_bytes(data, small_arch) == bs


def test_binary_rejects_bad_input(small_arch):
    data = generate_bitstream(routed(circuit("xor2"), small_arch)).to_bytes()
    with pytest.raises(ParseError):
        Bitstream.from_bytes(b"XXXX" + data[4:], small_arch)
    with pytest.raises(ParseError):
        Bitstream.from_bytes(data, small_arch.replace(channel_width=small_arch.channel_width + 1))
    with pytest.raises(ParseError):
        Bitstream.from_bytes(data[:HEADER.size + 3], small_arch)
    with pytest.raises(ParseError):
        Bitstream.from_bytes(data[:5], small_arch)


def test_wrong_length_rejected(small_arch):
    with pytest.raises(DimensionError):
        Bitstream(small_arch, 1, np.zeros(10, dtype=np.uint8))


@settings(max_examples=25, deadline=None)
@given(st.sampled_from(["full_adder", "ripple4", "mux6", "counter3", "lut_chain"]), st.data())
def test_single_lut_bit_change_is_single_bit_diff(name, data):
    from ctxfpga.fabric import load_arch_file
    arch = load_arch_file("small")
    n = circuit(name)
    out = data.draw(st.sampled_from(sorted(n.luts)))
    lut = n.luts[out]
    idx = data.draw(st.integers(0, len(lut.table) - 1))
    table = list(lut.table)
    table[idx] ^= 1
    luts = dict(n.luts)
    luts[out] = LutNode(out, lut.inputs, tuple(table))
    m = dataclasses.replace(n, luts=luts)
    a = generate_bitstream(routed(n, arch))
    b = generate_bitstream(routed(m, arch))
    assert len(a.diff(b)) == 1


def test_bit_positions_follow_layout(small_arch):
    r = routed(circuit("xor2"), small_arch)
    bs = generate_bitstream(r)
    lay = Layout(small_arch)
    on = set(np.flatnonzero(bs.bits[lay.cb_base:]))
    assert on == r.used_switches()
    x, y, _ = r.placement.sites["clb0"]
    base = lay.ble_base(x, y, 0)
    table = r.packed.clusters[0].bles[0].table
    assert tuple(bs.bits[base:base + len(table)]) == table
    assert bs.bits[lay.out_lut(base)] == 1 and bs.bits[lay.out_ff(base)] == 0
