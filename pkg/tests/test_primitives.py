import itertools

import pytest
from hypothesis import given, strategies as st

from ctxfpga.device import FeFETState, program_two_step, FeFETArray, DEFAULT_PARAMS
from ctxfpga.errors import ContextInUseError, DimensionError, DomainError
from ctxfpga.primitives import (
    DualBit,
    DualLut,
    DualSwitch,
    LutConfig,
    dual_lut_eval,
    lut_eval,
    reprogram_inactive,
    switch_transmit,
    truth_index,
)

LVT, HVT = FeFETState.LOW_VTH, FeFETState.HIGH_VTH
AND2, OR2, XOR2 = (0, 0, 0, 1), (0, 1, 1, 1), (0, 1, 1, 0)


def test_lut_eval_examples():
    assert lut_eval(LutConfig.from_bits(XOR2), (1, 0)) == 1
    zero6 = LutConfig.from_bits([0] * 64)
    for v in itertools.product((0, 1), repeat=6):
        assert lut_eval(zero6, v) == 0


def test_high_vth_cell_reads_one():
    cfg = LutConfig(1, (HVT, LVT))
    assert lut_eval(cfg, (0,)) == 1 and lut_eval(cfg, (1,)) == 0


def test_lut_eval_exhaustive_k2():
    for table in itertools.product((0, 1), repeat=4):
        cfg = LutConfig.from_bits(table)
        assert cfg.bits == table
        for v in itertools.product((0, 1), repeat=2):
            assert lut_eval(cfg, v) == table[v[0] | v[1] << 1]


@given(st.integers(1, 6).flatmap(lambda k: st.tuples(
    st.lists(st.integers(0, 1), min_size=1 << k, max_size=1 << k),
    st.lists(st.integers(0, 1), min_size=k, max_size=k))))
def test_lut_eval_is_table_lookup(args):
    table, inputs = args
    assert lut_eval(LutConfig.from_bits(table), inputs) == table[truth_index(inputs)]


def test_lut_shape_errors():
    with pytest.raises(DimensionError):
        LutConfig.from_bits([0, 1, 1])
    with pytest.raises(DimensionError):
        lut_eval(LutConfig.from_bits(XOR2), (1,))
    with pytest.raises(DomainError):
        LutConfig(7, (LVT,) * 128)


def test_dual_lut_planes():
    d = DualLut(2, [AND2, OR2])
    assert dual_lut_eval(d, (1, 1)) == 1
    d.switch(2)
    assert dual_lut_eval(d, (0, 0)) == 0
    assert dual_lut_eval(d, (1, 0)) == 1


def test_dual_lut_identical_planes_ignore_active():
    d = DualLut(2, [XOR2, XOR2])
    for v in itertools.product((0, 1), repeat=2):
        a = dual_lut_eval(d, v)
        d.switch(2)
        assert dual_lut_eval(d, v) == a
        d.switch(1)


def test_dual_lut_inactive_reprogram_keeps_active_function():
    d = DualLut(2, [AND2, XOR2], active=1)
    reprogram_inactive(d, 2, OR2)
    assert d.plane(2).bits == OR2
    assert d.plane(1).bits == AND2
    assert dual_lut_eval(d, (1, 1)) == 1
    assert d.last_program.disturbs == ()


def test_switch_and_back_restores_function():
    d = DualLut(2, [XOR2, AND2])
    before = [dual_lut_eval(d, v) for v in itertools.product((0, 1), repeat=2)]
    d.switch(2)
    d.switch(1)
    assert [dual_lut_eval(d, v) for v in itertools.product((0, 1), repeat=2)] == before


@pytest.mark.parametrize("b1,b2", list(itertools.product((LVT, HVT), repeat=2)))
def test_switch_transmit_branch_states(b1, b2):
    s = DualSwitch((b1, b2), active=1)
    out = switch_transmit(s, 1)
    assert out.passed is (b1 is LVT)
    assert out.level == (1 if b1 is LVT else 0)
    s.switch(2)
    assert switch_transmit(s, 1).passed is (b2 is LVT)


def test_deactivated_branch_is_cut_off():
    s = DualSwitch((LVT, LVT), active=1)
    assert s.conducts(1) and not s.conducts(2)
    assert s.gate_bias(2) == 0.0


def test_blocked_switch_reads_low():
    s = DualSwitch((HVT, LVT), active=1)
    assert switch_transmit(s, 1).level == 0
    assert switch_transmit(s, 0).level == 0


def test_dual_switch_reprogram_inactive_branch():
    s = DualSwitch((HVT, LVT), active=2)
    reprogram_inactive(s, 1, LVT)
    assert s.branches[0].state is LVT
    assert switch_transmit(s, 1).level == 1          # branch 2 still drives the output
    assert s.branches[1].state is LVT
    with pytest.raises(ContextInUseError):
        reprogram_inactive(s, 2, HVT)


def test_reprogram_twice_keeps_second_pattern():
    d = DualLut(3, [[0] * 8, [0] * 8])
    p1, p2 = [1, 0, 1, 1, 0, 0, 1, 0], [0, 1, 0, 0, 1, 1, 0, 1]
    reprogram_inactive(d, 2, p1)
    reprogram_inactive(d, 2, p2)
    # independent replay through the device model
    oracle = FeFETArray.filled(1, 8, LVT)
    for p in (p1, p2):
        oracle = program_two_step(oracle, [p], DEFAULT_PARAMS).array
    assert d.plane(2).cells == oracle.cells[0]
    assert d.plane(2).bits == tuple(p2)


def test_reprogram_active_rejected():
    with pytest.raises(ContextInUseError) as ei:
        reprogram_inactive(DualLut(1), 1, [1, 0])
    assert ei.value.exit_code == 6


def test_dual_bit():
    b = DualBit((0, 1))
    assert b.value == 0
    reprogram_inactive(b, 2, 0)
    b.switch(2)
    assert b.value == 0


@given(st.lists(st.integers(0, 1), min_size=8, max_size=8),
       st.lists(st.integers(0, 1), min_size=8, max_size=8),
       st.lists(st.tuples(st.integers(0, 1), st.integers(0, 1), st.integers(0, 1)), max_size=12),
       st.integers(0, 12))
def test_non_interference_random_k3(active_tbl, new_tbl, vectors, at):
    ref = DualLut(3, [active_tbl, [0] * 8])
    dut = DualLut(3, [active_tbl, [0] * 8])
    out_ref, out_dut = [], []
    for i, v in enumerate(vectors + [(0, 0, 0)]):
        if i == at:
            reprogram_inactive(dut, 2, new_tbl)
        out_ref.append(dual_lut_eval(ref, v))
        out_dut.append(dual_lut_eval(dut, v))
    assert out_ref == out_dut
