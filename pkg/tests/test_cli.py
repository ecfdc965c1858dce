import json
import re

import pytest

from ctxfpga.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_device_sweep_is_monotone(capsys, tmp_path):
    code, out, _ = run(capsys, "--out", str(tmp_path), "device", "--sweep", "2:4:0.25V")
    assert code == 0
    rows = (tmp_path / "sweep.tsv").read_text().splitlines()[1:]
    volts, times = zip(*[(float(a), float(b)) for a, b in (r.split("\t") for r in rows)])
    assert len(volts) == 9 and volts[0] == 2.0 and volts[-1] == 4.0
    assert all(a > b for a, b in zip(times, times[1:]))
    assert times[-1] == pytest.approx(10e-9) and times[0] == pytest.approx(10e-3)


def test_device_program_and_pulse(capsys, tmp_path):
    target = tmp_path / "t.txt"
    target.write_text("0 1\n1 0\n")
    code, out, _ = run(capsys, "device", "--program", str(target))
    assert code == 0 and "target reached: yes" in out
    code, out, _ = run(capsys, "device", "--pulse", "-2V,1us")
    assert code == 0 and out.count("no switch") == 2
    code, out, _ = run(capsys, "device", "--pulse", "4V,20ns")
    assert "from HVT: switch to LVT" in out and "from LVT: no switch" in out


def test_device_requires_an_action(capsys):
    assert run(capsys, "device")[0] == 2
    assert run(capsys, "device", "--sweep", "4:2:0.5V")[0] == 2


def test_cost_reports_reductions(capsys, tmp_path):
    code, out, _ = run(capsys, "--out", str(tmp_path), "cost", "sram", "fefet_2cfg")
    assert code == 0
    assert re.search(r"LUT6\s+1\s+63\.0", out)
    assert re.search(r"CB_SWITCH\s+1\s+71\.1\s+\S+\s+82\.7", out)
    assert re.search(r"SB_SWITCH\s+1\s+71\.1\s+\S+\s+53\.6", out)
    assert (tmp_path / "reduction.tsv").exists()


def test_flow_xor2(capsys, tmp_path):
    code, out, _ = run(capsys, "--out", str(tmp_path), "flow", "xor2", "--arch", "small",
                       "--tech", "sram", "--tech", "fefet_1cfg")
    assert code == 0
    assert "post-route equivalence: PASS" in out
    assert len((tmp_path / "timing.tsv").read_text().splitlines()) == 3
    assert (tmp_path / "bitstream.bin").read_bytes()[:4] == b"FFPG"


def test_flow_is_reproducible(capsys):
    argv = ("--seed", "7", "flow", "full_adder", "--arch", "small", "--tech", "sram")
    first = run(capsys, *argv)
    assert first[0] == 0 and first == run(capsys, *argv)


def test_global_flags_after_subcommand(capsys):
    a = run(capsys, "--format", "records", "cost", "sram", "rram")
    b = run(capsys, "cost", "sram", "rram", "--format", "records")
    assert a == b
    assert all(json.loads(line)["record"] == "reduction" for line in a[1].splitlines())


def test_flow_error_codes(capsys):
    code, _, err = run(capsys, "flow", "ripple4", "--arch", "tiny", "--tech", "sram")
    assert code == 4 and re.search(r"error: (pack|place|route): ", err)
    assert run(capsys, "flow", "comb_loop", "--tech", "sram")[0] == 3
    assert run(capsys, "flow", "no_such_circuit", "--tech", "sram")[0] == 2
    assert run(capsys, "flow", "xor2")[0] == 2
    assert run(capsys, "bogus")[0] == 2


def test_schedule_scenarios(capsys, tmp_path):
    code, out, _ = run(capsys, "schedule", "derived3")
    assert code == 0 and "saving DYNAMIC vs CONVENTIONAL: 25.0%" in out
    code, out, _ = run(capsys, "schedule", "pipeline4")
    assert "mode DYNAMIC: total 8 s" in out and "mode CONVENTIONAL: total 15 s" in out
    code, out, _ = run(capsys, "--out", str(tmp_path), "schedule", "preloaded_alternation",
                       "--mode", "PRELOADED_2", "--mode", "CONVENTIONAL")
    assert code == 0 and "PRELOADED_2" in out
    assert "DYNAMIC" not in (tmp_path / "timeline.tsv").read_text()


def test_schedule_preloaded_rejects_three_configs(capsys):
    assert run(capsys, "schedule", "derived3", "--mode", "PRELOADED_2")[0] == 2


def _plan(tmp_path, ctx):
    p = tmp_path / "plan.toml"
    p.write_text(f'arch = "small"\nnetlist = "xor2"\nperiod = "10 ns"\nrepeat = 3\n'
                 f'[[load]]\nctx = {ctx}\nnetlist = "and2"\nstart = "5 ns"\nrate = "3.2 Gb/s"\n')
    return p


def test_cosim_plan(capsys, tmp_path):
    code, out, _ = run(capsys, "--out", str(tmp_path / "o"), "cosim", str(_plan(tmp_path, 2)))
    assert code == 0 and "non-interference: PASS" in out
    o = tmp_path / "o"
    assert (o / "with_load.txt").read_text() == (o / "without_load.txt").read_text()
    assert "load" in (o / "events.txt").read_text()


def test_cosim_active_plane_is_refused(capsys, tmp_path):
    assert run(capsys, "cosim", str(_plan(tmp_path, 1)))[0] == 6


@pytest.mark.parametrize("spec,trace", [("LVT,HVT", "0 1 0 1 0 1"), ("HVT,HVT", "0 0 0 0 0 0")])
def test_cosim_replay(capsys, spec, trace):
    code, out, _ = run(capsys, "cosim", "--replay", spec)
    assert code == 0 and f"phase outputs: {trace}" in out and "PASS" in out


def test_cosim_usage(capsys):
    assert run(capsys, "cosim")[0] == 2
    assert run(capsys, "cosim", "--replay", "LVT")[0] == 2
