"""``ctxfpga`` command line: device, flow, cost, schedule and cosim.

Every subcommand prints its report to stdout, either as aligned text or, with
``--format records``, as JSON lines (one object per line, sorted keys).
``--out DIR`` also writes the report plus plain tab-separated data series
for plotting. Exit codes: 0 success, 2 usage, 3 parse, 4 CAD,
5 context not ready, 6 context in use, 1 anything else from the toolkit.
"""

from __future__ import annotations

import argparse
import json
import sys
from decimal import Decimal
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__
from .errors import CtxFpgaError, ParseError, UsageError, ValidationError
from .tomlio import line_of, load_toml
from .units import format_time, parse_quantity

DEFAULT_SEED = 0


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        raise UsageError(message)


class Report:
    """Collected output of one subcommand."""

    def __init__(self, name: str):
        self.name = name
        self.text: list[str] = []
        self.records: list[dict] = []
        self.files: dict[str, str | bytes] = {}

    def line(self, s: str = "") -> None:
        self.text.append(s)

    def render(self, fmt: str) -> str:
        if fmt == "records":
            return "".join(json.dumps(r, sort_keys=True, default=_jsonable) + "\n" for r in self.records)
        return "\n".join(self.text).rstrip("\n") + "\n"


def _jsonable(o):
    if isinstance(o, (np.integer,)):
        return int(o)
    if isinstance(o, (np.floating,)):
        return float(o)
    if hasattr(o, "value"):
        return o.value
    return str(o)


def _tsv(header: Sequence[str], rows) -> str:
    return "\t".join(header) + "\n" + "".join("\t".join(repr(v) if isinstance(v, float) else str(v)
                                                        for v in r) + "\n" for r in rows)


def _existing(path: str, what: str, shipped=None) -> Path:
    p = Path(path)
    if p.exists():
        return p
    if shipped is not None and not p.suffix:
        s = shipped(path)
        if s.exists():
            return s
    raise UsageError(f"{what} file not found: {path}")


# ---------------------------------------------------------------- device

def _parse_sweep(spec: str) -> list[float]:
    parts = spec.split(":")
    if len(parts) != 3:
        raise UsageError(f"sweep must be start:stop:step, got {spec!r}")
    unit = ""
    last = parts[2].strip()
    for i, ch in enumerate(last):
        if ch.isalpha():
            unit = last[i:]
            parts[2] = last[:i]
            break
    try:
        start, stop, step = (Decimal(str(parse_quantity(p.strip() + unit, "voltage"))) for p in parts)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if step <= 0 or stop < start:
        raise UsageError("sweep needs step > 0 and stop >= start")
    out, v = [], start
    while v <= stop:
        out.append(float(v))
        v += step
    return out


def _read_target(path: Path) -> np.ndarray:
    rows = []
    for n, raw in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        s = raw.split("#", 1)[0].replace(" ", "").replace(",", "")
        if not s:
            continue
        if set(s) - {"0", "1"}:
            raise ParseError(f"target rows hold only 0 and 1, got {raw!r}", line=n, source=str(path))
        rows.append([int(c) for c in s])
    if not rows or len({len(r) for r in rows}) != 1:
        raise ParseError("target must be a non-empty rectangle of bits", source=str(path))
    return np.array(rows, dtype=int)


def cmd_device(args) -> Report:
    from .device import (
        DEFAULT_PARAMS,
        FeFETArray,
        FeFETState,
        WritePulse,
        apply_pulse,
        program_two_step,
        switching_time,
    )

    rep = Report("device")
    p = DEFAULT_PARAMS
    if not (args.sweep or args.program or args.pulse):
        raise UsageError("device needs --sweep, --program or --pulse")
    if args.sweep:
        volts = _parse_sweep(args.sweep)
        rows = [(v, switching_time(p, v)) for v in volts]
        rep.line(f"{'amplitude':>10}  {'t_sw':>12}")
        for v, t in rows:
            rep.line(f"{v:>9.3f}V  {format_time(t):>12}")
            rep.records.append({"record": "sweep", "amplitude_v": v, "t_sw_s": t})
        rep.files["sweep.tsv"] = _tsv(("amplitude_v", "t_sw_s"), rows)
    if args.program:
        target = _read_target(_existing(args.program, "target"))
        init = FeFETArray.filled(*target.shape, FeFETState.LOW_VTH)
        res = program_two_step(init, target, p)
        rep.line(f"two-step plan for a {target.shape[0]}x{target.shape[1]} array:")
        for step in res.plan:
            rep.line(f"  {step.label:<12} WL {list(step.wl)} body {list(step.body)} for {format_time(step.width)}")
            rep.records.append({"record": "step", "label": step.label, "wl_v": list(step.wl),
                                "body_v": list(step.body), "width_s": step.width})
        reached = bool((res.array.to_bits() == target).all())
        rep.line(f"target reached: {'yes' if reached else 'no'}")
        rep.line(f"disturbs: {len(res.disturbs)}")
        for d in res.disturbs:
            rep.line(f"  cell ({d.row},{d.col}) {'neighbor ' if d.neighbor else ''}"
                     f"worst {d.worst_amplitude} V exposure {d.exposure:.3g}")
        rep.records.append({"record": "program", "reached": reached, "disturbs": len(res.disturbs)})
        rep.records += [{"record": "disturb", "row": d.row, "col": d.col, "neighbor": d.neighbor,
                         "worst_amplitude_v": d.worst_amplitude, "exposure": d.exposure}
                        for d in res.disturbs]
    if args.pulse:
        try:
            amp_s, width_s = args.pulse.split(",")
            amp, width = parse_quantity(amp_s, "voltage"), parse_quantity(width_s, "time")
            pulse = WritePulse(amp, width)
        except ValueError as exc:
            raise UsageError(f"--pulse expects AMPLITUDE,WIDTH such as -2V,1us ({exc})") from None
        t_sw = switching_time(p, abs(amp)) if amp else float("inf")
        rep.line(f"pulse {amp} V for {format_time(width)} (t_sw {format_time(t_sw)})")
        for s in FeFETState:
            after = apply_pulse(s, pulse, p)
            verdict = "no switch" if after is s else f"switch to {after.value}"
            rep.line(f"  from {s.value}: {verdict}")
            rep.records.append({"record": "pulse", "amplitude_v": amp, "width_s": width,
                                "from": s.value, "to": after.value, "switched": after is not s})
    return rep


# ----------------------------------------------------------------- flow

def cmd_flow(args) -> Report:
    from .fabric.arch import load_arch_file, shipped_arch_path
    from .fabric.flow import run_flow
    from .fabric.netlist import parse_netlist
    from .techlib import load_tech_file, shipped_tech_path

    net_path = _existing(args.netlist, "netlist", _shipped_circuit)
    arch = load_arch_file(_existing(args.arch, "arch", shipped_arch_path))
    techs = [load_tech_file(_existing(t, "tech", shipped_tech_path)) for t in args.tech]
    if not techs:
        raise UsageError("flow needs at least one --tech file")
    n = parse_netlist(net_path.read_text(encoding="utf-8"), source=str(args.netlist))
    res = run_flow(n, arch, techs, seed=args.seed, verify=not args.no_verify, ctx=args.ctx)
    rep = Report("flow")
    rep.text.append(res.to_text())
    rep.records += res.records()
    rep.files["bitstream.bin"] = res.bitstream.to_bytes()
    rep.files["timing.tsv"] = _tsv(("tech", "critical_path_s", "lut_s", "cb_s", "sb_s"),
                                   [(t.tech, t.critical_path, *(t.breakdown[k] for k in ("lut", "cb", "sb")))
                                    for t in res.timing])
    return rep


def _shipped_circuit(name: str) -> Path:
    from importlib import resources
    return Path(str(resources.files("ctxfpga") / "data" / "circuits" / f"{name}.blif"))


# ----------------------------------------------------------------- cost

def cmd_cost(args) -> Report:
    from .techlib import compare_report, load_tech_file, shipped_tech_path

    base = load_tech_file(_existing(args.baseline, "tech", shipped_tech_path))
    cand = load_tech_file(_existing(args.candidate, "tech", shipped_tech_path))
    rr = compare_report(base, cand)
    rep = Report("cost")
    rep.text.append(rr.to_text())
    rep.records += [dict(r, record="reduction") for r in rr.records()]
    rep.files["reduction.tsv"] = _tsv(("kind", "metric", "baseline", "candidate", "reduction_pct"),
                                      [(r["kind"], r["metric"], r["baseline"], r["candidate"],
                                        r["reduction_pct"]) for r in rr.records()])
    return rep


# ------------------------------------------------------------- schedule

def cmd_schedule(args) -> Report:
    from .scheduler import load_scenario_file, run_scenario, shipped_scenario_path

    sc = load_scenario_file(_existing(args.scenario, "scenario", shipped_scenario_path))
    out = run_scenario(sc, args.mode or None)
    rep = Report("schedule")
    rep.text.append(out.to_text())
    rep.records += out.records()
    rows = [(tl.mode.value, r.name, r.config, r.slot, r.load_start if r.load_start is not None else "",
             r.load_end if r.load_end is not None else "", r.exec_start, r.exec_end)
            for tl in out.timelines.values() for r in tl.records]
    rep.files["timeline.tsv"] = _tsv(("mode", "task", "config", "slot", "load_start_s", "load_end_s",
                                      "exec_start_s", "exec_end_s"), rows)
    return rep


# ---------------------------------------------------------------- cosim

_BRANCH = {"LVT": "LOW_VTH", "HVT": "HIGH_VTH", "LOW_VTH": "LOW_VTH", "HIGH_VTH": "HIGH_VTH"}


def cmd_cosim(args) -> Report:
    rep = Report("cosim")
    if args.replay:
        return _replay(args.replay, rep)
    if not args.plan:
        raise UsageError("cosim needs a load plan file or --replay")
    return _cosim_plan(_existing(args.plan, "plan"), args.seed, rep)


def _replay(spec: str, rep: Report) -> Report:
    from .context import replay_cb_experiment
    from .device import FeFETState

    try:
        b1, b2 = (FeFETState[_BRANCH[s.strip().upper()]] for s in spec.split(","))
    except (KeyError, ValueError):
        raise UsageError(f"--replay expects two branch states such as LVT,HVT, got {spec!r}") from None
    res = replay_cb_experiment(b1, b2)
    rep.line(f"replay branch1={b1.value} branch2={b2.value}")
    rep.line("phase outputs: " + " ".join(map(str, res.outputs)))
    rep.line(f"stable under loading: {'PASS' if res.stable else 'FAIL'}")
    rep.records += [{"record": "sample", "phase": i, "output": o} for i, o in enumerate(res.outputs)]
    rep.records.append({"record": "verdict", "stable": res.stable})
    rep.files["events.txt"] = res.trace.to_text()
    rep.files["outputs.tsv"] = _tsv(("phase", "output"), enumerate(res.outputs))
    return rep


def _cosim_plan(path: Path, seed: int, rep: Report) -> Report:
    """Plan file (TOML)::

        arch = "small"                # shipped name or path
        netlist = "xor2"              # runs on the active plane 1
        period = "10 ns"
        repeat = 4                    # passes over the exhaustive vectors
        [[load]]
        ctx = 2
        netlist = "and2"
        start = "5 ns"
        rate = "3.2 Gb/s"
    """
    from .context import ContextStore, LoadAction, co_simulate
    from .fabric.arch import load_arch_file, shipped_arch_path
    from .fabric.bitstream import generate_bitstream
    from .fabric.flow import run_flow, verification_vectors
    from .fabric.netlist import parse_netlist
    from .fabric.runtime import Fabric, IoMap

    text = path.read_text(encoding="utf-8")
    doc = load_toml(text, str(path))
    base = path.parent

    def resolve(name: str, what: str, shipped) -> Path:
        p = Path(name)
        if not p.is_absolute() and (base / p).exists():
            return base / p
        return _existing(name, what, shipped)

    def design(name: str):
        p = resolve(name, "netlist", _shipped_circuit)
        n = parse_netlist(p.read_text(encoding="utf-8"), source=str(p))
        return n, run_flow(n, arch, seed=seed, verify=False)

    try:
        arch = load_arch_file(resolve(doc.get("arch", "small"), "arch", shipped_arch_path))
        period = parse_quantity(doc.get("period", "10 ns"), "time")
        repeat = int(doc.get("repeat", 1))
    except ValueError as exc:
        raise ValidationError(str(exc), source=str(path)) from None
    if "netlist" not in doc:
        raise ValidationError("missing active netlist", field="netlist", source=str(path))
    n1, f1 = design(doc["netlist"])
    fab = Fabric(arch)
    fab.power_on(f1.bitstream, ctx=1)
    store = ContextStore(fab, io={1: IoMap.of(f1.routed)})
    plan = []
    for i, ld in enumerate(doc.get("load", [])):
        try:
            ctx = int(ld["ctx"])
            _, fl = design(ld["netlist"])
            bs = generate_bitstream(fl.routed, ctx)
            plan.append(LoadAction(ctx, bs, parse_quantity(ld.get("start", 0), "time"),
                                   parse_quantity(ld.get("rate", "3.2 Gb/s"), "rate"),
                                   IoMap.of(fl.routed), str(ld["netlist"])))
        except (KeyError, ValueError) as exc:
            raise ValidationError(f"load {i + 1}: {exc}", field="load",
                                  line=line_of(text, "load"), source=str(path)) from None
    vecs = verification_vectors(n1, seed)[: 1 << min(len(n1.inputs), 10)] * max(1, repeat)
    res = co_simulate(store, vecs, plan, period=period)
    verdict = "PASS" if res.equal else "FAIL"
    rep.line(f"co-simulation of {n1.name} on plane 1 with {len(plan)} load(s) into the inactive plane")
    rep.line(f"{len(vecs)} cycles at {format_time(period)}: traces {'equal' if res.equal else 'differ'}")
    rep.line(f"non-interference: {verdict}")
    rep.records.append({"record": "verdict", "verdict": verdict, "cycles": len(vecs)})
    rep.records += [dict(r, record="event") for r in res.trace.records()]
    rep.files["with_load.txt"] = "".join(" ".join(map(str, o)) + "\n" for o in res.with_load)
    rep.files["without_load.txt"] = "".join(" ".join(map(str, o)) + "\n" for o in res.without_load)
    rep.files["events.txt"] = res.trace.to_text()
    return rep


# ----------------------------------------------------------------- main

def _global_flags(defaults: bool) -> argparse.ArgumentParser:
    # sub-commands repeat the flags with suppressed defaults so that a value
    # given before the sub-command name is not overwritten
    g = _Parser(add_help=False)
    d = (lambda v: v) if defaults else (lambda v: argparse.SUPPRESS)
    g.add_argument("--seed", type=int, default=d(DEFAULT_SEED), help="RNG seed (default 0)")
    g.add_argument("--out", default=d(None), help="directory for report and plot data files")
    g.add_argument("--format", choices=("text", "records"), default=d("text"),
                   help="text tables or JSON-lines records")
    return g


def build_parser() -> argparse.ArgumentParser:
    common = _global_flags(False)
    ap = _Parser(prog="ctxfpga", description="Dual-context FeFET FPGA toolkit",
                 parents=[_global_flags(True)])
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    d = sub.add_parser("device", parents=[common], help="device switching and programming")
    d.add_argument("--sweep", metavar="START:STOP:STEP", help="e.g. 2:4:0.25V")
    d.add_argument("--program", metavar="TARGET", help="file of 0/1 rows")
    d.add_argument("--pulse", metavar="AMP,WIDTH", help="e.g. -2V,1us")

    f = sub.add_parser("flow", parents=[common], help="pack, place, route, time, bitstream")
    f.add_argument("netlist", help="BLIF file or shipped circuit name")
    f.add_argument("--arch", default="default", help="arch TOML or shipped name (default: default)")
    f.add_argument("--tech", action="append", default=[], help="tech TOML or shipped name; repeatable")
    f.add_argument("--ctx", type=int, default=1, choices=(1, 2))
    f.add_argument("--no-verify", action="store_true", help="skip post-route equivalence")

    c = sub.add_parser("cost", parents=[common], help="primitive cost reductions")
    c.add_argument("baseline")
    c.add_argument("candidate")

    s = sub.add_parser("schedule", parents=[common], help="reconfiguration timelines")
    s.add_argument("scenario", help="scenario TOML or shipped name")
    s.add_argument("--mode", action="append", choices=("CONVENTIONAL", "PRELOADED_2", "DYNAMIC"))

    m = sub.add_parser("cosim", parents=[common], help="load-while-running co-simulation")
    m.add_argument("plan", nargs="?", help="load plan TOML")
    m.add_argument("--replay", metavar="B1,B2", help="replay the CB switch experiment, e.g. LVT,HVT")
    return ap


COMMANDS = {"device": cmd_device, "flow": cmd_flow, "cost": cmd_cost,
            "schedule": cmd_schedule, "cosim": cmd_cosim}


def _write_out(out: str, rep: Report, fmt: str) -> None:
    d = Path(out)
    d.mkdir(parents=True, exist_ok=True)
    (d / f"{rep.name}.{'jsonl' if fmt == 'records' else 'txt'}").write_text(rep.render(fmt), encoding="utf-8")
    for name, data in sorted(rep.files.items()):
        if isinstance(data, bytes):
            (d / name).write_bytes(data)
        else:
            (d / name).write_text(data, encoding="utf-8")


def _join_negative_values(argv: Sequence[str]) -> list[str]:
    """Turn ``--pulse -2V,1us`` into ``--pulse=-2V,1us`` (argparse would read
    the negative amplitude as an option)."""
    out, it = [], iter(argv)
    for a in it:
        if a in ("--pulse", "--sweep"):
            nxt = next(it, None)
            if nxt is not None and nxt[:1] == "-" and (nxt[1:2].isdigit() or nxt[1:2] == "."):
                out.append(f"{a}={nxt}")
                continue
            out.append(a)
            if nxt is not None:
                out.append(nxt)
            continue
        out.append(a)
    return out


def main(argv: Sequence[str] | None = None) -> int:
    argv = _join_negative_values(sys.argv[1:] if argv is None else list(argv))
    try:
        args = build_parser().parse_args(argv)
        rep = COMMANDS[args.command](args)
        sys.stdout.write(rep.render(args.format))
        if args.out:
            _write_out(args.out, rep, args.format)
        return 0
    except CtxFpgaError as exc:
        print(f"ctxfpga: error: {exc}", file=sys.stderr)
        return exc.exit_code
    except (FileNotFoundError, IsADirectoryError, PermissionError) as exc:
        print(f"ctxfpga: error: {exc}", file=sys.stderr)
        return UsageError.exit_code


if __name__ == "__main__":
    sys.exit(main())
