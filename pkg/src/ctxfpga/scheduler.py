"""Workload timelines under three reconfiguration disciplines.

``CONVENTIONAL``
    One configuration plane: whenever the next task needs a different
    configuration, it is loaded and then executed, serially.
``PRELOADED_2``
    Both configurations are loaded up front (``r1 + r2`` on one port, unless
    amortized away) and execution only pays ``t_switch`` per change.
``DYNAMIC``
    Two planes and one configuration port. A new configuration streams into
    the idle plane while the other plane executes. The idle plane becomes
    free once the configuration it holds has finished its last execution;
    for a plain sequence of distinct tasks that gives
    ``load_i start = exec_{i-1} start`` and
    ``exec_i start = max(exec_{i-1} end, load_i end)``.
    A configuration still resident in either plane is not reloaded. No
    switch time is charged, so fully hidden loads cost exactly nothing.

Every time is in seconds. ``count_first_load`` decides whether the first
task's load counts toward the total in every mode.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Sequence

from .errors import DomainError, ModeError, ValidationError
from .tomlio import line_of, load_toml
from .units import parse_quantity

DEFAULT_T_SWITCH = 1e-9


class Mode(str, enum.Enum):
    CONVENTIONAL = "CONVENTIONAL"
    PRELOADED_2 = "PRELOADED_2"
    DYNAMIC = "DYNAMIC"


def reconfig_time(bits: float, load_rate: float) -> float:
    if not bits > 0:
        raise DomainError(f"bitstream size must be positive, got {bits}")
    if not load_rate > 0:
        raise DomainError(f"load rate must be positive, got {load_rate}")
    return bits / load_rate


@dataclass(frozen=True)
class Task:
    name: str
    config: str
    exec_time: float
    bits: float | None = None
    load_time: float | None = None   # overrides bits / rate when given
    repeat: int = 1

    def __post_init__(self) -> None:
        if self.exec_time < 0:
            raise DomainError(f"task {self.name}: execution time must be >= 0")
        if self.repeat < 1:
            raise DomainError(f"task {self.name}: repeat count must be >= 1")
        if self.load_time is None and self.bits is None:
            raise DomainError(f"task {self.name}: needs bitstream bits or a load time")
        if self.load_time is not None and self.load_time < 0:
            raise DomainError(f"task {self.name}: load time must be >= 0")

    def reconfig(self, rate: float | None) -> float:
        if self.load_time is not None:
            return self.load_time
        if rate is None:
            raise DomainError(f"task {self.name}: no load rate to convert {self.bits} bits")
        return reconfig_time(self.bits, rate)


@dataclass(frozen=True)
class Workload:
    tasks: tuple[Task, ...]
    mode: Mode = Mode.DYNAMIC
    load_rate: float | None = None
    t_switch: float = DEFAULT_T_SWITCH
    count_first_load: bool = True
    amortize_preloads: bool = False

    def with_mode(self, mode: Mode | str) -> "Workload":
        return replace(self, mode=Mode(mode))

    def expanded(self) -> list[Task]:
        out = []
        for t in self.tasks:
            out += [replace(t, repeat=1)] * t.repeat
        return out


@dataclass(frozen=True)
class TaskRecord:
    name: str
    config: str
    load_start: float | None
    load_end: float | None
    exec_start: float
    exec_end: float
    slot: int


@dataclass
class Timeline:
    mode: Mode
    records: list[TaskRecord] = field(default_factory=list)
    total: float = 0.0
    loads: int = 0
    switches: int = 0

    def to_text(self) -> str:
        lines = [f"mode {self.mode.value}: total {self.total:.9g} s, {self.loads} loads, "
                 f"{self.switches} switches",
                 f"{'task':<12}{'config':<10}{'slot':>4}{'load start':>14}{'load end':>14}"
                 f"{'exec start':>14}{'exec end':>14}"]
        for r in self.records:
            ls = "-" if r.load_start is None else f"{r.load_start:.6g}"
            le = "-" if r.load_end is None else f"{r.load_end:.6g}"
            lines.append(f"{r.name:<12}{r.config:<10}{r.slot:>4}{ls:>14}{le:>14}"
                         f"{r.exec_start:>14.6g}{r.exec_end:>14.6g}")
        return "\n".join(lines)

    def as_records(self) -> list[dict]:
        rec = [{"record": "task", "mode": self.mode.value, "task": r.name, "config": r.config,
                "slot": r.slot, "load_start_s": r.load_start, "load_end_s": r.load_end,
                "exec_start_s": r.exec_start, "exec_end_s": r.exec_end} for r in self.records]
        rec.append({"record": "total", "mode": self.mode.value, "total_s": self.total,
                    "loads": self.loads, "switches": self.switches})
        return rec


def time_saving(baseline: Timeline | float, candidate: Timeline | float) -> float:
    b = baseline.total if isinstance(baseline, Timeline) else baseline
    c = candidate.total if isinstance(candidate, Timeline) else candidate
    if not b > 0:
        raise DomainError("baseline total must be positive")
    return 100.0 * (b - c) / b


def schedule(w: Workload) -> Timeline:
    tasks = w.expanded()
    if not tasks:
        return Timeline(w.mode)
    rs = [t.reconfig(w.load_rate) for t in tasks]
    if not w.count_first_load:
        rs[0] = 0.0
    if w.mode is Mode.CONVENTIONAL:
        return _conventional(tasks, rs)
    if w.mode is Mode.PRELOADED_2:
        return _preloaded(tasks, rs, w)
    return _dynamic(tasks, rs)


def schedule_repeated(w: Workload) -> Timeline:
    for t in w.tasks:
        if t.repeat < 1:
            raise DomainError(f"task {t.name}: repeat count must be >= 1")
    return schedule(w)


def _conventional(tasks: list[Task], rs: list[float]) -> Timeline:
    tl = Timeline(Mode.CONVENTIONAL)
    t, loaded = 0.0, None
    for task, r in zip(tasks, rs):
        ls = le = None
        if task.config != loaded:
            ls, le = t, t + r
            t = le
            tl.loads += 1
            loaded = task.config
        tl.records.append(TaskRecord(task.name, task.config, ls, le, t, t + task.exec_time, 1))
        t += task.exec_time
    tl.total = t
    return tl


def _preloaded(tasks: list[Task], rs: list[float], w: Workload) -> Timeline:
    configs: dict[str, int] = {}
    first_r: dict[str, float] = {}
    for task, r in zip(tasks, rs):
        if task.config not in configs:
            configs[task.config] = len(configs) + 1
            first_r[task.config] = r
    if len(configs) > 2:
        raise ModeError(f"PRELOADED_2 holds two configurations, workload uses {len(configs)}")
    tl = Timeline(Mode.PRELOADED_2)
    t = 0.0
    load_at: dict[str, tuple[float, float]] = {}
    for cfg in configs:
        r = 0.0 if w.amortize_preloads else first_r[cfg]
        load_at[cfg] = (t, t + r)
        t += r
        tl.loads += 1
    active = None
    for task in tasks:
        if active is not None and task.config != active:
            t += w.t_switch
            tl.switches += 1
        ls, le = load_at.pop(task.config, (None, None))
        tl.records.append(TaskRecord(task.name, task.config, ls, le, t, t + task.exec_time,
                                     configs[task.config]))
        t += task.exec_time
        active = task.config
    tl.total = t
    return tl


def _dynamic(tasks: list[Task], rs: list[float]) -> Timeline:
    tl = Timeline(Mode.DYNAMIC)
    slot_cfg = [None, None]       # configuration held by each plane
    slot_free = [0.0, 0.0]        # end of the last execution that used the plane
    port_free = 0.0
    active = None                 # plane index executing, or None before the first task
    exec_end = 0.0
    for task, r in zip(tasks, rs):
        ls = le = None
        if active is not None and slot_cfg[active] == task.config:
            slot = active
            start = exec_end
        elif task.config in slot_cfg:
            slot = slot_cfg.index(task.config)
            start = exec_end
            tl.switches += 1
        else:
            slot = 0 if active is None else 1 - active
            ls = max(port_free, slot_free[slot])
            le = ls + r
            port_free = le
            slot_cfg[slot] = task.config
            tl.loads += 1
            start = max(exec_end, le)
            if active is not None:
                tl.switches += 1
        end = start + task.exec_time
        tl.records.append(TaskRecord(task.name, task.config, ls, le, start, end, slot + 1))
        slot_free[slot] = end
        exec_end = end
        active = slot
    tl.total = exec_end
    return tl


# --------------------------------------------------------------- branching

@dataclass(frozen=True)
class Outcome:
    name: str
    p: float
    exec_time: float
    bits: float | None = None
    load_time: float | None = None
    preloaded: bool = False


@dataclass(frozen=True)
class BranchSpec:
    stage1_exec: float
    outcomes: tuple[Outcome, ...]
    load_rate: float | None = None
    t_switch: float = DEFAULT_T_SWITCH
    stage1_load: float = 0.0   # counted only when the stage-1 load is part of the run


@dataclass
class BranchResult:
    expected_total: float
    per_outcome: dict[str, float]   # outcome -> total when it occurs

    def as_records(self) -> list[dict]:
        rec = [{"record": "outcome", "outcome": k, "total_s": v} for k, v in self.per_outcome.items()]
        rec.append({"record": "expected", "total_s": self.expected_total})
        return rec


def schedule_branching(spec: BranchSpec) -> BranchResult:
    ps = [o.p for o in spec.outcomes]
    if any(p < 0 for p in ps) or not math.isclose(math.fsum(ps), 1.0, rel_tol=0, abs_tol=1e-9):
        raise DomainError(f"outcome probabilities must be non-negative and sum to 1, got {ps}")
    head = spec.stage1_load + spec.stage1_exec
    per = {}
    for o in spec.outcomes:
        if o.preloaded:
            cost = spec.t_switch
        elif o.load_time is not None:
            cost = o.load_time
        else:
            if spec.load_rate is None:
                raise DomainError(f"outcome {o.name}: no load rate to convert its bits")
            cost = reconfig_time(o.bits, spec.load_rate)
        per[o.name] = head + cost + o.exec_time
    expected = head + math.fsum(o.p * (per[o.name] - head) for o in spec.outcomes)
    return BranchResult(expected, per)


# ----------------------------------------------------------- scenario files

@dataclass
class Scenario:
    name: str
    workload: Workload | None
    modes: tuple[Mode, ...]
    branch: BranchSpec | None = None
    description: str = ""


def _qty(doc: dict, key: str, dim: str, text: str, path: str, source, default=None):
    if key not in doc:
        return default
    try:
        return parse_quantity(doc[key], dim)
    except ValueError as exc:
        raise ValidationError(str(exc), field=path, line=line_of(text, path), source=source) from None


def load_scenario(text: str, source: str | None = None) -> Scenario:
    """Scenario TOML: top-level ``name``, ``rate``, ``modes``, ``t_switch``,
    ``count_first_load``, ``amortize_preloads``; ``[[task]]`` tables with
    ``name``, ``config``, ``exec`` (or ``repeat`` and ``unit``) and ``bits`` or
    ``reconfig``; an optional ``[branch]`` with ``stage1_exec`` and
    ``[[branch.outcome]]`` tables (``name``, ``p``, ``exec``, ``bits`` or
    ``reconfig``, ``preloaded``)."""
    doc = load_toml(text, source)
    rate = _qty(doc, "rate", "rate", text, "rate", source)
    t_switch = _qty(doc, "t_switch", "time", text, "t_switch", source, DEFAULT_T_SWITCH)
    tasks = []
    for i, t in enumerate(doc.get("task", [])):
        path = "task"
        try:
            if "exec" in t:
                exec_time = parse_quantity(t["exec"], "time")
                repeat = int(t.get("repeat", 1))
            else:
                exec_time = parse_quantity(t["unit"], "time")
                repeat = int(t["repeat"])
            bits = float(parse_quantity(t["bits"], "bits")) if "bits" in t else None
            load = parse_quantity(t["reconfig"], "time") if "reconfig" in t else None
            name = str(t.get("name", f"t{i + 1}"))
            tasks.append(Task(name, str(t.get("config", name)), exec_time, bits, load, repeat))
        except (KeyError, ValueError) as exc:
            raise ValidationError(f"task {i + 1}: {exc}", field=path,
                                  line=line_of(text, path), source=source) from None
    try:
        modes = tuple(Mode(m) for m in doc.get("modes", ["CONVENTIONAL", "DYNAMIC"]))
    except ValueError as exc:
        raise ValidationError(str(exc), field="modes", line=line_of(text, "modes"),
                              source=source) from None
    wl = None
    if tasks:
        wl = Workload(tuple(tasks), modes[0], rate, t_switch,
                      bool(doc.get("count_first_load", True)),
                      bool(doc.get("amortize_preloads", False)))
    branch = None
    if "branch" in doc:
        b = doc["branch"]
        outs = []
        for o in b.get("outcome", []):
            try:
                outs.append(Outcome(str(o["name"]), float(o["p"]), parse_quantity(o["exec"], "time"),
                                    float(parse_quantity(o["bits"], "bits")) if "bits" in o else None,
                                    parse_quantity(o["reconfig"], "time") if "reconfig" in o else None,
                                    bool(o.get("preloaded", False))))
            except (KeyError, ValueError) as exc:
                raise ValidationError(str(exc), field="branch.outcome",
                                      line=line_of(text, "branch.outcome"), source=source) from None
        branch = BranchSpec(parse_quantity(b.get("stage1_exec", 0), "time"), tuple(outs), rate, t_switch,
                            parse_quantity(b.get("stage1_load", 0), "time"))
    if wl is None and branch is None:
        raise ValidationError("scenario has neither tasks nor a branch spec", source=source)
    return Scenario(str(doc.get("name", "scenario")), wl, modes, branch, str(doc.get("description", "")))


def shipped_scenario_path(name: str) -> Path:
    from importlib import resources
    return Path(str(resources.files("ctxfpga") / "data" / "scenarios" / f"{name}.toml"))


def load_scenario_file(path: str | Path) -> Scenario:
    p = Path(path)
    if not p.exists() and not p.suffix:
        p = shipped_scenario_path(str(path))
    return load_scenario(p.read_text(encoding="utf-8"), source=str(path))


@dataclass
class ScenarioReport:
    scenario: Scenario
    timelines: dict[Mode, Timeline]
    savings: dict[tuple[Mode, Mode], float]
    branch: BranchResult | None = None

    def to_text(self) -> str:
        out = [f"scenario {self.scenario.name}"]
        for tl in self.timelines.values():
            out.append(tl.to_text())
        for (b, c), s in self.savings.items():
            out.append(f"saving {c.value} vs {b.value}: {s:.1f}%")
        if self.branch:
            for k, v in self.branch.per_outcome.items():
                out.append(f"outcome {k}: {v:.9g} s")
            out.append(f"expected total: {self.branch.expected_total:.9g} s")
        return "\n".join(out)

    def records(self) -> list[dict]:
        rec = []
        for tl in self.timelines.values():
            rec += tl.as_records()
        rec += [{"record": "saving", "baseline": b.value, "candidate": c.value, "saving_pct": s}
                for (b, c), s in self.savings.items()]
        if self.branch:
            rec += self.branch.as_records()
        return rec


def run_scenario(sc: Scenario, modes: Sequence[Mode | str] | None = None) -> ScenarioReport:
    modes = tuple(Mode(m) for m in (modes or sc.modes))
    tls: dict[Mode, Timeline] = {}
    savings = {}
    if sc.workload is not None:
        for m in modes:
            tls[m] = schedule(sc.workload.with_mode(m))
        base = tls.get(Mode.CONVENTIONAL)
        if base is not None and base.total > 0:
            for m, tl in tls.items():
                if m is not Mode.CONVENTIONAL:
                    savings[(Mode.CONVENTIONAL, m)] = time_saving(base, tl)
    br = schedule_branching(sc.branch) if sc.branch else None
    return ScenarioReport(sc, tls, savings, br)
