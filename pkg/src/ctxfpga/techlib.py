"""Per-primitive area/delay/power tables and technology comparison reports.

Tech-model files are TOML. Quantities are strings with unit suffixes::

    name = "FEFET_1CFG"
    mode = "SINGLE"

    [LUT6.SINGLE]
    delay = "124.3 ps"
    power = "13.1 uW"

An entry may give ``area_derivation = "375 lambda2 / 0.289"`` (a quantity
followed by ``*``/``/`` factors, evaluated left to right). Without an
``area`` the derived value is used; with both, they must agree to 1e-4.

Defaults applied when a field is missing:

* ``LUT6.area``: 2^6 LUT cells of the same mode (a DUAL cell already carries
  its share of the select mux).
* ``LUT_CELL.DUAL.area``: twice the SINGLE cell plus ``LUT6.DUAL.mux_area / 64``.
* ``LUT6.DUAL.delay``: ``LUT6.SINGLE.delay + mux_delay`` (``mux_delay``
  defaults to 31.6 ps).
* ``LUT_CELL.delay`` / ``.power``: the LUT6 read delay / LUT6 power / 64.
* ``SB_SWITCH.area``: the CB switch area (same switch element).
* ``leakage``: 0 W.
"""

from __future__ import annotations

import enum
import math
import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Mapping

from .device import DeviceParams
from .errors import LookupFailure, ValidationError
from .tomlio import line_of as _line_of, load_toml
from .units import parse_quantity


class Kind(str, enum.Enum):
    LUT_CELL = "LUT_CELL"
    LUT6 = "LUT6"
    CB_SWITCH = "CB_SWITCH"
    SB_SWITCH = "SB_SWITCH"


class Mode(str, enum.Enum):
    SINGLE = "SINGLE"
    DUAL = "DUAL"


TECH_NAMES = ("SRAM", "FEFET_1CFG", "FEFET_2CFG", "RRAM", "STT_MRAM")
LUT6_CELLS = 64
DEFAULT_MUX_DELAY = 31.6e-12


@dataclass(frozen=True)
class CostTriple:
    area: float    # lambda^2
    delay: float   # s
    power: float   # W

    def __post_init__(self) -> None:
        for name in ("area", "delay", "power"):
            if getattr(self, name) < 0:
                raise ValidationError("must be non-negative", field=name)

    def scaled(self, *, area: float = 1.0, delay: float = 1.0, power: float = 1.0) -> "CostTriple":
        return CostTriple(self.area * area, self.delay * delay, self.power * power)


@dataclass(frozen=True)
class TechModel:
    name: str
    mode: Mode
    entries: Mapping[tuple[Kind, Mode], CostTriple]
    device: DeviceParams | None = None
    r_on: float | None = None
    r_off: float | None = None
    leakage: float = 0.0
    extras: Mapping[tuple[Kind, Mode], Mapping[str, float]] = field(default_factory=dict)

    def cost(self, kind: Kind | str, mode: Mode | str | None = None) -> CostTriple:
        return primitive_cost(self, kind, mode)

    def with_delays_scaled(self, factor: float) -> "TechModel":
        return TechModel(self.name, self.mode,
                         {k: v.scaled(delay=factor) for k, v in self.entries.items()},
                         self.device, self.r_on, self.r_off, self.leakage, self.extras)

    def with_entry(self, kind: Kind, mode: Mode, triple: CostTriple) -> "TechModel":
        entries = dict(self.entries)
        entries[(Kind(kind), Mode(mode))] = triple
        return TechModel(self.name, self.mode, entries, self.device,
                         self.r_on, self.r_off, self.leakage, self.extras)


def primitive_cost(model: TechModel, kind: Kind | str, mode: Mode | str | None = None) -> CostTriple:
    key = (Kind(kind), Mode(mode) if mode is not None else model.mode)
    try:
        return model.entries[key]
    except KeyError:
        raise LookupFailure(f"{model.name} has no {key[0].value}/{key[1].value} entry") from None


_DERIV_TOKEN = re.compile(r"\s*([*/])\s*([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)")


def _eval_derivation(text: str) -> float:
    head = re.match(r"\s*([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?\s*\S+)", text)
    if not head:
        raise ValueError(f"malformed derivation {text!r}")
    value = parse_quantity(head.group(1), "area")
    rest = text[head.end():]
    pos = 0
    while rest[pos:].strip():
        m = _DERIV_TOKEN.match(rest, pos)
        if not m:
            raise ValueError(f"malformed derivation {text!r}")
        op, num = m.groups()
        value = value * float(num) if op == "*" else value / float(num)
        pos = m.end()
    return value


_DIMENSIONS = {"area": "area", "delay": "time", "power": "power", "mux_delay": "time",
               "mux_area": "area"}


def load_tech_model(text: str, source: str | None = None) -> TechModel:
    """Parse and validate a tech-model file (see the module docstring)."""
    doc = load_toml(text, source)

    def fail(msg: str, fld: str):
        raise ValidationError(msg, field=fld, line=_line_of(text, fld), source=source)

    name = doc.get("name")
    if name not in TECH_NAMES:
        fail(f"unknown technology {name!r}", "name")
    try:
        mode = Mode(doc.get("mode", "SINGLE"))
    except ValueError:
        fail(f"unknown mode {doc.get('mode')!r}", "mode")

    raw: dict[tuple[Kind, Mode], dict[str, float]] = {}
    for kname, per_mode in doc.items():
        if kname not in Kind.__members__:
            continue
        if not isinstance(per_mode, dict):
            fail("expected a table of modes", kname)
        for mname, fields in per_mode.items():
            if mname not in Mode.__members__:
                fail(f"unknown mode {mname!r}", f"{kname}.{mname}")
            vals: dict[str, float] = {}
            for fname, fval in fields.items():
                path = f"{kname}.{mname}.{fname}"
                try:
                    if fname == "area_derivation":
                        vals["_derived_area"] = _eval_derivation(fval)
                    elif fname in _DIMENSIONS:
                        vals[fname] = parse_quantity(fval, _DIMENSIONS[fname])
                    else:
                        fail("unknown field", path)
                except (ValueError, TypeError) as exc:
                    fail(str(exc), path)
                key = "_derived_area" if fname == "area_derivation" else fname
                if vals[key] <= 0:
                    fail(f"must be positive, got {fval!r}", path)
            raw[(Kind(kname), Mode(mname))] = vals

    for (k, m), vals in raw.items():
        derived = vals.pop("_derived_area", None)
        if derived is None:
            continue
        if "area" in vals and not math.isclose(vals["area"], derived, rel_tol=1e-4):
            fail(f"area {vals['area']} inconsistent with derivation {derived}", f"{k.value}.{m.value}.area")
        vals.setdefault("area", derived)

    entries: dict[tuple[Kind, Mode], CostTriple] = {}
    extras: dict[tuple[Kind, Mode], dict[str, float]] = {}

    def get(kind: Kind, m: Mode) -> dict[str, float]:
        return raw.get((kind, m), {})

    modes = {m for (_, m) in raw} | {mode}
    for m in sorted(modes, key=lambda x: x.value):
        cell, lut = dict(get(Kind.LUT_CELL, m)), dict(get(Kind.LUT6, m))
        cb, sb = dict(get(Kind.CB_SWITCH, m)), dict(get(Kind.SB_SWITCH, m))
        if m is Mode.DUAL:
            single_cell = get(Kind.LUT_CELL, Mode.SINGLE)
            if "area" not in cell and "area" in single_cell:
                cell["area"] = 2 * single_cell["area"] + lut.get("mux_area", 0.0) / LUT6_CELLS
            if "delay" not in lut and "delay" in get(Kind.LUT6, Mode.SINGLE):
                lut["delay"] = get(Kind.LUT6, Mode.SINGLE)["delay"] + lut.get("mux_delay", DEFAULT_MUX_DELAY)
        if "area" not in lut and "area" in cell:
            lut["area"] = LUT6_CELLS * cell["area"]
        if "delay" not in cell and "delay" in lut:
            cell["delay"] = lut["delay"]
        if "power" not in cell and "power" in lut:
            cell["power"] = lut["power"] / LUT6_CELLS
        if "area" not in sb and "area" in cb:
            sb["area"] = cb["area"]
        for kind, vals in ((Kind.LUT_CELL, cell), (Kind.LUT6, lut), (Kind.CB_SWITCH, cb), (Kind.SB_SWITCH, sb)):
            if not vals:
                continue
            missing = [f for f in ("area", "delay", "power") if f not in vals]
            if missing:
                if m is mode:
                    fail(f"missing {missing[0]}", f"{kind.value}.{m.value}.{missing[0]}")
                continue
            entries[(kind, m)] = CostTriple(vals["area"], vals["delay"], vals["power"])
            extra = {k: v for k, v in vals.items() if k not in ("area", "delay", "power")}
            if extra:
                extras[(kind, m)] = extra

    for kind in Kind:
        if (kind, mode) not in entries:
            fail(f"missing {kind.value} entry for mode {mode.value}", f"{kind.value}.{mode.value}")

    device = None
    if "device" in doc:
        dev = dict(doc["device"])
        kw = {}
        dims = {"t0": "time", "pulse_width": "time", "r_on": "resistance", "r_off": "resistance"}
        for key, val in dev.items():
            if key not in DeviceParams.__dataclass_fields__:
                fail("unknown device field", f"device.{key}")
            try:
                kw[key] = parse_quantity(val, dims.get(key, "voltage"))
            except ValueError as exc:
                fail(str(exc), f"device.{key}")
        device = DeviceParams(**kw)

    r_on = r_off = None
    if "resistance" in doc:
        try:
            r_on = parse_quantity(doc["resistance"]["r_on"], "resistance")
            r_off = parse_quantity(doc["resistance"]["r_off"], "resistance")
        except (KeyError, ValueError) as exc:
            fail(str(exc), "resistance")
        if not 0 < r_on < r_off:
            fail("need 0 < r_on < r_off", "resistance.r_off")

    leakage = 0.0
    if "leakage" in doc:
        try:
            leakage = parse_quantity(doc["leakage"], "power")
        except ValueError as exc:
            fail(str(exc), "leakage")
        if leakage < 0:
            fail("must be non-negative", "leakage")

    return TechModel(name, mode, entries, device, r_on, r_off, leakage, extras)


def shipped_tech_path(name: str) -> Path:
    return Path(str(resources.files("ctxfpga") / "data" / "tech" / f"{name.lower()}.toml"))


def load_shipped(name: str) -> TechModel:
    path = shipped_tech_path(name)
    return load_tech_model(path.read_text(encoding="utf-8"), source=path.name)


def load_tech_file(path: str | Path) -> TechModel:
    path = Path(path)
    return load_tech_model(path.read_text(encoding="utf-8"), source=str(path))


# ---------------------------------------------------------------------------
# comparison


def reduction_pct(baseline: float, candidate: float) -> float:
    if baseline == 0:
        return 0.0 if candidate == 0 else -math.inf
    return 100.0 * (baseline - candidate) / baseline


@dataclass(frozen=True)
class Delta:
    baseline: float
    candidate: float

    @property
    def pct(self) -> float:
        return reduction_pct(self.baseline, self.candidate)

    @property
    def diff(self) -> float:
        return self.baseline - self.candidate


@dataclass(frozen=True)
class ReductionReport:
    baseline: str
    candidate: str
    per_kind: Mapping[Kind, Mapping[str, Delta]]
    totals: Mapping[str, Delta]
    counts: Mapping[Kind, int]

    def pct(self, kind: Kind | str, metric: str) -> float:
        return round(self.per_kind[Kind(kind)][metric].pct, 1)

    def ratio_pct(self, kind: Kind | str, metric: str) -> float:
        """Candidate as a percentage of baseline, to 0.1."""
        d = self.per_kind[Kind(kind)][metric]
        return round(100.0 * d.candidate / d.baseline, 1)

    def records(self) -> list[dict]:
        rows = []
        for kind, metrics in self.per_kind.items():
            for metric, d in metrics.items():
                rows.append({"kind": kind.value, "metric": metric, "baseline": d.baseline,
                             "candidate": d.candidate, "reduction_pct": round(d.pct, 1)})
        for metric, d in self.totals.items():
            rows.append({"kind": "TOTAL", "metric": metric, "baseline": d.baseline,
                         "candidate": d.candidate, "reduction_pct": round(d.pct, 1)})
        return rows

    def to_text(self) -> str:
        lines = [f"reduction of {self.candidate} vs {self.baseline} (positive = smaller)",
                 f"{'primitive':<10} {'count':>6} {'area%':>8} {'delay%':>8} {'power%':>8}"]
        for kind, metrics in self.per_kind.items():
            lines.append(f"{kind.value:<10} {self.counts.get(kind, 0):>6} "
                         + " ".join(f"{round(metrics[m].pct, 1):>8.1f}" for m in ("area", "delay", "power")))
        lines.append(f"{'TOTAL':<10} {'':>6} "
                     + " ".join(f"{round(self.totals[m].pct, 1):>8.1f}" for m in ("area", "delay", "power")))
        return "\n".join(lines) + "\n"


DEFAULT_DESIGN_STATS = {Kind.LUT_CELL: 0, Kind.LUT6: 1, Kind.CB_SWITCH: 1, Kind.SB_SWITCH: 1}


def compare_report(baseline: TechModel, candidate: TechModel,
                   design_stats: Mapping[Kind | str, int] | None = None) -> ReductionReport:
    """Per-primitive and count-weighted reductions of *candidate* against *baseline*.

    Each model is costed in its own native mode, so an SRAM single-context
    fabric is compared with the dual-context FeFET one as built.
    """
    stats = {Kind(k): int(v) for k, v in (design_stats or DEFAULT_DESIGN_STATS).items()}
    per_kind: dict[Kind, dict[str, Delta]] = {}
    for kind in Kind:
        b, c = primitive_cost(baseline, kind), primitive_cost(candidate, kind)
        per_kind[kind] = {m: Delta(getattr(b, m), getattr(c, m)) for m in ("area", "delay", "power")}
    totals = {}
    for metric in ("area", "delay", "power"):
        bt = sum(n * getattr(primitive_cost(baseline, k), metric) for k, n in stats.items())
        ct = sum(n * getattr(primitive_cost(candidate, k), metric) for k, n in stats.items())
        totals[metric] = Delta(bt, ct)
    return ReductionReport(baseline.name, candidate.name, per_kind, totals, stats)
