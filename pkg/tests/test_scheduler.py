import math

import pytest
from hypothesis import assume, given, settings, strategies as st

from ctxfpga.errors import DomainError, ModeError, ValidationError
from ctxfpga.scheduler import (
    BranchSpec,
    Mode,
    Outcome,
    Task,
    Workload,
    load_scenario,
    load_scenario_file,
    reconfig_time,
    run_scenario,
    schedule,
    schedule_branching,
    schedule_repeated,
    time_saving,
)

times = st.floats(0.0, 100.0, allow_nan=False, allow_infinity=False)
pos_times = st.floats(1e-3, 100.0, allow_nan=False, allow_infinity=False)


def workload(rs, es, mode=Mode.DYNAMIC, **kw):
    tasks = tuple(Task(f"t{i}", f"c{i}", e, load_time=r) for i, (r, e) in enumerate(zip(rs, es)))
    return Workload(tasks, mode, **kw)


def dynamic_oracle(rs, es):
    """Two planes, one port, every task a fresh configuration."""
    load_end = rs[0]
    exec_start, exec_end = load_end, load_end + es[0]
    for r, e in zip(rs[1:], es[1:]):
        load_end = exec_start + r            # load_i starts when exec_{i-1} starts
        exec_start = max(exec_end, load_end)
        exec_end = exec_start + e
    return exec_end


def test_reconfig_time():
    assert reconfig_time(3.2e9, 3.2e9) == 1.0
    assert reconfig_time(77.3e6, 3.2e9) == pytest.approx(24.16e-3, abs=1e-5)
    for bits, rate in ((0, 1.0), (10, 0.0), (-1, 1.0)):
        with pytest.raises(DomainError):
            reconfig_time(bits, rate)


def test_derived_three_task_example():
    w = workload([4e-3, 6e-3, 3e-3], [10e-3, 5e-3, 8e-3])
    conv = schedule(w.with_mode("CONVENTIONAL"))
    dyn = schedule(w)
    assert conv.total == pytest.approx(36e-3, abs=1e-15)
    assert dyn.total == pytest.approx(27e-3, abs=1e-15)
    assert round(time_saving(conv, dyn), 1) == 25.0
    r2, r3 = dyn.records[1], dyn.records[2]
    assert r2.load_end == pytest.approx(10e-3) and r2.exec_start == pytest.approx(14e-3)
    assert (r3.load_start, r3.load_end) == pytest.approx((14e-3, 17e-3))
    assert (r3.exec_start, r3.exec_end) == pytest.approx((19e-3, 27e-3))
    assert [r.slot for r in dyn.records] == [1, 2, 1]


def test_time_saving_basics():
    assert time_saving(36.0, 27.0) == 25.0
    assert time_saving(10.0, 10.0) == 0.0
    assert time_saving(10.0, 5.0) == 50.0
    with pytest.raises(DomainError):
        time_saving(0.0, 0.0)


def test_two_task_ideal_case_approaches_half():
    w = workload([1e-9, 1.0], [1.0, 1e-9])
    s = time_saving(schedule(w.with_mode("CONVENTIONAL")), schedule(w))
    assert 49.9 < s <= 50.0


def test_preloaded_saving_approaches_full():
    tasks = tuple(Task(f"t{i}", "AB"[i % 2], 1e-6, load_time=1.0) for i in range(2000))
    w = Workload(tasks, Mode.PRELOADED_2)
    s = time_saving(schedule(w.with_mode("CONVENTIONAL")), schedule(w))
    assert 99.8 < s < 100.0


def test_preloaded_total_formula():
    tasks = tuple(Task(f"t{i}", "AB"[i % 2], 2.0, load_time=3.0 + i) for i in range(5))
    tl = schedule(Workload(tasks, Mode.PRELOADED_2, t_switch=0.5))
    assert tl.total == 3.0 + 4.0 + 5 * 2.0 + 4 * 0.5
    assert tl.switches == 4 and tl.loads == 2
    amortized = schedule(Workload(tasks, Mode.PRELOADED_2, t_switch=0.5, amortize_preloads=True))
    assert amortized.total == 5 * 2.0 + 4 * 0.5


def test_preloaded_rejects_three_configs():
    with pytest.raises(ModeError):
        schedule(workload([1, 1, 1], [1, 1, 1], Mode.PRELOADED_2))


def test_conventional_total_formula():
    tl = schedule(workload([1.0, 2.0, 3.0], [4.0, 5.0, 6.0], Mode.CONVENTIONAL))
    assert tl.total == 21.0
    for prev, cur in zip(tl.records, tl.records[1:]):
        assert cur.load_start == prev.exec_end


def test_conventional_skips_reload_of_same_config():
    tasks = (Task("a", "A", 1.0, load_time=5.0), Task("b", "A", 1.0, load_time=5.0))
    assert schedule(Workload(tasks, Mode.CONVENTIONAL)).total == 7.0


def test_first_load_exclusion_flag():
    w = workload([4.0, 6.0, 3.0], [10.0, 5.0, 8.0], count_first_load=False)
    assert schedule(w.with_mode("CONVENTIONAL")).total == 32.0
    assert schedule(w).total == 23.0


def test_task_validation():
    with pytest.raises(DomainError):
        Task("x", "A", -1.0, load_time=1.0)
    with pytest.raises(DomainError):
        Task("x", "A", 1.0)
    with pytest.raises(DomainError):
        Task("x", "A", 1.0, load_time=1.0, repeat=0)
    with pytest.raises(DomainError):
        schedule(Workload((Task("x", "A", 1.0, bits=10),)))


def test_bits_use_rate():
    w = Workload((Task("x", "A", 0.5, bits=3.2e9), Task("y", "B", 0.5, bits=1.6e9)), Mode.CONVENTIONAL,
                 load_rate=3.2e9)
    assert schedule(w).total == 1.0 + 0.5 + 0.5 + 0.5


@settings(max_examples=300)
@given(st.lists(st.tuples(times, times), min_size=1, max_size=8))
def test_dynamic_matches_recurrence_oracle(pairs):
    rs, es = [p[0] for p in pairs], [p[1] for p in pairs]
    assert schedule(workload(rs, es)).total == dynamic_oracle(rs, es)


@settings(max_examples=300)
@given(st.lists(st.tuples(times, times), min_size=1, max_size=8))
def test_dynamic_never_worse(pairs):
    rs, es = [p[0] for p in pairs], [p[1] for p in pairs]
    w = workload(rs, es)
    assert schedule(w).total <= schedule(w.with_mode("CONVENTIONAL")).total + 1e-9


@given(st.lists(times, min_size=1, max_size=8))
def test_dynamic_equals_conventional_without_execution(rs):
    w = workload(rs, [0.0] * len(rs))
    assert schedule(w).total == pytest.approx(schedule(w.with_mode("CONVENTIONAL")).total)


@settings(max_examples=300)
@given(st.lists(st.tuples(pos_times, pos_times), min_size=1, max_size=8), st.data())
def test_hiding_law(pairs, data):
    es = [p[1] for p in pairs]
    rs = [pairs[0][0]] + [data.draw(st.floats(0.0, e)) for e in es[:-1]]
    assert schedule(workload(rs, es)).total == rs[0] + math.fsum(es) or \
        schedule(workload(rs, es)).total == pytest.approx(rs[0] + math.fsum(es), rel=1e-12)


@settings(max_examples=300)
@given(pos_times, pos_times, pos_times, pos_times)
def test_two_task_bound(r1, r2, e1, e2):
    w = workload([r1, r2], [e1, e2])
    assert time_saving(schedule(w.with_mode("CONVENTIONAL")), schedule(w)) <= 50.0 + 1e-9


@settings(max_examples=200)
@given(st.lists(pos_times, min_size=2, max_size=10), pos_times, pos_times, st.booleans())
def test_preloaded_bound(es, r1, r2, amortize):
    tasks = tuple(Task(f"t{i}", "AB"[i % 2], e, load_time=(r1, r2)[i % 2]) for i, e in enumerate(es))
    w = Workload(tasks, Mode.PRELOADED_2, amortize_preloads=amortize)
    assert time_saving(schedule(w.with_mode("CONVENTIONAL")), schedule(w)) < 100.0


@given(st.lists(st.tuples(pos_times, pos_times), min_size=1, max_size=6), st.floats(0.01, 100.0))
def test_saving_scale_invariant(pairs, c):
    rs, es = [p[0] for p in pairs], [p[1] for p in pairs]
    base = workload(rs, es)
    scaled = workload([r * c for r in rs], [e * c for e in es])
    s1 = time_saving(schedule(base.with_mode("CONVENTIONAL")), schedule(base))
    s2 = time_saving(schedule(scaled.with_mode("CONVENTIONAL")), schedule(scaled))
    assert s1 == pytest.approx(s2, abs=1e-9)


def test_schedule_is_pure():
    w = workload([4.0, 6.0, 3.0], [10.0, 5.0, 8.0])
    assert schedule(w) == schedule(w)


# ----------------------------------------------------------- repeats

def test_repeat_one_is_identity():
    tasks = (Task("a", "A", 2.0, load_time=1.0), Task("b", "B", 3.0, load_time=4.0))
    assert schedule_repeated(Workload(tasks)) == schedule(Workload(tasks))


def test_five_repeats_hide_next_load():
    tasks = (Task("a", "A", 1.0, load_time=2.0, repeat=5), Task("b", "B", 3.0, load_time=5.0))
    tl = schedule_repeated(Workload(tasks))
    assert len(tl.records) == 6
    assert [r.load_start for r in tl.records[1:5]] == [None] * 4
    assert tl.total == 2.0 + 5 * 1.0 + 3.0
    conv = schedule_repeated(Workload(tasks, Mode.CONVENTIONAL))
    assert conv.total == 2.0 + 5.0 + 5.0 + 3.0


@settings(max_examples=200)
@given(pos_times, pos_times, pos_times, pos_times, st.integers(2, 8))
def test_repeats_dilute_preloaded_saving(r1, r2, e1, e2, n):
    def saving(rep):
        tasks = tuple(Task(f"t{i}", "AB"[i % 2], (e1, e2)[i % 2], load_time=(r1, r2)[i % 2],
                           repeat=rep if i % 2 == 0 else 1) for i in range(6))
        w = Workload(tasks, Mode.PRELOADED_2)
        return time_saving(schedule_repeated(w.with_mode("CONVENTIONAL")), schedule_repeated(w))
    base = saving(1)
    assert base > 0
    assert saving(n) <= base + 1e-9


# ---------------------------------------------------------- branching

def test_branching_all_preloaded():
    spec = BranchSpec(2.0, (Outcome("x", 0.25, 1.0, preloaded=True), Outcome("y", 0.75, 3.0, preloaded=True)),
                      t_switch=0.1)
    assert schedule_branching(spec).expected_total == pytest.approx(2.0 + 0.1 + 0.25 * 1.0 + 0.75 * 3.0)


def test_branching_single_outcome_is_conventional_tail():
    spec = BranchSpec(2.0, (Outcome("x", 1.0, 5.0, load_time=3.0),))
    w = Workload((Task("s", "S", 2.0, load_time=0.0), Task("x", "X", 5.0, load_time=3.0)), Mode.CONVENTIONAL)
    assert schedule_branching(spec).expected_total == schedule(w).total


def test_branching_weighted_sum():
    spec = BranchSpec(2e-3, (Outcome("spec", 0.6, 3e-3, preloaded=True),
                             Outcome("gen", 0.4, 5e-3, bits=32e6)), load_rate=3.2e9, t_switch=1e-9)
    res = schedule_branching(spec)
    hand = 0.6 * (2e-3 + 1e-9 + 3e-3) + 0.4 * (2e-3 + 10e-3 + 5e-3)
    assert res.expected_total == pytest.approx(hand, rel=1e-12)
    assert res.per_outcome["gen"] == pytest.approx(17e-3)


@pytest.mark.parametrize("ps", [(0.5, 0.4), (0.7, 0.7), (1.2, -0.2)])
def test_branching_requires_distribution(ps):
    spec = BranchSpec(1.0, tuple(Outcome(f"o{i}", p, 1.0, load_time=1.0) for i, p in enumerate(ps)))
    with pytest.raises(DomainError):
        schedule_branching(spec)


# ---------------------------------------------------------- scenarios

def test_shipped_scenarios():
    rep = run_scenario(load_scenario_file("derived3"))
    assert round(rep.savings[(Mode.CONVENTIONAL, Mode.DYNAMIC)], 1) == 25.0
    pipe = run_scenario(load_scenario_file("pipeline4"))
    assert pipe.timelines[Mode.DYNAMIC].total == 8.0
    assert pipe.timelines[Mode.CONVENTIONAL].total >= 15.0
    alt = run_scenario(load_scenario_file("preloaded_alternation"))
    assert 80.0 < alt.savings[(Mode.CONVENTIONAL, Mode.PRELOADED_2)] < 100.0
    br = run_scenario(load_scenario_file("branching"))
    assert br.branch.expected_total == pytest.approx(0.6 * 5.000001e-3 + 0.4 * 17e-3)
    rep5 = run_scenario(load_scenario_file("repeated"))
    assert len(rep5.timelines[Mode.DYNAMIC].records) == 6


def test_preloaded_alternation_grows_towards_full_saving():
    def saving(n):
        tasks = tuple(Task(f"t{i}", "AB"[i % 2], 1e-4, bits=32e6) for i in range(n))
        w = Workload(tasks, Mode.PRELOADED_2, load_rate=3.2e9)
        return time_saving(schedule(w.with_mode("CONVENTIONAL")), schedule(w))
    values = [saving(n) for n in (2, 4, 8, 16, 64, 256)]
    assert values == sorted(values) and values[-1] > 98.0


def test_scenario_errors():
    with pytest.raises(ValidationError):
        load_scenario('name = "x"\n')
    with pytest.raises(ValidationError) as ei:
        load_scenario('modes = ["FAST"]\n[[task]]\nexec = "1 s"\nreconfig = "1 s"\n')
    assert ei.value.field == "modes"
    with pytest.raises(ValidationError):
        load_scenario('[[task]]\nexec = "1 V"\nreconfig = "1 s"\n')


def test_report_records_are_stable():
    rep = run_scenario(load_scenario_file("derived3"))
    assert rep.records() == run_scenario(load_scenario_file("derived3")).records()
    assert "saving DYNAMIC vs CONVENTIONAL: 25.0%" in rep.to_text()
