import json
import os
import subprocess
import sys

import numpy as np
import pytest

from pfdavg.markov import pfd_avg_markov
from pfdavg.petri import (Dirac, Exp, Ipa, PetriError, PetriNet, build_case_net, estimate_pfd,
                          history_fractions, make_transition, parse_affectation, parse_guard,
                          run_histories, schedule_time, simulate_history, write_histories_csv)
from pfdavg.scenario import CASE_IDS, builtin_case


def tiny(transitions, places, variables=(("flag", 0),), failed="flag == 1"):
    return PetriNet(places=tuple(places), transitions=tuple(transitions),
                    variables=tuple(variables), failed_when=parse_guard(failed))


def test_token_moves():
    net = tiny([make_transition("t", ["a"], ["b"], Exp(1.0))], [("a", 1), ("b", 0)])
    after = net.fire(net.initial_state(), "t")
    assert after.marking == {"a": 0, "b": 1}


def test_weighted_arcs():
    net = tiny([make_transition("t", [("a", 2)], [("b", 3)], Exp(1.0))], [("a", 1), ("b", 0)])
    assert not net.enabled(net.initial_state())
    with pytest.raises(PetriError, match="disabled"):
        net.fire(net.initial_state(), "t")


def test_guard_disables_regardless_of_tokens():
    net = tiny([make_transition("t", ["a"], ["b"], Exp(1.0), guard="flag == true")],
               [("a", 5), ("b", 0)])
    assert net.enabled(net.initial_state()) == []


def test_affectation_runs_once_per_firing():
    net = tiny([make_transition("t", ["a"], ["a"], Exp(1.0), affectation="n := n - 1")],
               [("a", 1)], variables=(("n", 3),), failed="n < 0")
    state = net.initial_state()
    for expected in (2, 1, 0):
        state = net.fire(state, "t")
        assert state.variables["n"] == expected


def test_predicate_parsing():
    assert parse_guard("?? nbOK > 0") == parse_guard("nbOK>0")
    g = parse_guard("a >= 2 & b == false")
    assert [(c.var, c.op, c.value) for c in g] == [("a", ">=", 2), ("b", "==", 0)]
    a = parse_affectation("!! x := x + 2; y := true")
    assert [(x.var, x.op, x.value) for x in a] == [("x", 1, 2), ("y", 0, 1)]
    with pytest.raises(PetriError):
        parse_affectation("x := y + 1")
    with pytest.raises(PetriError):
        parse_guard("x ~ 1")


def test_schedule_rules():
    assert schedule_time(Dirac(0.0), 12.5, 0.3) == 12.5
    assert schedule_time(Dirac(4.0), 12.5, 0.3) == 16.5
    assert schedule_time(Ipa(4383.0), 100.0, 0.3) == 4383.0
    assert schedule_time(Ipa(4383.0), 4383.0, 0.3) == 4383.0
    assert schedule_time(Ipa(4383.0), 4383.0, 0.3, refire=True) == 8766.0
    assert schedule_time(Exp(0.5), 1.0, 0.0) == 1.0
    assert schedule_time(Exp(0.5), 1.0, 1 - np.exp(-1.0)) == pytest.approx(3.0)


def test_invalid_laws_and_places():
    with pytest.raises(ValueError):
        Exp(0.0)
    with pytest.raises(ValueError):
        Ipa(-1.0)
    with pytest.raises(PetriError, match="unknown place"):
        tiny([make_transition("t", ["zz"], ["b"], Exp(1.0))], [("b", 0)])


def test_immediate_beats_timed():
    net = tiny([make_transition("slow", ["a"], ["b"], Exp(1e3), affectation="flag := 2"),
                make_transition("now", ["a"], ["c"], Dirac(0.0), affectation="flag := 1")],
               [("a", 1), ("b", 0), ("c", 0)])
    failed, _ = run_histories(net.compile(), 10.0, seed=3, count=500)
    assert np.all(failed == 10.0)


def test_ipa_fires_on_period_multiple():
    net = tiny([make_transition("wait", ["a"], ["b"], Dirac(100.0)),
                make_transition("test", ["b"], ["c"], Ipa(4383.0), affectation="flag := 1")],
               [("a", 1), ("b", 0), ("c", 0)])
    failed, events = run_histories(net.compile(), 10000.0, seed=0, count=3)
    assert np.all(failed == 10000.0 - 4383.0)
    assert np.all(events == 2)


def test_ipa_waits_while_disabled():
    # token reaches b only after 5000 h, so the 4383 h test finds nothing
    net = tiny([make_transition("wait", ["a"], ["b"], Dirac(5000.0)),
                make_transition("test", ["b"], ["c"], Ipa(4383.0), affectation="flag := 1")],
               [("a", 1), ("b", 0), ("c", 0)])
    failed, _ = run_histories(net.compile(), 10000.0, seed=0, count=1)
    assert failed[0] == 10000.0 - 8766.0


def test_exponential_sample_mean():
    net = tiny([make_transition("t", ["a"], ["b"], Exp(1 / 1000), affectation="flag := 1")],
               [("a", 1), ("b", 0)], failed="flag == 0")
    delays, _ = run_histories(net.compile(), 1e12, seed=11, count=40_000)
    # standard error 1000 / 200 = 5
    assert abs(delays.mean() - 1000.0) < 20.0
    assert np.mean(delays > 1000.0) == pytest.approx(np.exp(-1), abs=0.01)


def test_cascade_bound_enforced():
    net = PetriNet(places=(("a", 1),), transitions=(
        make_transition("loop", ["a"], ["a"], Dirac(0.0)),), max_cascade=50)
    with pytest.raises(PetriError, match="cascade"):
        run_histories(net.compile(), 1.0, seed=0, count=1)


def test_case_net_structure():
    net = build_case_net(builtin_case("iii"))
    assert len(net.places) == 16
    assert dict(net.variables)["nbOK"] == 2
    occurs = net.transition("CCF_DD_occurs")
    assert [(c.var, c.op, c.value) for c in occurs.guard] == [("nbOK", ">", 0)]
    assert len(build_case_net(builtin_case("i")).places) == 5
    assert len(build_case_net(builtin_case("v")).places) == 21


def test_case_net_ccf_cascade():
    net = build_case_net(builtin_case("iv"))
    state = net.fire(net.initial_state(), "C1_fail_DUT")
    state = net.fire(state, "CCF_DD_occurs")
    immediate = [t.name for t in net.enabled(state) if t.immediate]
    assert immediate == ["C2_CCF_DD"]
    state = net.fire(state, "C2_CCF_DD")
    assert state.variables["nbOK"] == 0
    assert [t.name for t in net.enabled(state) if t.immediate] == ["CCF_DD_reset"]
    state = net.fire(state, "CCF_DD_reset")
    assert state.variables["CCF_DD"] == 0
    assert state.marking["C1_DUT"] == 1 and state.marking["C2_DD"] == 1
    assert not net.transition("CCF_DD_occurs") in net.enabled(state)


def test_zero_rates_give_zero():
    s = builtin_case("vi").replace(lambda_d=0.0)
    assert simulate_history(build_case_net(s), s, seed=5) == 0.0
    est = estimate_pfd(s, 100, seed=1)
    assert est.mean == 0.0 and est.half_width == 0.0


def test_fixed_seed_is_reproducible():
    s = builtin_case("ii")
    net = build_case_net(s)
    assert simulate_history(net, s, 42, 7) == simulate_history(net, s, 42, 7)
    a = history_fractions(s, 2000, seed=9)
    b = history_fractions(s, 2000, seed=9)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, history_fractions(s, 2000, seed=10))


def test_history_independent_of_batch():
    s = builtin_case("iv")
    compiled = build_case_net(s).compile()
    whole, _ = run_histories(compiled, s.t0, seed=4, count=300)
    tail, _ = run_histories(compiled, s.t0, seed=4, count=100, first=200)
    assert np.array_equal(whole[200:], tail)
    single = [simulate_history(build_case_net(s), s, 4, i) for i in (0, 150, 299)]
    assert single == list(whole[[0, 150, 299]] / s.t0)


@pytest.mark.parametrize("case_id", CASE_IDS)
def test_invariants_hold_at_every_event(case_id):
    s = builtin_case(case_id)
    # check=True asserts token groups, the nbOK counter and the cascade bound per firing
    fractions = history_fractions(s, 20_000, seed=123, check=True)
    assert np.all((fractions >= 0) & (fractions <= 1))


def test_estimate_validation():
    s = builtin_case("i")
    with pytest.raises(ValueError):
        estimate_pfd(s, 99)
    with pytest.raises(ValueError):
        estimate_pfd(s, 1000, confidence=1.5)


def test_estimate_half_width_formula():
    from scipy.stats import norm
    s = builtin_case("ii")
    samples = history_fractions(s, 5000, seed=2)
    est = estimate_pfd(s, 5000, seed=2)
    expected = norm.ppf(0.95) * samples.std(ddof=1) / np.sqrt(5000)
    assert est.mean == pytest.approx(samples.mean(), rel=1e-14)
    assert est.half_width == pytest.approx(expected, rel=1e-12)


def test_history_dump(tmp_path):
    path = tmp_path / "h.csv"
    write_histories_csv(path, [0.0, 0.25])
    assert path.read_text().splitlines() == ["history_index,fraction_failed", "0,0.0", "1,0.25"]


_THREAD_SCRIPT = """
import json, sys
import numba
from pfdavg.petri import history_fractions
from pfdavg.scenario import builtin_case
x = history_fractions(builtin_case("vi"), 20000, seed=77)
print(json.dumps([numba.get_num_threads(), x.tolist()]))
"""


def _run_with_threads(n):
    env = dict(os.environ, NUMBA_NUM_THREADS=str(n))
    out = subprocess.run([sys.executable, "-c", _THREAD_SCRIPT], env=env, check=True,
                         capture_output=True, text=True).stdout
    return json.loads(out.strip().splitlines()[-1])


def test_bit_identical_across_thread_counts():
    threads_1, one = _run_with_threads(1)
    threads_4, four = _run_with_threads(4)
    assert (threads_1, threads_4) == (1, 4)
    assert one == four


@pytest.mark.slow
def test_ci_coverage_of_markov_value():
    s = builtin_case("i")
    exact = pfd_avg_markov(s).pfd_avg
    hits = sum(estimate_pfd(s, 1_000_000, seed=1000 + k).contains(exact) for k in range(50))
    print(f"coverage: {hits}/50 intervals contain the Markov value")
    assert hits >= 40
