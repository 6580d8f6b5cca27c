"""Acceptance criteria 1-9. Each test prints one PASS/FAIL line, then asserts.

Run with ``pytest tests/test_acceptance.py -s`` to see the lines inline.
"""

import io
import json
import time

import pytest

from suites import SUITES, run_suite, suite_id
from tests_helpers import naive_group_stable
from hedonic_dynamics import scenarios
from hedonic_dynamics.axioms import AXIOMS, check_axiom, replay
from hedonic_dynamics.cli import main
from hedonic_dynamics.deviations import apply_deviation, is_stable
from hedonic_dynamics.dynamics import (
    Converged,
    ScriptedPolicy,
    StepLimit,
    certify_cycle,
    reverse_periodic,
    run,
    shortest_sequence,
)
from hedonic_dynamics.experiments import ExperimentConfig, run_batch
from hedonic_dynamics.game import Game, Partition, aggregate, partition_utility
from hedonic_dynamics.perception import PerceptionModel
from hedonic_dynamics.reductions import build_rx3c, find_exact_cover, reduce, witness

pytestmark = pytest.mark.acceptance


@pytest.fixture
def report(capsys):
    def emit(number, ok, detail):
        line = f"criterion {number}: {'PASS' if ok else 'FAIL'} ({detail})"
        with capsys.disabled():
            print("\n" + line)
        assert ok, line

    return emit


def test_criterion_1_cycle_gallery(report):
    start = time.perf_counter()
    bad = []
    for name in scenarios.CYCLES:
        sc = scenarios.builtin(name)
        cert = sc.certify()
        if cert.pair_deltas != sc.deltas:
            bad.append(name)
    elapsed = time.perf_counter() - start
    ok = len(scenarios.CYCLES) == 9 and not bad and elapsed < 1
    report(1, ok, f"{len(scenarios.CYCLES)} cycles certified, delta mismatches {bad}, {elapsed:.2f}s")


def test_criterion_2_example_values(report):
    # Agents a, b, c; a: u(b)=-1, u(c)=-3; b: u(a)=1, u(c)=-1.
    game = Game.from_matrix([[0, -1, -3], [1, 0, -1], [0, 0, 0]], "MF")
    a, b = 0, 1
    mf_a_abc = aggregate(game, a, {0, 1, 2})
    mf_a_ac = aggregate(game, a, {0, 2})
    mf_b_abc = partition_utility(game, b, Partition([[0, 1, 2]]))
    mf_b_ab = partition_utility(game, b, Partition([[0, 1], [2]]))
    ok = (mf_a_abc, mf_a_ac, mf_b_abc, mf_b_ab) == (-2, -3, 0, 1)
    ok = ok and mf_a_abc > mf_a_ac and mf_b_abc < mf_b_ab and type(mf_a_abc) is int
    report(2, ok, f"MF_a: {mf_a_abc} > {mf_a_ac}; MF_b: {mf_b_abc} < {mf_b_ab}")


def test_criterion_3_axiom_suite(report):
    start = time.perf_counter()
    expect_fail = {("MF", "ATE")}
    wrong = []
    for caf in ("AS", "MF"):
        for axiom in AXIOMS:
            v = check_axiom(caf, axiom, budget=10_000, seed=0)
            if v.found != ((caf, axiom) in expect_fail):
                wrong.append(f"{caf}/{axiom}")
    seeded = check_axiom("MF", "ATE", budget=10_000, seed=0)
    cex = seeded.counterexample
    seeded_ok = cex is not None and (cex.lhs, cex.rhs) == (-2, -3) and replay("MF", cex)
    sampled = check_axiom("MF", "ATE", budget=10_000, seed=0, include_seed=False)
    sampled_ok = sampled.found and replay("MF", sampled.counterexample)
    elapsed = time.perf_counter() - start
    ok = not wrong and seeded_ok and sampled_ok and elapsed < 30
    report(3, ok, f"unexpected verdicts {wrong}, seeded case {seeded_ok}, sampled MF ATE counterexample "
                  f"{sampled_ok}, {elapsed:.1f}s")


@pytest.mark.slow
def test_criterion_4_convergence_suites(report):
    start = time.perf_counter()
    failures = {suite_id(s): run_suite(s, games=200, cap=10**6) for s in SUITES}
    bad = {k: v for k, v in failures.items() if v}
    elapsed = time.perf_counter() - start
    report(4, not bad, f"{len(SUITES)} suites x 200 games, failing seeds {bad}, {elapsed:.0f}s")


def test_criterion_5_run_and_chase(report, run_and_chase):
    game = run_and_chase
    resent = run(game, None, "NS", PerceptionModel("resent"), max_steps=100)
    optimal = shortest_sequence(game, None, "NS", PerceptionModel("resent"), bound=10)
    shorter = shortest_sequence(game, None, "NS", PerceptionModel("resent"), bound=1)
    resent_ok = (isinstance(resent.outcome, Converged) and resent.steps == 2 and len(optimal) == 2
                 and shorter is None)

    sc = scenarios.builtin("devresent_ns_runchase")
    trace = sc.replay(50)
    parts = [sc.initial]
    for dev in trace.script():
        parts.append(apply_deviation(parts[-1], dev))
    periodic = (len(parts) == 101 and parts[0] != parts[1]
                and all(parts[t] == parts[t + 2] for t in range(len(parts) - 2)))
    cert = sc.certify()
    devres_ok = periodic and cert.p == 2

    classical = run(game, None, "NS", PerceptionModel("none"), max_steps=10_000)
    classical_ok = isinstance(classical.outcome, StepLimit)
    report(5, resent_ok and devres_ok and classical_ok,
           f"resent {resent.steps} steps, BFS optimum {len(optimal)}; deviator-resent period 2 over 50 periods "
           f"{devres_ok}; classical {classical.outcome.name}")


def test_criterion_6_reductions(report):
    start = time.perf_counter()
    inst = build_rx3c(1)
    cover = find_exact_cover(inst)
    lengths, problems = {}, []
    for target, k in (("NS_IS", 10), ("CNS", 6), ("CS", 5)):
        for variant in ("resentful", "appreciative"):
            out = reduce(inst, target, variant)
            script = witness(out, cover)
            lengths[target] = len(script)
            if len(script) != k or out.k != k:
                problems.append(f"{target}/{variant} length {len(script)}")
            for kind in out.kinds:
                trace = run(out.game, None, kind, out.model, ScriptedPolicy(script), max_steps=len(script))
                if trace.steps != len(script) or not isinstance(trace.outcome, Converged):
                    problems.append(f"{target}/{variant}/{kind.value} replay {trace.outcome.name}")
                    continue
                state = trace.final_state
                stable = naive_group_stable(out.game, state, kind) if kind.is_group else is_stable(
                    out.game, state, kind)
                if not stable:
                    problems.append(f"{target}/{variant}/{kind.value} not stable")
    elapsed = time.perf_counter() - start
    ok = not problems and elapsed < 60
    report(6, ok, f"witness lengths {lengths}, problems {problems}, {elapsed:.1f}s")


def test_criterion_7_reversal(report):
    sc = scenarios.builtin("mfhg_resent_ns")
    sc.certify()
    game, model, partition, script = reverse_periodic(sc.game, sc.model, sc.kind, sc.initial, [], sc.period)
    cert = certify_cycle(game, model, sc.kind, partition, [], script)
    forward_ok = model.tag == "appreciation" and cert.p == len(sc.period)
    game2, model2, partition2, script2 = reverse_periodic(game, model, sc.kind, partition, [], script)
    back_ok = list(script2) == list(sc.period) and model2 == sc.model and partition2 == sc.initial
    report(7, forward_ok and back_ok, f"reversed scenario certifies under {model.tag}: {forward_ok}; "
                                      f"double reversal restores script: {back_ok}")


@pytest.mark.slow
def test_criterion_8_simulation_analogues(report):
    start = time.perf_counter()
    games = 20
    checks = {}
    batches = {}
    for model in ("resent", "appreciation", "both"):
        rows = run_batch(ExperimentConfig(n=25, games=games, utilities="gaussian", sigma=10, model=model, seed=0,
                                          max_steps=100_000))
        batches[("gaussian", model)] = rows
        checks[f"gaussian {model} converged"] = (sum(r.stats.converged for r in rows), games)
    for model in ("resent", "appreciation", "none"):
        batches[("uniform", model)] = run_batch(ExperimentConfig(n=20, games=games, model=model, seed=0,
                                                                 max_steps=100_000))

    gaussian_ok = all(done == total for done, total in checks.values())
    converged = [r for r in batches[("uniform", "resent")] if r.stats.converged]
    singletons = sum(r.stats.coalitions == 20 for r in converged)
    singleton_ok = bool(converged) and singletons >= 0.9 * len(converged)
    timeouts = sum(not r.stats.converged for r in batches[("uniform", "none")])
    none_ok = timeouts > games / 2
    resent_rows = batches[("uniform", "resent")] + batches[("gaussian", "resent")]
    apprec_rows = batches[("uniform", "appreciation")] + batches[("gaussian", "appreciation")]
    sign_ok = all(r.stats.avg_change <= 0 for r in resent_rows) and all(r.stats.avg_change >= 0
                                                                       for r in apprec_rows)
    elapsed = time.perf_counter() - start
    ok = gaussian_ok and singleton_ok and none_ok and sign_ok and elapsed <= 15 * 60
    detail = (f"gaussian converged {[f'{k.split()[1]} {v[0]}/{v[1]}' for k, v in checks.items()]}; "
              f"uniform resent all-singleton {singletons}/{len(converged)} converged (need >= 90%); "
              f"model None step cap {timeouts}/{games}; change signs {sign_ok}; {elapsed:.0f}s")
    report(8, ok, detail)


def _cli(argv):
    out = io.StringIO()
    code = main(argv, out=out)
    return code, out.getvalue()


def test_criterion_9_determinism(report, tmp_path):
    game = tmp_path / "g.json"
    export_code, text = _cli(["export", "--example", "mfhg_resent_ns"])
    game.write_text(json.dumps(json.loads(text)["game"]))
    commands = [
        ["run", "--game", str(game), "--stability", "ns", "--model", "resent", "--seed", "3", "--json",
         "--max-steps", "500"],
        ["experiment", "--n", "10", "--games", "4", "--seed", "11"],
        ["experiment", "--n", "8", "--games", "2", "--seed", "11", "--engine", "exact", "--json"],
        ["verify", "--example", "all", "--json"],
        ["axioms", "--budget", "300", "--seed", "5", "--json"],
        ["search", "--game", str(game), "--model", "resent", "--bound", "2", "--json"],
    ]
    differing = []
    for argv in commands:
        first, second = _cli(argv), _cli(argv)
        if first != second or first[0] != 0:
            differing.append(argv[0])
    files = []
    for attempt in range(2):
        out = tmp_path / f"rx{attempt}.json"
        wit = tmp_path / f"w{attempt}.json"
        _cli(["generate", "rx3c", "--target", "cs", "--out", str(out), "--witness", str(wit)])
        files.append(out.read_bytes() + wit.read_bytes())
    if files[0] != files[1]:
        differing.append("generate")
    ok = export_code == 0 and not differing
    report(9, ok, f"{len(commands) + 1} commands repeated, differing output {differing}")
