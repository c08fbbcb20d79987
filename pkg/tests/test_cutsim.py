from fractions import Fraction

import pytest

from xplab.algorithms import beacon_algorithm, coin_algorithm, silent_algorithm
from xplab.congest import run
from xplab.cutsim import ScheduleEntry, schedule, simulate, t_r
from xplab.errors import TooManySteps
from xplab.family import FamilyParams, build_G
from xplab.nodes import SINK, SOURCE, highway
from xplab.pointer_chasing import (PcInstance, distributed_pc_algorithm, pc,
                                   relay_inputs)


def entry(plan, rnd, phase, index):
    for e in plan:
        if (e.round, e.phase, e.index) == (rnd, phase, index):
            return e
    raise AssertionError(f"no entry ({rnd}, {phase}, {index})")


def test_t_r_golden(params_paper):
    assert t_r(params_paper, 11) == 7  # phi'_12
    assert t_r(params_paper, 12) == 0
    assert t_r(params_paper, 10) == 13


def test_schedule_rejects_too_many_steps():
    p = FamilyParams(1, 2, 1)
    schedule(p, 2)  # kappa * lambda**kappa = 2 exactly
    with pytest.raises(TooManySteps):
        schedule(p, 3)
    with pytest.raises(TooManySteps):
        schedule(FamilyParams("2.5", 2, 1), 15)  # bound is ~14.14


def test_schedule_golden_indices(params_paper):
    plan = schedule(params_paper, 14)
    # round 12 is communication-free lead-in: 7 iterations per phase
    assert [e.index for e in plan if e.round == 12 and e.phase == "A"] == list(range(1, 8))
    # before I_{11,A,1}, both parties have simulated phi'_12 = 7 steps
    e = entry(plan, 11, "A", 1)
    assert e.tau == 8
    assert e.alice_set == (9, 1)      # Alice computes C^8_{9,1}
    assert e.bob_set == (-11, 5)
    # Alice's message-free envelopes C^8_{9,1} ... C^12_{1,1}
    fast = [entry(plan, 11, "A", i).alice_set for i in range(1, 7)]
    assert fast == [(9, 1), (7, 1), (5, 1), (3, 1), (1, 1), None]
    # six A-phase iterations land Bob on C^13_{-10, 4}
    e6 = entry(plan, 11, "A", 6)
    assert e6.tau == 13 and e6.bob_set == (-10, 4)


def test_schedule_covers_exactly_T_A(params_paper):
    for T in (1, 7, 13, 14):
        plan = schedule(params_paper, T)
        taus = [e.tau for e in plan if e.phase == "A"]
        assert max(taus) == T
        assert sorted(set(taus)) == list(range(1, T + 1))


def test_schedule_stops_at_largest_covering_round(params_paper):
    # r' is the largest round whose cumulative coverage reaches T_A
    assert min(e.round for e in schedule(params_paper, 14)) == 10
    assert min(e.round for e in schedule(params_paper, 13)) == 11
    assert min(e.round for e in schedule(params_paper, 7)) == 12


def test_schedule_round_count_bound(params_paper):
    # rounds used <= 8 T / (kappa lambda) whenever T <= kappa lambda^kappa
    for T in range(1, 15):
        plan = schedule(params_paper, T)
        rounds_used = len({e.round for e in plan})
        assert Fraction(rounds_used) <= Fraction(8 * T) / (params_paper.kappa * 2)


def make_graph(kappa, lam, gamma):
    return build_G(FamilyParams(kappa, lam, gamma))


def test_silent_algorithm_crosses_nothing(params_paper):
    g = build_G(params_paper)
    algo = silent_algorithm(14)
    out, tr = simulate(params_paper, algo, None, None, tape_seed=0, graph=g)
    assert out == "0"
    assert tr.total_bits == 0
    assert all(len(rec.messages) == 0 for rec in tr.records)


def test_golden_crossing_messages(params_paper):
    # with an algorithm in which every node speaks every round, iteration
    # I_{11,A,1} carries exactly the two highway
    # messages M^8(h2_-12, h2_-11) and M^8(h1_-12, h1_-10)
    g = build_G(params_paper)
    algo = beacon_algorithm(g, 14)
    direct = run(g, algo, {SOURCE: "1", SINK: "0"}, tape_seed=0, max_rounds=14)
    out, tr = simulate(params_paper, algo, "1", "0", tape_seed=0, graph=g,
                       verify_trace=direct)
    assert out == direct.outputs[SINK]
    rec = next(r for r in tr.records if (r.round, r.phase, r.index) == (11, "A", 1))
    assert rec.tau == 8
    edges = {(m.sender, m.receiver) for m in rec.messages}
    assert edges == {(highway(2, -12), highway(2, -11)),
                     (highway(1, -12), highway(1, -10))}
    # round 12 is message-free (no highway nodes beyond the boundary)
    assert all(not r.messages for r in tr.records if r.round == 12)
    # Bob reaches time 13 knowing S_{-10,4} after the sixth A iteration
    rec6 = next(r for r in tr.records if (r.round, r.phase, r.index) == (11, "A", 6))
    assert rec6.tau == 13 and rec6.bob_set == (-10, 4)


def test_bit_bounds_beacon(params_paper):
    g = build_G(params_paper)
    algo = beacon_algorithm(g, 14)
    out, tr = simulate(params_paper, algo, "1", "0", tape_seed=0, graph=g)
    assert tr.max_iteration_bits <= tr.iteration_bit_cap
    assert Fraction(tr.total_bits) <= tr.bit_bound
    assert Fraction(tr.rounds_used) <= tr.round_bound
    assert tr.rounds_used == 3  # rounds 12, 11, 10 cover 14 steps
    assert tr.bounds_ok


@pytest.mark.parametrize("kappa,lam,T", [
    (1, 2, 2), (2, 2, 8), (2, 3, 18), ("2.5", 2, 14), ("2.5", 3, 38),
])
def test_exactness_against_direct_run(kappa, lam, T):
    params = FamilyParams(kappa, lam, 1)
    g = build_G(params)
    algo = beacon_algorithm(g, T)
    direct = run(g, algo, {SOURCE: "1", SINK: "0"}, tape_seed=5, max_rounds=T)
    out, tr = simulate(params, algo, "1", "0", tape_seed=5, graph=g,
                       verify_trace=direct)
    assert out == direct.outputs[SINK]
    assert tr.bounds_ok


def test_exactness_randomized_tape(params_paper):
    g = build_G(params_paper)
    for seed in (0, 1, 2):
        algo = coin_algorithm(g, 13)
        direct = run(g, algo, {}, tape_seed=seed, max_rounds=13)
        out, tr = simulate(params_paper, algo, None, None, tape_seed=seed, graph=g,
                           verify_trace=direct)
        assert out == direct.outputs[SINK]
        assert tr.bounds_ok


def test_modes_agree(params_paper):
    g = build_G(params_paper)
    algo = beacon_algorithm(g, 10)
    out1, tr1 = simulate(params_paper, algo, "1", "0", 3, graph=g, mode="reexec")
    out2, tr2 = simulate(params_paper, algo, "1", "0", 3, graph=g, mode="incremental")
    assert out1 == out2
    assert [r.messages for r in tr1.records] == [r.messages for r in tr2.records]


def test_simulate_requires_declared_rounds(params_tiny):
    g = build_G(params_tiny)
    from xplab.algorithms import flood_algorithm
    with pytest.raises(ValueError):
        simulate(params_tiny, flood_algorithm(g), "1", None, 0, graph=g)


def test_relay_on_tiny_family_exceeds_hypothesis():
    # on the smallest family member the s-t distance (8) already exceeds
    # kappa*lambda^kappa = 2, so no relay can satisfy the scheduling bound;
    # the relay examples live on kappa=2.5, lambda=4 instead
    params = FamilyParams(1, 2, 2)
    g = build_G(params)
    inst = PcInstance.identity(1, 1)
    algo = distributed_pc_algorithm(g, inst, bandwidth=4)
    assert algo.rounds > 2
    with pytest.raises(TooManySteps):
        simulate(params, algo, relay_inputs(inst)[SOURCE],
                 relay_inputs(inst)[SINK], 0, graph=g)


def test_relay_end_to_end_cut_simulation():
    # the sweep point where the relay fits the scheduling bound:
    # kappa=2.5, lambda=4 gives kappa*lambda^kappa = 80 and an s-t distance
    # around 54, so a one-bounce relay obeys T_A <= 80
    params = FamilyParams("2.5", 4, 2)
    g = build_G(params)
    dist = len(g.shortest_path(SOURCE, SINK)) - 1
    inst = PcInstance(4, 1, (3, 1, 4, 2), (2, 4, 1, 3))
    algo = distributed_pc_algorithm(g, inst, bandwidth=10)
    assert algo.rounds == dist
    direct = run(g, algo, relay_inputs(inst), tape_seed=0,
                 max_rounds=algo.rounds, bandwidth_B=10)
    out, tr = simulate(params, algo, relay_inputs(inst)[SOURCE],
                       relay_inputs(inst)[SINK], tape_seed=0, graph=g,
                       bandwidth_B=10, verify_trace=direct)
    assert out == direct.outputs[SINK]
    assert int(out, 2) + 1 == pc(inst)
    assert tr.bounds_ok
    # the pointer hop across the cut actually shows up
    assert tr.total_bits > 0


def test_relay_identity_end_to_end():
    params = FamilyParams("2.5", 4, 2)
    g = build_G(params)
    inst = PcInstance.identity(2, 1)
    algo = distributed_pc_algorithm(g, inst, bandwidth=10)
    out, tr = simulate(params, algo, relay_inputs(inst)[SOURCE],
                       relay_inputs(inst)[SINK], tape_seed=0, graph=g,
                       bandwidth_B=10)
    assert int(out, 2) + 1 == 1


@pytest.mark.parametrize("kappa,lam", [(1, 2), (2, 2), (2, 3), ("2.5", 2), ("2.5", 3)])
def test_schedule_cuts_are_highway_only_by_enumeration(kappa, lam):
    # consecutive known sets anywhere in the schedule: the edge classes from
    # outside the larger set into the smaller set are along-highway edges,
    # at most ceil(kappa) of them
    from xplab.cutsim import boundary_senders
    from xplab.family import phi_prime, s_set
    params = FamilyParams(kappa, lam, 2)
    g = build_G(params)
    limit = int(params.kappa * params.lam ** params.kappa)
    plan = schedule(params, limit)
    top = phi_prime(params.max_sub, params)
    prev_sets = {"bob": s_set(-params.max_sub, top, params),
                 "alice": s_set(params.max_sub, top, params)}
    for e in plan:
        if e.phase == "A":
            prior, target = prev_sets["bob"], s_set(*e.bob_set, params)
            prev_sets["bob"] = target
        else:
            prior, target = prev_sets["alice"], s_set(*e.alice_set, params)
            prev_sets["alice"] = target
        assert target <= prior
        cut = set()
        for u in boundary_senders(g, prior, target):
            for v in g.neighbors(u):
                if v in target:
                    cut.add(frozenset((u, v)))
                    assert u[0] == "h" and v[0] == "h" and u[1] == v[1]
                    assert g.multiplicity(u, v) == 1
        assert len(cut) <= params.ceil_kappa
