import math
from fractions import Fraction

import pytest

from xplab.errors import BudgetExceeded, ParamViolation
from xplab.family import FamilyParams, build_G
from xplab.gadget import (GadgetParams, build_gadget,
                          exact_destination_distribution,
                          exact_follow_probability, expected_path,
                          reduction_run, sample_walk, trial_seed)
from xplab.multigraph import UNBOUNDED, MultiGraph
from xplab.nodes import is_highway
from xplab.pointer_chasing import PcInstance, g, pc

INST4 = PcInstance(4, 2, (2, 3, 4, 1), (3, 1, 4, 2))


def smallest():
    gp = GadgetParams(FamilyParams(1, 2, 2), r=1, m=1)
    return gp, PcInstance.identity(1, 1)


def small_m4():
    gp = GadgetParams(FamilyParams(1, 2, 16), r=2, m=4)
    return gp, INST4


def test_params_derive_and_validate():
    gp, _ = smallest()
    assert gp.L == 7 and gp.ell == 13 and gp.W == 6 * 2 * 13
    with pytest.raises(ParamViolation):
        GadgetParams(FamilyParams(1, 2, 2), r=1, m=2)  # 2rm = 4 > 2


def test_exponents_along_expected_path_are_consecutive():
    gp, inst = smallest()
    gadget = build_gadget(gp, inst)
    path = expected_path(gadget, inst)
    assert len(path) == 2 * gp.r * gp.L
    exps = [gadget.chain_exponents[frozenset((u, v))] for u, v in zip(path, path[1:])]
    assert exps == list(range(1, gp.ell + 1))
    mults = [gadget.graph.multiplicity(u, v) for u, v in zip(path, path[1:])]
    assert mults == [gp.W ** k for k in range(1, gp.ell + 1)]


def test_exponents_consecutive_on_multi_stage_instance():
    gp, inst = small_m4()
    gadget = build_gadget(gp, inst)
    path = expected_path(gadget, inst)
    exps = [gadget.chain_exponents[frozenset((u, v))] for u, v in zip(path, path[1:])]
    assert exps == list(range(1, gp.ell + 1))


def test_terminal_is_at_walk_distance_ell():
    gp, inst = small_m4()
    gadget = build_gadget(gp, inst)
    path = expected_path(gadget, inst)
    assert path[-1] == gadget.terminal_node(pc(inst))
    assert len(path) - 1 == gp.ell


def test_expected_path_labels_follow_the_chase():
    gp, inst = small_m4()
    gadget = build_gadget(gp, inst)
    path = expected_path(gadget, inst)
    # t-path stage labels are g^2, g^4 = 1, 1 for the worked instance
    assert g(2, inst) == 1 and g(4, inst) == 1
    for i in (1, 2):
        lo = (2 * i - 1) * gp.L
        assert path[lo] == gadget.t_nodes[(i, g(2 * i, inst), 1)]
    # identity instance stays on the j=1 stages
    gp0, inst0 = smallest()
    gadget0 = build_gadget(gp0, inst0)
    path0 = expected_path(gadget0, inst0)
    assert all(node in {gadget0.s_nodes[(1, 1, x)] for x in range(1, 8)}
               | {gadget0.t_nodes[(1, 1, x)] for x in range(1, 8)}
               for node in path0)


def test_gadget_is_legal_restriction_of_G():
    gp, inst = small_m4()
    gadget = build_gadget(gp, inst)
    base = build_G(gp.family)
    for u, v, mult in gadget.graph.edges():
        assert base.has_edge(u, v)
        base_mult = base.multiplicity(u, v)
        if base_mult is not UNBOUNDED:
            assert mult <= base_mult


def test_successor_predecessor_ratio_is_W():
    gp, inst = small_m4()
    gadget = build_gadget(gp, inst)
    path = expected_path(gadget, inst)
    for prev, u, nxt in zip(path, path[1:], path[2:]):
        m_in = gadget.graph.multiplicity(prev, u)
        m_out = gadget.graph.multiplicity(u, nxt)
        assert m_out == gp.W * m_in


def test_unit_degree_bound_on_expected_path():
    # Claim-1 style: at most Gamma unit edges at every trajectory node
    gp, inst = small_m4()
    gadget = build_gadget(gp, inst)
    for u in expected_path(gadget, inst):
        units = sum(m for _, m in gadget.graph.incident(u) if m == 1)
        assert units <= gp.family.gamma


def test_follow_probability_bounds():
    for gp, inst in (smallest(), small_m4()):
        gadget = build_gadget(gp, inst)
        path = expected_path(gadget, inst)
        prob, min_step = exact_follow_probability(gadget, path)
        assert min_step >= 1 - Fraction(1, 3 * gp.ell)
        assert prob >= Fraction(2, 3)


def test_follow_probability_hand_built_chain():
    g4 = MultiGraph()
    g4.add_edge("a", "b", 1)
    g4.add_edge("b", "c", 8)
    g4.add_edge("c", "d", 64)
    prob, min_step = exact_follow_probability(g4, ["a", "b", "c", "d"])
    # at the middle node b: continue 8/(8+1) = 8/9
    assert min_step == Fraction(8, 9)
    assert prob == 1 * Fraction(8, 9) * Fraction(64, 72)


def test_destination_distribution_stochastic_and_dominates():
    gp, inst = smallest()
    gadget = build_gadget(gp, inst)
    path = expected_path(gadget, inst)
    prob, _ = exact_follow_probability(gadget, path)
    dist = exact_destination_distribution(gadget, path[0], gp.ell)
    assert sum(dist.values()) == 1
    assert dist[path[-1]] >= prob


def test_destination_distribution_budget():
    gp, inst = smallest()
    gadget = build_gadget(gp, inst)
    with pytest.raises(BudgetExceeded):
        exact_destination_distribution(gadget, gadget.start_node(inst), gp.ell, budget=10)


def test_dp_budget_env_var(monkeypatch):
    monkeypatch.setenv("XPLAB_DP_BUDGET", "10")
    gp, inst = smallest()
    gadget = build_gadget(gp, inst)
    with pytest.raises(BudgetExceeded):
        exact_destination_distribution(gadget, gadget.start_node(inst), gp.ell)
    # reduction degrades gracefully to sampling only
    report = reduction_run(gp, inst, trials=20, seed=1)
    assert report.exact_destination_mass is None
    assert report.follow_probability >= Fraction(2, 3)


def test_sample_walk_deterministic():
    gp, inst = smallest()
    gadget = build_gadget(gp, inst)
    start = gadget.start_node(inst)
    a = sample_walk(gadget, start, gp.ell, seed=123)
    b = sample_walk(gadget, start, gp.ell, seed=123)
    assert a == b
    # walk length parity: an ell-step walk from an even-layer node
    assert a in gadget.graph.nodes


def test_sample_walk_matches_exact_distribution():
    gp, inst = smallest()
    gadget = build_gadget(gp, inst)
    start = gadget.start_node(inst)
    dist = exact_destination_distribution(gadget, start, gp.ell)
    terminal = gadget.terminal_node(1)
    p = float(dist[terminal])
    n = 4000
    hits = sum(1 for k in range(n)
               if sample_walk(gadget, start, gp.ell, trial_seed(17, k)) == terminal)
    sigma = math.sqrt(p * (1 - p) / n)
    assert abs(hits / n - p) <= 4 * sigma


def test_reduction_identity():
    gp, inst = smallest()
    report = reduction_run(gp, inst, trials=400, seed=7)
    assert report.pc_value == 1
    assert report.follow_probability >= Fraction(2, 3)
    assert report.success_rate >= 2 / 3
    assert report.modal_output == 1
    assert report.exact_destination_mass is not None
    assert report.exact_destination_mass >= report.follow_probability


def test_reduction_m4_modal_output():
    gp, inst = small_m4()
    report = reduction_run(gp, inst, trials=60, seed=11, dp=False)
    assert report.modal_output == pc(inst) == 1
    assert report.success_rate >= 2 / 3


def test_reduction_no_trials_exact_only():
    gp, inst = smallest()
    report = reduction_run(gp, inst, trials=0, seed=0)
    assert report.trials == 0 and report.successes == 0
    assert report.success_rate is None and report.modal_output is None
    assert report.follow_probability >= Fraction(2, 3)


def test_alt_connector_flag_builds_noncanonical_variant():
    gp, inst = smallest()
    gadget = build_gadget(gp, inst, alt_connectors=True)
    # the alternative wiring re-weights different clique edges; it builds,
    # but its exponents cannot be consecutive along the intended trajectory
    path = expected_path(gadget, inst)
    pairs = [frozenset((u, v)) for u, v in zip(path, path[1:])]
    exps = [gadget.chain_exponents.get(pair) for pair in pairs]
    assert exps != list(range(1, gp.ell + 1))


def test_start_node_is_fA_of_one():
    gp = GadgetParams(FamilyParams(1, 2, 8), r=1, m=4)
    inst = PcInstance(4, 1, (3, 1, 2, 4), (2, 2, 2, 2))
    gadget = build_gadget(gp, inst)
    assert gadget.start_node(inst) == gadget.s_nodes[(1, 3, 1)]
