"""Two-party simulation of a deterministic CONGEST algorithm on the
lower-bound network, with exact bit and round accounting.

Alice holds the input of s and can initialize every node except t; Bob
mirrors. Rounds are named backward from the largest highway subscript.
Round r runs phi'_r iterations per phase, each advancing one simulated
time step:

* A phase, iteration i at time tau = t_r + i: Alice locally advances a
  fast-shrinking envelope (its subscript boundary retreats by
  lam**(floor(kappa)-1) per step, matching the bottom-highway hop span) and
  sends Bob the few highway messages entering his slow set from beyond its
  fixed subscript boundary; Bob advances his slow set, which sheds one path
  position per step.
* B phase: the mirror image, with Bob reading sender states off his already
  computed A-phase configurations.

Crossing messages are derived generically from set adjacency - the senders
are exactly the nodes outside the receiver's previous set that touch the
target set - instead of hard-coding the subscript arithmetic; structural
assertions (highway-only, at most ceil(kappa) edges, senders known) guard
every iteration.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .congest import ExecutionTrace, Message, NodeAlgorithm, SharedTape, default_bandwidth
from .errors import CoverageGap, ExactnessViolation, TooManySteps
from .family import (FamilyParams, build_G, exceeds_scaled_power,
                     normalize_set_index, phi_prime, s_set)
from .multigraph import MultiGraph
from .nodes import SINK, SOURCE, is_highway


def t_r(params: FamilyParams, r: int) -> int:
    """Simulated steps completed before round r: sum of phi' above r."""
    return sum(phi_prime(j, params) for j in range(r + 1, params.max_sub + 1))


@dataclass(frozen=True)
class ScheduleEntry:
    round: int
    phase: str  # "A" (Alice sends) or "B" (Bob sends)
    index: int
    tau: int
    alice_set: Optional[tuple]  # normalized (i, j) the entry leaves Alice knowing
    bob_set: Optional[tuple]


def schedule(params: FamilyParams, T_A: int) -> list:
    """Iteration plan for simulating T_A rounds; ends at the largest round
    whose cumulative coverage reaches T_A."""
    if T_A < 1:
        raise TooManySteps("T_A must be >= 1")
    if exceeds_scaled_power(T_A, params.kappa, params.lam, params.kappa):
        raise TooManySteps(
            f"T_A={T_A} exceeds kappa*lambda^kappa for {params.kappa}, {params.lam}")
    step1 = params.lam ** (params.floor_kappa - 1)
    entries = []
    r = params.max_sub
    tr = 0
    while True:
        if r < 1:
            raise TooManySteps("schedule underflow below round 1")
        phr = phi_prime(r, params)
        steps = min(phr, T_A - tr)
        for i in range(1, steps + 1):
            fast = r - i * step1
            entries.append(ScheduleEntry(
                round=r, phase="A", index=i, tau=tr + i,
                alice_set=(fast, 1) if fast >= 0 else None,
                bob_set=normalize_set_index(-r, phr - i, params)))
        for i in range(1, steps + 1):
            fast = r - i * step1
            entries.append(ScheduleEntry(
                round=r, phase="B", index=i, tau=tr + i,
                alice_set=normalize_set_index(r, phr - i, params),
                bob_set=(-fast, 1) if fast >= 1 else None))
        if tr + phr >= T_A:
            return entries
        tr += phr
        r -= 1


def boundary_senders(graph: MultiGraph, receiver_prior: frozenset,
                     receiver_target: frozenset) -> list:
    """Nodes outside the receiver's previous set that touch the target set;
    their messages are exactly what the receiver cannot compute alone."""
    return sorted({u for v in receiver_target
                   for u in graph.neighbors(v) if u not in receiver_prior})


def crossing_messages(graph: MultiGraph, algo: NodeAlgorithm, tape: SharedTape,
                      sender_states: dict, receiver_prior: frozenset,
                      receiver_target: frozenset, tau: int) -> list:
    """Messages of the direct run sent at time tau into the target set from
    nodes the receiver could not simulate, computed from the sending party's
    known states at tau-1."""
    out = []
    for u in boundary_senders(graph, receiver_prior, receiver_target):
        if u not in sender_states:
            raise CoverageGap(f"sender {u!r} at time {tau - 1} not in sending party's known set")
        for v, payload in algo.emit(u, sender_states[u], tape, tau):
            if v in receiver_target:
                out.append(Message(u, v, payload, tau))
    return out


def _advance_config(graph: MultiGraph, algo: NodeAlgorithm, tape: SharedTape,
                    prev: dict, target: frozenset, tau: int, extra: list,
                    covered: frozenset = frozenset()) -> dict:
    """Advance the states of `target` from time tau-1 to tau.

    prev holds the party's known states at tau-1; extra supplies the
    messages from the `covered` senders outside prev (a silent covered
    sender contributes no message but still counts as accounted for).
    """
    for v in target:
        if v not in prev:
            raise CoverageGap(f"target node {v!r} unknown at time {tau - 1}")
        for u in graph.neighbors(v):
            if u not in prev and u not in covered:
                raise CoverageGap(
                    f"neighbor {u!r} of target node {v!r} unknown at time {tau - 1}")
    inbox = {v: [] for v in target}
    for u in sorted(prev):
        if not any(v in inbox for v in graph.neighbors(u)):
            continue
        for v, payload in algo.emit(u, prev[u], tape, tau):
            if v in inbox:
                inbox[v].append(Message(u, v, payload, tau))
    for m in extra:
        if m.receiver in inbox:
            inbox[m.receiver].append(m)
    new = {}
    for v in target:
        msgs = tuple(sorted(inbox[v], key=lambda m: (m.sender,)))
        new[v] = algo.receive(v, prev[v], msgs, tape, tau)
    return new


@dataclass
class IterationRecord:
    round: int
    phase: str
    index: int
    tau: int
    alice_set: Optional[tuple]
    bob_set: Optional[tuple]
    messages: tuple
    cumulative_bits: int

    @property
    def bits(self) -> int:
        return sum(m.bits for m in self.messages)


@dataclass
class TwoPartyTranscript:
    params: FamilyParams
    T_A: int
    bandwidth: int
    records: list
    bob_output: Optional[str]
    rounds_used: int

    @property
    def total_bits(self) -> int:
        return sum(rec.bits for rec in self.records)

    @property
    def max_iteration_bits(self) -> int:
        return max((rec.bits for rec in self.records), default=0)

    @property
    def iteration_bit_cap(self) -> int:
        return self.params.ceil_kappa * self.bandwidth

    @property
    def bit_bound(self) -> Fraction:
        return 2 * self.params.kappa * self.bandwidth * self.T_A

    @property
    def round_bound(self) -> Fraction:
        return Fraction(8 * self.T_A) / (self.params.kappa * self.params.lam)

    @property
    def bounds_ok(self) -> bool:
        return (self.max_iteration_bits <= self.iteration_bit_cap
                and Fraction(self.total_bits) <= self.bit_bound
                and Fraction(self.rounds_used) <= self.round_bound)

    def to_json_obj(self) -> dict:
        return {
            "kappa": str(self.params.kappa), "lambda": self.params.lam,
            "gamma": self.params.gamma, "T_A": self.T_A, "bandwidth": self.bandwidth,
            "rounds_used": self.rounds_used, "round_bound": str(self.round_bound),
            "total_bits": self.total_bits, "bit_bound": str(self.bit_bound),
            "bob_output": self.bob_output,
            "iterations": [{
                "round": rec.round, "phase": rec.phase, "index": rec.index,
                "tau": rec.tau,
                "messages": [{"from": repr(m.sender), "to": repr(m.receiver),
                              "bits": m.bits} for m in rec.messages],
                "cumulative_bits": rec.cumulative_bits,
            } for rec in self.records],
        }

    def summary_row(self) -> dict:
        return {
            "kappa": str(self.params.kappa), "lambda": self.params.lam,
            "gamma": self.params.gamma, "T_A": self.T_A,
            "rounds_used": self.rounds_used, "round_bound": str(self.round_bound),
            "bits": self.total_bits, "bit_bound": str(self.bit_bound),
        }


@dataclass
class _Artifacts:
    alice_slow: dict = field(default_factory=dict)  # tau -> (set_idx, config)
    bob_slow: dict = field(default_factory=dict)
    alice_fast: dict = field(default_factory=dict)  # (round, i) -> (set_idx, config)
    records: list = field(default_factory=list)
    rounds_used: int = 0


def _restrict(config: dict, nodes: frozenset) -> dict:
    missing = [v for v in nodes if v not in config]
    if missing:
        raise ExactnessViolation(f"known set missing nodes {missing[:3]}...")
    return {v: config[v] for v in nodes}


def _execute(graph: MultiGraph, algo: NodeAlgorithm, tape: SharedTape,
             params: FamilyParams, plan: list, alice0: dict, bob0: dict,
             bandwidth: int) -> _Artifacts:
    art = _Artifacts()
    ck = params.ceil_kappa
    top = (params.max_sub, phi_prime(params.max_sub, params))
    art.alice_slow[0] = (top, alice0)
    art.bob_slow[0] = ((-top[0], top[1]), bob0)
    fast_prev: dict = {}
    cumulative = 0
    rounds_seen = set()

    for entry in plan:
        rr, i, tau = entry.round, entry.index, entry.tau
        rounds_seen.add(rr)
        if entry.phase == "A":
            if i == 1:  # seed Alice's fast envelope from her slow set at t_r
                fast_prev = _restrict(art.alice_slow[tau - 1][1], s_set(rr, 1, params))
            # Alice's local fast step, when the envelope index stays meaningful
            fast_cfg = None
            if entry.alice_set is not None:
                fast_target = s_set(*entry.alice_set, params)
                fast_cfg = _advance_config(graph, algo, tape, fast_prev, fast_target, tau, [])
                art.alice_fast[(rr, i)] = (entry.alice_set, fast_cfg)
            # crossing messages from Alice into Bob's target
            prior_cfg = art.bob_slow[tau - 1][1]
            target = s_set(*entry.bob_set, params)
            prior_nodes = frozenset(prior_cfg)
            covered = frozenset(boundary_senders(graph, prior_nodes, target))
            msgs = crossing_messages(graph, algo, tape, fast_prev,
                                     prior_nodes, target, tau)
            _check_crossing(graph, msgs, ck, bandwidth, entry)
            new_cfg = _advance_config(graph, algo, tape, prior_cfg, target, tau,
                                      msgs, covered)
            art.bob_slow[tau] = (entry.bob_set, new_cfg)
            if fast_cfg is not None:
                fast_prev = fast_cfg
        else:
            # Bob reads sender states off his A-phase slow configuration
            prior_cfg = art.alice_slow[tau - 1][1]
            target = s_set(*entry.alice_set, params)
            prior_nodes = frozenset(prior_cfg)
            covered = frozenset(boundary_senders(graph, prior_nodes, target))
            msgs = crossing_messages(graph, algo, tape, art.bob_slow[tau - 1][1],
                                     prior_nodes, target, tau)
            _check_crossing(graph, msgs, ck, bandwidth, entry)
            new_cfg = _advance_config(graph, algo, tape, prior_cfg, target, tau,
                                      msgs, covered)
            art.alice_slow[tau] = (entry.alice_set, new_cfg)
            if entry.bob_set is not None:
                # property-2 mirror set: a slice of Bob's A-phase knowledge
                _restrict(art.bob_slow[tau][1], s_set(*entry.bob_set, params))
        cumulative += sum(m.bits for m in msgs)
        art.records.append(IterationRecord(
            round=rr, phase=entry.phase, index=i, tau=tau,
            alice_set=entry.alice_set, bob_set=entry.bob_set,
            messages=tuple(msgs), cumulative_bits=cumulative))
    art.rounds_used = len(rounds_seen)
    return art


def _check_crossing(graph: MultiGraph, msgs: list, ceil_kappa: int,
                    bandwidth: int, entry: ScheduleEntry) -> None:
    edges = {frozenset((m.sender, m.receiver)) for m in msgs}
    if len(edges) > ceil_kappa:
        raise CoverageGap(f"{len(edges)} crossing edges at {entry} exceed ceil(kappa)")
    per_edge: dict = {}
    for m in msgs:
        if not (is_highway(m.sender) and is_highway(m.receiver)
                and m.sender[1] == m.receiver[1]):
            raise CoverageGap(f"crossing message {m} not on an along-highway edge")
        if graph.multiplicity(m.sender, m.receiver) != 1:
            raise CoverageGap(f"crossing edge {m.sender}-{m.receiver} not single-copy")
        key = (m.sender, m.receiver)
        per_edge[key] = per_edge.get(key, 0) + m.bits
        if per_edge[key] > bandwidth:
            raise CoverageGap(f"crossing edge {key} carries {per_edge[key]} > B bits")


def simulate(params: FamilyParams, algo: NodeAlgorithm, input_x: Optional[str],
             input_y: Optional[str], tape_seed: int, graph: Optional[MultiGraph] = None,
             bandwidth_B: Optional[int] = None, mode: str = "reexec",
             verify_trace: Optional[ExecutionTrace] = None) -> tuple:
    """Run the bounded-round two-party simulation; returns (bob_output,
    TwoPartyTranscript).

    mode "reexec" (default) re-executes both parties' full local simulations
    from scratch after the incremental pass and demands bit-for-bit equality
    of every configuration and every crossing message; "incremental" trusts
    the rolling pass. verify_trace additionally checks every known
    configuration against a direct-run trace.
    """
    if algo.rounds is None:
        raise ValueError("cut simulation needs algo.rounds (declared running time)")
    T_A = algo.rounds
    if graph is None:
        graph = build_G(params)
    bandwidth = bandwidth_B if bandwidth_B is not None else default_bandwidth(graph)
    tape = SharedTape(tape_seed)
    plan = schedule(params, T_A)

    alice0 = {v: algo.init(v, input_x if v == SOURCE else None, tape)
              for v in graph.nodes if v != SINK}
    bob0 = {v: algo.init(v, input_y if v == SINK else None, tape)
            for v in graph.nodes if v != SOURCE}

    art = _execute(graph, algo, tape, params, plan, alice0, bob0, bandwidth)
    if mode == "reexec":
        redo = _execute(graph, algo, tape, params, plan, alice0, bob0, bandwidth)
        _compare_artifacts(art, redo)
    elif mode != "incremental":
        raise ValueError(f"unknown mode {mode!r}")

    if verify_trace is not None:
        _verify_against_trace(art, verify_trace)

    final_cfg = art.bob_slow[T_A][1]
    bob_output = algo.output(SINK, final_cfg[SINK])
    transcript = TwoPartyTranscript(
        params=params, T_A=T_A, bandwidth=bandwidth, records=art.records,
        bob_output=bob_output, rounds_used=art.rounds_used)
    return bob_output, transcript


def _compare_artifacts(a: _Artifacts, b: _Artifacts) -> None:
    for name, left, right in (("alice_slow", a.alice_slow, b.alice_slow),
                              ("bob_slow", a.bob_slow, b.bob_slow),
                              ("alice_fast", a.alice_fast, b.alice_fast)):
        if left.keys() != right.keys():
            raise ExactnessViolation(f"re-execution changed {name} coverage")
        for key in left:
            if left[key] != right[key]:
                raise ExactnessViolation(f"re-execution diverged in {name} at {key}")
    if [r.messages for r in a.records] != [r.messages for r in b.records]:
        raise ExactnessViolation("re-execution changed crossing messages")


def _verify_against_trace(art: _Artifacts, trace: ExecutionTrace) -> None:
    """Every known configuration must equal the direct-run snapshot."""
    for family in (art.alice_slow, art.bob_slow):
        for tau, (idx, cfg) in family.items():
            for v, state in cfg.items():
                if trace.state(v, tau) != state:
                    raise ExactnessViolation(
                        f"slow config {idx} at tau={tau}: node {v!r} diverges from direct run")
    for (rr, i), (idx, cfg) in art.alice_fast.items():
        tau = None
        for rec in art.records:
            if rec.round == rr and rec.phase == "A" and rec.index == i:
                tau = rec.tau
                break
        for v, state in cfg.items():
            if trace.state(v, tau) != state:
                raise ExactnessViolation(
                    f"fast config {idx} at tau={tau}: node {v!r} diverges from direct run")
