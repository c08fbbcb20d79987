"""Synchronous round-based simulator for the CONGEST(B) model on multigraphs.

Round semantics: messages delivered in round tau are emitted from sender
states at the end of tau-1; the state at tau is a pure function of the state
at tau-1 and the messages received in tau. Determinism is total: identical
(graph, algorithm, inputs, tape_seed) yield identical traces, and shared
randomness is a keyed pseudorandom tape rather than a consumed stream, so
replaying any prefix reproduces it bit for bit.

Algorithm states are treated as immutable values; the engine stores
references, never copies. Algorithms must return fresh state objects.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass
from typing import Callable, Optional

from .errors import BandwidthViolation, RoundLimitExceeded
from .multigraph import UNBOUNDED, MultiGraph
from .nodes import format_label


class SharedTape:
    """Deterministic public randomness, readable by every node.

    Keyed access (no consumed stream) keeps node step functions pure:
    bits(key, n) is a fixed function of (seed, key).
    """

    def __init__(self, seed: int):
        self.seed = seed

    def bits(self, key, nbits: int) -> str:
        out = []
        block = 0
        while len(out) * 256 < nbits:
            h = hashlib.sha256(f"{self.seed}|{key!r}|{block}".encode()).digest()
            out.append("".join(f"{byte:08b}" for byte in h))
            block += 1
        return "".join(out)[:nbits]


@dataclass(frozen=True)
class Message:
    sender: object
    receiver: object
    payload: str  # string over {0,1}
    round: int

    @property
    def bits(self) -> int:
        return len(self.payload)


@dataclass(frozen=True)
class NodeAlgorithm:
    """Per-node synchronous state machine: init / emit / receive / output.

    emit(node, state, tape, tau) returns [(neighbor, payload)] sent in round
    tau from the state at tau-1. receive(node, state, incoming, tape, tau)
    returns the state at tau; incoming is sorted by sender. output(node,
    state) returns the node's output bits, or None while undecided. rounds,
    when set, declares the worst-case running time (needed by the cut
    simulation). output_nodes None means every node must output to halt.
    """

    name: str
    init: Callable
    emit: Callable
    receive: Callable
    output: Callable
    output_nodes: Optional[frozenset] = None
    rounds: Optional[int] = None


@dataclass
class ExecutionTrace:
    algorithm: str
    bandwidth: int
    tape_seed: int
    states: list  # round -> {node: state}; entries may be dropped by state_window
    messages: list  # chronological Message log
    outputs: dict
    total_rounds: int

    @property
    def T_A(self) -> int:
        return self.total_rounds

    def state(self, node, tau: int):
        snap = self.states[tau]
        if snap is None:
            raise KeyError(f"round {tau} snapshot dropped by state_window")
        return snap[node]

    def export_jsonl(self, fp) -> None:
        """One record per round boundary and per message, plus a trailer."""
        for tau in range(self.total_rounds + 1):
            fp.write(json.dumps({"type": "round", "round": tau}) + "\n")
            for msg in self.messages:
                if msg.round == tau:
                    fp.write(json.dumps({
                        "type": "message", "round": tau,
                        "from": format_label(msg.sender), "to": format_label(msg.receiver),
                        "bits": msg.bits, "payload": msg.payload,
                    }) + "\n")
        fp.write(json.dumps({
            "type": "end", "T_A": self.total_rounds,
            "outputs": {format_label(v): out for v, out in self.outputs.items()},
        }) + "\n")


def default_bandwidth(graph: MultiGraph) -> int:
    return max(1, math.ceil(math.log2(graph.node_count())))


def _checked_payload(payload) -> str:
    if not isinstance(payload, str) or payload.strip("01") != "":
        raise ValueError(f"payload must be a string over {{0,1}}, got {payload!r}")
    return payload


def advance_round(graph: MultiGraph, algo: NodeAlgorithm, tape: SharedTape,
                  states: dict, tau: int, bandwidth: int,
                  check_budget: bool = True) -> tuple:
    """One synchronous round over the nodes present in `states`.

    Returns (new_states, messages). `states` may cover a subset of the graph
    (the cut simulation advances restricted configurations); callers are
    responsible for that subset being closed under what they need.
    """
    inboxes: dict = {v: [] for v in states}
    messages = []
    load: dict = {}
    for u in sorted(states):
        for v, payload in algo.emit(u, states[u], tape, tau):
            if not graph.has_edge(u, v):
                raise ValueError(f"{u!r} emitted to non-neighbor {v!r}")
            payload = _checked_payload(payload)
            msg = Message(u, v, payload, tau)
            messages.append(msg)
            if v in inboxes:
                inboxes[v].append(msg)
            if check_budget:
                key = (u, v)
                load[key] = load.get(key, 0) + len(payload)
                mult = graph.multiplicity(u, v)
                if mult is not UNBOUNDED and load[key] > bandwidth * mult:
                    raise BandwidthViolation(
                        f"round {tau}: {load[key]} bits on edge class "
                        f"({u!r}, {v!r}) exceeds budget {bandwidth}*{mult}")
    new_states = {}
    for v in states:
        inbox = tuple(sorted(inboxes[v], key=lambda m: (m.sender,)))
        new_states[v] = algo.receive(v, states[v], inbox, tape, tau)
    return new_states, messages


def run(graph: MultiGraph, algo: NodeAlgorithm, inputs: dict, tape_seed: int,
        max_rounds: int, bandwidth_B: Optional[int] = None,
        state_window: Optional[int] = None) -> ExecutionTrace:
    """Direct CONGEST run until the designated output nodes all produce output.

    state_window keeps only the trailing window of per-round snapshots
    (round 0 is always retained); dropped rounds hold None.
    """
    if max_rounds < 1:
        raise ValueError("max_rounds must be >= 1")
    if not graph.is_connected():
        raise ValueError("graph must be connected")
    for v in inputs:
        if not graph.has_node(v):
            raise ValueError(f"input assigned to unknown node {v!r}")
    bandwidth = bandwidth_B if bandwidth_B is not None else default_bandwidth(graph)
    tape = SharedTape(tape_seed)

    states = {v: algo.init(v, inputs.get(v), tape) for v in graph.nodes}
    snapshots = [states]
    log: list = []
    waiters = algo.output_nodes if algo.output_nodes is not None else frozenset(graph.nodes)

    def finished(current) -> Optional[dict]:
        outs = {v: algo.output(v, current[v]) for v in waiters}
        return outs if all(o is not None for o in outs.values()) else None

    outs = finished(states)
    if outs is not None:
        return ExecutionTrace(algo.name, bandwidth, tape_seed, snapshots, log, outs, 0)

    for tau in range(1, max_rounds + 1):
        states, messages = advance_round(graph, algo, tape, states, tau, bandwidth)
        log.extend(messages)
        snapshots.append(states)
        if state_window is not None and len(snapshots) - 2 > state_window:
            # keep round 0 plus the trailing window
            snapshots[len(snapshots) - 2 - state_window] = None
        outs = finished(states)
        if outs is not None:
            return ExecutionTrace(algo.name, bandwidth, tape_seed, snapshots, log, outs, tau)
    raise RoundLimitExceeded(f"no output from {algo.name} within {max_rounds} rounds")


@dataclass
class ReplayResult:
    ok: bool
    divergence: Optional[tuple] = None  # (kind, location, round)

    def __bool__(self) -> bool:
        return self.ok


def replay_check(trace: ExecutionTrace, graph: MultiGraph, algo: NodeAlgorithm,
                 inputs: dict, tape_seed: int) -> ReplayResult:
    """Re-execute and compare bit for bit; report the first divergence."""
    redo = run(graph, algo, inputs, tape_seed,
               max_rounds=max(trace.total_rounds, 1), bandwidth_B=trace.bandwidth)
    limit = min(trace.total_rounds, redo.total_rounds)
    for tau in range(limit + 1):
        a, b = trace.states[tau], redo.states[tau]
        if a is None or b is None:
            continue
        for v in sorted(a):
            if a[v] != b.get(v):
                return ReplayResult(False, ("state", v, tau))
    old_msgs = {tau: [m for m in trace.messages if m.round == tau] for tau in range(limit + 1)}
    new_msgs = {tau: [m for m in redo.messages if m.round == tau] for tau in range(limit + 1)}
    for tau in range(limit + 1):
        if old_msgs[tau] != new_msgs[tau]:
            return ReplayResult(False, ("messages", None, tau))
    if trace.total_rounds != redo.total_rounds or trace.outputs != redo.outputs:
        return ReplayResult(False, ("outputs", None, limit))
    return ReplayResult(True)
