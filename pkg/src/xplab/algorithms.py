"""Registered CONGEST algorithms for experiments and tests.

Every algorithm here is a pure state machine with a declared running time,
so the cut simulation can schedule it. States are tuples; payloads are bit
strings. Factories that need the topology take the graph and bake a sorted
neighbor table into the closure, which keeps init states independent of the
inputs for all nodes except s and t.
"""

from __future__ import annotations

from .congest import NodeAlgorithm, default_bandwidth
from .multigraph import MultiGraph
from .nodes import SINK, SOURCE
from .pointer_chasing import PcInstance, distributed_pc_algorithm, relay_inputs


def silent_algorithm(rounds: int) -> NodeAlgorithm:
    """Nobody sends; every node outputs "0" after the declared rounds."""

    def init(node, input_bits, tape):
        return 0

    def emit(node, state, tape, tau):
        return []

    def receive(node, state, incoming, tape, tau):
        return state + 1

    def output(node, state):
        return "0" if state >= rounds else None

    return NodeAlgorithm("silent", init, emit, receive, output, rounds=rounds)


def beacon_algorithm(graph: MultiGraph, rounds: int) -> NodeAlgorithm:
    """Every node sends its bit to every neighbor every round; outputs fold
    the receive counts. The source's bit is its first input bit, so the
    source side is input-sensitive while all other init states are not."""
    nbrs = {u: sorted(graph.neighbors(u)) for u in graph.nodes}

    def init(node, input_bits, tape):
        return (0, 0, input_bits[0] if input_bits else "1")

    def emit(node, state, tape, tau):
        return [(v, state[2]) for v in nbrs[node]]

    def receive(node, state, incoming, tape, tau):
        done, received, bit = state
        return (done + 1, received + sum(1 for m in incoming if m.payload == "1"), bit)

    def output(node, state):
        return format(state[1] % 256, "08b") if state[0] >= rounds else None

    return NodeAlgorithm("beacon", init, emit, receive, output, rounds=rounds)


def coin_algorithm(graph: MultiGraph, rounds: int) -> NodeAlgorithm:
    """Each node relays a shared-tape bit keyed by (node, round); outputs
    the parity of everything heard. Fixing the tape seed makes the
    public-coin algorithm deterministic."""
    nbrs = {u: sorted(graph.neighbors(u)) for u in graph.nodes}

    def init(node, input_bits, tape):
        return (0, 0)

    def emit(node, state, tape, tau):
        bit = tape.bits(("coin", node, tau), 1)
        return [(v, bit) for v in nbrs[node]]

    def receive(node, state, incoming, tape, tau):
        done, parity = state
        flips = sum(1 for m in incoming if m.payload == "1")
        return (done + 1, (parity + flips) % 2)

    def output(node, state):
        return str(state[1]) if state[0] >= rounds else None

    return NodeAlgorithm("coin", init, emit, receive, output, rounds=rounds)


def flood_algorithm(graph: MultiGraph) -> NodeAlgorithm:
    """The source floods its input bit; every node outputs it on receipt.
    Terminates in exactly ecc(source) rounds."""
    nbrs = {u: sorted(graph.neighbors(u)) for u in graph.nodes}

    def init(node, input_bits, tape):
        return input_bits[0] if node == SOURCE else None

    def emit(node, state, tape, tau):
        return [(v, state) for v in nbrs[node]] if state is not None else []

    def receive(node, state, incoming, tape, tau):
        if state is not None:
            return state
        return incoming[0].payload if incoming else None

    def output(node, state):
        return state

    return NodeAlgorithm("flood", init, emit, receive, output)


def token_relay_algorithm(route: list, payload: str = "1") -> NodeAlgorithm:
    """Carry a token along a precomputed route, one hop per round; the last
    route node outputs the payload on arrival. Runs len(route)-1 rounds."""
    index = {v: q for q, v in enumerate(route)}
    last = route[-1]

    def init(node, input_bits, tape):
        if node == route[0]:
            return ("hold", payload)
        return ("wait",) if node in index else ("idle",)

    def emit(node, state, tape, tau):
        if state[0] == "hold" and node != last:
            return [(route[index[node] + 1], state[1])]
        return []

    def receive(node, state, incoming, tape, tau):
        if state[0] == "hold":
            return ("done",) if node != last else state
        if state[0] == "wait":
            for msg in incoming:
                if msg.sender in index:
                    return ("hold", msg.payload)
        return state

    def output(node, state):
        return state[1] if state[0] == "hold" else None

    return NodeAlgorithm("token-relay", init, emit, receive, output,
                         output_nodes=frozenset({last}), rounds=len(route) - 1)


REGISTERED = ("silent", "beacon", "coin", "flood", "pc-relay")


def make_algorithm(name: str, graph: MultiGraph, *, rounds: int | None = None,
                   instance: PcInstance | None = None,
                   bandwidth: int | None = None) -> tuple:
    """Instantiate a registered algorithm on a graph; returns the algorithm
    and its default engine input map."""
    if name == "silent":
        return silent_algorithm(_required(rounds, name)), {}
    if name == "beacon":
        return beacon_algorithm(graph, _required(rounds, name)), {SOURCE: "1", SINK: "0"}
    if name == "coin":
        return coin_algorithm(graph, _required(rounds, name)), {}
    if name == "flood":
        return flood_algorithm(graph), {SOURCE: "1"}
    if name == "pc-relay":
        if instance is None:
            raise ValueError("pc-relay needs an instance")
        if bandwidth is None:
            bandwidth = default_bandwidth(graph)
        algo = distributed_pc_algorithm(graph, instance, bandwidth)
        return algo, relay_inputs(instance)
    raise ValueError(f"unknown algorithm {name!r}; registered: {', '.join(REGISTERED)}")


def _required(rounds, name):
    if rounds is None:
        raise ValueError(f"{name} needs a round count")
    return rounds
