"""Pointer chasing: the alternating-application function, two-party baseline
protocols with exact bit accounting, and a CONGEST relay computing it on the
lower-bound network.

The chase starts at 1 and alternately applies f_A (odd steps) and f_B (even
steps); after r applications of each the value is the answer. Values are
1-indexed throughout.
"""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass, field

from .congest import NodeAlgorithm
from .errors import IndexOutOfRange, InstanceTooLarge
from .multigraph import MultiGraph
from .nodes import SINK, SOURCE


@dataclass(frozen=True)
class PcInstance:
    m: int
    r: int
    f_a: tuple
    f_b: tuple

    def __post_init__(self):
        if self.m < 1 or self.r < 1:
            raise ValueError("m and r must be >= 1")
        for name, f in (("f_a", self.f_a), ("f_b", self.f_b)):
            if len(f) != self.m or any(not 1 <= v <= self.m for v in f):
                raise ValueError(f"{name} must map [1..m] into [1..m]")

    def apply_a(self, x: int) -> int:
        return self.f_a[x - 1]

    def apply_b(self, x: int) -> int:
        return self.f_b[x - 1]

    @classmethod
    def identity(cls, m: int, r: int) -> "PcInstance":
        ident = tuple(range(1, m + 1))
        return cls(m, r, ident, ident)

    @classmethod
    def random(cls, m: int, r: int, seed: int) -> "PcInstance":
        rng = random.Random(seed)
        return cls(m, r,
                   tuple(rng.randrange(1, m + 1) for _ in range(m)),
                   tuple(rng.randrange(1, m + 1) for _ in range(m)))

    def to_json_obj(self) -> dict:
        return {"m": self.m, "r": self.r, "fA": list(self.f_a), "fB": list(self.f_b)}

    @classmethod
    def from_json_obj(cls, obj: dict) -> "PcInstance":
        return cls(obj["m"], obj["r"], tuple(obj["fA"]), tuple(obj["fB"]))

    @classmethod
    def load_json(cls, fp) -> "PcInstance":
        return cls.from_json_obj(json.load(fp))


def g(i: int, inst: PcInstance) -> int:
    """Value after i alternating applications; g(0) = 1."""
    if not 0 <= i <= 2 * inst.r:
        raise IndexOutOfRange(f"i={i} outside 0..{2 * inst.r}")
    value = 1
    for k in range(1, i + 1):
        value = inst.apply_a(value) if k % 2 == 1 else inst.apply_b(value)
    return value


def pc(inst: PcInstance) -> int:
    return g(2 * inst.r, inst)


def pointer_width(m: int) -> int:
    """Bits to encode a value in [1..m]; at least one placeholder bit."""
    return max(1, math.ceil(math.log2(m))) if m > 1 else 1


def _encode(value: int, width: int) -> str:
    return format(value - 1, f"0{width}b")


def _decode(payload: str) -> int:
    return int(payload, 2) + 1


@dataclass
class Transcript:
    """Two-party message record: (round, direction, payload) triples."""

    entries: list = field(default_factory=list)

    def send(self, rnd: int, direction: str, payload: str) -> None:
        self.entries.append((rnd, direction, payload))

    @property
    def total_bits(self) -> int:
        return sum(len(p) for _, _, p in self.entries)

    @property
    def rounds(self) -> int:
        return max((rnd for rnd, _, _ in self.entries), default=0)


def naive_direct_protocol(inst: PcInstance) -> tuple:
    """r rounds, one pointer per party per round.

    For m = 1 no information is needed; the rounds still carry one-bit
    placeholders so the transcript shape is independent of the input.
    """
    w = pointer_width(inst.m)
    t = Transcript()
    value = 1
    for rnd in range(1, inst.r + 1):
        value = inst.apply_a(value)
        t.send(rnd, "A->B", _encode(value, w))
        value = inst.apply_b(value)
        t.send(rnd, "B->A", _encode(value, w))
    return value, t


def one_round_everything_protocol(inst: PcInstance) -> tuple:
    """Alice ships her whole function; Bob finishes locally."""
    w = math.ceil(math.log2(inst.m)) if inst.m > 1 else 0
    t = Transcript()
    t.send(1, "A->B", "".join(_encode(v, w) for v in inst.f_a) if w else "")
    # Bob now holds both functions
    return pc(inst), t


def naive_bits(inst: PcInstance) -> int:
    return 2 * inst.r * pointer_width(inst.m)


def one_round_bits(inst: PcInstance) -> int:
    return inst.m * (math.ceil(math.log2(inst.m)) if inst.m > 1 else 0)


# -- distributed relay ------------------------------------------------------


def relay_rounds(dist: int, r: int, m: int, bandwidth: int) -> int:
    """Exact running time of the relay: (2r-1) pipelined trips of dist hops,
    each pointer cut into ceil(w/B) chunks."""
    chunks = math.ceil(pointer_width(m) / bandwidth)
    return (2 * r - 1) * (dist + chunks - 1)


def distributed_pc_algorithm(graph: MultiGraph, inst: PcInstance, bandwidth: int,
                             max_rounds: int | None = None) -> NodeAlgorithm:
    """CONGEST relay: s holds f_A, t holds f_B, the current pointer bounces
    along a fixed shortest s-t route; t outputs the final value.

    The route is precomputed by BFS and baked into node states, so only the
    states of s and t depend on the input functions. Chunks pipeline with
    one-round hop latency.
    """
    route = graph.shortest_path(SOURCE, SINK)
    index = {v: q for q, v in enumerate(route)}
    dist = len(route) - 1
    w = pointer_width(inst.m)
    chunks = [(k * bandwidth, min((k + 1) * bandwidth, w))
              for k in range(math.ceil(w / bandwidth))]
    total = relay_rounds(dist, inst.r, inst.m, bandwidth)
    if max_rounds is not None and total > max_rounds:
        raise InstanceTooLarge(f"relay needs {total} rounds > max_rounds={max_rounds}")

    n_chunks = len(chunks)
    m_, r_ = inst.m, inst.r

    def decode_function(bits: str) -> tuple:
        return tuple(_decode(bits[k * w:(k + 1) * w]) for k in range(m_))

    def init(node, input_bits, tape):
        q = index.get(node)
        if q is None:
            return ("idle",)
        if node == SOURCE:
            f = decode_function(input_bits)
            # s applies f_A before any communication: trip 1 carries g^1
            return ("end", q, f, 1, f[0], "", 0)  # tag, q, f, trips_done... see below
        if node == SINK:
            f = decode_function(input_bits)
            return ("end", q, f, 0, None, "", 0)
        return ("mid", q, None)  # forwarded chunk (payload, direction) or None

    # endpoint state: ("end", q, f, applied, outgoing_value, inbuf, next_chunk)
    #   outgoing_value set -> currently transmitting chunk next_chunk of it
    # middle state: ("mid", q, pending) with pending = (payload, to_index) or None

    def emit(node, state, tape, tau):
        if state[0] == "mid":
            pending = state[2]
            if pending is None:
                return []
            payload, to_q = pending
            return [(route[to_q], payload)]
        if state[0] == "end":
            _, q, f, applied, value, inbuf, nxt = state
            if value is None or nxt >= n_chunks:
                return []
            lo, hi = chunks[nxt]
            nbr = route[1] if q == 0 else route[dist - 1]
            return [(nbr, _encode(value, w)[lo:hi])]
        return []

    def receive(node, state, incoming, tape, tau):
        if state[0] == "idle":
            return state
        if state[0] == "mid":
            q = state[1]
            for msg in incoming:
                from_q = index.get(msg.sender)
                if from_q is None:
                    continue
                to_q = q + 1 if from_q == q - 1 else q - 1
                return ("mid", q, (msg.payload, to_q))
            return ("mid", q, None)
        _, q, f, applied, value, inbuf, nxt = state
        if value is not None:
            nxt += 1
            if nxt >= n_chunks:
                value, nxt = None, 0  # transmission finished
        for msg in incoming:
            if index.get(msg.sender) is not None:
                inbuf += msg.payload
        if len(inbuf) == w:
            received = _decode(inbuf)
            applied += 1
            new_value = f[received - 1]
            inbuf = ""
            if node == SINK and applied == r_:
                return ("end", q, f, applied, None, "done:" + _encode(new_value, w), 0)
            return ("end", q, f, applied, new_value, inbuf, 0)
        return ("end", q, f, applied, value, inbuf, nxt)

    def output(node, state):
        if node == SINK and state[0] == "end" and state[5].startswith("done:"):
            return state[5][len("done:"):]
        return None

    return NodeAlgorithm(
        name=f"pc-relay[m={inst.m},r={inst.r}]",
        init=init, emit=emit, receive=receive, output=output,
        output_nodes=frozenset({SINK}), rounds=total,
    )


def relay_inputs(inst: PcInstance) -> dict:
    """Engine input map: s gets f_A, t gets f_B, encoded pointer-wise."""
    w = pointer_width(inst.m)
    return {
        SOURCE: "".join(_encode(v, w) for v in inst.f_a),
        SINK: "".join(_encode(v, w) for v in inst.f_b),
    }
