"""Input-dependent random-walk gadget: a restriction of the lower-bound
network whose edge multiplicities force a walk to trace the pointer chase.

Path p = 2(i-1)m + j plays the left-to-right stage S^{i,j}; path
2(i-1)m + m + j plays the right-to-left stage T^{i,j}. Chain edges carry
W**k copies with W = 6*Gamma*ell and k running 1..ell consecutively along
the intended trajectory P*; the two input-dependent connector families sit
in the endpoint cliques (so either terminal can announce them in one round):

* near t: (s^{i,j}_L, t^{i,f_B(j)}_1) at exponent 2(i-1)L + L
* near s: (t^{i,j}_L, s^{i+1,f_A(j)}_1) at exponent 2iL

This is the unique connector assignment under which the exponents along the
intended trajectory run 1..ell consecutively; an alternative wiring (same-
stage near-s connectors, cross-stage near-t connectors) stays available
behind a flag for comparison, but its exponent chain cannot be consecutive.

All probability analysis is exact: multiplicities are big integers and
transition ratios are Fractions.
"""

from __future__ import annotations

import hashlib
import os
import random
from bisect import bisect_left
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .errors import BudgetExceeded, ParamViolation
from .family import FamilyParams, build_G, path_nodes, per_path_length
from .multigraph import UNBOUNDED, MultiGraph
from .pointer_chasing import PcInstance, g, pc

DEFAULT_DP_BUDGET = 2_000_000


def dp_budget() -> int:
    raw = os.environ.get("XPLAB_DP_BUDGET")
    return int(raw) if raw else DEFAULT_DP_BUDGET


@dataclass(frozen=True)
class GadgetParams:
    family: FamilyParams
    r: int
    m: int

    def __post_init__(self):
        if self.r < 1 or self.m < 1:
            raise ParamViolation("r and m must be >= 1")
        if 2 * self.r * self.m > self.family.gamma:
            raise ParamViolation(
                f"need 2rm <= Gamma: 2*{self.r}*{self.m} > {self.family.gamma}")

    @property
    def L(self) -> int:
        return per_path_length(self.family)

    @property
    def ell(self) -> int:
        return 2 * self.r * self.L - 1

    @property
    def W(self) -> int:
        return 6 * self.family.gamma * self.ell


class GadgetGraph:
    """Finite-multiplicity restriction of the family graph plus the stage
    relabeling maps."""

    def __init__(self, params: GadgetParams, graph: MultiGraph,
                 s_nodes: dict, t_nodes: dict, chain_exponents: dict):
        self.params = params
        self.graph = graph
        self.s_nodes = s_nodes  # (i, j, x) -> node, numbered left to right
        self.t_nodes = t_nodes  # (i, j, x) -> node, numbered right to left
        self.chain_exponents = chain_exponents  # frozenset({u, v}) -> exponent
        self._walk_index: dict = {}

    def start_node(self, inst: PcInstance):
        return self.s_nodes[(1, inst.apply_a(1), 1)]

    def terminal_node(self, value: int):
        return self.t_nodes[(self.params.r, value, self.params.L)]

    def terminal_value(self, node) -> Optional[int]:
        for j in range(1, self.params.m + 1):
            if node == self.terminal_node(j):
                return j
        return None

    def degree(self, u) -> int:
        return sum(mult for _, mult in self.graph.incident(u))

    def walk_row(self, u) -> tuple:
        """(neighbors, cumulative multiplicities, total) with a stable order."""
        row = self._walk_index.get(u)
        if row is None:
            items = sorted(self.graph.incident(u))
            cum, total = [], 0
            for _, mult in items:
                total += mult
                cum.append(total)
            row = ([v for v, _ in items], cum, total)
            self._walk_index[u] = row
        return row

    def to_json_obj(self) -> dict:
        """MultiGraph JSON with the power-weighted edges emitted as
        {base, exponent} records instead of enormous decimal strings."""
        hints = {pair: (self.params.W, k) for pair, k in self.chain_exponents.items()}
        return self.graph.to_json_obj(exponent_hints=hints)


def build_gadget(gparams: GadgetParams, inst: PcInstance,
                 alt_connectors: bool = False) -> GadgetGraph:
    """Restrict the family graph to finite multiplicities realizing the
    pointer-chasing walk for (f_A, f_B).

    alt_connectors selects the alternative wiring kept for comparison; only
    the default produces a consecutive exponent chain along the trajectory.
    """
    if inst.m != gparams.m or inst.r != gparams.r:
        raise ParamViolation("instance (m, r) must match gadget parameters")
    fam = gparams.family
    base = build_G(fam)
    L, W, r, m = gparams.L, gparams.W, gparams.r, gparams.m

    h = MultiGraph()
    for u in base.nodes:
        h.add_node(u)
    for u, v, mult in base.edges():
        h.add_edge(u, v, 1)

    # stage relabeling: S^{i,j} runs left to right, T^{i,j} right to left
    s_nodes, t_nodes = {}, {}
    for i in range(1, r + 1):
        for j in range(1, m + 1):
            chain = path_nodes(fam, 2 * (i - 1) * m + j)
            for x, node in enumerate(chain, start=1):
                s_nodes[(i, j, x)] = node
            chain = path_nodes(fam, 2 * (i - 1) * m + m + j)
            for x, node in enumerate(reversed(chain), start=1):
                t_nodes[(i, j, x)] = node

    exponents: dict = {}

    def set_power(u, v, k):
        if not base.has_edge(u, v):
            raise ParamViolation(f"gadget edge ({u!r}, {v!r}) does not exist in G")
        if base.multiplicity(u, v) is not UNBOUNDED:
            raise ParamViolation(f"gadget would re-weight finite edge ({u!r}, {v!r})")
        h.set_multiplicity(u, v, W ** k)
        exponents[frozenset((u, v))] = k

    for i in range(1, r + 1):
        off = 2 * (i - 1) * L
        for j in range(1, m + 1):
            for x in range(1, L):
                set_power(s_nodes[(i, j, x)], s_nodes[(i, j, x + 1)], off + x)
                set_power(t_nodes[(i, j, x)], t_nodes[(i, j, x + 1)], off + L + x)
        if alt_connectors:
            for j in range(1, m + 1):
                set_power(t_nodes[(i, j, L)], s_nodes[(i, inst.apply_a(j), 1)], off + L)
                if i < r:
                    set_power(t_nodes[(i, j, 1)], s_nodes[(i + 1, inst.apply_b(j), L)], off + 2 * L)
        else:
            for j in range(1, m + 1):
                set_power(s_nodes[(i, j, L)], t_nodes[(i, inst.apply_b(j), 1)], off + L)
                if i < r:
                    set_power(t_nodes[(i, j, L)], s_nodes[(i + 1, inst.apply_a(j), 1)], off + 2 * L)

    return GadgetGraph(gparams, h, s_nodes, t_nodes, exponents)


def expected_path(gadget: GadgetGraph, inst: PcInstance) -> list:
    """The intended trajectory: stage labels follow the alternating chase."""
    r, L = gadget.params.r, gadget.params.L
    out = []
    for i in range(1, r + 1):
        a = g(2 * i - 1, inst)
        out.extend(gadget.s_nodes[(i, a, x)] for x in range(1, L + 1))
        b = g(2 * i, inst)
        out.extend(gadget.t_nodes[(i, b, x)] for x in range(1, L + 1))
    return out


def _as_graph(gadget_or_graph) -> MultiGraph:
    return gadget_or_graph.graph if isinstance(gadget_or_graph, GadgetGraph) else gadget_or_graph


def exact_follow_probability(gadget, path: list) -> tuple:
    """(product, minimum) over path steps of mult(u, next) / degree(u),
    in exact rationals."""
    graph = _as_graph(gadget)
    prob = Fraction(1)
    min_step = Fraction(1)
    for u, nxt in zip(path, path[1:]):
        deg = sum(mult for _, mult in graph.incident(u))
        step = Fraction(graph.multiplicity(u, nxt), deg)
        prob *= step
        if step < min_step:
            min_step = step
    return prob, min_step


def exact_destination_distribution(gadget, start, steps: int,
                                   budget: Optional[int] = None) -> dict:
    """Exact distribution of the walk position after `steps` steps, by
    iterating the transition operator with big-rational arithmetic."""
    graph = _as_graph(gadget)
    limit = budget if budget is not None else dp_budget()
    size = graph.node_count() * steps
    if size > limit:
        raise BudgetExceeded(f"DP size {size} exceeds budget {limit}")
    dist = {start: Fraction(1)}
    for _ in range(steps):
        nxt: dict = {}
        for u, p in dist.items():
            deg = sum(mult for _, mult in graph.incident(u))
            for v, mult in graph.incident(u):
                q = p * Fraction(mult, deg)
                if v in nxt:
                    nxt[v] += q
                else:
                    nxt[v] = q
        dist = nxt
    assert sum(dist.values()) == 1
    return dist


def sample_walk(gadget: GadgetGraph, start, steps: int, seed: int):
    """Destination of one walk; each step draws a neighbor with probability
    multiplicity/degree using exact integer arithmetic on the seeded stream."""
    rng = random.Random(seed)
    u = start
    for _ in range(steps):
        nbrs, cum, total = gadget.walk_row(u)
        x = rng.randrange(total)
        u = nbrs[bisect_left(cum, x + 1)]
    return u


def trial_seed(seed: int, index: int) -> int:
    digest = hashlib.sha256(f"{seed}:{index}".encode()).digest()
    return int.from_bytes(digest[:8], "big")


@dataclass
class ReductionReport:
    gparams: GadgetParams
    inst: PcInstance
    pc_value: int
    start: object
    terminal: object
    follow_probability: Fraction
    min_step_probability: Fraction
    exact_destination_mass: Optional[Fraction]
    trials: int
    successes: int
    output_counts: dict

    @property
    def success_rate(self) -> Optional[float]:
        return self.successes / self.trials if self.trials else None

    @property
    def modal_output(self) -> Optional[int]:
        if not self.output_counts:
            return None
        return max(sorted(self.output_counts), key=lambda k: self.output_counts[k])

    def to_json_obj(self) -> dict:
        fam = self.gparams.family
        return {
            "kappa": str(fam.kappa), "lambda": fam.lam, "gamma": fam.gamma,
            "r": self.gparams.r, "m": self.gparams.m,
            "L": self.gparams.L, "ell": self.gparams.ell, "W": self.gparams.W,
            "pc": self.pc_value,
            "exact_prob": str(self.follow_probability),
            "exact_prob_float": float(self.follow_probability),
            "min_step_prob": str(self.min_step_probability),
            "exact_destination_mass": (None if self.exact_destination_mass is None
                                       else str(self.exact_destination_mass)),
            "trials": self.trials, "successes": self.successes,
            "success_rate": self.success_rate,
            "modal_output": self.modal_output,
            "output_counts": {str(k): v for k, v in sorted(self.output_counts.items())},
        }

    def summary_row(self) -> dict:
        fam = self.gparams.family
        return {
            "kappa": str(fam.kappa), "lambda": fam.lam, "gamma": fam.gamma,
            "r": self.gparams.r, "m": self.gparams.m,
            "L": self.gparams.L, "ell": self.gparams.ell,
            "exact_prob": str(self.follow_probability),
            "trials": self.trials, "successes": self.successes,
        }


def reduction_run(gparams: GadgetParams, inst: PcInstance, trials: int,
                  seed: int, dp: bool = True) -> ReductionReport:
    """Pointer chasing via random walks: walk ell steps from the stage-1
    entry; a terminal-stage endpoint names the output, anything else falls
    back to 1 (the documented arbitrary answer)."""
    gadget = build_gadget(gparams, inst)
    answer = pc(inst)
    path = expected_path(gadget, inst)
    start, terminal = path[0], path[-1]
    assert start == gadget.start_node(inst)
    assert terminal == gadget.terminal_node(answer)
    prob, min_step = exact_follow_probability(gadget, path)

    mass = None
    if dp:
        try:
            dist = exact_destination_distribution(gadget, start, gparams.ell)
            mass = dist.get(terminal, Fraction(0))
        except BudgetExceeded:
            mass = None

    successes = 0
    counts: dict = {}
    for k in range(trials):
        dest = sample_walk(gadget, start, gparams.ell, trial_seed(seed, k))
        value = gadget.terminal_value(dest)
        out = value if value is not None else 1
        counts[out] = counts.get(out, 0) + 1
        if out == answer:
            successes += 1
    return ReductionReport(
        gparams=gparams, inst=inst, pc_value=answer, start=start,
        terminal=terminal, follow_probability=prob,
        min_step_probability=min_step, exact_destination_mass=mass,
        trials=trials, successes=successes, output_counts=counts)
