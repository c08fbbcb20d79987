"""Node-labeled multigraph with exact (possibly unbounded) edge multiplicities.

Edge classes: at most one per unordered node pair, carrying either an exact
positive integer multiplicity or the distinguished value UNBOUNDED.
Multiplicities are never materialized as physical copies; they reach
(6*Gamma*ell)**ell in the random-walk gadget and only exist as big integers.
"""

from __future__ import annotations

import json
from collections import deque
from typing import Iterable, Iterator

from .nodes import format_label, parse_label


class _Unbounded:
    """Singleton for edges with infinitely many copies."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "unbounded"


UNBOUNDED = _Unbounded()


class MultiGraph:
    """Undirected multigraph; one edge class per unordered node pair."""

    def __init__(self):
        self._adj: dict = {}

    # -- construction -------------------------------------------------

    def add_node(self, u) -> None:
        if u not in self._adj:
            self._adj[u] = {}

    def add_edge(self, u, v, multiplicity=UNBOUNDED) -> None:
        if u == v:
            raise ValueError(f"self-loop at {u!r} not allowed")
        self._check_mult(multiplicity)
        self.add_node(u)
        self.add_node(v)
        if v in self._adj[u]:
            raise ValueError(f"edge class ({u!r}, {v!r}) already exists")
        self._adj[u][v] = multiplicity
        self._adj[v][u] = multiplicity

    def set_multiplicity(self, u, v, multiplicity) -> None:
        if v not in self._adj.get(u, {}):
            raise KeyError(f"no edge class ({u!r}, {v!r})")
        self._check_mult(multiplicity)
        self._adj[u][v] = multiplicity
        self._adj[v][u] = multiplicity

    @staticmethod
    def _check_mult(m) -> None:
        if m is UNBOUNDED:
            return
        if not isinstance(m, int) or m < 1:
            raise ValueError(f"multiplicity must be a positive int or UNBOUNDED, got {m!r}")

    # -- queries ------------------------------------------------------

    @property
    def nodes(self) -> Iterable:
        return self._adj.keys()

    def node_count(self) -> int:
        return len(self._adj)

    def has_node(self, u) -> bool:
        return u in self._adj

    def has_edge(self, u, v) -> bool:
        return v in self._adj.get(u, {})

    def multiplicity(self, u, v):
        return self._adj[u][v]

    def neighbors(self, u) -> Iterable:
        return self._adj[u].keys()

    def incident(self, u) -> Iterator[tuple]:
        """Yield (neighbor, multiplicity) pairs."""
        return iter(self._adj[u].items())

    def degree_classes(self, u) -> int:
        return len(self._adj[u])

    def edges(self) -> Iterator[tuple]:
        """Yield (u, v, multiplicity) once per edge class, u < v."""
        for u, nbrs in self._adj.items():
            for v, m in nbrs.items():
                if u < v:
                    yield u, v, m

    def edge_class_count(self) -> int:
        return sum(1 for _ in self.edges())

    # -- traversal ----------------------------------------------------

    def bfs_distances(self, src) -> dict:
        dist = {src: 0}
        queue = deque([src])
        while queue:
            u = queue.popleft()
            du = dist[u]
            for v in self._adj[u]:
                if v not in dist:
                    dist[v] = du + 1
                    queue.append(v)
        return dist

    def is_connected(self) -> bool:
        if not self._adj:
            return True
        src = next(iter(self._adj))
        return len(self.bfs_distances(src)) == len(self._adj)

    def shortest_path(self, src, dst) -> list:
        """One shortest path src..dst, deterministic (sorted tie-break)."""
        parent = {src: None}
        queue = deque([src])
        while queue:
            u = queue.popleft()
            if u == dst:
                break
            for v in sorted(self._adj[u]):
                if v not in parent:
                    parent[v] = u
                    queue.append(v)
        if dst not in parent:
            raise ValueError(f"{dst!r} unreachable from {src!r}")
        path = [dst]
        while parent[path[-1]] is not None:
            path.append(parent[path[-1]])
        path.reverse()
        return path

    def diameter(self) -> int:
        best = 0
        for u in self._adj:
            ecc = max(self.bfs_distances(u).values())
            if ecc > best:
                best = ecc
        return best

    # -- serialization ------------------------------------------------

    def to_json_obj(self, exponent_hints: dict | None = None) -> dict:
        """JSON form: labels plus decimal-string or {base, exponent} multiplicities.

        exponent_hints maps a frozenset edge pair to (base, exponent); hinted
        edges are emitted in record form instead of a decimal string.
        """
        hints = exponent_hints or {}
        edges = []
        for u, v, m in self.edges():
            if m is UNBOUNDED:
                enc = "unbounded"
            else:
                hint = hints.get(frozenset((u, v)))
                if hint is not None:
                    enc = {"base": hint[0], "exponent": hint[1]}
                else:
                    enc = str(m)
            edges.append({"u": format_label(u), "v": format_label(v), "multiplicity": enc})
        return {"nodes": [format_label(u) for u in self._adj], "edges": edges}

    @classmethod
    def from_json_obj(cls, obj: dict) -> "MultiGraph":
        g = cls()
        for label in obj["nodes"]:
            g.add_node(parse_label(label))
        for rec in obj["edges"]:
            enc = rec["multiplicity"]
            if enc == "unbounded":
                m = UNBOUNDED
            elif isinstance(enc, dict):
                m = rec["multiplicity"]["base"] ** rec["multiplicity"]["exponent"]
            else:
                m = int(enc)
            g.add_edge(parse_label(rec["u"]), parse_label(rec["v"]), m)
        return g

    def dump_json(self, fp, **kwargs) -> None:
        json.dump(self.to_json_obj(**kwargs), fp, indent=2)

    @classmethod
    def load_json(cls, fp) -> "MultiGraph":
        return cls.from_json_obj(json.load(fp))
