"""Constructors and validators for the lower-bound network families.

Two families share a skeleton of floor(kappa) highway paths, Gamma long
paths hung under the bottom highway, endpoint cliques, and terminals s/t:

* build_F: every subpath has Lambda nodes (the reference construction,
  kept for differential testing).
* build_G: subpath j has phi'_j nodes, where phi' caps the cumulative
  sizes at ceil(ceil(kappa) * Lambda**kappa) per side so each path carries
  Theta(kappa * Lambda**kappa) nodes while staying thin near the middle.

kappa is held as an exact Fraction and ceil(ceil(kappa) * Lambda**kappa)
is computed by integer root extraction, never floating point: an off-by-one
in that ceiling changes phi' and silently breaks the golden values.

All edges are unbounded-multiplicity except the along-highway edges, which
carry exactly one copy.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .errors import IndexOutOfRange, ParamViolation, StructuralViolation
from .multigraph import UNBOUNDED, MultiGraph
from .nodes import SINK, SOURCE, highway, is_highway, pathnode


def _as_fraction(x) -> Fraction:
    if isinstance(x, float):
        return Fraction(str(x))
    return Fraction(x)


def _iroot(n: int, k: int) -> int:
    """floor(n ** (1/k)) by exact integer search."""
    if n < 0:
        raise ValueError("negative radicand")
    if n == 0:
        return 0
    x = int(round(n ** (1.0 / k))) + 2
    while x ** k > n:
        x -= 1
    return x


def ceil_scaled_power(coeff: int, base: int, exp: Fraction) -> int:
    """Smallest integer >= coeff * base**exp, exactly."""
    a, b = exp.numerator, exp.denominator
    rhs = coeff ** b * base ** a
    r = _iroot(rhs, b)
    return r if r ** b == rhs else r + 1


def exceeds_scaled_power(value: int, coeff: Fraction, base: int, exp: Fraction) -> bool:
    """Exact test for value > coeff * base**exp with rational coeff and exp."""
    a, b = exp.numerator, exp.denominator
    lhs = (value * coeff.denominator) ** b
    rhs = coeff.numerator ** b * base ** a
    return lhs > rhs


def floor_scaled_power(coeff: int, base: int, exp: Fraction) -> int:
    """Largest integer <= coeff * base**exp, exactly."""
    a, b = exp.numerator, exp.denominator
    return _iroot(coeff ** b * base ** a, b)


@dataclass(frozen=True)
class FamilyParams:
    kappa: Fraction
    lam: int
    gamma: int

    def __post_init__(self):
        object.__setattr__(self, "kappa", _as_fraction(self.kappa))
        if self.kappa < 1:
            raise ParamViolation(f"kappa must be >= 1, got {self.kappa}")
        if not isinstance(self.lam, int) or self.lam < 2:
            raise ParamViolation(f"lambda must be an integer >= 2, got {self.lam}")
        if not isinstance(self.gamma, int) or self.gamma < 1:
            raise ParamViolation(f"gamma must be an integer >= 1, got {self.gamma}")

    @property
    def floor_kappa(self) -> int:
        return self.kappa.numerator // self.kappa.denominator

    @property
    def ceil_kappa(self) -> int:
        return -((-self.kappa.numerator) // self.kappa.denominator)

    @property
    def max_sub(self) -> int:
        """Largest highway subscript: ceil(kappa) * lam**floor(kappa)."""
        return self.ceil_kappa * self.lam ** self.floor_kappa

    @property
    def side_cap(self) -> int:
        """ceil(ceil(kappa) * lam**kappa), the per-side path-size budget."""
        return ceil_scaled_power(self.ceil_kappa, self.lam, self.kappa)


def phi(j: int, params: FamilyParams) -> int:
    """Number of bottom-scale positions H^1 spans between 0 and j."""
    if abs(j) > params.max_sub:
        raise IndexOutOfRange(f"|{j}| > {params.max_sub}")
    return abs(j) // params.lam ** (params.floor_kappa - 1) + 1


@lru_cache(maxsize=None)
def _phi_prime_table(params: FamilyParams) -> tuple:
    """phi'_j for j = 0..max_sub; symmetric in the sign of j."""
    cap = params.side_cap
    out = [0] * (params.max_sub + 1)
    suffix = 0
    for j in range(params.max_sub, -1, -1):
        out[j] = min(phi(j, params), max(1, cap - suffix))
        suffix += phi(j, params)
    return tuple(out)


def phi_prime(j: int, params: FamilyParams) -> int:
    if abs(j) > params.max_sub:
        raise IndexOutOfRange(f"|{j}| > {params.max_sub}")
    return _phi_prime_table(params)[abs(j)]


def per_path_length(params: FamilyParams) -> int:
    table = _phi_prime_table(params)
    return 2 * sum(table[1:]) + table[0]


def path_nodes(params: FamilyParams, p: int, sizes=None) -> list:
    """Nodes of path p in left-to-right order (source side to sink side).

    Positions count outward from subscript 0: within negative subpaths the
    first position is the rightmost node, within positive subpaths the
    leftmost, so left-to-right order reverses the negative side.
    """
    size = sizes if sizes is not None else (lambda j: phi_prime(j, params))
    out = []
    for j in range(-params.max_sub, 0):
        out.extend(pathnode(p, j, x) for x in range(size(j), 0, -1))
    for j in range(0, params.max_sub + 1):
        out.extend(pathnode(p, j, x) for x in range(1, size(j) + 1))
    return out


def _build_skeleton(params: FamilyParams, sizes) -> MultiGraph:
    g = MultiGraph()
    fk, lam, R0 = params.floor_kappa, params.lam, params.max_sub

    # highways: level i has nodes every lam**(fk-i) subscripts; only these
    # along-highway edges carry a single copy
    for i in range(1, fk + 1):
        step = lam ** (fk - i)
        subs = list(range(-R0, R0 + 1, step))
        for a, b in zip(subs, subs[1:]):
            g.add_edge(highway(i, a), highway(i, b), 1)

    # edges between vertically adjacent highway nodes of equal subscript
    for i in range(1, fk):
        step = lam ** (fk - i)
        for sub in range(-R0, R0 + 1, step):
            g.add_edge(highway(i, sub), highway(i + 1, sub), UNBOUNDED)

    # paths, stitched subpath to subpath in left-to-right order
    for p in range(1, params.gamma + 1):
        chain = path_nodes(params, p, sizes)
        for a, b in zip(chain, chain[1:]):
            g.add_edge(a, b, UNBOUNDED)
        # every subpath hangs off the bottom highway at its first position
        for j in range(-R0, R0 + 1):
            g.add_edge(highway(fk, j), pathnode(p, j, 1), UNBOUNDED)
        g.add_edge(SOURCE, chain[0], UNBOUNDED)
        g.add_edge(SINK, chain[-1], UNBOUNDED)

    # endpoint cliques across paths
    for p in range(1, params.gamma + 1):
        for q in range(p + 1, params.gamma + 1):
            g.add_edge(pathnode(p, -R0, sizes(-R0)), pathnode(q, -R0, sizes(-R0)), UNBOUNDED)
            g.add_edge(pathnode(p, R0, sizes(R0)), pathnode(q, R0, sizes(R0)), UNBOUNDED)
    return g


def build_G(params: FamilyParams) -> MultiGraph:
    return _build_skeleton(params, lambda j: phi_prime(j, params))


def build_F(params: FamilyParams) -> MultiGraph:
    # reference family: every subpath has exactly lam nodes
    return _build_skeleton(params, lambda j: params.lam)


def left_end(params: FamilyParams, p: int):
    return pathnode(p, -params.max_sub, phi_prime(params.max_sub, params))


def right_end(params: FamilyParams, p: int):
    return pathnode(p, params.max_sub, phi_prime(params.max_sub, params))


def closed_form_node_count(params: FamilyParams) -> int:
    hw = sum(2 * params.ceil_kappa * params.lam ** i + 1
             for i in range(1, params.floor_kappa + 1))
    return 2 + hw + params.gamma * per_path_length(params)


# -- (i, j)-sets -----------------------------------------------------------


def normalize_set_index(i: int, j: int, params: FamilyParams):
    """Resolve the j=0 and |i|=max_sub+1 boundary conventions."""
    R0 = params.max_sub
    if abs(i) > R0 + 1:
        raise IndexOutOfRange(f"|{i}| > {R0 + 1}")
    if abs(i) == R0 + 1:
        return (R0 if i > 0 else -R0), phi_prime(R0, params)
    if j == 0:
        if i == 0:
            raise IndexOutOfRange("set index (0, 0) is undefined")
        if i > 0:
            return normalize_set_index(i - 1, phi_prime(i - 1, params), params)
        if i == -1:
            raise IndexOutOfRange("negative-side set index below (-1, 1) is undefined")
        return normalize_set_index(i + 1, phi_prime(i + 1, params), params)
    if not 1 <= j <= phi_prime(i, params):
        raise IndexOutOfRange(f"j={j} outside 1..phi'_{i}={phi_prime(i, params)}")
    return i, j


def s_set(i: int, j: int, params: FamilyParams) -> frozenset:
    """The (i, j)-set: the prefix of the network one party can track.

    For i >= 0 it contains s, every highway node with subscript <= i, and
    every path node at (i', j') lexicographically <= (i, j); for i < 0 the
    mirror image around 0 with t.
    """
    i, j = normalize_set_index(i, j, params)
    R0, fk, lam = params.max_sub, params.floor_kappa, params.lam
    out = []
    if i >= 0:
        out.append(SOURCE)
        for k in range(1, fk + 1):
            step = lam ** (fk - k)
            out.extend(highway(k, sub) for sub in range(-R0, R0 + 1, step) if sub <= i)
        for p in range(1, params.gamma + 1):
            for jj in range(-R0, R0 + 1):
                if jj < i:
                    out.extend(pathnode(p, jj, x) for x in range(1, phi_prime(jj, params) + 1))
                elif jj == i:
                    out.extend(pathnode(p, jj, x) for x in range(1, j + 1))
    else:
        out.append(SINK)
        for k in range(1, fk + 1):
            step = lam ** (fk - k)
            out.extend(highway(k, sub) for sub in range(-R0, R0 + 1, step) if sub >= i)
        for p in range(1, params.gamma + 1):
            for jj in range(-R0, R0 + 1):
                if jj > i:
                    out.extend(pathnode(p, jj, x) for x in range(1, phi_prime(jj, params) + 1))
                elif jj == i:
                    out.extend(pathnode(p, jj, x) for x in range(1, j + 1))
    return frozenset(out)


# -- structural validation -------------------------------------------------


@dataclass
class StructureReport:
    node_count: int
    closed_form_count: int
    per_path_length: int
    diameter: int
    st_distance: int
    length_bounds: tuple
    diameter_bounds: tuple

    def to_json_obj(self) -> dict:
        return {
            "node_count": self.node_count,
            "closed_form_count": self.closed_form_count,
            "per_path_length": self.per_path_length,
            "diameter": self.diameter,
            "st_distance": self.st_distance,
            "length_bounds": list(self.length_bounds),
            "diameter_bounds": [str(b) for b in self.diameter_bounds],
        }


def validate_structure(graph: MultiGraph, params: FamilyParams,
                       diameter_factor: int = 8) -> StructureReport:
    """Check node count, per-path length, and diameter against their bounds.

    Raises StructuralViolation naming the offending quantity; otherwise
    returns the measured report.
    """
    n = graph.node_count()
    expected = closed_form_node_count(params)
    if n != expected:
        raise StructuralViolation("node_count", n, expected)

    for u, v, m in graph.edges():
        on_highway = is_highway(u) and is_highway(v) and u[1] == v[1]
        if on_highway and m != 1:
            raise StructuralViolation("highway_multiplicity", (u, v, m), 1)
        if not on_highway and m is not UNBOUNDED:
            raise StructuralViolation("edge_multiplicity", (u, v, m), "unbounded")

    lengths = {p: sum(1 for u in graph.nodes if u[0] == "p" and u[1] == p)
               for p in range(1, params.gamma + 1)}
    if len(set(lengths.values())) != 1:
        raise StructuralViolation("per_path_length", lengths, "all equal")
    L = lengths[1]
    if L != per_path_length(params):
        raise StructuralViolation("per_path_length", L, per_path_length(params))

    ck, fk, lam, kap = params.ceil_kappa, params.floor_kappa, params.lam, params.kappa
    # integer L >= ceil(k)*lam^k iff L >= its ceiling; the upper bound gets
    # the mirrored floor treatment
    length_lo = params.side_cap
    length_hi = floor_scaled_power(2 * ck, lam, kap) + 2 * ck * lam ** fk + 2
    if L < length_lo:
        raise StructuralViolation("per_path_length", L, f">= {length_lo}")
    if L > length_hi:
        raise StructuralViolation("per_path_length", L, f"<= {length_hi}")

    dist_s = graph.bfs_distances(SOURCE)
    if len(dist_s) != n:
        raise StructuralViolation("connectivity", len(dist_s), n)
    st = dist_s[SINK]
    diam = graph.diameter()
    lo = (kap * lam).numerator // (kap * lam).denominator  # floor(kappa*lam)
    hi = diameter_factor * kap * lam
    if diam < lo:
        raise StructuralViolation("diameter", diam, f">= {lo}")
    if Fraction(diam) > hi:
        raise StructuralViolation("diameter", diam, f"<= {hi}")
    if st < lo:
        raise StructuralViolation("st_distance", st, f">= {lo}")

    return StructureReport(
        node_count=n, closed_form_count=expected, per_path_length=L,
        diameter=diam, st_distance=st,
        length_bounds=(length_lo, length_hi),
        diameter_bounds=(lo, hi),
    )
