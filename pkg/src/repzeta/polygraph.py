"""Combinatorial calculus on polygraphs and graphs: weight degenerations,
level splitting, edge colorings, forest checks, and the tree-to-edge
reduction with its symplectic dimension budget.

A polygraph is a triple (I, J, S) of vertex labels, output labels, and
incidences S subset-of I^(2) x J.  Triples are stored in frozensets so
equality is structural; deterministic orderings go through repr keys.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field


class NonUniqueMaxError(ValueError):
    """An edge's level-weight tuple had a tied maximum."""

    def __init__(self, edge):
        self.edge = edge
        super().__init__(f"tied maximal level weight on edge {sorted_label(edge)}")


class InvalidRootError(ValueError):
    pass


class PolygraphShapeError(ValueError):
    pass


def sorted_label(x):
    return sorted(x, key=repr)


@dataclass(frozen=True)
class Polygraph:
    I: frozenset
    J: frozenset
    S: frozenset  # of (frozenset{a, b}, j)

    def __post_init__(self):
        for pair, j in self.S:
            if len(pair) != 2 or not pair <= self.I:
                raise ValueError(f"bad vertex pair {set(pair)}")
            if j not in self.J:
                raise ValueError(f"output {j!r} not in J")

    @staticmethod
    def make(I, J, S):
        return Polygraph(frozenset(I), frozenset(J),
                         frozenset((frozenset(p), j) for p, j in S))

    def sorted_triples(self):
        return sorted(((tuple(sorted_label(p)), j) for p, j in self.S),
                      key=repr)

    def by_output(self):
        out = {}
        for pair, j in self.S:
            out.setdefault(j, set()).add(pair)
        return out


@dataclass(frozen=True)
class Graph:
    V: frozenset
    E: frozenset  # of frozenset{u, v}

    def __post_init__(self):
        for e in self.E:
            if len(e) != 2 or not e <= self.V:
                raise ValueError(f"bad edge {set(e)}")

    @staticmethod
    def make(V, E):
        return Graph(frozenset(V), frozenset(frozenset(e) for e in E))

    def degrees(self):
        deg = {v: 0 for v in self.V}
        for e in self.E:
            for v in e:
                deg[v] += 1
        return deg

    def adjacency(self):
        adj = {v: set() for v in self.V}
        for e in self.E:
            u, v = tuple(e)
            adj[u].add(v)
            adj[v].add(u)
        return adj


def attach(g: Graph) -> Polygraph:
    """The polygraph of a graph: outputs are the edges, S the diagonal."""
    return Polygraph(g.V, g.E, frozenset((e, e) for e in g.E))


def attached_graph(pg: Polygraph) -> Graph:
    """Inverse of attach up to output relabeling: each used output must
    carry exactly one pair and each pair must appear once."""
    pairs = [pair for pair, _ in pg.S]
    outputs = [j for _, j in pg.S]
    if len(set(pairs)) != len(pg.S) or len(set(outputs)) != len(pg.S):
        raise PolygraphShapeError("polygraph is not attached to a graph")
    return Graph(pg.I, frozenset(pairs))


def gr_w(pg: Polygraph, w: dict) -> Polygraph:
    """Keep, per output, the triples of maximal pair weight w(i) + w(i')."""
    weights = {}
    best = {}
    for pair, j in pg.S:
        a, b = tuple(pair)
        wt = w[a] + w[b]
        weights[(pair, j)] = wt
        cur = best.get(j)
        if cur is None or wt > cur:
            best[j] = wt
    keep = frozenset(t for t in pg.S if weights[t] == best[t[1]])
    return Polygraph(pg.I, pg.J, keep)


def level_split(pg: Polygraph, M) -> Polygraph:
    """Duplicate vertices and triples over the level set M; J unchanged."""
    M = list(M)
    I2 = frozenset((i, m) for i in pg.I for m in M)
    S2 = set()
    for pair, j in pg.S:
        a, b = tuple(pair)
        for m in M:
            S2.add((frozenset({(a, m), (b, m)}), j))
    return Polygraph(I2, pg.J, frozenset(S2))


def color_split(g: Graph, w: dict, M=None) -> list:
    """Partition edges by the unique argmax of the summed level weights.

    w maps each vertex to a tuple over the level set; returns one graph
    per level (vertex set unchanged).  A tied maximum raises.
    """
    if M is None:
        some = next(iter(w.values()))
        M = list(range(len(some)))
    buckets = {m: set() for m in M}
    for e in g.E:
        u, v = tuple(e)
        tot = tuple(a + b for a, b in zip(w[u], w[v]))
        mx = max(tot)
        winners = [i for i, t in enumerate(tot) if t == mx]
        if len(winners) != 1:
            raise NonUniqueMaxError(e)
        buckets[M[winners[0]]].add(e)
    return [Graph(g.V, frozenset(buckets[m])) for m in M]


@dataclass
class ForestReport:
    is_forest: bool
    max_degree: int


def forest_check(g: Graph) -> ForestReport:
    """Union-find cycle detection plus the exact maximal degree."""
    parent = {v: v for v in g.V}

    def find(x):
        root = x
        while parent[root] != root:
            root = parent[root]
        while parent[x] != root:
            parent[x], x = root, parent[x]
        return root

    is_forest = True
    for e in g.E:
        u, v = tuple(e)
        ru, rv = find(u), find(v)
        if ru == rv:
            is_forest = False
        else:
            parent[rv] = ru
    deg = g.degrees()
    return ForestReport(is_forest, max(deg.values(), default=0))


def connected_components(g: Graph) -> list:
    adj = g.adjacency()
    seen, comps = set(), []
    for v in sorted(g.V, key=repr):
        if v in seen:
            continue
        comp = {v}
        stack = [v]
        seen.add(v)
        while stack:
            x = stack.pop()
            for y in adj[x]:
                if y not in seen:
                    seen.add(y)
                    comp.add(y)
                    stack.append(y)
        comps.append(comp)
    return comps


def is_caterpillar(g: Graph, comp) -> bool:
    """A tree whose non-leaf vertices form a path (a 'comb')."""
    sub_edges = [e for e in g.E if e <= comp]
    deg = {v: 0 for v in comp}
    for e in sub_edges:
        for v in e:
            deg[v] += 1
    if len(sub_edges) != len(comp) - 1:
        return False
    spine = {v for v in comp if deg[v] >= 2}
    if not spine:
        return True
    spine_deg = {v: 0 for v in spine}
    for e in sub_edges:
        u, v = tuple(e)
        if u in spine and v in spine:
            spine_deg[u] += 1
            spine_deg[v] += 1
    ends = sum(1 for v in spine if spine_deg[v] <= 1)
    return all(d <= 2 for d in spine_deg.values()) and ends <= 2


# ---------------------------------------------------------------------------
# tree-to-edge reduction


@dataclass
class Star:
    root: object
    children: list


@dataclass
class ReductionCertificate:
    vertices: list
    edges: list
    root: object
    stage1_weights: dict          # vertex -> (w at parity 0, w at parity 1)
    stars_by_parity: list         # [list of Star, list of Star]
    stage2_weights: list          # per star: {vertex: unit tuple}
    final_edges: list
    isolated_vertices: list
    dim_budget: int
    max_degree: int

    def to_json(self):
        return json.dumps({
            "vertices": [repr(v) for v in self.vertices],
            "edges": [[repr(u) for u in sorted_label(e)] for e in self.edges],
            "root": repr(self.root),
            "dim_budget": self.dim_budget,
            "max_degree": self.max_degree,
            "final_edges": [[repr(u) for u in sorted_label(e)]
                            for e in self.final_edges],
        }, indent=1, sort_keys=True)


def _bfs_distances(g: Graph, v0):
    adj = g.adjacency()
    dist = {v0: 0}
    frontier = [v0]
    while frontier:
        nxt = []
        for x in frontier:
            for y in adj[x]:
                if y not in dist:
                    dist[y] = dist[x] + 1
                    nxt.append(y)
        frontier = nxt
    return dist


def tree_edge_reduction(T: Graph, v0) -> ReductionCertificate:
    """Two-stage degeneration of a tree to isolated edges.

    Stage 1 colors edges by the parity of their deeper endpoint (weights
    (1 + (-1)^(distance + parity)) * distance); each color class is a
    disjoint union of parent-plus-children stars.  Stage 2 splits every
    star with unit-vector weights into isolated edges.  The symplectic
    budget is twice the largest star per parity class, summed over the
    two classes, and never exceeds 4 * (max degree - 1) when the tree
    has two or more edges.
    """
    if v0 not in T.V:
        raise ValueError("root not a vertex")
    rep = forest_check(T)
    dist = _bfs_distances(T, v0)
    if not rep.is_forest or len(dist) != len(T.V) or \
            len(T.E) != len(T.V) - 1:
        raise ValueError("input graph is not a tree")
    deg = T.degrees()
    if len(T.E) >= 2 and deg[v0] >= rep.max_degree:
        raise InvalidRootError(
            f"root has maximal degree {deg[v0]}; pick a non-maximal vertex")

    w1 = {v: tuple((1 + (-1) ** (dist[v] + m)) * dist[v] for m in (0, 1))
          for v in T.V}
    if T.E:
        colored = color_split(T, w1, M=[0, 1])
    else:
        colored = [Graph(T.V, frozenset()), Graph(T.V, frozenset())]

    stars_by_parity = []
    for m, gm in enumerate(colored):
        stars = []
        # edges of color m have their deeper endpoint at parity m;
        # group them by the parent (the shallower endpoint)
        by_parent = {}
        for e in gm.E:
            u, v = tuple(e)
            parent, child = (u, v) if dist[u] < dist[v] else (v, u)
            if dist[child] % 2 != m:
                raise AssertionError("parity coloring is inconsistent")
            by_parent.setdefault(parent, []).append(child)
        for parent in sorted(by_parent, key=repr):
            stars.append(Star(parent, sorted(by_parent[parent], key=repr)))
        stars_by_parity.append(stars)

    stage2_weights = []
    final_edges = []
    for stars in stars_by_parity:
        for st in stars:
            mlev = len(st.children)
            wts = {st.root: (0,) * mlev}
            for ci, ch in enumerate(st.children):
                wts[ch] = tuple(1 if i == ci else 0 for i in range(mlev))
            stage2_weights.append(wts)
            star_graph = Graph.make({st.root, *st.children},
                                    [{st.root, c} for c in st.children])
            pieces = color_split(star_graph, wts)
            for piece in pieces:
                if len(piece.E) != 1:
                    raise AssertionError("star did not split into edges")
                final_edges.extend(piece.E)

    touched = set()
    for e in final_edges:
        touched |= e
    isolated = sorted((v for v in T.V if v not in touched), key=repr)

    budget = 0
    for stars in stars_by_parity:
        if stars:
            budget += 2 * max(len(st.children) for st in stars)
    if len(T.E) == 1 and budget != 2:
        raise AssertionError("single edge must have budget 2")
    if len(T.E) >= 2 and budget > 4 * (rep.max_degree - 1):
        raise AssertionError("dimension budget exceeds 4(max_degree - 1)")

    return ReductionCertificate(
        sorted(T.V, key=repr), sorted(T.E, key=repr), v0, w1,
        stars_by_parity, stage2_weights, sorted(final_edges, key=repr),
        isolated, budget, rep.max_degree)


def replay_certificate(cert: ReductionCertificate) -> bool:
    """Re-run both stages from the stored inputs and compare outcomes."""
    T = Graph.make(cert.vertices, cert.edges)
    if T.E:
        colored = color_split(T, cert.stage1_weights, M=[0, 1])
    else:
        colored = [Graph(T.V, frozenset()), Graph(T.V, frozenset())]
    for m, gm in enumerate(colored):
        want = set()
        for st in cert.stars_by_parity[m]:
            for c in st.children:
                want.add(frozenset({st.root, c}))
        if set(gm.E) != want:
            return False
    finals = set()
    for wts in cert.stage2_weights:
        verts = set(wts)
        root = next(v for v, t in wts.items() if not any(t))
        star_graph = Graph.make(verts, [{root, c} for c in verts - {root}])
        for piece in color_split(star_graph, wts):
            if len(piece.E) != 1:
                return False
            finals |= set(piece.E)
    if finals != set(cert.final_edges):
        return False
    touched = set()
    for e in finals:
        touched |= e
    return sorted((v for v in T.V if v not in touched),
                  key=repr) == cert.isolated_vertices


# ---------------------------------------------------------------------------
# DOT output

_PALETTE = ["red", "blue", "forestgreen", "orange", "purple", "brown",
            "cadetblue", "magenta"]


def dot_export(g: Graph, coloring: dict | None = None,
               name: str = "G") -> str:
    """Deterministic DOT text; colors become edge attributes."""
    lines = [f"graph {name} {{"]
    for v in sorted(g.V, key=repr):
        lines.append(f'  "{_dot_id(v)}";')
    for e in sorted(g.E, key=lambda e: repr(sorted_label(e))):
        u, v = sorted_label(e)
        attr = ""
        if coloring is not None and e in coloring:
            c = coloring[e]
            color = _PALETTE[c % len(_PALETTE)] if isinstance(c, int) else str(c)
            attr = f' [color={color}, label="{c}"]'
        lines.append(f'  "{_dot_id(u)}" -- "{_dot_id(v)}"{attr};')
    lines.append("}")
    return "\n".join(lines) + "\n"


def _dot_id(v):
    return repr(v).replace('"', "'")
