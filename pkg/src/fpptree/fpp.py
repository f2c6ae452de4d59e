"""Single-source shortest-path trees and their degrees."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .graphs import CompleteGraph, WeightedMultiGraph
from .stochastic import as_generator


@dataclass(eq=False)
class ShortestPathTree:
    """Parent pointers and distances from ``source``.

    Unreached vertices have ``parent == -1``, ``dist == inf``, ``hops == -1``
    and tree degree 0. ``order`` lists reached vertices in extraction order.
    """

    source: int
    parent_edge: np.ndarray
    parent: np.ndarray
    dist: np.ndarray
    hops: np.ndarray
    order: np.ndarray

    def __post_init__(self):
        self.tree_degree = _kernels.tree_degrees(self.parent, self.n)

    @property
    def n(self) -> int:
        return int(self.parent.size)

    @property
    def reached(self) -> int:
        return int(self.order.size)

    @property
    def reached_mask(self) -> np.ndarray:
        return self.hops >= 0

    def tree_edges(self) -> np.ndarray:
        return self.parent_edge[self.parent_edge >= 0]

    def write(self, path) -> None:
        """Text table ``v parent dist hops tree_degree``."""
        with open(path, "w") as fh:
            fh.write(f"# source={self.source} n={self.n} reached={self.reached}\n")
            fh.write("# v parent dist hops tree_degree\n")
            np.savetxt(
                fh,
                np.column_stack([np.arange(self.n), self.parent, self.dist, self.hops, self.tree_degree]),
                fmt="%d %d %.17g %d %d",
            )


def _check_source(graph, source):
    if not 0 <= source < graph.n:
        raise ValueError(f"source {source} outside 0..{graph.n - 1}")


def shortest_path_tree(graph, source: int) -> ShortestPathTree:
    """Dijkstra from ``source``; dense array scan on a complete graph, binary
    heap with lazy deletion otherwise."""
    _check_source(graph, source)
    if isinstance(graph, CompleteGraph):
        sq = graph.square()
        if sq is not None:
            dist, par_v, hops, order = _kernels.dijkstra_square(sq, source)
        else:
            dist, par_v, hops, order = _kernels.dijkstra_dense(graph.w, graph._base, graph.n, source)
        par_e = np.where(par_v >= 0, graph.edge_id(np.maximum(par_v, 0), np.arange(graph.n)), -1)
        return ShortestPathTree(source, par_e, par_v, dist, hops, order)
    if not graph.weighted:
        raise ValueError("graph has no weights; call attach_weights first")
    offsets, nbrs, eids = graph.csr()
    dist, par_e, par_v, hops, order = _kernels.dijkstra_csr(offsets, nbrs, eids, graph.w, source, -1)
    return ShortestPathTree(source, par_e, par_v, dist, hops, order)


def bfst(graph: WeightedMultiGraph, source: int, rng, tie_break: str = "path") -> ShortestPathTree:
    """Breadth-first search tree with random tie-breaking; weights are ignored.

    ``tie_break="path"`` (default): the limit of weights ``1 + eps * U_e`` as
    eps -> 0, i.e. among shortest-hop paths the one with the smallest key sum
    wins. ``tie_break="edge"``: every vertex picks its parent uniformly among
    the edges reaching it from the previous level (a different, slightly
    biased tree law on graphs with many ties).
    """
    _check_source(graph, source)
    if isinstance(graph, CompleteGraph):
        graph = graph.to_multigraph()
    gen = as_generator(rng)
    offsets, nbrs, eids = graph.csr()
    keys = gen.random(graph.num_edges)
    if tie_break == "edge":
        par_e, par_v, hops, order = _kernels.bfs_random_parent(offsets, nbrs, eids, keys, source)
        dist = np.where(hops >= 0, hops, np.inf).astype(float)
    elif tie_break == "path":
        w = 1.0 + keys / (graph.n + 1.0)
        _, par_e, par_v, hops, order = _kernels.dijkstra_csr(offsets, nbrs, eids, w, source, -1)
        dist = np.where(hops >= 0, hops, np.inf).astype(float)
    else:
        raise ValueError(f"unknown tie_break {tie_break!r}")
    return ShortestPathTree(source, par_e, par_v, dist, hops, order)


def tree_degree_of(spt: ShortestPathTree, v: int) -> int:
    return int(spt.tree_degree[v])


def empirical_tree_degrees(spt: ShortestPathTree, reached_only: bool = False):
    """Degree distribution of the tree over all ``n`` vertices (unreached ones
    count as degree 0), or over reached vertices only."""
    from .analysis import DegreeDistribution

    deg = spt.tree_degree[spt.reached_mask] if reached_only else spt.tree_degree
    return DegreeDistribution.from_samples(deg)


def mean_tree_degree(spt: ShortestPathTree) -> float:
    """Exactly ``2 (reached - 1) / n``."""
    return 2.0 * (spt.reached - 1) / spt.n


def _excised_distances(graph, source, target):
    if isinstance(graph, CompleteGraph):
        graph = graph.to_multigraph()
    offsets, nbrs, eids = graph.csr()
    dist, *_ = _kernels.dijkstra_csr(offsets, nbrs, eids, graph.w, source, target)
    return graph, dist


def degree_via_excision(graph, source: int, target: int, rule: str = "exact") -> int:
    """Tree degree of ``target`` computed from distances in the graph with
    ``target`` removed.

    With ``C'(v)`` the excised distance to a neighbour ``v`` and ``Y_v`` the
    lightest ``target``-``v`` edge, ``C(target) = min_v C'(v) + Y_v`` is
    attained at the parent ``U``. ``rule="display"`` counts
    ``1 + #{v: C(target) + Y_v < C'(v)}``: every neighbour whose shortest
    path passes through ``target``. That overcounts a neighbour reached as
    ``target -> w -> ... -> v`` rather than over its own edge, which needs a
    short cycle through ``target`` and vanishes on locally tree-like graphs.
    ``rule="exact"`` (default) compares ``C(target) + Y_v`` with the best
    path that may re-enter through the other ``target`` edges, found by a
    seeded search on the excised graph.

    Self-loops are ignored. A neighbour cut off by the excision has
    ``C'(v) = inf``. Returns 0 when ``target`` is unreachable.
    """
    _check_source(graph, source)
    _check_source(graph, target)
    if source == target:
        raise ValueError("target must differ from source")
    if rule not in ("exact", "display"):
        raise ValueError(f"unknown rule {rule!r}")
    graph, cdist = _excised_distances(graph, source, target)
    offsets, nbrs, eids = graph.csr()
    sl = slice(offsets[target], offsets[target + 1])
    nb, ew = nbrs[sl], graph.w[eids[sl]]
    keep = nb != target
    nb, ew = nb[keep], ew[keep]
    if nb.size == 0:
        return 0
    # lightest edge per distinct neighbour
    order = np.lexsort((ew, nb))
    nb, ew = nb[order], ew[order]
    first = np.r_[True, nb[1:] != nb[:-1]]
    nb, y = nb[first], ew[first]
    c = cdist[nb]
    if not np.any(np.isfinite(c)):
        return 0
    through = c + y
    iu = int(np.argmin(through))
    c_target = through[iu]
    if rule == "display":
        hit = c_target + y < c
    else:
        seeds = np.concatenate([[source], nb]).astype(np.int64)
        seed_dist = np.concatenate([[0.0], c_target + y])
        _, origin = _kernels.dijkstra_seeded(offsets, nbrs, eids, graph.w, seeds, seed_dist, target)
        hit = origin[nb] == np.arange(1, nb.size + 1)
    hit[iu] = False
    return 1 + int(hit.sum())
