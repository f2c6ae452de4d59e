"""Weighted multigraphs: configuration model, complete graph, edge-list I/O."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.spatial.distance import squareform

from .stochastic import DegreeLaw, WeightLaw, as_generator

DEFAULT_DENSE_EDGE_CAP = 10**8
# a full n x n copy of the weights is kept when it fits in this many bytes
SQUARE_CACHE_BYTES = 2**28


class ResourceCapError(RuntimeError):
    """Requested object would exceed a configured memory budget."""


@dataclass(eq=False)
class WeightedMultiGraph:
    """Undirected multigraph on vertices ``0..n-1``; edge ``e`` joins
    ``u[e]`` and ``v[e]`` with weight ``w[e]``. Self-loops and parallel edges
    are kept. Treat instances as immutable once built."""

    n: int
    u: np.ndarray
    v: np.ndarray
    w: np.ndarray | None = None
    _csr: tuple | None = field(default=None, init=False, repr=False)

    def __post_init__(self):
        self.u = np.asarray(self.u, dtype=np.int64)
        self.v = np.asarray(self.v, dtype=np.int64)
        if self.u.shape != self.v.shape:
            raise ValueError("endpoint arrays differ in length")
        if self.u.size and (min(self.u.min(), self.v.min()) < 0 or max(self.u.max(), self.v.max()) >= self.n):
            raise ValueError("edge endpoint outside 0..n-1")
        if self.w is not None:
            self.w = np.asarray(self.w, dtype=float)
            if self.w.shape != self.u.shape:
                raise ValueError("weight array differs in length from edge list")
            if np.any(~(self.w > 0)):
                raise ValueError("edge weights must be positive")

    @property
    def num_edges(self) -> int:
        return int(self.u.size)

    @property
    def weighted(self) -> bool:
        return self.w is not None

    def degrees(self) -> np.ndarray:
        """Graph degrees; a self-loop adds 2 to its endpoint."""
        return np.bincount(self.u, minlength=self.n) + np.bincount(self.v, minlength=self.n)

    @property
    def has_self_loops(self) -> bool:
        return bool(np.any(self.u == self.v))

    @property
    def has_multi_edges(self) -> bool:
        lo, hi = np.minimum(self.u, self.v), np.maximum(self.u, self.v)
        keys = lo * self.n + hi
        return bool(np.unique(keys).size < keys.size)

    def csr(self):
        """Incidence index ``(offsets, neighbours, edge_ids)``; each edge appears
        once per endpoint, a self-loop twice at its vertex."""
        if self._csr is None:
            src = np.concatenate([self.u, self.v])
            dst = np.concatenate([self.v, self.u])
            eid = np.concatenate([np.arange(self.num_edges)] * 2)
            order = np.argsort(src, kind="stable")
            offsets = np.zeros(self.n + 1, dtype=np.int64)
            np.cumsum(np.bincount(src, minlength=self.n), out=offsets[1:])
            self._csr = (offsets, dst[order].astype(np.int64), eid[order].astype(np.int64))
        return self._csr

    def with_weights(self, w) -> "WeightedMultiGraph":
        return WeightedMultiGraph(self.n, self.u, self.v, w)

    def edge_weight(self, e: int) -> float:
        return float(self.w[e])


class CompleteGraph:
    """Complete graph ``K_n`` with i.i.d. ``E**s`` weights stored densely.

    Weights live in condensed upper-triangle order (as in
    ``scipy.spatial.distance.squareform``); the edge id of ``{i, j}`` is its
    condensed index.
    """

    def __init__(self, n: int, weights: np.ndarray, s: float = 1.0):
        self.n = int(n)
        self.s = s
        self.w = np.asarray(weights, dtype=float)
        if self.w.size != self.n * (self.n - 1) // 2:
            raise ValueError("weight vector has wrong length for a complete graph")
        i = np.arange(self.n, dtype=np.int64)
        # condensed index of (i, j), i < j, is base[i] + j
        self._base = self.n * i - i * (i + 1) // 2 - i - 1
        self._square = None

    @property
    def num_edges(self) -> int:
        return self.w.size

    @property
    def weighted(self) -> bool:
        return True

    has_self_loops = False
    has_multi_edges = False

    def degrees(self) -> np.ndarray:
        return np.full(self.n, self.n - 1, dtype=np.int64)

    def edge_id(self, a, b):
        a, b = np.minimum(a, b), np.maximum(a, b)
        return self._base[a] + b

    def row(self, a: int) -> np.ndarray:
        """Weights from ``a`` to every vertex; ``inf`` at ``a`` itself."""
        out = np.empty(self.n)
        out[:a] = self.w[self._base[:a] + a]
        out[a] = np.inf
        out[a + 1:] = self.w[self._base[a] + a + 1: self._base[a] + self.n]
        return out

    def square(self):
        """Full symmetric weight matrix (``inf`` on the diagonal), cached when
        it fits in ``SQUARE_CACHE_BYTES``; ``None`` otherwise."""
        if self._square is None and 8 * self.n * self.n <= SQUARE_CACHE_BYTES:
            sq = squareform(self.w)
            np.fill_diagonal(sq, np.inf)
            self._square = sq
        return self._square

    def endpoints(self, e):
        e = np.asarray(e, dtype=np.int64)
        a = np.searchsorted(self._base + self.n, e, side="right")
        b = e - self._base[a]
        return a, b

    @property
    def u(self) -> np.ndarray:
        return self.endpoints(np.arange(self.num_edges))[0]

    @property
    def v(self) -> np.ndarray:
        return self.endpoints(np.arange(self.num_edges))[1]

    def edge_weight(self, e: int) -> float:
        return float(self.w[e])

    def to_multigraph(self) -> WeightedMultiGraph:
        return WeightedMultiGraph(self.n, self.u, self.v, self.w.copy())


@dataclass
class DegreeSequence:
    d: np.ndarray
    parity_fixed: bool = False

    @property
    def total(self) -> int:
        return int(self.d.sum())

    @property
    def n(self) -> int:
        return int(self.d.size)


def draw_degree_sequence(law: DegreeLaw, n: int, rng) -> DegreeSequence:
    """``n`` i.i.d. degrees; if the total is odd one uniformly chosen entry is
    increased by one."""
    if n < 2:
        raise ValueError("need n >= 2")
    gen = as_generator(rng)
    d = np.asarray(law.sample(gen, n), dtype=np.int64)
    fixed = False
    if d.sum() % 2:
        d[gen.integers(n)] += 1
        fixed = True
    return DegreeSequence(d, fixed)


def build_configuration_model(seq, rng) -> WeightedMultiGraph:
    """Uniform perfect matching of half-edges: shuffle the half-edge list and
    pair consecutive entries."""
    d = np.asarray(seq.d if isinstance(seq, DegreeSequence) else seq, dtype=np.int64)
    if d.sum() % 2:
        raise ValueError("total degree must be even")
    gen = as_generator(rng)
    stubs = np.repeat(np.arange(d.size, dtype=np.int64), d)
    gen.shuffle(stubs)
    return WeightedMultiGraph(d.size, stubs[0::2], stubs[1::2])


def attach_weights(graph: WeightedMultiGraph, law: WeightLaw, rng) -> WeightedMultiGraph:
    """Independent weight per edge, self-loops and parallel copies included."""
    w = np.asarray(law.sample(rng, graph.num_edges), dtype=float)
    return graph.with_weights(w)


def configuration_model(law: DegreeLaw, n: int, weights: WeightLaw, rng) -> WeightedMultiGraph:
    """Degree sequence, pairing and weights drawn from one generator."""
    gen = as_generator(rng)
    seq = draw_degree_sequence(law, n, gen)
    return attach_weights(build_configuration_model(seq, gen), weights, gen)


def build_complete_graph(n: int, s: float, rng, max_edges: int = DEFAULT_DENSE_EDGE_CAP) -> CompleteGraph:
    """Complete graph with i.i.d. ``E**s`` weights, materialised densely."""
    m = n * (n - 1) // 2
    if m > max_edges:
        raise ResourceCapError(
            f"complete graph on n={n} needs {m} weights, above the cap of {max_edges}; "
            "lower n or raise max_edges"
        )
    if s <= 0:
        raise ValueError("s must be positive")
    gen = as_generator(rng)
    w = gen.standard_exponential(m)
    if s != 1:
        w **= s
    return CompleteGraph(n, w, s)


# ---------------------------------------------------------------------------
# Text formats
# ---------------------------------------------------------------------------

def write_edge_list(graph, path) -> None:
    """``u v weight`` per line with 0-based vertices and 17 significant digits,
    after a ``# n=<n>`` header."""
    with open(path, "w") as fh:
        fh.write(f"# n={graph.n}\n")
        if graph.num_edges:
            w = graph.w if graph.weighted else np.ones(graph.num_edges)
            np.savetxt(fh, np.column_stack([graph.u, graph.v, w]), fmt="%d %d %.17g")


def read_edge_list(path) -> WeightedMultiGraph:
    n = None
    us, vs, ws = [], [], []
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            if line.startswith("#"):
                head = line[1:].strip()
                if head.startswith("n="):
                    n = int(head[2:])
                continue
            parts = line.split()
            if not parts:
                continue
            try:
                if len(parts) != 3:
                    raise ValueError
                us.append(int(parts[0]))
                vs.append(int(parts[1]))
                ws.append(float(parts[2]))
            except ValueError:
                raise ValueError(f"{path}:{lineno}: malformed edge line {line.rstrip()!r}") from None
    u = np.array(us, dtype=np.int64)
    v = np.array(vs, dtype=np.int64)
    if n is None:
        n = int(max(u.max(), v.max()) + 1) if u.size else 0
    return WeightedMultiGraph(n, u, v, np.array(ws, dtype=float))


def write_degree_sequence(d, path) -> None:
    np.savetxt(path, np.asarray(d, dtype=np.int64), fmt="%d")


def read_degree_sequence(path) -> DegreeSequence:
    d = np.loadtxt(path, dtype=np.int64, comments="#", ndmin=1)
    return DegreeSequence(d)
