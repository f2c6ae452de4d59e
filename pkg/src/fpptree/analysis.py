"""Statistics that connect simulated trees to the limit laws.

Empirical degree distributions, TV and KS distances, tail-exponent fits,
rate-of-convergence regressions and the path-length recentering check.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import stats

from .fpp import mean_tree_degree  # noqa: F401  (re-exported)


@dataclass(eq=False)
class DegreeDistribution:
    """Empirical pmf on ``k = 0..kmax`` with its tail ``q_k = sum_{j>=k} p_j``.

    ``n`` is the number of samples behind the table, or ``None`` for an
    exact (non-sampled) distribution.
    """

    pmf: np.ndarray
    n: int | None = None

    def __post_init__(self):
        pmf = np.asarray(self.pmf, dtype=float)
        if pmf.ndim != 1 or pmf.size == 0 or np.any(pmf < 0):
            raise ValueError("pmf must be a nonempty nonnegative vector")
        total = pmf.sum()
        if not abs(total - 1.0) < 1e-9:
            raise ValueError(f"pmf sums to {total!r}")
        self.pmf = pmf / total
        nz = np.flatnonzero(self.pmf)
        self.pmf = self.pmf[: nz[-1] + 1]

    @classmethod
    def from_samples(cls, samples) -> "DegreeDistribution":
        x = np.asarray(samples)
        if x.size == 0:
            raise ValueError("no samples")
        if np.any(x < 0) or np.any(x != np.round(x)):
            raise ValueError("degrees must be nonnegative integers")
        counts = np.bincount(x.astype(np.int64))
        return cls(counts / x.size, int(x.size))

    @classmethod
    def from_pmf(cls, table, n: int | None = None) -> "DegreeDistribution":
        """From a mapping ``k -> p`` or a vector indexed by ``k``."""
        if isinstance(table, dict):
            kmax = max(int(k) for k in table)
            pmf = np.zeros(kmax + 1)
            for k, p in table.items():
                pmf[int(k)] += p
            return cls(pmf, n)
        return cls(np.asarray(table, dtype=float), n)

    @classmethod
    def from_ccdf(cls, k, q) -> "DegreeDistribution":
        """From tail values ``q`` on consecutive integers ``k`` with ``q[0] = 1``;
        the mass above ``k[-1]`` is put on ``k[-1]``."""
        k = np.asarray(k, dtype=np.int64)
        q = np.asarray(q, dtype=float)
        if np.any(np.diff(k) != 1):
            raise ValueError("k must be consecutive integers")
        pmf = np.zeros(k[-1] + 1)
        pmf[k] = q - np.append(q[1:], 0.0)
        return cls(pmf)

    @property
    def support(self) -> np.ndarray:
        return np.flatnonzero(self.pmf)

    @property
    def k_max(self) -> int:
        return int(self.pmf.size - 1)

    @property
    def ccdf(self) -> np.ndarray:
        """``q_k`` for ``k = 0..kmax``."""
        return np.cumsum(self.pmf[::-1])[::-1]

    def q(self, k):
        k = np.asarray(k)
        c = np.append(self.ccdf, 0.0)
        return c[np.clip(k, 0, self.pmf.size)]

    def mean(self) -> float:
        return float(np.dot(np.arange(self.pmf.size), self.pmf))

    def conditioned(self, k_min: int = 1) -> "DegreeDistribution":
        """Renormalised to ``k >= k_min`` (e.g. dropping unreached vertices)."""
        p = self.pmf.copy()
        p[:k_min] = 0.0
        if p.sum() == 0:
            raise ValueError("no mass left after conditioning")
        n = None if self.n is None else int(round(self.n * p.sum()))
        return DegreeDistribution(p / p.sum(), n)

    def as_dict(self) -> dict[int, float]:
        return {int(k): float(self.pmf[k]) for k in self.support}

    def table(self) -> np.ndarray:
        """Rows ``(k, p_k, q_k)`` over the support."""
        k = self.support
        return np.column_stack([k, self.pmf[k], self.ccdf[k]])


def _as_pmf_vector(d) -> np.ndarray:
    if isinstance(d, DegreeDistribution):
        return d.pmf
    if isinstance(d, dict):
        return DegreeDistribution.from_pmf(d).pmf
    return np.asarray(d, dtype=float)


def tv_distance(p, q) -> float:
    """Total variation ``0.5 * sum |p_k - q_k|`` between two pmfs on the
    nonnegative integers (``DegreeDistribution``, dict or vector)."""
    a, b = _as_pmf_vector(p), _as_pmf_vector(q)
    if a.size == 0 or b.size == 0:
        raise ValueError("empty distribution")
    m = max(a.size, b.size)
    a = np.pad(a, (0, m - a.size))
    b = np.pad(b, (0, m - b.size))
    return float(min(1.0, 0.5 * np.abs(a - b).sum()))


def ks_statistic(a, b) -> float:
    """Sup-distance between the empirical cdf of ``a`` and either the
    empirical cdf of ``b`` or a callable cdf ``b``."""
    a = np.asarray(a, dtype=float)
    if a.size == 0:
        raise ValueError("empty sample")
    if callable(b):
        return float(stats.kstest(a, b).statistic)
    b = np.asarray(b, dtype=float)
    if b.size == 0:
        raise ValueError("empty sample")
    return float(stats.ks_2samp(a, b).statistic)


def geometric_pmf(p: float, k_max: int = 200) -> np.ndarray:
    """``P(X = k) = p (1-p)^(k-1)`` for ``k >= 1``, as a vector from ``k = 0``."""
    k = np.arange(k_max + 1)
    out = np.where(k >= 1, p * (1 - p) ** np.maximum(k - 1, 0), 0.0)
    out[-1] += (1 - p) ** k_max
    return out


# ---------------------------------------------------------------------------
# Tail exponents
# ---------------------------------------------------------------------------

@dataclass
class TailFit:
    tau_hat: float
    k_min: int
    stderr: float
    method: str
    k_max: int = 0
    points: int = 0
    hill_tau: float = float("nan")
    hill_stderr: float = float("nan")
    curvature: float = 0.0
    power_law: bool = True


CURVATURE_LIMIT = 0.5


def fit_ccdf_exponent(k, q, n_grid: int = 40) -> tuple[float, float, float, int]:
    """Least-squares line through ``(log k, log q)`` at log-spaced ``k``.

    Returns ``(tau_hat, stderr, curvature, points)``. ``curvature`` is the
    change of local slope across the range from a quadratic fit, relative to
    the mean slope; a pure power law gives 0.
    """
    k = np.asarray(k, dtype=float)
    q = np.asarray(q, dtype=float)
    ok = q > 0
    k, q = k[ok], q[ok]
    if k.size > n_grid:
        grid = np.unique(np.round(np.geomspace(k[0], k[-1], n_grid)))
        pick = np.unique(np.clip(np.searchsorted(k, grid), 0, k.size - 1))
        k, q = k[pick], q[pick]
    if k.size < 3:
        raise ValueError("need at least 3 tail points for a fit")
    x, y = np.log(k), np.log(q)
    res = stats.linregress(x, y)
    slope = res.slope
    c2, c1, _ = np.polyfit(x, y, 2)
    s_lo, s_hi = c1 + 2 * c2 * x[0], c1 + 2 * c2 * x[-1]
    curvature = abs(s_hi - s_lo) / max(abs(slope), 1e-12)
    return 1.0 - slope, float(res.stderr), float(curvature), int(k.size)


def default_k_min(dist: DegreeDistribution, level: float = 0.1) -> int:
    """Smallest ``k`` with ``q_k <= level``."""
    q = dist.ccdf
    idx = np.flatnonzero(q <= level)
    return int(idx[0]) if idx.size else dist.k_max


def hill_estimate(dist: DegreeDistribution, k_min: int) -> tuple[float, float]:
    """Discrete Hill estimator ``1 + n_tail / sum log(k / (k_min - 1/2))``."""
    k = np.arange(dist.pmf.size)
    sel = k >= k_min
    w = dist.pmf[sel]
    mass = w.sum()
    if mass <= 0:
        return float("nan"), float("nan")
    denom = np.dot(w, np.log(k[sel] / (k_min - 0.5)))
    tau = 1.0 + mass / denom
    n_tail = mass * dist.n if dist.n else np.inf
    return float(tau), float((tau - 1) / np.sqrt(n_tail))


def estimate_tail_exponent(
    dist: DegreeDistribution,
    k_min: int | None = None,
    k_max: int | None = None,
    method: str = "ccdf-regression",
    min_count: float = 10.0,
) -> TailFit:
    """Fit ``q_k ~ k^(1 - tau)`` over ``k_min <= k <= k_max``.

    ``k_min`` defaults to the smallest ``k`` with ``q_k <= 0.1``; ``k_max``
    defaults to the largest ``k`` whose tail still holds ``min_count``
    samples (all of the support for exact input). Both the regression and
    the Hill estimate are computed; ``method`` picks which one is reported
    as ``tau_hat``.
    """
    if method not in ("ccdf-regression", "hill"):
        raise ValueError(f"unknown method {method!r}")
    if k_min is None:
        k_min = default_k_min(dist)
    q = dist.ccdf
    if k_max is None:
        if dist.n:
            ok = np.flatnonzero(q * dist.n >= min_count)
            k_max = int(ok[-1]) if ok.size else 0
        else:
            k_max = dist.k_max
    k_max = min(k_max, dist.k_max)
    ks = np.arange(k_min, k_max + 1)
    ks = ks[q[ks] > 0] if ks.size else ks
    if np.count_nonzero(dist.pmf[k_min: k_max + 1]) < 10:
        raise ValueError(
            f"insufficient tail data: fewer than 10 support points in [{k_min}, {k_max}]"
        )
    tau, se, curv, pts = fit_ccdf_exponent(ks, q[ks])
    h_tau, h_se = hill_estimate(dist, k_min)
    fit = TailFit(
        tau_hat=tau, k_min=int(k_min), stderr=se, method=method, k_max=int(k_max), points=pts,
        hill_tau=h_tau, hill_stderr=h_se, curvature=curv, power_law=curv < CURVATURE_LIMIT,
    )
    if method == "hill":
        fit.tau_hat, fit.stderr = h_tau, h_se
    return fit


# ---------------------------------------------------------------------------
# Rates of convergence
# ---------------------------------------------------------------------------

@dataclass
class RateFit:
    alpha: float
    stderr: float
    rss_power: float
    rss_log: float
    log_slope: float

    @property
    def preferred(self) -> str:
        return "log" if self.rss_log < self.rss_power else "power"


def rate_of_convergence_fit(k_grid, mean_deficit) -> RateFit:
    """Fit ``deficit ~ C k^alpha`` (slope in log-log) and
    ``deficit ~ a + b log k``; residual sums of squares are compared on the
    deficit scale."""
    k = np.asarray(k_grid, dtype=float)
    d = np.asarray(mean_deficit, dtype=float)
    if k.size < 5 or k.size != d.size:
        raise ValueError("need at least 5 grid points with one deficit each")
    if np.any(d <= 0):
        raise ValueError("deficits must be positive")
    x = np.log(k)
    res = stats.linregress(x, np.log(d))
    rss_power = float(np.sum((d - np.exp(res.intercept + res.slope * x)) ** 2))
    lin = stats.linregress(x, d)
    rss_log = float(np.sum((d - (lin.intercept + lin.slope * x)) ** 2))
    return RateFit(float(res.slope), float(res.stderr), rss_power, rss_log, float(lin.slope))


# ---------------------------------------------------------------------------
# Path-length recentering on the complete graph
# ---------------------------------------------------------------------------

@dataclass
class RecenteringResult:
    ns: list
    samples: dict
    ks_consecutive: list
    mean: float
    mean_stderr: float
    ks_oracle: float = float("nan")

    def stable(self, tol: float = 0.05) -> bool:
        return all(d < tol for d in self.ks_consecutive)


def recentered_path_lengths(n: int, s: float, graphs: int, sources: int, targets: int, rng):
    """``lambda_s n^s C_n(u, v) - log n`` for ``targets`` random targets of
    each of ``sources`` random sources in each of ``graphs`` complete graphs.

    Returns an array of shape ``(graphs * sources, targets)``.
    """
    from .fpp import shortest_path_tree
    from .graphs import build_complete_graph
    from .limits import lambda_s
    from .stochastic import as_generator

    gen = as_generator(rng)
    scale = lambda_s(s) * float(n) ** s
    out = np.empty((graphs * sources, targets))
    row = 0
    for _ in range(graphs):
        g = build_complete_graph(n, s, gen)
        for src in gen.choice(n, size=sources, replace=False):
            spt = shortest_path_tree(g, int(src))
            others = gen.choice(n - 1, size=targets, replace=False)
            others = others + (others >= src)
            out[row] = scale * spt.dist[others] - np.log(n)
            row += 1
    return out


def recentering_check(samples_by_n: dict, oracle=None) -> RecenteringResult:
    """Stabilisation diagnostics for recentered path lengths.

    ``samples_by_n`` maps ``n`` to an array whose rows are independent
    sources (columns: targets of that source). KS distances use one target
    per source; the mean and its standard error use source means.
    """
    ns = sorted(samples_by_n)
    if len(ns) < 2:
        raise ValueError("need at least two values of n")
    arrs = {n: np.atleast_2d(np.asarray(samples_by_n[n], dtype=float)) for n in ns}
    for n in ns:
        if arrs[n].size < 1000:
            raise ValueError(f"insufficient samples at n={n}: {arrs[n].size} < 1000")
    first = {n: arrs[n][:, 0] for n in ns}
    ks = [ks_statistic(first[a], first[b]) for a, b in zip(ns[:-1], ns[1:])]
    top = arrs[ns[-1]]
    per_source = top.mean(axis=1)
    res = RecenteringResult(
        ns=ns, samples=arrs, ks_consecutive=ks,
        mean=float(per_source.mean()),
        mean_stderr=float(per_source.std(ddof=1) / np.sqrt(per_source.size)),
    )
    if oracle is not None:
        res.ks_oracle = ks_statistic(first[ns[-1]], np.asarray(oracle, dtype=float))
    return res
