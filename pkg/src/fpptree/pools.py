"""Population dynamics for the fixed-point laws ``W`` and ``V``.

A pool of ``P`` reals stands for a law. One sweep replaces every member by a
fresh application of the recursive equation, with inputs drawn from the
previous pool. The pool mean is never renormalised; ``E W = 1`` has to
emerge on its own and serves as a diagnostic.

Variance reduction (none of it changes the law being approximated):

* children pick parents by balanced resampling, so each old member is used
  ``floor`` or ``ceil`` of ``T / P`` times;
* offspring counts and each member's multiplicative factors come from
  stratified uniforms;
* the initial pool is a moment-matched Gamma law placed on quantiles.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .limits import lambda_s, solve_malthusian
from .stochastic import DegreeLaw, WeightLaw, as_generator, size_biased, stratified_uniforms

TARGETS = ("W_CM", "W_complete", "V")
# a W pool whose mean leaves 1 +- this after convergence is reported as broken
MEAN_DRIFT_LIMIT = 0.1


class PointBudgetExceeded(RuntimeError):
    """A draw or a sweep needed more Poisson points than allowed."""


class PoolDiagnosticError(RuntimeError):
    """A pool violates its support or mean contract."""


@dataclass(eq=False)
class SamplePool:
    """Samples approximating the law of ``W`` or ``V``.

    ``history`` holds the KS distance between successive sweeps.
    """

    samples: np.ndarray
    target: str
    generation: int = 0
    meta: dict = field(default_factory=dict)
    converged: bool = False
    history: list = field(default_factory=list)

    def __post_init__(self):
        if self.target not in TARGETS:
            raise ValueError(f"unknown pool target {self.target!r}")
        self.samples = np.asarray(self.samples, dtype=float)

    @property
    def size(self) -> int:
        return int(self.samples.size)

    def mean(self) -> float:
        return float(self.samples.mean())

    def draw(self, rng, size):
        """Uniformly indexed members."""
        gen = as_generator(rng)
        return self.samples[gen.integers(0, self.size, size)]

    def laplace(self, u):
        u = np.atleast_1d(np.asarray(u, dtype=float))
        out = np.array([np.mean(np.exp(-ui * self.samples)) for ui in u])
        return out if out.size > 1 else float(out[0])

    def check(self, delta: float = 0.1) -> None:
        """Raise if the pool violates its support or (for ``W``) mean contract."""
        if self.target == "V":
            if not np.all(self.samples > 0) or not np.all(np.isfinite(self.samples)):
                raise PoolDiagnosticError("V pool has nonpositive or infinite members")
            return
        if np.any(self.samples < 0):
            raise PoolDiagnosticError("W pool has negative members")
        if abs(self.mean() - 1.0) > delta:
            raise PoolDiagnosticError(f"W pool mean {self.mean():.4f} drifted outside 1 +- {delta}")

    def write(self, path) -> None:
        head = {"target": self.target, "size": self.size, "generation": self.generation,
                "converged": int(self.converged), **self.meta}
        with open(path, "w") as fh:
            for k, v in head.items():
                fh.write(f"# {k}={v}\n")
            np.savetxt(fh, self.samples, fmt="%.17g")

    @classmethod
    def read(cls, path) -> "SamplePool":
        meta = {}
        vals = []
        with open(path) as fh:
            for lineno, line in enumerate(fh, 1):
                if line.startswith("#"):
                    key, eq, val = line[1:].strip().partition("=")
                    if eq:
                        meta[key.strip()] = val.strip()
                    continue
                if not line.strip():
                    continue
                try:
                    vals.append(float(line))
                except ValueError:
                    raise ValueError(f"{path}:{lineno}: not a real number: {line.strip()!r}") from None
        if "target" not in meta:
            raise ValueError(f"{path}: missing '# target=' header")
        target = meta.pop("target")
        gen = int(meta.pop("generation", 0))
        conv = bool(int(meta.pop("converged", 0)))
        meta.pop("size", None)
        return cls(np.array(vals), target, gen, meta, conv)


# ---------------------------------------------------------------------------
# Shared machinery
# ---------------------------------------------------------------------------

def _ks_sorted(a: np.ndarray, b: np.ndarray) -> float:
    """Two-sample KS distance for sorted inputs."""
    x = np.concatenate([a, b])
    fa = np.searchsorted(a, x, side="right") / a.size
    fb = np.searchsorted(b, x, side="right") / b.size
    return float(np.abs(fa - fb).max())


def _balanced_parents(total: int, pool: int, gen: np.random.Generator):
    """Parent index and within-parent stratified uniform for ``total`` slots.

    Every parent gets ``floor`` or ``ceil`` of ``total / pool`` slots; the
    uniforms of a parent's slots occupy distinct equal strata.
    """
    reps = np.full(pool, total // pool, dtype=np.int64)
    extra = total - reps.sum()
    if extra:
        reps[gen.choice(pool, size=extra, replace=False)] += 1
    parent = np.repeat(np.arange(pool), reps)
    start = np.repeat(np.cumsum(reps) - reps, reps)
    rank = np.arange(total) - start
    u = (rank + gen.random(total)) / np.repeat(reps, reps)
    perm = gen.permutation(total)
    return parent[perm], u[perm]


INITS = ("gamma", "exponential", "constant")


def _initial_pool(var: float, size: int, gen, init: str = "gamma") -> np.ndarray:
    """Mean-one starting pool.

    ``gamma`` matches the given variance (constant for ~0, Exp(1) when the
    variance is unknown or huge); ``exponential`` and ``constant`` ignore it.
    """
    if init not in INITS:
        raise ValueError(f"unknown init {init!r}; choose from {INITS}")
    u = stratified_uniforms(size, gen)
    if init == "exponential":
        return -np.log1p(-u)
    if init == "constant":
        return np.ones(size)
    if not np.isfinite(var) or var > 10:
        return -np.log1p(-u)
    if var < 1e-12:
        return np.ones(size)
    return stats.gamma.ppf(u, a=1.0 / var, scale=var)


def _effective_tol(tol: float, size: int) -> float:
    # two independent pools already differ by about sqrt(2/P) in KS
    return max(tol, 1.22 * math.sqrt(2.0 / size))


def _iterate(pool0, step, iters, tol, min_sweeps, target, meta):
    tol = _effective_tol(tol, pool0.size)
    cur = np.sort(pool0)
    history = []
    converged = False
    gen_count = 0
    for sweep in range(1, iters + 1):
        new = np.sort(step(cur))
        history.append(_ks_sorted(cur, new))
        cur = new
        gen_count = sweep
        if sweep >= min_sweeps and history[-1] < tol:
            converged = True
            break
    meta = dict(meta, sweeps=gen_count, tol=f"{tol:.4g}")
    return SamplePool(cur, target, gen_count, meta, converged, history)


# ---------------------------------------------------------------------------
# W on the configuration model
# ---------------------------------------------------------------------------

def _w_cm_variance(offspring: DegreeLaw, weights: WeightLaw, lam: float) -> float:
    n = offspring.support.astype(float) - 1
    enn = float(np.dot(offspring.pmf, n * (n - 1)))
    nu = float(np.dot(offspring.pmf, n))
    denom = 1.0 - nu * weights.laplace(2 * lam)
    if denom <= 0:
        return math.inf
    return enn * weights.laplace(lam) ** 2 / denom - 1.0


def solve_W_cm(
    degrees: DegreeLaw,
    weights: WeightLaw,
    lam: float | None = None,
    pool_size: int = 100_000,
    iters: int = 200,
    rng=None,
    tol: float = 0.005,
    min_sweeps: int = 5,
    init: str = "gamma",
) -> SamplePool:
    """Pool for ``W = sum_{i <= D*-1} exp(-lam Y_i) W_i`` with ``D*`` the
    size-biased degree."""
    offspring = size_biased(degrees)
    nu = degrees.nu
    if lam is None:
        lam = solve_malthusian(nu, weights)
    elif not nu > 1:
        raise ValueError(f"nu = {nu} <= 1: no supercritical branching")
    gen = as_generator(rng)
    P = int(pool_size)

    def step(old):
        n = offspring.stratified_sample(P, gen) - 1
        total = int(n.sum())
        if total == 0:
            return np.zeros(P)
        parent, u = _balanced_parents(total, P, gen)
        factor = np.exp(-lam * weights.ppf(u))
        owner = np.repeat(np.arange(P), n)
        return np.bincount(owner, weights=factor * old[parent], minlength=P)

    init = _initial_pool(_w_cm_variance(offspring, weights, lam), P, gen, init)
    meta = {"lam": repr(lam), "degree_law": str(degrees), "weight_law": str(weights)}
    pool = _iterate(init, step, iters, tol, min_sweeps, "W_CM", meta)
    pool.check(MEAN_DRIFT_LIMIT)
    return pool


# ---------------------------------------------------------------------------
# W on the complete graph
# ---------------------------------------------------------------------------

def solve_W_complete(
    s: float,
    pool_size: int = 100_000,
    iters: int = 200,
    eps: float = 1e-8,
    rng=None,
    tol: float = 0.005,
    min_sweeps: int = 5,
    init: str = "gamma",
    point_budget: int = 40_000_000,
) -> SamplePool:
    """Pool for ``W = sum_{i >= 1} exp(-lam_s X_i) W_i``.

    The sum stops at the first point with ``exp(-lam_s X_i) < eps``. Given
    their number, the points ``Gamma_i = X_i^(1/s)`` below that cut are
    i.i.d. uniform, so each sweep draws a Poisson count, unordered uniform
    positions, and one more point an exponential gap past the cut.
    """
    lam = lambda_s(s)
    cut = (math.log(1.0 / eps) / lam) ** (1.0 / s)
    gen = as_generator(rng)
    P = int(pool_size)
    if P * cut > point_budget:
        raise PointBudgetExceeded(
            f"a sweep at s={s:g} needs about {P * cut:.3g} points, above the budget of {point_budget}; "
            "use a smaller pool or a larger eps"
        )

    def step(old):
        n = stats.poisson.ppf(stratified_uniforms(P, gen), cut).astype(np.int64)
        total = int(n.sum())
        parent, u = _balanced_parents(total, P, gen)
        factor = np.exp(-lam * (cut * u) ** s)
        owner = np.repeat(np.arange(P), n)
        new = np.bincount(owner, weights=factor * old[parent], minlength=P)
        # the first point past the cut closes the sum and keeps W > 0
        last = np.exp(-lam * (cut + gen.standard_exponential(P)) ** s)
        return new + last * old[gen.permutation(P)]

    var = 1.0 / (1.0 - 2.0 ** (-1.0 / s)) - 1.0
    init = _initial_pool(var, P, gen, init)
    meta = {"s": repr(s), "lam": repr(lam), "eps": repr(eps),
            "tail_bound": f"{complete_tail_bound(s, eps):.3g}"}
    pool = _iterate(init, step, iters, tol, min_sweeps, "W_complete", meta)
    pool.check(MEAN_DRIFT_LIMIT)
    return pool


def complete_tail_bound(s: float, eps: float) -> float:
    """``sum_{i > K} E exp(-lam_s X_i)`` over the dropped points, i.e. the
    expected truncation error per sample (using ``E W = 1``)."""
    from scipy import integrate

    lam = lambda_s(s)
    cut = (math.log(1.0 / eps) / lam) ** (1.0 / s)
    val, _ = integrate.quad(lambda t: math.exp(-lam * t**s), cut, np.inf, limit=200)
    return val


# ---------------------------------------------------------------------------
# V (explosion time, infinite-mean offspring)
# ---------------------------------------------------------------------------

def _check_v_law(degrees: DegreeLaw) -> DegreeLaw:
    if degrees.kind == "powerlaw" and not degrees.params["tau"] < 3:
        raise ValueError("V is defined for power laws with tau in (2, 3)")
    offspring = size_biased(degrees)
    if not offspring.infinite_mean:
        raise ValueError("V needs a size-biased law with infinite mean")
    if degrees.pmf[degrees.support < 2].sum() > 0:
        raise ValueError("V needs degrees >= 2 almost surely")
    return offspring


def _min_recursion_step(old_sorted: np.ndarray, n: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Exact draws of ``min_{i <= n}(E_i + V_i)`` with ``V_i`` uniform from the
    pool, by inverting the piecewise cdf of ``E + V``.

    On ``[v_(c), v_(c+1))`` that cdf equals ``(c - e^{-x} S_c) / P`` with
    ``S_c = sum_{j <= c} e^{v_(j)}``.
    """
    v = old_sorted
    P = v.size
    log_s = np.logaddexp.accumulate(v)
    c_idx = np.arange(1, P + 1, dtype=float)
    # cdf value where the next pool member enters
    nxt = np.append(v[1:], np.inf)
    brk = (c_idx - np.exp(log_s - nxt)) / P
    brk = np.concatenate([[0.0], brk[:-1]])
    f = -np.expm1(np.log(u) / n)
    c = np.searchsorted(brk, f, side="right")
    return log_s[c - 1] - np.log(c) - np.log1p(-P * f / c)


def solve_V(
    degrees: DegreeLaw,
    pool_size: int = 100_000,
    iters: int = 200,
    rng=None,
    tol: float = 0.005,
    min_sweeps: int = 5,
) -> SamplePool:
    """Pool for ``V = min_{i <= D*-1}(E_i + V_i)``."""
    offspring = _check_v_law(degrees)
    gen = as_generator(rng)
    P = int(pool_size)

    def step(old):
        n = (offspring.ppf(stratified_uniforms(P, gen)) - 1).astype(float)
        return _min_recursion_step(old, n, 1.0 - gen.random(P))

    init = -np.log1p(-stratified_uniforms(P, gen))
    meta = {"degree_law": str(degrees), "method": "min-recursion"}
    pool = _iterate(init, step, iters, tol, min_sweeps, "V", meta)
    pool.check()
    return pool


def sample_V_series(degrees: DegreeLaw, size: int, rng=None, cutoff: float = 1e6, block: int = 64):
    """Draws of ``V = sum_i E_i / (1 + sum_{j <= i} (D*_j - 2))``.

    Each series stops at the first term whose denominator exceeds
    ``cutoff``. Returns ``(samples, terms_used)``.
    """
    offspring = _check_v_law(degrees)
    gen = as_generator(rng)
    out = np.zeros(size)
    denom = np.ones(size)
    terms = np.zeros(size, dtype=np.int64)
    active = np.arange(size)
    while active.size:
        m = active.size
        inc = offspring.ppf(gen.random((m, block))).astype(float) - 2.0
        d = denom[active, None] + np.cumsum(inc, axis=1)
        # keep terms up to and including the first denominator above the cutoff
        prev = np.column_stack([denom[active], d[:, :-1]])
        keep = np.cumprod(prev <= cutoff, axis=1).astype(bool)
        e = gen.standard_exponential((m, block))
        out[active] += np.where(keep, e / d, 0.0).sum(axis=1)
        used = keep.sum(axis=1)
        terms[active] += used
        denom[active] = d[:, -1]
        active = active[used == block]
    return out, terms


def series_pool(degrees: DegreeLaw, pool_size: int = 100_000, rng=None, cutoff: float = 1e6) -> SamplePool:
    v, terms = sample_V_series(degrees, pool_size, rng, cutoff)
    meta = {"degree_law": str(degrees), "method": "series", "cutoff": repr(cutoff),
            "mean_terms": f"{terms.mean():.4g}"}
    return SamplePool(np.sort(v), "V", 0, meta, True)
