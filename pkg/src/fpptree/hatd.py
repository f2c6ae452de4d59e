"""Samplers for the limiting tree degree and its extremal score.

All samplers are vectorised over rows (one row per draw) and process rows in
chunks of a few million points. Random degrees ``D`` are drawn from
stratified uniforms, which removes most of the noise that a heavy-tailed
degree law would otherwise add to sample means.
"""
from __future__ import annotations

import math

import numpy as np

from .limits import lambda_s, solve_malthusian
from .pools import PointBudgetExceeded, SamplePool, solve_W_cm
from .stochastic import DegreeLaw, WeightLaw, as_generator, stratified_uniforms

CHUNK_POINTS = 4_000_000


def _log_pool(pool: SamplePool) -> np.ndarray:
    with np.errstate(divide="ignore"):
        return np.log(pool.samples)


def _row_chunks(counts: np.ndarray):
    """Yield slices of rows holding at most about ``CHUNK_POINTS`` points."""
    csum = np.cumsum(counts)
    start = 0
    while start < counts.size:
        base = csum[start - 1] if start else 0
        stop = int(np.searchsorted(csum, base + CHUNK_POINTS, side="right"))
        stop = max(stop, start + 1)
        yield slice(start, stop)
        start = stop


def _segments(counts):
    starts = np.zeros(counts.size, dtype=np.int64)
    np.cumsum(counts[:-1], out=starts[1:])
    return starts


# ---------------------------------------------------------------------------
# Configuration model, finite variance: scores Lambda + log W -+ lam Y
# ---------------------------------------------------------------------------

def _hatd_finite_rows(counts, logw, lam, weights, gen, want_m):
    """``1 + #{a_i + lam Y_i < M}`` with ``M = max(a_i - lam Y_i)``,
    ``a_i = Lambda_i + log W_i``, for rows of the given lengths."""
    hat = np.zeros(counts.size, dtype=np.int64)
    m_out = np.full(counts.size, -np.inf)
    for sl in _row_chunks(counts):
        c = counts[sl]
        live = c > 0
        cl = c[live]
        total = int(cl.sum())
        if total == 0:
            continue
        a = -np.log(gen.standard_exponential(total)) + logw[gen.integers(0, logw.size, total)]
        ly = lam * np.asarray(weights.sample(gen, total), dtype=float)
        starts = _segments(cl)
        m = np.maximum.reduceat(a - ly, starts)
        with np.errstate(invalid="ignore"):
            hit = (a + ly) < np.repeat(m, cl)
        cnt = np.add.reduceat(hit, starts)
        h = 1 + cnt
        # every score -inf: all neighbours lead to finite branches
        h[m == -np.inf] = 0
        idx = np.flatnonzero(live) + sl.start
        hat[idx] = h
        m_out[idx] = m
    return (hat, m_out) if want_m else hat


def sample_hatD_cm_finite(
    degrees: DegreeLaw, w_pool: SamplePool, lam: float, weights: WeightLaw, size: int, rng=None,
    return_degree: bool = False,
):
    """Draws of ``D_hat = 1 + #{i <= D: Lambda_i + log W_i + lam Y_i < M}``
    with ``M = max_{i <= D}(Lambda_i + log W_i - lam Y_i)``. A draw with
    ``D = 0`` gives 0."""
    gen = as_generator(rng)
    d = degrees.ppf(stratified_uniforms(size, gen)).astype(np.int64)
    hat = _hatd_finite_rows(d, _log_pool(w_pool), lam, weights, gen, False)
    return (hat, d) if return_degree else hat


def sample_hatDk_cm_finite(
    k: int, w_pool: SamplePool, lam: float, weights: WeightLaw, size: int, rng=None,
    return_M: bool = False,
):
    """Draws of ``D_hat_k``: the same construction with ``D = k`` fixed."""
    if k < 1:
        raise ValueError("k must be at least 1")
    gen = as_generator(rng)
    counts = np.full(size, k, dtype=np.int64)
    return _hatd_finite_rows(counts, _log_pool(w_pool), lam, weights, gen, return_M)


def sample_hatD_Y1(degrees: DegreeLaw, size: int, rng=None, pool_size: int = 100_000):
    """Limiting tree degree with all weights equal to 1 (breadth-first
    exploration), through the Malthusian machinery with ``e^lam = nu``."""
    if degrees.pmf[degrees.support < 3].sum() > 0:
        raise ValueError("unit-weight identity needs degrees >= 3")
    gen = as_generator(rng)
    unit = WeightLaw("constant")
    lam = solve_malthusian(degrees.nu, unit)
    pool = solve_W_cm(degrees, unit, lam, pool_size=pool_size, rng=gen)
    return sample_hatD_cm_finite(degrees, pool, lam, unit, size, gen)


# ---------------------------------------------------------------------------
# Complete graph: points X_i of the Poisson process, scores minus lam_s X_i
# ---------------------------------------------------------------------------

def _complete_row_extend(a, x, lam, s, cut, delta, logw, gen, budget):
    """Grow one row until ``lam X - |M| > delta`` past the last point."""
    while True:
        m = (a - lam * x).max() if a.size else -np.inf
        if np.isfinite(m) and lam * cut**s - abs(m) > delta:
            return a, x, m
        new_cut = 1.05 * ((abs(m) + delta) / lam) ** (1.0 / s) if np.isfinite(m) else 2.0 * cut
        k = int(gen.poisson(new_cut - cut))
        if a.size + k > budget:
            raise PointBudgetExceeded(
                f"a complete-graph draw needed more than {budget} points (M = {m:.3g}, "
                f"margin {delta}); raise the budget or lower delta"
            )
        g = cut + (new_cut - cut) * gen.random(k)
        a = np.concatenate([a, -np.log(gen.standard_exponential(k)) + logw[gen.integers(0, logw.size, k)]])
        x = np.concatenate([x, g**s])
        cut = new_cut


def sample_hatD_complete(
    s: float, w_pool: SamplePool, size: int, rng=None, delta: float = 30.0,
    point_budget: int = 10_000_000, return_M: bool = False,
):
    """Draws of ``D_hat = 1 + #{i: Lambda_i + log W_i + lam_s X_i < M}`` with
    ``M = max_i(Lambda_i + log W_i - lam_s X_i)`` over all points.

    Points are generated until ``lam_s X - |M| > delta`` past the last one:
    beyond that a point could raise ``M`` only with ``Lambda + log W > delta``
    and could count only with ``Lambda + log W < -delta``.
    """
    if not s > 0:
        raise ValueError("s must be positive")
    gen = as_generator(rng)
    lam = lambda_s(s)
    logw = _log_pool(w_pool)
    m0 = 10.0
    cut0 = ((delta + m0) / lam) ** (1.0 / s)
    counts = gen.poisson(cut0, size).astype(np.int64)
    if size and counts.max() > point_budget:
        raise PointBudgetExceeded(
            f"the initial cut at s={s:g} holds about {cut0:.3g} points per draw, above the budget of "
            f"{point_budget}; raise the budget or lower delta"
        )
    hat = np.zeros(size, dtype=np.int64)
    m_all = np.full(size, -np.inf)
    for sl in _row_chunks(counts):
        c = counts[sl]
        total = int(c.sum())
        a = -np.log(gen.standard_exponential(total)) + logw[gen.integers(0, logw.size, total)]
        lx = lam * (cut0 * gen.random(total)) ** s
        starts = _segments(c)
        nonempty = c > 0
        m = np.full(c.size, -np.inf)
        if total:
            m[nonempty] = np.maximum.reduceat((a - lx), starts[nonempty])
        with np.errstate(invalid="ignore"):
            hit = (a + lx) < np.repeat(m, c)
        cnt = np.zeros(c.size, dtype=np.int64)
        if total:
            cnt[nonempty] = np.add.reduceat(hit, starts[nonempty])
        h = 1 + cnt
        redo = ~(lam * cut0**s - np.abs(m) > delta)
        for r in np.flatnonzero(redo):
            seg = slice(starts[r], starts[r] + c[r])
            ra, rx, rm = _complete_row_extend(
                a[seg], (lx[seg] / lam), lam, s, cut0, delta, logw, gen, point_budget
            )
            m[r] = rm
            h[r] = 1 + int(np.count_nonzero(ra + lam * rx < rm))
        hat[sl] = h
        m_all[sl] = m
    return (hat, m_all) if return_M else hat


# ---------------------------------------------------------------------------
# Configuration model, infinite variance: explosion times V
# ---------------------------------------------------------------------------

def _hatd_infinite_rows(counts, v_pool: SamplePool, gen):
    """``1 + #{V_i - E_i > xi}`` with ``xi = min(V_i + E_i)`` per row."""
    hat = np.zeros(counts.size, dtype=np.int64)
    v_all = v_pool.samples
    for sl in _row_chunks(counts):
        c = counts[sl]
        live = c > 0
        cl = c[live]
        total = int(cl.sum())
        if total == 0:
            continue
        v = v_all[gen.integers(0, v_all.size, total)]
        e = gen.standard_exponential(total)
        starts = _segments(cl)
        xi = np.minimum.reduceat(v + e, starts)
        cnt = np.add.reduceat((v - e) > np.repeat(xi, cl), starts)
        hat[np.flatnonzero(live) + sl.start] = 1 + cnt
    return hat


def sample_hatD_cm_infinite(degrees: DegreeLaw, v_pool: SamplePool, size: int, rng=None,
                            return_degree: bool = False):
    gen = as_generator(rng)
    d = degrees.ppf(stratified_uniforms(size, gen)).astype(np.int64)
    hat = _hatd_infinite_rows(d, v_pool, gen)
    return (hat, d) if return_degree else hat


def sample_hatDk_cm_infinite(k: int, v_pool: SamplePool, size: int, rng=None):
    if k < 1:
        raise ValueError("k must be at least 1")
    gen = as_generator(rng)
    return _hatd_infinite_rows(np.full(size, k, dtype=np.int64), v_pool, gen)


def estimate_p(v_pool: SamplePool, size: int, rng=None) -> float:
    """Fraction of fresh pairs ``(V, E)`` with ``V > E``."""
    gen = as_generator(rng)
    return float(np.mean(v_pool.draw(gen, size) > gen.standard_exponential(size)))
