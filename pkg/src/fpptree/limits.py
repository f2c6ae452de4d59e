"""Limit constants and closed-form laws.

Malthusian parameters, the complete-graph rate ``lambda_s``, the
breadth-first-tree degree law, the generating-function identity for unit
weights, and the exact ``s = 1`` formulas used as test oracles.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, optimize, special

from .stochastic import DegreeLaw, WeightLaw


def lambda_s(s: float) -> float:
    """``Gamma(1 + 1/s) ** s``: the rate making ``int e^{-lambda x} dmu_s = 1``."""
    if not s > 0:
        raise ValueError(f"s must be positive, got {s}")
    return math.exp(s * special.gammaln(1.0 + 1.0 / s))


def ppp_laplace(lam: float, s: float) -> float:
    """``int_0^inf e^{-lam x} dmu_s(x)`` with ``mu_s`` the intensity
    ``(1/s) x^(1/s - 1) dx`` of the points ``X_i``; written as
    ``int_0^inf exp(-lam t^s) dt`` after ``x = t^s``."""
    if not s > 0:
        raise ValueError(f"s must be positive, got {s}")
    val, _ = integrate.quad(lambda t: math.exp(-lam * t**s), 0, np.inf, epsabs=1e-13, epsrel=1e-12, limit=400)
    return val


@dataclass(frozen=True)
class LimitParams:
    lam: float
    nu: float
    residual: float
    s: float | None = None


def solve_malthusian(nu: float, weights: WeightLaw, tol: float = 1e-10) -> float:
    """Root ``lambda > 0`` of ``nu * E exp(-lambda Y) = 1``."""
    if not nu > 1:
        raise ValueError(f"no Malthusian parameter: nu = {nu} <= 1 (critical or subcritical)")

    def f(lam):
        return nu * weights.laplace(lam) - 1.0

    hi = 1.0
    while f(hi) > 0:
        hi *= 2.0
        if hi > 1e8:
            raise RuntimeError("could not bracket the Malthusian parameter")
    lam = optimize.brentq(f, 0.0, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=500)
    if abs(f(lam)) >= tol:
        raise RuntimeError(f"Malthusian residual {abs(f(lam)):.3g} above {tol:g}")
    return lam


def malthusian_params(degrees: DegreeLaw, weights: WeightLaw) -> LimitParams:
    nu = degrees.nu
    lam = solve_malthusian(nu, weights)
    return LimitParams(lam, nu, abs(nu * weights.laplace(lam) - 1.0))


def complete_params(s: float) -> LimitParams:
    lam = lambda_s(s)
    return LimitParams(lam, math.inf, abs(ppp_laplace(lam, s) - 1.0), s)


# ---------------------------------------------------------------------------
# Unit weights: breadth-first trees
# ---------------------------------------------------------------------------

def bfst_limit_pmf(r: int) -> np.ndarray:
    """``P(D = k)`` for ``k = 1..r`` of the limiting breadth-first-tree degree
    on a random ``r``-regular graph (index 0 holds ``k = 1``)."""
    if r < 3:
        raise ValueError("need r >= 3")
    a = 1.0 / (r - 2)
    k = np.arange(1, r + 1, dtype=float)
    log_a = (
        special.gammaln(r) + special.gammaln(k - 1 + a)
        - math.log(r - 2) - special.gammaln(r + a) - special.gammaln(k)
    )
    return np.exp(log_a)


def _pgf_derivative(law: DegreeLaw):
    k = law.support.astype(float)
    p = law.pmf
    mask = p > 0
    k, p = k[mask], p[mask]

    def fprime(t):
        return float(np.dot(p * k, t ** (k - 1)))

    return fprime, fprime(1.0)


def gf_hatD_deterministic_weights(law: DegreeLaw, z: float) -> float:
    """``E z^D`` of the limiting tree degree under unit weights:
    ``z int_0^1 f'(t - (1-z) f'(f'(t)/f'(1)) / f'(1)) dt`` with ``f`` the pgf
    of the degree law."""
    if law.pmf[law.support < 3].sum() > 0:
        raise ValueError("identity needs degrees >= 3 almost surely")
    if not 0.0 <= z <= 1.0:
        raise ValueError("z must lie in [0, 1]")
    fp, fp1 = _pgf_derivative(law)

    def integrand(t):
        return fp(t - (1.0 - z) * fp(fp(t) / fp1) / fp1)

    val, _ = integrate.quad(integrand, 0.0, 1.0, epsabs=1e-12, epsrel=1e-11, limit=200)
    return z * val


# ---------------------------------------------------------------------------
# Exact formulas at s = 1 (complete graph, exponential weights)
# ---------------------------------------------------------------------------

def phi_W_s1(u):
    """Laplace transform of ``W ~ Exp(1)``."""
    return 1.0 / (1.0 + np.asarray(u, dtype=float))


def phi_W_regular(u, r: int):
    """Laplace transform of ``W`` on an ``r``-regular graph with exponential
    weights: a Gamma law with shape ``(r-1)/(r-2)`` and mean 1."""
    if r < 3:
        raise ValueError("need r >= 3")
    shape = (r - 1) / (r - 2)
    return (1.0 + np.asarray(u, dtype=float) / shape) ** (-shape)


def mu_up(m):
    return np.log1p(np.exp(-np.asarray(m, dtype=float)))


def mu_down(m):
    return np.log1p(np.exp(np.asarray(m, dtype=float)))


def prob_M_ge_s1(m):
    """``P(M >= m) = 1 / (1 + e^m)``: ``M`` is standard logistic at s = 1."""
    return special.expit(-np.asarray(m, dtype=float))


def prob_M_lt(m, w_samples):
    """``P(M < m) = E exp(-e^{-m} W)`` estimated from a pool of ``W``."""
    w = np.asarray(w_samples, dtype=float)
    m = np.atleast_1d(np.asarray(m, dtype=float))
    out = np.array([np.mean(np.exp(-math.exp(-mi) * w)) for mi in m])
    return out if out.size > 1 else float(out[0])


def geometric_half_pmf(k_max: int = 60) -> np.ndarray:
    """Limiting tree degree at s = 1: ``P(D = k) = 2^-k``, ``k >= 1``."""
    from .analysis import geometric_pmf

    return geometric_pmf(0.5, k_max)
