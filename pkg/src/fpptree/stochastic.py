"""Reproducible random sampling for every law used by the toolkit.

Streams are counter-based (Philox) and keyed by ``(seed, stream_id, *path)``
so that parallel replications never share state and can be re-created
independently of scheduling.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import integrate, special

DEFAULT_KMAX = 10**7


@dataclass(frozen=True)
class RngStream:
    """A named, splittable random stream.

    ``generator()`` always returns a fresh generator positioned at the start
    of the stream, so two calls with the same key give identical draws.
    """

    seed: int
    stream_id: int = 0
    path: tuple[int, ...] = ()

    def __post_init__(self):
        if not (0 <= self.seed < 2**64 and 0 <= self.stream_id < 2**64):
            raise ValueError("seed and stream_id must be 64-bit unsigned integers")

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(self.seed, spawn_key=(self.stream_id, *self.path))
        return np.random.Generator(np.random.Philox(ss))

    def child(self, *index: int) -> "RngStream":
        return RngStream(self.seed, self.stream_id, self.path + tuple(int(i) for i in index))


def as_generator(rng) -> np.random.Generator:
    """Accept an RngStream, a Generator or an int seed."""
    if isinstance(rng, np.random.Generator):
        return rng
    if isinstance(rng, RngStream):
        return rng.generator()
    if rng is None or isinstance(rng, (int, np.integer)):
        return np.random.Generator(np.random.Philox(rng))
    raise TypeError(f"cannot build a random generator from {type(rng).__name__}")


def stratified_uniforms(size: int, rng: np.random.Generator) -> np.ndarray:
    """One uniform in each of ``size`` equal strata of (0, 1), randomly permuted."""
    u = (np.arange(size) + rng.random(size)) / size
    rng.shuffle(u)
    return u


# ---------------------------------------------------------------------------
# Continuous laws
# ---------------------------------------------------------------------------

def sample_gumbel(rng, size=None):
    """Standard Gumbel draws, built literally as ``log(1/E)`` with ``E ~ Exp(1)``."""
    gen = as_generator(rng)
    return -np.log(gen.standard_exponential(size))


def ppp_from_exponentials(exponentials, s: float) -> np.ndarray:
    """Points ``X_i = (E_1 + ... + E_i)**s`` for given exponential spacings."""
    if s <= 0:
        raise ValueError(f"s must be positive, got {s}")
    return np.cumsum(np.asarray(exponentials, dtype=float), axis=-1) ** s


def sample_ppp_prefix(s: float, count: int, rng) -> np.ndarray:
    """First ``count`` ordered points of the Poisson process with intensity
    ``(1/s) x**(1/s - 1) dx``."""
    if s <= 0:
        raise ValueError(f"s must be positive, got {s}")
    if count < 1:
        raise ValueError("count must be at least 1")
    gen = as_generator(rng)
    return ppp_from_exponentials(gen.standard_exponential(count), s)


@dataclass(frozen=True)
class WeightLaw:
    """Edge-weight law: ``exponential``, ``powered_exponential`` (E**s),
    ``uniform`` on (0, 1) or ``constant`` (all weights 1)."""

    kind: str = "exponential"
    s: float = 1.0

    KINDS = ("exponential", "powered_exponential", "uniform", "constant")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise ValueError(f"unknown weight law {self.kind!r}")
        if self.kind == "powered_exponential" and not self.s > 0:
            raise ValueError("powered_exponential needs s > 0")

    @classmethod
    def parse(cls, text: str) -> "WeightLaw":
        """Parse ``exponential``, ``uniform``, ``constant`` or ``powered:<s>``."""
        text = text.strip().lower()
        if text.startswith(("powered:", "powered_exponential:")):
            s = float(text.split(":", 1)[1])
            return cls("exponential") if s == 1 else cls("powered_exponential", s)
        return cls(text)

    def __str__(self):
        return f"powered:{self.s:g}" if self.kind == "powered_exponential" else self.kind

    @property
    def is_continuous(self) -> bool:
        return self.kind != "constant"

    def ppf(self, u):
        u = np.asarray(u, dtype=float)
        if self.kind == "exponential":
            return -np.log1p(-u)
        if self.kind == "powered_exponential":
            return (-np.log1p(-u)) ** self.s
        if self.kind == "uniform":
            return u
        return np.ones_like(u)

    def sample(self, rng, size=None):
        gen = as_generator(rng)
        if self.kind == "exponential":
            return gen.standard_exponential(size)
        if self.kind == "powered_exponential":
            return gen.standard_exponential(size) ** self.s
        if self.kind == "uniform":
            # open interval: weights must be strictly positive
            return 1.0 - gen.random(size)
        return np.ones(size) if size is not None else 1.0

    def mean(self) -> float:
        if self.kind == "exponential":
            return 1.0
        if self.kind == "powered_exponential":
            return math.gamma(1 + self.s)
        if self.kind == "uniform":
            return 0.5
        return 1.0

    def laplace(self, lam: float) -> float:
        """``E exp(-lam * Y)``."""
        if self.kind == "exponential":
            return 1.0 / (1.0 + lam)
        if self.kind == "uniform":
            return -math.expm1(-lam) / lam if lam > 0 else 1.0
        if self.kind == "constant":
            return math.exp(-lam)
        s = self.s
        val, _ = integrate.quad(
            lambda e: math.exp(-lam * e**s - e), 0, np.inf, epsabs=1e-14, epsrel=1e-13, limit=200
        )
        return val

    def has_exponential_moment(self, lam: float) -> bool:
        """Whether ``E exp(lam * Y)`` is finite."""
        if self.kind in ("uniform", "constant"):
            return True
        if self.kind == "exponential":
            return lam < 1
        return self.s < 1 or (self.s == 1 and lam < 1)


# ---------------------------------------------------------------------------
# Degree laws
# ---------------------------------------------------------------------------

@dataclass(eq=False)
class DegreeLaw:
    """A law on the nonnegative integers stored as a table on ``k_lo..k_hi``.

    Build with :meth:`fixed`, :meth:`powerlaw`, :meth:`explicit` or
    :meth:`from_file`. ``infinite_mean`` flags a table standing in for a law
    whose untruncated mean diverges (a size-biased power law with tau <= 3).
    """

    kind: str
    params: dict
    k_lo: int
    pmf: np.ndarray
    infinite_mean: bool = False
    truncated_mass: float = 0.0
    _neg_sf: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        pmf = np.asarray(self.pmf, dtype=float)
        if pmf.ndim != 1 or pmf.size == 0 or np.any(pmf < 0):
            raise ValueError("pmf must be a nonempty nonnegative vector")
        if self.k_lo < 0:
            raise ValueError("degrees must be nonnegative")
        total = pmf.sum()
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"pmf sums to {total!r}, not 1")
        self.pmf = pmf / total
        # accumulate from the tail so small probabilities keep full precision
        sf = np.cumsum(self.pmf[::-1])[::-1]
        sf[0] = 1.0
        self._neg_sf = -sf

    # -- constructors -------------------------------------------------------
    @classmethod
    def fixed(cls, r: int) -> "DegreeLaw":
        if r < 1:
            raise ValueError("fixed degree must be at least 1")
        return cls("fixed", {"r": int(r)}, int(r), np.ones(1))

    @classmethod
    def powerlaw(cls, tau: float, d_min: int = 1, k_max: int = DEFAULT_KMAX) -> "DegreeLaw":
        """``P(D = k)`` proportional to ``k**-tau`` for ``k >= d_min``; mass
        above ``k_max`` is folded into the atom at ``k_max``."""
        if not tau > 2:
            raise ValueError("power law needs tau > 2")
        if d_min < 1 or k_max < d_min:
            raise ValueError("need 1 <= d_min <= k_max")
        k = np.arange(d_min, k_max + 1, dtype=float)
        norm = special.zeta(tau, d_min)
        pmf = k**-tau / norm
        tail = special.zeta(tau, k_max + 1) / norm
        pmf[-1] += tail
        return cls(
            "powerlaw",
            {"tau": float(tau), "d_min": int(d_min), "k_max": int(k_max)},
            int(d_min),
            pmf,
            truncated_mass=float(tail),
        )

    @classmethod
    def explicit(cls, table: dict) -> "DegreeLaw":
        ks = sorted(int(k) for k in table)
        if not ks or ks[0] < 0:
            raise ValueError("explicit pmf needs nonnegative integer support")
        pmf = np.zeros(ks[-1] - ks[0] + 1)
        for k, p in table.items():
            pmf[int(k) - ks[0]] += float(p)
        return cls("explicit", {}, ks[0], pmf)

    @classmethod
    def from_file(cls, path) -> "DegreeLaw":
        """Read a two-column ``k p_k`` table; ``#`` starts a comment."""
        table: dict[int, float] = {}
        for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            try:
                if len(parts) != 2:
                    raise ValueError
                k, p = int(parts[0]), float(parts[1])
            except ValueError:
                raise ValueError(f"{path}:{lineno}: expected 'k p_k', got {line!r}") from None
            table[k] = table.get(k, 0.0) + p
        law = cls.explicit(table)
        law.params = {"file": str(path)}
        return law

    @classmethod
    def parse(cls, text: str) -> "DegreeLaw":
        """``fixed:<r>``, ``powerlaw:<tau>[:<d_min>[:<k_max>]]`` or ``file:<path>``."""
        head, _, rest = text.partition(":")
        args = rest.split(":") if rest else []
        if head == "fixed":
            return cls.fixed(int(args[0]))
        if head == "powerlaw":
            tau = float(args[0])
            d_min = int(args[1]) if len(args) > 1 else 1
            k_max = int(float(args[2])) if len(args) > 2 else DEFAULT_KMAX
            return cls.powerlaw(tau, d_min, k_max)
        if head == "file":
            return cls.from_file(rest)
        raise ValueError(f"cannot parse degree law {text!r}")

    def __str__(self):
        if self.kind == "fixed":
            return f"fixed:{self.params['r']}"
        if self.kind == "powerlaw":
            p = self.params
            return f"powerlaw:{p['tau']:g}:{p['d_min']}:{p['k_max']}"
        if self.kind == "size_biased":
            return f"size_biased({self.params['base']})"
        if "file" in self.params:
            return f"file:{self.params['file']}"
        return "explicit:" + ",".join(f"{k}={p:.6g}" for k, p in self.items())

    # -- table access -------------------------------------------------------
    @property
    def k_hi(self) -> int:
        return self.k_lo + self.pmf.size - 1

    @property
    def support(self) -> np.ndarray:
        return np.arange(self.k_lo, self.k_hi + 1)

    def items(self):
        return [(int(k), float(p)) for k, p in zip(self.support, self.pmf) if p > 0]

    def prob(self, k: int) -> float:
        i = k - self.k_lo
        return float(self.pmf[i]) if 0 <= i < self.pmf.size else 0.0

    def moment(self, order: int) -> float:
        k = self.support.astype(float)
        return float(np.dot(self.pmf, k**order))

    def mean(self) -> float:
        return self.moment(1)

    def factorial_moment(self, order: int) -> float:
        k = self.support.astype(float)
        ff = np.ones_like(k)
        for j in range(order):
            ff *= k - j
        return float(np.dot(self.pmf, ff))

    @property
    def nu(self) -> float:
        """Mean forward degree ``E[D(D-1)] / E[D]``."""
        return self.factorial_moment(2) / self.mean()

    def sf(self, k):
        """``P(D >= k)``."""
        i = np.clip(np.asarray(k) - self.k_lo, 0, self.pmf.size)
        return np.append(-self._neg_sf, 0.0)[i]

    def ppf(self, u):
        """Inverse of the survival function: the largest ``k`` with
        ``P(D >= k) >= 1 - u``. Accepts any ``u`` in [0, 1)."""
        v = 1.0 - np.asarray(u, dtype=float)
        idx = np.searchsorted(self._neg_sf, -v, side="right") - 1
        return self.k_lo + np.clip(idx, 0, self.pmf.size - 1)

    def stratum_means(self, strata: int) -> np.ndarray:
        """``E[D | U in [j/m, (j+1)/m))`` for ``j < m`` with ``D = ppf(U)``."""
        k = self.support.astype(float)
        sf = -self._neg_sf
        # tail sums keep full precision next to u = 1 on long tables
        tail = np.cumsum((k * self.pmf)[::-1])[::-1]
        u = np.arange(strata + 1) / strata
        i = np.clip(self.ppf(np.minimum(u, np.nextafter(1.0, 0.0))) - self.k_lo, 0, self.pmf.size - 1)
        # integral of the quantile function over [u, 1]
        upper = tail[i] - k[i] * (sf[i] - (1.0 - u))
        return -np.diff(upper) * strata

    def stratified_sample(self, size: int, rng) -> np.ndarray:
        """``size`` draws, one per equal stratum of the quantile scale, in
        random order. Each draw randomly rounds its stratum's conditional
        mean, which is exact in law for strata covering at most two atoms
        and exact in mean for the wide strata of a heavy tail."""
        gen = as_generator(rng)
        m = self.stratum_means(size)
        lo = np.floor(m)
        out = (lo + (gen.random(size) < m - lo)).astype(np.int64)
        gen.shuffle(out)
        return out

    def sample(self, rng, size=None):
        gen = as_generator(rng)
        if self.pmf.size == 1:
            return np.full(size, self.k_lo, dtype=np.int64) if size is not None else self.k_lo
        out = self.ppf(gen.random(size))
        return out.astype(np.int64) if size is not None else int(out)


def sample_degree(law: DegreeLaw, rng, size=None):
    return law.sample(rng, size)


def size_biased(law: DegreeLaw) -> DegreeLaw:
    """Law of ``D*`` with ``P(D* = k) = k P(D = k) / E(D)``.

    The result carries ``nu = E(D* - 1)`` in ``params`` and flags
    ``infinite_mean`` when it stands for a power law with tau <= 3.
    """
    if law.kind == "size_biased":
        raise ValueError("size-biasing is applied once; the input is already size-biased")
    mean = law.mean()
    if not mean > 0:
        raise ValueError("size-biasing needs a positive mean")
    k = law.support.astype(float)
    weighted = k * law.pmf / mean
    nz = np.flatnonzero(weighted)
    lo = int(nz[0])
    biased = DegreeLaw(
        "size_biased",
        {"base": str(law), "nu": law.nu},
        law.k_lo + lo,
        weighted[lo:],
        infinite_mean=law.kind == "powerlaw" and law.params["tau"] <= 3,
    )
    biased.base = law
    return biased
