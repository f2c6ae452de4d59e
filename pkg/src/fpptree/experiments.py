"""Declarative experiments and their CSV outputs.

Each experiment takes an :class:`ExperimentConfig` and returns an
:class:`ExperimentResult` holding tables and summary statistics. Random
streams are derived from ``(seed, stream, replicate)`` only, so results do
not depend on the number of worker threads.
"""
from __future__ import annotations

import configparser
import csv
import hashlib
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import (
    DegreeDistribution, estimate_tail_exponent, geometric_pmf, ks_statistic, rate_of_convergence_fit,
    recentered_path_lengths, recentering_check, tv_distance,
)
from .fpp import bfst, shortest_path_tree
from .graphs import build_complete_graph, configuration_model
from .hatd import (
    estimate_p, sample_hatD_cm_finite, sample_hatD_cm_infinite, sample_hatD_complete,
    sample_hatD_Y1, sample_hatDk_cm_finite, sample_hatDk_cm_infinite,
)
from .limits import bfst_limit_pmf, gf_hatD_deterministic_weights, solve_malthusian
from .pools import series_pool, solve_V, solve_W_cm, solve_W_complete
from .stochastic import DegreeLaw, RngStream, WeightLaw, sample_gumbel

EXPERIMENTS = (
    "fig1-powerlaw", "fig2-regular", "complete-s-grid", "oracle-vs-sim",
    "rate-of-conv", "bfst-identity", "recentering", "infvar",
)

# stream ids: one independent family per role
GRAPH, SOURCES, POOL, DRAWS, EXTRA = 1, 2, 3, 4, 5


class ConfigError(ValueError):
    """Invalid experiment configuration."""


@dataclass
class ExperimentConfig:
    experiment: str = "oracle-vs-sim"
    n: int = 100_000
    degree_law: str = "fixed:4"
    weight_law: str = "exponential"
    s: float = 1.0
    s_grid: str = "0.5,1,2"
    tau: float = 3.5
    d_min: int = 5
    r: int = 100
    k_grid: str = "64,128,256,512,1024,2048,4096,8192,16384"
    n_grid: str = "1000,4000"
    replications: int = 20
    draws: int = 1_000_000
    draws_per_k: int = 10_000
    pool_size: int = 100_000
    iters: int = 200
    targets: int = 1
    seed: int = 1
    threads: int = 1
    output_dir: str = "out"

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment {self.experiment!r}; choose from {', '.join(EXPERIMENTS)}")
        for name in ("n", "replications", "draws", "draws_per_k", "pool_size", "iters", "threads", "targets"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be positive")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed must be a 64-bit unsigned integer")
        try:
            # power-law tables are large; their parameters are checked on use
            if not self.degree_law.startswith("powerlaw:"):
                DegreeLaw.parse(self.degree_law)
            WeightLaw.parse(self.weight_law)
            self.floats(self.s_grid)
            self.ints(self.k_grid)
            self.ints(self.n_grid)
        except (ValueError, IndexError) as exc:
            raise ConfigError(str(exc)) from None

    @staticmethod
    def floats(text: str) -> list[float]:
        return [float(t) for t in text.split(",") if t.strip()]

    @staticmethod
    def ints(text: str) -> list[int]:
        return [int(float(t)) for t in text.split(",") if t.strip()]

    @classmethod
    def keys(cls) -> list[str]:
        return [f.name for f in fields(cls)]

    @classmethod
    def from_mapping(cls, values: dict) -> "ExperimentConfig":
        known = {f.name: f for f in fields(cls)}
        kwargs = {}
        for key, raw in values.items():
            key = key.replace("-", "_")
            if key not in known:
                raise ConfigError(f"unknown config key {key!r}")
            typ = known[key].type
            try:
                if typ in ("int", int):
                    kwargs[key] = int(float(raw))
                elif typ in ("float", float):
                    kwargs[key] = float(raw)
                else:
                    kwargs[key] = str(raw)
            except ValueError:
                raise ConfigError(f"bad value for {key}: {raw!r}") from None
        return cls(**kwargs)

    @classmethod
    def from_file(cls, path, overrides: dict | None = None) -> "ExperimentConfig":
        """Read ``key = value`` lines grouped in ``[sections]``; section names
        are only for readability. ``overrides`` win over the file."""
        parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
        try:
            text = Path(path).read_text()
            if not text.lstrip().startswith("["):
                text = "[experiment]\n" + text
            parser.read_string(text, source=str(path))
        except (OSError, configparser.Error) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        values = {}
        for section in parser.sections():
            values.update(parser.items(section))
        values.update(overrides or {})
        return cls.from_mapping(values)

    def resolved(self) -> dict:
        return asdict(self)

    def digest(self) -> str:
        # output location and thread count do not change results
        items = {k: v for k, v in self.resolved().items() if k not in ("output_dir", "threads")}
        blob = "\n".join(f"{k}={items[k]}" for k in sorted(items))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]

    def stream(self, role: int, *path: int) -> RngStream:
        return RngStream(self.seed, role, tuple(path))

    def powerlaw(self) -> DegreeLaw:
        return DegreeLaw.powerlaw(self.tau, self.d_min)

    def degrees(self) -> DegreeLaw:
        return DegreeLaw.parse(self.degree_law)


@dataclass
class Table:
    columns: list
    rows: np.ndarray


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    tables: dict = field(default_factory=dict)
    stats: list = field(default_factory=list)

    def stat(self, name: str, value, stderr=float("nan")) -> None:
        self.stats.append((name, float(value), float(stderr)))

    def value(self, name: str) -> float:
        for key, v, _ in self.stats:
            if key == name:
                return v
        raise KeyError(name)

    def header(self) -> str:
        cfg = self.config
        lines = [f"# experiment={cfg.experiment}", f"# config_hash={cfg.digest()}",
                 f"# seed={cfg.seed}", f"# version={__version__}"]
        lines += [f"# {k}={v}" for k, v in sorted(cfg.resolved().items())
                  if k not in ("experiment", "seed", "output_dir", "threads")]
        return "\n".join(lines) + "\n"

    def render(self, name: str) -> str:
        buf = io.StringIO()
        buf.write(self.header())
        w = csv.writer(buf, lineterminator="\n")
        if name == "stats":
            w.writerow(["experiment", "seed", "statistic", "value", "stderr"])
            for key, v, se in self.stats:
                w.writerow([self.config.experiment, self.config.seed, key, repr(v), repr(se)])
        else:
            table = self.tables[name]
            w.writerow(table.columns)
            for row in table.rows:
                w.writerow([_fmt(x) for x in row])
        return buf.getvalue()

    def write(self, out_dir=None) -> list[Path]:
        out = Path(out_dir or self.config.output_dir)
        out.mkdir(parents=True, exist_ok=True)
        paths = []
        for name in [*self.tables, "stats"]:
            p = out / f"{self.config.experiment}_{name}.csv"
            p.write_text(self.render(name))
            paths.append(p)
        return paths


def _fmt(x):
    x = float(x)
    return str(int(x)) if x.is_integer() and abs(x) < 2**53 else repr(x)


def _parallel(fn, count: int, threads: int):
    """``[fn(i) for i in range(count)]``, possibly on threads; order kept."""
    if threads <= 1:
        return [fn(i) for i in range(count)]
    with ThreadPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(fn, range(count)))


def pmf_table(dists: dict[str, DegreeDistribution]) -> Table:
    """Columns ``k, p_<name>, q_<name>`` over the union of supports."""
    kmax = max(d.k_max for d in dists.values())
    k = np.arange(kmax + 1)
    cols, data = ["k"], [k]
    for name, d in dists.items():
        p = np.pad(d.pmf, (0, kmax + 1 - d.pmf.size))
        cols += [f"p_{name}", f"q_{name}"]
        data += [p, np.cumsum(p[::-1])[::-1]]
    return Table(cols, np.column_stack(data))


# ---------------------------------------------------------------------------
# Simulation helpers
# ---------------------------------------------------------------------------

def tree_degrees_over_sources(graph, cfg: ExperimentConfig, tree: str = "spt"):
    """Tree-degree arrays (one per source), sources drawn from their own
    streams."""

    def one(i):
        gen = cfg.stream(SOURCES, i).generator()
        src = int(gen.integers(graph.n))
        t = bfst(graph, src, gen) if tree == "bfst" else shortest_path_tree(graph, src)
        return t.tree_degree

    return _parallel(one, cfg.replications, cfg.threads)


def pooled(degrees_list, reached_only: bool = False) -> DegreeDistribution:
    arrs = [d[d > 0] if reached_only else d for d in degrees_list]
    return DegreeDistribution.from_samples(np.concatenate(arrs))


# ---------------------------------------------------------------------------
# Experiments
# ---------------------------------------------------------------------------

def fig1_powerlaw(cfg: ExperimentConfig) -> ExperimentResult:
    """Graph versus tree degree tails on a power-law configuration model."""
    law = cfg.powerlaw()
    g = configuration_model(law, cfg.n, WeightLaw.parse(cfg.weight_law), cfg.stream(GRAPH))
    res = ExperimentResult(cfg)
    truth = DegreeDistribution.from_samples(g.degrees())
    per_source = tree_degrees_over_sources(g, cfg)
    tree = pooled(per_source)
    # a vertex keeps a similar tree degree from every source, so the tail
    # holds about n independent values, not n * sources
    tree.n = cfg.n
    res.tables["degrees"] = pmf_table({"truth": truth, "tree": tree})
    fit_g, fit_t = shared_decade_fits(truth, tree)
    res.stat("tau_graph", fit_g.tau_hat, fit_g.stderr)
    res.stat("tau_tree", fit_t.tau_hat, fit_t.stderr)
    res.stat("tau_abs_diff", abs(fit_g.tau_hat - fit_t.tau_hat))
    res.stat("hill_graph", fit_g.hill_tau, fit_g.hill_stderr)
    res.stat("hill_tree", fit_t.hill_tau, fit_t.hill_stderr)
    res.stat("k_min", fit_g.k_min)
    res.stat("k_max", fit_g.k_max)
    res.stat("reached_fraction", np.mean([(d > 0).mean() for d in per_source]))
    return res


def shared_decade_fits(truth: DegreeDistribution, tree: DegreeDistribution):
    """Regression fits of both tails over the same top decade: ``k_max`` is
    the largest ``k`` at which both tails still hold enough samples and
    ``k_min = k_max / 10``."""
    g0 = estimate_tail_exponent(truth)
    t0 = estimate_tail_exponent(tree)
    k_max = min(g0.k_max, t0.k_max)
    k_min = max(1, int(round(k_max / 10)))
    return (estimate_tail_exponent(truth, k_min, k_max),
            estimate_tail_exponent(tree, k_min, k_max))


def fig2_regular(cfg: ExperimentConfig) -> ExperimentResult:
    """Tree degrees on a random ``r``-regular graph against the geometric
    tail ``P(D > k) = 2^-k``."""
    law = DegreeLaw.fixed(cfg.r)
    g = configuration_model(law, cfg.n, WeightLaw.parse(cfg.weight_law), cfg.stream(GRAPH))
    res = ExperimentResult(cfg)
    tree = pooled(tree_degrees_over_sources(g, cfg))
    geo = DegreeDistribution(geometric_pmf(0.5, 60))
    res.tables["degrees"] = pmf_table({"tree": tree, "geometric": geo})
    k = np.arange(0, 12)
    ratio = tree.q(k + 1) / 2.0 ** (-k)
    res.stat("max_rel_dev_k_le_12", np.max(np.abs(ratio - 1)))
    res.stat("tv_vs_geometric", tv_distance(tree, geo))
    return res


def complete_s_grid(cfg: ExperimentConfig) -> ExperimentResult:
    """Oracle laws of the tree degree on the complete graph for several s,
    with a direct simulation at each s when ``n`` allows."""
    res = ExperimentResult(cfg)
    dists = {}
    for j, s in enumerate(cfg.floats(cfg.s_grid)):
        pool = solve_W_complete(s, cfg.pool_size, cfg.iters, rng=cfg.stream(POOL, j))
        hat, m = sample_hatD_complete(s, pool, cfg.draws, cfg.stream(DRAWS, j), return_M=True)
        d = DegreeDistribution.from_samples(hat)
        dists[f"oracle_s{s:g}"] = d
        res.stat(f"mean_hatD_s{s:g}", hat.mean(), hat.std() / math.sqrt(hat.size))
        res.stat(f"pool_mean_s{s:g}", pool.mean())
        if s == 1:
            res.stat("tv_vs_geometric_s1", tv_distance(d, geometric_pmf(0.5, 60)))
        if cfg.n <= 20_000:
            g = build_complete_graph(cfg.n, s, cfg.stream(GRAPH, j))
            sim = pooled(tree_degrees_over_sources(g, cfg))
            dists[f"sim_s{s:g}"] = sim
            res.stat(f"tv_sim_vs_oracle_s{s:g}", tv_distance(sim, d))
    res.tables["degrees"] = pmf_table(dists)
    return res


def oracle_vs_sim(cfg: ExperimentConfig) -> ExperimentResult:
    """Configuration model, finite variance: simulated tree degrees against
    draws of the limit law."""
    law = cfg.degrees()
    w = WeightLaw.parse(cfg.weight_law)
    g = configuration_model(law, cfg.n, w, cfg.stream(GRAPH))
    res = ExperimentResult(cfg)
    sim = pooled(tree_degrees_over_sources(g, cfg))
    lam = solve_malthusian(law.nu, w)
    pool = solve_W_cm(law, w, lam, cfg.pool_size, cfg.iters, rng=cfg.stream(POOL))
    hat = sample_hatD_cm_finite(law, pool, lam, w, cfg.draws, cfg.stream(DRAWS))
    oracle = DegreeDistribution.from_samples(hat)
    res.tables["degrees"] = pmf_table({"sim": sim, "oracle": oracle})
    res.stat("lambda", lam)
    res.stat("pool_mean", pool.mean())
    res.stat("mean_hatD", hat.mean(), hat.std() / math.sqrt(hat.size))
    res.stat("tv_sim_vs_oracle", tv_distance(sim, oracle))
    return res


def rate_of_conv(cfg: ExperimentConfig) -> ExperimentResult:
    """Mean deficit ``k - D_hat_k`` and ``M_k - log k`` along a grid of k."""
    law = cfg.degrees()
    w = WeightLaw.parse(cfg.weight_law)
    lam = solve_malthusian(law.nu, w)
    pool = solve_W_cm(law, w, lam, cfg.pool_size, cfg.iters, rng=cfg.stream(POOL))
    ks = np.array(cfg.ints(cfg.k_grid))
    draws = cfg.draws_per_k
    rows = []
    for i, k in enumerate(ks):
        hat, m = sample_hatDk_cm_finite(int(k), pool, lam, w, draws, cfg.stream(DRAWS, i), return_M=True)
        deficit = k - hat
        rows.append((k, deficit.mean(), deficit.std() / math.sqrt(draws), np.median(m - math.log(k))))
    rows = np.array(rows)
    res = ExperimentResult(cfg)
    res.tables["deficit"] = Table(["k", "mean_deficit", "stderr", "median_M_minus_logk"], rows)
    fit = rate_of_convergence_fit(rows[:, 0], rows[:, 1])
    res.stat("lambda", lam)
    res.stat("alpha_hat", fit.alpha, fit.stderr)
    res.stat("alpha_theory", 1 - 1 / lam if lam > 1 else 0.0)
    res.stat("rss_power", fit.rss_power)
    res.stat("rss_log", fit.rss_log)
    res.stat("log_model_wins", float(fit.preferred == "log"))
    res.stat("max_deficit", rows[:, 1].max())
    res.stat("first_deficit", rows[0, 1])
    res.stat("median_M_spread", np.ptp(rows[:, 3]))
    return res


def bfst_identity(cfg: ExperimentConfig) -> ExperimentResult:
    """Unit-weight trees: the exact ``a_k^(r)`` law, the generating-function
    identity, its Monte Carlo sampler and a simulated breadth-first tree."""
    r = cfg.r
    res = ExperimentResult(cfg)
    a = bfst_limit_pmf(r)
    law = DegreeLaw.fixed(r)
    zs = np.array([0.25, 0.5, 0.75])
    gf = np.array([gf_hatD_deterministic_weights(law, z) for z in zs])
    series = np.array([np.dot(a, z ** np.arange(1, r + 1)) for z in zs])
    hat = sample_hatD_Y1(law, cfg.draws, cfg.stream(DRAWS), pool_size=cfg.pool_size)
    mc = np.array([np.mean(z**hat) for z in zs])
    res.tables["gf"] = Table(["z", "quadrature", "series", "monte_carlo"], np.column_stack([zs, gf, series, mc]))
    res.stat("max_abs_gf_vs_series", np.max(np.abs(gf - series)))
    res.stat("max_abs_mc_vs_gf", np.max(np.abs(mc - gf)))
    g = configuration_model(law, cfg.n, WeightLaw("constant"), cfg.stream(GRAPH))
    sim = pooled(tree_degrees_over_sources(g, cfg, tree="bfst"))
    exact = DegreeDistribution(np.concatenate([[0.0], a]))
    res.tables["degrees"] = pmf_table({"bfst": sim, "exact": exact})
    res.stat("tv_bfst_vs_exact", tv_distance(sim, exact))
    res.stat("sum_a", a.sum())
    return res


def recentering(cfg: ExperimentConfig) -> ExperimentResult:
    """Recentered typical distances on the complete graph for several n."""
    res = ExperimentResult(cfg)
    samples = {}
    for j, n in enumerate(cfg.ints(cfg.n_grid)):
        per_graph = max(1, min(n // 2, 500))
        graphs = max(1, math.ceil(cfg.replications / per_graph))
        x = recentered_path_lengths(n, cfg.s, graphs, min(per_graph, cfg.replications), cfg.targets,
                                    cfg.stream(GRAPH, j))
        samples[n] = x[: cfg.replications]
    pool = solve_W_complete(cfg.s, cfg.pool_size, cfg.iters, rng=cfg.stream(POOL))
    gen = cfg.stream(DRAWS).generator()
    size = 10 * cfg.pool_size
    # limit law -Lambda - log W_source - log W_target with independent copies
    oracle = -sample_gumbel(gen, size) - np.log(pool.draw(gen, size)) - np.log(pool.draw(gen, size))
    chk = recentering_check(samples, oracle)
    for (a, b), d in zip(zip(chk.ns[:-1], chk.ns[1:]), chk.ks_consecutive):
        res.stat(f"ks_n{a}_vs_n{b}", d)
    res.stat("mean_top_n", chk.mean, chk.mean_stderr)
    res.stat("ks_vs_oracle", chk.ks_oracle)
    res.stat("oracle_mean", oracle.mean())
    qs = np.linspace(0.01, 0.99, 99)
    cols = ["quantile"] + [f"n{n}" for n in chk.ns] + ["oracle"]
    data = [qs] + [np.quantile(chk.samples[n][:, 0], qs) for n in chk.ns] + [np.quantile(oracle, qs)]
    res.tables["quantiles"] = Table(cols, np.column_stack(data))
    return res


def infvar(cfg: ExperimentConfig) -> ExperimentResult:
    """Infinite-variance degrees: both representations of ``V`` and the
    tree degree laws built from them."""
    law = cfg.powerlaw()
    res = ExperimentResult(cfg)
    pv = solve_V(law, cfg.pool_size, cfg.iters, rng=cfg.stream(POOL, 0))
    ps = series_pool(law, cfg.pool_size, rng=cfg.stream(POOL, 1))
    res.stat("ks_min_vs_series", ks_statistic(pv.samples, ps.samples))
    hat = sample_hatD_cm_infinite(law, pv, cfg.draws, cfg.stream(DRAWS, 0))
    res.stat("mean_hatD", hat.mean(), hat.std() / math.sqrt(hat.size))
    p = estimate_p(pv, cfg.draws, cfg.stream(DRAWS, 1))
    res.stat("p_hat", p)
    rows = []
    for i, k in enumerate(cfg.ints(cfg.k_grid)):
        hk = sample_hatDk_cm_infinite(k, pv, max(1, min(cfg.draws_per_k, 10**7 // k)), cfg.stream(DRAWS, 2, i))
        rows.append((k, hk.mean() / k))
    rows = np.array(rows)
    res.tables["ratio"] = Table(["k", "mean_hatDk_over_k"], rows)
    res.stat("ratio_at_top_k", rows[-1, 1])
    res.stat("abs_ratio_minus_p", abs(rows[-1, 1] - p))
    res.tables["degrees"] = pmf_table({"oracle": DegreeDistribution.from_samples(hat)})
    return res


RUNNERS = {
    "fig1-powerlaw": fig1_powerlaw,
    "fig2-regular": fig2_regular,
    "complete-s-grid": complete_s_grid,
    "oracle-vs-sim": oracle_vs_sim,
    "rate-of-conv": rate_of_conv,
    "bfst-identity": bfst_identity,
    "recentering": recentering,
    "infvar": infvar,
}


def run(cfg: ExperimentConfig) -> ExperimentResult:
    return RUNNERS[cfg.experiment](cfg)
