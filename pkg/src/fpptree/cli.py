"""Command-line driver.

Subcommands share the text formats of the library: edge lists, SPT tables,
pool files, one-value-per-line sample files and CSV statistics. Exit codes:
0 success, 1 failed pool diagnostic, 2 invalid configuration or input,
3 resource cap exceeded.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import DegreeDistribution, estimate_tail_exponent, geometric_pmf, ks_statistic, tv_distance
from .experiments import EXPERIMENTS, ConfigError, ExperimentConfig, run as run_experiment
from .fpp import bfst, shortest_path_tree
from .graphs import (
    DEFAULT_DENSE_EDGE_CAP, ResourceCapError, build_complete_graph, configuration_model,
    read_edge_list, write_degree_sequence, write_edge_list,
)
from .hatd import (
    PointBudgetExceeded, sample_hatD_cm_finite, sample_hatD_cm_infinite, sample_hatD_complete,
    sample_hatD_Y1, sample_hatDk_cm_finite, sample_hatDk_cm_infinite,
)
from .limits import bfst_limit_pmf, solve_malthusian
from .pools import PoolDiagnosticError, SamplePool, series_pool, solve_V, solve_W_cm, solve_W_complete
from .stochastic import DegreeLaw, RngStream, WeightLaw, sample_gumbel

EXIT_OK, EXIT_FAILED, EXIT_CONFIG, EXIT_CAP = 0, 1, 2, 3


class UsageError(ValueError):
    pass


def _degree_law(args) -> DegreeLaw:
    if getattr(args, "powerlaw", None) is not None:
        return DegreeLaw.powerlaw(args.powerlaw, args.dmin)
    if getattr(args, "fixed", None) is not None:
        return DegreeLaw.fixed(args.fixed)
    if getattr(args, "degree_law", None):
        return DegreeLaw.parse(args.degree_law)
    raise UsageError("give a degree law: --fixed R, --powerlaw TAU [--dmin D] or --degree-law SPEC")


def _add_degree_args(p):
    p.add_argument("--fixed", type=int, metavar="R", help="every degree equals R")
    p.add_argument("--powerlaw", type=float, metavar="TAU", help="P(D=k) ~ k^-TAU")
    p.add_argument("--dmin", type=int, default=1, help="smallest power-law degree")
    p.add_argument("--degree-law", metavar="SPEC", help="fixed:R | powerlaw:TAU[:DMIN[:KMAX]] | file:PATH")


def _stream(args, role: int) -> RngStream:
    return RngStream(args.seed, role)


def _write_samples(path, values, header: dict) -> None:
    with open(path, "w") as fh:
        for k, v in header.items():
            fh.write(f"# {k}={v}\n")
        fmt = "%d" if np.issubdtype(np.asarray(values).dtype, np.integer) else "%.17g"
        np.savetxt(fh, values, fmt=fmt)


def _read_samples(path) -> np.ndarray:
    vals = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            try:
                vals.append(float(line))
            except ValueError:
                raise UsageError(f"{path}:{lineno}: not a number: {line!r}") from None
    return np.array(vals)


def _parse_reference(spec: str):
    """``geometric:P``, ``bfst:R``, ``exp:RATE`` or a sample/pmf file."""
    head, _, rest = spec.partition(":")
    if head == "geometric":
        return "pmf", geometric_pmf(float(rest), 200)
    if head == "bfst":
        return "pmf", np.concatenate([[0.0], bfst_limit_pmf(int(rest))])
    if head == "exp":
        rate = float(rest or 1)
        return "cdf", lambda x: 1.0 - np.exp(-rate * np.asarray(x))
    if head == "gumbel":
        return "cdf", lambda x: np.exp(-np.exp(-np.asarray(x)))
    if Path(spec).exists():
        return "samples", _read_samples(spec)
    raise UsageError(f"unknown reference {spec!r}")


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def cmd_generate(args) -> int:
    gen = _stream(args, 1).generator()
    if args.complete:
        g = build_complete_graph(args.n, args.s, gen, max_edges=args.max_edges)
    else:
        law = _degree_law(args)
        g = configuration_model(law, args.n, WeightLaw.parse(args.weights), gen)
        if args.degrees_out:
            write_degree_sequence(g.degrees(), args.degrees_out)
    write_edge_list(g, args.out)
    print(f"wrote {g.num_edges} edges on {g.n} vertices to {args.out}")
    return EXIT_OK


def _tree_command(args, kind: str) -> int:
    g = read_edge_list(args.graph)
    gen = _stream(args, 2).generator()
    src = int(gen.integers(g.n)) if args.source == "random" else int(args.source)
    t = bfst(g, src, gen) if kind == "bfst" else shortest_path_tree(g, src)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    t.write(out / f"{kind}_tree.txt")
    header = f"# source={src}\n# seed={args.seed}\n# version={__version__}\n# graph={args.graph}\n"
    for name, dist in (
        ("all", DegreeDistribution.from_samples(t.tree_degree)),
        ("reached", DegreeDistribution.from_samples(t.tree_degree[t.reached_mask])),
        ("graph", DegreeDistribution.from_samples(g.degrees())),
    ):
        rows = dist.table()
        with open(out / f"{kind}_degrees_{name}.csv", "w") as fh:
            fh.write(header)
            fh.write("k,p_k,q_k\n")
            np.savetxt(fh, rows, fmt=["%d", "%.17g", "%.17g"], delimiter=",")
    print(f"source {src}: reached {t.reached} of {t.n}; outputs in {out}")
    return EXIT_OK


def cmd_pool(args) -> int:
    gen = _stream(args, 3)
    if args.target == "w-complete":
        pool = solve_W_complete(args.s, args.size, args.iters, rng=gen)
    elif args.target == "w-cm":
        law = _degree_law(args)
        pool = solve_W_cm(law, WeightLaw.parse(args.weights), pool_size=args.size, iters=args.iters, rng=gen)
    elif args.target == "v":
        pool = solve_V(_degree_law(args), args.size, args.iters, rng=gen)
    else:
        pool = series_pool(_degree_law(args), args.size, rng=gen, cutoff=args.cutoff)
    pool.meta["seed"] = args.seed
    pool.write(args.out)
    print(f"pool {pool.target}: {pool.size} samples, mean {pool.mean():.5f}, "
          f"sweeps {pool.generation}, converged {pool.converged}")
    return EXIT_OK


def cmd_sample(args) -> int:
    gen = _stream(args, 4)
    pool_gen = _stream(args, 3)
    pool = SamplePool.read(args.pool) if args.pool else None
    header = {"sampler": args.kind, "seed": args.seed, "draws": args.n, "version": __version__}
    if args.kind in ("hatd-complete", "m-complete"):
        pool = pool or solve_W_complete(args.s, args.pool_size, rng=pool_gen)
        hat, m = sample_hatD_complete(args.s, pool, args.n, gen, delta=args.delta, return_M=True)
        values = hat if args.kind == "hatd-complete" else m
        header["s"] = args.s
    elif args.kind in ("hatd-cm", "hatdk-cm", "m-cm"):
        w = WeightLaw.parse(args.weights)
        if pool is None:
            law = _degree_law(args)
            lam = solve_malthusian(law.nu, w)
            pool = solve_W_cm(law, w, lam, args.pool_size, rng=pool_gen)
        else:
            lam = float(pool.meta["lam"])
        if args.kind == "hatd-cm":
            values = sample_hatD_cm_finite(_degree_law(args), pool, lam, w, args.n, gen)
        else:
            hat, m = sample_hatDk_cm_finite(args.k, pool, lam, w, args.n, gen, return_M=True)
            values = hat if args.kind == "hatdk-cm" else m
        header.update(lam=lam, weights=str(w), k=args.k)
    elif args.kind in ("hatd-inf", "hatdk-inf"):
        law = _degree_law(args)
        pool = pool or solve_V(law, args.pool_size, rng=pool_gen)
        if args.kind == "hatd-inf":
            values = sample_hatD_cm_infinite(law, pool, args.n, gen)
        else:
            values = sample_hatDk_cm_infinite(args.k, pool, args.n, gen)
    elif args.kind == "hatd-y1":
        values = sample_hatD_Y1(_degree_law(args), args.n, gen, pool_size=args.pool_size)
    else:  # gumbel
        values = sample_gumbel(gen, args.n)
    _write_samples(args.out, values, header)
    print(f"wrote {len(values)} draws to {args.out} (mean {np.mean(values):.5f})")
    return EXIT_OK


def cmd_analyze(args) -> int:
    x = _read_samples(args.input)
    if x.size == 0:
        raise UsageError(f"{args.input}: no samples")
    rows = [("mean", x.mean(), x.std(ddof=1) / np.sqrt(x.size) if x.size > 1 else float("nan"))]
    if args.tv or args.tail:
        dist = DegreeDistribution.from_samples(x.astype(np.int64))
    if args.tv:
        kind, ref = _parse_reference(args.against)
        if kind == "samples":
            ref = DegreeDistribution.from_samples(ref.astype(np.int64))
        elif kind != "pmf":
            raise UsageError("--tv needs a pmf reference (geometric:P, bfst:R or a sample file)")
        rows.append(("tv", tv_distance(dist, ref), float("nan")))
    if args.ks:
        kind, ref = _parse_reference(args.against)
        if kind == "pmf":
            raise UsageError("--ks needs a cdf or sample reference")
        rows.append(("ks", ks_statistic(x, ref), float("nan")))
    if args.tail:
        fit = estimate_tail_exponent(dist, args.k_min)
        rows += [("tau_ccdf", fit.tau_hat, fit.stderr), ("tau_hill", fit.hill_tau, fit.hill_stderr),
                 ("tail_k_min", fit.k_min, float("nan")), ("curvature", fit.curvature, float("nan"))]
    text = "experiment,seed,statistic,value,stderr\n" + "".join(
        f"analyze,{args.seed},{k},{float(v)!r},{float(se)!r}\n" for k, v, se in rows
    )
    if args.out:
        Path(args.out).write_text(f"# input={args.input}\n# version={__version__}\n" + text)
    sys.stdout.write(text)
    return EXIT_OK


def cmd_run(args) -> int:
    overrides = {}
    for item in args.set or []:
        key, eq, val = item.partition("=")
        if not eq:
            raise ConfigError(f"--set expects key=value, got {item!r}")
        overrides[key.strip()] = val.strip()
    for key in ("experiment", "seed", "threads"):
        if getattr(args, key) is not None:
            overrides[key] = getattr(args, key)
    if args.out is not None:
        overrides["output_dir"] = args.out
    if args.config:
        cfg = ExperimentConfig.from_file(args.config, overrides)
    else:
        cfg = ExperimentConfig.from_mapping(overrides)
    res = run_experiment(cfg)
    for p in res.write():
        print(p)
    for key, v, se in res.stats:
        print(f"{key} = {v:.6g}" + (f" +- {se:.2g}" if np.isfinite(se) else ""))
    return EXIT_OK


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="fpptree", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, out):
        p.add_argument("--seed", type=int, default=1)
        p.add_argument("--threads", type=int, default=1, help="worker threads (results do not depend on it)")
        p.add_argument("--out", default=out, help=f"output path (default {out})")

    p = sub.add_parser("generate", help="build a weighted graph and write its edge list")
    kind = p.add_mutually_exclusive_group(required=True)
    kind.add_argument("--cm", action="store_true", help="configuration model")
    kind.add_argument("--complete", action="store_true", help="complete graph with E^s weights")
    _add_degree_args(p)
    p.add_argument("-n", type=int, required=True)
    p.add_argument("--weights", default="exponential", help="exponential | uniform | constant | powered:S")
    p.add_argument("--s", type=float, default=1.0)
    p.add_argument("--max-edges", type=int, default=DEFAULT_DENSE_EDGE_CAP)
    p.add_argument("--degrees-out", help="also write the degree sequence here")
    common(p, "graph.txt")
    p.set_defaults(func=cmd_generate)

    for name, helptext in (("spt", "shortest-path tree"), ("bfst", "breadth-first tree, random ties")):
        p = sub.add_parser(name, help=f"{helptext} from one source of an edge-list graph")
        p.add_argument("--graph", default="graph.txt")
        p.add_argument("--source", default="random", help="vertex id or 'random'")
        common(p, ".")
        p.set_defaults(func=lambda a, k=name: _tree_command(a, k))

    p = sub.add_parser("pool", help="population-dynamics pool for W or V")
    p.add_argument("--target", required=True, choices=["w-complete", "w-cm", "v", "v-series"])
    p.add_argument("--s", type=float, default=1.0)
    _add_degree_args(p)
    p.add_argument("--weights", default="exponential")
    p.add_argument("--size", type=int, default=100_000)
    p.add_argument("--iters", type=int, default=200)
    p.add_argument("--cutoff", type=float, default=1e6, help="series denominator cutoff (v-series)")
    common(p, "pool.txt")
    p.set_defaults(func=cmd_pool)

    p = sub.add_parser("sample", help="draw from a limit-law sampler")
    kinds = p.add_mutually_exclusive_group(required=True)
    for flag in ("hatd-complete", "m-complete", "hatd-cm", "hatdk-cm", "m-cm",
                 "hatd-inf", "hatdk-inf", "hatd-y1", "gumbel"):
        kinds.add_argument(f"--{flag}", dest="kind", action="store_const", const=flag)
    _add_degree_args(p)
    p.add_argument("--weights", default="exponential")
    p.add_argument("--s", type=float, default=1.0)
    p.add_argument("-k", type=int, default=1, help="fixed degree for the D_hat_k samplers")
    p.add_argument("-n", type=int, default=1_000_000, help="number of draws")
    p.add_argument("--pool", help="pool file (built on the fly when omitted)")
    p.add_argument("--pool-size", type=int, default=100_000)
    p.add_argument("--delta", type=float, default=30.0, help="truncation margin (complete graph)")
    common(p, "samples.txt")
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("analyze", help="statistics of a sample file")
    p.add_argument("--input", default="samples.txt")
    p.add_argument("--tv", action="store_true", help="total variation distance to --against")
    p.add_argument("--ks", action="store_true", help="Kolmogorov-Smirnov distance to --against")
    p.add_argument("--tail", action="store_true", help="tail-exponent fit")
    p.add_argument("--k-min", type=int, default=None)
    p.add_argument("--against", default="geometric:0.5")
    common(p, None)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("run", help="run a named experiment")
    p.add_argument("--config", help="key = value file with [sections]")
    p.add_argument("--experiment", choices=EXPERIMENTS)
    p.add_argument("--seed", type=int)
    p.add_argument("--threads", type=int)
    p.add_argument("--out")
    p.add_argument("--set", action="append", metavar="KEY=VALUE", help="override a config key")
    p.set_defaults(func=cmd_run)
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (ResourceCapError, PointBudgetExceeded) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAP
    except (ConfigError, UsageError, ValueError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except PoolDiagnosticError as exc:
        print(f"diagnostic failure: {exc}", file=sys.stderr)
        return EXIT_FAILED


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
