"""Command-line front end.

Results go to stdout (or ``--out``), diagnostics to stderr. Exit status is
0 on success, 1 for usage errors and 2 for bad input data. Set
``LGC_COLOR=1`` to colour log lines.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

import numpy as np

from lgc.crd import CrdParams, crd_cluster
from lgc.diffusion import ConvergenceError, DiffusionParams, pagerank_nibble, spectral_cluster
from lgc.flow import flow_improve, mqi, simple_local
from lgc.generators import planted_partition, random_geometric, ring_of_cliques
from lgc.graph import DomainError, GraphFormatError, load_cluster, load_edge_list, write_edge_list
from lgc.pipelines import DEFAULT_GRID, compute_ncp, evaluate_recovery, ncp_to_csv, predict_labels

log = logging.getLogger("lgc")

DEFAULT_RNG = 0


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _setup_logging(verbosity):
    handler = logging.StreamHandler(sys.stderr)
    fmt = "%(levelname)s %(message)s"
    if os.environ.get("LGC_COLOR", "") not in ("", "0"):
        fmt = "\033[33m%(levelname)s\033[0m %(message)s"
    handler.setFormatter(logging.Formatter(fmt))
    root = logging.getLogger("lgc")
    root.handlers[:] = [handler]
    root.setLevel(logging.WARNING - 10 * verbosity)


def _emit(text, out):
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _seed_list(args):
    seeds = []
    for tok in args.seed or []:
        seeds += [int(x) for x in str(tok).split(",") if x]
    if args.seed_file:
        with open(args.seed_file, encoding="utf-8") as fh:
            seeds += [int(x) for x in fh.read().split()]
    if not seeds:
        raise UsageError("give at least one --seed or a --seed-file")
    return seeds


def _diffusion_params(args):
    try:
        return DiffusionParams(
            alpha=args.alpha, eps=args.eps, rho=args.rho, max_iters=args.max_iters, kkt_tol=args.kkt_tol
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _load(args):
    return load_edge_list(args.graph, weighted=args.weighted)


def _add_graph(p):
    p.add_argument("--graph", required=True, help="edge-list file (default: required)")
    p.add_argument("--weighted", action="store_true", help="read a third weight column (default: off)")


def _add_diffusion(p):
    p.add_argument("--alpha", type=float, default=0.15, help="teleport probability (default: 0.15)")
    p.add_argument("--eps", type=float, default=1e-6, help="push tolerance (default: 1e-6)")
    p.add_argument("--rho", type=float, default=1e-5, help="l1 penalty scale (default: 1e-5)")
    p.add_argument("--max-iters", type=int, default=10000, help="l1 solver iteration cap (default: 10000)")
    p.add_argument("--kkt-tol", type=float, default=1e-6, help="l1 solver optimality tolerance (default: 1e-6)")


def _add_out(p):
    p.add_argument("--out", default=None, help="output file (default: stdout)")


def build_parser():
    parser = _Parser(prog="lgc", description="Local graph clustering tools.")
    parser.add_argument("-v", "--verbose", action="count", default=0, help="more logging on stderr (default: 0)")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser, required=True)

    p = sub.add_parser("cluster", help="find a cluster around seeds")
    _add_graph(p)
    p.add_argument("--method", choices=["acl", "l1reg", "nibble", "crd"], default="acl", help="(default: acl)")
    p.add_argument("--seed", action="append", help="seed id(s), repeatable or comma separated (default: none)")
    p.add_argument("--seed-file", help="file of whitespace-separated seed ids (default: none)")
    _add_diffusion(p)
    p.add_argument("--target-volume", type=float, default=None, help="nibble target volume (default: vol/4)")
    p.add_argument("--U", type=int, default=3, help="CRD edge capacity (default: 3)")
    p.add_argument("--h", type=int, default=10, help="CRD label limit (default: 10)")
    p.add_argument("--w", type=int, default=2, help="CRD rounds (default: 2)")
    p.add_argument("--multiplier", type=float, default=2.0, help="CRD initial mass per unit degree (default: 2.0)")
    p.add_argument("--format", choices=["json", "text"], default="json", help="(default: json)")
    _add_out(p)

    p = sub.add_parser("improve", help="improve a cluster with a flow method")
    _add_graph(p)
    p.add_argument("--cluster", required=True, help="cluster file, JSON or one id per line (default: required)")
    p.add_argument("--method", choices=["mqi", "flowimprove", "simplelocal"], default="mqi", help="(default: mqi)")
    p.add_argument("--delta", type=float, default=0.5, help="SimpleLocal locality strength (default: 0.5)")
    _add_out(p)

    p = sub.add_parser("ncp", help="approximate network community profile (CSV)")
    _add_graph(p)
    p.add_argument("--method", choices=sorted(DEFAULT_GRID), default="acl", help="(default: acl)")
    p.add_argument("--grid", default=None, help="JSON list of parameter dicts (default: built-in grid)")
    p.add_argument("--bins", type=int, default=8, help="number of log-spaced size bins (default: 8)")
    p.add_argument("--seeds-per-bin", type=int, default=5, help="(default: 5)")
    p.add_argument("--rng", type=int, default=DEFAULT_RNG, help=f"random seed (default: {DEFAULT_RNG})")
    p.add_argument("--sampling", choices=["uniform", "degree"], default="uniform", help="(default: uniform)")
    p.add_argument("--all", action="store_true", help="emit every sample, not only per-bin minima (default: off)")
    p.add_argument("--threads", type=int, default=1, help="worker threads (default: 1)")
    _add_out(p)

    p = sub.add_parser("predict", help="seeded multi-class label prediction (CSV)")
    _add_graph(p)
    p.add_argument("--labels", required=True, help="file of 'vertex class' lines (default: required)")
    p.add_argument("--method", choices=["acl", "l1reg"], default="acl", help="(default: acl)")
    _add_diffusion(p)
    _add_out(p)

    p = sub.add_parser("eval", help="normalized precision/recall of a found cluster (JSON)")
    _add_graph(p)
    p.add_argument("--found", required=True, help="found cluster file (default: required)")
    p.add_argument("--target", required=True, help="target cluster file (default: required)")
    _add_out(p)

    p = sub.add_parser("gen", help="write a synthetic edge list")
    p.add_argument("--kind", choices=["ring_of_cliques", "planted_partition", "random_geometric"], required=True,
                   help="generator (default: required)")
    p.add_argument("--k", type=int, default=20, help="ring: number of cliques (default: 20)")
    p.add_argument("--c", type=int, default=10, help="ring: clique size (default: 10)")
    p.add_argument("--blocks", default="50,50,50,50", help="planted: block sizes (default: 50,50,50,50)")
    p.add_argument("--p-in", type=float, default=0.5, help="planted: in-block probability (default: 0.5)")
    p.add_argument("--p-out", type=float, default=0.01, help="planted: cross-block probability (default: 0.01)")
    p.add_argument("--n", type=int, default=2000, help="geometric: vertex count (default: 2000)")
    p.add_argument("--radius", type=float, default=0.04, help="geometric: radius (default: 0.04)")
    p.add_argument("--rng", type=int, default=DEFAULT_RNG, help=f"random seed (default: {DEFAULT_RNG})")
    _add_out(p)

    p = sub.add_parser("stats", help="vertex/edge counts and degree summary (JSON)")
    _add_graph(p)
    _add_out(p)
    return parser


def _cmd_cluster(args):
    seeds = _seed_list(args)
    if args.method in ("acl", "l1reg"):
        params = _diffusion_params(args)
        g = _load(args)
        c = spectral_cluster(g, seeds, params, args.method)
    elif args.method == "nibble":
        if len(seeds) != 1:
            raise UsageError("nibble takes exactly one seed")
        g = _load(args)
        target = args.target_volume if args.target_volume is not None else g.total_volume / 4
        c = pagerank_nibble(g, seeds[0], target, alpha=args.alpha)
    else:
        try:
            params = CrdParams(args.U, args.h, args.w, args.multiplier)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        g = _load(args)
        c = crd_cluster(g, seeds, params)
    return c.to_json() + "\n" if args.format == "json" else c.to_text()


def _cmd_improve(args):
    g = _load(args)
    a = load_cluster(g, args.cluster)
    if args.method == "mqi":
        res = mqi(g, a)
    elif args.method == "flowimprove":
        res = flow_improve(g, a)
    else:
        res = simple_local(g, a, args.delta)
    return res.to_json() + "\n"


def _cmd_ncp(args):
    grid = None
    if args.grid:
        try:
            grid = json.loads(args.grid)
        except json.JSONDecodeError as exc:
            raise UsageError(f"--grid is not valid JSON: {exc}") from None
    if args.bins < 1 or args.seeds_per_bin < 1 or args.threads < 1:
        raise UsageError("--bins, --seeds-per-bin and --threads must be positive")
    g = _load(args)
    recs = compute_ncp(
        g,
        method=args.method,
        grid=grid,
        bins=args.bins,
        seeds_per_bin=args.seeds_per_bin,
        rng_seed=args.rng,
        all_records=args.all,
        threads=args.threads,
        sampling=args.sampling,
    )
    return ncp_to_csv(recs)


def _read_labels(path):
    classes = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            text = line.strip()
            if not text or text.startswith("#"):
                continue
            parts = text.split()
            if len(parts) != 2:
                raise GraphFormatError("expected 'vertex class'", path, lineno)
            try:
                v, c = int(parts[0]), int(parts[1])
            except ValueError:
                raise GraphFormatError("vertex and class must be integers", path, lineno) from None
            classes.setdefault(c, []).append(v)
    return classes


def _cmd_predict(args):
    params = _diffusion_params(args)
    classes = _read_labels(args.labels)
    g = _load(args)
    return predict_labels(g, classes, params, args.method).to_csv()


def _cmd_eval(args):
    g = _load(args)
    return evaluate_recovery(g, load_cluster(g, args.found), load_cluster(g, args.target)).to_json() + "\n"


def _cmd_gen(args):
    try:
        if args.kind == "ring_of_cliques":
            g = ring_of_cliques(args.k, args.c)
        elif args.kind == "planted_partition":
            g = planted_partition([int(b) for b in args.blocks.split(",")], args.p_in, args.p_out, args.rng)
        else:
            g = random_geometric(args.n, args.radius, args.rng)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if args.out:
        write_edge_list(g, args.out)
        return None
    return "".join(f"{u} {v}\n" for u, v, _ in g.edges())


def _cmd_stats(args):
    g = _load(args)
    deg = g.degrees
    out = {
        "n": g.n,
        "m": g.m,
        "weighted": g.weighted,
        "total_volume": g.total_volume,
        "degree_min": float(deg.min()),
        "degree_max": float(deg.max()),
        "degree_mean": float(deg.mean()),
        "degree_median": float(np.median(deg)),
        "isolated": int((deg == 0).sum()),
    }
    return json.dumps(out) + "\n"


COMMANDS = {
    "cluster": _cmd_cluster,
    "improve": _cmd_improve,
    "ncp": _cmd_ncp,
    "predict": _cmd_predict,
    "eval": _cmd_eval,
    "gen": _cmd_gen,
    "stats": _cmd_stats,
}


def run_cli(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code
    _setup_logging(args.verbose)
    try:
        text = COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"lgc {args.command}: error: {exc}", file=sys.stderr)
        return 1
    except (GraphFormatError, DomainError, ConvergenceError, FileNotFoundError, OverflowError) as exc:
        print(f"lgc {args.command}: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"lgc {args.command}: {exc}", file=sys.stderr)
        return 2
    if text is not None:
        _emit(text, args.out)
    return 0


def main():
    sys.exit(run_cli())
