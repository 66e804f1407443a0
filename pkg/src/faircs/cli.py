"""Command-line entry point: ``faircs --edges E --nodes N --algorithm lp-advanced ...``"""
from __future__ import annotations

import argparse
import logging
import math
import sys

from .candidates import CandidateMethod, CandidateSpec, cap_per_node
from .cascade import CascadeKind, CascadeModel
from .harness import ALGORITHMS, RunConfig, emit, run
from .netio import atomic_write_text, load_network, read_candidates, read_sources
from .synthetic import instance_with_disparity

log = logging.getLogger("faircs")

EXIT_OK, EXIT_ERROR, EXIT_INFEASIBLE = 0, 1, 2


def _tau(text: str) -> float:
    v = float(text)
    if math.isnan(v) or v < 0:
        raise argparse.ArgumentTypeError("tolerance must be a non-negative number or 'inf'")
    return v


def _window(text: str) -> tuple[float, float]:
    lo, hi = (float(x) for x in text.split(","))
    if not 0 <= lo <= hi:
        raise argparse.ArgumentTypeError("window must be LO,HI with 0 <= LO <= HI")
    return lo, hi


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="faircs",
        description="Suggest new edges that widen content spread while equalizing it across groups.",
    )
    inp = ap.add_argument_group("input")
    inp.add_argument("--edges", help="edge list, one 'u<TAB>v' per line, '#' comments")
    inp.add_argument("--nodes", help="CSV with header node,group,is_source")
    inp.add_argument("--directed", action="store_true", help="treat edges as directed")
    src = inp.add_mutually_exclusive_group()
    src.add_argument("--sources", help="comma-separated content node ids (overrides is_source)")
    src.add_argument("--sources-from-file", metavar="PATH", help="content node ids, one per line")
    inp.add_argument("--synthetic", type=int, metavar="N",
                     help="generate an N-node two-group instance instead of reading files")
    inp.add_argument("--synthetic-window", type=_window, default=(0.30, 0.35), metavar="LO,HI",
                     help="target initial disparity (ratio) of the synthetic instance (default 0.30,0.35)")
    inp.add_argument("--synthetic-sources", type=int, default=3, help="content nodes in the synthetic instance")

    alg = ap.add_argument_group("algorithm")
    alg.add_argument("--algorithm", choices=ALGORITHMS, default="lp-advanced")
    alg.add_argument("--candidates", default="fof", metavar="{fof,igc,file:PATH}",
                     help="candidate edges: friend-of-friend, intersecting group count, or an explicit list")
    alg.add_argument("--max-candidates-per-node", type=int, default=None)
    alg.add_argument("--cascade", choices=[k.value for k in CascadeKind], default="mip",
                     help="model used to score the reported lift and disparity (default mip)")
    alg.add_argument("--ic-samples", type=int, default=10_000)
    alg.add_argument("--k", type=int, default=3, help="per-node suggestion budget")
    alg.add_argument("--p", type=float, default=0.5, help="per-hop activation probability")
    alg.add_argument("--iter-m", type=int, default=200, help="roundings per LP solve")
    alg.add_argument("--eps-tol", type=float, default=0.01, help="disparity slack when picking a rounding")
    alg.add_argument("--npi", type=int, default=400, help="nodes added per lp-scale iteration")
    alg.add_argument("--cutoff", type=float, default=0.05, help="lp-advanced stops below this candidate fraction")
    alg.add_argument("--soft-fairness", type=_tau, default=None, metavar="TAU",
                     help="replace exact parity with |avg_a - avg_b| <= TAU ('inf' disables parity)")

    run_g = ap.add_argument_group("run")
    run_g.add_argument("--seed", type=int, default=0)
    run_g.add_argument("--trials", type=int, default=1)
    run_g.add_argument("--out", help="write the report here (atomically) instead of stdout")
    run_g.add_argument("--format", choices=("json", "csv"), default="json")
    run_g.add_argument("-v", "--verbose", action="count", default=0)
    return ap


def _candidate_spec(text: str, max_per_node) -> tuple[CandidateSpec, str | None]:
    if text.startswith("file:"):
        path = text[len("file:"):]
        return CandidateSpec(CandidateMethod.EXPLICIT, max_per_node, path), path
    return CandidateSpec(CandidateMethod(text), max_per_node), None


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    logging.basicConfig(
        level=logging.WARNING - 10 * min(args.verbose, 2),
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        spec, cand_path = _candidate_spec(args.candidates, args.max_candidates_per_node)
        config = RunConfig(
            algorithm=args.algorithm,
            candidates=spec,
            cascade=CascadeModel(CascadeKind(args.cascade), args.ic_samples),
            k=args.k,
            p=args.p,
            iter_m=args.iter_m,
            eps_tol=args.eps_tol,
            npi=args.npi,
            cutoff_ratio=args.cutoff,
            seed=args.seed,
            soft_tau=args.soft_fairness,
            trials=args.trials,
        )
        generator = None
        if args.synthetic is not None:
            if args.edges or args.nodes:
                ap.error("--synthetic cannot be combined with --edges/--nodes")
            instance, params, _ = instance_with_disparity(
                args.synthetic, window=args.synthetic_window, seed=args.seed, k=args.k, p=args.p,
                n_sources=args.synthetic_sources, directed=args.directed,
            )
            generator = params.as_dict()
        else:
            if not (args.edges and args.nodes):
                ap.error("--edges and --nodes are required (or use --synthetic N)")
            sources = None
            if args.sources:
                sources = [s.strip() for s in args.sources.split(",") if s.strip()]
            elif args.sources_from_file:
                sources = read_sources(args.sources_from_file)
            instance = load_network(args.edges, args.nodes, p=args.p, k=args.k, directed=args.directed,
                                    sources=sources)
        candidates = None
        if cand_path is not None:
            candidates = read_candidates(cand_path, instance)
            if args.max_candidates_per_node is not None:
                candidates = cap_per_node(instance.graph, candidates, args.max_candidates_per_node)
        report = run(config, instance, candidates, generator)
        text = emit(report, args.format)
        if args.out:
            atomic_write_text(args.out, text)
        else:
            sys.stdout.write(text)
    except (ValueError, OSError, RuntimeError) as exc:
        print(f"faircs: error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    if config.soft_tau is None and report.any_infeasible:
        print("faircs: exact parity is infeasible for this instance (try --soft-fairness TAU)", file=sys.stderr)
        return EXIT_INFEASIBLE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
