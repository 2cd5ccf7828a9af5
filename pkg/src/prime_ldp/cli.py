"""Command-line entry point: ``prime-ldp {simulate,privatize,estimate,evaluate,diagnose,curve}``.

Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.
"""

import argparse
import json
import logging
import math
import sys

import numpy as np

from .dcmm import AuditConfig, audit_assumptions
from .errors import DataError, InvalidParametersError, NumericalFailure
from .estimator import EstimatorConfig, estimate_memberships
from .evaluation import permutation_loss, theory_diagnostics
from .experiments import (
    SweepSpec,
    alignment_bins,
    emit_results,
    load_edge_list,
    private_vs_nonprivate_curve,
    read_pi_csv,
    run_sweep,
    sweep_model,
    write_edge_list,
    write_pi_csv,
)
from .privacy import DebiasedMatrix, PrivacyParams, debias, symmetric_edge_flip
from .streams import ROLE_FLIP, make_stream
from .vertex_hunting import HuntConfig

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _float_list(text):
    out = []
    for tok in text.split(","):
        tok = tok.strip().lower()
        if tok in ("inf", "infinity", "nonprivate"):
            out.append(math.inf)
            continue
        try:
            out.append(float(tok))
        except ValueError:
            raise argparse.ArgumentTypeError(f"not a number: {tok!r}")
    return out


def _add_tuning(p):
    p.add_argument("--tau", type=float, default=1.0)
    p.add_argument("--c", type=float, default=0.01)
    p.add_argument("--gamma", type=float, default=0.5)
    p.add_argument("--hunt-seed", type=int, default=0)


def _add_model(p):
    p.add_argument("--n", type=int, default=2000)
    p.add_argument("--K", type=int, default=2)
    p.add_argument("--beta", type=float, default=0.9, help="beta_n of the planted B")
    p.add_argument("--theta-lo", type=float, default=0.3)
    p.add_argument("--theta-hi", type=float, default=5.0)
    p.add_argument("--pure-frac", type=float, default=0.5)


def build_parser():
    parser = _Parser(prog="prime-ldp", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("simulate", help="simulation sweep over b_n and epsilon")
    _add_model(p)
    _add_tuning(p)
    p.add_argument("--bn", type=_float_list, default=[5, 6, 7, 8, 9, 10, 11, 12])
    p.add_argument("--eps", type=_float_list, default=[5, 6, 7, 8, math.inf],
                   help="comma list; 'inf' is the non-private run")
    p.add_argument("--reps", type=int, default=100)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--formats", default="csv", help="comma list of csv,svg")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--timing", action="store_true",
                   help="record wall-clock runtime (makes the CSV non-reproducible)")

    p = sub.add_parser("privatize", help="apply the edge-flip mechanism to an edge list")
    p.add_argument("input")
    p.add_argument("output")
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("estimate", help="estimate memberships from an edge list")
    p.add_argument("input")
    p.add_argument("output", help="membership CSV")
    p.add_argument("--K", type=int, required=True)
    p.add_argument("--epsilon", type=float, default=None,
                   help="privatize before estimating; omit for non-private mode")
    p.add_argument("--already-private", type=float, default=None, metavar="EPSILON",
                   help="input was released by the mechanism at this epsilon; only debias")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--labels", default=None, help="optional per-node alignment label CSV")
    p.add_argument("--scheme", choices=["two_bin", "five_bin"], default="two_bin")
    p.add_argument("--liberal-col", type=int, default=0)
    _add_tuning(p)

    p = sub.add_parser("evaluate", help="permutation loss between two membership CSVs")
    p.add_argument("estimate")
    p.add_argument("truth")

    p = sub.add_parser("diagnose", help="rates, risk integrals and assumption audit")
    _add_model(p)
    p.add_argument("--bn", type=float, default=8.0)
    p.add_argument("--epsilon", type=float, default=8.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--degree-mode", choices=["literal", "expected"], default="literal")
    p.add_argument("--c1", type=float, default=10.0)
    p.add_argument("--c2", type=float, default=0.05)
    p.add_argument("--c3", type=float, default=0.05)
    p.add_argument("--c4", type=float, default=0.1)

    p = sub.add_parser("curve", help="distance between private and non-private estimates")
    p.add_argument("input")
    p.add_argument("--K", type=int, required=True)
    p.add_argument("--eps", type=_float_list, default=[2, 4, 6])
    p.add_argument("--reps", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    _add_tuning(p)
    return parser


def _estimator_config(args, K):
    return EstimatorConfig(K=K, tau=args.tau, c=args.c, gamma=args.gamma,
                           hunt=HuntConfig(seed=args.hunt_seed))


def cmd_simulate(args):
    formats = [f.strip() for f in args.formats.split(",") if f.strip()]
    if set(formats) - {"csv", "svg"}:
        raise UsageError(f"unknown format in {args.formats!r}")
    spec = SweepSpec(
        n=args.n, K=args.K, bn_grid=args.bn, eps_grid=args.eps, reps=args.reps,
        seed=args.seed, beta_n=args.beta, theta_lo=args.theta_lo, theta_hi=args.theta_hi,
        pure_frac=args.pure_frac, tau=args.tau, c=args.c, gamma=args.gamma,
        hunt=HuntConfig(seed=args.hunt_seed),
    )
    rows = run_sweep(spec, workers=args.workers)
    for path in emit_results(rows, args.out, formats, spec.metadata(), timing=args.timing):
        print(path)


def cmd_privatize(args):
    graph = load_edge_list(args.input)
    released = symmetric_edge_flip(graph.adjacency, PrivacyParams.from_epsilon(args.epsilon),
                                   make_stream(args.seed, 0, ROLE_FLIP))
    write_edge_list(graph, args.output, adjacency=released.m)


def cmd_estimate(args):
    graph = load_edge_list(args.input)
    if args.epsilon is not None and args.already_private is not None:
        raise UsageError("--epsilon and --already-private are mutually exclusive")
    if args.already_private is not None:
        from .privacy import PrivatizedGraph

        m = debias(PrivatizedGraph(graph.adjacency, PrivacyParams.from_epsilon(args.already_private)))
    elif args.epsilon is not None:
        m = debias(symmetric_edge_flip(graph.adjacency, PrivacyParams.from_epsilon(args.epsilon),
                                       make_stream(args.seed, 0, ROLE_FLIP)))
    else:
        m = DebiasedMatrix.nonprivate(graph.adjacency)
    est = estimate_memberships(m, _estimator_config(args, args.K))
    write_pi_csv(args.output, graph.labels, est.pi_hat)
    if args.labels:
        labels = alignment_bins(est.pi_hat, args.scheme, liberal_col=args.liberal_col)
        try:
            with open(args.labels, "w") as fh:
                fh.write("node,label\n")
                for node, lab in zip(graph.labels, labels):
                    fh.write(f"{node},{lab}\n")
        except OSError as exc:
            raise DataError(f"cannot write {args.labels}: {exc}") from exc
    summary = {"n": graph.n, "edges": graph.n_edges, "default_rows": int(est.default_row.sum())}
    if est.warning:
        summary["warning"] = est.warning
    print(json.dumps(summary))


def cmd_evaluate(args):
    lab_a, pi_hat = read_pi_csv(args.estimate)
    lab_b, pi = read_pi_csv(args.truth)
    if pi_hat.shape != pi.shape:
        raise DataError(f"shape mismatch {pi_hat.shape} vs {pi.shape}")
    if lab_a != lab_b:
        order = {lab: i for i, lab in enumerate(lab_b)}
        if set(lab_a) != set(order):
            raise DataError("node sets differ")
        pi = pi[[order[lab] for lab in lab_a]]
    rep = permutation_loss(pi_hat, pi)
    print(json.dumps({"loss": rep.loss, "best_permutation": rep.best_permutation.tolist()}))


def cmd_diagnose(args):
    spec = SweepSpec(n=args.n, K=args.K, bn_grid=[args.bn], eps_grid=[args.epsilon], reps=1,
                     seed=args.seed, beta_n=args.beta, theta_lo=args.theta_lo,
                     theta_hi=args.theta_hi, pure_frac=args.pure_frac)
    params = sweep_model(spec, args.bn, 0)
    audit = audit_assumptions(params, AuditConfig(args.c1, args.c2, args.c3, args.c4,
                                                  degree_mode=args.degree_mode))
    out = {"n": params.n, "K": params.K, "b_n": params.b_n, "theta_bar": params.theta_bar,
           "epsilon": args.epsilon, "audit": audit.to_dict()}
    if audit.g_computable and audit.beta_n > 0:
        diag = theory_diagnostics(params.theta, params.K, args.epsilon, audit.alpha_n, audit.beta_n)
        out["theory"] = diag.to_dict()
    else:
        out["theory"] = None
        out["note"] = "G is not computable under this degree mode; try --degree-mode expected"
    print(json.dumps(out, indent=2, default=float))


def cmd_curve(args):
    graph = load_edge_list(args.input)
    pts = private_vs_nonprivate_curve(graph, args.K, args.eps, _estimator_config(args, args.K),
                                      seed=args.seed, reps=args.reps)
    print("epsilon,mean_distance,reps,failures,max_tau")
    for p in pts:
        max_tau = max(p.taus) if p.taus else math.nan
        print(f"{p.epsilon!r},{p.mean_distance!r},{len(p.distances)},{p.failures},{max_tau!r}")


COMMANDS = {
    "simulate": cmd_simulate,
    "privatize": cmd_privatize,
    "estimate": cmd_estimate,
    "evaluate": cmd_evaluate,
    "diagnose": cmd_diagnose,
    "curve": cmd_curve,
}


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        COMMANDS[args.command](args)
    except (UsageError, InvalidParametersError) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except NumericalFailure as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
