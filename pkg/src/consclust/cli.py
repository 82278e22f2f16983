"""Command-line front end: generate, fuse, eval, pipeline, propagate.

Exit codes: 0 ok, 2 I/O, 3 configuration, 4 solver failure.
"""
import argparse
import json
import logging
import sys
import time
from collections import Counter


from . import io
from ._lloyd import default_threads
from .coassoc import consensus_propagate, hac_consensus
from .core import build_coassociation
from .cor import cor_fuse
from .errors import ConfigError, ConsensusError
from .generate import GenerationConfig, generate
from .iec import iec_fuse
from .kcc import UtilityKind, kcc_fuse
from .metrics import ari, ensemble_agreement, nmi, purity
from .sec import sec_fuse_dense, sec_fuse_sparse

METHODS = ("kcc", "sec-sparse", "sec-dense", "iec", "hac", "cor")
EXIT_IO, EXIT_CONFIG, EXIT_SOLVER = 2, 3, 4

log = logging.getLogger("consclust")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _bool(text):
    t = str(text).strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise argparse.ArgumentTypeError(f"not a boolean: {text!r}")


def _add_common(p):
    p.add_argument("--config", help="flat key = value file; flags override it")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=None,
                   help="worker cap (default: $CONSCLUST_THREADS or 1)")
    p.add_argument("-v", "--verbose", action="store_true")


def _add_generate(p):
    g = p.add_argument_group("generation")
    g.add_argument("--strategy", choices=("rps", "rfs", "subsample"), default="rps")
    g.add_argument("--r", type=int, default=100, help="number of basic partitions")
    g.add_argument("--k-min", type=int, default=None)
    g.add_argument("--k-max", type=int, default=None)
    g.add_argument("--bp-k", "--fixed-k", dest="bp_k", type=int, default=None, help="fixed K for rfs / subsample")
    g.add_argument("--feature-fraction", type=float, default=0.5)
    g.add_argument("--row-fraction", type=float, default=0.5)
    g.add_argument("--bp-restarts", type=int, default=1)
    g.add_argument("--bp-max-iter", type=int, default=100)
    g.add_argument("--standardize", type=_bool, default=True)
    g.add_argument("--label-column", default=None,
                   help="column index or name holding ground truth; excluded from clustering")


def _add_fuse(p):
    f = p.add_argument_group("fusion")
    f.add_argument("--method", choices=METHODS, default="kcc")
    f.add_argument("--k", type=int, default=None, help="consensus cluster count (required, flag or config)")
    f.add_argument("--utility", default="uc", help="uc, uh, ucos or ulp:<p> (kcc only)")
    f.add_argument("--restarts", type=int, default=10)
    f.add_argument("--max-iter", type=int, default=100)
    f.add_argument("--dropout", type=float, default=0.2, help="iec dropout level")
    f.add_argument("--ridge", type=float, default=1e-5, help="iec ridge")
    f.add_argument("--linkage", choices=("average", "single"), default="average", help="hac linkage")
    f.add_argument("--row-normalize", type=_bool, default=False, help="sec-dense eigenvector rows")
    f.add_argument("--report", default=None, help="JSON report path (default: <out>.json)")


def build_parser():
    parser = _Parser(prog="consclust", description="Consensus clustering toolkit.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("generate", help="basic partitions from a data CSV")
    p.add_argument("data")
    p.add_argument("bp_out")
    _add_common(p)
    _add_generate(p)

    p = sub.add_parser("fuse", help="consensus partition from a basic-partition CSV")
    p.add_argument("bp")
    p.add_argument("out")
    _add_common(p)
    _add_fuse(p)

    p = sub.add_parser("eval", help="metrics for a partition file")
    p.add_argument("partition")
    p.add_argument("--truth", default=None)
    p.add_argument("--bp", default=None, help="basic partitions for the utility agreement")
    p.add_argument("--utility", default="uc")
    p.add_argument("--out", default=None, help="write the CSV table here instead of stdout")
    p.add_argument("--config", help=argparse.SUPPRESS)
    p.add_argument("-v", "--verbose", action="store_true")

    p = sub.add_parser("pipeline", help="generate, fuse and evaluate in one run")
    p.add_argument("data")
    p.add_argument("out")
    p.add_argument("--bp-out", default=None, help="also write the basic partitions")
    _add_common(p)
    _add_generate(p)
    _add_fuse(p)

    p = sub.add_parser("propagate", help="consensus-graph forward pass (debug)")
    p.add_argument("bp")
    p.add_argument("features")
    p.add_argument("out")
    p.add_argument("--weights", action="append", required=True, help="weight CSV, repeat per layer")
    p.add_argument("--activation", choices=("relu", "sigmoid", "none"), default="relu")
    p.add_argument("--config", help=argparse.SUPPRESS)
    p.add_argument("-v", "--verbose", action="store_true")
    return parser


def parse_args(argv=None):
    """Parse flags on top of an optional ``--config`` file."""
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "config", None):
        try:
            cfg = io.read_config(args.config)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        subparser = parser._subparsers._group_actions[0].choices[args.command]
        actions = {a.dest: a for a in subparser._actions}
        defaults = {}
        for key, raw in cfg.items():
            action = actions.get(key)
            if action is None or not action.option_strings or key in ("config", "help"):
                raise ConfigError(f"unknown config key {key!r} for {args.command}")
            try:
                defaults[key] = action.type(raw) if action.type else raw
            except (ValueError, argparse.ArgumentTypeError) as exc:
                raise ConfigError(f"config key {key!r}: {exc}") from exc
            if action.choices is not None and defaults[key] not in action.choices:
                raise ConfigError(f"config key {key!r}: {raw!r} not in {list(action.choices)}")
        subparser.set_defaults(**defaults)
        args = parser.parse_args(argv)
    return args


def _threads(args):
    return default_threads() if args.threads is None else max(1, args.threads)


def generation_config(args):
    k_range = None
    if args.k_min is not None or args.k_max is not None:
        if args.k_min is None or args.k_max is None:
            raise ConfigError("--k-min and --k-max go together")
        k_range = (args.k_min, args.k_max)
    return GenerationConfig(
        strategy=args.strategy, r=args.r, k_range=k_range,
        feature_fraction=args.feature_fraction, row_fraction=args.row_fraction,
        fixed_k=args.bp_k, seed=args.seed, max_iter=args.bp_max_iter,
        restarts=args.bp_restarts, standardize=args.standardize,
    )


def run_generate(data, args):
    cfg = generation_config(args)
    bps = generate(data, cfg, n_jobs=_threads(args))
    # the file format infers K_i from the largest label; mirror it
    return type(bps).from_file_matrix(bps.to_file_matrix()), cfg


def _summary(bps, cfg):
    ks = Counter(int(c.max()) + 1 for c in bps.labels.T)
    missing = float((bps.labels < 0).mean())
    dist = " ".join(f"{k}:{ks[k]}" for k in sorted(ks))
    return f"strategy={cfg.strategy} r={bps.r} n={bps.n} missing_fraction={missing:.4f} k_distribution={dist}"


def run_fuse(bps, args):
    if args.k is None:
        raise ConfigError("--k is required")
    kw = dict(seed=args.seed, restarts=args.restarts, max_iter=args.max_iter, n_jobs=_threads(args))
    m = args.method
    if m == "kcc":
        return kcc_fuse(bps, args.k, UtilityKind.parse(args.utility), **kw)
    if m == "sec-sparse":
        return sec_fuse_sparse(bps, args.k, **kw)
    if m == "sec-dense":
        return sec_fuse_dense(bps, args.k, normalize_rows=args.row_normalize, **kw)
    if m == "iec":
        return iec_fuse(bps, args.k, s=args.dropout, ridge=args.ridge, **kw)
    if m == "cor":
        return cor_fuse(bps, args.k, **kw)
    from .core import ConsensusOutcome
    part = hac_consensus(build_coassociation(bps), args.k, linkage=args.linkage)
    return ConsensusOutcome(part, (), None, args.seed, 0, 0)


def _report(outcome, args, elapsed, extra=None):
    rep = {
        "method": args.method,
        "k": args.k,
        "seed": outcome.seed,
        "restarts": args.restarts,
        "best_restart": outcome.restart,
        "iterations": outcome.n_iter,
        "objective_trace": list(outcome.objective_trace),
        "n_outliers": 0 if outcome.outliers is None else int(outcome.outliers.size),
        "wall_time_s": round(elapsed, 6),
    }
    if args.method == "kcc":
        rep["utility"] = str(UtilityKind.parse(args.utility))
    if extra:
        rep.update(extra)
    path = args.report or f"{args.out}.json"
    with open(path, "w") as fh:
        json.dump(rep, fh, indent=2)
        fh.write("\n")
    return rep


def metric_rows(partition, truth=None, bps=None, kind="uc"):
    rows = []
    if truth is not None:
        rows += [("nmi", nmi(partition, truth)), ("ari", ari(partition, truth)), ("purity", purity(partition, truth))]
    if bps is not None:
        rows.append((f"agreement_{UtilityKind.parse(kind)}", ensemble_agreement(partition, bps, kind)))
    return rows


def _format_metrics(rows):
    return "metric,value\n" + "".join(f"{name},{value:.10g}\n" for name, value in rows)


def cmd_generate(args):
    data = io.read_data(args.data, args.label_column)
    bps, cfg = run_generate(data, args)
    io.write_bps(args.bp_out, bps)
    print(_summary(bps, cfg))


def cmd_fuse(args):
    bps = io.read_bps(args.bp)
    t0 = time.perf_counter()
    outcome = run_fuse(bps, args)
    io.write_partition(args.out, outcome.partition)
    _report(outcome, args, time.perf_counter() - t0)
    print(f"method={args.method} k={args.k} n={bps.n} objective={outcome.objective:.10g} iterations={outcome.n_iter}")


def cmd_eval(args):
    part = io.read_partition(args.partition)
    truth = io.read_partition(args.truth) if args.truth else None
    bps = io.read_bps(args.bp) if args.bp else None
    if truth is None and bps is None:
        raise ConfigError("eval needs --truth and/or --bp")
    for other in (truth, bps):
        if other is not None and other.n != part.n:
            raise ConfigError("files disagree on the number of points")
    text = _format_metrics(metric_rows(part, truth, bps, args.utility))
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_pipeline(args):
    data = io.read_data(args.data, args.label_column)
    bps, cfg = run_generate(data, args)
    if args.bp_out:
        io.write_bps(args.bp_out, bps)
    print(_summary(bps, cfg))
    t0 = time.perf_counter()
    outcome = run_fuse(bps, args)
    io.write_partition(args.out, outcome.partition)
    extra = {}
    if data.truth is not None:
        rows = metric_rows(outcome.partition, data.truth)
        extra["metrics"] = dict(rows)
        sys.stdout.write(_format_metrics(rows))
    _report(outcome, args, time.perf_counter() - t0, extra)
    print(f"method={args.method} k={args.k} n={bps.n} objective={outcome.objective:.10g} iterations={outcome.n_iter}")


def cmd_propagate(args):
    bps = io.read_bps(args.bp)
    X = io.read_matrix(args.features)
    weights = [io.read_matrix(w) for w in args.weights]
    Z = consensus_propagate(build_coassociation(bps), X, weights, args.activation)
    io.write_data(args.out, Z)


COMMANDS = {
    "generate": cmd_generate,
    "fuse": cmd_fuse,
    "eval": cmd_eval,
    "pipeline": cmd_pipeline,
    "propagate": cmd_propagate,
}


def main(argv=None):
    try:
        args = parse_args(argv)
    except SystemExit as exc:
        # argparse usage errors (exit 3 via error()) and --help
        return exc.code if isinstance(exc.code, int) else EXIT_CONFIG
    except ConfigError as exc:
        print(f"consclust: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except io.FormatError as exc:
        print(f"consclust: {exc}", file=sys.stderr)
        return EXIT_IO
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"consclust: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ConsensusError as exc:
        print(f"consclust: solver error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except OSError as exc:
        print(f"consclust: {exc}", file=sys.stderr)
        return EXIT_IO
    return 0


if __name__ == "__main__":
    sys.exit(main())
