"""Command-line front end: gen-dist, sample, learn, eval, experiment, verify.

Exit codes: 0 success, 1 verification failure, 2 usage or I/O error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from pathlib import Path

from . import verify as verify_mod
from .cube import Dataset, DimensionError, JointDistribution, RngSeed, sample
from .experiment import (ExperimentConfig, distribution_from_spec, results_csv,
                         run_experiment)
from .learners import LEARNERS, learn
from .oracle import empirical_loss, exact_loss, opt_exact
from .regression import Predictor


class UsageError(Exception):
    pass


def _emit(obj: dict, fmt: str, out=None):
    out = out or sys.stdout
    if fmt == "json":
        out.write(json.dumps(obj, separators=(",", ":")) + "\n")
    else:
        w = csv.writer(out, lineterminator="\n")
        w.writerow(list(obj))
        w.writerow([repr(v) if isinstance(v, float) else v for v in obj.values()])


def _write_or_print(text: str, path):
    if path:
        Path(path).write_text(text, encoding="utf-8", newline="\n")
    else:
        sys.stdout.write(text)


def cmd_gen_dist(args):
    if args.uniform_label:
        spec = {"d": args.d, "uniform_label": True}
    elif args.junta:
        spec = {"d": args.d, "junta": [int(v) for v in args.junta.split(",")],
                "table": args.table, "eta": args.eta}
    else:
        raise UsageError("gen-dist needs --junta or --uniform-label")
    if args.bias is not None:
        spec["bias"] = args.bias
    dist = distribution_from_spec(spec)
    k = args.k if args.k is not None else len(spec.get("junta", [])) or 1
    opt, j = opt_exact(dist, k)
    report = {"k": k, "opt": opt, "subset": j.bits}
    if args.out:
        dist.save(args.out)
        _emit(report, args.format)
    else:
        sys.stdout.write(dist.to_json())
        _emit(report, args.format, sys.stderr)
    return 0


def cmd_sample(args):
    dist = JointDistribution.load(args.dist)
    data = sample(dist, args.n, RngSeed(args.seed, args.stream))
    _write_or_print(data.to_csv(), args.out)
    return 0


def cmd_learn(args):
    data = Dataset.load(args.data)
    pred, report = learn(args.alg, data, args.k)
    rep = report.as_dict(timing=not args.no_timing)
    rep.pop("subset_losses", None)
    if args.out:
        pred.save(args.out)
    else:
        rep["model"] = json.loads(pred.to_json())
    _emit(rep, args.format)
    return 0


def cmd_eval(args):
    pred = Predictor.load(args.model)
    if (args.data is None) == (args.dist is None):
        raise UsageError("eval needs exactly one of --data or --dist")
    if args.data:
        r = empirical_loss(Dataset.load(args.data), pred)
        kind = "empirical"
    else:
        r = exact_loss(JointDistribution.load(args.dist), pred)
        kind = "exact"
    _emit({"kind": kind, **r.as_dict()}, args.format)
    return 0


def cmd_experiment(args):
    cfg = ExperimentConfig.load(args.config)
    if args.seed is not None:
        cfg.seed = args.seed
    if args.no_timing:
        cfg.timing = False
    rows, summary = run_experiment(cfg)
    out = args.out or cfg.output
    if out and not Path(out).is_absolute() and not args.out:
        out = cfg.base_dir / out
    _write_or_print(results_csv(rows, summary), out)
    return 0


def cmd_verify(args):
    names = [verify_mod.ALIASES.get(c, c) for c in args.check] if args.check else list(verify_mod.CHECKS)
    unknown = [c for c in names if c not in verify_mod.CHECKS]
    if unknown:
        raise UsageError(f"unknown checks {unknown}; choose from {sorted(verify_mod.CHECKS)}")
    seed = verify_mod.DEFAULT_SEED if args.seed is None else args.seed
    results = []
    for name in names:
        kw = {"seed": seed}
        if args.trials is not None:
            kw["trials"] = args.trials
        if name == "coefficient-deviation":
            kw["bound"] = args.deviation_bound
        results.append(verify_mod.CHECKS[name](**kw))
    buf = io.StringIO()
    if args.format == "json":
        for r in results:
            buf.write(r.to_json() + "\n")
    else:
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["check", "trials", "violations", "max_gap", "passed"])
        for r in results:
            w.writerow([r.check, r.trials, r.violations, repr(r.max_gap), r.passed])
    _write_or_print(buf.getvalue(), args.out)
    failed = [r for r in results if not r.passed]
    for r in failed:
        where = ", ".join(f"seed={seed} trial={t}" for t in r.failing[:10])
        print(f"FAIL {r.check}: {r.violations}/{r.trials} violations ({where})", file=sys.stderr)
    return 1 if failed else 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="unsigned 64-bit seed")
    common.add_argument("--out", default=None, help="output path (stdout when omitted)")
    common.add_argument("--format", choices=["csv", "json"], default="json")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="juntapac", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen-dist", parents=[common], help="write a distribution JSON")
    g.add_argument("--d", type=int, required=True)
    g.add_argument("--junta", help="comma-separated 1-based coordinates, e.g. 1,4,7")
    g.add_argument("--table", default="parity",
                   help="parity, majority, and, or, dictator, or comma-separated +-1 values")
    g.add_argument("--eta", type=float, default=0.0, help="label flip probability in [0, 1/2)")
    g.add_argument("--bias", type=float, default=None, help="product marginal, P(x_j=-1)")
    g.add_argument("--uniform-label", action="store_true", help="Y a fair coin independent of X")
    g.add_argument("--k", type=int, default=None, help="junta size for the printed opt")
    g.set_defaults(func=cmd_gen_dist)

    s = sub.add_parser("sample", parents=[common], help="draw a dataset CSV from a distribution")
    s.add_argument("--dist", required=True)
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--stream", type=int, default=0)
    s.set_defaults(func=cmd_sample)

    ln = sub.add_parser("learn", parents=[common], help="train a predictor")
    ln.add_argument("--alg", choices=sorted(LEARNERS), required=True)
    ln.add_argument("--k", type=int, required=True)
    ln.add_argument("--data", required=True)
    ln.add_argument("--no-timing", action="store_true", help="omit wall-clock from the report")
    ln.set_defaults(func=cmd_learn)

    e = sub.add_parser("eval", parents=[common], help="loss of a model on data or a distribution")
    e.add_argument("--model", required=True)
    e.add_argument("--data")
    e.add_argument("--dist")
    e.set_defaults(func=cmd_eval)

    x = sub.add_parser("experiment", parents=[common], help="run a TOML-configured experiment")
    x.add_argument("--config", required=True)
    x.add_argument("--no-timing", action="store_true", help="write 0 in the seconds column")
    x.set_defaults(func=cmd_experiment)

    v = sub.add_parser("verify", parents=[common], help="run identity/inequality suites")
    v.add_argument("--check", action="append", help=f"one of {', '.join(verify_mod.CHECKS)}")
    v.add_argument("--trials", type=int, default=None)
    v.add_argument("--deviation-bound", choices=["stated", "hoeffding"], default="stated",
                   help="radius for the coefficient-deviation suite")
    v.set_defaults(func=cmd_verify)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.command == "sample" and args.seed is None:
        args.seed = 0
    try:
        return args.func(args)
    except (UsageError, ValueError, DimensionError, OSError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
