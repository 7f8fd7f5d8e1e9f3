"""Command line entry point: ``partlab <command> ...``.

Commands
--------
partition   operations on partitions given in text form, e.g. "{1 2'}{2 1'}"
transform   moment / cumulant / exclusive conversions of JSON table files
simulate    run an experiment config and write its CSV and JSON reports
predict     closed-form and algebraic predictions
verify      run the acceptance battery; nonzero exit status on failure
"""

from __future__ import annotations

import argparse
import json
import sys
from contextlib import nullcontext
from fractions import Fraction
from pathlib import Path

from . import matrices
from .errors import ConfigError, PartlabError
from .partition import (Partition, compare, compose, enumerate_family, join, orbit_rep,
                        product_index_set, stats, tensor, transpose)
from .tables import Table, format_value


def _jsonable(v):
    if isinstance(v, Fraction):
        return v.numerator if v.denominator == 1 else format_value(v)
    if isinstance(v, complex):
        return format_value(v)
    if isinstance(v, bool) or v is None:
        return v
    if isinstance(v, (int, float, str)):
        return v
    if hasattr(v, "item"):
        return _jsonable(v.item())
    return str(v)


def _emit(obj, out=None) -> None:
    text = json.dumps(obj, indent=1, sort_keys=True, default=_jsonable)
    print(text)
    if out is not None:
        Path(out).write_text(text + "\n")


def _common() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file")
    common.add_argument("--seed", type=int, help="override the config seed")
    common.add_argument("--out-dir", help="directory for reports")
    common.add_argument("--threads", type=int, help="cap BLAS / OpenMP threads")
    common.add_argument("--budget", type=float,
                        help=f"flop budget for tensor contractions (default {matrices.DEFAULT_BUDGET:g})")
    return common


# ---------------------------------------------------------------------------
# partition

_BINARY = {"compose", "join", "tensor", "compare"}


def _cmd_partition(args) -> int:
    op = args.op
    ps = [Partition.parse(x) for x in args.partitions]
    if op == "enumerate":
        if len(ps) or args.k is None:
            raise ConfigError("enumerate takes --k and --tag, no partitions")
        res = {"k": args.k, "tag": args.tag,
               "partitions": [str(p) for p in enumerate_family(args.k, args.tag)]}
        _emit(res)
        return 0
    need = 2 if op in _BINARY else 1
    if len(ps) != need:
        raise ConfigError(f"{op} takes {need} partition(s), got {len(ps)}")
    p = ps[0]
    if op == "stats":
        res = {"partition": str(p), "k": p.k, **stats(p)._asdict()}
    elif op == "transpose":
        res = {"result": str(transpose(p))}
    elif op == "orbit":
        res = {"result": str(orbit_rep(p))}
    elif op == "pis":
        pairs = sorted(product_index_set(p, args.tag), key=lambda x: (x[0].labels, x[1].labels))
        res = {"partition": str(p), "tag": args.tag,
               "pairs": [[str(a), str(b)] for a, b in pairs]}
    elif op == "compose":
        r, kappa = compose(p, ps[1])
        res = {"result": str(r), "kappa": kappa}
    elif op == "join":
        res = {"result": str(join(p, ps[1]))}
    elif op == "tensor":
        res = {"result": str(tensor(p, ps[1]))}
    elif op == "compare":
        res = {k: (str(v) if isinstance(v, Fraction) else v)
               for k, v in compare(p, ps[1])._asdict().items()}
    else:  # pragma: no cover - argparse restricts choices
        raise ConfigError(f"unknown op {op}")
    _emit(res)
    return 0


# ---------------------------------------------------------------------------
# transform

def _cmd_transform(args) -> int:
    from .tables import CumulantTable, MomentTable
    from .transforms import cumulants_to_moments, exclusive_transform, moments_to_cumulants
    table = Table.from_json(Path(args.input).read_text())
    tag = args.tag or table.tag
    if args.to == "cumulants":
        out = moments_to_cumulants(table.copy(MomentTable), tag)
    elif args.to == "moments":
        if table.kind == "exclusive":
            out = exclusive_transform(table, "P", "from_exclusive")
        else:
            out = cumulants_to_moments(table.copy(CumulantTable), tag)
    else:
        out = exclusive_transform(table, tag, "to_exclusive")
    text = out.to_json()
    if args.output:
        Path(args.output).write_text(text + "\n")
    else:
        print(text)
    return 0


# ---------------------------------------------------------------------------
# simulate

def _cmd_simulate(args) -> int:
    from .experiments import ExperimentConfig, run_experiment
    if not args.config:
        raise ConfigError("simulate needs --config")
    doc = json.loads(Path(args.config).read_text())
    if args.seed is not None:
        doc["seed"] = args.seed
    cfg = ExperimentConfig.from_dict(doc)
    records = run_experiment(cfg, args.out_dir or ".")
    bad = [r for r in records if not r.passed]
    print(f"{cfg.scenario}: {len(records) - len(bad)}/{len(records)} records pass")
    return 1 if bad else 0


# ---------------------------------------------------------------------------
# predict

def _cmd_predict(args) -> int:
    from .processes import reference_moments
    ks = range(1, args.k + 1)
    if args.what == "semicircle":
        res = {"moments": {str(k): reference_moments("semicircle", k) for k in ks}}
    elif args.what == "unitary-bm":
        res = {"t": args.t,
               "moments": {str(k): reference_moments("unitary-bm", k, args.t) for k in ks}}
        if args.ode:
            from .exponentials import boxtimes_evolution
            from .partition import cycle
            from .processes import generator_spectral_form
            phi = generator_spectral_form("bm-unitary", {"beta": 2})
            ode = {}
            for k in ks:
                v = boxtimes_evolution(phi, k, [args.t], start=[cycle(k)])[(args.t, cycle(k))]
                ode[str(k)] = complex(v).real
            res["ode"] = ode
    elif args.what == "free-poisson":
        from .exponentials import exp_boxplus_moment
        from .partition import cycle
        from .processes import LevyTriplet, generator_spectral_form
        lam = Fraction(args.lam)
        trip = LevyTriplet("additive", lam, 0, ((1, lam),))
        phi = generator_spectral_form("levy-additive", {"triplet": trip})
        t = Fraction(args.t).limit_denominator(10 ** 6)
        res = {"lambda": lam, "t": t,
               "exp_boxplus": {str(k): exp_boxplus_moment(phi, t, cycle(k)) for k in ks},
               "noncrossing": {str(k): reference_moments("free-poisson", k, lam=lam * t)
                               for k in ks}}
    elif args.what == "classical-bridge":
        from .sampling import law_moments
        mom = law_moments(args.law, args.k)
        l = args.l or args.k
        res = {"law": args.law, "l": l,
               "kappa_zero": {str(k): matrices.classical_bridge(mom, k, l) for k in ks},
               "classical": {str(k): c for k, c in
                             zip(ks, matrices.classical_cumulants(mom, args.k))}}
    else:  # pragma: no cover
        raise ConfigError(f"unknown prediction {args.what}")
    out = Path(args.out_dir) / f"predict-{args.what}.json" if args.out_dir else None
    if out is not None:
        out.parent.mkdir(parents=True, exist_ok=True)
    _emit(res, out)
    return 0


# ---------------------------------------------------------------------------
# verify

def _cmd_verify(args) -> int:
    from .acceptance import verify_suite
    summary = verify_suite(args.level, samples=args.samples, report=print)
    if args.out_dir:
        out = Path(args.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "verify.json").write_text(json.dumps(summary.to_dict(), indent=1,
                                                    sort_keys=True) + "\n")
    n_ok = sum(c.passed for c in summary.results)
    print(f"{n_ok}/{len(summary.results)} criteria pass")
    return 0 if summary.ok else 1


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = _common()
    ap = argparse.ArgumentParser(prog="partlab", description=__doc__.splitlines()[0],
                                 parents=[common])
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("partition", parents=[common], help="partition operations")
    sp.add_argument("op", choices=["stats", "compose", "transpose", "join", "tensor",
                                   "compare", "orbit", "pis", "enumerate"])
    sp.add_argument("partitions", nargs="*", help='text form, e.g. "{1 2\'}{2 1\'}"')
    sp.add_argument("--tag", default="P", choices=["P", "B", "S", "H", "Bs"])
    sp.add_argument("--k", type=int)
    sp.set_defaults(func=_cmd_partition)

    sp = sub.add_parser("transform", parents=[common], help="table conversions")
    sp.add_argument("input", help="JSON table file")
    sp.add_argument("--to", required=True, choices=["cumulants", "moments", "exclusive"])
    sp.add_argument("--tag", choices=["P", "B", "S", "H", "Bs"])
    sp.add_argument("-o", "--output")
    sp.set_defaults(func=_cmd_transform)

    sp = sub.add_parser("simulate", parents=[common], help="run an experiment config")
    sp.set_defaults(func=_cmd_simulate)

    sp = sub.add_parser("predict", parents=[common], help="predictions")
    sp.add_argument("what", choices=["semicircle", "unitary-bm", "free-poisson",
                                     "classical-bridge"])
    sp.add_argument("--k", type=int, default=4)
    sp.add_argument("--t", type=float, default=1.0)
    sp.add_argument("--lam", default="1", help="free Poisson rate")
    sp.add_argument("--law", default="bernoulli(0.5)")
    sp.add_argument("--l", type=int, help="matrix size for the classical bridge")
    sp.add_argument("--ode", action="store_true", help="also integrate the generator ODE")
    sp.set_defaults(func=_cmd_predict)

    sp = sub.add_parser("verify", parents=[common], help="acceptance battery")
    sp.add_argument("--level", default="exact", choices=["exact", "mc", "all"])
    sp.add_argument("--samples", type=int)
    sp.set_defaults(func=_cmd_verify)
    return ap


def _thread_limit(n):
    if n is None:
        return nullcontext()
    from threadpoolctl import threadpool_limits
    return threadpool_limits(limits=n)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    saved = matrices.DEFAULT_BUDGET
    if args.budget is not None:
        matrices.DEFAULT_BUDGET = args.budget
    try:
        with _thread_limit(args.threads):
            return args.func(args)
    except (PartlabError, ValueError, OSError, json.JSONDecodeError) as e:
        print(f"partlab: error: {e}", file=sys.stderr)
        return 2
    finally:
        matrices.DEFAULT_BUDGET = saved


if __name__ == "__main__":
    sys.exit(main())
