"""``rbtll`` command line: sampling, fitting, model comparison and simulation.

Exit codes: 0 ok, 2 bad flags or parameter domain, 3 sampler envelope
failure, 4 unreadable data, 5 optimiser did not converge (report still written).
"""
import argparse
import json
import sys
from pathlib import Path

from . import distribution as dist
from . import estimation, gof, sampling, simulation
from .data import DataError, load
from .distribution import DomainError, MomentNotFiniteError, QuadratureError, RbtllParams
from .rivals import RivalModel

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_ENVELOPE = 3
EXIT_DATA = 4
EXIT_NOCONV = 5


class UsageError(Exception):
    pass


def _float_list(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _int_list(text):
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _theta_args(p, required=True):
    p.add_argument("--gamma", type=float, required=required)
    p.add_argument("--upsilon", type=float, required=required)
    p.add_argument("--p", type=float, required=required)


def _theta(args):
    return RbtllParams(args.gamma, args.upsilon, args.p)


def _threads(args):
    if args.threads is not None:
        if args.threads < 1:
            raise UsageError("--threads must be >= 1")
        return args.threads
    return simulation.default_threads()


def _json(obj, out):
    json.dump(obj, out, indent=2, allow_nan=True)
    out.write("\n")


def _open_out(path):
    if path in (None, "-"):
        return sys.stdout, False
    return open(path, "w", encoding="utf-8", newline=""), True


# ---- subcommands ----------------------------------------------------------

def cmd_sample(args):
    th = _theta(args)
    if args.n < 1:
        raise UsageError("--n must be >= 1")
    values, _ = sampling.draw(th, args.n, sampling.RngStream(args.seed, 0))
    out, close = _open_out(args.out)
    try:
        out.write("".join(f"{v:.17g}\n" for v in values))
    finally:
        if close:
            out.close()
    return EXIT_OK


def cmd_fit(args):
    s = load(args.data)
    opts = estimation.FitOptions(restarts=args.restarts, seed=args.seed)
    model = args.model.lower()
    if model == "rbtll":
        start = None
        if args.start is not None:
            if len(args.start) != 3:
                raise UsageError("--start takes gamma,upsilon,p")
            start = RbtllParams(*args.start)
        res = estimation.fit(args.method, s, start=start, opts=opts)
    else:
        if estimation.Method.parse(args.method) is not estimation.Method.MLE:
            raise UsageError("rival models are fitted by MLE only")
        res = estimation.fit_rival(RivalModel(model), s, opts=opts)
    report = res.to_dict()
    report["data"] = {"name": s.name, "source": s.source, "n": len(s)}
    if args.format == "json":
        _json(report, sys.stdout)
    else:
        print(f"data      {s.name} (n={len(s)})")
        print(f"model     {report['model']}  method {report['method']}")
        for k, v in report["params"].items():
            se = (report["std_errors"] or {}).get(k)
            print(f"  {k:<8} {v:.6g}" + ("" if se is None else f"  (se {se:.4g})"))
        print(f"objective {report['objective']:.10g}")
        print(f"-2logL    {report['minus2loglik']:.4f}")
        print(f"converged {report['converged']}")
    return EXIT_OK if res.converged else EXIT_NOCONV


def cmd_compare(args):
    s = load(args.data)
    models = [m.strip().lower() for m in args.models.split(",") if m.strip()]
    bad = [m for m in models if m not in gof.MODEL_NAMES]
    if bad or not models:
        raise UsageError(f"unknown model(s) {bad}; choose from {list(gof.MODEL_NAMES)}")
    reports = gof.compare_models(s, models, args.pvalue_mode, args.bootstrap, args.seed, _threads(args))
    if args.format == "json":
        _json({"data": {"name": s.name, "n": len(s)}, "ranking": [r.to_dict() for r in reports]}, sys.stdout)
    else:
        print(gof.format_table(reports))
    ok = all(r.error is None and r.converged for r in reports)
    return EXIT_OK if ok else EXIT_NOCONV


def _sim_configs(args):
    estimators = args.estimators.split(",") if args.estimators else tuple(estimation.Method)
    try:
        estimators = tuple(estimation.Method.parse(m) for m in estimators)
    except KeyError as exc:
        raise UsageError(f"unknown estimator {exc}") from None
    sizes = tuple(args.sizes) if args.sizes else simulation.STUDY_SIZES
    custom = [args.gamma, args.upsilon, args.p]
    if any(v is not None for v in custom):
        if args.case:
            raise UsageError("give either --case or --gamma/--upsilon/--p")
        if any(v is None for v in custom):
            raise UsageError("custom parameters need all of --gamma, --upsilon, --p")
        return [simulation.SimConfig(RbtllParams(*custom), sizes, args.reps, args.seed, estimators, "custom")]
    labels = args.case or ["I"]
    if any(l.upper() == "ALL" for l in labels):
        labels = list(simulation.BUILTIN_CASES)
    cfgs = []
    for label in labels:
        try:
            base = simulation.builtin_case(label, reps=args.reps, seed=args.seed, estimators=estimators)
        except simulation.ConfigError as exc:
            raise UsageError(str(exc)) from None
        cfgs.append(simulation.SimConfig(base.truth, sizes, args.reps, args.seed, estimators, base.case_label))
    return cfgs


def cmd_simulate(args):
    cfgs = _sim_configs(args)
    threads = _threads(args)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    for cfg in cfgs:
        table = simulation.run_simulation(cfg, threads=threads)
        path = out_dir / f"case_{cfg.case_label}.csv"
        with open(path, "w", encoding="utf-8", newline="") as fh:
            table.to_csv(fh)
        flagged = [f"{r.estimator.name}@{r.n}" for r in table.rows if r.unreliable]
        note = f" (unreliable cells: {', '.join(flagged)})" if flagged else ""
        print(f"{path}{note}", file=sys.stderr)
    return EXIT_OK


def cmd_moments(args):
    th = _theta(args)
    if args.order < 1:
        raise UsageError("--order must be >= 1")
    rows = {}
    for r in range(1, args.order + 1):
        try:
            rows[str(r)] = dist.raw_moment(r, th)
        except MomentNotFiniteError:
            rows[str(r)] = None
    out = {"params": {"gamma": th.gamma, "upsilon": th.upsilon, "p": th.p}, "raw_moments": rows}
    m1, m2 = rows.get("1"), rows.get("2")
    out["mean"] = m1
    out["variance"] = None if m1 is None or m2 is None else m2 - m1 * m1
    _json(out, sys.stdout)
    return EXIT_OK


def cmd_quantile(args):
    th = _theta(args)
    for u in args.u:
        print(f"{u!r}\t{dist.quantile(u, th):.17g}")
    return EXIT_OK


# ---- parser ---------------------------------------------------------------

def build_parser():
    ap = argparse.ArgumentParser(prog="rbtll", description="RBTLL lifetime distribution toolkit")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, seed=True):
        p.add_argument("--threads", type=int, default=None,
                       help="worker threads (default: $RBTLL_THREADS or all cores)")
        if seed:
            p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("sample", help="draw variates by acceptance-rejection")
    _theta_args(p)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--out", default="-")
    common(p)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("fit", help="fit RBTLL (any estimator) or a rival model (MLE)")
    p.add_argument("--data", required=True, help="builtin:pump, builtin:rock or a file path")
    p.add_argument("--method", default="mle")
    p.add_argument("--model", default="rbtll", choices=["rbtll", "ll", "w", "tw"])
    p.add_argument("--start", type=_float_list, default=None, help="gamma,upsilon,p")
    p.add_argument("--restarts", type=int, default=4)
    p.add_argument("--format", choices=["json", "text"], default="json")
    common(p)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("compare", help="fit all models and rank by goodness of fit")
    p.add_argument("--data", required=True)
    p.add_argument("--models", default=",".join(gof.MODEL_NAMES))
    p.add_argument("--pvalue-mode", choices=list(gof.PVALUE_MODES), default="asymptotic")
    p.add_argument("--bootstrap", type=int, default=200, metavar="B", help="resamples in bootstrap mode")
    p.add_argument("--format", choices=["table", "json"], default="table")
    common(p)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("simulate", help="Monte Carlo bias/MSE/MRE tables")
    p.add_argument("--case", action="append", help="I, II, III, IV or all (repeatable)")
    _theta_args(p, required=False)
    p.add_argument("--reps", type=int, default=simulation.DESK_REPS)
    p.add_argument("--sizes", type=_int_list, default=None)
    p.add_argument("--estimators", default=None, help="comma list, default all seven")
    p.add_argument("--out-dir", default=".")
    common(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("moments", help="raw moments by quadrature")
    _theta_args(p)
    p.add_argument("--order", type=int, default=4)
    common(p, seed=False)
    p.set_defaults(func=cmd_moments)

    p = sub.add_parser("quantile", help="quantile function")
    _theta_args(p)
    p.add_argument("u", type=float, nargs="+")
    common(p, seed=False)
    p.set_defaults(func=cmd_quantile)
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, DomainError, simulation.ConfigError) as exc:
        print(f"rbtll: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (sampling.EnvelopeError, sampling.SamplingError) as exc:
        print(f"rbtll: sampler failure: {exc}", file=sys.stderr)
        return EXIT_ENVELOPE
    except (DataError, estimation.FitError) as exc:
        print(f"rbtll: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except QuadratureError as exc:
        print(f"rbtll: quadrature failure: {exc}", file=sys.stderr)
        return EXIT_NOCONV


if __name__ == "__main__":
    sys.exit(main())
