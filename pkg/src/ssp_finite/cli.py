"""Command line entry point: ``simulate | fit | validate | bench``.

Main entry points live in the library; this module only maps flags onto
:class:`~ssp_finite.runner.RunConfig` and the validation/bench functions.
``fit`` reads an optional flat ``key = value`` config file and any flag
given on the command line overrides it.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys

from . import runner, validation
from .datasets import simulate_mixture, write_csv

# fit flags that map one-to-one onto RunConfig fields
_FIT_FLAGS = [
    ("--model", str, "model name: " + ", ".join(runner.MODELS)),
    ("--schedule", str, "natural | exp:<eta> | geom:<rho>"),
    ("--iters", int, "sweeps per chain"),
    ("--burnin", int, "sweeps discarded before density/summary accumulation"),
    ("--seed", int, "root seed"),
    ("--chains", int, "independent chains (pooled density)"),
    ("--data", str, "galaxy | simulated:<n>[:<seed>] | path to a one-column CSV"),
    ("--grid", int, "density grid size"),
    ("--out", str, "output directory"),
    ("--mu0", float, None), ("--tau0", float, None), ("--a", float, None), ("--b", float, None),
    ("--a-alpha", float, None), ("--b-alpha", float, None),
    ("--a-v", float, None), ("--b-v", float, None),
    ("--py-discount", float, "discount of Beta(1-d, s+jd) lengths (betaseq-finite)"),
    ("--py-strength", float, "strength of Beta(1-d, s+jd) lengths (betaseq-finite)"),
    ("--alpha-init", float, "starting concentration (default: prior draw)"),
]


def _add_fit(sub):
    p = sub.add_parser("fit", help="run a sampler and write density.csv, trace.csv, summary.json")
    p.add_argument("--config", help="flat key = value file; flags override it")
    for flag, kind, help_ in _FIT_FLAGS:
        p.add_argument(flag, type=kind, default=None, help=help_)
    p.add_argument("--freeze-concentration", action="store_const", const=True, default=None,
                   help="keep alpha at its initial value")
    p.add_argument("--no-timing", dest="timing", action="store_const", const=False, default=None,
                   help="write 0 for elapsed times (makes trace.csv byte-reproducible)")
    p.add_argument("--exact-quantiles", action="store_const", const=True, default=None,
                   help="store every density draw for the credible band")
    p.set_defaults(func=cmd_fit)


def _fit_overrides(args):
    keys = [f[0][2:].replace("-", "_") for f in _FIT_FLAGS]
    keys += ["freeze_concentration", "timing", "exact_quantiles"]
    return {k: getattr(args, k) for k in keys if getattr(args, k) is not None}


def cmd_fit(args):
    overrides = _fit_overrides(args)
    if args.config:
        config = runner.load_config(args.config, **overrides)
    else:
        config = runner.RunConfig(**overrides)
    summary = runner.run_fit(config)
    c = summary["c_n"]
    print("%s %s on %s (n=%d): mean c_n %.3f [%.0f, %.0f], k* %.2f; wrote %s"
          % (config.model, config.schedule, summary["data"], summary["n"],
             c["mean"], c["q025"], c["q975"], summary["k_star"]["mean"], config.out))
    return 0


def cmd_simulate(args):
    ds = simulate_mixture(args.n, args.seed)
    if args.out in (None, "-"):
        _write_stdout(ds.values)
    else:
        os.makedirs(os.path.dirname(os.path.abspath(args.out)), exist_ok=True)
        write_csv(args.out, ds.values)
        print("wrote %d values to %s" % (len(ds), args.out))
    return 0


def _write_stdout(values):
    sys.stdout.write("x\n")
    sys.stdout.writelines("%.17g\n" % v for v in values)


def cmd_validate(args):
    kwargs = {}
    if args.quick:
        kwargs = dict(geweke_iters=20_000, slice_draws=200_000, crp_chains=5_000)
    if args.geweke_iters is not None:
        kwargs["geweke_iters"] = args.geweke_iters
    report = validation.run_validation(seed=args.seed, geweke=not args.no_geweke,
                                       progress=print, **kwargs)
    if args.out:
        report.to_json(args.out)
        print("report written to %s" % args.out)
    print("ALL PASS" if report.passed else "SOME CHECKS FAILED")
    return 0 if report.passed else 1


def cmd_bench(args):
    report = runner.run_bench(iters=args.iters, ns=tuple(args.n), families=tuple(args.families),
                              grid=args.grid, seed=args.seed, out=args.out)
    print(report["table"])
    for msg in report["warnings"]:
        print("warning:", msg)
    if args.out:
        print("wrote %s" % os.path.join(args.out, "bench.json"))
    return 0


def build_parser():
    parser = argparse.ArgumentParser(prog="ssp-finite", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="draw from the four-component normal mixture")
    p.add_argument("--n", type=int, default=250)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--out", help="CSV path (default: stdout)")
    p.set_defaults(func=cmd_simulate)

    _add_fit(sub)

    p = sub.add_parser("validate", help="run the numerical checks and write a JSON report")
    p.add_argument("--seed", type=int, default=2024)
    p.add_argument("--out", help="JSON report path")
    p.add_argument("--quick", action="store_true", help="reduced simulation sizes")
    p.add_argument("--no-geweke", action="store_true", help="skip the joint-distribution test")
    p.add_argument("--geweke-iters", type=int)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("bench", help="time every schedule x family x n cell")
    p.add_argument("--iters", type=int, default=100_000)
    p.add_argument("--n", type=int, nargs="+", default=[250, 1000])
    p.add_argument("--families", nargs="+", default=["dp", "gsb"], choices=["dp", "gsb"])
    p.add_argument("--grid", type=int, default=500)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--out", help="directory for bench.json and bench.txt")
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
