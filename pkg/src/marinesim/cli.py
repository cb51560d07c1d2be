"""``marinesim`` command line.

    marinesim run <scenario> --out <dir> [--plots] [--seed <u64>]
    marinesim verify <scenario> [--out <dir>] [--seed <u64>]
    marinesim list
    marinesim describe <scenario>

Exit codes: 0 success, 1 configuration error, 2 numerical divergence,
3 a verification check failed.
"""
import argparse
import os
import sys
from pathlib import Path

import numpy as np

from . import config
from . import experiments as exps
from .errors import ConfigError, DivergedPerturbation, NonFiniteState, SingularAttitude
from .sim import write_csv

EXIT_OK, EXIT_CONFIG, EXIT_DIVERGED, EXIT_CHECK = 0, 1, 2, 3
VERIFY_EXPERIMENTS = ("rates", "invariants", "equivalence", "passivity", "contraction")


def fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return f"{float(v):.9g}"


def summary_lines(scn, results, seed):
    lines = [f"scenario={scn.name}", f"seed={seed}"]
    for res in results:
        for k, v in res.metrics.items():
            lines.append(f"{res.name}.{k}={fmt(v)}")
        for c in res.checks:
            lines.append(f"{res.name}.{c.name}={'pass' if c.passed else 'fail'} "
                         f"value={fmt(c.value)} bound={fmt(c.bound)} margin={fmt(c.margin)}")
    n_fail = sum(not c.passed for r in results for c in r.checks)
    lines.append(f"checks_failed={n_fail}")
    return lines


def _plot(res, out, scn):
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    paths = []
    log = res.log
    if res.name.startswith("track") and log is not None:
        n = log.n
        fig, axes = plt.subplots(n, 1, figsize=(7, 1.8 * n), sharex=True)
        for i, ax in enumerate(np.atleast_1d(axes)):
            ax.plot(log.times, log.eta[:, i], label="eta")
            ax.plot(log.times, log.eta_d[:, i], "--", label="eta_d")
            ax.set_ylabel(f"eta_{i + 1}")
        np.atleast_1d(axes)[0].legend(loc="upper right")
        np.atleast_1d(axes)[-1].set_xlabel("t [s]")
        fig.tight_layout()
        p = out / f"{res.name}_eta.svg"
        fig.savefig(p)
        plt.close(fig)
        paths.append(p)
        fig, ax = plt.subplots(figsize=(7, 3))
        ax.semilogy(log.times, log.err_eta, label="|eta_t|")
        ax.semilogy(log.times, log.err_sigma, label="|sigma|")
        ax.set_xlabel("t [s]")
        ax.legend()
        fig.tight_layout()
        p = out / f"{res.name}_errors.svg"
        fig.savefig(p)
        plt.close(fig)
        paths.append(p)
    for key, label in (("W", "W"), ("distance", "distance")):
        if key in res.series:
            fig, ax = plt.subplots(figsize=(7, 3))
            y = np.abs(res.series[key])
            ax.semilogy(res.series["t"], np.where(y > 0, y, np.nan))
            ax.set_xlabel("t [s]")
            ax.set_ylabel(label)
            fig.tight_layout()
            p = out / f"{res.name}_{key}.svg"
            fig.savefig(p)
            plt.close(fig)
            paths.append(p)
    return paths


def execute(scn, names, out=None, plots=False, seed=0, stream=None):
    """Run ``names`` on a loaded scenario; returns ``(exit_code, results)``."""
    stream = stream or sys.stdout
    results = []
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
    try:
        for name in names:
            if name == "rates" and any(r.name == "track_body" for r in results):
                log = next(r for r in results if r.name == "track_body").log
                res = exps.rates(scn, log.states)
            else:
                res = exps.RUNNERS[name](scn, seed)
            results.append(res)
            if out is not None and res.header is not None:
                write_csv(out / f"{name}.csv", res.header, res.rows)
            if plots and out is not None:
                _plot(res, out, scn)
    except (NonFiniteState, DivergedPerturbation) as exc:
        print(f"error: {exc}", file=sys.stderr)
        log = getattr(exc, "log", None)
        if out is not None and log is not None and hasattr(log, "rows"):
            write_csv(out / f"{name}.partial.csv", log.columns(), log.rows())
        return EXIT_DIVERGED, results
    except SingularAttitude as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DIVERGED, results
    by_name = {r.name: r for r in results}
    if "track_body" in by_name and "track_inertial" in by_name:
        by_name["track_inertial"].metrics["cross_frame_eta_gap"] = exps.cross_frame_gap(
            by_name["track_body"], by_name["track_inertial"])
    lines = summary_lines(scn, results, seed)
    text = "\n".join(lines) + "\n"
    if out is not None:
        (out / "summary.txt").write_text(text, encoding="utf-8")
    stream.write(text)
    failed = any(not r.passed for r in results)
    return (EXIT_CHECK if failed else EXIT_OK), results


def _seed(s):
    v = int(s)
    if not 0 <= v < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def build_parser():
    ap = argparse.ArgumentParser(prog="marinesim", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="cmd", required=True)
    r = sub.add_parser("run", help="run a scenario's experiments and write logs")
    r.add_argument("scenario")
    r.add_argument("--out", default=None, help="output directory (default $MARINESIM_OUT)")
    r.add_argument("--plots", action="store_true", help="also write SVG plots")
    r.add_argument("--seed", type=_seed, default=0)
    v = sub.add_parser("verify", help="run the verification experiments only")
    v.add_argument("scenario")
    v.add_argument("--out", default=None)
    v.add_argument("--seed", type=_seed, default=0)
    sub.add_parser("list", help="list bundled scenarios")
    d = sub.add_parser("describe", help="print the fully resolved scenario")
    d.add_argument("scenario")
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    if args.cmd == "list":
        for name in config.list_scenarios():
            print(name)
        return EXIT_OK
    try:
        if args.cmd == "describe":
            sys.stdout.write(config.describe(args.scenario))
            return EXIT_OK
        scn = config.load_scenario(args.scenario)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    out = args.out or os.environ.get("MARINESIM_OUT")
    if args.cmd == "run":
        if out is None:
            print("error: no output directory; pass --out or set MARINESIM_OUT", file=sys.stderr)
            return EXIT_CONFIG
        names = scn.experiments
        plots = args.plots
    else:
        names = [e for e in scn.experiments if e in VERIFY_EXPERIMENTS]
        plots = False
    code, _ = execute(scn, names, Path(out) if out else None, plots, args.seed)
    return code


if __name__ == "__main__":
    sys.exit(main())
