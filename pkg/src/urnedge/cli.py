"""Batch command-line front end.

Subcommands: expand, exact, simulate, compare, diagnose, catalog.  Output is
deterministic CSV (17 significant digits, '.' decimal, ',' separator, '#'
metadata header lines) or JSON; exit code 1 signals a configuration error
and 2 a numerical error, with the error class name on standard error.
"""

from __future__ import annotations

import argparse
import hashlib
import io
import json
import sys

import numpy as np

from . import errors
from .catalog import (
    chisq_closed_form,
    cross_check,
    dixon_closed_form,
    samplesum_closed_form,
)
from .centering import center
from .diagnostics import gates
from .expansion import build_w, cdf_expansion
from .kernels import CompoundSumKernel, PowerKernel, kernel_from_json
from .models import BINOMIAL, NEGBINOMIAL, POISSON, gum_from_json
from .oracle import exact_pmf, sample

CONFIG_ERRORS = (
    ValueError,
    KeyError,
    OSError,
    json.JSONDecodeError,
    errors.NonpositiveShape,
    errors.InfeasibleTotal,
    errors.SupportTooShort,
    errors.UnsupportedOrder,
    errors.OrderTooHigh,
)

NUMERICAL_ERRORS = (
    errors.DegenerateStatistic,
    errors.StateBudgetExceeded,
    errors.QuadratureNotConverged,
    errors.NonRepresentableValues,
    errors.OffLattice,
    errors.MismatchBeyondTolerance,
    errors.MissingMoments,
)


def fmt(x):
    """Deterministic float formatting: 17 significant digits."""
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".17g")


def build_parser():
    p = argparse.ArgumentParser(
        prog="urnedge",
        description="Edgeworth expansions for decomposable statistics in "
                    "generalized urn models")
    p.add_argument("command", choices=[
        "expand", "exact", "simulate", "compare", "diagnose", "catalog"])
    p.add_argument("--model", required=True, help="GumSpec JSON file")
    p.add_argument("--kernel", help="kernel JSON file (default: power k=2)")
    p.add_argument("--s", type=int, default=5, choices=(3, 4, 5))
    p.add_argument("--tail-eps", type=float, default=1e-12)
    p.add_argument("--qv", type=float, default=None)
    p.add_argument("--reps", type=int, default=100000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--umin", type=float, default=-3.0)
    p.add_argument("--umax", type=float, default=3.0)
    p.add_argument("--usteps", type=int, default=61)
    p.add_argument("--out", help="output file (default: stdout)")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--plot", help="also render a PNG figure (compare only)")
    return p


def _load_config(args):
    with open(args.model) as fh:
        model_doc = json.load(fh)
    if args.kernel:
        with open(args.kernel) as fh:
            kernel_doc = json.load(fh)
    else:
        kernel_doc = {"builtin": "power", "k": 2}
    gum = gum_from_json(model_doc)
    kernel = kernel_from_json(kernel_doc)
    digest = hashlib.sha256(json.dumps(
        {"model": model_doc, "kernel": kernel_doc, "command": args.command,
         "s": args.s, "tail_eps": args.tail_eps, "qv": args.qv,
         "reps": args.reps, "seed": args.seed,
         "grid": [args.umin, args.umax, args.usteps]},
        sort_keys=True).encode()).hexdigest()[:16]
    return gum, kernel, digest


def _metadata(args, digest):
    return [
        f"# config_hash: {digest}",
        f"# tail_eps: {fmt(args.tail_eps)}",
        f"# seed: {args.seed}",
    ]


def _emit(args, lines):
    text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _u_grid(args):
    if args.usteps < 2:
        raise ValueError("usteps must be >= 2")
    return np.linspace(args.umin, args.umax, args.usteps)


def _csv_table(header, rows):
    out = [",".join(header)]
    for row in rows:
        out.append(",".join(fmt(v) if not isinstance(v, str) else v
                            for v in row))
    return out


def cmd_expand(args, gum, kernel, digest):
    cs = center(gum, kernel, tail_eps=args.tail_eps)
    res = build_w(cs, args.s)
    us = _u_grid(args)
    vals = [cdf_expansion(res, u) for u in us]
    if args.format == "json":
        _emit(args, [json.dumps({
            "config_hash": digest,
            "expansion": res.to_json(),
            "grid": [{"u": float(u), "W": float(v)}
                     for u, v in zip(us, vals)],
        }, sort_keys=True)])
        return
    lines = _metadata(args, digest)
    lines.append("# expansion: " + json.dumps(res.to_json(), sort_keys=True))
    lines += _csv_table(["u", f"W{args.s}"], zip(us, vals))
    _emit(args, lines)


def cmd_exact(args, gum, kernel, digest):
    dist = exact_pmf(gum, kernel, tail_eps=args.tail_eps, q_v=args.qv)
    if args.format == "json":
        doc = dist.to_json()
        doc["config_hash"] = digest
        _emit(args, [json.dumps(doc, sort_keys=True)])
        return
    lines = _metadata(args, digest)
    lines.append(f"# span_h: {fmt(dist.h)}")
    lines.append(f"# total_prob_check: {fmt(dist.total_prob_check)}")
    lines += _csv_table(["value", "prob"], zip(dist.values, dist.probs))
    _emit(args, lines)


def cmd_simulate(args, gum, kernel, digest):
    dist = sample(gum, kernel, args.reps, args.seed)
    cdf = np.cumsum(dist.probs)
    if args.format == "json":
        doc = dist.to_json()
        doc["config_hash"] = digest
        _emit(args, [json.dumps(doc, sort_keys=True)])
        return
    lines = _metadata(args, digest)
    lines.append(f"# reps: {args.reps}")
    lines += _csv_table(["value", "prob", "cdf"],
                        zip(dist.values, dist.probs, cdf))
    _emit(args, lines)


def cmd_compare(args, gum, kernel, digest):
    cs = center(gum, kernel, tail_eps=args.tail_eps)
    dist = exact_pmf(gum, kernel, tail_eps=args.tail_eps, q_v=args.qv)
    results = {s: build_w(cs, s) for s in (3, 4, 5)}
    us = _u_grid(args)
    shift = cs.lam + gum.x_N * cs.B_N * cs.gamma
    exact = dist.cdf(us * cs.sigma + shift)
    cols = {s: np.array([cdf_expansion(results[s], u) for u in us])
            for s in (3, 4, 5)}
    errs = {s: np.abs(exact - cols[s]) for s in (3, 4, 5)}
    rows = [(u, e, cols[3][i], cols[4][i], cols[5][i],
             errs[3][i], errs[4][i], errs[5][i])
            for i, (u, e) in enumerate(zip(us, exact))]
    sup = ("sup", "", "", "", "",
           float(errs[3].max()), float(errs[4].max()), float(errs[5].max()))
    header = ["u", "exact", "W3", "W4", "W5", "err3", "err4", "err5"]
    if args.format == "json":
        _emit(args, [json.dumps({
            "config_hash": digest,
            "rows": [dict(zip(header, [float(v) if not isinstance(v, str)
                                       else v for v in r])) for r in rows],
            "sup": {"err3": sup[5], "err4": sup[6], "err5": sup[7]},
        }, sort_keys=True)])
    else:
        lines = _metadata(args, digest)
        lines += _csv_table(header, rows + [sup])
        _emit(args, lines)
    if args.plot:
        _render_compare_plot(args.plot, us, exact, cols, errs)


def _render_compare_plot(path, us, exact, cols, errs):
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10, 4))
    ax1.plot(us, exact, "k-", lw=2, label="exact")
    for s, style in ((3, ":"), (4, "--"), (5, "-.")):
        ax1.plot(us, cols[s], style, label=f"W{s}")
    ax1.set_xlabel("u")
    ax1.set_ylabel("CDF")
    ax1.legend()
    for s in (3, 4, 5):
        ax2.semilogy(us, np.maximum(errs[s], 1e-17), label=f"|err{s}|")
    ax2.set_xlabel("u")
    ax2.set_ylabel("absolute error")
    ax2.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def cmd_diagnose(args, gum, kernel, digest):
    cs = center(gum, kernel, tail_eps=args.tail_eps)
    rep = gates(cs, args.s, delta=1.0)
    if args.format == "json":
        doc = rep.to_json()
        doc["config_hash"] = digest
        _emit(args, [json.dumps(doc, sort_keys=True)])
        return
    lines = _metadata(args, digest)
    lines += _csv_table(["quantity", "value"],
                        [(k, v if isinstance(v, str) else fmt(v))
                         for k, v in rep.rows()])
    _emit(args, lines)


def cmd_catalog(args, gum, kernel, digest):
    family = gum.family
    cs = center(gum, kernel, tail_eps=args.tail_eps)
    if family == POISSON:
        if not (isinstance(kernel, PowerKernel) and kernel.k == 2):
            raise ValueError("catalog for the Poisson family needs the "
                             "power-2 kernel (chi-square statistic)")
        params = chisq_closed_form(gum.n, [c.shape for c in gum.cells])
    elif family == BINOMIAL:
        if not isinstance(kernel, CompoundSumKernel):
            raise ValueError("catalog for the binomial family needs a "
                             "compound-sum kernel (sample sum)")
        omega = [int(round(c.shape)) for c in gum.cells]
        mom = [law.raw_moments(4) for law in kernel.laws]
        params = samplesum_closed_form(omega, mom, gum.n)
    elif family == NEGBINOMIAL:
        if not (isinstance(kernel, PowerKernel) and kernel.k == 2):
            raise ValueError("catalog for the negative-binomial family "
                             "needs the power-2 kernel (Dixon statistic)")
        ks = {c.shape for c in gum.cells}
        if len(ks) != 1:
            raise ValueError("Dixon closed form needs equal cell orders")
        k = int(round(ks.pop()))
        M = k * gum.N
        params = dixon_closed_form(M, gum.n, k)
    else:  # pragma: no cover
        raise ValueError(f"unknown family {family!r}")
    diff = cross_check(params, cs)
    if args.format == "json":
        _emit(args, [json.dumps({
            "config_hash": digest,
            "params": params.to_json(),
            "cross_check": diff.to_json(),
        }, sort_keys=True)])
        return
    lines = _metadata(args, digest)
    lines.append("# params: " + json.dumps(params.to_json(), sort_keys=True))
    rows = [(name, cf, en, rd, "yes" if asserted else "no", flag or "-")
            for name, cf, en, rd, flag, asserted in diff.rows]
    lines += _csv_table(
        ["field", "closed_form", "engine", "rel_diff", "asserted", "flag"],
        rows)
    _emit(args, lines)


COMMANDS = {
    "expand": cmd_expand,
    "exact": cmd_exact,
    "simulate": cmd_simulate,
    "compare": cmd_compare,
    "diagnose": cmd_diagnose,
    "catalog": cmd_catalog,
}


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 1 if exc.code else 0
    try:
        gum, kernel, digest = _load_config(args)
        COMMANDS[args.command](args, gum, kernel, digest)
    except NUMERICAL_ERRORS as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    except CONFIG_ERRORS as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
