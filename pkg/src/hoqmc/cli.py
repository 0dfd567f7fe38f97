"""Command-line front end: construct nets, audit metrics, run experiments.

Exit codes: 0 on success, 1 on rejected input, 2 on guard overflow.  All
subcommands emit JSON on stdout except `sweep`, which writes a CSV (schema
"w,N,e,log10N,log10e,slope") and a log-log convergence figure next to it.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from dataclasses import dataclass

import numpy as np

from .errors import GuardError, InputError
from .ff import PrimeBase
from .nets import ConstructionParams, DigitalNet, construct_optimal_net
from .dual import metrics_report
from .walsh import kernel_walsh_coeff_1d
from .wce import (
    WceReport,
    discretization_bound,
    main_part_bound,
    squared_error_1d_exact,
    wce_dual_truncated,
    wce_exact,
)

MC_DENOMINATOR_BITS = 40


@dataclass(frozen=True)
class SweepConfig:
    """Configuration of a convergence sweep over w (N = b^(g*w))."""

    b: int
    s: int
    alpha: int
    beta: int
    g: int
    w_min: int
    w_max: int
    method: str = "exact"  # exact | dual | mc
    output: str = "sweep.csv"
    figure: str = None
    strict: bool = False
    seed: int = 0
    rational: bool = True

    def __post_init__(self):
        if self.w_min > self.w_max:
            raise InputError("empty w range")
        if self.method not in ("exact", "dual", "mc"):
            raise InputError(f"unknown sweep method {self.method!r}")


@dataclass(frozen=True)
class SweepRow:
    w: int
    N: int
    e: float
    log10_N: float
    log10_e: float
    fitted_slope_so_far: float


def _fit_slope(rows) -> float:
    """Least-squares slope of log10 e vs log10 N over the last max(3, half) rows."""
    usable = [r for r in rows if r.e > 0]
    if len(usable) < 2:
        return float("nan")
    k = max(3, len(usable) // 2)
    tail = usable[-k:]
    x = np.array([r.log10_N for r in tail])
    y = np.array([r.log10_e for r in tail])
    A = np.vstack([x, np.ones(len(x))]).T
    return float(np.linalg.lstsq(A, y, rcond=None)[0][0])


def _mc_error(N: int, s: int, alpha: int, seed: int, w: int) -> float:
    """Worst-case error of N seeded uniform random points.

    Points are drawn as integers over a fixed power-of-two denominator from
    a counter-based generator, so runs are reproducible and the s = 1 error
    is computed exactly.
    """
    rng = np.random.Generator(np.random.Philox(key=seed, counter=[w, 0, 0, 0]))
    denom = 1 << MC_DENOMINATOR_BITS
    ints = rng.integers(0, denom, size=(N, s), dtype=np.int64)
    if s == 1:
        e2 = squared_error_1d_exact([int(v) for v in ints[:, 0]], denom, alpha)
        return math.sqrt(float(max(e2, 0)))
    from .nets import NetPoint
    from .digits import digits_of

    base = PrimeBase(2)
    def _coord(v):
        d = digits_of(int(v), 2)
        d = d + (0,) * (MC_DENOMINATOR_BITS - len(d))
        return tuple(reversed(d))

    points = [
        NetPoint(base, tuple(_coord(v) for v in row)) for row in ints
    ]
    return wce_exact(points, alpha).e


def run_sweep(cfg: SweepConfig):
    """Execute the sweep; returns (rows, final slope, per-row errors)."""
    rows = []
    failures = []
    for w in range(cfg.w_min, cfg.w_max + 1):
        N = cfg.b ** (cfg.g * w)
        try:
            if cfg.method == "mc":
                e = _mc_error(N, cfg.s, cfg.alpha, cfg.seed, w)
            else:
                params = ConstructionParams(
                    s=cfg.s,
                    alpha=cfg.alpha,
                    beta=cfg.beta,
                    g=cfg.g,
                    w=w,
                    base=PrimeBase(cfg.b),
                    strict=cfg.strict,
                )
                net = construct_optimal_net(params)
                if cfg.method == "dual":
                    e = wce_dual_truncated(net, cfg.alpha).e
                else:
                    e = wce_exact(
                        list(net.points()),
                        cfg.alpha,
                        rational=cfg.rational and cfg.s == 1,
                    ).e
        except GuardError as exc:
            failures.append((w, str(exc)))
            continue
        row = SweepRow(
            w,
            N,
            e,
            math.log10(N),
            math.log10(e) if e > 0 else float("-inf"),
            float("nan"),
        )
        rows.append(row)
        rows[-1] = SweepRow(
            row.w, row.N, row.e, row.log10_N, row.log10_e, _fit_slope(rows)
        )
    slope = _fit_slope(rows)
    return rows, slope, failures


def _write_sweep_csv(rows, path: str):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["w", "N", "e", "log10N", "log10e", "slope"])
        for r in rows:
            writer.writerow(
                [r.w, r.N, repr(r.e), repr(r.log10_N), repr(r.log10_e),
                 repr(r.fitted_slope_so_far)]
            )


def _write_sweep_figure(rows, slope: float, path: str):
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    usable = [r for r in rows if r.e > 0]
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.loglog([r.N for r in usable], [r.e for r in usable], "o-", label="measured e")
    if len(usable) >= 2 and math.isfinite(slope):
        anchor = usable[-1]
        ns = np.array([usable[0].N, usable[-1].N], dtype=float)
        ax.loglog(
            ns,
            anchor.e * (ns / anchor.N) ** slope,
            "--",
            label=f"fit slope {slope:.3f}",
        )
    ax.set_xlabel("N")
    ax.set_ylabel("worst-case error")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


# ---------------------------------------------------------------------------
# argument plumbing

class _Parser(argparse.ArgumentParser):
    def error(self, message):  # exit 1 on rejected input, not argparse's 2
        raise InputError(message)


def _read_net(args) -> DigitalNet:
    if args.net_file:
        with open(args.net_file) as fh:
            return DigitalNet.from_json(json.load(fh))
    return DigitalNet.from_json(json.load(sys.stdin))


def _parse_betas(text):
    if not text:
        return None
    return tuple(int(v) for v in text.split(","))


def _params_from_args(args, w=None) -> ConstructionParams:
    return ConstructionParams(
        s=args.s,
        alpha=args.alpha,
        beta=args.beta,
        g=args.g,
        w=w if w is not None else args.w,
        base=PrimeBase(args.b),
        betas=_parse_betas(getattr(args, "betas", None)),
        strict=not args.relaxed,
    )


def _add_construction_flags(p, with_w=True):
    p.add_argument("--b", type=int, required=True, help="prime base")
    p.add_argument("--s", type=int, required=True, help="dimension")
    p.add_argument("--alpha", type=int, required=True, help="smoothness order")
    p.add_argument("--beta", type=int, required=True, help="interlacing factor")
    p.add_argument("--g", type=int, required=True)
    if with_w:
        p.add_argument("--w", type=int, required=True)
    p.add_argument("--betas", help="comma-separated distinct field elements")
    p.add_argument(
        "--relaxed",
        action="store_true",
        help="skip the rate-guarantee parameter constraints (net still valid)",
    )


def build_parser() -> _Parser:
    parser = _Parser(prog="hoqmc", description=__doc__)
    parser.add_argument(
        "--config", help="JSON config whose keys mirror flag names; flags win"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("construct", help="emit net JSON")
    _add_construction_flags(p)

    p = sub.add_parser("points", help="emit net points")
    p.add_argument("--net-file")
    p.add_argument("--count", type=int, help="emit only the first COUNT points")
    p.add_argument("--format", choices=["float", "fraction"], default="float")

    p = sub.add_parser("metrics", help="emit dual metric report JSON")
    p.add_argument("--net-file")
    for name in ("s", "alpha", "beta", "g", "w"):
        p.add_argument(f"--{name}", type=int)
    p.add_argument("--b", type=int)
    p.add_argument("--betas")
    p.add_argument("--relaxed", action="store_true")

    p = sub.add_parser("walsh", help="emit a 1-D kernel Walsh coefficient")
    p.add_argument("--b", type=int, required=True)
    p.add_argument("--alpha", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--l", type=int, required=True)

    p = sub.add_parser("wce", help="emit a worst-case error report")
    p.add_argument("--net-file")
    p.add_argument("--alpha", type=int, required=True)
    p.add_argument("--method", choices=["exact", "dual"], default="exact")
    p.add_argument("--radius", type=int)
    p.add_argument("--rational", action="store_true")

    p = sub.add_parser("bounds", help="emit the explicit bound chains")
    _add_construction_flags(p)

    p = sub.add_parser("sweep", help="convergence sweep; writes CSV + figure")
    _add_construction_flags(p, with_w=False)
    p.add_argument("--w-min", type=int, required=True)
    p.add_argument("--w-max", type=int, required=True)
    p.add_argument("--method", choices=["exact", "dual", "mc"], default="exact")
    p.add_argument("--output", default="sweep.csv")
    p.add_argument("--figure", help="PNG path (default: CSV path with .png)")
    p.add_argument("--seed", type=int, default=0)

    return parser


def _dispatch(args) -> int:
    cmd = args.command
    if cmd == "construct":
        net = construct_optimal_net(_params_from_args(args))
        json.dump(net.to_json(), sys.stdout, indent=2)
        print()
    elif cmd == "points":
        net = _read_net(args)
        count = args.count if args.count is not None else net.num_points
        pts = []
        for h in range(min(count, net.num_points)):
            p = net.generate_point(h)
            if args.format == "fraction":
                pts.append([[f.numerator, f.denominator] for f in p.to_fractions()])
            else:
                pts.append(list(p.to_floats()))
        json.dump({"N": len(pts), "points": pts}, sys.stdout)
        print()
    elif cmd == "metrics":
        net = _read_net(args)
        params = None
        if args.b is not None:
            params = _params_from_args(args)
        json.dump(metrics_report(net, params), sys.stdout, indent=2)
        print()
    elif cmd == "walsh":
        c = kernel_walsh_coeff_1d(args.alpha, args.k, args.l, PrimeBase(args.b))
        json.dump(c.to_json(), sys.stdout)
        print()
    elif cmd == "wce":
        net = _read_net(args)
        if args.method == "dual":
            report = wce_dual_truncated(net, args.alpha, radius=args.radius)
        else:
            report = wce_exact(
                list(net.points()), args.alpha, rational=args.rational
            )
        json.dump(report.to_json(), sys.stdout)
        print()
    elif cmd == "bounds":
        p = _params_from_args(args)
        json.dump(
            {
                "main_part": main_part_bound(p).to_json(),
                "discretization": discretization_bound(p).to_json(),
            },
            sys.stdout,
            indent=2,
        )
        print()
    elif cmd == "sweep":
        cfg = SweepConfig(
            b=args.b,
            s=args.s,
            alpha=args.alpha,
            beta=args.beta,
            g=args.g,
            w_min=args.w_min,
            w_max=args.w_max,
            method=args.method,
            output=args.output,
            figure=args.figure or args.output.rsplit(".", 1)[0] + ".png",
            strict=not args.relaxed,
            seed=args.seed,
        )
        rows, slope, failures = run_sweep(cfg)
        _write_sweep_csv(rows, cfg.output)
        _write_sweep_figure(rows, slope, cfg.figure)
        for w, msg in failures:
            print(f"w={w}: skipped ({msg})", file=sys.stderr)
        json.dump(
            {"rows": len(rows), "slope": slope, "csv": cfg.output,
             "figure": cfg.figure},
            sys.stdout,
        )
        print()
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = parser.parse_args(argv)
        if args.config:
            with open(args.config) as fh:
                defaults = json.load(fh)
            parser.set_defaults(**{k.replace("-", "_"): v for k, v in defaults.items()})
            args = parser.parse_args(argv)
        return _dispatch(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except GuardError as exc:
        print(f"guard: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
