"""Command-line entry point: ``softedge <limit|correction|finite|simulate|verify> [flags]``.

Exit codes: 0 success, 1 result flagged untrusted (or a failed verification),
2 usage error. Every run writes a JSON sidecar holding all settings and the
library version.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__

EXIT_OK, EXIT_UNTRUSTED, EXIT_USAGE = 0, 1, 2


class UsageError(ValueError):
    pass


@dataclass
class JobConfig:
    """Validated settings shared by the curve subcommands."""

    xi: float = 1.0
    t_min: float = -8.0
    t_max: float = 4.0
    t_step: float = 0.05
    order: int = 96
    h: float = 1e-3

    def __post_init__(self):
        if not self.t_min < self.t_max:
            raise UsageError("--t-min must be below --t-max")
        if not self.t_step > 0:
            raise UsageError("--t-step must be positive")
        if not 0.0 <= self.xi <= 1.0:
            raise UsageError("--xi must lie in [0, 1]")
        if self.order < 8:
            raise UsageError("--order must be >= 8")
        if not self.h > 0:
            raise UsageError("--h must be positive")

    def grid(self) -> np.ndarray:
        n = int(round((self.t_max - self.t_min) / self.t_step))
        return np.round(self.t_min + self.t_step * np.arange(n + 1), 12)


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


def _grid_flags(p, t_min=-8.0, t_max=4.0, t_step=0.05):
    p.add_argument("--xi", type=float, default=1.0, help="thinning parameter in [0, 1]")
    p.add_argument("--t-min", type=float, default=t_min)
    p.add_argument("--t-max", type=float, default=t_max)
    p.add_argument("--t-step", type=float, default=t_step)
    p.add_argument("--order", type=int, default=96, help="Gauss-Legendre nodes")
    p.add_argument("--h", type=float, default=1e-3, help="central-difference step")


def _common_flags(p, out_default):
    p.add_argument("--config", type=Path, help="JSON file with flag values (flags win)")
    p.add_argument("--threads", type=int, default=None, help="worker cap (else $SOFTEDGE_THREADS)")
    p.add_argument("--out", type=Path, default=Path(out_default), help="output file")
    p.add_argument("--format", choices=("csv", "json"), default="csv")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="softedge", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"softedge {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("limit", help="limiting distribution F and density p0")
    _grid_flags(p)
    p.add_argument("--route", choices=("operator", "ode"), default="operator")
    _common_flags(p, "limit.csv")

    p = sub.add_parser("correction", help="leading correction p1")
    _grid_flags(p, -6.0, 2.0, 0.1)
    p.add_argument("--variant", choices=("gue", "lue", "lue-alpha"), default="gue")
    p.add_argument("--alpha", type=float)
    p.add_argument("--route", choices=("operator", "ode"), default="operator")
    p.add_argument("--compare", action="store_true", help="run both routes and write their difference")
    _common_flags(p, "correction.csv")

    p = sub.add_parser("finite", help="finite-N curve and scaled difference")
    _grid_flags(p, -6.0, 2.0, 0.1)
    p.add_argument("--ensemble", choices=("gue", "lue"), default="gue")
    p.add_argument("--N", type=int, required=False, default=50)
    p.add_argument("--a", type=float)
    p.add_argument("--alpha", type=float)
    _common_flags(p, "finite.csv")

    p = sub.add_parser("simulate", help="Monte Carlo batches and histograms")
    p.add_argument("--ensemble", choices=("gue", "lue", "wigner4", "lpp"), default="gue")
    p.add_argument("--N", type=int, default=50)
    p.add_argument("--n", type=int, help="columns of the LPP grid")
    p.add_argument("--a", type=float)
    p.add_argument("--alpha", type=float)
    p.add_argument("--xi", type=float, default=1.0, help="thinning (gue, lue)")
    p.add_argument("--count", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--scaling", choices=("raw", "edge"), default="edge")
    p.add_argument("--centring", choices=("cc", "cc2", "raw"), default="cc")
    p.add_argument("--bins", type=int)
    p.add_argument("--hist-min", type=float)
    p.add_argument("--hist-max", type=float)
    _common_flags(p, "samples.csv")

    p = sub.add_parser("verify", help="run the acceptance battery")
    p.add_argument("--suite", action="append", help="suite name (repeatable); default all")
    p.add_argument("--mc-scale", type=float, default=1.0, help="multiplier on Monte Carlo sample counts")
    p.add_argument("--config", type=Path)
    p.add_argument("--threads", type=int, default=None)
    p.add_argument("--out", type=Path, default=Path("verify.json"), help="JSON report")
    return parser


def _parse(parser: argparse.ArgumentParser, argv):
    args = parser.parse_args(argv)
    if getattr(args, "config", None):
        try:
            cfg = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            parser.error(f"cannot read --config: {exc}")
        subparser = parser._subparsers._group_actions[0].choices[args.command]
        known = {a.dest for a in subparser._actions}
        cfg = {k.replace("-", "_"): v for k, v in cfg.items()}
        unknown = sorted(set(cfg) - known - {"command"})
        if unknown:
            parser.error(f"unknown keys in --config: {unknown}")
        for k in ("out", "config"):
            if k in cfg:
                cfg[k] = Path(cfg[k])
        cfg.pop("command", None)
        subparser.set_defaults(**cfg)
        args = parser.parse_args(argv)
    return args


def _threads(args) -> int | None:
    if args.threads is not None:
        return args.threads
    env = os.environ.get("SOFTEDGE_THREADS")
    if env:
        try:
            return int(env)
        except ValueError:
            raise UsageError("SOFTEDGE_THREADS must be an integer")
    return None


def _settings(args) -> dict:
    out = {k: (str(v) if isinstance(v, Path) else v) for k, v in vars(args).items()}
    out["version"] = __version__
    return out


def _sibling(path: Path, tag: str) -> Path:
    return path.with_name(f"{path.stem}_{tag}{path.suffix or '.csv'}")


def _emit_curve(curve, path: Path, fmt: str, settings: dict):
    path.parent.mkdir(parents=True, exist_ok=True)
    if fmt == "json":
        data = {"metadata": {**curve.metadata(), "settings": settings},
                "t": curve.ts.tolist(), "F": curve.F.tolist(), "p0": curve.p0.tolist(),
                "p1": None if curve.p1 is None else curve.p1.tolist()}
        if curve.untrusted is not None:
            data["untrusted"] = curve.untrusted.astype(int).tolist()
        path.write_text(json.dumps(data, indent=2))
        side = Path(str(path) + ".json")
        side.write_text(json.dumps({**curve.metadata(), "settings": settings}, indent=2, sort_keys=True))
        return
    curve.write(path, extra={"settings": settings})


def _untrusted(curve) -> bool:
    return curve.untrusted is not None and bool(np.any(curve.untrusted))


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def _job(args) -> JobConfig:
    return JobConfig(args.xi, args.t_min, args.t_max, args.t_step, args.order, args.h)


def cmd_limit(args) -> int:
    from .fredholm import limit_curve
    from .painleve import ode_curve

    job = _job(args)
    ts = job.grid()
    if args.route == "operator":
        curve = limit_curve("gue", job.xi, ts, correction=False, order=job.order, h=job.h, threads=_threads(args))
        curve.variant = "airy"
    else:
        curve = ode_curve("gue", job.xi, ts, correction=False)
        curve.variant = "airy"
    _emit_curve(curve, args.out, args.format, _settings(args))
    return EXIT_UNTRUSTED if _untrusted(curve) else EXIT_OK


def cmd_correction(args) -> int:
    from .fredholm import limit_curve
    from .painleve import ode_curve

    if args.variant == "lue-alpha" and args.alpha is None:
        raise UsageError("--variant lue-alpha requires --alpha")
    if args.alpha is not None and args.variant != "lue-alpha":
        raise UsageError("--alpha only applies to --variant lue-alpha")
    job = _job(args)
    ts = job.grid()
    settings = _settings(args)
    op = ode = None
    if args.route == "operator" or args.compare:
        op = limit_curve(args.variant, job.xi, ts, alpha=args.alpha, order=job.order, h=job.h,
                         threads=_threads(args))
    if args.route == "ode" or args.compare:
        ode = ode_curve(args.variant, job.xi, ts, alpha=args.alpha, order=job.order, h=job.h)
    primary = op if args.route == "operator" else ode
    _emit_curve(primary, args.out, args.format, settings)
    if args.compare:
        other = ode if primary is op else op
        _emit_curve(other, _sibling(args.out, other.route), args.format, settings)
        diff = ode.p1 - op.p1
        cmp_path = _sibling(args.out, "compare")
        lines = ["t,p1_operator,p1_ode,difference"]
        lines += [f"{t!r},{a!r},{b!r},{d!r}" for t, a, b, d in zip(ts.tolist(), op.p1.tolist(), ode.p1.tolist(),
                                                                    diff.tolist())]
        cmp_path.write_text("\n".join(lines) + "\n")
        Path(str(cmp_path) + ".json").write_text(json.dumps(
            {"max_abs_difference": float(np.nanmax(np.abs(diff))), "settings": settings}, indent=2))
    flagged = (ode is not None) and _untrusted(ode)
    return EXIT_UNTRUSTED if flagged else EXIT_OK


def cmd_finite(args) -> int:
    from .fredholm import scaled_difference

    job = _job(args)
    if args.ensemble == "lue" and (args.a is None) == (args.alpha is None):
        raise UsageError("--ensemble lue needs exactly one of --a and --alpha")
    if args.ensemble == "gue" and (args.a is not None or args.alpha is not None):
        raise UsageError("--a/--alpha only apply to --ensemble lue")
    if args.N < 1:
        raise UsageError("--N must be >= 1")
    res = scaled_difference(args.ensemble, args.N, job.xi, job.grid(), a=args.a, alpha=args.alpha,
                            order=job.order, h=job.h, threads=_threads(args))
    settings = _settings(args)
    _emit_curve(res.finite, args.out, args.format, settings)
    scaled = _sibling(args.out, "scaled")
    res.to_csv(scaled)
    Path(str(scaled) + ".json").write_text(json.dumps(
        {"N": args.N, "xi": job.xi, "sup_gap_to_p1": res.gap, "settings": settings}, indent=2))
    return EXIT_OK


def cmd_simulate(args) -> int:
    from . import simulate as sim

    if args.count < 1:
        raise UsageError("--count must be >= 1")
    threads = _threads(args)
    e = args.ensemble
    if e in ("gue", "lue") and not 0.0 < args.xi <= 1.0:
        raise UsageError("--xi must lie in (0, 1] for sampling")
    if e == "gue":
        if args.xi < 1:
            batch = sim.sample_thinned_max("gue", args.N, args.xi, args.count, args.seed, scaling=args.scaling,
                                           threads=threads)
        else:
            batch = sim.sample_gue_max(args.N, args.count, args.seed, scaling=args.scaling, threads=threads)
    elif e == "lue":
        if (args.a is None) == (args.alpha is None):
            raise UsageError("--ensemble lue needs exactly one of --a and --alpha")
        if args.xi < 1:
            batch = sim.sample_thinned_max("lue", args.N, args.xi, args.count, args.seed, a=args.a,
                                           alpha=args.alpha, scaling=args.scaling, threads=threads)
        else:
            batch = sim.sample_lue_max(args.N, args.count, args.seed, a=args.a, alpha=args.alpha,
                                       scaling=args.scaling, threads=threads)
    elif e == "wigner4":
        if args.N < 2:
            raise UsageError("--N must be >= 2 for wigner4")
        batch = sim.sample_wigner4_max(args.N, args.count, args.seed, centring=args.centring, threads=threads)
    else:
        n = args.n if args.n is not None else args.N
        try:
            grid = sim.LppGrid(args.N, n)
        except ValueError as exc:
            raise UsageError(str(exc))
        batch = sim.lpp_sample(grid, args.count, args.seed, threads=threads)
    settings = _settings(args)
    args.out.parent.mkdir(parents=True, exist_ok=True)
    if args.format == "json":
        args.out.write_text(json.dumps({"metadata": {**batch.metadata(), "settings": settings},
                                        "values": batch.values.tolist()}))
        Path(str(args.out) + ".json").write_text(json.dumps({**batch.metadata(), "settings": settings}, indent=2))
    else:
        batch.write(args.out, extra={"settings": settings, "version": __version__})
    if batch.count:
        lo = args.hist_min if args.hist_min is not None else float(batch.values.min())
        hi = args.hist_max if args.hist_max is not None else float(batch.values.max())
        if not lo < hi:
            hi = lo + 1.0
        sim.histogram(batch, bins=args.bins, range=(lo, hi)).to_csv(_sibling(args.out, "hist"))
    return EXIT_OK


def cmd_verify(args) -> int:
    from .verify import SUITES, run_battery

    names = args.suite or list(SUITES)
    bad = [n for n in names if n not in SUITES]
    if bad:
        raise UsageError(f"unknown suite(s) {bad}; choose from {sorted(SUITES)}")
    if not args.mc_scale > 0:
        raise UsageError("--mc-scale must be positive")
    report = run_battery(names, scale=args.mc_scale, threads=_threads(args), echo=print)
    args.out.parent.mkdir(parents=True, exist_ok=True)
    args.out.write_text(report.to_json())
    Path(str(args.out) + ".json").write_text(json.dumps(_settings(args), indent=2))
    print("ALL PASS" if report.passed else "SOME FAILED")
    return EXIT_OK if report.passed else EXIT_UNTRUSTED


COMMANDS = {"limit": cmd_limit, "correction": cmd_correction, "finite": cmd_finite,
            "simulate": cmd_simulate, "verify": cmd_verify}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = _parse(parser, argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"softedge {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
