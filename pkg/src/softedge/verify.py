"""Acceptance battery: each suite measures one property and compares it with its bound."""

from __future__ import annotations

import json
import math
import time
from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np

from . import __version__
from .fredholm import build_rule, fredholm_det, finite_curve, limit_curve
from .kernels import KernelSpec, correction_kernel, correction_kernel_alpha, lue_correction_quadratic_form
from .painleve import density_residual, ode_curve
from .simulate import (
    LppGrid,
    SampleBatch,
    correction_extract,
    dkw_epsilon,
    lpp_sample,
    sample_gue_max,
    sample_lue_max,
    sample_wigner4_max,
)
from .specfun import hermite_all, laguerre_all

__all__ = ["CriterionResult", "BatteryReport", "SUITES", "run_suite", "run_battery"]


@dataclass
class CriterionResult:
    number: int
    suite: str
    passed: bool
    measured: dict
    bound: str
    seconds: float = 0.0

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        shown = ", ".join(f"{k}={_fmt(v)}" for k, v in self.measured.items())
        return f"[{tag}] {self.number} {self.suite}: {shown} (bound: {self.bound}; {self.seconds:.1f}s)"


def _fmt(v):
    if isinstance(v, float):
        return f"{v:.3g}"
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_fmt(x) for x in v) + "]"
    return str(v)


@dataclass
class BatteryReport:
    results: list[CriterionResult] = field(default_factory=list)
    version: str = __version__
    mc_scale: float = 1.0

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)

    def to_json(self) -> str:
        return json.dumps({"version": self.version, "mc_scale": self.mc_scale,
                           "results": [asdict(r) for r in self.results]}, indent=2, default=_jsonable)

    @classmethod
    def from_json(cls, text: str) -> "BatteryReport":
        raw = json.loads(text)
        return cls([CriterionResult(**r) for r in raw["results"]], raw["version"], raw["mc_scale"])


def _jsonable(v):
    if isinstance(v, (np.floating, np.integer, np.bool_)):
        return v.item()
    raise TypeError(f"cannot serialise {type(v)}")


def _monotone(F, slack: float = 1e-10) -> bool:
    return bool(np.all(np.diff(F) >= -slack))


# ---------------------------------------------------------------------------
# Suites
# ---------------------------------------------------------------------------

ROUTE_CASES = (("gue", None), ("lue", None), ("lue-alpha", 0.5), ("lue-alpha", 5.0))


def route_equivalence(scale: float = 1.0, threads=None):
    ts = np.round(np.arange(-6.0, 2.0 + 1e-9, 0.1), 10)
    gaps, times, mono = [], [], True
    for variant, alpha in ROUTE_CASES:
        t0 = time.perf_counter()
        op = limit_curve(variant, 1.0, ts, alpha=alpha, threads=threads)
        ode = ode_curve(variant, 1.0, ts, alpha=alpha)
        times.append(time.perf_counter() - t0)
        gaps.append(float(np.max(np.abs(ode.p1 - op.p1))))
        mono &= _monotone(op.F) and _monotone(ode.F)
    ok = max(gaps) <= 5e-3 and max(times) <= 120 and mono
    return ok, {"sup_gap": gaps, "max_seconds": max(times)}, "sup|p1 ode - p1 operator| <= 5e-3, <= 120 s each"


def finite_size(scale: float = 1.0, threads=None):
    ts = np.round(np.arange(-6.0, 2.0 + 1e-9, 0.1), 10)
    out, ok = {}, True
    from .fredholm import scaled_difference

    for xi in (0.6, 1.0):
        lim = limit_curve("gue", xi, ts, threads=threads)
        D = [scaled_difference("gue", N, xi, ts, limit=lim, threads=threads).gap for N in (50, 100, 200, 400)]
        out[f"D_xi{xi}"] = D
        ok &= all(b < a for a, b in zip(D, D[1:]))
    return ok, out, "D(N) strictly decreasing over N = 50, 100, 200, 400"


def alpha_limit(scale: float = 1.0, threads=None):
    g = np.linspace(-4.0, 4.0, 21)
    X, Y = np.meshgrid(g, g, indexing="ij")
    La = correction_kernel_alpha(1e-8, X, Y)
    Llue = correction_kernel(KernelSpec.correction("lue"), X, Y)
    gap = float(np.max(np.abs(La - Llue)))
    alt = float(np.max(np.abs(La - lue_correction_quadratic_form(X, Y))))
    return gap <= 1e-5, {"sup_gap": gap, "sup_gap_quadratic_form": alt}, "sup|L_alpha - L_lue| <= 1e-5 at alpha = 1e-8"


def _relative(res, scale):
    return float(np.max(np.abs(res)) / np.max(scale))


def density_ode(scale: float = 1.0, threads=None):
    from .kernels import density_correction

    y = np.round(np.arange(-4.0 - 0.03, 4.0 + 0.03 + 1e-9, 0.01), 10)
    alpha_res = []
    for alpha in (0.5, 5.0):
        rho1 = density_correction("lue-alpha", y, alpha)[1]
        res, sc = density_residual("alpha-limit", y, rho1, alpha=alpha, return_scale=True)
        alpha_res.append(_relative(res, sc))
    x = np.round(np.arange(-3.03, 3.03 + 1e-9, 0.01), 10)
    rho = np.sum(hermite_all(9, x) ** 2, axis=0)
    res, sc = density_residual("gue-finite", x, rho, N=10, return_scale=True)
    gue = _relative(res, sc)
    x = np.round(np.arange(1.97, 40.03 + 1e-9, 0.01), 10)
    rho = np.sum(laguerre_all(9, 1.0, x) ** 2, axis=0)
    res, sc = density_residual("lue-finite", x, rho, N=10, a=1.0, return_scale=True)
    lue = _relative(res, sc)
    ok = max(alpha_res) <= 1e-6 and gue <= 1e-5 and lue <= 1e-5
    return ok, {"alpha": alpha_res, "gue_N10": gue, "lue_N10_a1": lue}, "alpha <= 1e-6, finite N <= 1e-5 (relative)"


def quadrature(scale: float = 1.0, threads=None):
    spec = KernelSpec.airy()
    diffs = []
    for xi in (0.3, 1.0):
        for t in (-8.0, -4.0, 0.0, 4.0):
            diffs.append(abs(fredholm_det(spec, xi, t, build_rule(t, 96)) - fredholm_det(spec, xi, t, build_rule(t, 48))))
    worst = float(max(diffs))
    return worst <= 1e-9, {"max_diff": worst}, "|F_96 - F_48| <= 1e-9"


def lpp_identity(scale: float = 1.0, threads=None):
    count = max(1000, int(round(1e5 * scale)))
    grid = LppGrid(4, 6)
    batch = lpp_sample(grid, count, seed=20240601, threads=threads)
    spec = KernelSpec.finite_lue(4, a=2.0)
    sc = spec.scaling()
    ts = np.round(np.arange(sc.t_floor + 0.005, 6.0, 0.005), 10)
    F = np.array([fredholm_det(spec, 1.0, t) for t in ts])
    s = sc.s(ts)
    v = np.sort(batch.values)
    right = np.searchsorted(v, s, side="right") / count
    left = np.searchsorted(v, s, side="left") / count
    dist = float(max(np.max(np.abs(right - F)), np.max(np.abs(left - F))))
    band = dkw_epsilon(count, 0.99)
    ok = dist <= band and _monotone(F)
    return ok, {"sup_cdf_distance": dist, "dkw99": band, "count": count}, "sup distance within 99% DKW band"


def trivial_laws(scale: float = 1.0, threads=None):
    n = max(10_000, int(round(1e6 * scale)))
    g = sample_gue_max(1, n, seed=7, threads=threads).values
    z_mean = abs(g.mean()) / math.sqrt(0.5 / n)
    z_var = abs(g.var(ddof=1) - 0.5) / (0.5 * math.sqrt(2.0 / (n - 1)))
    e = sample_lue_max(1, n, seed=8, a=0.0, threads=threads).values
    z_exp = abs(e.mean() - 1.0) * math.sqrt(n)
    ell = lpp_sample(LppGrid(1, 2), n, seed=9, threads=threads).values
    p = 1.0 - 3.0 * math.exp(-2.0)
    z_lpp = abs((ell <= 2.0).mean() - p) / math.sqrt(p * (1 - p) / n)
    z = [z_mean, z_var, z_exp, z_lpp]
    return max(z) <= 4.0, {"z_scores": z, "count": n}, "each within 4 standard errors"


def wigner_coefficient(scale: float = 1.0, threads=None, reference=None):
    n = max(10_000, int(round(1e6 * scale)))
    if reference is None:
        ts = np.round(np.arange(-6.0, 3.0 + 1e-9, 0.02), 10)
        reference = (ts, limit_curve("gue", 1.0, ts, correction=False, threads=threads).p0)
    ts, p0 = reference
    window = (-5.0, 2.0)
    b50 = sample_wigner4_max(50, n, seed=50, centring="cc", threads=threads)
    c = correction_extract(b50, ts, p0, power=1.0 / 3.0, range=window).c
    shift = lambda b, N: SampleBatch(b.ensemble, N, b.values + 0.5 / N ** (1.0 / 3.0), b.seed, "cc2")
    r50 = correction_extract(shift(b50, 50), ts, p0, power=2.0 / 3.0, range=window)
    b60 = sample_wigner4_max(60, n, seed=60, centring="cc", threads=threads)
    r60 = correction_extract(shift(b60, 60), ts, p0, power=2.0 / 3.0, range=window)
    m50, m60 = float(np.max(np.abs(r50.residual))), float(np.max(np.abs(r60.residual)))
    ok = abs(c - 0.5) <= 0.1 and m60 <= 2.0 * m50
    return ok, {"c": c, "cc2_max50": m50, "cc2_max60": m60, "count": n}, "c = 0.5 +- 0.1; cc2 max at 60 <= 2x max at 50"


def normalization(scale: float = 1.0, threads=None):
    ts = np.round(np.arange(-10.0, 6.0 + 1e-9, 0.05), 10)
    out, ok = {}, True
    for variant in ("gue", "lue"):
        c = limit_curve(variant, 1.0, ts, threads=threads)
        i0 = float(np.trapezoid(c.p0, ts))
        i1 = float(np.trapezoid(c.p1, ts))
        out[f"{variant}_int_p0"] = i0
        out[f"{variant}_int_p1"] = i1
        ok &= abs(i0 - 1.0) <= 1e-5 and abs(i1) <= 1e-5 and _monotone(c.F)
    return ok, out, "int p0 = 1 +- 1e-5, int p1 = 0 +- 1e-5, F monotone"


SUITES: dict[str, tuple[int, Callable]] = {
    "route-equivalence": (1, route_equivalence),
    "finite-size": (2, finite_size),
    "alpha-limit": (3, alpha_limit),
    "density-ode": (4, density_ode),
    "quadrature": (5, quadrature),
    "lpp": (6, lpp_identity),
    "trivial-laws": (7, trivial_laws),
    "wigner": (8, wigner_coefficient),
    "normalization": (9, normalization),
}


def run_suite(name: str, scale: float = 1.0, threads=None) -> CriterionResult:
    if name not in SUITES:
        raise KeyError(f"unknown suite {name!r}; choose from {sorted(SUITES)}")
    number, fn = SUITES[name]
    t0 = time.perf_counter()
    ok, measured, bound = fn(scale=scale, threads=threads)
    return CriterionResult(number, name, bool(ok), measured, bound, time.perf_counter() - t0)


def run_battery(suites=None, scale: float = 1.0, threads=None, echo: Callable[[str], None] | None = None) -> BatteryReport:
    report = BatteryReport(mc_scale=scale)
    for name in suites or list(SUITES):
        res = run_suite(name, scale, threads)
        report.results.append(res)
        if echo:
            echo(res.line())
    return report
