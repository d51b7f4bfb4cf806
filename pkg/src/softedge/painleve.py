"""σ-form Painlevé II route to the soft-edge densities p0 and p1.

The log-derivative ``sigma0(y) = -d/dy log det(I - xi K)`` satisfies

    (sigma'')^2 + 4 sigma' (sigma'^2 - y sigma' + sigma) = 0.

We integrate its derivative ``sigma''' = -6 sigma'^2 + 4 y sigma' - 2 sigma``, which is
explicit, and keep the quadratic form as a residual monitor. The correction
``sigma1`` solves a linear second-order equation ``A s'' + B s' + C s = D`` whose
coefficients depend on sigma0 and whose forcing ``D`` depends on the ensemble.
Both are integrated downward from ``y_start`` with asymptotic data from the kernels.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable

import numpy as np
from scipy.integrate import solve_ivp

from .fredholm import DistributionCurve, limit_curve
from .kernels import CBRT2, KernelSpec, airy_kernel, density_correction, evaluate
from .specfun import airy_ai

__all__ = [
    "BoundaryConfig",
    "PainleveSolution",
    "IntegrationDivergenceError",
    "VARIANTS",
    "solve_sigma0",
    "solve_sigma1",
    "solve",
    "assemble_pdf",
    "ode_curve",
    "checkpoint_compare",
    "sigma_form_residual",
    "density_residual",
]

VARIANTS = ("gue", "lue", "lue-alpha")
RESIDUAL_LIMIT = 1e-6
CHECKPOINT_TOL = 1e-2
DIVERGENCE_MARGIN = 0.5
# pure relative control: sigma0 is ~1e-13 at y = 8 and must not be swamped by atol
_ATOL = 1e-300


class IntegrationDivergenceError(RuntimeError):
    """The quadratic σ-form residual grew past its limit during integration."""

    def __init__(self, y: float, residual: float):
        super().__init__(f"sigma-form residual {residual:.3g} exceeds {RESIDUAL_LIMIT:g} at y = {y:.4f}")
        self.y = y
        self.residual = residual


@dataclass(frozen=True)
class BoundaryConfig:
    """Where and how the asymptotic boundary data are imposed.

    ``order="extended"`` adds the ``xi^2`` term of the expansion in xi to the
    leading ``xi * density`` data. The tail integrals over ``[y, y + tail_length]``
    use ``tail_nodes`` Gauss-Legendre points.
    """

    y_start: float = 8.0
    order: str = "extended"
    tail_nodes: int = 64
    tail_length: float = 12.0
    rtol: float = 1e-10
    method: str = "RK45"
    step: float = 0.01

    def __post_init__(self):
        if self.y_start < 4:
            raise ValueError("y_start must be >= 4")
        if self.order not in ("leading", "extended"):
            raise ValueError("order must be 'leading' or 'extended'")
        if self.tail_nodes < 8 or self.tail_length <= 0:
            raise ValueError("tail quadrature needs >= 8 nodes and a positive length")

    def tail_rule(self, y: float):
        x, w = np.polynomial.legendre.leggauss(self.tail_nodes)
        half = 0.5 * self.tail_length
        return y + half * (x + 1.0), half * w


# ---------------------------------------------------------------------------
# Boundary data
# ---------------------------------------------------------------------------


def _correction_spec(variant: str, alpha: float | None) -> KernelSpec:
    return KernelSpec.correction(variant, alpha)


def _boundary_value0(xi: float, y: float, cfg: BoundaryConfig) -> float:
    a, ap = airy_ai(y)
    val = xi * (ap * ap - y * a * a)
    if cfg.order == "extended":
        x, w = cfg.tail_rule(y)
        val += xi**2 * float(np.dot(w, airy_kernel(y, x) ** 2))
    return val


def _boundary_value1(variant: str, alpha, xi: float, y: float, cfg: BoundaryConfig) -> float:
    val = xi * density_correction(variant, y, alpha)[1]
    if cfg.order == "extended":
        x, w = cfg.tail_rule(y)
        L = evaluate(_correction_spec(variant, alpha), y, x)
        val += 2.0 * xi**2 * float(np.dot(w, airy_kernel(y, x) * L))
    return val


def _cheb_derivatives(fn: Callable[[float], float], y0: float, nder: int, radius: float = 0.5, deg: int = 20):
    """Value and first ``nder`` derivatives of ``fn`` at ``y0`` by Chebyshev interpolation.

    Interpolating ``log(fn)`` keeps relative accuracy when ``fn`` decays like
    exp(-y^{3/2}); the derivatives are recovered with Faà di Bruno up to third order.
    """
    k = np.arange(deg + 1)
    nodes = np.cos(np.pi * (k + 0.5) / (deg + 1))
    vals = np.array([fn(y0 + radius * u) for u in nodes])
    sign = np.sign(vals[0])
    if np.all(vals * sign > 0):
        c = np.polynomial.chebyshev.Chebyshev.fit(nodes, np.log(vals * sign), deg)
        g = [c.deriv(m)(0.0) / radius**m for m in range(4)]
        v = sign * math.exp(g[0])
        out = [v, v * g[1], v * (g[2] + g[1] ** 2), v * (g[3] + 3 * g[1] * g[2] + g[1] ** 3)]
    else:
        c = np.polynomial.chebyshev.Chebyshev.fit(nodes, vals, deg)
        out = [c.deriv(m)(0.0) / radius**m for m in range(4)]
    return np.array(out[: nder + 1])


def _tail_integral(fn, y0: float, cfg: BoundaryConfig) -> float:
    x, w = cfg.tail_rule(y0)
    return float(np.dot(w, [fn(v) for v in x]))


# ---------------------------------------------------------------------------
# Solutions
# ---------------------------------------------------------------------------


def sigma_form_residual(y, s, sp, spp, relative: bool = True):
    """Quadratic σ-form residual, optionally relative to ``(|s| + |s'| + |s''|)^2``.

    The individual terms all vanish where s' and s'' pass through zero together
    (turning points for xi < 1), so they make a poor reference scale.
    """
    r = spp * spp + 4.0 * sp * (sp * sp - y * sp + s)
    if not relative:
        return r
    scale = (np.abs(s) + np.abs(sp) + np.abs(spp)) ** 2
    return np.abs(r) / np.where(scale > 0, scale, 1.0)


@dataclass
class PainleveSolution:
    """σ0 (and optionally σ1) sampled on a decreasing y grid, with dense interpolants.

    ``I0`` and ``I1`` hold the tail integrals ``int_y^inf sigma``. Where the σ1
    integration stopped early, the σ1 columns are NaN below ``sigma1_stop``.
    """

    xi: float
    cfg: BoundaryConfig
    y: np.ndarray
    sigma0: np.ndarray
    sigma0p: np.ndarray
    sigma0pp: np.ndarray
    I0: np.ndarray
    residual0: np.ndarray
    variant: str | None = None
    alpha: float | None = None
    sigma1: np.ndarray | None = None
    sigma1p: np.ndarray | None = None
    I1: np.ndarray | None = None
    sigma1_stop: float | None = None
    _dense0: Callable | None = field(default=None, repr=False)
    _dense1: Callable | None = field(default=None, repr=False)

    @property
    def y_min(self) -> float:
        return float(self.y[-1])

    def sigma0_at(self, y):
        """Rows (sigma0, sigma0', sigma0'', I0) at arbitrary ``y`` in range."""
        return self._dense0(np.asarray(y, dtype=float))

    def sigma1_at(self, y):
        """Rows (sigma1, sigma1', I1); NaN below the point where σ1 stopped."""
        y = np.asarray(y, dtype=float)
        out = np.array(self._dense1(y), dtype=float)
        if self.sigma1_stop is not None:
            out[:, y < self.sigma1_stop] = np.nan
        return out

    def dump_csv(self, path) -> Path:
        path = Path(path)
        s1 = self.sigma1 if self.sigma1 is not None else np.full_like(self.y, np.nan)
        lines = ["y,sigma0,sigma0p,sigma0pp,sigma1,residual0"]
        for row in zip(self.y, self.sigma0, self.sigma0p, self.sigma0pp, s1, self.residual0):
            lines.append(",".join(repr(float(v)) for v in row))
        path.write_text("\n".join(lines) + "\n")
        return path


def _grid(y_start: float, y_min: float, step: float) -> np.ndarray:
    n = int(math.ceil((y_start - y_min) / step - 1e-9))
    g = y_start - step * np.arange(n + 1)
    g[-1] = y_min
    return g


def solve_sigma0(xi: float, cfg: BoundaryConfig = BoundaryConfig(), y_min: float = -8.0) -> PainleveSolution:
    """Integrate σ0 from ``cfg.y_start`` down to ``y_min``.

    Raises :class:`IntegrationDivergenceError` if the relative σ-form residual
    exceeds 1e-6 on the output grid.
    """
    if not 0.0 < xi <= 1.0:
        raise ValueError("xi must lie in (0, 1]")
    if not y_min < cfg.y_start:
        raise ValueError("y_min must be below y_start")
    y0 = cfg.y_start
    b = _cheb_derivatives(lambda v: _boundary_value0(xi, v, cfg), y0, 2)
    b[0] = _boundary_value0(xi, y0, cfg)
    tail = _tail_integral(lambda v: _boundary_value0(xi, v, cfg), y0, cfg)

    def rhs(y, u):
        s, sp, spp, _ = u
        return [sp, spp, -6.0 * sp * sp + 4.0 * y * sp - 2.0 * s, -s]

    grid = _grid(y0, y_min, cfg.step)
    sol = solve_ivp(rhs, (y0, y_min), [b[0], b[1], b[2], tail], method=cfg.method, t_eval=grid,
                    rtol=cfg.rtol, atol=_ATOL, dense_output=True)
    if sol.status != 0:
        raise IntegrationDivergenceError(float(sol.t[-1]), float("nan"))
    s, sp, spp, I0 = sol.y
    res = sigma_form_residual(grid, s, sp, spp)
    bad = np.nonzero(res > RESIDUAL_LIMIT)[0]
    if bad.size:
        raise IntegrationDivergenceError(float(grid[bad[0]]), float(res[bad[0]]))
    return PainleveSolution(xi, cfg, grid, s, sp, spp, I0, res, _dense0=sol.sol)


def _forcing(variant: str, alpha: float | None):
    """Coefficient multiplier and forcing D(y, s, s', s'') for each variant."""
    if variant == "gue":
        return 1.0, lambda y, s, p, pp: s * s - 2.0 * y * s * p + y * y * p * p
    if variant == "lue":
        k = -2.0 * CBRT2
        return 1.0, lambda y, s, p, pp: k * (2.0 * y * s * p - 3.0 * y * y * p * p + 2.0 * s * p * p
                                             + 4.0 * y * p**3 + p * pp + y * pp * pp)
    if variant == "lue-alpha":
        if alpha is None or alpha <= 0:
            raise ValueError("lue-alpha needs alpha > 0")
        r = math.sqrt(1.0 + alpha)
        pre = (1.0 + 1.0 / r) ** (1.0 / 3.0)
        c_ss = alpha**2 * r / (1.0 + r) ** 3
        c_ysp = -2.0 * (1.0 + alpha + r)
        c_ypp = (-8.0 + 8.0 * r - 7.0 * alpha + alpha**2 + 9.0 * alpha * r) / alpha
        c_rest = -4.0 * (1.0 + alpha) / (1.0 + r)

        def D(y, s, p, pp):
            return pre * (c_ss * s * s + c_ysp * y * s * p + c_ypp * y * y * p * p
                          + c_rest * (2.0 * s * p * p + p * pp + y * pp * pp + 4.0 * y * p**3))

        return 1.0 + alpha, D
    raise ValueError(f"unknown variant {variant!r}")


def solve_sigma1(variant: str, sigma0: PainleveSolution, alpha: float | None = None,
                 y_min: float | None = None) -> PainleveSolution:
    """Integrate the linear σ1 equation for ``variant`` on top of a σ0 solution.

    If the leading coefficient ``A = 2 sigma0''`` (times ``1 + alpha``) vanishes the
    step size collapses; integration then stops and ``sigma1_stop`` records where.
    """
    cfg, xi = sigma0.cfg, sigma0.xi
    y_min = sigma0.y_min if y_min is None else y_min
    if y_min < sigma0.y_min - 1e-12:
        raise ValueError("sigma0 does not cover the requested range")
    mult, D = _forcing(variant, alpha)
    y0 = cfg.y_start
    fn = lambda v: _boundary_value1(variant, alpha, xi, v, cfg)
    b = _cheb_derivatives(fn, y0, 1)
    b[0] = fn(y0)
    tail = _tail_integral(lambda v: xi * density_correction(variant, v, alpha)[1], y0, cfg)
    dense0 = sigma0._dense0

    def rhs(y, u):
        s, p, pp, _ = dense0(y)
        A = 2.0 * mult * pp
        B = mult * (12.0 * p * p - 8.0 * y * p + 4.0 * s)
        C = 4.0 * mult * p
        return [u[1], (D(y, s, p, pp) - B * u[1] - C * u[0]) / A, -u[0]]

    grid = sigma0.y[sigma0.y >= y_min - 1e-12]
    with np.errstate(all="ignore"):
        sol = solve_ivp(rhs, (y0, grid[-1]), [b[0], b[1], tail], method=cfg.method,
                        rtol=cfg.rtol, atol=_ATOL, dense_output=True)
    stop = None if sol.status == 0 else float(sol.t[-1])
    vals = np.full((3, grid.size), np.nan)
    ok = grid >= sol.t[-1]
    vals[:, ok] = sol.sol(grid[ok])
    return replace(sigma0, variant=variant, alpha=alpha, sigma1=vals[0], sigma1p=vals[1], I1=vals[2],
                   sigma1_stop=stop, _dense1=sol.sol)


def solve(variant: str, xi: float, y_min: float = -8.0, alpha: float | None = None,
          cfg: BoundaryConfig = BoundaryConfig()) -> PainleveSolution:
    return solve_sigma1(variant, solve_sigma0(xi, cfg, y_min), alpha)


def assemble_pdf(sol: PainleveSolution, ts) -> DistributionCurve:
    """F = exp(-I0), p0 = sigma0 F and p1 = (sigma1 - sigma0 I1) F on ``ts``."""
    ts = np.asarray(ts, dtype=float)
    if ts.min() < sol.y_min - 1e-12:
        raise ValueError("solution does not cover the requested grid")
    inside = ts <= sol.cfg.y_start
    F = np.ones_like(ts)
    p0 = np.zeros_like(ts)
    p1 = None if sol.sigma1 is None else np.zeros_like(ts)
    y = ts[inside]
    s0, _, _, I0 = sol.sigma0_at(y)
    E = np.exp(-I0)
    F[inside] = E
    p0[inside] = s0 * E
    if p1 is not None:
        s1, _, I1 = sol.sigma1_at(y)
        p1[inside] = (s1 - s0 * I1) * E
    out = DistributionCurve(variant=sol.variant or "sigma0", xi=sol.xi, ts=ts, F=F, p0=p0, p1=p1,
                            route="ode", order=None, h=None, tail=None)
    out.meta.update({"y_start": sol.cfg.y_start, "boundary": sol.cfg.order, "rtol": sol.cfg.rtol,
                     "sigma1_stop": sol.sigma1_stop, "alpha": sol.alpha,
                     "tail_note": "sigma1 beyond y_start integrated from its leading asymptote"})
    if sol.sigma1_stop is not None:
        out.untrusted = ts < sol.sigma1_stop
    return out


def checkpoint_compare(ode: DistributionCurve, alpha: float | None = None, count: int = 5,
                       tol: float = CHECKPOINT_TOL, **kw) -> DistributionCurve:
    """Compare an ODE curve with the operator route at ``count`` grid points.

    Checkpoints are scanned from the top of the grid downward, the direction of
    integration. From the first one where p0 or p1 differ by more than ``tol``,
    every grid point at or below it is marked untrusted.
    """
    idx = np.unique(np.linspace(0, ode.ts.size - 1, count).round().astype(int))[::-1]
    pts = ode.ts[idx]
    ref = limit_curve(ode.variant if ode.variant in VARIANTS else "gue", ode.xi, pts[::-1], alpha=alpha,
                      correction=ode.p1 is not None, **kw)
    ref_p0, ref_p1 = ref.p0[::-1], None if ref.p1 is None else ref.p1[::-1]
    untrusted = np.zeros(ode.ts.size, dtype=bool) if ode.untrusted is None else ode.untrusted.copy()
    report = []
    for k, i in enumerate(idx):
        err = abs(ode.p0[i] - ref_p0[k])
        if ref_p1 is not None:
            err = max(err, abs(ode.p1[i] - ref_p1[k]))
        err = float("inf") if not np.isfinite(err) else float(err)
        report.append({"t": float(ode.ts[i]), "mismatch": err})
        if err > tol:
            untrusted |= ode.ts <= ode.ts[i]
            break
    ode.untrusted = untrusted
    ode.meta["checkpoints"] = report
    return ode


def _pad_below(curve: DistributionCurve, ts: np.ndarray, keep: np.ndarray) -> DistributionCurve:
    """Extend a curve to ``ts`` with NaN rows (marked untrusted) where ``keep`` is false."""

    def pad(v):
        if v is None:
            return None
        out = np.full(ts.size, np.nan)
        out[keep] = v
        return out

    untrusted = ~keep
    if curve.untrusted is not None:
        untrusted[keep] |= curve.untrusted
    return replace(curve, ts=ts, F=pad(curve.F), p0=pad(curve.p0), p1=pad(curve.p1), untrusted=untrusted,
                   meta=dict(curve.meta))


def ode_curve(variant: str, xi: float, ts, alpha: float | None = None, cfg: BoundaryConfig = BoundaryConfig(),
              checkpoints: bool | None = None, correction: bool = True, **kw) -> DistributionCurve:
    """ODE-route curve on ``ts``; ``correction=False`` skips σ1 and leaves p1 empty.

    For ``xi < 1`` the operator-route checkpoints are on by default. If σ0 blows
    up before reaching ``min(ts)``, the curve is kept down to ``DIVERGENCE_MARGIN``
    above the failure and the rows below are NaN and marked untrusted.
    """
    ts = np.asarray(ts, dtype=float)
    if xi == 0:
        z = np.zeros_like(ts)
        return DistributionCurve(variant, 0.0, ts, np.ones_like(ts), z, z.copy() if correction else None,
                                 route="ode", order=None, h=None)
    y_min = min(float(ts.min()), cfg.y_start - 1.0) - 0.05
    try:
        sol, failed_at = solve_sigma0(xi, cfg, y_min), None
    except IntegrationDivergenceError as exc:
        # backward integration is exponentially unstable; keep what precedes the blow-up
        failed_at = exc.y
        sol = solve_sigma0(xi, cfg, failed_at + DIVERGENCE_MARGIN)
    if correction:
        sol = solve_sigma1(variant, sol, alpha)
    keep = ts >= sol.y_min
    out = assemble_pdf(sol, ts[keep])
    if failed_at is not None:
        out = _pad_below(out, ts, keep)
        out.meta["sigma0_failed_at"] = failed_at
    out.variant = variant
    if checkpoints is None:
        checkpoints = xi < 1
    if checkpoints:
        checkpoint_compare(out, alpha=alpha, **kw)
    return out


# ---------------------------------------------------------------------------
# Density ODE validators
# ---------------------------------------------------------------------------


def _fd_derivatives(f: np.ndarray, h: float):
    """First three derivatives at interior points by 4th-order central stencils (7 points)."""
    c = f[3:-3]
    m1, p1, m2, p2, m3, p3 = f[2:-4], f[4:-2], f[1:-5], f[5:-1], f[:-6], f[6:]
    d1 = (m2 - 8.0 * m1 + 8.0 * p1 - p2) / (12.0 * h)
    d2 = (-m2 + 16.0 * m1 - 30.0 * c + 16.0 * p1 - p2) / (12.0 * h * h)
    d3 = (m3 - 8.0 * m2 + 13.0 * m1 - 13.0 * p1 + 8.0 * p2 - p3) / (8.0 * h**3)
    return c, d1, d2, d3


def density_residual(variant: str, x, rho, *, N: int | None = None, a: float | None = None,
                     alpha: float | None = None, return_scale: bool = False):
    """Residual of the linear third-order equation satisfied by a density.

    ``variant``:

    * ``"gue-finite"``: rho''' - 4x(x rho' - rho) + 8N rho' (needs ``N``)
    * ``"lue-finite"``: x^3 rho''' + 4x^2 rho'' - x(x^2 - 2(2N+a)x + a^2 - 2) rho'
      + ((2N+a)x - a^2) rho (needs ``N`` and ``a``)
    * ``"alpha-limit"``: the equation for the alpha-correction ``rho1``, with the
      leading density rho0 = Ai'^2 - y Ai^2 differentiated analytically (needs ``alpha``)

    ``x`` must be uniformly spaced with at least 7 points; the residual is returned
    on ``x[3:-3]``. With ``return_scale`` the size of the largest term at each point
    is returned too, for relative comparisons.
    """
    x = np.asarray(x, dtype=float)
    rho = np.asarray(rho, dtype=float)
    if x.size < 7 or rho.shape != x.shape:
        raise ValueError("need at least 7 uniformly spaced samples")
    h = x[1] - x[0]
    if not np.allclose(np.diff(x), h, rtol=1e-9, atol=0):
        raise ValueError("grid must be uniformly spaced")
    f, d1, d2, d3 = _fd_derivatives(rho, h)
    y = x[3:-3]
    if variant == "gue-finite":
        if N is None:
            raise ValueError("gue-finite needs N")
        terms = [d3, -4.0 * y * y * d1, 4.0 * y * f, 8.0 * N * d1]
    elif variant == "lue-finite":
        if N is None or a is None:
            raise ValueError("lue-finite needs N and a")
        m = 2.0 * N + a
        terms = [y**3 * d3, 4.0 * y * y * d2, -y * (y * y - 2.0 * m * y + a * a - 2.0) * d1, (m * y - a * a) * f]
    elif variant == "alpha-limit":
        if alpha is None or alpha <= 0:
            raise ValueError("alpha-limit needs alpha > 0")
        r = math.sqrt(1.0 + alpha)
        ai, aip = airy_ai(y)
        r0 = aip * aip - y * ai * ai
        r0_1 = -ai * ai
        r0_2 = -2.0 * ai * aip
        r0_3 = -2.0 * aip * aip - 2.0 * y * ai * ai
        k = (1.0 / r + 1.0) ** (2.0 / 3.0) * (1.0 + alpha)
        terms = [k * d3, -4.0 * k * y * d1, 2.0 * k * f,
                 r * 3.0 * y * r0_3, r * 4.0 * r0_2, -r * 6.0 * y * y * r0_1,
                 -(2.0 + alpha) * y * y * r0_1, (2.0 + alpha) * y * r0]
    else:
        raise ValueError(f"unknown variant {variant!r}")
    res = np.sum(terms, axis=0)
    if return_scale:
        return res, np.max(np.abs(terms), axis=0)
    return res
