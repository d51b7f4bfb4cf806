"""Nyström evaluation of Fredholm determinants on (t, inf) and curves built from them."""

from __future__ import annotations

import json
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.linalg import lu_factor, lu_solve

from .kernels import KernelSpec, kernel_matrix

__all__ = [
    "DEFAULT_ORDER",
    "DEFAULT_H",
    "DEFAULT_REACH",
    "SingularSystemWarning",
    "SingularSystemError",
    "QuadratureRule",
    "NystromSystem",
    "DistributionCurve",
    "ScaledDifference",
    "build_rule",
    "fredholm_det",
    "omega",
    "det_and_omega",
    "curve",
    "limit_curve",
    "finite_curve",
    "scaled_difference",
]

DEFAULT_ORDER = 96
DEFAULT_H = 1e-3
# truncation point is max(t, 0) + DEFAULT_REACH; K(x, x) ~ exp(-4/3 x^{3/2}) is ~1e-28 there
DEFAULT_REACH = 16.0


class SingularSystemWarning(RuntimeWarning):
    """The Nyström matrix I - xi Kw has a zero pivot; the determinant is reported as 0."""


class SingularSystemError(ArithmeticError):
    """I - xi Kw cannot be solved, which signals an unusable quadrature rule."""


@dataclass(frozen=True)
class QuadratureRule:
    """Gauss-Legendre rule on ``[t, upper]``."""

    t: float
    upper: float
    nodes: np.ndarray
    weights: np.ndarray

    @property
    def order(self) -> int:
        return self.nodes.size

    @property
    def tail(self) -> float:
        return self.upper - self.t


def build_rule(t: float, order: int = DEFAULT_ORDER, tail: float | None = None) -> QuadratureRule:
    """Gauss-Legendre nodes and weights mapped affinely onto ``[t, t + tail]``.

    The default ``tail`` puts the truncation point at ``max(t, 0) + 16``.
    """
    if order < 2:
        raise ValueError("order must be >= 2")
    if tail is None:
        tail = max(t, 0.0) + DEFAULT_REACH - t
    if not tail > 0:
        raise ValueError("tail must be > 0")
    x, w = np.polynomial.legendre.leggauss(order)
    half = 0.5 * tail
    return QuadratureRule(float(t), float(t + tail), t + half * (x + 1.0), half * w)


@dataclass(frozen=True)
class NystromSystem:
    """Sampled kernel matrices ``Kw[j, k] = K(x_j, x_k) w_k`` (and optionally ``Lw``)."""

    rule: QuadratureRule
    Kw: np.ndarray
    Lw: np.ndarray | None = None

    @classmethod
    def assemble(cls, spec_k: KernelSpec, rule: QuadratureRule, spec_l: KernelSpec | None = None):
        w = rule.weights[None, :]
        Kw = kernel_matrix(spec_k, rule.nodes) * w
        Lw = None if spec_l is None else kernel_matrix(spec_l, rule.nodes) * w
        return cls(rule, Kw, Lw)

    def symmetrized(self, which: str = "K") -> np.ndarray:
        """``D^{1/2} M D^{-1/2}`` with ``D = diag(w)``; symmetric when the kernel is."""
        M = self.Kw if which == "K" else self.Lw
        s = np.sqrt(self.rule.weights)
        return s[:, None] * M / s[None, :]

    def _factor(self, xi: float):
        A = np.eye(self.rule.order) - xi * self.Kw
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")  # scipy warns on exactly singular U
            lu, piv = lu_factor(A, check_finite=True)
        return lu, piv

    @staticmethod
    def _det(lu, piv) -> float:
        diag = np.diag(lu)
        swaps = np.count_nonzero(piv != np.arange(piv.size))
        return float((-1.0) ** swaps * np.prod(diag))

    def det(self, xi: float) -> float:
        if xi == 0:
            return 1.0
        lu, piv = self._factor(xi)
        value = self._det(lu, piv)
        if value == 0.0 or not np.isfinite(value):
            warnings.warn(f"singular Nyström system at t={self.rule.t}", SingularSystemWarning, stacklevel=2)
            return 0.0
        return value

    def det_and_omega(self, xi: float) -> tuple[float, float]:
        """``(det(I - xi Kw), -det(I - xi Kw) Tr((I - xi Kw)^{-1} xi Lw))``."""
        if self.Lw is None:
            raise ValueError("system was assembled without a correction kernel")
        if xi == 0:
            return 1.0, 0.0
        lu, piv = self._factor(xi)
        d = self._det(lu, piv)
        if d == 0.0 or not np.isfinite(d):
            raise SingularSystemError(f"I - xi Kw is singular at t={self.rule.t}; refine the rule")
        X = lu_solve((lu, piv), xi * self.Lw)
        return d, -d * float(np.trace(X))


def _check_xi(xi: float):
    if not 0.0 <= xi <= 1.0:
        raise ValueError("xi must lie in [0, 1]")


def fredholm_det(spec: KernelSpec, xi: float, t: float, rule: QuadratureRule | None = None) -> float:
    """``det(I - xi K)`` on ``(t, inf)`` by the Nyström method.

    A numerically singular system returns 0.0 and emits :class:`SingularSystemWarning`.
    """
    _check_xi(xi)
    rule = rule or build_rule(t)
    return NystromSystem.assemble(spec, rule).det(xi)


def det_and_omega(spec_k: KernelSpec, spec_l: KernelSpec, xi: float, t: float,
                  rule: QuadratureRule | None = None) -> tuple[float, float]:
    _check_xi(xi)
    if not spec_l.is_correction:
        raise ValueError("spec_l must be a correction kernel")
    rule = rule or build_rule(t)
    return NystromSystem.assemble(spec_k, rule, spec_l).det_and_omega(xi)


def omega(spec_k: KernelSpec, spec_l: KernelSpec, xi: float, t: float,
          rule: QuadratureRule | None = None) -> float:
    """First-order response ``-det(I - xi K) Tr((I - xi K)^{-1} xi L)`` on ``(t, inf)``."""
    return det_and_omega(spec_k, spec_l, xi, t, rule)[1]


# ---------------------------------------------------------------------------
# Curves
# ---------------------------------------------------------------------------


@dataclass
class DistributionCurve:
    """Sampled ``t -> (F, p0, p1)`` with the settings that produced it."""

    variant: str
    xi: float
    ts: np.ndarray
    F: np.ndarray
    p0: np.ndarray
    p1: np.ndarray | None = None
    route: str = "operator"
    order: int | None = DEFAULT_ORDER
    h: float | None = DEFAULT_H
    tail: float | None = None
    clip: dict | None = None
    untrusted: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    def metadata(self) -> dict:
        out = {
            "variant": self.variant,
            "xi": self.xi,
            "route": self.route,
            "order": self.order,
            "h": self.h,
            "tail": self.tail,
            "clip": self.clip,
            "points": int(self.ts.size),
        }
        if self.untrusted is not None:
            bad = np.nonzero(self.untrusted)[0]
            out["untrusted_from"] = float(self.ts[bad].max()) if bad.size else None
        out.update(self.meta)
        return out

    def to_csv(self, path) -> Path:
        path = Path(path)
        cols = ["t", "F", "p0", "p1"] + (["untrusted"] if self.untrusted is not None else [])
        lines = [",".join(cols)]
        for i in range(self.ts.size):
            row = [repr(float(self.ts[i])), repr(float(self.F[i])), repr(float(self.p0[i])),
                   "" if self.p1 is None else repr(float(self.p1[i]))]
            if self.untrusted is not None:
                row.append(str(int(bool(self.untrusted[i]))))
            lines.append(",".join(row))
        path.write_text("\n".join(lines) + "\n")
        return path

    def write(self, path, extra: dict | None = None) -> tuple[Path, Path]:
        """Write ``<path>`` as CSV and ``<path>.json`` with the metadata."""
        csv = self.to_csv(path)
        meta = self.metadata()
        if extra:
            meta.update(extra)
        side = Path(str(csv) + ".json")
        side.write_text(json.dumps(meta, indent=2, sort_keys=True))
        return csv, side

    @classmethod
    def read_csv(cls, path, variant: str = "", xi: float = float("nan")) -> "DistributionCurve":
        rows = Path(path).read_text().strip().splitlines()
        header = rows[0].split(",")
        data = [r.split(",") for r in rows[1:]]
        col = {name: [d[i] for d in data] for i, name in enumerate(header)}
        p1 = None if any(v == "" for v in col["p1"]) else np.array(col["p1"], dtype=float)
        return cls(variant, xi, np.array(col["t"], dtype=float), np.array(col["F"], dtype=float),
                   np.array(col["p0"], dtype=float), p1)


def _map(fn, items, threads: int | None):
    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(fn, items))
    return [fn(v) for v in items]


def curve(spec_k: KernelSpec, xi: float, ts, spec_l: KernelSpec | None = None, *,
          order: int = DEFAULT_ORDER, tail: float | None = None, h: float = DEFAULT_H,
          threads: int | None = None, variant: str | None = None) -> DistributionCurve:
    """F(t), p0(t) = dF/dt and, with ``spec_l``, p1(t) = dOmega/dt on a grid.

    Derivatives are central differences with step ``h``.
    """
    _check_xi(xi)
    if not h > 0:
        raise ValueError("h must be > 0")
    ts = np.asarray(ts, dtype=float)
    if ts.ndim != 1 or np.any(np.diff(ts) <= 0):
        raise ValueError("t grid must be one-dimensional and strictly increasing")

    def at(t):
        rule = build_rule(t, order, tail)
        if spec_l is None:
            return fredholm_det(spec_k, xi, t, rule), 0.0
        return det_and_omega(spec_k, spec_l, xi, t, rule)

    def point(t):
        Fm, Om = at(t - h)
        Fp, Op = at(t + h)
        F0 = fredholm_det(spec_k, xi, t, build_rule(t, order, tail))
        return F0, (Fp - Fm) / (2 * h), (Op - Om) / (2 * h)

    vals = np.array(_map(point, ts, threads)).reshape(-1, 3)
    return DistributionCurve(
        variant=variant or spec_k.kind.value, xi=float(xi), ts=ts, F=vals[:, 0], p0=vals[:, 1],
        p1=None if spec_l is None else vals[:, 2], route="operator", order=order, h=h, tail=tail,
    )


def limit_curve(variant: str, xi: float, ts, alpha: float | None = None, *, correction: bool = True,
                **kw) -> DistributionCurve:
    """Limiting curve for ``variant`` in {"gue", "lue", "lue-alpha"}, optionally with p1."""
    spec_l = KernelSpec.correction(variant, alpha) if correction else None
    out = curve(KernelSpec.airy(), xi, ts, spec_l, variant=variant, **kw)
    if alpha is not None:
        out.meta["alpha"] = alpha
    return out


def finite_curve(ensemble: str, N: int, xi: float, ts, *, a: float | None = None,
                 alpha: float | None = None, **kw) -> DistributionCurve:
    """Finite-N curve in the soft-edge variable; ``ensemble`` is "gue" or "lue".

    For LUE, grid points whose stencil ``t - h`` maps to ``s <= 0`` are dropped and
    the dropped range is recorded in ``clip``.
    """
    if ensemble == "gue":
        spec = KernelSpec.finite_gue(N)
    elif ensemble in ("lue", "lue-alpha"):
        spec = KernelSpec.finite_lue(N, a=a, alpha=alpha)
    else:
        raise ValueError(f"unknown ensemble {ensemble!r}")
    ts = np.asarray(ts, dtype=float)
    h = kw.get("h", DEFAULT_H)
    clip = None
    sc = spec.scaling()
    if sc.ensemble != "gue":
        keep = ts - h > sc.t_floor
        if not keep.all():
            if not keep.any():
                raise ValueError("entire t grid lies below the LUE support")
            clip = {"t_floor": sc.t_floor, "dropped": int((~keep).sum()), "first_t": float(ts[keep][0])}
            ts = ts[keep]
    out = curve(spec, xi, ts, variant=f"finite-{ensemble}", **kw)
    out.route = "finite-N"
    out.clip = clip
    out.meta.update({"N": N, "a": sc.laguerre_a if sc.ensemble != "gue" else None, "alpha": alpha})
    return out


@dataclass
class ScaledDifference:
    """``N^{2/3}(p_N - p0)`` next to the limiting correction ``p1`` on a shared grid."""

    ensemble: str
    N: int
    xi: float
    ts: np.ndarray
    diff: np.ndarray
    p1: np.ndarray
    finite: DistributionCurve
    limit: DistributionCurve

    @property
    def gap(self) -> float:
        return float(np.max(np.abs(self.diff - self.p1)))

    def to_csv(self, path) -> Path:
        path = Path(path)
        lines = ["t,scaled_difference,p1"]
        lines += [f"{t!r},{d!r},{p!r}" for t, d, p in zip(self.ts.tolist(), self.diff.tolist(), self.p1.tolist())]
        path.write_text("\n".join(lines) + "\n")
        return path


def scaled_difference(ensemble: str, N: int, xi: float, ts, *, a: float | None = None,
                      alpha: float | None = None, limit: DistributionCurve | None = None,
                      **kw) -> ScaledDifference:
    """Finite-size deviation of the density, scaled by ``N^{2/3}``.

    ``limit`` may be passed to reuse a limiting curve computed on the same grid.
    """
    fin = finite_curve(ensemble, N, xi, ts, a=a, alpha=alpha, **kw)
    if ensemble == "gue":
        variant = "gue"
    elif alpha is not None:
        variant = "lue-alpha"
    else:
        variant = "lue"
    if limit is None or limit.ts.size != fin.ts.size or not np.allclose(limit.ts, fin.ts):
        limit = limit_curve(variant, xi, fin.ts, alpha=alpha, **kw)
    diff = N ** (2.0 / 3.0) * (fin.p0 - limit.p0)
    p1 = limit.p1 if limit.p1 is not None else np.zeros_like(diff)
    return ScaledDifference(ensemble, N, xi, fin.ts, diff, p1, fin, limit)

