"""Two-point kernels at the soft edge.

All kernel functions broadcast over ``x`` and ``y``. Divided differences of the
form ``(f(x) g(y) - g(x) f(y)) / (x - y)`` switch to an expansion about the
midpoint when ``|x - y| < DIAGONAL_DELTA``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache

import numpy as np

from .specfun import airy_ai, hermite_all, hermite_top, laguerre_all, laguerre_top

__all__ = [
    "DIAGONAL_DELTA",
    "KernelKind",
    "KernelSpec",
    "EdgeScaling",
    "airy_kernel",
    "correction_kernel",
    "correction_kernel_alpha",
    "lue_correction_quadratic_form",
    "finite_kernel_scaled",
    "finite_kernel_direct",
    "density_correction",
    "kernel_matrix",
    "evaluate",
]

DIAGONAL_DELTA = 1e-4
CBRT2 = 2.0 ** (1.0 / 3.0)


class KernelKind(str, Enum):
    AIRY = "airy"
    CORRECTION_GUE = "correction-gue"
    CORRECTION_LUE = "correction-lue"
    CORRECTION_LUE_ALPHA = "correction-lue-alpha"
    FINITE_GUE = "finite-gue"
    FINITE_LUE = "finite-lue"


_CORRECTIONS = (KernelKind.CORRECTION_GUE, KernelKind.CORRECTION_LUE, KernelKind.CORRECTION_LUE_ALPHA)
_FINITE = (KernelKind.FINITE_GUE, KernelKind.FINITE_LUE)


@dataclass(frozen=True)
class KernelSpec:
    """Which kernel to evaluate, with exactly the parameters that kind needs.

    ``FINITE_LUE`` takes either a fixed ``a`` or a proportional ``alpha``
    (then ``a = alpha * N``), never both.
    """

    kind: KernelKind
    N: int | None = None
    a: float | None = None
    alpha: float | None = None

    def __post_init__(self):
        kind = KernelKind(self.kind)
        object.__setattr__(self, "kind", kind)
        has = {"N": self.N is not None, "a": self.a is not None, "alpha": self.alpha is not None}
        if kind in (KernelKind.AIRY, KernelKind.CORRECTION_GUE, KernelKind.CORRECTION_LUE):
            need = set()
        elif kind is KernelKind.CORRECTION_LUE_ALPHA:
            need = {"alpha"}
        elif kind is KernelKind.FINITE_GUE:
            need = {"N"}
        elif has["a"] and has["alpha"]:
            raise ValueError("finite LUE takes either a or alpha, not both")
        else:
            need = {"N", "a" if has["a"] else "alpha"}
        got = {k for k, v in has.items() if v}
        if got != need:
            raise ValueError(f"{kind.value} needs parameters {sorted(need)}, got {sorted(got)}")
        if self.N is not None and self.N < 1:
            raise ValueError("N must be >= 1")
        if self.a is not None and self.a < 0:
            raise ValueError("a must be >= 0")
        if self.alpha is not None and self.alpha <= 0:
            raise ValueError("alpha must be > 0")

    @classmethod
    def airy(cls):
        return cls(KernelKind.AIRY)

    @classmethod
    def correction(cls, variant: str, alpha: float | None = None):
        """Correction kernel for ``variant`` in {"gue", "lue", "lue-alpha"}."""
        if variant == "gue":
            return cls(KernelKind.CORRECTION_GUE)
        if variant == "lue":
            return cls(KernelKind.CORRECTION_LUE)
        if variant == "lue-alpha":
            return cls(KernelKind.CORRECTION_LUE_ALPHA, alpha=alpha)
        raise ValueError(f"unknown correction variant {variant!r}")

    @classmethod
    def finite_gue(cls, N: int):
        return cls(KernelKind.FINITE_GUE, N=N)

    @classmethod
    def finite_lue(cls, N: int, a: float | None = None, alpha: float | None = None):
        return cls(KernelKind.FINITE_LUE, N=N, a=a, alpha=alpha)

    @property
    def is_finite(self) -> bool:
        return self.kind in _FINITE

    @property
    def is_correction(self) -> bool:
        return self.kind in _CORRECTIONS

    def scaling(self) -> "EdgeScaling":
        if self.kind is KernelKind.FINITE_GUE:
            return EdgeScaling("gue", self.N)
        if self.kind is KernelKind.FINITE_LUE:
            if self.alpha is not None:
                return EdgeScaling("lue-alpha", self.N, alpha=self.alpha)
            return EdgeScaling("lue", self.N, a=self.a)
        raise ValueError("only finite-N kernels carry an edge scaling")


@dataclass(frozen=True)
class EdgeScaling:
    """Affine soft-edge map ``t -> s_t`` for an ensemble of size ``N``.

    ``gue``: s = sqrt(2N) + t / (sqrt(2) N^{1/6})
    ``lue``: s = 4N + 2a + 2 (2N)^{1/3} t
    ``lue-alpha``: s = N (r + 1)^2 + c_alpha N^{1/3} t, r = sqrt(1 + alpha),
    c_alpha = (r + 1)(1/r + 1)^{1/3}; the Laguerre parameter is a = alpha N.
    """

    ensemble: str
    N: int
    a: float = 0.0
    alpha: float = 0.0

    def __post_init__(self):
        if self.ensemble not in ("gue", "lue", "lue-alpha"):
            raise ValueError(f"unknown ensemble {self.ensemble!r}")
        if self.N < 1:
            raise ValueError("N must be >= 1")

    @property
    def laguerre_a(self) -> float:
        return self.alpha * self.N if self.ensemble == "lue-alpha" else self.a

    @property
    def center(self) -> float:
        N = self.N
        if self.ensemble == "gue":
            return math.sqrt(2.0 * N)
        if self.ensemble == "lue":
            return 4.0 * N + 2.0 * self.a
        return N * (math.sqrt(1.0 + self.alpha) + 1.0) ** 2

    @property
    def jacobian(self) -> float:
        N = self.N
        if self.ensemble == "gue":
            return 1.0 / (math.sqrt(2.0) * N ** (1.0 / 6.0))
        if self.ensemble == "lue":
            return 2.0 * (2.0 * N) ** (1.0 / 3.0)
        return c_alpha(self.alpha) * N ** (1.0 / 3.0)

    def s(self, t):
        return self.center + self.jacobian * np.asarray(t, dtype=float)

    def t(self, s):
        return (np.asarray(s, dtype=float) - self.center) / self.jacobian

    @property
    def t_floor(self) -> float:
        """Smallest t inside the support: ``-inf`` for GUE, s_t = 0 for LUE."""
        if self.ensemble == "gue":
            return -math.inf
        return -self.center / self.jacobian


def c_alpha(alpha: float) -> float:
    r = math.sqrt(1.0 + alpha)
    return (r + 1.0) * (1.0 / r + 1.0) ** (1.0 / 3.0)


# ---------------------------------------------------------------------------
# Airy-built kernels
# ---------------------------------------------------------------------------


def _airy_divided(x, ax, apx, y, ay, apy):
    """(Ai(x)Ai'(y) - Ai'(x)Ai(y)) / (x - y) with a midpoint expansion near x = y."""
    d = x - y
    near = np.abs(d) < DIAGONAL_DELTA
    with np.errstate(divide="ignore", invalid="ignore"):
        out = (ax * apy - apx * ay) / np.where(near, 1.0, d)
    if np.any(near):
        m = 0.5 * (x + y)[near]
        u2 = (0.5 * d[near]) ** 2
        am, apm = airy_ai(m)
        out = np.array(out, dtype=float, copy=True)
        out[near] = (apm * apm - m * am * am
                     + u2 * (am * apm / 3.0 - 2.0 / 3.0 * m * m * am * am + 2.0 / 3.0 * m * apm * apm))
    return out


def _prep(x, y):
    x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    ax, apx = airy_ai(x)
    ay, apy = airy_ai(y)
    return x, y, np.asarray(ax), np.asarray(apx), np.asarray(ay), np.asarray(apy)


def _maybe_scalar(out, *args):
    if all(np.ndim(a) == 0 for a in args):
        return float(out)
    return out


def airy_kernel(x, y):
    """Airy kernel ``K(x, y)``; ``K(x, x) = Ai'(x)^2 - x Ai(x)^2``."""
    X, Y, ax, apx, ay, apy = _prep(x, y)
    return _maybe_scalar(_airy_divided(X, ax, apx, Y, ay, apy), x, y)


def _gue_correction(x, ax, apx, y, ay, apy):
    return ((x + y) * apx * apy - (x * x + x * y + y * y) * ax * ay
            + 1.5 * (apx * ay + ax * apy)) / 20.0


def _lue_correction(x, ax, apx, y, ay, apy):
    return CBRT2 / 10.0 * (-(x + y) * apx * apy + (x * x + x * y + y * y) * ax * ay
                           + (apx * ay + ax * apy))


def lue_correction_quadratic_form(x, y):
    """Variant of the fixed-a LUE correction with ``x^2 + xy + y^2`` on both products.

    ``2^{1/3}/10 [q Ai'(x)Ai'(y) - q Ai(x)Ai(y) + 3/2 (Ai'(x)Ai(y) + Ai(x)Ai'(y))]``.
    This form does not agree with the large-N limit of the finite LUE kernel nor
    with the alpha -> 0 limit of :func:`correction_kernel_alpha`; it exists so the
    discrepancy can be measured (see ``tests/test_kernels.py``).
    """
    X, Y, ax, apx, ay, apy = _prep(x, y)
    q = X * X + X * Y + Y * Y
    out = CBRT2 / 10.0 * (q * apx * apy - q * ax * ay + 1.5 * (apx * ay + ax * apy))
    return _maybe_scalar(out, x, y)


@lru_cache(maxsize=64)
def _alpha_coefficients(alpha: float):
    r = math.sqrt(1.0 + alpha)
    lead = alpha**2 * (1.0 + alpha + r) ** (1.0 / 3.0) / (32.0 * (1.0 + alpha) ** (5.0 / 6.0) * (1.0 + r) ** 3)
    pref = 1.0 / (160.0 * (1.0 + alpha) ** (2.0 / 3.0) * (1.0 + r) ** (2.0 / 3.0))
    c = 2.0 + alpha - 6.0 * r
    d = 6.0 + 2.0 * r + 3.0 * alpha
    e = (r - 1.0) ** 2
    return lead, pref, c, d, e


def _alpha_regrouped(alpha, x, ax, apx, y, ay, apy, kxy):
    """Correction kernel for a = alpha N with every 1/(x - y) cancelled.

    ``kxy`` is the Airy kernel at (x, y).
    """
    lead, pref, c, d, e = _alpha_coefficients(float(alpha))
    q2 = (x * x + y * y) ** 2
    bracket = (-8.0 * c * (x * x + x * y + y * y) * ax * ay
               + 4.0 * d * (ay * apx + ax * apy)
               + 5.0 * e * q2 * kxy
               + 8.0 * c * (x + y) * apx * apy)
    return -lead * q2 * kxy + pref * bracket


def _alpha_kernel(alpha, x, ax, apx, y, ay, apy):
    lead, pref, c, d, e = _alpha_coefficients(float(alpha))
    diff = x - y
    near = np.abs(diff) < DIAGONAL_DELTA
    safe = np.where(near, 1.0, diff)
    q2 = (x * x + y * y) ** 2
    with np.errstate(divide="ignore", invalid="ignore"):
        first = -lead * q2 * (ax * apy - apx * ay) / safe
        group = (-8.0 * c * (x**3 - y**3) * ax * ay
                 + (4.0 * d * diff - 5.0 * e * q2) * ay * apx
                 + (4.0 * d * diff + 5.0 * e * q2) * ax * apy
                 + 8.0 * c * (x * x - y * y) * apx * apy)
        out = first + pref * group / safe
    if np.any(near):
        out = np.array(out, dtype=float, copy=True)
        xs, ys = x[near], y[near]
        kxy = _airy_divided(xs, ax[near], apx[near], ys, ay[near], apy[near])
        out[near] = _alpha_regrouped(alpha, xs, ax[near], apx[near], ys, ay[near], apy[near], kxy)
    return out


def correction_kernel_alpha(alpha: float, x, y):
    """Leading correction to the soft-edge kernel of the LUE with ``a = alpha N``."""
    if alpha <= 0:
        raise ValueError("alpha must be > 0")
    X, Y, ax, apx, ay, apy = _prep(x, y)
    return _maybe_scalar(_alpha_kernel(alpha, X, ax, apx, Y, ay, apy), x, y)


def correction_kernel(spec: KernelSpec, x, y):
    """Correction kernel ``L(x, y)`` for one of the three correction kinds."""
    X, Y, ax, apx, ay, apy = _prep(x, y)
    if spec.kind is KernelKind.CORRECTION_GUE:
        out = _gue_correction(X, ax, apx, Y, ay, apy)
    elif spec.kind is KernelKind.CORRECTION_LUE:
        out = _lue_correction(X, ax, apx, Y, ay, apy)
    elif spec.kind is KernelKind.CORRECTION_LUE_ALPHA:
        out = _alpha_kernel(spec.alpha, X, ax, apx, Y, ay, apy)
    else:
        raise ValueError(f"{spec.kind.value} is not a correction kernel")
    return _maybe_scalar(out, x, y)


def density_correction(variant: str, y, alpha: float | None = None):
    """Return ``(rho0, rho1)``: leading density and its first correction.

    ``variant`` is "gue", "lue" or "lue-alpha" (the last needs ``alpha``).
    """
    y = np.asarray(y, dtype=float)
    a, ap = airy_ai(y)
    rho0 = ap * ap - y * a * a
    if variant == "gue":
        rho1 = -(3.0 * y * y * a * a - 2.0 * y * ap * ap - 3.0 * a * ap) / 20.0
    elif variant == "lue":
        rho1 = CBRT2 / 10.0 * (3.0 * y * y * a * a - 2.0 * y * ap * ap + 2.0 * a * ap)
    elif variant == "lue-alpha":
        if alpha is None or alpha <= 0:
            raise ValueError("lue-alpha needs alpha > 0")
        rho1 = _alpha_regrouped(alpha, y, a, ap, y, a, ap, rho0)
    else:
        raise ValueError(f"unknown variant {variant!r}")
    if y.ndim == 0:
        return float(rho0), float(rho1)
    return rho0, rho1


# ---------------------------------------------------------------------------
# Finite-N kernels
# ---------------------------------------------------------------------------


def _finite_parts(spec: KernelSpec, s):
    """(f_{N-2}, f_{N-1}, f_N), the CD prefactor, and a confluent-diagonal function."""
    N = spec.N
    if spec.kind is KernelKind.FINITE_GUE:
        f2, f1, f0 = hermite_top(N, s, count=3)
        pref = math.sqrt(N / 2.0)

        def diag():
            return pref * (math.sqrt(2.0 * N) * f1 * f1 - math.sqrt(2.0 * N - 2.0) * f2 * f0)

        return f1, f0, pref, diag
    a = spec.scaling().laguerre_a
    if np.any(np.asarray(s) <= 0):
        raise ValueError("scaled LUE point s_t <= 0 lies outside the support; raise t_min")
    f2, f1, f0 = laguerre_top(N, a, s, count=3)
    pref = math.sqrt(N * (N + a))

    def diag():
        return pref * (f0 * f1 + pref * f1 * f1 - math.sqrt((N - 1.0) * (N - 1.0 + a)) * f2 * f0) / s

    return f1, f0, pref, diag


def finite_kernel_direct(spec: KernelSpec, x, y):
    """Scaled finite-N kernel by explicit summation over n < N (validation path)."""
    sc = spec.scaling()
    X, Y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    sx, sy = sc.s(X).ravel(), sc.s(Y).ravel()
    if spec.kind is KernelKind.FINITE_GUE:
        fx, fy = hermite_all(spec.N - 1, sx), hermite_all(spec.N - 1, sy)
    else:
        if np.any(sx <= 0) or np.any(sy <= 0):
            raise ValueError("scaled LUE point s_t <= 0 lies outside the support; raise t_min")
        a = sc.laguerre_a
        fx, fy = laguerre_all(spec.N - 1, a, sx), laguerre_all(spec.N - 1, a, sy)
    out = sc.jacobian * np.sum(fx * fy, axis=0)
    return _maybe_scalar(out.reshape(X.shape), x, y)


def finite_kernel_scaled(spec: KernelSpec, x, y, scaling: EdgeScaling | None = None):
    """``(ds/dt) K_N(s_x, s_y)`` via the Christoffel-Darboux two-term form.

    The exact diagonal uses the confluent form; pairs closer than
    ``DIAGONAL_DELTA`` but not equal fall back to explicit summation.
    """
    if not spec.is_finite:
        raise ValueError(f"{spec.kind.value} is not a finite-N kernel")
    sc = scaling or spec.scaling()
    X, Y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    shape = X.shape
    X, Y = X.ravel(), Y.ravel()
    sx, sy = sc.s(X), sc.s(Y)
    gx1, gx0, pref, diag_x = _finite_parts(spec, sx)
    gy1, gy0, _, _ = _finite_parts(spec, sy)
    d = sx - sy
    same = d == 0
    near = (np.abs(X - Y) < DIAGONAL_DELTA) & ~same
    with np.errstate(divide="ignore", invalid="ignore"):
        out = pref * (gx0 * gy1 - gx1 * gy0) / np.where(same | near, 1.0, d)
    if same.any():
        out[same] = diag_x()[same]
    if near.any():
        out[near] = finite_kernel_direct(spec, X[near], Y[near]) / sc.jacobian
    out = sc.jacobian * out
    return _maybe_scalar(out.reshape(shape), x, y)


# ---------------------------------------------------------------------------
# Dispatch and matrices
# ---------------------------------------------------------------------------


def evaluate(spec: KernelSpec, x, y):
    """Evaluate any kernel kind at ``(x, y)``."""
    if spec.kind is KernelKind.AIRY:
        return airy_kernel(x, y)
    if spec.is_correction:
        return correction_kernel(spec, x, y)
    return finite_kernel_scaled(spec, x, y)


def kernel_matrix(spec: KernelSpec, nodes) -> np.ndarray:
    """Matrix ``k(x_i, x_j)`` on a node vector, sharing special-function work."""
    x = np.asarray(nodes, dtype=float)
    n = x.size
    if spec.is_finite:
        sc = spec.scaling()
        s = sc.s(x)
        g1, g0, pref, diag = _finite_parts(spec, s)
        d = s[:, None] - s[None, :]
        np.fill_diagonal(d, 1.0)
        M = pref * (g0[:, None] * g1[None, :] - g1[:, None] * g0[None, :]) / d
        np.fill_diagonal(M, diag())
        close = np.abs(x[:, None] - x[None, :]) < DIAGONAL_DELTA
        np.fill_diagonal(close, False)
        if close.any():
            i, j = np.nonzero(close)
            M[i, j] = finite_kernel_direct(spec, x[i], x[j]) / sc.jacobian
        return sc.jacobian * M

    a, ap = airy_ai(x)
    X, Y = np.broadcast_arrays(x[:, None], x[None, :])
    ax, apx = np.broadcast_to(a[:, None], (n, n)), np.broadcast_to(ap[:, None], (n, n))
    ay, apy = np.broadcast_to(a[None, :], (n, n)), np.broadcast_to(ap[None, :], (n, n))
    if spec.kind is KernelKind.AIRY:
        return _airy_divided(X, ax, apx, Y, ay, apy)
    if spec.kind is KernelKind.CORRECTION_GUE:
        return _gue_correction(X, ax, apx, Y, ay, apy)
    if spec.kind is KernelKind.CORRECTION_LUE:
        return _lue_correction(X, ax, apx, Y, ay, apy)
    return _alpha_kernel(spec.alpha, X, ax, apx, Y, ay, apy)
