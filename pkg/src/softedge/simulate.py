"""Monte Carlo samplers for soft-edge statistics.

Scale conventions follow the weights e^{-x^2} (GUE) and x^a e^{-x} (LUE):

* GUE: tridiagonal with diagonal N(0, 1/2) and squared off-diagonals
  Gamma(k)/2, k = N-1, ..., 1 (that is chi_{2k}^2 / 4).
* LUE: T = B B^T with B lower bidiagonal, B_ii^2 ~ Gamma(a + N - i + 1) and
  B_{i+1,i}^2 ~ Gamma(N - i), i = 1..N.

Randomness is organised in fixed-size chunks; chunk ``c`` draws from
``SeedSequence(seed, spawn_key=(c, stream))`` so results do not depend on how
chunks are scheduled.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.linalg.lapack import zhetrd

from .kernels import EdgeScaling

__all__ = [
    "CHUNK",
    "SampleBatch",
    "Histogram",
    "LppGrid",
    "Extraction",
    "generator",
    "tridiag_kth_largest",
    "gue_tridiagonal",
    "lue_tridiagonal",
    "wigner4_matrix",
    "sample_gue_max",
    "sample_lue_max",
    "sample_thinned_max",
    "sample_wigner4_max",
    "lpp_from_weights",
    "lpp_sample",
    "lpp_scaling",
    "lpp_asymptotic_cdf",
    "histogram",
    "freedman_diaconis_width",
    "correction_extract",
    "dkw_epsilon",
]

CHUNK = 16384
_MATRIX, _THIN = 0, 1


def generator(seed: int, chunk: int, stream: int = _MATRIX) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(chunk, stream))))


def _chunks(count: int, size: int = CHUNK):
    return [(c, min(size, count - c * size)) for c in range(math.ceil(count / size))]


def _run_chunks(fn, count: int, threads: int | None, size: int = CHUNK):
    jobs = _chunks(count, size)
    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda j: fn(*j), jobs))
    else:
        parts = [fn(*j) for j in jobs]
    return parts


def dkw_epsilon(n: int, confidence: float = 0.99) -> float:
    """Half-width of the Dvoretzky-Kiefer-Wolfowitz band for ``n`` samples."""
    return math.sqrt(math.log(2.0 / (1.0 - confidence)) / (2.0 * n))


# ---------------------------------------------------------------------------
# Containers
# ---------------------------------------------------------------------------


@dataclass
class SampleBatch:
    """Draws of a scaled largest eigenvalue (or last-passage time).

    ``atom_count`` counts samples with no value at all (every eigenvalue deleted
    by thinning); they are not in ``values``.
    """

    ensemble: str
    N: int
    values: np.ndarray
    seed: int
    scaling: str = "raw"
    xi: float = 1.0
    a: float | None = None
    alpha: float | None = None
    n: int | None = None
    atom_count: int = 0
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if not np.all(np.isfinite(self.values)):
            raise ValueError("batch contains non-finite values")

    @property
    def count(self) -> int:
        return int(self.values.size)

    @property
    def total(self) -> int:
        return self.count + self.atom_count

    def metadata(self) -> dict:
        out = {"ensemble": self.ensemble, "N": self.N, "a": self.a, "alpha": self.alpha, "n": self.n,
               "xi": self.xi, "seed": self.seed, "count": self.count, "scaling": self.scaling,
               "atom_count": self.atom_count}
        out.update(self.extra)
        return out

    def write(self, path, extra: dict | None = None) -> tuple[Path, Path]:
        path = Path(path)
        path.write_text("value\n" + "".join(f"{v!r}\n" for v in self.values.tolist()))
        meta = self.metadata()
        if extra:
            meta.update(extra)
        side = Path(str(path) + ".json")
        side.write_text(json.dumps(meta, indent=2, sort_keys=True))
        return path, side

    def ecdf(self, s) -> np.ndarray:
        """Empirical Pr(value <= s), counting atoms as mass at -inf."""
        v = np.sort(self.values)
        return (np.searchsorted(v, np.asarray(s, dtype=float), side="right") + self.atom_count) / self.total


@dataclass(frozen=True)
class Histogram:
    """Binned draws; ``density`` is normalised by the full sample size (atoms included)."""

    bin_edges: np.ndarray
    counts: np.ndarray
    total: int

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self.bin_edges)

    @property
    def centers(self) -> np.ndarray:
        return 0.5 * (self.bin_edges[1:] + self.bin_edges[:-1])

    @property
    def density(self) -> np.ndarray:
        return self.counts / (self.total * self.widths)

    def to_csv(self, path) -> Path:
        path = Path(path)
        lines = ["bin_left,bin_right,count,density"]
        for lo, hi, c, d in zip(self.bin_edges[:-1], self.bin_edges[1:], self.counts, self.density):
            lines.append(f"{float(lo)!r},{float(hi)!r},{int(c)},{float(d)!r}")
        path.write_text("\n".join(lines) + "\n")
        return path


def freedman_diaconis_width(values) -> float:
    q75, q25 = np.percentile(values, [75, 25])
    return 2.0 * (q75 - q25) / len(values) ** (1.0 / 3.0)


def histogram(batch: SampleBatch, bins: int | np.ndarray | None = None,
              range: tuple[float, float] | None = None) -> Histogram:
    """Histogram of ``batch.values``; Freedman-Diaconis bin width by default.

    Samples with zero interquartile range fall back to Sturges' bin count.
    """
    v = batch.values
    lo, hi = range if range is not None else (float(v.min()), float(v.max()))
    if bins is None:
        width = freedman_diaconis_width(v) if v.size > 1 else 0.0
        if width > 0:
            bins = max(1, int(math.ceil((hi - lo) / width)))
        else:  # zero interquartile range: Sturges' rule
            bins = int(math.ceil(math.log2(max(v.size, 1)))) + 1
    counts, edges = np.histogram(v, bins=bins, range=(lo, hi))
    return Histogram(edges, counts, batch.total)


# ---------------------------------------------------------------------------
# Tridiagonal eigenvalues
# ---------------------------------------------------------------------------


def _count_below(dT, e2T, x):
    """Number of eigenvalues < x per tridiagonal; ``dT``, ``e2T`` are (N, B) and (N-1, B)."""
    tiny = np.finfo(float).tiny
    q = dT[0] - x
    cnt = (q < 0).astype(np.int64)
    buf = np.empty_like(q)
    # a pivot of -inf after a near-zero one is the intended Sturm behaviour
    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
        for i in range(1, dT.shape[0]):
            q[q == 0] = -tiny
            np.divide(e2T[i - 1], q, out=buf)
            np.subtract(dT[i], x, out=q)
            q -= buf
            cnt += q < 0
    return cnt


def tridiag_kth_largest(d, e2, k=1, tol: float = 1e-12) -> np.ndarray:
    """k-th largest eigenvalue of symmetric tridiagonals by Sturm bisection.

    Parameters
    ----------
    d : (B, N) array
        Diagonals.
    e2 : (B, N-1) array
        Squared off-diagonals.
    k : int or (B,) int array
        Rank from the top, 1 = largest.
    tol : float
        Final bracket width.
    """
    d = np.atleast_2d(np.asarray(d, dtype=float))
    e2 = np.asarray(e2, dtype=float).reshape(d.shape[0], d.shape[1] - 1)
    B, N = d.shape
    k = np.broadcast_to(np.asarray(k), (B,))
    e = np.sqrt(e2)
    rad = np.zeros_like(d)
    rad[:, :-1] += e
    rad[:, 1:] += e
    lo = (d - rad).min(axis=1)
    hi = (d + rad).max(axis=1)
    width = float((hi - lo).max())
    steps = max(1, int(math.ceil(math.log2(max(width, tol) / tol))) + 1)
    dT, e2T = np.ascontiguousarray(d.T), np.ascontiguousarray(e2.T)
    for _ in range(steps):
        mid = 0.5 * (lo + hi)
        above = N - _count_below(dT, e2T, mid)
        go_up = above >= k
        lo = np.where(go_up, mid, lo)
        hi = np.where(go_up, hi, mid)
    return 0.5 * (lo + hi)


def gue_tridiagonal(rng: np.random.Generator, N: int, size: int):
    d = rng.normal(0.0, math.sqrt(0.5), size=(size, N))
    shape = np.arange(N - 1, 0, -1, dtype=float)
    e2 = 0.5 * rng.standard_gamma(shape, size=(size, N - 1))
    return d, e2


def lue_tridiagonal(rng: np.random.Generator, N: int, a: float, size: int):
    i = np.arange(1, N + 1, dtype=float)
    D2 = rng.standard_gamma(a + N - i + 1.0, size=(size, N))
    E2 = rng.standard_gamma(N - i[:-1], size=(size, N - 1))
    d = D2.copy()
    d[:, 1:] += E2
    return d, E2 * D2[:, :-1]


_FOUR_POINTS = np.array([1 + 1j, -1 + 1j, 1 - 1j, -1 - 1j]) / math.sqrt(2.0)


def wigner4_matrix(rng: np.random.Generator, N: int, size: int = 1) -> np.ndarray:
    """``(X + X^*)/2`` with X entries uniform on ``{(+-1 +- i)/sqrt(2)}``."""
    X = _FOUR_POINTS[rng.integers(0, 4, size=(size, N, N), dtype=np.uint8)]
    Y = X + np.conj(np.swapaxes(X, 1, 2))
    Y *= 0.5
    return Y


# ---------------------------------------------------------------------------
# Samplers
# ---------------------------------------------------------------------------


def _edge_map(ensemble: str, N: int, a: float = 0.0, alpha: float = 0.0) -> EdgeScaling:
    return EdgeScaling(ensemble, N, a=a, alpha=alpha)


def _tridiagonal(ensemble: str, rng, N: int, a: float, size: int):
    if ensemble == "gue":
        return gue_tridiagonal(rng, N, size)
    return lue_tridiagonal(rng, N, a, size)


def _sample_max(ensemble: str, N: int, count: int, seed: int, a: float, threads):
    def job(c, size):
        d, e2 = _tridiagonal(ensemble, generator(seed, c), N, a, size)
        return tridiag_kth_largest(d, e2)

    return np.concatenate(_run_chunks(job, count, threads))


def _lue_params(N: int, a: float | None, alpha: float | None):
    if (a is None) == (alpha is None):
        raise ValueError("give exactly one of a and alpha")
    if alpha is not None:
        return alpha * N, _edge_map("lue-alpha", N, alpha=alpha), "lue-alpha"
    return a, _edge_map("lue", N, a=a), "lue"


def sample_gue_max(N: int, count: int, seed: int, scaling: str = "raw", threads: int | None = None) -> SampleBatch:
    """Largest GUE eigenvalue; ``scaling="edge"`` maps it to sqrt(2) N^{1/6}(lambda - sqrt(2N))."""
    if N < 1:
        raise ValueError("N must be >= 1")
    lam = _sample_max("gue", N, count, seed, 0.0, threads)
    if scaling == "edge":
        lam = _edge_map("gue", N).t(lam)
    elif scaling != "raw":
        raise ValueError("scaling must be 'raw' or 'edge'")
    return SampleBatch("gue", N, lam, seed, scaling)


def sample_lue_max(N: int, count: int, seed: int, a: float | None = None, alpha: float | None = None,
                   scaling: str = "raw", threads: int | None = None) -> SampleBatch:
    """Largest LUE eigenvalue for weight x^a e^{-x}; ``alpha`` sets a = alpha N."""
    if N < 1:
        raise ValueError("N must be >= 1")
    a_val, sc, tag = _lue_params(N, a, alpha)
    lam = _sample_max("lue", N, count, seed, a_val, threads)
    if scaling == "edge":
        lam = sc.t(lam)
    elif scaling != "raw":
        raise ValueError("scaling must be 'raw' or 'edge'")
    return SampleBatch("lue", N, lam, seed, scaling if scaling == "raw" else tag, a=a_val, alpha=alpha)


def sample_thinned_max(ensemble: str, N: int, xi: float, count: int, seed: int, a: float | None = None,
                       alpha: float | None = None, scaling: str = "raw",
                       threads: int | None = None) -> SampleBatch:
    """Largest surviving eigenvalue when each is kept independently with probability ``xi``.

    Ranking eigenvalues from the top, the first survivor has a geometric rank
    J ~ Geom(xi), so the thinned maximum is the J-th largest eigenvalue; J > N means
    every eigenvalue was deleted and the draw is counted as an atom. J is drawn
    from its own substream, so ``xi = 1`` reproduces the unthinned sampler.
    """
    if not 0.0 < xi <= 1.0:
        raise ValueError("xi must lie in (0, 1]")
    if ensemble == "gue":
        a_val, sc = 0.0, _edge_map("gue", N)
    elif ensemble == "lue":
        a_val, sc, _ = _lue_params(N, a, alpha)
    else:
        raise ValueError("thinning supports 'gue' and 'lue'")

    def job(c, size):
        d, e2 = _tridiagonal(ensemble, generator(seed, c), N, a_val, size)
        J = generator(seed, c, _THIN).geometric(xi, size=size)
        keep = J <= N
        lam = tridiag_kth_largest(d[keep], e2[keep], J[keep]) if keep.any() else np.empty(0)
        return lam, int(size - keep.sum())

    parts = _run_chunks(job, count, threads)
    lam = np.concatenate([p[0] for p in parts])
    atoms = sum(p[1] for p in parts)
    if scaling == "edge":
        lam = sc.t(lam)
    elif scaling != "raw":
        raise ValueError("scaling must be 'raw' or 'edge'")
    return SampleBatch(ensemble, N, lam, seed, scaling, xi=xi, a=a_val if ensemble == "lue" else None,
                       alpha=alpha, atom_count=atoms)


def sample_wigner4_max(N: int, count: int, seed: int, centring: str = "cc", threads: int | None = None) -> SampleBatch:
    """Largest eigenvalue of the four-point Wigner matrix, centred and scaled.

    ``cc``: t = sqrt(2) N^{1/6}(lambda - sqrt(2N)); ``cc2``: t + 1/(2 N^{1/3});
    ``raw``: lambda itself.
    """
    if N < 2:
        raise ValueError("N must be >= 2")
    if centring not in ("cc", "cc2", "raw"):
        raise ValueError("centring must be 'cc', 'cc2' or 'raw'")

    def job(c, size):
        rng = generator(seed, c)
        d = np.empty((size, N))
        e2 = np.empty((size, N - 1))
        for start in range(0, size, 512):
            Y = wigner4_matrix(rng, N, min(512, size - start))
            for j, m in enumerate(Y):
                _, dd, ee, _, info = zhetrd(m, lower=1)
                if info != 0:
                    raise RuntimeError(f"zhetrd failed with info={info}")
                d[start + j] = dd
                e2[start + j] = ee * ee
        return tridiag_kth_largest(d, e2)

    lam = np.concatenate(_run_chunks(job, count, threads))
    if centring != "raw":
        lam = _edge_map("gue", N).t(lam)
        if centring == "cc2":
            lam = lam + 0.5 / N ** (1.0 / 3.0)
    return SampleBatch("wigner4", N, lam, seed, centring)


# ---------------------------------------------------------------------------
# Last-passage percolation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LppGrid:
    N: int
    n: int

    def __post_init__(self):
        if self.N < 1 or self.n < self.N:
            raise ValueError("need 1 <= N <= n")

    @property
    def a(self) -> int:
        return self.n - self.N


def lpp_from_weights(W: np.ndarray) -> np.ndarray:
    """Last-passage times for weights ``W`` of shape (B, N, n).

    Row by row, ``l[j] = x[j] + max(prev[j], l[j-1])`` unrolls to
    ``S[j] + max_{k<=j}(prev[k] - S[k-1])`` with ``S`` the running row sum.
    """
    W = np.asarray(W, dtype=float)
    prev = np.zeros(W.shape[::2])
    for i in range(W.shape[1]):
        prev = _lpp_row(prev, W[:, i, :])
    return prev[:, -1]


def _lpp_row(prev, x):
    S = np.cumsum(x, axis=1)
    return S + np.maximum.accumulate(prev - (S - x), axis=1)


def lpp_sample(grid: LppGrid, count: int, seed: int, threads: int | None = None) -> SampleBatch:
    """Last-passage time ``l(N, n)`` with i.i.d. rate-one exponential site weights."""
    size = max(256, min(CHUNK, (1 << 21) // grid.n))

    def job(c, m):
        rng = generator(seed, c)
        prev = np.zeros((m, grid.n))
        for _ in range(grid.N):
            prev = _lpp_row(prev, rng.standard_exponential((m, grid.n)))
        return prev[:, -1]

    vals = np.concatenate(_run_chunks(job, count, threads, size))
    return SampleBatch("lpp", grid.N, vals, seed, "raw", a=float(grid.a), n=grid.n)


def lpp_scaling(N: int, n: int, regime: str) -> EdgeScaling:
    """Centring and scale for l(N, n): ``fixed-a`` (a = n - N) or ``alpha`` (alpha = (n - N)/N)."""
    grid = LppGrid(N, n)
    if regime == "fixed-a":
        return EdgeScaling("lue", N, a=float(grid.a))
    if regime == "alpha":
        if grid.a == 0:
            raise ValueError("alpha regime needs n > N")
        return EdgeScaling("lue-alpha", N, alpha=grid.a / N)
    raise ValueError("regime must be 'fixed-a' or 'alpha'")


def lpp_asymptotic_cdf(N: int, n: int, s, regime: str = "fixed-a", solution=None):
    """Large-N approximations to Pr((l(N, n) - centre)/scale <= s).

    Returns ``(leading, corrected)`` with leading = exp(-int_s^inf sigma0) and
    corrected = leading (1 - N^{-2/3} int_s^inf sigma1) at xi = 1. The σ solution
    for the matching variant may be passed in to avoid re-solving.
    """
    from .painleve import solve

    sc = lpp_scaling(N, n, regime)
    variant = "lue" if regime == "fixed-a" else "lue-alpha"
    alpha = None if regime == "fixed-a" else sc.alpha
    s = np.asarray(s, dtype=float)
    if solution is None:
        solution = solve(variant, 1.0, y_min=min(float(np.min(s)), 0.0) - 0.5, alpha=alpha)
    elif solution.variant != variant or solution.xi != 1.0 or (alpha is not None and solution.alpha != alpha):
        raise ValueError("solution does not match the requested regime")
    I0 = np.where(s < solution.cfg.y_start, solution.sigma0_at(np.minimum(s, solution.cfg.y_start))[3], 0.0)
    I1 = np.where(s < solution.cfg.y_start, solution.sigma1_at(np.minimum(s, solution.cfg.y_start))[2], 0.0)
    lead = np.exp(-I0)
    corr = lead * (1.0 - N ** (-2.0 / 3.0) * I1)
    if s.ndim == 0:
        return float(lead), float(corr)
    return lead, corr


# ---------------------------------------------------------------------------
# Correction extraction
# ---------------------------------------------------------------------------


@dataclass
class Extraction:
    """Scaled histogram residual against a reference density."""

    centers: np.ndarray
    residual: np.ndarray
    dp0: np.ndarray
    power: float
    histogram: Histogram
    c: float | None = None

    def to_csv(self, path) -> Path:
        path = Path(path)
        lines = ["t,residual,dp0"]
        lines += [f"{t!r},{r!r},{d!r}" for t, r, d in zip(self.centers.tolist(), self.residual.tolist(),
                                                          self.dp0.tolist())]
        path.write_text("\n".join(lines) + "\n")
        return path


def correction_extract(batch: SampleBatch, ts, p0, power: float = 1.0 / 3.0, bins=None,
                       range: tuple[float, float] | None = None) -> Extraction:
    """``N^power (histogram density - p0)`` at bin centres.

    ``p0`` sampled on ``ts`` is interpolated with a cubic spline. For ``power = 1/3``
    the least-squares coefficient ``c`` of ``dp0/dt`` fitted to the residual is also
    returned.
    """
    ts = np.asarray(ts, dtype=float)
    spline = CubicSpline(ts, np.asarray(p0, dtype=float))
    if range is None:
        range = (float(ts[0]), float(ts[-1]))
    if range[0] < ts[0] - 1e-12 or range[1] > ts[-1] + 1e-12:
        raise ValueError("histogram range extends beyond the reference curve")
    hist = histogram(batch, bins=bins, range=range)
    x = hist.centers
    resid = batch.N**power * (hist.density - spline(x))
    dp0 = spline(x, 1)
    c = None
    if abs(power - 1.0 / 3.0) < 1e-12:
        c = float(np.dot(resid, dp0) / np.dot(dp0, dp0))
    return Extraction(x, resid, dp0, power, hist, c)
