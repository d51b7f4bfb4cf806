"""Limiting densities, their corrections and finite-N scaled differences.

For each variant and xi this writes the operator-route curve (t, F, p0, p1)
and, for GUE and fixed-a LUE, the scaled difference N^{2/3}(p_N - p0) at each N
so the convergence of the dots onto p1 can be plotted.

    python scripts/correction_curves.py --out results/corrections
"""

from __future__ import annotations

import argparse
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from softedge.fredholm import limit_curve, scaled_difference


@dataclass
class Config:
    out: Path = Path("results/corrections")
    xis: list[float] = field(default_factory=lambda: [0.3, 0.6, 1.0])
    Ns: list[int] = field(default_factory=lambda: [50, 100, 200])
    alphas: list[float] = field(default_factory=lambda: [0.5, 5.0])
    lue_a: float = 1.0
    t_min: float = -6.0
    t_max: float = 2.0
    t_step: float = 0.05
    threads: int | None = None

    def grid(self) -> np.ndarray:
        n = int(round((self.t_max - self.t_min) / self.t_step))
        return np.round(self.t_min + self.t_step * np.arange(n + 1), 10)


def run(cfg: Config) -> dict:
    cfg.out.mkdir(parents=True, exist_ok=True)
    ts = cfg.grid()
    summary = {"config": {k: str(v) if isinstance(v, Path) else v for k, v in asdict(cfg).items()}, "gaps": {}}
    for xi in cfg.xis:
        for variant, alpha in [("gue", None), ("lue", None)] + [("lue-alpha", a) for a in cfg.alphas]:
            tag = variant if alpha is None else f"{variant}{alpha:g}"
            lim = limit_curve(variant, xi, ts, alpha=alpha, threads=cfg.threads)
            lim.write(cfg.out / f"limit_{tag}_xi{xi:g}.csv")
            if variant == "lue-alpha":
                continue
            for N in cfg.Ns:
                sd = scaled_difference(variant, N, xi, ts, a=cfg.lue_a if variant == "lue" else None,
                                       limit=lim if variant == "gue" else None, threads=cfg.threads)
                sd.to_csv(cfg.out / f"scaled_{tag}_xi{xi:g}_N{N}.csv")
                summary["gaps"][f"{tag}_xi{xi:g}_N{N}"] = sd.gap
                print(f"{tag:8s} xi={xi:<4g} N={N:<4d} sup|scaled diff - p1| = {sd.gap:.4g}")
    (cfg.out / "summary.json").write_text(json.dumps(summary, indent=2))
    return summary


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--out", type=Path, default=Config.out)
    p.add_argument("--xi", type=float, nargs="+", dest="xis")
    p.add_argument("--N", type=int, nargs="+", dest="Ns")
    p.add_argument("--threads", type=int)
    args = {k: v for k, v in vars(p.parse_args(argv)).items() if v is not None}
    run(Config(**args))


if __name__ == "__main__":
    main()
