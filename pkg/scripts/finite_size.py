"""Finite-size convergence table D(N) = sup_t |N^{2/3}(p_N - p0) - p1|.

    python scripts/finite_size.py --N 50 100 200 400 800
"""

from __future__ import annotations

import argparse
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from softedge.fredholm import limit_curve, scaled_difference


@dataclass
class Config:
    out: Path = Path("results/finite_size.json")
    Ns: list[int] = field(default_factory=lambda: [50, 100, 200, 400])
    xis: list[float] = field(default_factory=lambda: [0.6, 1.0])
    lue_a: float = 1.0
    threads: int | None = None


def run(cfg: Config) -> dict:
    ts = np.round(np.arange(-6.0, 2.0 + 1e-9, 0.1), 10)
    table = {}
    for ensemble in ("gue", "lue"):
        for xi in cfg.xis:
            lim = limit_curve(ensemble, xi, ts, threads=cfg.threads)
            a = cfg.lue_a if ensemble == "lue" else None
            D = [scaled_difference(ensemble, N, xi, ts, a=a, limit=lim, threads=cfg.threads).gap for N in cfg.Ns]
            table[f"{ensemble}_xi{xi:g}"] = dict(zip(map(str, cfg.Ns), D))
            print(f"{ensemble} xi={xi:g}: " + "  ".join(f"D({N})={d:.4g}" for N, d in zip(cfg.Ns, D)))
    cfg.out.parent.mkdir(parents=True, exist_ok=True)
    cfg.out.write_text(json.dumps(table, indent=2))
    return table


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--out", type=Path, default=Config.out)
    p.add_argument("--N", type=int, nargs="+", dest="Ns")
    p.add_argument("--xi", type=float, nargs="+", dest="xis")
    p.add_argument("--threads", type=int)
    args = {k: v for k, v in vars(p.parse_args(argv)).items() if v is not None}
    run(Config(**args))


if __name__ == "__main__":
    main()
