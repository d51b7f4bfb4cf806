"""Operator route against the Painlevé route for p0 and p1.

For every variant and xi, both curves are written side by side together with
their pointwise difference and the checkpoint report of the ODE curve.

    python scripts/route_comparison.py --xi 1 0.6 0.3
"""

from __future__ import annotations

import argparse
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from softedge.fredholm import limit_curve
from softedge.painleve import ode_curve

CASES = [("gue", None), ("lue", None), ("lue-alpha", 0.5), ("lue-alpha", 5.0)]


@dataclass
class Config:
    out: Path = Path("results/routes")
    xis: list[float] = field(default_factory=lambda: [1.0, 0.6])
    t_min: float = -6.0
    t_max: float = 2.0
    t_step: float = 0.1


def run(cfg: Config) -> dict:
    cfg.out.mkdir(parents=True, exist_ok=True)
    n = int(round((cfg.t_max - cfg.t_min) / cfg.t_step))
    ts = np.round(cfg.t_min + cfg.t_step * np.arange(n + 1), 10)
    report = {}
    for xi in cfg.xis:
        for variant, alpha in CASES:
            tag = f"{variant}{'' if alpha is None else f'{alpha:g}'}_xi{xi:g}"
            op = limit_curve(variant, xi, ts, alpha=alpha)
            ode = ode_curve(variant, xi, ts, alpha=alpha, checkpoints=True)
            lines = ["t,p0_operator,p0_ode,p1_operator,p1_ode,untrusted"]
            for i, t in enumerate(ts):
                lines.append(f"{t!r},{op.p0[i]!r},{ode.p0[i]!r},{op.p1[i]!r},{ode.p1[i]!r},{int(ode.untrusted[i])}")
            (cfg.out / f"routes_{tag}.csv").write_text("\n".join(lines) + "\n")
            report[tag] = {
                "sup_p0": float(np.nanmax(np.abs(op.p0 - ode.p0))),
                "sup_p1": float(np.nanmax(np.abs(op.p1 - ode.p1))),
                "untrusted_points": int(ode.untrusted.sum()),
                "checkpoints": ode.meta.get("checkpoints"),
            }
            r = report[tag]
            print(f"{tag:22s} sup|dp0| = {r['sup_p0']:.2e}  sup|dp1| = {r['sup_p1']:.2e}  "
                  f"untrusted = {r['untrusted_points']}")
    (cfg.out / "routes.json").write_text(json.dumps(report, indent=2))
    return report


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--out", type=Path, default=Config.out)
    p.add_argument("--xi", type=float, nargs="+", dest="xis")
    p.add_argument("--t-min", type=float, dest="t_min")
    args = {k: v for k, v in vars(p.parse_args(argv)).items() if v is not None}
    run(Config(**args))


if __name__ == "__main__":
    main()
