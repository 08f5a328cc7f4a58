"""Residual of sqrt(g(v,v)) rho' = S(y) - S(x) against the curvature of the
metric family and against perturbation size of the diffeomorphism.

For each |det| level and amplitude, draws random quads and random graphs and
records the worst residual; also records the necessity gap on the
non-family custom metrics.

    python3 scripts/theorem_sweep.py --quads 10 --graphs 10 --csv sweep.csv
"""

import argparse
import csv
import sys
from dataclasses import dataclass, field

import numpy as np

from lorentz_schwarzian.diffeo import random_diffeo
from lorentz_schwarzian.metric import CUSTOM_METRICS, custom_metric, random_quad
from lorentz_schwarzian.worldline import admissible_samples, graph, theorem_residual


@dataclass
class SweepConfig:
    seed: int = 0
    quads: int = 10
    graphs: int = 10
    samples: int = 64
    det_levels: list = field(default_factory=lambda: [0.1, 1.0, 10.0])
    amplitudes: list = field(default_factory=lambda: [0.05, 0.3, 0.6])
    stencil: float = 1e-4


def sweep(cfg: SweepConfig):
    rng = np.random.default_rng(cfg.seed)
    rows = []
    for det in cfg.det_levels:
        for amp in cfg.amplitudes:
            worst, members = 0.0, 0
            for q in range(cfg.quads):
                M = random_quad(rng, det_range=(det, det))
                for k in range(cfg.graphs):
                    w = graph(random_diffeo(int(rng.integers(1 << 31)), 3, amp))
                    taus = admissible_samples(w, M, cfg.samples, rng)
                    worst = max(worst, theorem_residual(w, M, taus, h=cfg.stencil).max_abs)
                    members += 1
            rows.append({"metric": f"quad |det|={det:g}", "amplitude": amp,
                         "members": members, "max_residual": worst})
    for name in sorted(CUSTOM_METRICS):
        gm = custom_metric(name)
        for amp in cfg.amplitudes:
            worst = 0.0
            for k in range(cfg.graphs):
                w = graph(random_diffeo(int(rng.integers(1 << 31)), 3, amp))
                taus = admissible_samples(w, gm, cfg.samples, rng)
                worst = max(worst, theorem_residual(w, gm, taus, h=cfg.stencil).max_abs)
            rows.append({"metric": name, "amplitude": amp, "members": cfg.graphs,
                         "max_residual": worst})
    return rows


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--quads", type=int, default=10)
    p.add_argument("--graphs", type=int, default=10)
    p.add_argument("--samples", type=int, default=64)
    p.add_argument("--stencil", type=float, default=1e-4)
    p.add_argument("--csv", help="write the table here as well")
    a = p.parse_args()
    rows = sweep(SweepConfig(a.seed, a.quads, a.graphs, a.samples, stencil=a.stencil))
    cols = ["metric", "amplitude", "members", "max_residual"]
    out = [sys.stdout] + ([open(a.csv, "w", newline="")] if a.csv else [])
    for fh in out:
        w = csv.DictWriter(fh, cols, lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({**r, "max_residual": format(r["max_residual"], ".3e")})
    for fh in out[1:]:
        fh.close()


if __name__ == "__main__":
    main()
