"""Zero counts of the projective Schwarzian over a random ensemble, with the
vertex comparison on the constant-curvature metric D = x - y.

    python3 scripts/ghys_ensemble.py --n 500 --amplitude 0.5 --out ghys.json
"""

import argparse
import collections
import json
import math
from dataclasses import asdict, dataclass

import numpy as np

from lorentz_schwarzian.diffeo import fixed_point_free, random_diffeo
from lorentz_schwarzian.metric import CONST_POS_MATRIX, MetricQuad, QuadMetric
from lorentz_schwarzian.projective import MobiusMap
from lorentz_schwarzian.schwarzian import (count_zeros_periodic, match_distance,
                                           projective_schwarzian, sign_change_count)
from lorentz_schwarzian.worldline import graph_angle, vertices


@dataclass
class EnsembleConfig:
    n: int = 200
    first_seed: int = 0
    n_modes: int = 3
    amplitude: float = 0.3
    grid: int = 4096
    oracle_grid: int = 0


def run(cfg: EnsembleConfig) -> dict:
    gm = QuadMetric(MetricQuad.from_matrix(CONST_POS_MATRIX)).angle_chart()
    dense = np.linspace(0, math.pi, cfg.oracle_grid, endpoint=False) if cfg.oracle_grid else None
    hist = collections.Counter()
    min_sep, worst_match, n_closed, mismatches = math.inf, 0.0, 0, []
    for seed in range(cfg.first_seed, cfg.first_seed + cfg.n):
        f = random_diffeo(seed, cfg.n_modes, cfg.amplitude)
        ps = count_zeros_periodic(lambda t: projective_schwarzian(f, t).value, cfg.grid)
        hist[ps.count] += 1
        min_sep = min(min_sep, ps.min_separation)
        if dense is not None and sign_change_count(projective_schwarzian(f, dense).value) != ps.count:
            mismatches.append(seed)
        if fixed_point_free(f, MobiusMap.identity()):
            n_closed += 1
            vx = vertices(graph_angle(f), gm, cfg.grid)
            worst_match = max(worst_match, match_distance(vx.locations, ps.locations))
    return {
        "config": asdict(cfg),
        "histogram": {str(k): hist[k] for k in sorted(hist)},
        "min_count": min(hist),
        "all_even": all(k % 2 == 0 for k in hist),
        "min_zero_separation": min_sep,
        "closed_graphs": n_closed,
        "worst_vertex_match": worst_match,
        "oracle_mismatches": mismatches,
    }


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    for f, v in asdict(EnsembleConfig()).items():
        p.add_argument("--" + f.replace("_", "-"), type=type(v), default=v)
    p.add_argument("--out")
    args = vars(p.parse_args())
    out = args.pop("out")
    result = run(EnsembleConfig(**args))
    text = json.dumps(result, indent=2)
    print(text)
    if out:
        with open(out, "w") as fh:
            fh.write(text + "\n")


if __name__ == "__main__":
    main()
