"""Error of the five-point curvature derivative against the exact Schwarzian
as a function of the stencil step, on the flat graph of exp and of x^3.

Shows the truncation regime (error ~ h^4) at large h and the roundoff regime
(error ~ eps / h) at small h, which is why the default step is 1e-4.

    python3 scripts/stencil_study.py
"""

import argparse

import numpy as np

from lorentz_schwarzian.jets import elementary_jet
from lorentz_schwarzian.metric import flat_metric
from lorentz_schwarzian.schwarzian import schwarzian
from lorentz_schwarzian.worldline import graph, rho_prime_lhs

CURVES = {
    "exp": (lambda t: elementary_jet("exp", t), (-1.0, 1.0)),
    "cube": (lambda t: elementary_jet("power", t, 3), (0.5, 2.0)),
}


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--steps", type=float, nargs="+",
                   default=[1e-1, 3e-2, 1e-2, 3e-3, 1e-3, 3e-4, 1e-4, 3e-5, 1e-5, 3e-6, 1e-6])
    p.add_argument("--points", type=int, default=101)
    a = p.parse_args()
    print("h," + ",".join(CURVES))
    for h in a.steps:
        errs = []
        for f, (lo, hi) in CURVES.values():
            t = np.linspace(lo, hi, a.points)
            err = np.abs(rho_prime_lhs(graph(f), flat_metric(), t, h=h) - schwarzian(f(t)))
            errs.append(format(float(err.max()), ".2e"))
        print(f"{h:g}," + ",".join(errs))


if __name__ == "__main__":
    main()
