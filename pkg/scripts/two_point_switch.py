"""Regret and redundancy of {0, sqrt(2 pi) t e_1} against the fixed-point sandwich.

Below t = 1/(2 pi) the local-width fixed point r* is sqrt(t); above it the
entropy fixed point r~ takes over.  Prints a CSV of the exact values and
the bracket endpoints of both characterizations.
"""

import argparse
import csv
import math
import sys
from dataclasses import dataclass

import numpy as np

from gaussregret import sets as S
from gaussregret.coding import two_point_redundancy
from gaussregret.complexity import complexity_profile
from gaussregret.regret import two_point_regret


@dataclass(frozen=True)
class Config:
    t_min: float = 1e-3
    t_max: float = 30.0
    points: int = 40


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("-o", "--output", default="-")
    args = ap.parse_args(argv)
    cfg = Config()
    out = sys.stdout if args.output == "-" else open(args.output, "w", newline="")
    w = csv.writer(out)
    w.writerow(["t", "regret", "redundancy", "r_star_sq", "r_tilde_sq", "regret_lower", "regret_upper"])
    sq2pi = math.sqrt(2 * math.pi)
    for t in np.geomspace(cfg.t_min, cfg.t_max, cfg.points):
        rho = sq2pi * t
        prof = complexity_profile(S.FinitePoints([[0.0], [rho]]))
        rs2, rt2 = prof.r_star[1] ** 2, prof.r_tilde[1] ** 2
        lower = max(prof.r_star[0] ** 2 / 2, prof.r_tilde[0] ** 2 / 300)
        upper = 2 * max(rs2, rt2)
        w.writerow([repr(float(t)), repr(two_point_regret(rho)), repr(two_point_redundancy(rho).value),
                    repr(float(rs2)), repr(float(rt2)), repr(float(lower)), repr(float(upper))])
    if out is not sys.stdout:
        out.close()


if __name__ == "__main__":
    main()
