"""R*(tA) across scales for a few bodies, with the small- and large-scale asymptotes.

Writes a plot-ready CSV: body, t, regret, t*w(A), n log t + log vol(A / sqrt(2 pi)).
"""

import argparse
import csv
import math
import sys
from dataclasses import dataclass

import numpy as np

from gaussregret import sets as S
from gaussregret.complexity import ball_width
from gaussregret.regret import regret


@dataclass(frozen=True)
class Config:
    t_min: float = 1e-3
    t_max: float = 1e3
    points: int = 49


def bodies():
    sq2pi = math.sqrt(2 * math.pi)
    # (name, set, gaussian width, volume or None)
    return [
        ("segment", S.Segment([[0.0], [1.0]]), 1.0 / sq2pi, 1.0),
        ("unit_square", S.Box([0.0, 0.0], [1.0, 1.0]), 2.0 / sq2pi, 1.0),
        ("ball3", S.Ball(np.zeros(3), 1.0), ball_width(3), 4.0 * math.pi / 3.0),
        ("two_points", S.FinitePoints([[0.0], [1.0]]), 1.0 / sq2pi, None),
    ]


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("-o", "--output", default="-")
    ap.add_argument("--points", type=int, default=Config.points)
    args = ap.parse_args(argv)
    cfg = Config(points=args.points)
    out = sys.stdout if args.output == "-" else open(args.output, "w", newline="")
    w = csv.writer(out)
    w.writerow(["body", "t", "regret", "small_scale", "large_scale"])
    for name, A, width, vol in bodies():
        for t in np.geomspace(cfg.t_min, cfg.t_max, cfg.points):
            r = regret(S.Scale(float(t), A)).value
            large = (A.dim * math.log(t) + math.log(vol / (2 * math.pi) ** (A.dim / 2))
                     if vol is not None else math.log(A.size))
            w.writerow([name, repr(float(t)), repr(r), repr(float(t * width)), repr(float(large))])
    if out is not sys.stdout:
        out.close()


if __name__ == "__main__":
    main()
