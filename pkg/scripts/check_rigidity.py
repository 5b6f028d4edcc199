"""Move each fixture deck by random rigid transforms and check point membership.

    python scripts/check_rigidity.py --trials 20 --points 2000

For every trial, points sampled around the original deck are mapped by the
transform; each must land in the corresponding cell of the moved deck.
"""
import argparse
import warnings
from pathlib import Path

import numpy as np

from mcnpasm import parse_deck, read_deck
from mcnpasm.algebra import Transform3D, apply_to_point
from mcnpasm.oracle import membership_matrix, sample_points

FIXTURES = Path(__file__).resolve().parents[1] / "fixtures"
BOXES = {
    "room": ([-400, -200, -200], [500, 700, 300]),
    "detector": ([-120, -20, -60], [120, 120, 60]),
    "ccd": ([-12, -12, -12], [12, 12, 12]),
    "lat_ex5": ([-35, -35, -35], [35, 35, 35]),
    "trcl": ([-20, -20, -20], [20, 20, 30]),
}


def random_transform(rng):
    q, r = np.linalg.qr(rng.normal(size=(3, 3)))
    q = q * np.sign(np.diag(r))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    return Transform3D(q, rng.uniform(-500, 500, 3))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--trials", type=int, default=10)
    ap.add_argument("--points", type=int, default=1000)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    rng = np.random.default_rng(args.seed)
    warnings.simplefilter("ignore")
    for name, box in BOXES.items():
        worst = 0
        for _ in range(args.trials):
            deck = read_deck(FIXTURES / f"{name}.mcnp")
            ids = [c.id for c in deck.cells]
            pts = sample_points(rng, *box, args.points)
            m0, a0 = membership_matrix(deck, ids, pts)
            t = random_transform(rng)
            moved = parse_deck(deck.transform_by(t).write())
            m1, a1 = membership_matrix(moved, ids, apply_to_point(t, pts))
            ok = ~(a0 | a1)
            worst = max(worst, int((m0[ok] != m1[ok]).any(axis=1).sum()))
        print(f"{name}: {args.trials} transforms, worst trial {worst} mismatching points")


if __name__ == "__main__":
    main()
