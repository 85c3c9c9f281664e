"""Two-stage component weighting on hand-written margin matrices.

Prints the per-class minimum losses, the min-max weights, how class costs
shift them, and the text form of the stage-two LP.
"""

import argparse

import numpy as np

from lexiboost.ensemble import MarginMatrix
from lexiboost.lexiboost import lexicographic_weights, solve_stage2, stage2_lp


def show(title, mm, costs=None):
    s1, s2 = lexicographic_weights(mm, costs)
    print(f"== {title}")
    print("  per-class minimum loss:", np.round(s1.losses, 4).tolist())
    print("  weights:", np.round(s2.alpha, 4).tolist(), " worst excess:", round(s2.chi, 4))
    print("  achieved losses:", np.round(s2.achieved, 4).tolist())
    return s1


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--dump", action="store_true", help="print the stage-two LP in text form")
    args = p.parse_args()

    # each component is right on one class and wrong on the other
    mm = MarginMatrix(np.array([[1.0, -1.0], [-1.0, 1.0]]), np.array([0, 1]), 2)
    s1 = show("symmetric pair", mm)
    s2 = solve_stage2(mm, s1, costs=[2.0, 1.0])
    print("  with class 0 costing twice as much:", np.round(s2.alpha, 4).tolist())

    # imbalanced: four majority rows, one minority row
    m = np.array([[1, 1, -1], [1, 1, 1], [1, -1, 1], [1, 1, 1], [-1, 1, 1.0]])
    show("one minority point", MarginMatrix(m, np.array([0, 0, 0, 0, 1]), 2))

    if args.dump:
        print(stage2_lp(mm, s1.losses).dump())


if __name__ == "__main__":
    main()
