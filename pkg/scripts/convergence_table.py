"""Print trace distances to the limit state for the standard ensembles.

    python3 scripts/convergence_table.py --m 1 --max-exp 9
"""

import argparse

import numpy as np

from bosefinetti import EnsembleSpec, sweep_to_limit


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--m", type=int, default=1)
    parser.add_argument("--min-exp", type=int, default=3)
    parser.add_argument("--max-exp", type=int, default=9)
    parser.add_argument("--beta", type=float, default=1.0)
    args = parser.parse_args()

    n_list = [2**k for k in range(args.min_exp, args.max_exp + 1)]
    cases = [
        ("uniform", EnsembleSpec("uniform", d=1), "uniform"),
        ("noninteracting beta/n", EnsembleSpec("noninteracting", d=1, beta=args.beta, epsilons=[0, 1]), "noninteracting"),
        (
            "noninteracting fixed beta",
            EnsembleSpec("noninteracting", d=1, beta=args.beta, scaled=False, epsilons=[0, 1]),
            "condensate",
        ),
    ]
    print(f"{'n':>6}  " + "  ".join(f"{name:>26}" for name, _, _ in cases))
    columns = [sweep_to_limit(spec, limit, args.m, n_list).distances for _, spec, limit in cases]
    for i, n in enumerate(n_list):
        print(f"{n:>6}  " + "  ".join(f"{col[i]:>26.6e}" for col in columns))
    for (name, _, _), col in zip(cases, columns):
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = col[1:] / col[:-1]
        print(f"{name}: ratio per doubling {np.array2string(ratio, precision=3)}")


if __name__ == "__main__":
    main()
