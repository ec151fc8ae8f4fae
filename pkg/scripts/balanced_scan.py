"""Track the balanced accessory parameter as the four weights get a small imaginary twist."""
import argparse

import numpy as np

from operlab.balanced import find_balanced_4pt

MU0 = -0.3122488645


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--eps", type=float, nargs="+", default=[0.2, 0.1, 0.05, 0.025])
    ap.add_argument("--steps", type=int, default=20)
    args = ap.parse_args()
    direction = np.array([1, 0.5, -0.7, 0.3])
    print("eps,mu,shift,shift/eps^2")
    for eps in args.eps:
        hits = find_balanced_4pt(list(-1 + 1j * eps * direction), [0, 1, 3], (MU0 - 0.05, MU0 + 0.05),
                                 steps=args.steps)
        for mu in hits:
            print(f"{eps},{mu:.12f},{mu - MU0:.3e},{(mu - MU0) / eps ** 2:.4f}")


if __name__ == "__main__":
    main()
