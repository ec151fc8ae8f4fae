"""Classify the monodromy of spectral opers for random configurations of both signs."""
import argparse

from operlab.bethe import bethe_eigenvalues, solve_bae
from operlab.monodromy import classify, monodromy_generators
from operlab.oper import Oper
from operlab.samples import random_dominant_configs, random_negative_configs


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--count", type=int, default=6)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    families = [("dominant", random_dominant_configs(args.count, seed=args.seed)),
                ("negative", random_negative_configs(args.count, seed=args.seed))]
    for label, configs in families:
        for cfg in configs:
            for w in solve_bae(cfg, strict=False):
                op = Oper(cfg.points, cfg.weights, bethe_eigenvalues(w, cfg))
                cls = classify(monodromy_generators(op), strict=False)
                on = sorted(k for k, v in cls.flags().items() if v)
                print(f"{label:9s} m={cfg.m} n={cfg.n}  {','.join(on) or '-':30s} "
                      f"distance from solvable {cls.margins['solvable']:.1e}")


if __name__ == "__main__":
    main()
