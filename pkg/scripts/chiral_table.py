"""Scalar relating the chiral Hecke operator to R Q(x) over a handful of configurations."""
from fractions import Fraction as F

from operlab.hecke import chiral_factorization, chiral_setup

CASES = [
    ((0, 1), (F(1, 2), F(1, 2)), 2),
    ((0, 1, 3), (F(5, 2), F(1, 2), 1), 1),
    ((0, 1, F(5, 2)), (F(1, 3), F(2, 3), 1), 1),
    ((0, 1, 3), (2, 2, 1), 2),
    ((0, 1, 3), (F(1, 2), F(3, 2), 1), 4),
    ((0, 1, 3), (2, 1, 1), 5),
]


def main():
    print(f"{'points':<20}{'weights':<22}{'r':>3}{'n':>3}{'dim':>5}  kappa")
    for pts, lams, r in CASES:
        s = chiral_setup(pts, lams, r)
        f = chiral_factorization(s)
        kappa = "degenerate" if f.degenerate else (str(f.kappa) if f.exact else f"FAIL ({f.mismatches})")
        print(f"{str(tuple(map(str, pts))):<20}{str(tuple(map(str, lams))):<22}{r:>3}{s.n:>3}{f.sector.dim:>5}  {kappa}")


if __name__ == "__main__":
    main()
