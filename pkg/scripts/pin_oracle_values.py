"""Recompute the regression constants frozen in the test suite.

Every value comes from the oracles in tests/oracles.py (sympy elimination,
dict-based Clifford products), never from the library's own routines.
Run: python3 scripts/pin_oracle_values.py
"""

import sys
from fractions import Fraction
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "tests"))

import oracles as O  # noqa: E402


def hyperbolic_gram(n):
    B = [[0] * (2 * n) for _ in range(2 * n)]
    for i in range(n):
        B[2 * i][2 * i + 1] = B[2 * i + 1][2 * i] = 1
    return B


def unit(d, i):
    v = [0] * d
    v[i] = 1
    return v


def composition_scalar(gram, W, W2, p=None):
    """c with omega . (complement of meet in W2) . (complement in W) = c omega.

    The caller passes W and W2 with the shared vectors listed first, so the
    complements are the trailing rows.
    """
    C = O.CliffordOracle(gram, p)
    k = sum(1 for a, b in zip(W, W2) if a == b)
    omega = O.vector_product(C, W)
    word = O.vector_product(C, W2[k:] + W[k:])
    prod = C.mul(omega, word)
    ratios = {prod.get(S, 0) / Fraction(c) if p is None else prod.get(S, 0) * pow(c, -1, p) % p for S, c in omega.items()}
    assert len(ratios) == 1 and set(prod) <= set(omega), "not a scalar multiple"
    return ratios.pop()


def main():
    # lemma scalars over Q on hyperbolic spaces (e_i at 2i, f_i at 2i+1)
    for n, W, W2 in (
        (2, [0, 2], [1, 3]),
        (3, [4, 0, 2], [4, 1, 3]),
        (4, [0, 2, 4, 6], [1, 3, 5, 7]),
        (2, [0, 2], [0, 2]),
    ):
        d = 2 * n
        c = composition_scalar(hyperbolic_gram(n), [unit(d, i) for i in W], [unit(d, i) for i in W2])
        print(f"lemma n={n} W={W} W'={W2}: {c}")

    # discriminant of the diagonal pencil I_4, diag(1,2,3,4)
    I4 = [[int(i == j) for j in range(4)] for i in range(4)]
    D = [[(i + 1) * int(i == j) for j in range(4)] for i in range(4)]
    print("diag pencil det:", sorted(O.symbolic_det_poly([I4, D]).items(), reverse=True))

    # fiber rank at e_1 for W = span(e_1, e_2) on the hyperbolic plane pair
    C = O.CliffordOracle(hyperbolic_gram(2), 10007)
    omega = O.vector_product(C, [unit(4, 0), unit(4, 2)])
    print("fiber rank n=2 v=e1:", O.fiber_rank(C, omega, unit(4, 0)))
    print("ideal dims n=2 W=span(e1,e2):", O.left_ideal_dims(C, omega))
    opp = O.vector_product(C, [unit(4, 0), unit(4, 3)])
    print("hom n=2 same:", O.module_hom_dim(C, omega, omega), "opposite:", O.module_hom_dim(C, omega, opp))

    # corank-2, n=3: hyperbolic plane pair plus a two-dimensional radical at 4, 5
    B = hyperbolic_gram(3)
    B[4][5] = B[5][4] = 0
    C = O.CliffordOracle(B, 10007)
    rad_in = O.vector_product(C, [unit(6, 0), unit(6, 4), unit(6, 5)])
    rad_in_2 = O.vector_product(C, [unit(6, 2), unit(6, 4), unit(6, 5)])
    big = O.vector_product(C, [unit(6, 0), unit(6, 2), unit(6, 4), unit(6, 5)])
    print("corank2 n=3 dim-3 W ⊇ rad: ideal", O.left_ideal_dims(C, rad_in), "hom", O.module_hom_dim(C, rad_in, rad_in))
    print("corank2 n=3 two dim-3 W ⊇ rad, other family: hom", O.module_hom_dim(C, rad_in, rad_in_2))
    print("corank2 n=3 dim-4 W ⊇ rad: ideal", O.left_ideal_dims(C, big), "hom", O.module_hom_dim(C, big, big))

    # graded monomial counts
    print("counts dim 4 m 1:", [O.enumerate_graded_monomials(4, 1, k) for k in range(9)])
    print("counts dim 8 m 4 k 2:", O.enumerate_graded_monomials(8, 4, 2))
    print("counts dim 8 m 1 k 7..9:", [O.enumerate_graded_monomials(8, 1, k) for k in (7, 8, 9)])


if __name__ == "__main__":
    main()
