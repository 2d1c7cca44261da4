"""Per-seed corank strata and double-cover reports for random systems.

    python3 scripts/strata_survey.py --seeds 20 --p 11

For each seed the system has n = 2 + seed % 3 and is generated over F_p
directly.  Prints one line per (seed, m) with the corank counts, the
pencil squarefree flag or the two singular-candidate sets for nets/webs,
and the corank of every gradient-only candidate.
"""

import argparse

from quadspin.exactalg import Field, poly_is_squarefree
from quadspin.linsys import LinearSystem, corank_at, discriminant, double_cover_report, strata_scan
from quadspin.quadforms import random_system


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--seeds", type=int, default=20)
    ap.add_argument("--p", type=int, default=11)
    ap.add_argument("--pencil-field", default="fp:10007", help="field for the pencil squarefree check")
    args = ap.parse_args()
    Fs = Field.fp(args.p)
    Fpen = Field.parse(args.pencil_field)
    for seed in range(args.seeds):
        n = 2 + seed % 3
        pencil = LinearSystem(tuple(random_system(n, 2, Fpen, seed)))
        print(f"seed {seed:2d} n={n} pencil over {Fpen}: squarefree={poly_is_squarefree(discriminant(pencil))}")
        for m in (2, 3, 4):
            L = LinearSystem(tuple(random_system(n, m, Fs, seed)))
            counts = dict(sorted(strata_scan(L, args.p).counts.items()))
            line = f"seed {seed:2d} n={n} m={m} counts={counts}"
            if m > 2:
                rep = double_cover_report(L, args.p)
                extra = sorted(set(rep.gradient_candidates) - set(rep.singular_candidates))
                line += f" minors={len(rep.singular_candidates)} gradient={len(rep.gradient_candidates)}"
                if extra:
                    line += f" gradient-only coranks={[corank_at(L, lam) for lam in extra]}"
            print(line)


if __name__ == "__main__":
    main()
