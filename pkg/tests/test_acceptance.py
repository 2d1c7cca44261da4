"""The thirteen acceptance criteria, each with its runtime budget.

Every test records a PASS/FAIL line that the terminal summary prints.
Three criteria do not hold as stated: random nets over F_11 can have
corank-2 members, random web discriminants over F_11 can be singular at
corank-1 members, and a rank-2 form on a 4-space is a pair of planes on
only one of which the sheaf lives.  Those tests are strict expected
failures, and each has a companion test pinning down that the failure is
a property of the inputs rather than a bug.
"""

import functools
import json
import random
import time
from math import comb

import jsonschema
import pytest

import oracles
from conftest import ACCEPTANCE_LINES
from helpers import random_point_on
from quadspin import cli
from quadspin.clifford import CliffordAlgebra, rank_stabilization_table
from quadspin.exactalg import Field, Matrix, poly_is_squarefree
from quadspin.linsys import (
    LinearSystem,
    base_locus_sample,
    clifford_complex_exact_at,
    corank_at,
    discriminant,
    double_cover_report,
    planted_singular_web,
    strata_scan,
)
from quadspin.quadforms import (
    isotropic_completions,
    max_isotropic_basis,
    radical_basis,
    random_invertible,
    random_isotropic,
    random_split_space,
    random_system,
    same_family,
)
from quadspin.spinor import (
    MatrixFactorizationPair,
    build_ideal,
    fiber_rank,
    graded_ideal_dims,
    lemma_iso_maps,
    module_hom_dim,
    ses_check,
)

FP = Field.fp(10007)
F11 = Field.fp(11)
QQ = Field.rationals()


def record(num: int, ok: bool, elapsed: float, budget: float, detail: str = ""):
    ok = ok and elapsed < budget
    line = f"{detail} ({elapsed:.1f}s of {budget:.0f}s)".strip()
    ACCEPTANCE_LINES.append((num, ok, line))
    print(f"criterion {num:2d}: {'PASS' if ok else 'FAIL'}  {line}")
    return ok


def system(n, m, field, seed, **kw):
    return LinearSystem(tuple(random_system(n, m, field, seed, **kw)))


def web_protocol(seed):
    """(n, system) of the stratification sweep: n cycles through 2, 3, 4."""
    return 2 + seed % 3


# ---------------------------------------------------------------------------


def test_criterion_01_matrix_factorization():
    t0 = time.perf_counter()
    rng = random.Random(1)
    failures = []
    cases = [(FP, i) for i in range(200)] + [(QQ, i) for i in range(20)]
    for field, i in cases:
        n, c = 2 + i % 3, (i // 3) % 3
        if field is QQ:
            n = 2 + i % 2
        Q = random_split_space(n, field, 1000 + i, corank=c)
        F = MatrixFactorizationPair.of(build_ideal(random_isotropic(Q, rng)))
        v = [field.random(rng) for _ in range(Q.dim)]
        P, S = F.phi(v), F.psi(v)
        scalar = Matrix.identity(field, P.rows).scale(Q.q(v))
        if not (P @ S == scalar and S @ P == scalar):
            failures.append((str(field), i))
    elapsed = time.perf_counter() - t0
    ok = record(1, not failures, elapsed, 30, f"{len(cases) - len(failures)}/{len(cases)} exact")
    assert ok, failures


def test_criterion_02_graded_rank_stabilization():
    t0 = time.perf_counter()
    ok = True
    for n in (2, 3, 4):
        d = 2 * n
        k_max = d + 4
        ranks = rank_stabilization_table([random_split_space(n, FP, n)], k_max).ranks
        closed = [sum(comb(d, k - 2 * j) for j in range(k // 2 + 1)) for k in range(k_max + 1)]
        ok &= ranks == closed
        ok &= all(ranks[k] == 2 ** (d - 1) for k in range(d - 1, k_max + 1))
        ok &= all(ranks[k + 2] == ranks[k] for k in range(d - 1, k_max - 1))
    elapsed = time.perf_counter() - t0
    assert record(2, ok, elapsed, 5, "n = 2, 3, 4 up to k = 2n + 4")


def test_criterion_03_ideal_dimensions():
    t0 = time.perf_counter()
    rng = random.Random(3)
    bad, count = [], 0
    for n in (2, 3, 4):
        for c in (0, 1, 2):
            Q = random_split_space(n, FP, 30 * n + c, corank=c)
            A = CliffordAlgebra(Q)
            top = n + 1 if c == 2 else n
            for m in range(max(c, 1), top + 1):
                I = build_ideal(random_isotropic(Q, rng, dim=m), A)
                want = 2 ** (2 * n - m - 1)
                count += 1
                if (I.dim_even, I.dim_odd) != (want, want):
                    bad.append((n, c, m, I.dim_even, I.dim_odd))
                if m == n + 1 and want != 2 ** (n - 2):
                    bad.append(("oversized", n))
    elapsed = time.perf_counter() - t0
    ok = record(3, not bad, elapsed, 10, f"{count} (n, corank, m) cases incl. m = n + 1 on corank 2")
    assert ok, bad


def test_criterion_04_graded_ideal_stabilization():
    t0 = time.perf_counter()
    ok = True
    for n in (2, 3):
        for seed in range(2):
            Q = random_split_space(n, FP, 40 + seed)
            t = graded_ideal_dims(random_isotropic(Q, random.Random(seed)), k_range=range(0, 2 * n + 4))
            ok &= t.nondecreasing
            ok &= t.stable_from() == 2 * n - 1 and t.dims[2 * n - 1] == t.stable_dim
            ok &= bool(t.h_shift) and all(t.h_shift.values())
    elapsed = time.perf_counter() - t0
    assert record(4, ok, elapsed, 20, "n = 2, 3; constant from k = 2n - 1, h I_k = I_{k+2}")


def test_criterion_05_lemma():
    t0 = time.perf_counter()
    rng = random.Random(5)
    bad = []
    for i in range(50):
        n = 2 + i % 3
        Q = random_split_space(n, FP, 500 + i)
        W = random_isotropic(Q, rng, family_hint=0)
        W2 = random_isotropic(Q, rng, family_hint=0)
        assert same_family(W, W2)
        R = lemma_iso_maps(W, W2)
        eye = Matrix.identity(FP, R.composition.rows)
        if not (R.composition == eye.scale(R.scalar) and R.scalar != 0):
            bad.append(("random", i))
        # with full bases the scalar vanishes iff the pairing matrix is singular
        R = lemma_iso_maps(W, W2, reduce_meet=False)
        if (R.scalar == 0) != (R.pairing_det == 0):
            bad.append(("full bases", i))
    # a rebased copy of W: every vector of W is orthogonal to all of W'
    for i in range(10):
        n = 2 + i % 3
        Q = random_split_space(n, FP, 700 + i)
        W = random_isotropic(Q, rng)
        W2 = W.rebased(random_invertible(FP, n, rng))
        R = lemma_iso_maps(W, W2, reduce_meet=False)
        eye = Matrix.identity(FP, R.composition.rows)
        if not (R.pairing_det == 0 and R.scalar == 0 and R.composition == eye.scale(0)):
            bad.append(("degenerate", i))
    elapsed = time.perf_counter() - t0
    ok = record(5, not bad, elapsed, 20, "50 random same-family pairs, 10 degenerate pairs")
    assert ok, bad


def test_criterion_06_module_simplicity():
    t0 = time.perf_counter()
    configs = [(2, 0), (3, 0), (3, 1), (3, 2)]
    bad = []
    for i in range(30):
        n, c = configs[i % 4]
        Q = random_split_space(n, FP, 600 + i, corank=c)
        rng = random.Random(i)
        dim = n + 1 if c == 2 else n
        W = random_isotropic(Q, rng, dim=dim)
        I = build_ideal(W)
        if module_hom_dim(I, I) != 1:
            bad.append(("same", i))
        if c != 1:  # corank 1 has a single family
            Wo = random_isotropic(Q, rng, dim=dim, family_hint=1)
            if module_hom_dim(I, build_ideal(Wo, I.algebra)) != 0:
                bad.append(("opposite", i))
    elapsed = time.perf_counter() - t0
    ok = record(6, not bad, elapsed, 30, "30 cases over (n, corank) in (2,0) (3,0) (3,1) (3,2)")
    assert ok, bad


def test_criterion_07_short_exact_sequence():
    t0 = time.perf_counter()
    bad = []
    for i in range(15):
        c = 0 if i % 2 == 0 else 2
        Q = random_split_space(3, FP, 800 + i, corank=c)
        rng = random.Random(i)
        W = random_isotropic(Q, rng, dim=2 if c == 0 else 3)
        W1, W2 = isotropic_completions(W)
        if i < 10:
            if not ses_check(W, W1, W2, seed=i).passed:
                bad.append(("positive", i))
        else:
            rep = ses_check(W, W1, W1, seed=i)
            if rep.quotient_iso or not (rep.contained and rep.halving):
                bad.append(("control", i))
    elapsed = time.perf_counter() - t0
    ok = record(7, not bad, elapsed, 30, "10 positive n = 3 configurations, 5 wrong-family controls")
    assert ok, bad


def test_criterion_08_discriminant_degree():
    t0 = time.perf_counter()
    bad = []
    for seed in range(20):
        n, m = 2 + seed % 3, 2 + (seed // 3) % 3
        L = system(n, m, FP, seed)
        D = discriminant(L, verify_points=20, seed=seed)
        if D.degree != 2 * n or not D.is_homogeneous():
            bad.append(("degree", seed))
        rng = random.Random(seed)
        grams = [oracles.as_int_rows(B) for B in L.grams]
        for _ in range(20):
            lam = [FP.random(rng) for _ in range(m)]
            M = [[sum(int(l) * B[i][j] for l, B in zip(lam, grams)) for j in range(2 * n)] for i in range(2 * n)]
            if D.evaluate(lam) != oracles.det(M, FP.p):
                bad.append(("value", seed))
                break
    elapsed = time.perf_counter() - t0
    ok = record(8, not bad, elapsed, 60, "20 systems, 20 extra evaluation points each")
    assert ok, bad


@functools.cache
def stratification_sweep():
    """Corank counts at p = 11 for pencils, nets and webs over 20 seeds."""
    out = {}
    for seed in range(20):
        n = web_protocol(seed)
        for m in (2, 3, 4):
            out[seed, m] = strata_scan(system(n, m, F11, seed), 11).counts
    return out


@pytest.mark.xfail(strict=True, reason="random nets over F_11 meet the corank-2 locus (seeds 8 and 18)")
def test_criterion_09_stratification():
    t0 = time.perf_counter()
    counts = stratification_sweep()
    low = [k for k, c in counts.items() if k[1] < 4 and c.get(2, 0)]
    webs = [k for k, c in counts.items() if k[1] == 4 and max(c) >= 3]
    planted_ok = all(
        (1, 0, 0, 0) in strata_scan(system(n, 4, F11, seed, planted_corank=2), 11).witnesses.get(2, [])
        for n in (2, 3, 4)
        for seed in range(3)
    )
    elapsed = time.perf_counter() - t0
    ok = record(9, not low and not webs and planted_ok, elapsed, 60, f"pencil/net systems with corank 2: {sorted(low)}")
    assert ok


def test_criterion_09_failure_is_genuine():
    counts = stratification_sweep()
    assert all(c.get(2, 0) == 0 for (seed, m), c in counts.items() if m == 2)
    assert all(max(c) <= 2 for (seed, m), c in counts.items() if m == 4)
    bad_nets = sorted(seed for (seed, m), c in counts.items() if m == 3 and c.get(2, 0))
    assert bad_nets
    for seed in bad_nets:
        L = system(web_protocol(seed), 3, F11, seed)
        assert oracles.corank_counts([oracles.as_int_rows(B) for B in L.grams], 11) == counts[seed, 3]
        for lam in strata_scan(L, 11).witnesses[2]:
            assert corank_at(L, lam) == 2
    for n in (2, 3, 4):
        for seed in range(3):
            rep = strata_scan(system(n, 4, F11, seed, planted_corank=2), 11)
            assert (1, 0, 0, 0) in rep.witnesses[2]


@functools.cache
def cover_sweep():
    pencils = [poly_is_squarefree(discriminant(system(web_protocol(s), 2, FP, s))) for s in range(20)]
    webs = {s: double_cover_report(system(web_protocol(s), 4, F11, s), 11) for s in range(20)}
    return pencils, webs


@pytest.mark.xfail(strict=True, reason="random webs over F_11 have corank-1 singular points of the discriminant")
def test_criterion_10_double_cover():
    t0 = time.perf_counter()
    pencils, webs = cover_sweep()
    disagree = sorted(s for s, rep in webs.items() if not rep.methods_agree)
    elapsed = time.perf_counter() - t0
    ok = record(10, sum(pencils) >= 19 and not disagree, elapsed, 60, f"pencils squarefree {sum(pencils)}/20; webs disagreeing: {disagree}")
    assert ok


def test_criterion_10_failure_is_genuine():
    pencils, webs = cover_sweep()
    assert sum(pencils) >= 19
    disagree = [s for s, rep in webs.items() if not rep.methods_agree]
    assert disagree
    for s in disagree:
        rep = webs[s]
        L = system(web_protocol(s), 4, F11, s)
        # minor-vanishing points are always gradient points
        assert set(rep.singular_candidates) <= set(rep.gradient_candidates)
        disc = oracles.symbolic_det_poly([oracles.as_int_rows(B) for B in L.grams], 11)
        for lam in set(rep.gradient_candidates) - set(rep.singular_candidates):
            assert corank_at(L, lam) == 1
            grams = [oracles.as_int_rows(G) for G in L.grams]
            M = [[sum(x * B[i][j] for x, B in zip(lam, grams)) % 11 for j in range(L.dim)] for i in range(L.dim)]
            assert oracles.nullity(M, 11) == 1
            for t in range(4):
                grad = sum(c * e[t] * _mono(lam, e, t) for e, c in disc.items() if e[t]) % 11
                assert grad == 0


def _mono(lam, exps, t):
    out = 1
    for i, e in enumerate(exps):
        out = out * pow(lam[i], e - (i == t), 11) % 11
    return out


def test_criterion_11_complex_exactness():
    t0 = time.perf_counter()
    bad, points = [], 0
    for seed in range(3):
        L = system(4, 4, FP, 100 + seed)
        for pt in base_locus_sample(L, 10, seed=seed):
            points += 1
            rep = clifford_complex_exact_at(L, pt.v, k_max=12)
            ok = rep.injective_d0 and rep.d_squared_zero
            ok &= all(rep.ranks[k] + rep.ranks[k - 1] == rep.dims[k] for k in range(1, 13))
            if not ok:
                bad.append((seed, tuple(int(x) for x in pt.v)))
    elapsed = time.perf_counter() - t0
    ok = record(11, not bad and points == 30, elapsed, 120, f"{points} base-locus points on 3 webs, 1 <= k <= 12")
    assert ok, bad


def fiber_rank_sweep():
    """(failures, elapsed) over corank 1 and 2, n = 2, 3, 4, for W of
    dimension n and the maximal W containing the radical."""
    t0 = time.perf_counter()
    bad = []
    for n in (2, 3, 4):
        for c in (1, 2):
            Q = random_split_space(n, FP, 900 + 3 * n + c, corank=c)
            R = radical_basis(Q)
            rng = random.Random(n * 10 + c)
            for dim in sorted({n, n + c - 1}):
                W = max_isotropic_basis(Q, dim=dim)
                F = MatrixFactorizationPair.of(build_ideal(W))
                smooth = {fiber_rank(F, random_point_on(Q, rng, avoid=R)) for _ in range(30)}
                if len(smooth) != 1:
                    bad.append(("smooth", n, c, dim))
                for _ in range(5):
                    coef = [FP.random_nonzero(rng) for _ in range(R.rows)]
                    v = FP.norm(sum(a * r for a, r in zip(coef, R.a)))
                    if not F.phi(v).is_zero() or fiber_rank(F, v) != F.ideal.dim_even:
                        bad.append(("cone", n, c, dim))
    return bad, time.perf_counter() - t0


@pytest.mark.xfail(strict=True, reason="for n = 2, corank 2 the quadric is two planes and the sheaf lives on one of them")
def test_criterion_12_fiber_ranks():
    bad, elapsed = fiber_rank_sweep()
    ok = record(12, not bad, elapsed, 60, f"corank 1 and 2, n = 2, 3, 4; failing (kind, n, corank, dim W): {bad}")
    assert ok, bad


def test_criterion_12_failure_is_genuine():
    bad, _ = fiber_rank_sweep()
    assert bad == [("smooth", 2, 2, 3)]
    # q has rank 2, so Q is the union of P(W) and one other plane through the cone line
    Q = random_split_space(2, FP, 900 + 6 + 2, corank=2)
    W = max_isotropic_basis(Q, dim=3)
    Wo = max_isotropic_basis(Q, dim=3, family_hint=1)
    F = MatrixFactorizationPair.of(build_ideal(W))
    C = oracles.CliffordOracle(oracles.as_int_rows(Q.gram), FP.p)
    omega = oracles.vector_product(C, oracles.as_int_rows(W.basis))
    R = radical_basis(Q)
    rng = random.Random(0)
    for plane, want in ((W, 1), (Wo, 0)):
        for _ in range(5):
            v = FP.norm(sum(FP.random(rng) * r for r in plane.basis.a))
            if Matrix.from_rows(FP, list(R.a) + [v]).rank() == R.rows:
                continue
            assert fiber_rank(F, v) == oracles.fiber_rank(C, omega, [int(x) for x in v]) == want


def test_criterion_13_cli(tmp_path, capsys):
    t0 = time.perf_counter()
    ok = True
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for out in (a, b):
        ok &= cli.main(["gen", "--n", "2", "--m", "2", "--field", "fp:10007", "--seed", "42", "--out", str(out)]) == 0
    ok &= a.read_bytes() == b.read_bytes()
    for suite in cli.SUITES:
        rpt = tmp_path / f"{suite}.json"
        code = cli.main(["verify", str(a), "--suite", suite, "--seed", "1", "--trials", "2", "--out", str(rpt)])
        jsonschema.validate(json.loads(rpt.read_text()), cli.REPORT_SCHEMA)
        ok &= code == 0
    L, v = planted_singular_web(2, FP, 0)
    planted = tmp_path / "planted.json"
    planted.write_text(json.dumps(L.to_json()))
    point = ",".join(str(int(x)) for x in v)
    ok &= cli.main(["verify", str(planted), "--suite", "complex", "--seed", "0", "--point", point, "--out", str(tmp_path / "p.json")]) == 1
    broken = tmp_path / "broken.json"
    broken.write_bytes(a.read_bytes()[:-5])
    ok &= cli.main(["verify", str(broken), "--suite", "mf", "--seed", "0"]) == 2
    ok &= "byte offset" in capsys.readouterr().err
    elapsed = time.perf_counter() - t0
    assert record(13, ok, elapsed, 10, "byte-identical gen, 7 schema-valid reports, exit codes 0/1/2")
