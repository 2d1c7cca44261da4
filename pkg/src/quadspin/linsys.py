"""Linear systems of quadrics: discriminants, corank strata, the double
cover's singular candidates, base-locus points and fiberwise exactness of
the graded Clifford complex."""

from __future__ import annotations

import hashlib
import itertools
import json
import random
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components
from sympy.ntheory.residue_ntheory import sqrt_mod

from .clifford import GradedCliffordAlgebra, sign_before
from .exactalg import DEFAULTS, Field, Matrix, MultiPoly, assemble, batch_rank_fp, det_of_linear_matrix, matmul, poly_is_squarefree
from .quadforms import NotSplit, NotSupported, QuadraticSpace, max_isotropic_basis, parse_system, sym_rank, system_to_json

SCAN_LIMIT = 200_000  # projective points a scan may enumerate


class GeneralPositionError(ValueError):
    """The system violates a general-position requirement."""


@dataclass(frozen=True, eq=False)
class LinearSystem:
    forms: tuple[QuadraticSpace, ...]

    def __post_init__(self):
        forms = tuple(self.forms)
        object.__setattr__(self, "forms", forms)
        if not 1 <= len(forms) <= 4:
            raise ValueError("a system has 1 to 4 forms")
        f, d = forms[0].field, forms[0].dim
        if any(Q.field != f or Q.dim != d for Q in forms):
            raise ValueError("forms must share V and field")
        if sym_rank([Q.gram for Q in forms]) != len(forms):
            raise GeneralPositionError("forms are linearly dependent")

    @classmethod
    def from_json(cls, obj) -> "LinearSystem":
        _, _, _, forms = parse_system(obj)
        return cls(tuple(forms))

    def to_json(self, meta: dict | None = None) -> dict:
        return system_to_json(self.forms, meta)

    def digest(self) -> str:
        body = json.dumps(self.to_json(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(body.encode()).hexdigest()

    @property
    def field(self) -> Field:
        return self.forms[0].field

    @property
    def n(self) -> int:
        return self.forms[0].n

    @property
    def m(self) -> int:
        return len(self.forms)

    @property
    def dim(self) -> int:
        return self.forms[0].dim

    @property
    def grams(self) -> list[Matrix]:
        return [Q.gram for Q in self.forms]

    def member(self, lam: Sequence) -> QuadraticSpace:
        return QuadraticSpace(assemble(self.grams, lam))

    def reduce(self, p: int) -> "LinearSystem":
        """Coerce the entries into F_p (Q entries by their reduction, F_q
        entries as the integers 0..q-1)."""
        F = Field.fp(p)
        if self.field == F:
            return self
        forms = []
        for Q in self.forms:
            vals = [[F(x if not self.field.is_prime else int(x)) for x in row] for row in Q.gram.a]
            forms.append(QuadraticSpace(Matrix.from_rows(F, vals)))
        return LinearSystem(tuple(forms))


def discriminant(L: LinearSystem, verify_points: int = DEFAULTS.verify_points, seed: int = 0) -> MultiPoly:
    """``det(sum_t lam_t B_t)`` as a form of degree 2n in m variables."""
    return det_of_linear_matrix(L.grams, verify_points=verify_points, seed=seed)


def corank_at(L: LinearSystem, lam: Sequence) -> int:
    f = L.field
    lam = [f(x) for x in lam]
    if all(x == 0 for x in lam):
        raise ValueError("lambda must be nonzero")
    return L.dim - assemble(L.grams, lam).rank()


def projective_points(p: int, m: int) -> np.ndarray:
    """Normalized representatives of P^{m-1}(F_p): first nonzero entry 1,
    lexicographic, starting at (1, 0, ..., 0)."""
    out = []
    for lead in range(m):
        tail = m - lead - 1
        grid = np.array(list(itertools.product(range(p), repeat=tail)), dtype=np.int64).reshape(p**tail, tail)
        block = np.zeros((grid.shape[0], m), dtype=np.int64)
        block[:, lead] = 1
        block[:, lead + 1 :] = grid
        out.append(block)
    return np.concatenate(out, axis=0)


def normalize_projective(v: Sequence, p: int) -> tuple[int, ...]:
    v = [int(x) % p for x in v]
    lead = next(x for x in v if x)
    inv = pow(lead, -1, p)
    return tuple(x * inv % p for x in v)


@dataclass(frozen=True)
class StrataReport:
    p: int
    m: int
    counts: dict[int, int]
    witnesses: dict[int, list[tuple[int, ...]]]

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    def expected_total(self) -> int:
        return (self.p**self.m - 1) // (self.p - 1)

    def max_corank(self) -> int:
        return max(c for c, k in self.counts.items() if k)

    def to_csv(self) -> str:
        lines = ["corank,count"] + [f"{c},{self.counts[c]}" for c in sorted(self.counts)]
        return "\n".join(lines) + "\n"


def _scan_system(L: LinearSystem, p: int | None) -> LinearSystem:
    if p is None:
        p = L.field.p if L.field.is_prime else DEFAULTS.scan_prime
    if p < 3:
        raise ValueError("scan prime must be at least 3")
    return L.reduce(p)


def coranks_over(L: LinearSystem, pts: np.ndarray, chunk: int = 20000) -> np.ndarray:
    """Coranks at many points of P^{m-1}(F_p) (L over F_p)."""
    p = L.field.p
    G = np.stack([B.a for B in L.grams])  # (m, d, d)
    out = []
    for i in range(0, len(pts), chunk):
        lam = pts[i : i + chunk]
        mats = np.zeros((len(lam), L.dim, L.dim), dtype=np.int64)
        for t in range(L.m):
            mats = (mats + lam[:, t, None, None] * G[t][None]) % p
        out.append(L.dim - batch_rank_fp(mats, p))
    return np.concatenate(out) if out else np.zeros(0, dtype=np.int64)


def strata_scan(L: LinearSystem, p_small: int | None = None, max_witnesses: int = 10) -> StrataReport:
    """Corank at every point of P^{m-1}(F_p)."""
    Lp = _scan_system(L, p_small)
    p = Lp.field.p
    if (p**Lp.m - 1) // (p - 1) > SCAN_LIMIT:
        raise NotSupported(f"P^{Lp.m - 1}(F_{p}) is too large to enumerate")
    pts = projective_points(p, Lp.m)
    cor = coranks_over(Lp, pts)
    counts = {c: int(np.sum(cor == c)) for c in range(int(cor.max()) + 1)}
    wit = {}
    for c in counts:
        if c >= 1 and counts[c]:
            idx = np.nonzero(cor == c)[0][:max_witnesses]
            wit[c] = [tuple(int(x) for x in pts[i]) for i in idx]
    return StrataReport(p, Lp.m, counts, wit)


def singular_points(L: LinearSystem, p_small: int | None = None, min_corank: int = 2) -> list[tuple[int, ...]]:
    """All scan points of corank at least ``min_corank``."""
    Lp = _scan_system(L, p_small)
    p = Lp.field.p
    pts = projective_points(p, Lp.m)
    cor = coranks_over(Lp, pts)
    return [tuple(int(x) for x in pts[i]) for i in np.nonzero(cor >= min_corank)[0]]


@dataclass(frozen=True)
class DoubleCoverReport:
    discriminant: MultiPoly
    branch_smooth: bool
    singular_candidates: list[tuple[int, ...]]
    scan_prime: int
    methods_agree: bool
    gradient_candidates: list[tuple[int, ...]]

    def to_json(self) -> dict:
        return {
            "discriminant": self.discriminant.to_json(),
            "degree": self.discriminant.degree,
            "branch_smooth": self.branch_smooth,
            "scan_prime": self.scan_prime,
            "singular_candidates": [list(x) for x in self.singular_candidates],
            "gradient_candidates": [list(x) for x in self.gradient_candidates],
            "methods_agree": self.methods_agree,
        }


def eval_many(poly: MultiPoly, pts: np.ndarray) -> np.ndarray:
    """Values of a polynomial over F_p at the rows of ``pts``."""
    p = poly.field.p
    out = np.zeros(len(pts), dtype=np.int64)
    for exps, c in poly.terms.items():
        term = np.full(len(pts), int(c) % p, dtype=np.int64)
        for i, e in enumerate(exps):
            for _ in range(e):
                term = term * pts[:, i] % p
        out = (out + term) % p
    return out


def default_scan_prime(L: LinearSystem) -> int:
    f = L.field
    if f.is_prime and (f.p**L.m - 1) // (f.p - 1) <= SCAN_LIMIT:
        return f.p
    return DEFAULTS.scan_prime


def double_cover_report(L: LinearSystem, p_scan: int | None = None) -> DoubleCoverReport:
    """Discriminant, branch smoothness and the singular points of the double
    cover, found two ways over the scan field: corank >= 2 (all
    (2n-1)-minors vanish) and vanishing of the discriminant with its
    gradient.  A pencil's branch locus is smooth iff its discriminant is
    squarefree."""
    disc = discriminant(L)
    p = default_scan_prime(L) if p_scan is None else p_scan
    Lp = L.reduce(p)
    by_minors = singular_points(Lp, p)
    dp = disc if Lp is L else discriminant(Lp)
    grads = [dp.derivative(i) for i in range(L.m)]
    pts = projective_points(p, L.m)
    hit = eval_many(dp, pts) == 0
    for g in grads:
        hit &= eval_many(g, pts) == 0
    by_grad = [tuple(int(x) for x in pts[i]) for i in np.nonzero(hit)[0]]
    for lam in by_minors:
        if corank_at(Lp, lam) < 2:
            raise ArithmeticError("singular candidate failed re-verification")
    if L.m == 2:
        smooth = poly_is_squarefree(disc)
    else:
        smooth = not by_minors and not by_grad
    return DoubleCoverReport(disc, smooth, by_minors, p, set(by_minors) == set(by_grad), by_grad)


# ---------------------------------------------------------------------------
# Base locus


@dataclass(frozen=True)
class BaseLocusPoint:
    v: tuple[int, ...]
    smooth: bool
    off_radicals: bool


def jacobian(L: LinearSystem, v: Sequence) -> Matrix:
    """Rows ``B_t v`` (the differential of the system at v, up to 2)."""
    f = L.field
    va = f.array(list(v))[:, None]
    return Matrix(f, np.stack([matmul(f, B.a, va)[:, 0] for B in L.grams]))


def on_base_locus(L: LinearSystem, v: Sequence) -> bool:
    f = L.field
    va = f.array(list(v))
    return all(Q.q(va) == 0 for Q in L.forms)


def _classify(L: LinearSystem, v: np.ndarray) -> BaseLocusPoint:
    J = jacobian(L, v)
    r = J.rank()
    # left kernel of J is {lam : v in rad(sum lam_t B_t)}
    off = J.T.kernel().cols == 0
    return BaseLocusPoint(tuple(int(x) for x in v), r == L.m, off)


def _solve_binary_quadratic(p: int, a0: int, a1: int, a2: int) -> list[tuple[int, int]]:
    """Projective roots (s0, s1) of a0 s0^2 + a1 s0 s1 + a2 s1^2 over F_p."""
    a0, a1, a2 = a0 % p, a1 % p, a2 % p
    if a0 == a1 == a2 == 0:
        return [(1, 0), (0, 1)]
    roots = []
    if a2 == 0:
        roots.append((0, 1))  # s0 = 0 kills a0 s0^2 + a1 s0 s1
        if a1 != 0:
            roots.append((1, (-a0 * pow(a1, -1, p)) % p))
        return roots
    disc = (a1 * a1 - 4 * a0 * a2) % p
    r = sqrt_mod(disc, p) if disc else 0
    if r is None:
        return []
    inv = pow(2 * a2, -1, p)
    for s in {int(r), (-int(r)) % p}:
        roots.append((1, (-a1 + s) * inv % p))
    return roots


def _restricted(grams: list[np.ndarray], U: np.ndarray, p: int) -> list[np.ndarray]:
    return [U @ G % p @ U.T % p for G in grams]


def _independent_forms(forms: list[np.ndarray], p: int) -> list[np.ndarray]:
    out, rows = [], []
    for G in forms:
        trial = rows + [G[np.triu_indices(G.shape[0])]]
        if batch_rank_fp(np.array([trial]), p)[0] == len(trial):
            rows = trial
            out.append(G)
    return out


def _random_full_rank(rng: random.Random, r: int, c: int, p: int) -> np.ndarray:
    while True:
        M = np.array([[rng.randrange(p) for _ in range(c)] for _ in range(r)], dtype=np.int64)
        if batch_rank_fp(M[None], p)[0] == r:
            return M


def _ruling_points(L: LinearSystem, rng: random.Random) -> list[np.ndarray]:
    """One randomized attempt: cut down to a 4-space where one member is a
    split quadric surface, parametrize its rulings, and solve for the rest."""
    F = L.field
    p = F.p
    U = np.eye(L.dim, dtype=np.int64)
    forms = [B.a % p for B in L.grams]
    cur = _independent_forms(_restricted(forms, U, p), p)
    while len(cur) > 3:
        lam = [rng.randrange(p) for _ in cur]
        comb = sum(l * G for l, G in zip(lam, cur)) % p
        Qc = QuadraticSpace(Matrix(F, comb))
        if Qc.corank():
            return []
        try:
            W = max_isotropic_basis(Qc)
        except NotSplit:
            return []
        U = W.basis.a @ U % p
        cur = _independent_forms(_restricted(forms, U, p), p)
    if U.shape[0] < 4:
        raise NotSupported("base locus search needs a 4-space after cutting down")
    if U.shape[0] > 4:
        U = _random_full_rank(rng, 4, U.shape[0], p) @ U % p
    cur = _independent_forms(_restricted(forms, U, p), p)
    if len(cur) > 3:
        return []
    # a split, nondegenerate member on U
    lam = [rng.randrange(p) for _ in cur]
    comb = sum(l * G for l, G in zip(lam, cur)) % p
    Qb = QuadraticSpace(Matrix(F, comb))
    if Qb.corank():
        return []
    fr = Qb.hyperbolic_frame()
    if fr.witt_index != 2:
        return []
    e1, e2 = fr.e.a
    f1, f2 = fr.f.a
    # x(s, t) = s0 (t0 e1 - t1 f2) + s1 (t1 f1 + t0 e2)
    others = _independent_forms([comb] + cur, p)[1:]

    def coeffs(G, t0, t1):
        a = (t0 * e1 - t1 * f2) % p
        b = (t1 * f1 + t0 * e2) % p
        return int(a @ G % p @ a % p), int(2 * (a @ G % p @ b) % p), int(b @ G % p @ b % p)

    pts = []
    if len(others) == 0:
        t = (1, rng.randrange(p))
        pts.append(((1, rng.randrange(p)), t))
    elif len(others) == 1:
        t = (1, rng.randrange(p))
        for s in _solve_binary_quadratic(p, *coeffs(others[0], *t)):
            pts.append((s, t))
    else:
        G1, G2 = others[0], others[1]
        x = np.arange(p, dtype=np.int64)
        x2 = x * x % p

        def coeff_arrays(G):
            # along t = (1, x): a = e1 - x f2, b = e2 + x f1
            bl = lambda u, w: int(u @ G % p @ w % p)
            qa = (bl(e1, e1) - 2 * bl(e1, f2) * x + bl(f2, f2) * x2) % p
            ab = 2 * (bl(e1, e2) + (bl(e1, f1) - bl(f2, e2)) * x - bl(f2, f1) * x2) % p
            qb = (bl(e2, e2) + 2 * bl(e2, f1) * x + bl(f1, f1) * x2) % p
            return qa, ab, qb

        a0, a1, a2 = coeff_arrays(G1)
        b0, b1, b2 = coeff_arrays(G2)
        d02 = (a0 * b2 - a2 * b0) % p
        d01 = (a0 * b1 - a1 * b0) % p
        d12 = (a1 * b2 - a2 * b1) % p
        res = (d02 * d02 - d01 * d12) % p
        ts = [(1, int(xx)) for xx in np.nonzero(res == 0)[0]]
        ca, cb = coeffs(G1, 0, 1), coeffs(G2, 0, 1)
        d = lambda u, w: (u[0] * w[2] - u[2] * w[0]) ** 2 - (u[0] * w[1] - u[1] * w[0]) * (u[1] * w[2] - u[2] * w[1])
        if d(ca, cb) % p == 0:
            ts.append((0, 1))
        for t in ts:
            A, B = coeffs(G1, *t), coeffs(G2, *t)
            for s in _solve_binary_quadratic(p, *A) if any(A) else _solve_binary_quadratic(p, *B):
                if (B[0] * s[0] * s[0] + B[1] * s[0] * s[1] + B[2] * s[1] * s[1]) % p == 0:
                    pts.append((s, t))
    out = []
    for (s0, s1), (t0, t1) in pts:
        xs = (s0 * t0 * e1 + s1 * t1 * f1 + s1 * t0 * e2 - s0 * t1 * f2) % p
        v = xs @ U % p
        if np.any(v) and on_base_locus(L, v):
            out.append(v)
    return out


def base_locus_sample(L: LinearSystem, count: int, seed: int = 0, max_tries: int | None = None) -> list[BaseLocusPoint]:
    """Up to ``count`` distinct projective points of X(F_p) with smoothness
    flags.  Small projective spaces are enumerated; otherwise points come
    from rulings of split quadric surfaces cut out of the system."""
    F = L.field
    if not F.is_prime:
        raise NotSupported("base locus sampling works over F_p")
    p = F.p
    rng = random.Random(seed)
    seen: dict[tuple, np.ndarray] = {}
    total = (p**L.dim - 1) // (p - 1)
    if total <= SCAN_LIMIT:
        pts = projective_points(p, L.dim)
        ok = np.ones(len(pts), dtype=bool)
        for B in L.grams:
            ok &= np.einsum("ki,ij,kj->k", pts, B.a, pts) % p == 0 if p < 3000 else _quad_vals(pts, B.a, p) == 0
        idx = list(np.nonzero(ok)[0])
        rng.shuffle(idx)
        for i in idx[:count]:
            seen[tuple(int(x) for x in pts[i])] = pts[i]
    else:
        tries = max_tries if max_tries is not None else 60 * count
        for _ in range(tries):
            if len(seen) >= count:
                break
            for v in _ruling_points(L, rng):
                key = normalize_projective(v, p)
                if key not in seen and len(seen) < count:
                    seen[key] = np.array(key, dtype=np.int64)
    return [_classify(L, v) for v in seen.values()]


def _quad_vals(pts: np.ndarray, B: np.ndarray, p: int) -> np.ndarray:
    y = pts @ B % p
    return np.sum(y * pts % p, axis=1) % p


# ---------------------------------------------------------------------------
# Exactness of the graded Clifford complex at points of X


@dataclass
class ComplexReport:
    point: tuple
    smooth: bool
    dims: list[int]
    ranks: list[int]
    exact_at: dict[int, bool]
    injective_d0: bool
    d_squared_zero: bool
    first_failure: int | None = field(default=None)

    @property
    def passed(self) -> bool:
        return self.smooth and self.injective_d0 and self.d_squared_zero and self.first_failure is None


def _adapted_change(L: LinearSystem, v: np.ndarray) -> tuple[Matrix, Matrix, int]:
    """Basis change g of V (columns: v, duals to the independent functionals
    ``B_t v``, then a complement inside their common kernel) and an
    invertible change M of the h's making the functionals of the new system
    ``e_1^*, ..., e_r^*, 0, ...``.  Returns (g, M, r)."""
    f = L.field
    d = L.dim
    J = jacobian(L, v)  # m x d
    r = J.rank()
    # M: columns first pick r independent combinations, then the left kernel
    _, piv = J.T.rref()
    sel = [[f.one if t == s else f.zero for t in range(L.m)] for s in piv]
    left = J.T.kernel()  # columns: lam with lam^T J = 0
    M = Matrix.from_rows(f, sel + [list(left.a[:, j]) for j in range(left.cols)]).T
    ells = Matrix(f, J.a[piv, :].copy())  # r x d, independent
    # duals: vectors u with ells u = e_s
    duals = []
    for s in range(r):
        target = Matrix(f, f.array([[int(t == s)] for t in range(r)]))
        aug = ells.hstack(target)
        R, pv = aug.rref()
        u = f.zeros(d)
        for row, c in enumerate(pv):
            u[c] = R.a[row, d]
        duals.append(u)
    common = ells.kernel().T if r else Matrix.identity(f, d)
    rows = [f.array(list(v))] + duals
    for c in common.a:
        if Matrix.from_rows(f, rows + [c]).rank() > len(rows):
            rows.append(c)
    g = Matrix.from_rows(f, rows).T
    if g.rank() != d:
        raise ArithmeticError("adapted basis is degenerate")
    return g, M, r


def _sparse_left_gen(G: GradedCliffordAlgebra, i: int, k: int) -> tuple[np.ndarray, np.ndarray, np.ndarray, int, int]:
    """Triplets of left multiplication by ``e_i`` from degree k to k+1."""
    keys, _ = G.piece(k)
    _, idx1 = G.piece(k + 1)
    f = G.field
    nz = [(t, j, G.grams[t][i, j]) for t in range(G.m) for j in range(G.d) if G.grams[t][i, j] != 0]
    rr, cc, vv = [], [], []
    for col, (S, a) in enumerate(keys):
        if not S >> i & 1:
            rr.append(idx1[(S | 1 << i, a)])
            cc.append(col)
            vv.append(sign_before(S, i) % f.p)
        for t, j, c in nz:
            if S >> j & 1:
                rr.append(idx1[(S ^ 1 << j, G._bump(a, t))])
                cc.append(col)
                vv.append(int(c) * sign_before(S, j) % f.p)
    return np.array(rr, dtype=np.int64), np.array(cc, dtype=np.int64), np.array(vv, dtype=np.int64), len(idx1), len(keys)


def _sparse_rank(p: int, rows, cols, vals, nr: int, nc: int) -> int:
    """Rank via connected components of the bipartite support graph."""
    if nr == 0 or nc == 0 or len(vals) == 0:
        return 0
    # merge duplicate entries
    A = coo_matrix((vals, (rows, cols)), shape=(nr, nc)).tocsr()
    A.data %= p
    A.eliminate_zeros()
    A = A.tocoo()
    if A.nnz == 0:
        return 0
    graph = coo_matrix((np.ones(A.nnz), (A.row, A.col + nr)), shape=(nr + nc, nr + nc))
    ncomp, label = connected_components(graph, directed=False)
    row_lab, col_lab = label[:nr], label[nr:]
    total = 0
    by_comp: dict[int, list[int]] = {}
    for e in range(A.nnz):
        by_comp.setdefault(int(row_lab[A.row[e]]), []).append(e)
    groups: dict[tuple[int, int], list[np.ndarray]] = {}
    for comp, edges in by_comp.items():
        rs = np.nonzero(row_lab == comp)[0]
        cs = np.nonzero(col_lab == comp)[0]
        rmap = {r: i for i, r in enumerate(rs)}
        cmap = {c: i for i, c in enumerate(cs)}
        sub = np.zeros((len(rs), len(cs)), dtype=np.int64)
        for e in edges:
            sub[rmap[A.row[e]], cmap[A.col[e]]] = A.data[e]
        groups.setdefault(sub.shape, []).append(sub)
    for shape, subs in groups.items():
        total += int(batch_rank_fp(np.stack(subs), p).sum())
    return total


def clifford_complex_exact_at(L: LinearSystem, v: Sequence, k_max: int | None = None, seed: int = 0, d2_samples: int = 5) -> ComplexReport:
    """Exactness of ``Gamma_0 -v-> Gamma_1 -v-> Gamma_2 -> ...`` at a point
    v of the base locus, as the rank identity
    ``rank d_k + rank d_{k-1} = dim Gamma_k``.

    Ranks are computed after an adapted change of basis of V and of the h's
    (the graded algebra is functorial in both), in which left
    multiplication by v touches only a few coordinates and splits into
    small blocks.  ``d^2 = 0`` is checked in the original coordinates.
    """
    f = L.field
    if not f.is_prime:
        raise NotSupported("complex exactness is checked over F_p")
    p = f.p
    va = f.array(list(v))
    if not np.any(va != 0):
        raise ValueError("v must be nonzero")
    if not on_base_locus(L, va):
        raise ValueError("v is not on the base locus")
    k_max = 2 * L.n + 4 if k_max is None else k_max
    info = _classify(L, va)
    g, M, r = _adapted_change(L, va)
    # forms of the transformed system: q'_s = sum_t M_ts g^T B_t g
    base = [g.T @ B @ g for B in L.grams]
    new = []
    for s in range(L.m):
        acc = Matrix.zeros(f, L.dim, L.dim)
        for t in range(L.m):
            acc = acc + base[t].scale(M.a[t, s])
        new.append(QuadraticSpace(acc))
    G = GradedCliffordAlgebra(new)
    for s in range(L.m):
        col = new[s].gram.a[:, 0]
        want = np.zeros(L.dim, dtype=np.int64)
        if s < r:
            want[1 + s] = 1
        if np.any(col % p != want):
            raise ArithmeticError("adapted basis does not normalize the functionals")
    ranks = []
    dims = [G.dim_piece(k) for k in range(k_max + 2)]
    for k in range(k_max + 1):
        ranks.append(_sparse_rank(p, *_sparse_left_gen(G, 0, k)))
    exact = {k: ranks[k] + ranks[k - 1] == dims[k] for k in range(1, k_max + 1)}
    inj = ranks[0] == dims[0]
    # d^2 = 0 on sampled monomials, in the original algebra
    G0 = GradedCliffordAlgebra(L.forms)
    rng = random.Random(seed)
    d2 = True
    for k in range(min(k_max, 4) + 1):
        keys, _ = G0.piece(k)
        for key in rng.sample(keys, min(d2_samples, len(keys))):
            once = G0.left_vec_terms(list(va), {key: f.one})
            if G0.left_vec_terms(list(va), once):
                d2 = False
    first = next((k for k in sorted(exact) if not exact[k]), None)
    if not inj and first is None:
        first = 0
    return ComplexReport(info.v, info.smooth and info.off_radicals, dims[: k_max + 1], ranks, exact, inj, d2, first)


def planted_singular_web(n: int, field: Field, seed: int) -> tuple[LinearSystem, np.ndarray]:
    """A web whose base locus is singular at a known point v: every form
    vanishes at v and the differentials ``B_t v`` span only a plane."""
    rng = random.Random(seed)
    f = field
    d = 2 * n
    while True:
        v = f.zeros(d)
        v[0] = f.one
        forms = []
        for t in range(4):
            B = f.zeros((d, d))
            for i in range(d):
                for j in range(i, d):
                    B[i, j] = B[j, i] = f.random(rng)
            B[0, 0] = f.zero
            forms.append(B)
        # force B_3 v into the span of B_1 v, B_2 v
        a, b = f.random(rng), f.random(rng)
        col = f.norm(forms[1][:, 0] * a + forms[2][:, 0] * b)
        forms[3][:, 0] = col
        forms[3][0, :] = col
        try:
            L = LinearSystem(tuple(QuadraticSpace(Matrix(f, B)) for B in forms))
        except GeneralPositionError:
            continue
        return L, v
