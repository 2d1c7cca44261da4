"""Clifford algebras as deformed exterior algebras, and their graded cousins.

Basis monomials ``e_S`` are exterior products ``e_{s1} ^ ... ^ e_{sk}`` with
``s1 < ... < sk``, indexed by the bitset ``S``.  Left multiplication by a
vector is ``v.x = v ^ x + v _| x`` where the contraction is the derivation
with ``e_i _| e_j = pairing(e_i, e_j)``.  This gives ``uv + vu =
2 pairing(u, v)`` and ``v.v = q(v)``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from math import comb
from typing import Sequence

import numpy as np

from .exactalg import Field, Matrix, matmul
from .quadforms import QuadraticSpace


def popcount(x: int) -> int:
    return bin(x).count("1")


def bits(S: int) -> list[int]:
    return [i for i in range(S.bit_length()) if S >> i & 1]


def sign_before(S: int, i: int) -> int:
    """(-1)^(number of elements of S below i)."""
    return -1 if popcount(S & ((1 << i) - 1)) % 2 else 1


@lru_cache(maxsize=None)
def _generator_tables(d: int):
    """Index arrays for wedge and contraction by each coordinate."""
    N = 1 << d
    S = np.arange(N)
    wedge, contr = [], []
    pc = np.array([popcount(s) for s in range(N)])
    for i in range(d):
        bit = 1 << i
        below = np.array([popcount(s & (bit - 1)) for s in range(N)])
        sgn = np.where(below % 2 == 1, -1, 1).astype(np.int64)
        has = (S & bit) != 0
        src_w = S[~has]
        wedge.append((src_w, src_w | bit, sgn[~has]))
        src_c = S[has]
        contr.append((src_c, src_c ^ bit, sgn[has]))
    return wedge, contr, pc


class CliffordAlgebra:
    """Cl(V, q) on the exterior basis of V; elements are dense vectors of
    length ``2^dim`` (or matrices of such columns)."""

    def __init__(self, space: QuadraticSpace):
        self.space = space
        self.field: Field = space.field
        self.d = space.dim
        self.N = 1 << self.d
        self._wedge, self._contr, self._pc = _generator_tables(self.d)
        self.gram = space.gram.a

    def __repr__(self):
        return f"CliffordAlgebra(dim={self.d}, field={self.field})"

    # construction ------------------------------------------------------

    def zero_coeffs(self, cols: int | None = None) -> np.ndarray:
        return self.field.zeros(self.N if cols is None else (self.N, cols))

    def element(self, coeffs) -> "CliffordElement":
        return CliffordElement(self, self.field.array(coeffs) if not isinstance(coeffs, np.ndarray) else coeffs)

    def scalar(self, c) -> "CliffordElement":
        x = self.zero_coeffs()
        x[0] = self.field(c)
        return CliffordElement(self, x)

    def monomial(self, S: int, c=1) -> "CliffordElement":
        x = self.zero_coeffs()
        x[S] = self.field(c)
        return CliffordElement(self, x)

    def vector(self, v) -> "CliffordElement":
        x = self.zero_coeffs()
        for i, c in enumerate(v):
            x[1 << i] = self.field(c)
        return CliffordElement(self, x)

    def product_of_vectors(self, vectors: Sequence) -> "CliffordElement":
        """The Clifford product ``v_1 v_2 ... v_k``."""
        x = self.scalar(1).coeffs
        for v in reversed(list(vectors)):
            x = self.left_vec(v, x)
        return CliffordElement(self, x)

    # operators ---------------------------------------------------------

    def wedge_gen(self, i: int, X: np.ndarray) -> np.ndarray:
        src, dst, sgn = self._wedge[i]
        Y = np.zeros_like(X)
        Y[dst] = (X[src].T * sgn).T
        return self.field.norm(Y)

    def contract(self, ell: Sequence, X: np.ndarray) -> np.ndarray:
        """Contraction by the linear functional ``ell`` (a derivation)."""
        f = self.field
        Y = np.zeros_like(X)
        if not f.is_prime:
            Y[...] = f.zero
        for j, lj in enumerate(ell):
            if lj == 0:
                continue
            src, dst, sgn = self._contr[j]
            Y[dst] = f.norm(Y[dst] + f.norm((X[src].T * sgn).T * lj))
        return Y

    def left_vec(self, v: Sequence, X: np.ndarray) -> np.ndarray:
        """Left multiplication ``v . X`` (columns of X are elements)."""
        f = self.field
        v = f.array(list(v))
        ell = matmul(f, self.gram, v[:, None])[:, 0]
        Y = self.contract(ell, X)
        for i, vi in enumerate(v):
            if vi != 0:
                Y = f.norm(Y + f.norm(self.wedge_gen(i, X) * vi))
        return Y

    def left_gen(self, i: int, X: np.ndarray) -> np.ndarray:
        return f_add(self.field, self.wedge_gen(i, X), self.contract(self.gram[i], X))

    def reverse(self, X: np.ndarray) -> np.ndarray:
        """Reversion: ``e_S -> (-1)^(k(k-1)/2) e_S``."""
        k = self._pc
        sgn = np.where((k * (k - 1) // 2) % 2 == 1, -1, 1)
        return self.field.norm((X.T * sgn).T)

    def right_vec(self, w: Sequence, X: np.ndarray) -> np.ndarray:
        """Right multiplication ``X . w``, via reversion."""
        return self.reverse(self.left_vec(w, self.reverse(X)))

    def monomial_products(self, b: np.ndarray, subsets: Sequence[int]) -> dict[int, np.ndarray]:
        """``e_S . b`` for each requested S, memoized over subsets.

        Uses ``e_S = e_s1 . e_S' - e_s1 _| e_S'`` with ``s1 = min S``.
        """
        f = self.field
        memo: dict[int, np.ndarray] = {0: b}

        def prod(S: int) -> np.ndarray:
            if S in memo:
                return memo[S]
            s1 = (S & -S).bit_length() - 1
            rest = S ^ (1 << s1)
            out = self.left_gen(s1, prod(rest))
            for j in bits(rest):
                c = self.gram[s1, j]
                if c != 0:
                    out = f.norm(out - f.norm(prod(rest ^ (1 << j)) * (c * sign_before(rest, j))))
            memo[S] = out
            return out

        return {S: prod(S) for S in subsets}

    def mul(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        f = self.field
        support = [int(S) for S in np.nonzero(a != 0)[0]]
        prods = self.monomial_products(b, support)
        out = self.zero_coeffs() if b.ndim == 1 else self.zero_coeffs(b.shape[1])
        for S in support:
            out = f.norm(out + f.norm(prods[S] * a[S]))
        return out

    def parity_mask(self, parity: int) -> np.ndarray:
        return self._pc % 2 == parity


def f_add(field: Field, X, Y):
    return field.norm(X + Y)


@dataclass(frozen=True, eq=False)
class CliffordElement:
    algebra: CliffordAlgebra
    coeffs: np.ndarray

    def _same(self, other: "CliffordElement"):
        if not isinstance(other, CliffordElement):
            return NotImplemented
        if other.algebra is not self.algebra:
            raise ValueError("elements of different Clifford algebras")

    def __add__(self, other: "CliffordElement") -> "CliffordElement":
        self._same(other)
        return CliffordElement(self.algebra, self.algebra.field.norm(self.coeffs + other.coeffs))

    def __sub__(self, other: "CliffordElement") -> "CliffordElement":
        self._same(other)
        return CliffordElement(self.algebra, self.algebra.field.norm(self.coeffs - other.coeffs))

    def __neg__(self) -> "CliffordElement":
        return CliffordElement(self.algebra, self.algebra.field.norm(-self.coeffs))

    def scale(self, c) -> "CliffordElement":
        f = self.algebra.field
        return CliffordElement(self.algebra, f.norm(self.coeffs * f(c)))

    def __mul__(self, other: "CliffordElement") -> "CliffordElement":
        return clifford_mul(self, other)

    def __eq__(self, other):
        if not isinstance(other, CliffordElement) or other.algebra is not self.algebra:
            return False
        return bool(np.all(self.coeffs == other.coeffs))

    def __hash__(self):
        return id(self)

    def is_zero(self) -> bool:
        return not np.any(self.coeffs != 0)

    def terms(self) -> dict[int, object]:
        """Sparse view: bitset -> nonzero coefficient."""
        return {int(S): self.algebra.field(self.coeffs[S]) for S in np.nonzero(self.coeffs != 0)[0]}

    def parity(self) -> int | None:
        """0 or 1 when parity-homogeneous, None otherwise (and for zero)."""
        nz = np.nonzero(self.coeffs != 0)[0]
        if len(nz) == 0:
            return None
        ps = set(self.algebra._pc[nz] % 2)
        return int(ps.pop()) if len(ps) == 1 else None

    def __repr__(self):
        t = self.terms()
        if not t:
            return "0"
        f = self.algebra.field
        return " + ".join(f"{f.to_str(c)}*e{bits(S)}" for S, c in t.items())


def clifford_mul(a: CliffordElement, b: CliffordElement) -> CliffordElement:
    if a.algebra is not b.algebra:
        raise ValueError("elements of different Clifford algebras")
    return CliffordElement(a.algebra, a.algebra.mul(a.coeffs, b.coeffs))


# ---------------------------------------------------------------------------
# Graded algebras: T(V)[h_1..h_m] / <v^2 = sum_t q_t(v) h_t>

Key = tuple  # (S: int, alpha: tuple[int, ...])


def _alphas(m: int, total: int):
    """Exponent vectors of length m summing to ``total``, lexicographic."""
    if m == 1:
        yield (total,)
        return
    for a in range(total, -1, -1):
        for rest in _alphas(m - 1, total - a):
            yield (a,) + rest


def graded_piece_basis(dim: int, m: int, k: int) -> list[Key]:
    """Monomials ``(S, alpha)`` with ``|S| + 2|alpha| = k``."""
    if k < 0:
        return []
    out = []
    for j in range(k // 2 + 1):
        r = k - 2 * j
        if r > dim:
            continue
        subsets = sorted((sum(1 << i for i in c) for c in itertools.combinations(range(dim), r)))
        for a in _alphas(m, j):
            out.extend((S, a) for S in subsets)
    return out


def graded_piece_count(dim: int, m: int, k: int) -> int:
    """Closed form: sum_j C(dim, k - 2j) C(m - 1 + j, j)."""
    return sum(comb(dim, k - 2 * j) * comb(m - 1 + j, j) for j in range(k // 2 + 1) if k - 2 * j <= dim)


class GradedCliffordAlgebra:
    """The generalized graded Clifford algebra of m forms on a shared V.
    With m = 1 this is the graded algebra of a single quadric."""

    def __init__(self, forms: Sequence[QuadraticSpace]):
        forms = list(forms)
        if not forms:
            raise ValueError("need at least one form")
        self.forms = forms
        self.field: Field = forms[0].field
        self.d = forms[0].dim
        self.m = len(forms)
        if any(Q.dim != self.d or Q.field != self.field for Q in forms):
            raise ValueError("forms must share V and field")
        self.grams = [Q.gram.a for Q in forms]
        self._pieces: dict[int, tuple[list[Key], dict[Key, int]]] = {}

    def piece(self, k: int) -> tuple[list[Key], dict[Key, int]]:
        if k not in self._pieces:
            keys = graded_piece_basis(self.d, self.m, k)
            self._pieces[k] = (keys, {key: i for i, key in enumerate(keys)})
        return self._pieces[k]

    def dim_piece(self, k: int) -> int:
        return len(self.piece(k)[0])

    def _bump(self, a: tuple, t: int) -> tuple:
        return a[:t] + (a[t] + 1,) + a[t + 1 :]

    # sparse operators on dict elements ----------------------------------

    def _add(self, out: dict, key: Key, c):
        f = self.field
        v = f.norm(out.get(key, f.zero) + c)
        if v == 0:
            out.pop(key, None)
        else:
            out[key] = v

    def left_vec_terms(self, v: Sequence, terms: dict) -> dict:
        """``v . x`` on a sparse element."""
        f = self.field
        v = [f(c) for c in v]
        va = f.array(v)[:, None]
        ells = [list(matmul(f, g, va)[:, 0]) for g in self.grams]
        out: dict = {}
        for (S, a), c in terms.items():
            for i, vi in enumerate(v):
                if vi != 0 and not S >> i & 1:
                    self._add(out, (S | 1 << i, a), f.norm(c * vi * sign_before(S, i)))
            for j in bits(S):
                for t, ell in enumerate(ells):
                    if ell[j] != 0:
                        self._add(out, (S ^ 1 << j, self._bump(a, t)), f.norm(c * ell[j] * sign_before(S, j)))
        return out

    def left_gen_terms(self, i: int, terms: dict) -> dict:
        e = [0] * self.d
        e[i] = 1
        return self.left_vec_terms(e, terms)

    def h_times(self, alpha: tuple, terms: dict) -> dict:
        return {(S, tuple(x + y for x, y in zip(a, alpha))): c for (S, a), c in terms.items()}

    def mul_terms(self, a: dict, b: dict) -> dict:
        f = self.field
        memo: dict[int, dict] = {0: dict(b)}

        def prod(S: int) -> dict:
            if S in memo:
                return memo[S]
            s1 = (S & -S).bit_length() - 1
            rest = S ^ (1 << s1)
            out = self.left_gen_terms(s1, prod(rest))
            for j in bits(rest):
                sub = prod(rest ^ (1 << j))
                for t, g in enumerate(self.grams):
                    c = g[s1, j]
                    if c == 0:
                        continue
                    e_t = tuple(int(s == t) for s in range(self.m))
                    for key, val in self.h_times(e_t, sub).items():
                        self._add(out, key, f.norm(f.neg(val) * c * sign_before(rest, j)))
            memo[S] = out
            return out

        out: dict = {}
        for (S, alpha), c in a.items():
            for key, val in self.h_times(alpha, prod(S)).items():
                self._add(out, key, f.norm(val * c))
        return out

    # dense degree-piece matrices ---------------------------------------

    def to_dense(self, terms: dict, k: int) -> np.ndarray:
        keys, idx = self.piece(k)
        x = self.field.zeros(len(keys))
        for key, c in terms.items():
            x[idx[key]] = c
        return x

    def left_vec_matrix(self, v: Sequence, k: int) -> Matrix:
        """Matrix of ``x -> v . x`` from degree k to degree k+1."""
        keys, _ = self.piece(k)
        _, idx1 = self.piece(k + 1)
        f = self.field
        a = f.zeros((len(idx1), len(keys)))
        for col, key in enumerate(keys):
            for key2, c in self.left_vec_terms(v, {key: f.one}).items():
                a[idx1[key2], col] = c
        return Matrix(f, a)

    def h_matrix(self, t: int, k: int) -> Matrix:
        """Multiplication by ``h_t`` from degree k to degree k+2."""
        keys, _ = self.piece(k)
        _, idx2 = self.piece(k + 2)
        f = self.field
        a = f.zeros((len(idx2), len(keys)))
        for col, (S, al) in enumerate(keys):
            a[idx2[(S, self._bump(al, t))], col] = f.one
        return Matrix(f, a)

    def specialize(self, terms: dict, lam: Sequence, algebra: CliffordAlgebra) -> "CliffordElement":
        """Set ``h_t = lam_t``; lands in Cl(sum_t lam_t q_t)."""
        f = self.field
        lam = [f(x) for x in lam]
        x = algebra.zero_coeffs()
        for (S, a), c in terms.items():
            w = c
            for lt, e in zip(lam, a):
                w = f.norm(w * (lt**e if not f.is_prime else pow(int(lt), e, f.p)))
            x[S] = f.norm(x[S] + w)
        return CliffordElement(algebra, x)

    def element(self, terms: dict) -> "GradedCliffordElement":
        f = self.field
        clean = {k: f(v) for k, v in terms.items() if f(v) != 0}
        return GradedCliffordElement(self, clean)

    def vector(self, v: Sequence) -> "GradedCliffordElement":
        return self.element({(1 << i, (0,) * self.m): c for i, c in enumerate(v)})

    def h(self, t: int) -> "GradedCliffordElement":
        return self.element({(0, tuple(int(s == t) for s in range(self.m))): 1})


@dataclass(frozen=True, eq=False)
class GradedCliffordElement:
    algebra: GradedCliffordAlgebra
    terms: dict

    def degrees(self) -> set[int]:
        return {popcount(S) + 2 * sum(a) for (S, a) in self.terms}

    def degree(self) -> int | None:
        ds = self.degrees()
        return ds.pop() if len(ds) == 1 else None

    def is_homogeneous(self) -> bool:
        return len(self.degrees()) <= 1

    def __mul__(self, other: "GradedCliffordElement") -> "GradedCliffordElement":
        return graded_mul(self, other)

    def __add__(self, other: "GradedCliffordElement") -> "GradedCliffordElement":
        if other.algebra is not self.algebra:
            raise ValueError("elements of different graded algebras")
        out = dict(self.terms)
        for k, c in other.terms.items():
            self.algebra._add(out, k, c)
        return GradedCliffordElement(self.algebra, out)

    def __eq__(self, other):
        return isinstance(other, GradedCliffordElement) and other.algebra is self.algebra and self.terms == other.terms

    def __hash__(self):
        return id(self)

    def is_zero(self) -> bool:
        return not self.terms


def graded_mul(a: GradedCliffordElement, b: GradedCliffordElement) -> GradedCliffordElement:
    if a.algebra is not b.algebra:
        raise ValueError("elements of different graded algebras")
    return GradedCliffordElement(a.algebra, a.algebra.mul_terms(a.terms, b.terms))


@dataclass(frozen=True)
class RankTable:
    dim: int
    m: int
    ranks: list[int]

    @property
    def stable_value(self) -> int:
        return 1 << (self.dim - 1)

    def stable_from(self) -> int | None:
        """First k from which every listed rank equals ``2^(dim-1)``."""
        k = len(self.ranks)
        while k > 0 and self.ranks[k - 1] == self.stable_value:
            k -= 1
        return k if k < len(self.ranks) else None


def rank_stabilization_table(forms: Sequence[QuadraticSpace] | GradedCliffordAlgebra, k_max: int) -> RankTable:
    """Ranks of the graded pieces for k = 0..k_max, by enumerating
    monomials.  For a single form this asserts the stabilization at
    ``2^(dim-1)`` from ``k = dim - 1`` on."""
    A = forms if isinstance(forms, GradedCliffordAlgebra) else GradedCliffordAlgebra(forms)
    ranks = [A.dim_piece(k) for k in range(k_max + 1)]
    table = RankTable(A.d, A.m, ranks)
    if A.m == 1:
        for k in range(A.d - 1, k_max + 1):
            if ranks[k] != table.stable_value or (k + 2 <= k_max and ranks[k + 2] != ranks[k]):
                raise ArithmeticError(f"rank at degree {k} is {ranks[k]}, not {table.stable_value}")
    return table
