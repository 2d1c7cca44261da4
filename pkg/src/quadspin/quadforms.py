"""Quadratic spaces, radicals, isotropic subspaces and hyperbolic splitting.

Convention: a form is given by a symmetric Gram matrix ``B`` with
``pairing(u, v) = u^T B v`` and ``q(v) = pairing(v, v)``.  Subspaces are
stored as matrices whose *rows* are vectors in standard coordinates.
"""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np
from sympy.ntheory.residue_ntheory import sqrt_mod

from .exactalg import Field, FieldError, Matrix, matmul

SUPPORTED_N = (2, 3, 4)


class NotSplit(ValueError):
    """The form has no isotropic subspace of the requested dimension."""


class NotSupported(ValueError):
    """Operation refused for this input (e.g. rational point search over Q)."""


class SystemFormatError(ValueError):
    """Malformed system JSON."""


def _sqrt(field: Field, x):
    """A square root of ``x`` in the field, or None."""
    if field.is_prime:
        x = int(x) % field.p
        if x == 0:
            return 0
        r = sqrt_mod(x, field.p)
        return None if r is None else int(r)
    x = Fraction(x)
    if x < 0:
        return None
    a, b = math.isqrt(x.numerator), math.isqrt(x.denominator)
    if a * a == x.numerator and b * b == x.denominator:
        return Fraction(a, b)
    return None


@dataclass(frozen=True)
class HyperbolicFrame:
    """Basis adapted to the form: hyperbolic pairs ``(e_i, f_i)`` with
    ``pairing(e_i, f_i) = 1``, an orthogonal anisotropic block, then the
    radical.  ``exact`` is False when the anisotropic block was not proven
    anisotropic (only possible over Q)."""

    e: Matrix
    f: Matrix
    aniso: Matrix
    rad: Matrix
    exact: bool = True

    @property
    def witt_index(self) -> int:
        return self.e.rows

    def matrix(self) -> Matrix:
        return self.e.vstack(self.f).vstack(self.aniso).vstack(self.rad)


@dataclass(frozen=True, eq=False)
class QuadraticSpace:
    gram: Matrix
    _frame: HyperbolicFrame | None = field(default=None, repr=False)

    def __post_init__(self):
        g = self.gram
        if g.rows != g.cols:
            raise ValueError("Gram matrix must be square")
        if not g.is_symmetric():
            raise ValueError("Gram matrix must be symmetric")
        if g.rows % 2:
            raise ValueError("dimension must be even")
        if self._frame is not None:
            _check_frame(self, self._frame)

    @classmethod
    def from_rows(cls, field: Field, rows) -> "QuadraticSpace":
        return cls(Matrix.from_rows(field, rows))

    @property
    def field(self) -> Field:
        return self.gram.field

    @property
    def dim(self) -> int:
        return self.gram.rows

    @property
    def n(self) -> int:
        return self.dim // 2

    def __eq__(self, other):
        return isinstance(other, QuadraticSpace) and self.gram == other.gram

    def vector(self, coords) -> np.ndarray:
        return self.field.array(list(coords))

    def pairing(self, u, v):
        f = self.field
        u = np.asarray(u, dtype=f.dtype)
        v = np.asarray(v, dtype=f.dtype)
        return f(matmul(f, matmul(f, u[None, :], self.gram.a), v[:, None])[0, 0])

    def q(self, v):
        return self.pairing(v, v)

    def restrict(self, basis: Matrix) -> "QuadraticSpace":
        """The form on span(rows of ``basis``), in those coordinates."""
        return QuadraticSpace(basis @ self.gram @ basis.T)

    def corank(self) -> int:
        return corank(self)

    def radical_basis(self) -> Matrix:
        return radical_basis(self)

    def hyperbolic_frame(self) -> HyperbolicFrame:
        if self._frame is None:
            object.__setattr__(self, "_frame", hyperbolic_frame(self))
        return self._frame


def corank(Q: QuadraticSpace) -> int:
    return Q.dim - Q.gram.rank()


def radical_basis(Q: QuadraticSpace) -> Matrix:
    """Rows spanning ``ker B``; zero rows when Q is nondegenerate."""
    return Q.gram.kernel().T


def _check_frame(Q: QuadraticSpace, fr: HyperbolicFrame):
    k = fr.e.rows
    M = fr.matrix()
    if M.rows != Q.dim or M.rank() != Q.dim:
        raise ValueError("frame is not a basis")
    G = M @ Q.gram @ M.T
    f = Q.field
    for i in range(Q.dim):
        for j in range(Q.dim):
            want = f.zero
            if (i < k and j == i + k) or (k <= i < 2 * k and j == i - k):
                want = f.one
            if i == j and 2 * k <= i < 2 * k + fr.aniso.rows:
                if G.a[i, j] == 0:
                    raise ValueError("anisotropic frame vector is isotropic")
                continue
            if G.a[i, j] != want:
                raise ValueError("frame does not put the form in normal shape")


def _independent_rows(field: Field, vectors: list, dim: int) -> list:
    if not vectors:
        return []
    M = Matrix.from_rows(field, vectors, cols=dim)
    return [row for row in M.row_space().a]


def _find_isotropic(Q: QuadraticSpace, basis: list):
    """Deterministic search for a nonzero isotropic vector in span(basis)."""
    f = Q.field
    qs = [Q.q(b) for b in basis]
    for b, qb in zip(basis, qs):
        if qb == 0:
            return b
    r = len(basis)

    def solve_pair(u, qu, w, qw):
        # q(u + s w) = qu + 2 s B(u, w) + s^2 qw, with qw != 0
        buw = Q.pairing(u, w)
        root = _sqrt(f, f.norm(buw * buw - qu * qw))
        if root is None:
            return None
        s = f.norm((f.neg(buw) + root) * f.inv(qw))
        return f.norm(u + w * s)

    for i in range(r):
        for j in range(i + 1, r):
            v = solve_pair(basis[i], qs[i], basis[j], qs[j])
            if v is not None:
                return v
    if r < 3:
        return None
    ts = range(1, f.p) if f.is_prime else [t for k in range(1, 13) for t in (k, -k)]
    for i in range(r):
        for j in range(r):
            for k in range(r):
                if len({i, j, k}) < 3 or k < i:
                    continue
                for t in ts:
                    u = f.norm(basis[i] + basis[k] * f(t))
                    qu = Q.q(u)
                    if qu == 0:
                        return u
                    v = solve_pair(basis[j], qs[j], u, qu)
                    if v is not None:
                        return v
    return None


def _complement(field: Field, rad: Matrix, dim: int) -> list:
    """Standard basis vectors completing ``rad`` to a basis (greedy, in order)."""
    chosen = [row for row in rad.a]
    out = []
    rank = len(chosen)
    for j in range(dim):
        e = field.zeros(dim)
        e[j] = field.one
        trial = Matrix.from_rows(field, chosen + [e], cols=dim)
        if trial.rank() > rank:
            chosen.append(e)
            out.append(e)
            rank += 1
    return out


def hyperbolic_frame(Q: QuadraticSpace) -> HyperbolicFrame:
    """Split off hyperbolic planes one at a time, taking the lexicographically
    first isotropic vector the search finds.  Deterministic in Q."""
    f = Q.field
    d = Q.dim
    rad = radical_basis(Q)
    cur = _complement(f, rad, d)
    es, fs = [], []
    exact = True
    while cur:
        v = _find_isotropic(Q, cur)
        if v is None:
            if not f.is_prime and len(cur) >= 3:
                exact = False
            break
        w = next(u for u in cur if Q.pairing(v, u) != 0)
        w = f.norm(w * f.inv(Q.pairing(v, w)))
        w = f.norm(w - v * f.norm(Q.q(w) * f.inv(f(2))))
        es.append(v)
        fs.append(w)
        proj = [f.norm(u - f.norm(v * Q.pairing(u, w)) - f.norm(w * Q.pairing(u, v))) for u in cur]
        cur = _independent_rows(f, proj, d)
    aniso = []
    while cur:
        u = next(u for u in cur if Q.q(u) != 0)
        aniso.append(u)
        qu_inv = f.inv(Q.q(u))
        rest = [f.norm(x - u * f.norm(Q.pairing(x, u) * qu_inv)) for x in cur]
        cur = _independent_rows(f, rest, d)

    def mat(rows):
        return Matrix.from_rows(f, rows) if rows else Matrix.zeros(f, 0, d)

    return HyperbolicFrame(mat(es), mat(fs), mat(aniso), rad, exact)


def frame_coordinates(Q: QuadraticSpace, vectors: Matrix) -> Matrix:
    """Coordinates of row vectors in the frame basis ``[e, f, aniso, rad]``."""
    M = Q.hyperbolic_frame().matrix()
    return vectors @ M.inverse()


# ---------------------------------------------------------------------------
# Isotropic subspaces


@dataclass(frozen=True, eq=False)
class IsotropicSubspace:
    space: QuadraticSpace
    basis: Matrix

    def __post_init__(self):
        b = self.basis
        if b.cols != self.space.dim:
            raise ValueError("basis vectors have the wrong length")
        if b.rank() != b.rows:
            raise ValueError("basis rows are linearly dependent")
        if not (b @ self.space.gram @ b.T).is_zero():
            raise ValueError("subspace is not isotropic")

    @classmethod
    def from_rows(cls, space: QuadraticSpace, rows) -> "IsotropicSubspace":
        return cls(space, Matrix.from_rows(space.field, rows))

    @property
    def dim(self) -> int:
        return self.basis.rows

    def vectors(self) -> list:
        return [row for row in self.basis.a]

    def rebased(self, change: Matrix) -> "IsotropicSubspace":
        return IsotropicSubspace(self.space, change @ self.basis)

    def span_equals(self, other: "IsotropicSubspace") -> bool:
        return self.basis.row_space() == other.basis.row_space()


def intersection_dim(A: Matrix, B: Matrix) -> int:
    if A.rows == 0 or B.rows == 0:
        return 0
    return A.rank() + B.rank() - A.vstack(B).rank()


def max_isotropic_basis(Q: QuadraticSpace, family_hint: int = 0, dim: int | None = None) -> IsotropicSubspace:
    """An isotropic subspace of dimension ``dim`` (default n) containing the
    radical, read off the hyperbolic frame.

    Hint 0 gives ``span(e_1..e_j) + rad``; hint 1 swaps ``e_j`` for ``f_j``,
    which lands in the other family when there are two.
    """
    if family_hint not in (0, 1):
        raise ValueError("family_hint must be 0 or 1")
    dim = Q.n if dim is None else dim
    fr = Q.hyperbolic_frame()
    c = fr.rad.rows
    j = dim - c
    if j < 0:
        raise ValueError(f"dim {dim} is smaller than the radical ({c})")
    if j > fr.witt_index:
        if not fr.exact:
            raise NotSupported("no isotropic subspace found; general rational point search is not supported")
        raise NotSplit(f"form has Witt index {fr.witt_index}, cannot reach dimension {dim}")
    rows = [fr.e.a[i] for i in range(j)]
    if family_hint == 1 and j >= 1:
        rows[-1] = fr.f.a[j - 1]
    rows += [fr.rad.a[i] for i in range(c)]
    if not rows:
        return IsotropicSubspace(Q, Matrix.zeros(Q.field, 0, Q.dim))
    return IsotropicSubspace(Q, Matrix.from_rows(Q.field, rows))


def same_family(W: IsotropicSubspace, W2: IsotropicSubspace) -> bool:
    """Maximal isotropics of a nondegenerate space: same family iff
    ``dim(W ∩ W2) ≡ n (mod 2)``."""
    Q = W.space
    if W2.space is not Q and W2.space != Q:
        raise ValueError("subspaces of different spaces")
    if corank(Q) != 0:
        raise ValueError("same_family needs a nondegenerate form")
    if W.dim != Q.n or W2.dim != Q.n:
        raise ValueError("same_family needs maximal (dimension n) subspaces")
    return (intersection_dim(W.basis, W2.basis) - Q.n) % 2 == 0


@dataclass(frozen=True)
class SpinorInvariant:
    radical_meet_dim: int
    family_bit: int | None


def quotient_image(W: IsotropicSubspace) -> tuple[Matrix, HyperbolicFrame]:
    """Image of W in V/rad, in frame coordinates of the nondegenerate part
    (e-block, f-block, aniso-block)."""
    Q = W.space
    fr = Q.hyperbolic_frame()
    coords = frame_coordinates(Q, W.basis)
    nd = Q.dim - fr.rad.rows
    img = Matrix(Q.field, coords.a[:, :nd].copy())
    return img.row_space(), fr


def spinor_invariant(W: IsotropicSubspace, Q: QuadraticSpace | None = None) -> SpinorInvariant:
    Q = W.space if Q is None else Q
    c = corank(Q)
    if c > 2:
        raise ValueError(f"corank {c} > 2 is not classified")
    rad = radical_basis(Q)
    meet = intersection_dim(W.basis, rad)
    img, fr = quotient_image(W)
    k = fr.witt_index
    bit = None
    if fr.aniso.rows == 0 and img.rows == k:
        E = Matrix.from_rows(Q.field, [[1 if j == i else 0 for j in range(2 * k)] for i in range(k)], cols=2 * k)
        bit = (k - intersection_dim(img, E)) % 2 if k else 0
    return SpinorInvariant(meet, bit)


def quotient_same_family(W: IsotropicSubspace, W2: IsotropicSubspace) -> bool | None:
    """Family comparison of the images in V/rad (None when undefined)."""
    a = spinor_invariant(W)
    b = spinor_invariant(W2)
    if a.family_bit is None or b.family_bit is None:
        return None
    return a.family_bit == b.family_bit


# ---------------------------------------------------------------------------
# Random generation


def _check_n(n: int):
    if n not in SUPPORTED_N:
        raise ValueError(f"n must be one of {SUPPORTED_N}, got {n}")


def random_symmetric(field: Field, dim: int, rng: random.Random, bound: int = 5) -> Matrix:
    a = field.zeros((dim, dim))
    for i in range(dim):
        for j in range(i, dim):
            a[i, j] = a[j, i] = field.random(rng, bound)
    return Matrix(field, a)


def random_invertible(field: Field, dim: int, rng: random.Random, bound: int = 3) -> Matrix:
    while True:
        M = Matrix(field, field.array([[field.random(rng, bound) for _ in range(dim)] for _ in range(dim)]))
        if M.rank() == dim:
            return M


def random_quadratic_space(n: int, field: Field, seed: int, corank: int = 0) -> QuadraticSpace:
    """Uniformly random symmetric Gram matrix (corank 0), or
    ``P^T diag(d, 0^c) P`` for a prescribed corank."""
    _check_n(n)
    rng = random.Random(seed)
    d = 2 * n
    if corank == 0:
        while True:
            g = random_symmetric(field, d, rng)
            if g.rank() == d:
                return QuadraticSpace(g)
    P = random_invertible(field, d, rng)
    D = Matrix.diag(field, [field.random_nonzero(rng) for _ in range(d - corank)] + [0] * corank)
    return QuadraticSpace(P.T @ D @ P)


def random_split_space(n: int, field: Field, seed: int, corank: int = 0, bound: int = 3) -> QuadraticSpace:
    """A form with a known hyperbolic frame: ``n - ceil(c/2)`` hyperbolic
    pairs, one anisotropic line when the corank is odd, then the radical,
    all in a random basis."""
    _check_n(n)
    if corank not in (0, 1, 2):
        raise ValueError("corank must be 0, 1 or 2")
    rng = random.Random(seed)
    f = field
    d = 2 * n
    k = (d - corank) // 2
    a = (d - corank) % 2
    H = f.zeros((d, d))
    for i in range(k):
        H[i, k + i] = H[k + i, i] = f.one
    for i in range(a):
        H[2 * k + i, 2 * k + i] = f.random_nonzero(rng)
    F = random_invertible(f, d, rng, bound)
    Finv = F.inverse()
    G = Finv @ Matrix(f, H) @ Finv.T
    frame = HyperbolicFrame(
        e=Matrix(f, F.a[:k].copy()),
        f=Matrix(f, F.a[k : 2 * k].copy()),
        aniso=Matrix(f, F.a[2 * k : 2 * k + a].copy()),
        rad=Matrix(f, F.a[2 * k + a :].copy()),
    )
    return QuadraticSpace(G, frame)


def hyperbolic_space(field: Field, n: int) -> QuadraticSpace:
    """Standard hyperbolic space on e_1, f_1, ..., e_n, f_n (interleaved) with
    ``pairing(e_i, f_i) = 1``."""
    d = 2 * n
    a = field.zeros((d, d))
    for i in range(n):
        a[2 * i, 2 * i + 1] = a[2 * i + 1, 2 * i] = field.one
    return QuadraticSpace(Matrix(field, a))


def sym_rank(mats: Sequence[Matrix]) -> int:
    """Rank of the span of the given symmetric matrices."""
    f = mats[0].field
    rows = [M.a[np.triu_indices(M.rows)] for M in mats]
    return Matrix(f, np.array(rows, dtype=f.dtype)).rank()


def random_system(
    n: int, m: int, field: Field, seed: int, planted_corank: int | None = None
) -> list[QuadraticSpace]:
    """``m`` independent random quadrics on a shared V.  With
    ``planted_corank`` the first member has exactly that corank."""
    _check_n(n)
    if m not in (1, 2, 3, 4):
        raise ValueError("m must be in 1..4")
    rng = random.Random(seed)
    d = 2 * n
    while True:
        grams = [random_symmetric(field, d, rng) for _ in range(m)]
        if planted_corank:
            while True:
                P = random_invertible(field, d, rng, bound=5)
                D = Matrix.diag(field, [field.random_nonzero(rng) for _ in range(d - planted_corank)] + [0] * planted_corank)
                G = P.T @ D @ P
                if G.rank() == d - planted_corank:
                    break
            grams[0] = G
        if sym_rank(grams) == m:
            return [QuadraticSpace(g) for g in grams]


# ---------------------------------------------------------------------------
# JSON system format


def _parse_entry(field: Field, x, where: str):
    if isinstance(x, bool) or not isinstance(x, (int, str)):
        raise SystemFormatError(f"{where}: entries must be integers or 'a/b' strings, got {x!r}")
    try:
        return field(x)
    except FieldError as e:
        raise SystemFormatError(f"{where}: {e}") from None


def parse_system(obj) -> tuple[int, int, Field, list[QuadraticSpace]]:
    """Validate a decoded system object; returns ``(n, m, field, forms)``."""
    if isinstance(obj, bytes):
        try:
            obj = obj.decode("utf-8")
        except UnicodeDecodeError as e:
            raise SystemFormatError(f"invalid UTF-8 at byte offset {e.start}") from None
    if isinstance(obj, str):
        try:
            obj = json.loads(obj)
        except json.JSONDecodeError as e:
            offset = len(obj[: e.pos].encode("utf-8"))
            raise SystemFormatError(f"invalid JSON at byte offset {offset}: {e.msg}") from None
    if not isinstance(obj, dict):
        raise SystemFormatError("system must be a JSON object")
    for key in ("n", "m", "field", "gram"):
        if key not in obj:
            raise SystemFormatError(f"missing key {key!r}")
    n, m = obj["n"], obj["m"]
    if not isinstance(n, int) or isinstance(n, bool) or n not in SUPPORTED_N:
        raise SystemFormatError(f"n must be one of {SUPPORTED_N}")
    if not isinstance(m, int) or isinstance(m, bool) or not 1 <= m <= 4:
        raise SystemFormatError("m must be an integer in 1..4")
    try:
        field = Field.from_json(obj["field"]) if isinstance(obj["field"], dict) else None
    except FieldError as e:
        raise SystemFormatError(f"field: {e}") from None
    if field is None:
        raise SystemFormatError("field must be an object")
    grams = obj["gram"]
    if not isinstance(grams, list) or len(grams) != m:
        raise SystemFormatError(f"gram must be a list of {m} matrices")
    d = 2 * n
    forms = []
    for t, g in enumerate(grams):
        if isinstance(g, list) and len(g) == d and all(isinstance(r, list) for r in g):
            g = [x for r in g for x in r]
        if not isinstance(g, list) or len(g) != d * d:
            raise SystemFormatError(f"gram[{t}] must have {d * d} row-major entries")
        vals = [_parse_entry(field, x, f"gram[{t}][{i}]") for i, x in enumerate(g)]
        M = Matrix.from_rows(field, [vals[i * d : (i + 1) * d] for i in range(d)])
        if not M.is_symmetric():
            raise SystemFormatError(f"gram[{t}] is not symmetric")
        forms.append(QuadraticSpace(M))
    return n, m, field, forms


def system_to_json(forms: Sequence[QuadraticSpace], meta: dict | None = None) -> dict:
    f = forms[0].field
    out = {
        "n": forms[0].n,
        "m": len(forms),
        "field": f.to_json(),
        "gram": [[_entry_json(f, x) for x in Q.gram.a.reshape(-1)] for Q in forms],
    }
    if meta is not None:
        out["_meta"] = meta
    return out


def _entry_json(field: Field, x):
    if field.is_prime:
        return int(x)
    x = Fraction(x)
    return x.numerator if x.denominator == 1 else str(x)


def random_isotropic(
    Q: QuadraticSpace,
    rng: random.Random,
    dim: int | None = None,
    radical_meet: int | None = None,
    family_hint: int = 0,
) -> IsotropicSubspace:
    """Random isotropic subspace read off the hyperbolic frame.

    The image in V/rad is the graph ``e_i + sum_j A_ij f_j`` of a random
    antisymmetric A (same family as ``span(e)``), or a random subspace of
    one; hint 1 swaps the last ``e/f`` pair first, which flips the family.
    ``radical_meet`` random radical vectors are added, and the graph
    vectors get random radical components.
    """
    f = Q.field
    fr = Q.hyperbolic_frame()
    c, k = fr.rad.rows, fr.witt_index
    dim = Q.n if dim is None else dim
    radical_meet = min(c, dim) if radical_meet is None else radical_meet
    j = dim - radical_meet
    if not 0 <= radical_meet <= c or j < 0:
        raise ValueError(f"radical_meet must lie in 0..{min(c, dim)}")
    if j > k:
        raise NotSplit(f"image of dimension {j} exceeds Witt index {k}")
    E = [fr.e.a[i].copy() for i in range(k)]
    Fv = [fr.f.a[i].copy() for i in range(k)]
    if family_hint == 1 and k:
        E[-1], Fv[-1] = Fv[-1], E[-1]
    A = [[f.zero] * k for _ in range(k)]
    for a in range(k):
        for b in range(a + 1, k):
            x = f.random(rng)
            A[a][b], A[b][a] = x, f.neg(x)
    graph = []
    for a in range(k):
        v = E[a]
        for b in range(k):
            if A[a][b] != 0:
                v = f.norm(v + f.norm(Fv[b] * A[a][b]))
        graph.append(v)
    while j:
        mix = Matrix(f, f.array([[f.random(rng) for _ in range(k)] for _ in range(j)])) if j < k else Matrix.identity(f, k)
        if mix.rank() == j:
            break
    rows = [row for row in (mix @ Matrix.from_rows(f, graph, cols=Q.dim)).a] if j else []
    rows = [f.norm(r + _random_combo(f, fr.rad, rng)) for r in rows]
    while True:
        R = [_random_combo(f, fr.rad, rng) for _ in range(radical_meet)]
        if not R or Matrix.from_rows(f, R).rank() == radical_meet:
            break
    if not rows + R:
        return IsotropicSubspace(Q, Matrix.zeros(f, 0, Q.dim))
    return IsotropicSubspace(Q, Matrix.from_rows(f, rows + R))


def _random_combo(f: Field, rows: Matrix, rng: random.Random) -> np.ndarray:
    out = f.zeros(rows.cols)
    for r in rows.a:
        out = f.norm(out + f.norm(r * f.random(rng)))
    return out


def isotropic_completions(W: IsotropicSubspace) -> tuple[IsotropicSubspace, IsotropicSubspace]:
    """The two isotropic subspaces one dimension above W, when
    ``W^perp / W`` is a hyperbolic plane.  They lie in opposite families."""
    Q = W.space
    f = Q.field
    perp = (W.basis @ Q.gram).kernel().T
    red, rank = [], W.dim
    for r in perp.a:
        if Matrix.from_rows(f, list(W.basis.a) + red + [r]).rank() > rank:
            red.append(r)
            rank += 1
    if len(red) != 2:
        raise ValueError(f"W^perp / W has dimension {len(red)}, need 2")
    R = Matrix.from_rows(f, red)
    plane = QuadraticSpace(R @ Q.gram @ R.T)
    if plane.corank() != 0:
        raise ValueError("W^perp / W is degenerate")
    fr = plane.hyperbolic_frame()
    if fr.witt_index != 1:
        raise NotSplit("W^perp / W is anisotropic")
    out = []
    for line in (fr.e, fr.f):
        v = line @ R
        out.append(IsotropicSubspace(Q, W.basis.vstack(v)))
    return out[0], out[1]
