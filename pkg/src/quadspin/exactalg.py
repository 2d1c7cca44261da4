"""Exact scalars, dense matrices and multivariate polynomials.

Two kinds of field are supported: the rationals (entries are
:class:`fractions.Fraction`) and odd prime fields ``F_p`` (entries are Python
ints in ``[0, p)``, stored in ``int64`` numpy arrays).  Nothing in this module
touches floating point.
"""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np
from sympy import isprime


class FieldError(ValueError):
    """Invalid field specification or an entry that cannot be coerced."""


class FieldTooSmall(ValueError):
    """Interpolation needs more distinct nodes than the field has."""


class InterpolationError(ArithmeticError):
    """Interpolated polynomial disagreed with a direct evaluation."""


@dataclass(frozen=True)
class Defaults:
    prime: int = 10007
    scan_prime: int = 11
    verify_points: int = 20


DEFAULTS = Defaults()

_MAX_PRIME = 2**31


@dataclass(frozen=True)
class Field:
    """Either the rationals (``kind="q"``) or ``F_p`` (``kind="fp"``)."""

    kind: str
    p: int | None = None

    def __post_init__(self):
        if self.kind == "q":
            if self.p is not None:
                raise FieldError("the rational field takes no modulus")
        elif self.kind == "fp":
            if self.p is None or not isinstance(self.p, int):
                raise FieldError("prime field needs an integer modulus")
            if self.p == 2:
                raise FieldError("characteristic 2 is not supported")
            if self.p < 3 or not isprime(self.p):
                raise FieldError(f"{self.p} is not an odd prime")
            if self.p >= _MAX_PRIME:
                raise FieldError(f"modulus must be below 2^31, got {self.p}")
        else:
            raise FieldError(f"unknown field kind {self.kind!r}")

    @classmethod
    def fp(cls, p: int) -> "Field":
        return cls("fp", p)

    @classmethod
    def rationals(cls) -> "Field":
        return cls("q")

    @classmethod
    def parse(cls, text: str) -> "Field":
        """Parse ``"q"`` or ``"fp:<p>"``."""
        text = text.strip().lower()
        if text in ("q", "qq", "rationals"):
            return cls.rationals()
        if text.startswith("fp:"):
            try:
                p = int(text[3:])
            except ValueError:
                raise FieldError(f"bad field spec {text!r}") from None
            return cls.fp(p)
        raise FieldError(f"bad field spec {text!r}")

    @classmethod
    def from_json(cls, obj: Mapping) -> "Field":
        kind = obj.get("kind")
        if kind == "q":
            return cls.rationals()
        if kind == "fp":
            return cls.fp(obj.get("p"))
        raise FieldError(f"unknown field kind {kind!r}")

    def to_json(self) -> dict:
        return {"kind": "q"} if self.kind == "q" else {"kind": "fp", "p": self.p}

    def __str__(self):
        return "q" if self.kind == "q" else f"fp:{self.p}"

    @property
    def is_prime(self) -> bool:
        return self.kind == "fp"

    @property
    def dtype(self):
        return np.int64 if self.kind == "fp" else object

    @property
    def zero(self):
        return 0 if self.kind == "fp" else Fraction(0)

    @property
    def one(self):
        return 1 if self.kind == "fp" else Fraction(1)

    @property
    def size(self) -> float:
        return self.p if self.kind == "fp" else math.inf

    def __call__(self, x):
        """Coerce an int, Fraction or ``"a/b"`` string into the field."""
        if isinstance(x, str):
            try:
                x = Fraction(x.strip())
            except ValueError:
                raise FieldError(f"cannot parse scalar {x!r}") from None
        if isinstance(x, (bool, float)):
            raise FieldError(f"refusing non-exact scalar {x!r}")
        if isinstance(x, np.integer):
            x = int(x)
        if self.kind == "q":
            return Fraction(x)
        if isinstance(x, Fraction):
            if x.denominator % self.p == 0:
                raise FieldError(f"denominator of {x} vanishes mod {self.p}")
            return x.numerator * pow(x.denominator, -1, self.p) % self.p
        if isinstance(x, int):
            return x % self.p
        raise FieldError(f"cannot coerce {x!r}")

    def inv(self, x):
        if x == 0:
            raise ZeroDivisionError("inverse of zero")
        if self.kind == "q":
            return 1 / Fraction(x)
        return pow(int(x), -1, self.p)

    def neg(self, x):
        return (-x) % self.p if self.kind == "fp" else -x

    def random(self, rng: random.Random, bound: int = 5):
        """Uniform over ``F_p``; a small integer in ``[-bound, bound]`` over Q."""
        if self.kind == "fp":
            return rng.randrange(self.p)
        return Fraction(rng.randint(-bound, bound))

    def random_nonzero(self, rng: random.Random, bound: int = 5):
        while True:
            x = self.random(rng, bound)
            if x != 0:
                return x

    def array(self, values) -> np.ndarray:
        """Numpy array of canonical field elements."""
        if self.kind == "fp":
            arr = np.array(values, dtype=object)
            out = np.vectorize(self.__call__, otypes=[object])(arr) if arr.size else arr
            return np.asarray(out, dtype=np.int64).reshape(arr.shape)
        arr = np.array(values, dtype=object)
        if arr.size:
            arr = np.vectorize(self.__call__, otypes=[object])(arr)
        return arr

    def norm(self, arr):
        """Reduce an array (or scalar) produced by ring operations."""
        if self.kind == "fp":
            return arr % self.p
        return arr

    def zeros(self, shape) -> np.ndarray:
        if self.kind == "fp":
            return np.zeros(shape, dtype=np.int64)
        out = np.empty(shape, dtype=object)
        out.fill(Fraction(0))
        return out

    def to_str(self, x) -> str:
        return str(int(x)) if self.kind == "fp" else str(Fraction(x))


# ---------------------------------------------------------------------------
# Elimination kernels


def _rref_fp(a: np.ndarray, p: int, full: bool = True):
    a = a.astype(np.int64, copy=True) % p
    rows, cols = a.shape
    pivots: list[int] = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        nz = np.flatnonzero(a[r:, c])
        if nz.size == 0:
            continue
        i = r + int(nz[0])
        if i != r:
            a[[r, i]] = a[[i, r]]
        a[r] = a[r] * pow(int(a[r, c]), -1, p) % p
        col = a[:, c].copy()
        col[r] = 0
        if not full:
            col[:r] = 0
        hit = np.flatnonzero(col)
        if hit.size:
            a[hit] = (a[hit] - np.outer(col[hit], a[r])) % p
        pivots.append(c)
        r += 1
    return a, pivots


def _rref_q(a: np.ndarray):
    a = np.array(a, dtype=object, copy=True)
    rows, cols = a.shape
    pivots: list[int] = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        i = next((i for i in range(r, rows) if a[i, c] != 0), None)
        if i is None:
            continue
        if i != r:
            a[[r, i]] = a[[i, r]]
        a[r] = a[r] / a[r, c]
        for j in range(rows):
            if j != r and a[j, c] != 0:
                a[j] = a[j] - a[j, c] * a[r]
        pivots.append(c)
        r += 1
    return a, pivots


def _integer_rows(a: np.ndarray) -> tuple[list[list[int]], int]:
    """Scale each row by the lcm of its denominators; returns rows and the
    product of the scale factors."""
    out = []
    scale = 1
    for row in a:
        fr = [Fraction(x) for x in row]
        l = 1
        for x in fr:
            l = l * x.denominator // math.gcd(l, x.denominator)
        out.append([int(x * l) for x in fr])
        scale *= l
    return out, scale


def _bareiss(m: list[list[int]]) -> tuple[int, int]:
    """Fraction-free elimination in place; returns (rank, signed last pivot)."""
    rows = len(m)
    cols = len(m[0]) if rows else 0
    prev = 1
    sign = 1
    r = 0
    for c in range(cols):
        if r == rows:
            break
        i = next((i for i in range(r, rows) if m[i][c] != 0), None)
        if i is None:
            continue
        if i != r:
            m[r], m[i] = m[i], m[r]
            sign = -sign
        pr = m[r]
        piv = pr[c]
        for i in range(r + 1, rows):
            mi = m[i]
            f = mi[c]
            for j in range(c + 1, cols):
                mi[j] = (piv * mi[j] - f * pr[j]) // prev
            mi[c] = 0
        prev = piv
        r += 1
    return r, sign * prev


# ---------------------------------------------------------------------------
# Matrices


@dataclass(frozen=True, eq=False)
class Matrix:
    """Dense matrix over a :class:`Field`; treat as immutable."""

    field: Field
    a: np.ndarray

    @classmethod
    def from_rows(cls, field: Field, rows: Sequence[Sequence], cols: int | None = None) -> "Matrix":
        rows = list(rows)
        if not rows:
            return cls.zeros(field, 0, cols or 0)
        return cls(field, field.array([list(r) for r in rows]))

    @classmethod
    def zeros(cls, field: Field, rows: int, cols: int) -> "Matrix":
        return cls(field, field.zeros((rows, cols)))

    @classmethod
    def identity(cls, field: Field, n: int) -> "Matrix":
        a = field.zeros((n, n))
        for i in range(n):
            a[i, i] = field.one
        return cls(field, a)

    @classmethod
    def diag(cls, field: Field, entries: Sequence) -> "Matrix":
        n = len(entries)
        a = field.zeros((n, n))
        for i, x in enumerate(entries):
            a[i, i] = field(x)
        return cls(field, a)

    @property
    def rows(self) -> int:
        return self.a.shape[0]

    @property
    def cols(self) -> int:
        return self.a.shape[1]

    @property
    def shape(self):
        return self.a.shape

    def __getitem__(self, idx):
        return self.a[idx]

    def tolist(self):
        return self.a.tolist()

    def __eq__(self, other):
        if not isinstance(other, Matrix):
            return NotImplemented
        return self.field == other.field and self.shape == other.shape and bool(np.all(self.a == other.a))

    def __repr__(self):
        return f"Matrix({self.field}, {self.a.tolist()})"

    def _check(self, other: "Matrix"):
        if self.field != other.field:
            raise FieldError("matrices over different fields")

    def __add__(self, other: "Matrix") -> "Matrix":
        self._check(other)
        return Matrix(self.field, self.field.norm(self.a + other.a))

    def __sub__(self, other: "Matrix") -> "Matrix":
        self._check(other)
        return Matrix(self.field, self.field.norm(self.a - other.a))

    def __neg__(self) -> "Matrix":
        return Matrix(self.field, self.field.norm(-self.a))

    def scale(self, c) -> "Matrix":
        c = self.field(c)
        return Matrix(self.field, self.field.norm(self.a * c))

    def __matmul__(self, other: "Matrix") -> "Matrix":
        self._check(other)
        return Matrix(self.field, matmul(self.field, self.a, other.a))

    @property
    def T(self) -> "Matrix":
        return Matrix(self.field, self.a.T.copy())

    def is_zero(self) -> bool:
        return not np.any(self.a != 0)

    def is_symmetric(self) -> bool:
        return self.rows == self.cols and bool(np.all(self.a == self.a.T))

    def hstack(self, other: "Matrix") -> "Matrix":
        self._check(other)
        return Matrix(self.field, np.hstack([self.a, other.a]))

    def vstack(self, other: "Matrix") -> "Matrix":
        self._check(other)
        return Matrix(self.field, np.vstack([self.a, other.a]))

    def rref(self) -> tuple["Matrix", list[int]]:
        if self.rows == 0 or self.cols == 0:
            return self, []
        if self.field.is_prime:
            a, piv = _rref_fp(self.a, self.field.p)
        else:
            a, piv = _rref_q(self.a)
        return Matrix(self.field, a), piv

    def rank(self) -> int:
        return mat_rank(self)

    def kernel(self) -> "Matrix":
        return mat_kernel_basis(self)

    def det(self):
        return mat_det(self)

    def inverse(self) -> "Matrix":
        n = self.rows
        if n != self.cols:
            raise ValueError("inverse of a non-square matrix")
        r, piv = self.hstack(Matrix.identity(self.field, n)).rref()
        if piv[:n] != list(range(n)):
            raise ZeroDivisionError("matrix is singular")
        return Matrix(self.field, r.a[:, n:].copy())

    def row_space(self) -> "Matrix":
        """Reduced basis of the row space (canonical, so comparable with ==)."""
        r, piv = self.rref()
        return Matrix(self.field, r.a[: len(piv)].copy())


def matmul(field: Field, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    if field.is_prime:
        inner = a.shape[-1] if a.ndim else 1
        if (field.p - 1) ** 2 * max(inner, 1) < 2**62:
            return (a.astype(np.int64) @ b.astype(np.int64)) % field.p
        return (a.astype(object) @ b.astype(object) % field.p).astype(np.int64)
    if a.shape[-1] == 0:
        return field.zeros((a.shape[0], b.shape[-1]))
    return a @ b


def mat_rank(M: Matrix) -> int:
    """Rank by exact elimination (fraction-free over Q)."""
    if M.rows == 0 or M.cols == 0:
        return 0
    if M.field.is_prime:
        _, piv = _rref_fp(M.a, M.field.p, full=False)
        return len(piv)
    rows, _ = _integer_rows(M.a)
    rank, _ = _bareiss(rows)
    return rank


def mat_det(M: Matrix):
    if M.rows != M.cols:
        raise ValueError("determinant of a non-square matrix")
    f = M.field
    n = M.rows
    if n == 0:
        return f.one
    if f.is_prime:
        a = M.a.astype(np.int64, copy=True) % f.p
        det = 1
        p = f.p
        for c in range(n):
            nz = np.flatnonzero(a[c:, c])
            if nz.size == 0:
                return 0
            i = c + int(nz[0])
            if i != c:
                a[[c, i]] = a[[i, c]]
                det = -det
            piv = int(a[c, c])
            det = det * piv % p
            inv = pow(piv, -1, p)
            below = a[c + 1 :, c] * inv % p
            hit = np.flatnonzero(below)
            if hit.size:
                rows = c + 1 + hit
                a[rows] = (a[rows] - np.outer(below[hit], a[c])) % p
        return det % p
    rows, scale = _integer_rows(M.a)
    rank, last = _bareiss(rows)
    if rank < n:
        return Fraction(0)
    return Fraction(last, scale)


def mat_kernel_basis(M: Matrix) -> Matrix:
    """Columns spanning ``ker M`` (a ``cols x nullity`` matrix)."""
    f = M.field
    n = M.cols
    if M.rows == 0:
        return Matrix.identity(f, n)
    r, piv = M.rref()
    free = [c for c in range(n) if c not in set(piv)]
    K = f.zeros((n, len(free)))
    for k, fc in enumerate(free):
        K[fc, k] = f.one
        for i, pc in enumerate(piv):
            K[pc, k] = f.neg(r.a[i, fc])
    return Matrix(f, K)


def same_row_space(A: Matrix, B: Matrix) -> bool:
    if A.cols != B.cols:
        return False
    ra, rb = A.rank(), B.rank()
    return ra == rb and A.vstack(B).rank() == ra


def solve_left(basis: Matrix, targets: Matrix) -> Matrix | None:
    """Coefficients ``C`` with ``C @ basis == targets`` (rows), or None.

    ``basis`` must have independent rows.
    """
    f = basis.field
    k = basis.rows
    aug = basis.T.hstack(targets.T)
    r, piv = aug.rref()
    if any(c >= k for c in piv):
        return None
    if len(piv) != k:
        raise ValueError("basis rows are dependent")
    return Matrix(f, r.a[:k, k:].T.copy())


class CoordinateSystem:
    """Fast coordinates with respect to independent row vectors.

    Picks pivot columns once; ``coords`` then costs one small matrix product
    and ``coords(check=True)`` verifies membership exactly.
    """

    def __init__(self, basis: Matrix):
        self.basis = basis
        self.field = basis.field
        k = basis.rows
        if k == 0:
            self.pivots: list[int] = []
            self._inv = Matrix.zeros(self.field, 0, 0)
            return
        _, piv = basis.rref()
        if len(piv) != k:
            raise ValueError("basis rows are dependent")
        self.pivots = piv
        sub = Matrix(self.field, basis.a[:, piv].copy())
        self._inv = sub.inverse()

    @property
    def dim(self) -> int:
        return self.basis.rows

    def coords(self, vectors: np.ndarray, check: bool = True) -> np.ndarray:
        """Rows of ``vectors`` in the basis; raises if one is not in the span."""
        f = self.field
        vectors = np.atleast_2d(vectors)
        if self.dim == 0:
            if check and np.any(vectors != 0):
                raise ValueError("vector outside the span")
            return f.zeros((vectors.shape[0], 0))
        c = matmul(f, vectors[:, self.pivots], self._inv.a)
        if check:
            back = matmul(f, c, self.basis.a)
            if np.any(f.norm(back - vectors) != 0):
                raise ValueError("vector outside the span")
        return c

    def contains(self, vectors: np.ndarray) -> bool:
        try:
            self.coords(vectors, check=True)
        except ValueError:
            return False
        return True


# ---------------------------------------------------------------------------
# Multivariate polynomials


@dataclass(frozen=True, eq=False)
class MultiPoly:
    field: Field
    nvars: int
    terms: Mapping[tuple[int, ...], object] = field(default_factory=dict)

    def __post_init__(self):
        clean = {}
        for e, c in self.terms.items():
            e = tuple(int(x) for x in e)
            if len(e) != self.nvars:
                raise ValueError(f"exponent {e} has wrong length")
            c = self.field(c)
            if c != 0:
                clean[e] = c
        object.__setattr__(self, "terms", clean)

    @classmethod
    def constant(cls, field: Field, nvars: int, c) -> "MultiPoly":
        return cls(field, nvars, {(0,) * nvars: c})

    @classmethod
    def variable(cls, field: Field, nvars: int, i: int) -> "MultiPoly":
        e = [0] * nvars
        e[i] = 1
        return cls(field, nvars, {tuple(e): 1})

    def __eq__(self, other):
        if not isinstance(other, MultiPoly):
            return NotImplemented
        return self.field == other.field and self.nvars == other.nvars and self.terms == other.terms

    def __repr__(self):
        return f"MultiPoly({self.field}, {self.nvars}, {self.terms})"

    def is_zero(self) -> bool:
        return not self.terms

    @property
    def degree(self) -> int:
        return max((sum(e) for e in self.terms), default=-1)

    def is_homogeneous(self) -> bool:
        return len({sum(e) for e in self.terms}) <= 1

    def __add__(self, other: "MultiPoly") -> "MultiPoly":
        out = dict(self.terms)
        for e, c in other.terms.items():
            out[e] = self.field.norm(out.get(e, 0) + c)
        return MultiPoly(self.field, self.nvars, out)

    def __neg__(self) -> "MultiPoly":
        return MultiPoly(self.field, self.nvars, {e: self.field.neg(c) for e, c in self.terms.items()})

    def __sub__(self, other: "MultiPoly") -> "MultiPoly":
        return self + (-other)

    def __mul__(self, other: "MultiPoly") -> "MultiPoly":
        if not isinstance(other, MultiPoly):
            c = self.field(other)
            return MultiPoly(self.field, self.nvars, {e: self.field.norm(v * c) for e, v in self.terms.items()})
        out: dict = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                out[e] = self.field.norm(out.get(e, 0) + c1 * c2)
        return MultiPoly(self.field, self.nvars, out)

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "MultiPoly":
        out = MultiPoly.constant(self.field, self.nvars, 1)
        for _ in range(k):
            out = out * self
        return out

    def evaluate(self, point: Sequence):
        f = self.field
        point = [f(x) for x in point]
        total = f.zero
        for e, c in self.terms.items():
            t = c
            for x, k in zip(point, e):
                if k:
                    t = t * x**k
            total = f.norm(total + t)
        return f(total)

    def derivative(self, i: int) -> "MultiPoly":
        out = {}
        for e, c in self.terms.items():
            if e[i]:
                ne = list(e)
                ne[i] -= 1
                out[tuple(ne)] = self.field.norm(c * e[i])
        return MultiPoly(self.field, self.nvars, out)

    def to_json(self) -> dict:
        return {
            "nvars": self.nvars,
            "degree": self.degree,
            "terms": {
                ",".join(map(str, e)): self.field.to_str(c) for e, c in sorted(self.terms.items(), reverse=True)
            },
        }

    @classmethod
    def from_json(cls, field: Field, obj: Mapping) -> "MultiPoly":
        nvars = int(obj["nvars"])
        terms = {}
        for k, v in obj["terms"].items():
            e = tuple(int(x) for x in k.split(",")) if k else ()
            terms[e] = field(v)
        return cls(field, nvars, terms)


def assemble(mats: Sequence[Matrix], lam: Sequence) -> Matrix:
    """``sum_t lam[t] * mats[t]``."""
    f = mats[0].field
    acc = f.zeros(mats[0].shape)
    for c, M in zip(lam, mats):
        acc = acc + M.a * f(c)
    return Matrix(f, f.norm(acc))


def det_of_linear_matrix(
    mats: Sequence[Matrix], verify_points: int = DEFAULTS.verify_points, seed: int = 0
) -> MultiPoly:
    """``det(l_1 B_1 + ... + l_m B_m)`` as a homogeneous polynomial in ``m``
    variables, by tensor-grid interpolation of ``det(B(1, x_2, ..., x_m))``.

    The result is checked against direct determinants at ``verify_points``
    random points.
    """
    if not mats:
        raise ValueError("need at least one matrix")
    f = mats[0].field
    N = mats[0].rows
    m = len(mats)
    for B in mats:
        if B.field != f or B.shape != (N, N):
            raise ValueError("matrices must be square, equal-sized, over one field")
    if f.is_prime and f.p <= N:
        raise FieldTooSmall(f"need {N + 1} interpolation nodes, field has {f.p}")
    nodes = [f(i) for i in range(N + 1)]
    vinv = Matrix.from_rows(f, [[x**j for j in range(N + 1)] for x in nodes]).inverse()

    shape = (N + 1,) * (m - 1)
    vals = np.empty(shape, dtype=object)
    for idx in itertools.product(range(N + 1), repeat=m - 1):
        lam = [f.one] + [nodes[i] for i in idx]
        vals[idx] = assemble(mats, lam).det()
    coeffs = vals
    for axis in range(m - 1):
        moved = np.moveaxis(coeffs, axis, 0)
        flat = moved.reshape(N + 1, -1)
        out = matmul(f, vinv.a.astype(f.dtype), flat.astype(f.dtype))
        coeffs = np.moveaxis(out.reshape(moved.shape), 0, axis)

    terms = {}
    for idx in itertools.product(range(N + 1), repeat=m - 1):
        c = f(coeffs[idx])
        if c == 0:
            continue
        s = sum(idx)
        if s > N:
            raise InterpolationError("interpolant has degree above the matrix size")
        terms[(N - s,) + tuple(idx)] = c
    poly = MultiPoly(f, m, terms)

    rng = random.Random(seed)
    for _ in range(verify_points):
        lam = [f.random(rng, bound=50) for _ in range(m)]
        if poly.evaluate(lam) != f(assemble(mats, lam).det()):
            raise InterpolationError(f"interpolant disagrees with det at {lam}")
    return poly


# ---------------------------------------------------------------------------
# Univariate helpers (coefficient lists, lowest degree first)


def _trim(a: list) -> list:
    a = list(a)
    while a and a[-1] == 0:
        a.pop()
    return a


def upoly_divmod(f: Field, a: list, b: list) -> tuple[list, list]:
    a = _trim(a)
    b = _trim(b)
    if not b:
        raise ZeroDivisionError("polynomial division by zero")
    q = [f.zero] * max(len(a) - len(b) + 1, 0)
    inv_lead = f.inv(b[-1])
    while len(a) >= len(b):
        c = f.norm(a[-1] * inv_lead)
        shift = len(a) - len(b)
        q[shift] = c
        for i, bc in enumerate(b):
            a[shift + i] = f.norm(a[shift + i] - c * bc)
        a = _trim(a)
    return q, a


def upoly_gcd(f: Field, a: list, b: list) -> list:
    """Monic gcd by the Euclidean algorithm."""
    a, b = _trim(a), _trim(b)
    while b:
        _, r = upoly_divmod(f, a, b)
        a, b = b, r
    if not a:
        return a
    inv = f.inv(a[-1])
    return [f.norm(c * inv) for c in a]


def upoly_derivative(f: Field, a: list) -> list:
    return _trim([f.norm(a[i] * i) for i in range(1, len(a))])


def upoly_eval(f: Field, a: list, x):
    acc = f.zero
    for c in reversed(a):
        acc = f.norm(acc * x + c)
    return acc


def dehomogenize_binary(poly: MultiPoly) -> tuple[list, int]:
    """``f(x, 1)`` as a coefficient list, and the multiplicity of the point
    ``(1, 0)``."""
    if poly.nvars != 2:
        raise ValueError("expected a binary form")
    N = poly.degree
    coeffs = [poly.field.zero] * (N + 1)
    for (a, _b), c in poly.terms.items():
        coeffs[a] = c
    coeffs = _trim(coeffs)
    return coeffs, N - (len(coeffs) - 1)


def poly_is_squarefree(poly: MultiPoly) -> bool:
    """Whether a nonzero binary form has no repeated linear factor over the
    algebraic closure."""
    if poly.is_zero():
        raise ValueError("the zero polynomial has no squarefree part")
    if poly.nvars != 2 or not poly.is_homogeneous():
        raise ValueError("expected a homogeneous binary form")
    g, mult_inf = dehomogenize_binary(poly)
    if mult_inf > 1:
        return False
    return len(upoly_gcd(poly.field, g, upoly_derivative(poly.field, g))) <= 1


def sylvester_resultant(f: Field, a: list, b: list):
    """Resultant of two univariate polynomials as a Sylvester determinant."""
    a, b = _trim(a), _trim(b)
    da, db = len(a) - 1, len(b) - 1
    n = da + db
    if n == 0:
        return f.one
    rows = []
    for i in range(db):
        row = [0] * n
        for j, c in enumerate(reversed(a)):
            row[i + j] = c
        rows.append(row)
    for i in range(da):
        row = [0] * n
        for j, c in enumerate(reversed(b)):
            row[i + j] = c
        rows.append(row)
    return Matrix.from_rows(f, rows).det()


def vec_inv_fp(x: np.ndarray, p: int) -> np.ndarray:
    """Elementwise inverses mod p by Fermat (entries nonzero, p < 2^31)."""
    x = np.asarray(x, dtype=np.int64) % p
    out = np.ones_like(x)
    e = p - 2
    while e:
        if e & 1:
            out = out * x % p
        x = x * x % p
        e >>= 1
    return out


def batch_rank_fp(mats: np.ndarray, p: int) -> np.ndarray:
    """Ranks of a stack of matrices over F_p, eliminated in lockstep.

    ``mats`` has shape ``(K, r, c)`` with entries in ``[0, p)``.
    """
    a = np.array(mats, dtype=np.int64) % p
    K, r, c = a.shape
    rank = np.zeros(K, dtype=np.int64)
    rows = np.arange(r)
    ks = np.arange(K)
    for col in range(c):
        live = (a[:, :, col] != 0) & (rows[None, :] >= rank[:, None])
        has = live.any(axis=1)
        if not has.any():
            continue
        piv = np.argmax(live, axis=1)
        b = ks[has]
        pr, tr = piv[has], rank[has]
        top = a[b, tr].copy()
        a[b, tr] = a[b, pr]
        a[b, pr] = top
        inv = vec_inv_fp(a[b, tr, col], p)
        a[b, tr] = a[b, tr] * inv[:, None] % p
        factors = a[b, :, col].copy()
        factors[np.arange(len(b)), tr] = 0
        factors[rows[None, :] < tr[:, None]] = 0
        a[b] = (a[b] - factors[:, :, None] * a[b, tr][:, None, :]) % p
        rank[b] += 1
    return rank
