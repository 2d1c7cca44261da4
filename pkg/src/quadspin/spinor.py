"""Spinor ideals ``I = Cl . w_1 ... w_m`` and what is built on them.

An ideal is stored through explicit bases of its even and odd parts inside
Cl (rows are coefficient vectors).  The basis vectors are ``u_T . omega``
where ``u_T`` is the ordered product of standard basis vectors indexed by a
subset T of the coordinates complementary to the pivots of W; each row keeps
its witness T.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .clifford import CliffordAlgebra, CliffordElement, GradedCliffordAlgebra
from .exactalg import CoordinateSystem, Matrix, matmul
from .quadforms import IsotropicSubspace, QuadraticSpace, intersection_dim, radical_basis


class AlgebraError(AssertionError):
    """An identity that must hold exactly failed (a bug, never expected)."""


class HypothesisError(ValueError):
    """Inputs violate the stated hypotheses of an operation."""


def _rows(field, vectors: Sequence[np.ndarray], cols: int) -> Matrix:
    if not len(vectors):
        return Matrix.zeros(field, 0, cols)
    return Matrix(field, np.array([np.asarray(v) for v in vectors], dtype=field.dtype))


@dataclass(eq=False)
class SpinorIdeal:
    W: IsotropicSubspace
    algebra: CliffordAlgebra
    omega: CliffordElement
    even_basis: Matrix
    odd_basis: Matrix
    even_witness: list[tuple[int, ...]]
    odd_witness: list[tuple[int, ...]]
    _coords: dict = field(default_factory=dict, repr=False)

    @property
    def m(self) -> int:
        return self.W.dim

    @property
    def dim_even(self) -> int:
        return self.even_basis.rows

    @property
    def dim_odd(self) -> int:
        return self.odd_basis.rows

    @property
    def dim(self) -> int:
        return self.dim_even + self.dim_odd

    def basis(self, parity: int) -> Matrix:
        return self.even_basis if parity == 0 else self.odd_basis

    def full_basis(self) -> Matrix:
        return self.even_basis.vstack(self.odd_basis)

    def coords(self, parity: int | None) -> CoordinateSystem:
        """Coordinates on I_ev (0), I_odd (1) or all of I (None)."""
        if parity not in self._coords:
            B = self.full_basis() if parity is None else self.basis(parity)
            self._coords[parity] = CoordinateSystem(B)
        return self._coords[parity]

    def same_subspaces(self, other: "SpinorIdeal") -> bool:
        return (
            self.even_basis.row_space() == other.even_basis.row_space()
            and self.odd_basis.row_space() == other.odd_basis.row_space()
        )


def complement_coordinates(W: IsotropicSubspace) -> list[int]:
    _, piv = W.basis.rref()
    return [j for j in range(W.space.dim) if j not in piv]


def build_ideal(W: IsotropicSubspace, algebra: CliffordAlgebra | None = None, verify: bool = True) -> SpinorIdeal:
    """Even and odd bases of ``Cl . omega``.

    Every element of Cl is a combination of ``u_T . w_R`` and ``w_R . omega``
    vanishes for nonempty R, so the ``u_T . omega`` span; ``verify`` checks
    their independence by rank and closure of the span under left
    multiplication by every generator.
    """
    Q = W.space
    A = algebra if algebra is not None else CliffordAlgebra(Q)
    if A.space is not Q and A.space != Q:
        raise ValueError("algebra belongs to a different space")
    m = W.dim
    if not 1 <= m <= Q.n + 1:
        raise ValueError(f"dim W must lie in 1..{Q.n + 1}")
    f = Q.field
    omega = A.product_of_vectors(list(W.basis.a))
    if omega.is_zero():
        raise AlgebraError("omega vanished for an independent isotropic W")
    comp = complement_coordinates(W)
    memo: dict[tuple, np.ndarray] = {(): omega.coeffs}
    # u_T omega = e_t1 (u_T' omega), building from the largest index down
    for size in range(1, len(comp) + 1):
        for T in _subsets_of_size(comp, size):
            memo[T] = A.left_gen(T[0], memo[T[1:]])
    ev, od, ev_w, od_w = [], [], [], []
    for T, x in memo.items():
        if (len(T) + m) % 2 == 0:
            ev.append(x)
            ev_w.append(T)
        else:
            od.append(x)
            od_w.append(T)
    E, O = _rows(f, ev, A.N), _rows(f, od, A.N)
    I = SpinorIdeal(W, A, omega, E, O, ev_w, od_w)
    if verify:
        if E.rank() != E.rows or O.rank() != O.rows:
            raise AlgebraError("spanning set of the ideal is dependent")
        cs = I.coords(None)
        full = I.full_basis().a.T
        for i in range(Q.dim):
            if not cs.contains(A.left_gen(i, full).T):
                raise AlgebraError(f"span not closed under generator {i}")
    return I


def _subsets_of_size(items: list[int], size: int):
    return itertools.combinations(items, size)


# ---------------------------------------------------------------------------
# Matrix factorizations


@dataclass(eq=False)
class MatrixFactorizationPair:
    """``phi(v): I_odd -> I_ev`` and ``psi(v): I_ev -> I_odd``, both left
    multiplication by v, as matrices acting on coordinate columns.  Stored
    per generator, so entries are visibly linear in v."""

    ideal: SpinorIdeal
    phi_gens: list[Matrix]
    psi_gens: list[Matrix]

    @classmethod
    def of(cls, ideal: SpinorIdeal) -> "MatrixFactorizationPair":
        A = ideal.algebra
        ev, od = ideal.coords(0), ideal.coords(1)
        phis, psis = [], []
        for i in range(A.d):
            phis.append(Matrix(A.field, ev.coords(A.left_gen(i, ideal.odd_basis.a.T).T).T.copy()))
            psis.append(Matrix(A.field, od.coords(A.left_gen(i, ideal.even_basis.a.T).T).T.copy()))
        return cls(ideal, phis, psis)

    def _combine(self, gens: list[Matrix], v) -> Matrix:
        f = self.ideal.algebra.field
        out = gens[0].scale(0)
        for vi, G in zip(v, gens):
            if f(vi) != 0:
                out = out + G.scale(vi)
        return out

    def phi(self, v) -> Matrix:
        return self._combine(self.phi_gens, v)

    def psi(self, v) -> Matrix:
        return self._combine(self.psi_gens, v)


def mf_check(F: MatrixFactorizationPair, v) -> object:
    """Assert ``phi psi = psi phi = q(v) Id`` exactly; returns q(v)."""
    Q = F.ideal.W.space
    f = Q.field
    qv = Q.q(f.array(list(v)))
    P, S = F.phi(v), F.psi(v)
    if not (P @ S == Matrix.identity(f, P.rows).scale(qv)):
        raise AlgebraError("phi(v) psi(v) != q(v) Id")
    if not (S @ P == Matrix.identity(f, S.rows).scale(qv)):
        raise AlgebraError("psi(v) phi(v) != q(v) Id")
    return qv


def fiber_rank(F: MatrixFactorizationPair, v) -> int:
    """Dimension of the cokernel of ``phi(v)`` at a point of the quadric."""
    Q = F.ideal.W.space
    vec = Q.field.array(list(v))
    if not np.any(vec != 0):
        raise ValueError("v must be nonzero")
    if Q.q(vec) != 0:
        raise ValueError("v is not on the quadric")
    return F.ideal.dim_even - F.phi(v).rank()


@dataclass(frozen=True)
class ExactnessReport:
    on_quadric: bool
    rank_phi: int
    rank_psi: int
    ker_phi_is_im_psi: bool
    ker_psi_is_im_phi: bool
    fiber_rank: int

    @property
    def exact(self) -> bool:
        return self.ker_phi_is_im_psi and self.ker_psi_is_im_phi


def _column_space(M: Matrix) -> Matrix:
    return M.T.row_space()


def mf_exact_at(F: MatrixFactorizationPair, v) -> ExactnessReport:
    """Pointwise exactness of the 2-periodic complex
    ``... -> I_ev -psi-> I_odd -phi-> I_ev -> ...``.

    Off the quadric both maps are invertible, so the cokernel vanishes; the
    report then marks exactness as the invertibility of both maps.
    """
    qv = mf_check(F, v)
    P, S = F.phi(v), F.psi(v)
    rp, rs = P.rank(), S.rank()
    if qv != 0:
        inv = rp == P.rows == P.cols and rs == S.rows == S.cols
        return ExactnessReport(False, rp, rs, inv, inv, 0)
    a = P.kernel().T.row_space() == _column_space(S)
    b = S.kernel().T.row_space() == _column_space(P)
    return ExactnessReport(True, rp, rs, a, b, F.ideal.dim_even - rp)


# ---------------------------------------------------------------------------
# Module homomorphisms between cyclic modules


def annihilating_vectors(I: SpinorIdeal, modulo: SpinorIdeal | None = None) -> Matrix:
    """Rows spanning ``U = {v : v . omega = 0}`` (or ``∈ modulo``)."""
    A = I.algebra
    f = A.field
    cols = np.stack([A.left_gen(i, I.omega.coeffs) for i in range(A.d)], axis=1)
    M = Matrix(f, cols)
    if modulo is not None:
        M = M.hstack(modulo.full_basis().T)
    K = M.kernel()
    return Matrix(f, K.a[: A.d, :].T.copy()).row_space()


def _cyclic_annihilator_check(A: CliffordAlgebra, U: Matrix, module_dim: int):
    """``Ann = Cl . U`` holds iff the dimension count matches, since
    ``Cl . U ⊆ Ann`` and ``dim Cl . U = 2^d - 2^(d - dim U)`` for isotropic U."""
    if A.N - (1 << (A.d - U.rows)) != A.N - module_dim:
        raise AlgebraError("annihilator is not generated by vectors; unsupported configuration")


def _hom_space(A: CliffordAlgebra, U: Matrix, target: Matrix) -> Matrix:
    """Rows (coordinates in ``target``) of elements killed by every u in U."""
    f = A.field
    if target.rows == 0:
        return Matrix.zeros(f, 0, 0)
    blocks = [A.left_vec(u, target.a.T) for u in U.a]
    if not blocks:
        return Matrix.identity(f, target.rows)
    M = Matrix(f, np.concatenate(blocks, axis=0))
    return M.kernel().T


def module_hom_space(I: SpinorIdeal, J: SpinorIdeal, graded: bool = True) -> Matrix:
    """Images of omega_I under module homs ``I -> J``, as rows in Cl."""
    if I.algebra is not J.algebra:
        raise ValueError("ideals of different Clifford algebras")
    A = I.algebra
    U = annihilating_vectors(I)
    _cyclic_annihilator_check(A, U, I.dim)
    target = J.basis(I.m % 2) if graded else J.full_basis()
    K = _hom_space(A, U, target)
    if K.rows == 0:
        return Matrix.zeros(A.field, 0, A.N)
    return K @ target


def module_hom_dim(I: SpinorIdeal, J: SpinorIdeal, graded: bool = True) -> int:
    return module_hom_space(I, J, graded).rows


def generates(A: CliffordAlgebra, eta: np.ndarray, J: SpinorIdeal) -> bool:
    """Whether ``Cl . eta`` is all of J."""
    f = A.field
    basis = Matrix(f, np.array([eta], dtype=f.dtype)).row_space()
    while True:
        new = basis
        for i in range(A.d):
            new = new.vstack(Matrix(f, A.left_gen(i, basis.a.T).T.copy()))
        new = new.row_space()
        if new.rows == basis.rows:
            break
        basis = new
    return basis.rows == J.dim


# ---------------------------------------------------------------------------
# Explicit isomorphisms between ideals of the same family


@dataclass(frozen=True)
class LemmaResult:
    forward: Matrix
    backward: Matrix
    composition: Matrix
    scalar: object
    pairing_det: object
    meet_dim: int


def meet_basis(A: Matrix, B: Matrix) -> Matrix:
    """Rows spanning row(A) ∩ row(B)."""
    f = A.field
    if A.rows == 0 or B.rows == 0:
        return Matrix.zeros(f, 0, A.cols)
    K = A.vstack(B).T.kernel()
    if K.cols == 0:
        return Matrix.zeros(f, 0, A.cols)
    X = Matrix(f, K.a[: A.rows, :].T.copy())
    return (X @ A).row_space()


def extend_basis(base: Matrix, pool: Matrix) -> Matrix:
    """Rows of ``pool`` completing ``base`` to a basis of the joint span."""
    f = pool.field
    chosen = list(base.a)
    out = []
    for r in pool.a:
        if Matrix.from_rows(f, chosen + [r], cols=pool.cols).rank() > len(chosen):
            chosen.append(r)
            out.append(r)
    return _rows(f, out, pool.cols)


def lemma_iso_maps(
    W: IsotropicSubspace,
    W2: IsotropicSubspace,
    I: SpinorIdeal | None = None,
    I2: SpinorIdeal | None = None,
    reduce_meet: bool = True,
) -> LemmaResult:
    """Right multiplication ``I_W -> I_W2`` by the complement of the meet in
    W2, and back by the complement in W; the composition must be a scalar.

    With ``pairing = u^T B v`` the scalar comes out as
    ``(-1)^(r(r-1)/2) 2^r det(pairing(w_i, w'_j))`` for ``r = m - dim(meet)``;
    see :func:`lemma_scalar`.  With ``reduce_meet=False`` the full bases are
    used instead (r = m), and a nonzero meet forces both the pairing
    determinant and the scalar to vanish.
    """
    Q = W.space
    f = Q.field
    m = W.dim
    if W2.dim != m:
        raise HypothesisError("W and W' have different dimensions")
    meet = meet_basis(W.basis, W2.basis)
    k = meet.rows
    if (m - k) % 2:
        raise HypothesisError(f"W and W' meet in odd codimension {m - k}")
    rad = radical_basis(Q)
    rw, rw2 = meet_basis(W.basis, rad), meet_basis(W2.basis, rad)
    if not (rw.rows == rw2.rows and intersection_dim(rw, rw2) == rw.rows):
        raise HypothesisError("W ∩ rad differs from W' ∩ rad")
    A = I.algebra if I is not None else CliffordAlgebra(Q)
    I = I if I is not None else build_ideal(IsotropicSubspace(Q, meet.vstack(extend_basis(meet, W.basis))), A)
    I2 = I2 if I2 is not None else build_ideal(IsotropicSubspace(Q, meet.vstack(extend_basis(meet, W2.basis))), A)
    if reduce_meet:
        cw, cw2 = extend_basis(meet, W.basis), extend_basis(meet, W2.basis)
    else:
        cw, cw2 = I.W.basis, I2.W.basis
    P = cw @ Q.gram @ cw2.T
    pdet = P.det() if P.rows else f.one

    def right_mul(X: np.ndarray, vectors: Matrix) -> np.ndarray:
        for v in vectors.a:
            X = A.right_vec(v, X)
        return X

    src, dst = I.full_basis(), I2.full_basis()
    fwd = right_mul(src.a.T, cw2)
    fwd_c = I2.coords(None).coords(fwd.T).T
    back = right_mul(dst.a.T, cw)
    back_c = I.coords(None).coords(back.T).T
    Fm, Bm = Matrix(f, fwd_c.copy()), Matrix(f, back_c.copy())
    comp = Bm @ Fm
    c = comp.a[0, 0] if comp.rows else f.zero
    if not (comp == Matrix.identity(f, comp.rows).scale(c)):
        raise AlgebraError("composition of the lemma maps is not a scalar")
    return LemmaResult(Fm, Bm, comp, f(c), pdet, k)


def lemma_scalar(r: int, pairing_det, field) -> object:
    """Composition scalar predicted from the pairing determinant."""
    return field(field((-1) ** (r * (r - 1) // 2) * 2**r) * field(pairing_det))


# ---------------------------------------------------------------------------
# Short exact sequence between spinor modules


@dataclass(frozen=True)
class SESReport:
    contained: bool
    halving: bool
    quotient_iso: bool
    hom_dim: int

    @property
    def passed(self) -> bool:
        return self.contained and self.halving and self.quotient_iso


def ses_check(W: IsotropicSubspace, W1: IsotropicSubspace, W2: IsotropicSubspace, seed: int = 0, retries: int = 3) -> SESReport:
    """``0 -> I_W1 -> I_W -> I_W2 -> 0`` for ``W ⊂ W1`` of one more
    dimension and ``W2`` the other completion (``W2 ∩ rad = W1 ∩ rad``).

    The quotient ``I_W / I_W1`` is cyclic on the class of omega_W with
    annihilator ``Cl . U``; a graded hom to ``I_W2`` is an element of the
    right parity killed by U, and is an isomorphism iff it generates.
    """
    Q = W.space
    f = Q.field
    if W1.dim != W.dim + 1 or intersection_dim(W.basis, W1.basis) != W.dim:
        raise HypothesisError("W1 must contain W with one more dimension")
    if W2.dim != W1.dim:
        raise HypothesisError("W2 must have the dimension of W1")
    rad = radical_basis(Q)
    r1, r2 = meet_basis(W1.basis, rad), meet_basis(W2.basis, rad)
    if not (r1.rows == r2.rows and intersection_dim(r1, r2) == r1.rows):
        raise HypothesisError("W2 ∩ rad differs from W1 ∩ rad")
    A = CliffordAlgebra(Q)
    I, I1, I2 = build_ideal(W, A), build_ideal(W1, A), build_ideal(W2, A)
    contained = I.coords(None).contains(I1.full_basis().a)
    halving = 2 * I1.dim == I.dim and 2 * I1.dim_even == I.dim_even
    U = annihilating_vectors(I, modulo=I1)
    _cyclic_annihilator_check(A, U, I.dim - I1.dim)
    target = I2.basis(W.dim % 2)
    K = _hom_space(A, U, target)
    iso = False
    rng = random.Random(seed)
    if K.rows and I.dim - I1.dim == I2.dim:
        for _ in range(retries):
            coef = f.array([f.random(rng) for _ in range(K.rows)])
            eta = matmul(f, matmul(f, coef[None, :], K.a), target.a)[0]
            if generates(A, eta, I2):
                iso = True
                break
    return SESReport(bool(contained), bool(halving), iso, K.rows)


# ---------------------------------------------------------------------------
# Graded ideals in the graded algebra of a single quadric


@dataclass(frozen=True)
class GradedIdealPiece:
    k: int
    basis: Matrix  # rows in the degree-k piece


@dataclass(frozen=True)
class GradedIdealTable:
    n: int
    dims: dict[int, int]
    stable_dim: int
    h_shift: dict[int, bool]

    def stable_from(self) -> int | None:
        ks = sorted(self.dims)
        first = None
        for k in ks:
            if self.dims[k] == self.stable_dim:
                first = k if first is None else first
            else:
                first = None
        return first

    @property
    def nondecreasing(self) -> bool:
        ks = sorted(self.dims)
        return all(self.dims[a] <= self.dims[b] for a, b in zip(ks, ks[1:]))


def graded_ideal_pieces(W: IsotropicSubspace, k_max: int, algebra: GradedCliffordAlgebra | None = None) -> list[GradedIdealPiece]:
    """``I_k = A_{k-n} . omega`` via ``I_k = V . I_{k-1} + h . I_{k-2}``,
    starting from the line spanned by ``omega = w_1 ^ ... ^ w_n``."""
    Q = W.space
    f = Q.field
    n = W.dim
    G = algebra if algebra is not None else GradedCliffordAlgebra([Q])
    omega = {(0, (0,) * G.m): f.one}
    for w in reversed(list(W.basis.a)):
        omega = G.left_vec_terms(w, omega)
    pieces: dict[int, Matrix] = {}
    for k in range(k_max + 1):
        size = G.dim_piece(k)
        if k < n:
            pieces[k] = Matrix.zeros(f, 0, size)
            continue
        if k == n:
            pieces[k] = Matrix(f, G.to_dense(omega, n)[None, :].copy())
            continue
        rows = []
        prev = pieces[k - 1]
        if prev.rows:
            for i in range(G.d):
                e = [0] * G.d
                e[i] = 1
                rows.append((G.left_vec_matrix(e, k - 1) @ prev.T).T)
        if pieces[k - 2].rows:
            for t in range(G.m):
                rows.append((G.h_matrix(t, k - 2) @ pieces[k - 2].T).T)
        M = rows[0]
        for r in rows[1:]:
            M = M.vstack(r)
        pieces[k] = M.row_space()
    return [GradedIdealPiece(k, pieces[k]) for k in range(k_max + 1)]


def graded_ideal_dims(W: IsotropicSubspace, Q: QuadraticSpace | None = None, k_range: Sequence[int] | None = None) -> GradedIdealTable:
    Q = W.space if Q is None else Q
    n = Q.n
    if W.dim != n:
        raise ValueError("graded ideals need dim W = n")
    ks = list(k_range) if k_range is not None else list(range(n, 2 * n + 4))
    k_max = max(ks) + 2
    G = GradedCliffordAlgebra([Q])
    pieces = graded_ideal_pieces(W, k_max, G)
    dims = {k: pieces[k].basis.rows for k in ks}
    stable = 1 << (n - 1)
    shift = {}
    for k in ks:
        if k >= 2 * n - 1:
            hI = (G.h_matrix(0, k) @ pieces[k].basis.T).T.row_space()
            shift[k] = hI == pieces[k + 2].basis
    return GradedIdealTable(n, dims, stable, shift)
