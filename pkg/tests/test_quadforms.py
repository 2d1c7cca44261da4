import json
import random

import pytest
from hypothesis import given, strategies as st

import oracles
from quadspin.exactalg import Field, Matrix
from quadspin.linsys import LinearSystem, discriminant
from quadspin.exactalg import poly_is_squarefree
from quadspin.quadforms import (
    IsotropicSubspace,
    NotSplit,
    QuadraticSpace,
    SystemFormatError,
    corank,
    hyperbolic_space,
    isotropic_completions,
    max_isotropic_basis,
    parse_system,
    radical_basis,
    random_invertible,
    random_isotropic,
    random_quadratic_space,
    random_split_space,
    random_system,
    same_family,
    spinor_invariant,
    system_to_json,
)
from quadspin.spinor import build_ideal, lemma_iso_maps, module_hom_dim

QQ = Field.rationals()
F7 = Field.fp(7)
FP = Field.fp(10007)


def diag(field, entries):
    return QuadraticSpace(Matrix.diag(field, entries))


def rows(field, *vecs):
    return Matrix.from_rows(field, vecs)


def test_corank_examples():
    assert corank(hyperbolic_space(QQ, 2)) == 0
    assert corank(diag(QQ, [1, 1, 1, 0])) == 1
    assert corank(diag(QQ, [1, 1, 0, 0])) == 2


def test_radical_examples():
    R = radical_basis(diag(QQ, [1, 1, 1, 0]))
    assert R.row_space() == rows(QQ, [0, 0, 0, 1])
    assert radical_basis(hyperbolic_space(QQ, 2)).rows == 0


@pytest.mark.parametrize("field", [QQ, FP])
def test_radical_of_conjugated_corank_two(field):
    rng = random.Random(4)
    H = hyperbolic_space(field, 2).gram
    G = field.zeros((6, 6))
    G[:4, :4] = H.a
    P = random_invertible(field, 6, rng)
    Q = QuadraticSpace(P.T @ Matrix(field, G) @ P)
    R = radical_basis(Q)
    assert R.rows == 2
    assert (Q.gram @ R.T).is_zero()
    # the radical is P^{-1} applied to the last two coordinate axes
    want = (P.inverse() @ Matrix.from_rows(field, [[0] * 4 + [1, 0], [0] * 5 + [1]]).T).T
    assert R.row_space() == want.row_space()
    p = field.p if field.is_prime else None
    assert oracles.nullity(oracles.as_int_rows(Q.gram), p) == 2


def test_max_isotropic_on_standard_hyperbolic():
    Q = hyperbolic_space(QQ, 2)  # e1, f1, e2, f2
    W0 = max_isotropic_basis(Q, 0)
    W1 = max_isotropic_basis(Q, 1)
    assert W0.basis.row_space() == rows(QQ, [1, 0, 0, 0], [0, 0, 1, 0])
    assert W1.basis.row_space() == rows(QQ, [1, 0, 0, 0], [0, 0, 0, 1])


def test_max_isotropic_diag_over_f7():
    # diag(1, -1, 1, -1) is split over every odd prime field
    Q = diag(F7, [1, 6, 1, 6])
    W = max_isotropic_basis(Q)
    assert W.dim == 2
    assert (W.basis @ Q.gram @ W.basis.T).is_zero()


def test_max_isotropic_corank_one_contains_radical():
    G = Field.rationals().zeros((4, 4))
    G[0, 1] = G[1, 0] = 1
    G[2, 2] = 1
    Q = QuadraticSpace(Matrix(QQ, G))
    W = max_isotropic_basis(Q)
    assert W.dim == 2
    assert (W.basis @ Q.gram @ W.basis.T).is_zero()
    assert W.basis.vstack(rows(QQ, [0, 0, 0, 1])).rank() == 2


def test_nonsplit_form_is_reported():
    # x^2 + y^2 + z^2 + w^2 over F_3 has Witt index 2, but 1 + 1 = 2 is a
    # non-square, so diag(1, 1, 1, 2) has Witt index 1 there
    Q = diag(Field.fp(3), [1, 1, 1, 2])
    with pytest.raises(NotSplit):
        max_isotropic_basis(Q)


def test_same_family_examples():
    Q = hyperbolic_space(QQ, 2)
    E = IsotropicSubspace.from_rows(Q, [[1, 0, 0, 0], [0, 0, 1, 0]])
    Fs = IsotropicSubspace.from_rows(Q, [[0, 1, 0, 0], [0, 0, 0, 1]])
    mixed = IsotropicSubspace.from_rows(Q, [[0, 1, 0, 0], [0, 0, 1, 0]])
    assert same_family(E, E)
    assert same_family(E, Fs)
    assert not same_family(E, mixed)
    # the lemma composition scalar for E, F is nonzero exactly because they share a family
    assert lemma_iso_maps(E, Fs).scalar != 0


@given(st.integers(2, 4), st.integers(0, 2**32))
def test_family_is_an_equivalence_with_two_classes(n, seed):
    Q = random_split_space(n, FP, seed % 1000)
    rng = random.Random(seed)
    Ws = [random_isotropic(Q, rng, family_hint=rng.randrange(2)) for _ in range(5)]
    ref = Ws[0]
    labels = [same_family(ref, W) for W in Ws]
    for a in range(5):
        for b in range(5):
            assert same_family(Ws[a], Ws[b]) == (labels[a] == labels[b])
    assert same_family(random_isotropic(Q, rng, family_hint=0), random_isotropic(Q, rng, family_hint=1)) is False


@given(st.integers(2, 4), st.sampled_from([0, 1, 2]), st.integers(0, 2**32))
def test_isotropy_and_radical_containment(n, c, seed):
    Q = random_split_space(n, FP, seed % 1000, corank=c)
    W = max_isotropic_basis(Q, seed % 2)
    assert (W.basis @ Q.gram @ W.basis.T).is_zero()
    R = radical_basis(Q)
    if c:
        assert W.basis.vstack(R).rank() == W.dim
    V = random_isotropic(Q, random.Random(seed))
    assert (V.basis @ Q.gram @ V.basis.T).is_zero()


def test_spinor_invariant_smooth():
    Q = random_split_space(3, FP, 2)
    for hint in (0, 1):
        inv = spinor_invariant(max_isotropic_basis(Q, hint))
        assert inv.radical_meet_dim == 0
        assert inv.family_bit == hint


def corank_two_plane_pair():
    # e, f hyperbolic; r1, r2 span the radical: two planes through the cone line
    G = QQ.zeros((4, 4))
    G[0, 1] = G[1, 0] = 1
    return QuadraticSpace(Matrix(QQ, G))


def test_spinor_invariant_line_on_plane_through_cone_point():
    Q = corank_two_plane_pair()
    W = IsotropicSubspace.from_rows(Q, [[1, 0, 0, 0], [0, 0, 1, 0]])
    inv = spinor_invariant(W)
    assert inv.radical_meet_dim == 1
    assert inv.family_bit == 0
    other_plane = IsotropicSubspace.from_rows(Q, [[0, 1, 0, 0], [0, 0, 1, 0]])
    assert spinor_invariant(other_plane).family_bit == 1


def test_lines_on_one_plane_through_one_point_agree():
    Q = corank_two_plane_pair()
    W = IsotropicSubspace.from_rows(Q, [[1, 0, 0, 0], [0, 0, 1, 0]])
    W2 = IsotropicSubspace.from_rows(Q, [[1, 0, 0, 3], [0, 0, 1, 0]])
    assert spinor_invariant(W) == spinor_invariant(W2)
    I = build_ideal(W)
    I2 = build_ideal(W2, I.algebra)
    assert module_hom_dim(I, I2) == 1
    C = oracles.CliffordOracle(oracles.as_int_rows(Q.gram))
    om = oracles.vector_product(C, oracles.as_int_rows(W.basis))
    om2 = oracles.vector_product(C, oracles.as_int_rows(W2.basis))
    assert oracles.module_hom_dim(C, om, om2) == 1


@given(st.integers(2, 4), st.sampled_from([0, 1, 2]), st.integers(0, 2**32))
def test_spinor_invariant_basis_independent(n, c, seed):
    Q = random_split_space(n, FP, seed % 1000, corank=c)
    rng = random.Random(seed)
    W = random_isotropic(Q, rng)
    change = random_invertible(FP, W.dim, rng)
    assert spinor_invariant(W) == spinor_invariant(W.rebased(change))


def test_completions_lie_in_opposite_families():
    Q = random_split_space(3, FP, 5)
    W = random_isotropic(Q, random.Random(1), dim=2)
    W1, W2 = isotropic_completions(W)
    assert not same_family(W1, W2)
    for X in (W1, W2):
        assert X.basis.vstack(W.basis).rank() == 3


def test_random_system_determinism_and_shape():
    a = random_system(4, 4, FP, 42)
    b = random_system(4, 4, FP, 42)
    assert [Q.gram for Q in a] == [Q.gram for Q in b]
    assert len(a) == 4
    for Q in a:
        assert Q.gram.shape == (8, 8) and Q.gram.is_symmetric()


def test_generated_pencils_mostly_squarefree():
    good = sum(poly_is_squarefree(discriminant(LinearSystem(tuple(random_system(4, 2, FP, s))), verify_points=2)) for s in range(100))
    assert good >= 95


def test_random_quadratic_space_corank():
    for c in (0, 1, 2):
        assert corank(random_quadratic_space(3, FP, 7, corank=c)) == c


# ---------------------------------------------------------------------------
# system JSON


@pytest.mark.parametrize("field", [FP, QQ])
def test_system_json_roundtrip(field):
    forms = random_system(3, 3, field, 9)
    obj = json.loads(json.dumps(system_to_json(forms)))
    n, m, f, back = parse_system(obj)
    assert (n, m, f) == (3, 3, field)
    assert [Q.gram for Q in back] == [Q.gram for Q in forms]


def test_rational_entries_as_strings():
    g = ["1/2", 0, 0, 0, 0, "-3/4", 0, 0, 0, 0, 1, 0, 0, 0, 0, 1]
    obj = {"n": 2, "m": 2, "field": {"kind": "q"}, "gram": [g, [1] + [0] * 14 + [1]]}
    _, _, _, forms = parse_system(obj)
    assert forms[0].gram.a[0, 0] == QQ("1/2")
    assert system_to_json(forms)["gram"][0][:6] == ["1/2", 0, 0, 0, 0, "-3/4"]


@pytest.mark.parametrize(
    "mutate, message",
    [
        (lambda o: o["gram"][0].__setitem__(1, 5), "not symmetric"),
        (lambda o: o.__setitem__("n", 5), "n must be"),
        (lambda o: o.__setitem__("field", {"kind": "fp", "p": 2}), "characteristic 2"),
        (lambda o: o["gram"][0].__setitem__(0, 1.5), "integers or"),
        (lambda o: o["gram"].pop(), "list of 2"),
        (lambda o: o.pop("field"), "missing key"),
    ],
)
def test_parser_rejections(mutate, message):
    obj = system_to_json(random_system(2, 2, Field.fp(11), 0))
    mutate(obj)
    with pytest.raises(SystemFormatError, match=message):
        parse_system(obj)


def test_parser_byte_offset_counts_utf8():
    text = '{"n": 2, "é": [1,, 2]}'
    with pytest.raises(SystemFormatError, match="byte offset 18"):
        parse_system(text)
    assert text.encode().index(b",,") + 1 == 18
