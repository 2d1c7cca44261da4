"""Sampling helpers shared by the test modules."""

from quadspin.exactalg import Matrix
from quadspin.quadforms import random_isotropic


def random_point_on(Q, rng, avoid=None):
    """A random nonzero isotropic vector, from a random maximal isotropic.

    With ``avoid`` the vector is kept outside the row span of that matrix.
    """
    fr = Q.hyperbolic_frame()
    W = random_isotropic(Q, rng, dim=fr.witt_index + fr.rad.rows, family_hint=rng.randrange(2))
    while True:
        coef = [Q.field.random(rng) for _ in range(W.dim)]
        v = Q.field.norm(sum(c * r for c, r in zip(coef, W.basis.a)))
        if any(v) and (avoid is None or Matrix.from_rows(Q.field, list(avoid.a) + [v]).rank() > avoid.rows):
            return v
