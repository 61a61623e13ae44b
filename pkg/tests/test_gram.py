import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hytet import gram
from hytet.errors import RealizabilityError, ShapeError
from hytet.gram import MINKOWSKI, Shape
from samples import random_lengths

SAMPLE = random_lengths(40, seed=3)


def hyperboloid_angles(l):
    """Dihedral angles straight from embedded vertices: outward face normals on the hyperboloid."""
    v = gram.embed_vertices(l)
    normals = []
    for i in range(4):
        others = [v[k] for k in range(4) if k != i]
        # n is Minkowski-orthogonal to the three vertices of face i
        a = np.array([o @ MINKOWSKI for o in others])
        n = np.linalg.svd(a)[2][-1]
        n = n / math.sqrt(n @ MINKOWSKI @ n)
        if n @ MINKOWSKI @ v[i] > 0:  # outward: away from the opposite vertex
            n = -n
        normals.append(n)
    return tuple(math.acos(-(normals[r] @ MINKOWSKI @ normals[s])) for r, s in gram.FACE_PAIRS)


def test_labeling_tables_are_consistent():
    # edge k joins vertices VERTEX_PAIRS[k]; its faces are the two opposite the other two vertices
    for (p, q), (r, s) in zip(gram.VERTEX_PAIRS, gram.FACE_PAIRS):
        assert {p, q} | {r, s} == {0, 1, 2, 3}
    opposite = [(0, 3), (1, 4), (2, 5)]
    for i, j in opposite:
        assert not set(gram.VERTEX_PAIRS[i]) & set(gram.VERTEX_PAIRS[j])


@pytest.mark.parametrize("l", SAMPLE[:10])
def test_lengths_to_angles_matches_hyperboloid_normals(l):
    assert gram.lengths_to_angles(l) == pytest.approx(hyperboloid_angles(l), abs=1e-9)


def test_regular_angle_closed_form():
    for rho in (0.1, 1.0, 3.0):
        c = math.cosh(rho)
        expected = math.acos(c / (2 * c + 1))
        assert gram.lengths_to_angles([rho] * 6) == pytest.approx([expected] * 6, abs=1e-13)
    assert gram.lengths_to_angles([1] * 6)[0] == pytest.approx(1.1835546602, abs=1e-10)


@pytest.mark.parametrize("l", SAMPLE)
def test_roundtrips(l):
    a = gram.lengths_to_angles(l)
    assert gram.angles_to_lengths(a) == pytest.approx(l, abs=1e-9)
    assert gram.lengths_to_angles(gram.angles_to_lengths(a)) == pytest.approx(a, abs=1e-9)


@pytest.mark.parametrize("l", SAMPLE[:10])
def test_cofactor_identity(l):
    for m in (gram.gram_from_lengths(l).entries, gram.gram_from_angles(gram.lengths_to_angles(l)).entries):
        c = gram.cofactors(m)
        assert m @ c.T == pytest.approx(np.linalg.det(m) * np.eye(4), abs=1e-10)
        assert gram.det4(m) == pytest.approx(np.linalg.det(m), abs=1e-12)


@pytest.mark.parametrize("rho", [1e-1, 1e-2, 1e-3, 1e-4])
def test_short_edge_det_and_cofactors_are_accurate(rho):
    mpmath.mp.dps = 50
    try:
        ch = mpmath.cosh(mpmath.mpf(rho))
        g = mpmath.matrix(4, 4)
        for i in range(4):
            for j in range(4):
                g[i, j] = -1 if i == j else -ch
        exact_det = float(mpmath.det(g))
        minor = mpmath.matrix([[g[r, c] for c in (0, 2, 3)] for r in (1, 2, 3)])
        exact_c01 = float(-mpmath.det(minor))
    finally:
        mpmath.mp.dps = 15
    assert gram.det_length_gram([rho] * 6) == pytest.approx(exact_det, rel=1e-9)
    assert gram.length_cofactors([rho] * 6)[0, 1] == pytest.approx(exact_c01, rel=1e-9)


symmetric4 = st.lists(st.floats(-10, 10, allow_nan=False), min_size=10, max_size=10)


@given(symmetric4)
@settings(max_examples=200)
def test_jacobi_matches_numpy(vals):
    m = np.zeros((4, 4))
    m[np.triu_indices(4)] = vals
    m = m + np.triu(m, 1).T
    w, v = gram.jacobi_eigh(m)
    scale = max(1.0, np.abs(m).max())
    assert w == pytest.approx(np.linalg.eigvalsh(m), abs=1e-12 * scale)
    assert v @ np.diag(w) @ v.T == pytest.approx(m, abs=1e-12 * scale)
    assert v.T @ v == pytest.approx(np.eye(4), abs=1e-12)


@pytest.mark.parametrize("l", SAMPLE[:10])
def test_embedding_reproduces_gram(l):
    v = gram.embed_vertices(l)
    assert (v[:, 3] > 0).all()
    assert gram.minkowski_gram(v) == pytest.approx(gram.gram_from_lengths(l).entries, abs=1e-9)
    b = gram.boost_to_origin(v)
    assert gram.minkowski_gram(b) == pytest.approx(gram.minkowski_gram(v), abs=1e-9)
    assert b.sum(axis=0)[:3] == pytest.approx(np.zeros(3), abs=1e-9)
    k = gram.to_klein(b)
    assert (np.linalg.norm(k, axis=1) < 1).all()


@pytest.mark.parametrize("angles, shape", [
    ([math.acos(1 / 3)] * 6, Shape.EUCLIDEAN),
    ([math.pi / 2] * 6, Shape.SPHERICAL),
    ([2 * math.pi / 3] * 6, Shape.SPHERICAL),
    ([1.1] * 6, Shape.HYPERBOLIC),
    ([math.pi / 3 + 1e-4] * 6, Shape.HYPERBOLIC),
    ([math.pi / 3] * 6, Shape.NOT_REALIZABLE),  # ideal: vertex cofactors vanish
    ([0.3] * 6, Shape.NOT_REALIZABLE),  # hyperideal vertices
    ([2.9, 0.1, 0.1, 2.9, 0.1, 0.1], Shape.NOT_REALIZABLE),
])
def test_classify(angles, shape):
    assert gram.classify(angles) is shape


def test_angles_to_lengths_refuses_non_hyperbolic():
    with pytest.raises(ShapeError):
        gram.angles_to_lengths([math.pi / 2] * 6)


@pytest.mark.parametrize("l", [
    (1, 1, 1, 1, 1, 9),  # one edge longer than the triangle inequality allows
    (0.1, 0.1, 0.1, 5, 5, 5),
])
def test_unrealizable_lengths(l):
    with pytest.raises(RealizabilityError):
        gram.lengths_to_angles(l)


@pytest.mark.parametrize("bad", [(1, 1, 1, 1, 1), (1, 1, 1, 1, 1, math.nan)])
def test_malformed_input(bad):
    with pytest.raises(ValueError):
        gram.check_lengths(bad)


def test_out_of_range_values():
    with pytest.raises(RealizabilityError):
        gram.check_lengths((1, 1, 1, 1, 1, -1))
    with pytest.raises(RealizabilityError):
        gram.check_angles((1, 1, 1, 1, 1, math.pi))


@pytest.mark.parametrize("l", SAMPLE[:5])
def test_relabeling_commutes_with_conversion(l):
    a = gram.lengths_to_angles(l)
    for perm, lp in gram.all_relabelings(l):
        assert gram.lengths_to_angles(lp) == pytest.approx(gram.relabel(a, perm), abs=1e-12)


def test_relabel_swaps_vertex_pair():
    # swapping vertices 1 and 2 exchanges edges (2,4)<->(1,4) and (1,3)<->(2,3)
    vals = (1, 2, 3, 4, 5, 6)
    assert gram.relabel(vals, (1, 0, 2, 3)) == (1, 3, 2, 4, 6, 5)
