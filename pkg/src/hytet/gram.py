"""Gram matrices, angle/length conversion and the hyperboloid embedding.

Labeling (fixed everywhere in the package).  Vertices are numbered 1..4 and
face ``i`` is the face opposite vertex ``i``.  Edge length ``l_k`` and dihedral
angle ``A_k`` live on the same edge:

====  ===============  =================
 k    vertex pair      face pair (angle)
====  ===============  =================
 1    (3, 4)           (1, 2)
 2    (2, 4)           (1, 3)
 3    (1, 4)           (2, 3)
 4    (1, 2)           (3, 4)
 5    (1, 3)           (2, 4)
 6    (2, 3)           (1, 4)
====  ===============  =================

Opposite edges are (1, 4), (2, 5) and (3, 6).
"""
from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import RealizabilityError, ShapeError

# zero-based index pairs
VERTEX_PAIRS = ((2, 3), (1, 3), (0, 3), (0, 1), (0, 2), (1, 2))
FACE_PAIRS = ((0, 1), (0, 2), (1, 2), (2, 3), (1, 3), (0, 3))

MINKOWSKI = np.diag([1.0, 1.0, 1.0, -1.0])


class Flavor(enum.Enum):
    ANGLE = "angle"
    LENGTH = "length"


class Shape(enum.Enum):
    HYPERBOLIC = "Hyperbolic"
    EUCLIDEAN = "Euclidean"
    SPHERICAL = "Spherical"
    NOT_REALIZABLE = "NotRealizable"


@dataclass(frozen=True)
class Gram4:
    entries: np.ndarray
    flavor: Flavor

    @property
    def det(self) -> float:
        return det4(self.entries)


def as_six(values: Sequence[float], what: str = "values") -> tuple[float, ...]:
    vals = tuple(float(v) for v in values)
    if len(vals) != 6:
        raise ValueError(f"expected six {what}, got {len(vals)}")
    if not all(math.isfinite(v) for v in vals):
        raise ValueError(f"{what} must be finite")
    return vals


def check_angles(a: Sequence[float]) -> tuple[float, ...]:
    a = as_six(a, "angles")
    if not all(0 < x < math.pi for x in a):
        raise RealizabilityError(f"dihedral angles must lie in (0, pi): {a}")
    return a


def check_lengths(l: Sequence[float]) -> tuple[float, ...]:
    l = as_six(l, "lengths")
    if not all(x > 0 for x in l):
        raise RealizabilityError(f"edge lengths must be positive: {l}")
    return l


def _fill(diag: float, pairs, values) -> np.ndarray:
    g = np.full((4, 4), 0.0)
    np.fill_diagonal(g, diag)
    for (i, j), v in zip(pairs, values):
        g[i, j] = g[j, i] = v
    return g


def gram_from_angles(a: Sequence[float]) -> Gram4:
    a = check_angles(a)
    return Gram4(_fill(1.0, FACE_PAIRS, [-math.cos(x) for x in a]), Flavor.ANGLE)


def gram_from_lengths(l: Sequence[float]) -> Gram4:
    l = check_lengths(l)
    return Gram4(_fill(-1.0, VERTEX_PAIRS, [-math.cosh(x) for x in l]), Flavor.LENGTH)


def _det3(m) -> float:
    return float(
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    )


_OTHERS = tuple(tuple(k for k in range(4) if k != i) for i in range(4))


def cofactors(g: Gram4 | np.ndarray) -> np.ndarray:
    """Cofactor matrix ``c_ij = (-1)^(i+j) det(minor_ij)`` (works for singular g)."""
    m = np.asarray(g.entries if isinstance(g, Gram4) else g, dtype=float).tolist()
    c = [[0.0] * 4 for _ in range(4)]
    for i, rows in enumerate(_OTHERS):
        for j, cols in enumerate(_OTHERS):
            minor = [[m[r][k] for k in cols] for r in rows]
            c[i][j] = (-1) ** (i + j) * _det3(minor)
    return np.array(c)


def det4(m: np.ndarray) -> float:
    m = np.asarray(m, dtype=float).tolist()
    rest = m[1:]
    return float(sum((-1) ** j * m[0][j] * _det3([[row[k] for k in _OTHERS[j]] for row in rest])
                     for j in range(4)))


def det_length_gram(l: Sequence[float]) -> float:
    """det G_l evaluated without the cancellation that plain expansion suffers.

    Writes ``G_l = -(J + E)`` with ``E_ij = 2 sinh^2(l_ij / 2)`` (zero diagonal)
    and uses ``det(J + E) = det E + 1^T adj(E) 1``.
    """
    l = check_lengths(l)
    e = _fill(0.0, VERTEX_PAIRS, [2 * math.sinh(x / 2) ** 2 for x in l])
    return det4(e) + float(cofactors(e).sum())


def _det_plus_ones3(m: np.ndarray) -> float:
    # det(m + 1 1^T) = det m + 1^T adj(m) 1
    adj_sum = (
        m[1, 1] * m[2, 2] - m[1, 2] * m[2, 1] - m[0, 1] * m[2, 2] + m[0, 2] * m[2, 1]
        + m[0, 1] * m[1, 2] - m[0, 2] * m[1, 1] - m[1, 0] * m[2, 2] + m[1, 2] * m[2, 0]
        + m[0, 0] * m[2, 2] - m[0, 2] * m[2, 0] - m[0, 0] * m[1, 2] + m[0, 2] * m[1, 0]
        + m[1, 0] * m[2, 1] - m[1, 1] * m[2, 0] - m[0, 0] * m[2, 1] + m[0, 1] * m[2, 0]
        + m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
    )
    return _det3(m) + float(adj_sum)


def length_cofactors(l: Sequence[float]) -> np.ndarray:
    """Cofactor matrix of G_l, accurate for short edges (same trick as :func:`det_length_gram`)."""
    l = check_lengths(l)
    e = _fill(0.0, VERTEX_PAIRS, [2 * math.sinh(x / 2) ** 2 for x in l])
    c = np.empty((4, 4))
    for i in range(4):
        rows = [r for r in range(4) if r != i]
        for j in range(4):
            cols = [k for k in range(4) if k != j]
            # minors of G_l = -(J + E) pick up (-1)^3
            c[i, j] = -((-1) ** (i + j)) * _det_plus_ones3(e[np.ix_(rows, cols)])
    return c


def jacobi_eigh(a: np.ndarray, tol: float = 1e-15, max_sweeps: int = 50):
    """Eigen-decomposition of a small real symmetric matrix by cyclic Jacobi.

    Returns ``(w, v)`` with ascending eigenvalues and orthonormal columns.
    """
    # plain lists: for 4x4 input numpy call overhead dominates the arithmetic
    a = np.array(a, dtype=float).tolist()
    n = len(a)
    v = [[float(i == j) for j in range(n)] for i in range(n)]
    scale = max(abs(x) for row in a for x in row) or 1.0
    for _ in range(max_sweeps):
        off = math.sqrt(sum(a[p][q] ** 2 for p in range(n) for q in range(p + 1, n)))
        if off <= tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                if a[p][q] == 0.0:
                    continue
                theta = (a[q][q] - a[p][p]) / (2 * a[p][q])
                t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1))
                c = 1 / math.sqrt(t * t + 1)
                s = t * c
                # a <- R^T a R, v <- v R with R the (p, q) plane rotation
                for m in (a, v):
                    for row in m:
                        rp, rq = row[p], row[q]
                        row[p] = c * rp - s * rq
                        row[q] = s * rp + c * rq
                ap, aq = a[p], a[q]
                a[p] = [c * x - s * y for x, y in zip(ap, aq)]
                a[q] = [s * x + c * y for x, y in zip(ap, aq)]
                a[p][q] = a[q][p] = 0.0
    w = np.array([a[i][i] for i in range(n)])
    order = np.argsort(w)
    return w[order], np.array(v)[:, order]


def signature(m: np.ndarray, rel_tol: float = 1e-10) -> tuple[int, int, int]:
    """(positive, negative, degenerate) eigenvalue counts."""
    w, _ = jacobi_eigh(m)
    cut = rel_tol * np.linalg.norm(m)
    return int((w > cut).sum()), int((w < -cut).sum()), int((np.abs(w) <= cut).sum())


def classify(a: Sequence[float]) -> Shape:
    """Geometry of the tetrahedron with dihedral angles ``a``.

    The determinant sign picks the candidate geometry; realizability then asks
    for the matching eigenvalue signature and positive cofactors (all of them
    for the hyperbolic case, which also rules out ideal and hyperideal vertices).
    """
    g = gram_from_angles(a).entries
    det = det4(g)
    eps = 1e-10 * np.linalg.norm(g) ** 4
    c = cofactors(g)
    pos, neg, _ = signature(g)
    if det < -eps:
        if pos == 3 and neg == 1 and (c > 0).all():
            return Shape.HYPERBOLIC
        return Shape.NOT_REALIZABLE
    if abs(det) <= eps:
        if neg == 0 and (np.diag(c) > 0).all():
            return Shape.EUCLIDEAN
        return Shape.NOT_REALIZABLE
    if pos == 4 and (np.diag(c) > 0).all():
        return Shape.SPHERICAL
    return Shape.NOT_REALIZABLE


def _require_length_signature(g: np.ndarray) -> None:
    pos, neg, zero = signature(g)
    if (pos, neg, zero) != (3, 1, 0):
        raise RealizabilityError(f"length Gram matrix has signature ({pos}, {neg}, {zero}), need (3, 1)")


def angles_to_lengths(a: Sequence[float]) -> tuple[float, ...]:
    """Edge lengths from dihedral angles: cosh l = c_pq / sqrt(c_pp c_qq)."""
    shape = classify(a)
    if shape is not Shape.HYPERBOLIC:
        raise ShapeError(f"angles describe a {shape.value} tetrahedron, need Hyperbolic")
    c = cofactors(gram_from_angles(a))
    d = np.diag(c)
    if not (d > 0).all():
        raise RealizabilityError("vertex cofactors must be positive for a compact tetrahedron")
    out = []
    for p, q in VERTEX_PAIRS:
        ratio = c[p, q] / math.sqrt(d[p] * d[q])
        if ratio < 1:
            raise RealizabilityError(f"cofactor ratio {ratio} < 1")
        out.append(math.acosh(ratio))
    return tuple(out)


def lengths_to_angles(l: Sequence[float]) -> tuple[float, ...]:
    """Dihedral angles from edge lengths: cos A = c_rs / sqrt(c_rr c_ss)."""
    g = gram_from_lengths(l).entries
    _require_length_signature(g)
    c = length_cofactors(l)
    d = np.diag(c)
    # det G_l < 0, so <u_i, v_i>^2 = det/c_ii > 0 forces c_ii < 0
    if not (d < 0).all():
        raise RealizabilityError("diagonal cofactors of G_l must be negative")
    out = []
    for r, s in FACE_PAIRS:
        ratio = c[r, s] / math.sqrt(d[r] * d[s])
        if abs(ratio) > 1:
            raise RealizabilityError(f"|cos A| = {abs(ratio)} > 1")
        out.append(math.acos(ratio))
    return tuple(out)


def embed_vertices(l: Sequence[float]) -> np.ndarray:
    """Vertices on the upper hyperboloid realizing G_l.

    Returns a 4x4 array whose rows are vertices ``(x, y, z, t)`` with
    ``<v_i, v_j> = -cosh l`` and ``t > 0``.
    """
    g = gram_from_lengths(l).entries
    w, q = jacobi_eigh(g)
    cut = 1e-10 * np.linalg.norm(g)
    if not (w[0] < -cut and (w[1:] > cut).all()):
        raise RealizabilityError(f"length Gram matrix eigenvalues {w} do not have signature (3, 1)")
    # ascending order puts the single negative eigenvalue first -> time coordinate
    coords = np.sqrt(np.abs(w))[:, None] * q.T
    x = np.vstack([coords[1:], coords[:1]]).T
    if x[0, 3] < 0:
        x[:, 3] = -x[:, 3]
    return x


def minkowski_gram(v: np.ndarray) -> np.ndarray:
    return v @ MINKOWSKI @ v.T


def boost_to_origin(v: np.ndarray) -> np.ndarray:
    """Apply the Lorentz boost that moves the normalized vertex barycenter to (0,0,0,1)."""
    c = v.sum(axis=0)
    c = c / math.sqrt(-(c @ MINKOWSKI @ c))
    x, gamma = c[:3], c[3]
    r = np.linalg.norm(x)
    if r == 0:
        return v.copy()
    n = x / r
    b = np.eye(4)
    b[:3, :3] += (gamma - 1) * np.outer(n, n)
    b[:3, 3] = -r * n
    b[3, :3] = -r * n
    b[3, 3] = gamma
    return v @ b.T


def to_klein(v: np.ndarray) -> np.ndarray:
    """Central projection of hyperboloid points into the Klein ball."""
    v = np.asarray(v, dtype=float)
    return v[..., :3] / v[..., 3:4]


def _edge_permutation(perm: Sequence[int]) -> list[int]:
    lookup = {frozenset(p): k for k, p in enumerate(VERTEX_PAIRS)}
    return [lookup[frozenset((perm[i], perm[j]))] for i, j in VERTEX_PAIRS]


def relabel(values: Sequence[float], perm: Sequence[int]) -> tuple[float, ...]:
    """Six edge values after renumbering vertices: new vertex i is old vertex perm[i].

    Angles and lengths transform the same way because an edge and its angle
    share an index.
    """
    vals = as_six(values)
    return tuple(vals[k] for k in _edge_permutation(perm))


def all_relabelings(values: Sequence[float]):
    for perm in itertools.permutations(range(4)):
        yield perm, relabel(values, perm)
