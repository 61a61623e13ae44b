"""Formula-free hyperbolic volumes by adaptive cubature in the Klein model.

The Klein model maps hyperbolic tetrahedra to Euclidean ones; the volume is
the integral of ``(1 - |x|^2)^-2`` over that Euclidean tetrahedron.  Cells are
bisected along their longest edge until the difference between a cell's rule
value and the sum over its two halves drops below its share of the tolerance.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from . import gram
from .errors import ConvergenceError, RealizabilityError

BOUNDARY_GAP = 1e-8


@dataclass(frozen=True)
class QuadratureSpec:
    rel_tol: float = 1e-8
    max_subdivisions: int = 2_000_000
    rule: str = "degree5"

    def __post_init__(self):
        if self.rel_tol < 1e-12:
            raise ValueError("rel_tol below 1e-12 is not supported")
        if self.rule not in _RULES:
            raise ValueError(f"unknown rule {self.rule!r}; choose from {sorted(_RULES)}")


def grundmann_moeller(s: int, n: int = 3) -> tuple[np.ndarray, np.ndarray]:
    """Barycentric points and weights (summing to 1) of the degree 2s+1 rule."""
    d = 2 * s + 1
    pts, wts = [], []
    for i in range(s + 1):
        w = (-1) ** i * 2.0 ** (-2 * s) * (d + n - 2 * i) ** d / (
            math.factorial(i) * math.factorial(d + n - i))
        for beta in _compositions(s - i, n + 1):
            pts.append([(2 * b + 1) / (d + n - 2 * i) for b in beta])
            wts.append(w)
    wts = np.array(wts) * math.factorial(n)
    return np.array(pts), wts


def _compositions(total: int, parts: int):
    for cut in itertools.combinations(range(total + parts - 1), parts - 1):
        prev = -1
        out = []
        for c in cut:
            out.append(c - prev - 1)
            prev = c
        out.append(total + parts - 2 - prev)
        yield out


_RULES = {
    "degree5": grundmann_moeller(2),
    "midpoint": (np.full((1, 4), 0.25), np.ones(1)),
}


def klein_density(x: np.ndarray) -> np.ndarray:
    r2 = np.einsum("...i,...i->...", x, x)
    return 1.0 / (1.0 - r2) ** 2


def _euclid_volumes(cells: np.ndarray) -> np.ndarray:
    e = cells[:, 1:, :] - cells[:, :1, :]
    return np.abs(np.linalg.det(e)) / 6.0


def _apply_rule(cells: np.ndarray, rule) -> np.ndarray:
    bary, wts = rule
    pts = np.einsum("pk,nkd->npd", bary, cells)
    return _euclid_volumes(cells) * (klein_density(pts) @ wts)


def _bisect(cells: np.ndarray) -> np.ndarray:
    """Split every cell at the midpoint of its longest edge; children interleaved."""
    pairs = np.array(list(itertools.combinations(range(4), 2)))
    lens = np.linalg.norm(cells[:, pairs[:, 0]] - cells[:, pairs[:, 1]], axis=-1)
    which = pairs[np.argmax(lens, axis=1)]
    n = len(cells)
    rows = np.arange(n)
    mid = 0.5 * (cells[rows, which[:, 0]] + cells[rows, which[:, 1]])
    a = cells.copy()
    b = cells.copy()
    a[rows, which[:, 1]] = mid
    b[rows, which[:, 0]] = mid
    out = np.empty((2 * n, 4, 3))
    out[0::2] = a
    out[1::2] = b
    return out


def integrate_klein_stats(points: np.ndarray, spec: QuadratureSpec = QuadratureSpec()) -> tuple[float, int]:
    """(volume, number of cells evaluated) for a Klein-model tetrahedron."""
    pts = np.asarray(points, dtype=float).reshape(4, 3)
    if np.any(1.0 - np.linalg.norm(pts, axis=1) <= BOUNDARY_GAP):
        raise RealizabilityError("Klein vertex too close to the ideal boundary")
    rule = _RULES[spec.rule]
    total_vol = float(_euclid_volumes(pts[None])[0])
    if total_vol == 0:
        raise RealizabilityError("degenerate (flat) tetrahedron")
    cells = pts[None]
    coarse = _apply_rule(cells, rule)
    accepted = 0.0
    used = 1
    while len(cells):
        kids = _bisect(cells)
        fine_kids = _apply_rule(kids, rule)
        used += len(kids)
        fine = fine_kids[0::2] + fine_kids[1::2]
        err = np.abs(fine - coarse)
        estimate = accepted + fine.sum()
        share = spec.rel_tol * abs(estimate) * _euclid_volumes(cells) / total_vol
        done = err <= share
        accepted += float(fine[done].sum())
        keep = np.repeat(~done, 2)
        cells = kids[keep]
        coarse = fine_kids[keep]
        if used > spec.max_subdivisions and len(cells):
            raise ConvergenceError(f"subdivision budget {spec.max_subdivisions} exhausted")
    return accepted, used


def integrate_klein(points: np.ndarray, spec: QuadratureSpec = QuadratureSpec()) -> float:
    return integrate_klein_stats(points, spec)[0]


def klein_tetrahedron(l: Sequence[float]) -> np.ndarray:
    """Klein-model vertices of the tetrahedron with edge lengths ``l``, centered at the origin."""
    return gram.to_klein(gram.boost_to_origin(gram.embed_vertices(l)))


def oracle_volume_from_lengths(l: Sequence[float], spec: QuadratureSpec = QuadratureSpec()) -> float:
    return integrate_klein(klein_tetrahedron(l), spec)


def regular_fixtures(rho: float) -> dict:
    """Closed-form quantities for the regular tetrahedron with edge length ``rho``.

    Keys: ``z_minus``, ``z_plus``, the three ``arg_*`` values, the per-edge
    angle expression ``edge_angle`` (arctan form of the dihedral angle) and
    ``limit_ratio`` whose value tends to 2 sqrt 2 as rho -> 0.

    The ``arg_*`` entries are the arctan closed forms as written for ``z_minus``.
    An arctan only fixes an angle modulo pi, and these carry the opposite sign:
    they equal ``arg(1 - w z_plus)`` modulo pi, i.e. ``-arg(1 - w z_minus)``.
    """
    if not rho > 0:
        raise ValueError("rho must be positive")
    c, s, e = math.cosh(rho), math.sinh(rho), math.exp(rho)
    den = 2 * math.exp(4 * rho) * (2 * c - s + 1)
    im = math.sqrt((c - 1) * (3 * c + 1))
    root = math.sqrt(3 * e * e + 2 * e + 3)
    ratio = math.sqrt((c + 1) * (3 * c + 1)) / c
    return {
        "z_minus": complex(3 * (c + 1), -im) / den,
        "z_plus": complex(3 * (c + 1), im) / den,
        "arg_1_minus_z": math.atan(-root / (2 * e ** 5 + 6 * e ** 4 + 12 * e ** 3 + 12 * e ** 2 + 9 * e + 3)),
        "arg_1_minus_e4z": math.atan(root / (e + 3)),
        "arg_1_minus_e3z": math.atan(-root / (2 * e * e + 3 * e + 3)),
        "edge_angle": math.atan(ratio),
        "limit_ratio": ratio,
        "limit_ratio_at_0": 2 * math.sqrt(2),
    }


# --- golden values -------------------------------------------------------------

GOLDEN_PATH = Path(__file__).with_name("golden.txt")


@dataclass(frozen=True)
class GoldenRecord:
    lengths: tuple[float, ...]
    volume: float
    rel_tol: float
    cells: int

    def format(self) -> str:
        key = ",".join(repr(x) for x in self.lengths)
        return f"{key}  {self.volume!r}  {self.rel_tol!r}  {self.cells}"


def parse_golden(text: str) -> list[GoldenRecord]:
    """Parse ``lengths  volume  rel_tol  cells`` lines; ``#`` starts a comment.

    ``lengths`` is either one number (regular tetrahedron) or six
    comma-separated numbers.
    """
    out = []
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, vol, tol, cells = line.split()
        vals = tuple(float(x) for x in key.split(","))
        if len(vals) == 1:
            vals = vals * 6
        out.append(GoldenRecord(vals, float(vol), float(tol), int(cells)))
    return out


def load_golden(path: Path | str = GOLDEN_PATH) -> list[GoldenRecord]:
    return parse_golden(Path(path).read_text())


def make_golden(lengths: Sequence[float], spec: QuadratureSpec = QuadratureSpec()) -> GoldenRecord:
    l = gram.check_lengths(lengths)
    vol, cells = integrate_klein_stats(klein_tetrahedron(l), spec)
    return GoldenRecord(l, vol, spec.rel_tol, cells)
