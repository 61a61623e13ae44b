"""Volume of a hyperbolic tetrahedron from dihedral angles or edge lengths.

Both routes go through the same dilogarithm potential

    U(a, z) = sum_k  s_k Li2(c_k(a) z)

over eight monomials ``c_k`` in the six parameters ``a``, evaluated at the two
non-trivial critical points ``z-`` and ``z+`` (roots of ``q2 z^2 + q1 z + q0``).
With ``F(z) = U(z) - z U_z(z) log z`` the potential is ``V = (i/4)(F(z-) - F(z+))``.

* angles:  a_k = exp(i A_k);  Vol = -Re V  (hyperbolic), Im V (spherical).
* lengths: a = -exp(l_4, l_5, l_6, l_1, l_2, l_3);
  Vol = V - sum_i l_i dV/dl_i.

All logs and dilogs are principal (see :mod:`hytet.dilog`).  When the
principal evaluation fails its own diagnostics the length route falls back to
continuing every branch from a regular tetrahedron of similar size.
"""
from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Sequence

from . import gram
from .dilog import Li2Sheet, LogSheet, clog, li2
from .errors import (
    BranchIntegrityError,
    ContinuationError,
    DegenerateError,
    DomainError,
    EvaluationError,
    NumericalError,
    ShapeError,
)
from .gram import Shape

TWO_PI = 2 * math.pi

# Li2 terms of U: (sign, parameter indices); the monomial is prod(a) for the
# positive terms and -prod(a) for the negative ones.
TERMS = (
    (+1, ()),
    (+1, (0, 1, 3, 4)),
    (+1, (0, 2, 3, 5)),
    (+1, (1, 2, 4, 5)),
    (-1, (0, 1, 2)),
    (-1, (0, 4, 5)),
    (-1, (1, 3, 5)),
    (-1, (2, 3, 4)),
)
# l_i feeds parameter slot LENGTH_SLOT[i]
LENGTH_SLOT = (3, 4, 5, 0, 1, 2)

FORMULA_TOL = 1e-8
ORACLE_TOL = 1e-6
RESIDUE_SNAP = 1e-6
RESIDUE_REAL_TOL = 1e-8
CONGRUENCE_TOL = 1e-7


class Origin(enum.Enum):
    ANGLES = "angles"
    LENGTHS = "lengths"


@dataclass(frozen=True)
class ComplexParams:
    a: tuple[complex, ...]
    origin: Origin | None = None
    source: tuple[float, ...] | None = None

    def monomials(self) -> list[complex]:
        out = []
        for sign, idx in TERMS:
            c = 1 + 0j
            for k in idx:
                c *= self.a[k]
            out.append(c if sign > 0 else -c)
        return out


class QuadCoeffs(NamedTuple):
    q0: complex
    q1: complex
    q2: complex


@dataclass(frozen=True)
class ZPair:
    z_minus: complex
    z_plus: complex
    discriminant: complex
    swapped: bool = False
    closed_form_gap: float | None = None


@dataclass
class VolumeResult:
    volume: float
    shape: Shape
    z_pair: ZPair
    residues: tuple[int, int]
    partials: tuple[float, ...] | None
    method: str
    diagnostics: dict[str, float] = field(default_factory=dict)


def params_from_angles(a: Sequence[float]) -> ComplexParams:
    a = gram.check_angles(a)
    return ComplexParams(tuple(cmath.exp(1j * x) for x in a), Origin.ANGLES, a)


def params_from_lengths(l: Sequence[float]) -> ComplexParams:
    l = gram.check_lengths(l)
    a = [0j] * 6
    for i, slot in enumerate(LENGTH_SLOT):
        a[slot] = complex(-math.exp(l[i]))
    return ComplexParams(tuple(a), Origin.LENGTHS, l)


def quad_coeffs(p: ComplexParams) -> QuadCoeffs:
    a1, a2, a3, a4, a5, a6 = p.a
    if any(x == 0 for x in p.a):
        raise DomainError("parameters must be nonzero")
    prod = a1 * a2 * a3 * a4 * a5 * a6
    q0 = (1 + a1 * a2 * a3 + a1 * a5 * a6 + a2 * a4 * a6 + a3 * a4 * a5
          + a1 * a2 * a4 * a5 + a1 * a3 * a4 * a6 + a2 * a3 * a5 * a6)
    q1 = -prod * ((a1 - 1 / a1) * (a4 - 1 / a4) + (a2 - 1 / a2) * (a5 - 1 / a5)
                  + (a3 - 1 / a3) * (a6 - 1 / a6))
    q2 = prod * (a1 * a4 + a2 * a5 + a3 * a6 + a1 * a2 * a6 + a1 * a3 * a5
                 + a2 * a3 * a4 + a4 * a5 * a6 + prod)
    return QuadCoeffs(q0, q1, q2)


def _expm1_minus_x(s: float) -> float:
    """e^s - 1 - s without cancellation for small s."""
    if abs(s) >= 0.5:
        return math.expm1(s) - s
    term = total = s * s / 2
    n = 2
    while abs(term) > 1e-18 * abs(total):
        n += 1
        term *= s / n
        total += term
    return total


# signed exponent sums of q_l; constants and linear parts cancel exactly
_QL_TERMS = (
    (+1, (0, 3)), (+1, (1, 4)), (+1, (2, 5)),
    (-1, (0, 1, 2)), (-1, (0, 4, 5)), (-1, (1, 3, 5)), (-1, (2, 3, 4)),
    (+1, (0, 1, 2, 3, 4, 5)),
)


def length_qfactor(l: Sequence[float]) -> float:
    """The real factor q_l with q2 = (a1...a6) q_l for length parameters."""
    return sum(sign * _expm1_minus_x(sum(l[i] for i in idx)) for sign, idx in _QL_TERMS)


def closed_form_roots(p: ComplexParams) -> tuple[complex, complex] | None:
    """(z-, z+) from the sin/sinh and Gram-determinant expressions, if ``p`` has a source."""
    if p.source is None or p.origin is None:
        return None
    s = p.source
    if p.origin is Origin.LENGTHS:
        ql = length_qfactor(s)
        ss = sum(math.sinh(s[i]) * math.sinh(s[i + 3]) for i in range(3))
        root = _sqrt_det(gram.det_length_gram(s))
        return 2 / ql * (ss - root), 2 / ql * (ss + root)
    qa = (cmath.exp(1j * (s[0] + s[3])) + cmath.exp(1j * (s[1] + s[4])) + cmath.exp(1j * (s[2] + s[5]))
          + cmath.exp(1j * (s[0] + s[1] + s[5])) + cmath.exp(1j * (s[0] + s[2] + s[4]))
          + cmath.exp(1j * (s[1] + s[2] + s[3])) + cmath.exp(1j * (s[3] + s[4] + s[5]))
          + cmath.exp(1j * sum(s)))
    ss = sum(math.sin(s[i]) * math.sin(s[i + 3]) for i in range(3))
    det = gram.gram_from_angles(s).det
    # spherical side: the negative root makes Vol = -i V hold
    root = 1j * math.sqrt(-det) if det < 0 else complex(-math.sqrt(det))
    return -2 / qa * (ss - root), -2 / qa * (ss + root)


def _sqrt_det(det: float) -> complex:
    return 1j * math.sqrt(-det) if det < 0 else complex(math.sqrt(det))


def _raw_roots(q: QuadCoeffs) -> tuple[complex, complex, complex]:
    q0, q1, q2 = q
    scale = abs(q0) + abs(q1) + abs(q2)
    if abs(q2) <= 1e-14 * scale:
        raise DegenerateError("leading coefficient of the critical-point quadratic vanishes")
    disc = q1 * q1 - 4 * q0 * q2
    s = cmath.sqrt(disc)
    # cancellation-free pairing: the larger |q1 + s| goes in the denominator
    if abs(q1 + s) < abs(q1 - s):
        s = -s
    big = -(q1 + s) / (2 * q2)
    small = -2 * q0 / (q1 + s) if q1 + s != 0 else big
    # report in the literal (-s, +s) order of the textbook formula
    if s == cmath.sqrt(disc):
        return big, small, disc
    return small, big, disc


def z_roots(q: QuadCoeffs, p: ComplexParams) -> ZPair:
    """Critical points z-, z+.

    Without a known source the literal quadratic formula (principal square
    root) is used.  With one, the quadratic roots are labeled by matching them
    to the closed form, and the closed-form values are returned: near the
    Euclidean limit the two roots almost coalesce and the discriminant loses
    most of its digits, while the closed form stays accurate.
    ``swapped`` records that the labeling differs from the literal formula and
    ``closed_form_gap`` the relative distance between the two evaluations.
    """
    zm, zp, disc = _raw_roots(q)
    ref = closed_form_roots(p)
    if ref is None:
        return ZPair(zm, zp, disc)
    keep = abs(zm - ref[0]) + abs(zp - ref[1])
    swap = abs(zp - ref[0]) + abs(zm - ref[1])
    scale = abs(ref[0]) + abs(ref[1])
    return ZPair(ref[0], ref[1], disc, swap < keep, min(keep, swap) / scale)


def quadratic_roots(p: ComplexParams) -> tuple[complex, complex]:
    """Literal quadratic-formula roots, labeled like :func:`z_roots`."""
    zm, zp, _ = _raw_roots(quad_coeffs(p))
    ref = closed_form_roots(p)
    if ref is not None and abs(zp - ref[0]) + abs(zm - ref[1]) < abs(zm - ref[0]) + abs(zp - ref[1]):
        return zp, zm
    return zm, zp


def quad_residual(q: QuadCoeffs, z: complex) -> float:
    return abs((q.q2 * z + q.q1) * z + q.q0) / (abs(q.q0) + abs(q.q1) + abs(q.q2))


def u_eval(p: ComplexParams, z: complex) -> complex:
    total = 0j
    for (sign, _), c in zip(TERMS, p.monomials()):
        w = c * z
        if w == 1:
            raise EvaluationError("Li2 argument at the branch point 1")
        total += sign * li2(w)
    return total


def zdudz(p: ComplexParams, z: complex) -> complex:
    """``z dU/dz`` as the eight-term sum of principal logs."""
    total = 0j
    for (sign, _), c in zip(TERMS, p.monomials()):
        w = 1 - c * z
        if w == 0:
            raise EvaluationError("log argument vanishes")
        total -= sign * clog(w)
    return total


def a_dua(p: ComplexParams, z: complex, slot: int) -> complex:
    """``a_slot dU/da_slot``: the logs of the terms containing that parameter."""
    total = 0j
    for (sign, idx), c in zip(TERMS, p.monomials()):
        if slot in idx:
            total -= sign * clog(1 - c * z)
    return total


def _f(p: ComplexParams, z: complex) -> complex:
    return u_eval(p, z) - zdudz(p, z) * clog(z)


def residue_defects(p: ComplexParams, zp: ZPair) -> tuple[tuple[int, int], float, float]:
    """Integers k with z U_z = 2 pi i k at both roots, plus worst real / imaginary defects."""
    ks, re_def, im_def = [], 0.0, 0.0
    for z in (zp.z_minus, zp.z_plus):
        r = zdudz(p, z)
        k = round(r.imag / TWO_PI)
        ks.append(k)
        re_def = max(re_def, abs(r.real))
        im_def = max(im_def, abs(r.imag - TWO_PI * k))
    return (ks[0], ks[1]), re_def, im_def


def branch_residues(p: ComplexParams, zp: ZPair) -> tuple[int, int]:
    ks, re_def, im_def = residue_defects(p, zp)
    if re_def >= RESIDUE_REAL_TOL or im_def >= RESIDUE_SNAP:
        raise BranchIntegrityError(
            f"z dU/dz not in 2 pi i Z at the critical points (real {re_def:.3g}, imag {im_def:.3g})"
        )
    return ks


def v_eval(p: ComplexParams, zp: ZPair | None = None) -> complex:
    if zp is None:
        zp = z_roots(quad_coeffs(p), p)
    return 0.25j * (_f(p, zp.z_minus) - _f(p, zp.z_plus))


# --- branch-tracked evaluation -------------------------------------------------


def _interpolate(ref: ComplexParams, p: ComplexParams, t: float) -> ComplexParams:
    if ref.origin is p.origin and ref.source is not None and p.source is not None:
        src = tuple((1 - t) * x + t * y for x, y in zip(ref.source, p.source))
        return params_from_angles(src) if p.origin is Origin.ANGLES else params_from_lengths(src)
    return ComplexParams(tuple((1 - t) * x + t * y for x, y in zip(ref.a, p.a)))


@dataclass
class _Root:
    z: complex
    log: LogSheet
    sheets: list[Li2Sheet]


class TrackedPotential:
    """V continued from a reference parameter set along a straight path.

    Holds, for both critical points, the continued log of the root and one
    :class:`Li2Sheet` per term of U.  ``move_to`` returns a new object whose
    sheets have been advanced further; the original is left unchanged.
    """

    def __init__(self, p: ComplexParams, roots: tuple[_Root, _Root]):
        self.p = p
        self.roots = roots

    @classmethod
    def at(cls, p: ComplexParams) -> "TrackedPotential":
        zp = z_roots(quad_coeffs(p), p)
        return cls(p, tuple(_Root(z, LogSheet(), [Li2Sheet() for _ in TERMS]) for z in (zp.z_minus, zp.z_plus)))

    def move_to(self, target: ComplexParams, steps: int, jitter: float = 0.0) -> "TrackedPotential":
        roots = [
            _Root(r.z, LogSheet(r.log.k), [Li2Sheet(s.m, s.j, s.c) for s in r.sheets]) for r in self.roots
        ]
        prev_c = self.p.monomials()
        for n in range(1, steps + 1):
            t = n / steps
            if jitter and n < steps:
                t += jitter * math.sin(7.0 * n)
            q = _interpolate(self.p, target, t) if n < steps else target
            qc = quad_coeffs(q)
            za, zb, _ = _raw_roots(qc)
            r0, r1 = roots
            if abs(za - r0.z) + abs(zb - r1.z) > abs(zb - r0.z) + abs(za - r1.z):
                za, zb = zb, za
            cur_c = q.monomials()
            for r, znew in ((r0, za), (r1, zb)):
                r.log.advance(r.z, znew)
                for sheet, c0, c1 in zip(r.sheets, prev_c, cur_c):
                    sheet.advance(c0 * r.z, c1 * znew)
                r.z = znew
            prev_c = cur_c
        return TrackedPotential(target, tuple(roots))

    def _f(self, r: _Root) -> complex:
        cs = self.p.monomials()
        u = sum(sign * s.value(c * r.z) for (sign, _), s, c in zip(TERMS, r.sheets, cs))
        zu = sum(sign * s.wdw(c * r.z) for (sign, _), s, c in zip(TERMS, r.sheets, cs))
        return u - zu * r.log.value(r.z)

    def value(self) -> complex:
        return 0.25j * (self._f(self.roots[0]) - self._f(self.roots[1]))

    def zdudz(self) -> tuple[complex, complex]:
        cs = self.p.monomials()
        return tuple(
            sum(sign * s.wdw(c * r.z) for (sign, _), s, c in zip(TERMS, r.sheets, cs)) for r in self.roots
        )

    def a_dua(self, slot: int) -> tuple[complex, complex]:
        cs = self.p.monomials()
        return tuple(
            sum(sign * s.wdw(c * r.z) for (sign, idx), s, c in zip(TERMS, r.sheets, cs) if slot in idx)
            for r in self.roots
        )


def regular_reference(p: ComplexParams) -> ComplexParams:
    """Regular tetrahedron of the same mean size as ``p``."""
    if p.source is None:
        raise ContinuationError("tracked evaluation needs parameters built from angles or lengths")
    m = sum(p.source) / 6
    return params_from_angles([m] * 6) if p.origin is Origin.ANGLES else params_from_lengths([m] * 6)


def track(p: ComplexParams, reference: ComplexParams | None = None, steps: int = 64,
          tol: float = 1e-10, max_steps: int = 8192) -> TrackedPotential:
    """Continue V to ``p``, doubling the step count until the value is stable to ``tol``."""
    ref = reference if reference is not None else regular_reference(p)
    start = TrackedPotential.at(ref)
    last = None
    jitter = 0.0
    while steps <= max_steps:
        try:
            tp = start.move_to(p, steps, jitter)
        except ContinuationError:
            if jitter:
                raise
            jitter = 1e-9
            continue
        v = tp.value()
        if last is not None and abs(v - last[1]) <= tol * max(1.0, abs(v)):
            return tp
        last = (tp, v)
        steps *= 2
    raise ContinuationError(f"continued value not stable at {max_steps} steps")


def v_eval_tracked(p: ComplexParams, reference: ComplexParams | None = None) -> complex:
    return track(p, reference).value()


# --- volumes -----------------------------------------------------------------


def volume_from_angles(a: Sequence[float]) -> VolumeResult:
    a = gram.check_angles(a)
    shape = gram.classify(a)
    if shape is Shape.NOT_REALIZABLE:
        raise ShapeError(f"angles {a} do not bound a tetrahedron")
    p = params_from_angles(a)
    q = quad_coeffs(p)
    zp = z_roots(q, p)
    v = v_eval(p, zp)
    ks, re_def, im_def = residue_defects(p, zp)
    diag = {
        "quad_residual": max(quad_residual(q, zp.z_minus), quad_residual(q, zp.z_plus)),
        "residue_real": re_def,
        "residue_imag": im_def,
    }
    if zp.closed_form_gap is not None:
        diag["closed_form_gap"] = zp.closed_form_gap
    if shape is Shape.HYPERBOLIC:
        vol, diag["imag_part"] = -v.real, abs(v.imag)
    elif shape is Shape.SPHERICAL:
        vol, diag["imag_part"] = v.imag, abs(v.real)
    else:
        vol, diag["imag_part"] = 0.0, abs(v)
    return VolumeResult(vol, shape, zp, ks, None, "angles", diag)


def _fd_partials(vfun: Callable[[tuple[float, ...]], float], l: tuple[float, ...], h: float) -> list[float]:
    out = []
    for i in range(6):
        def d(step):
            lp = list(l)
            lm = list(l)
            lp[i] += step
            lm[i] -= step
            return (vfun(tuple(lp)) - vfun(tuple(lm))) / (2 * step)

        out.append((4 * d(h / 2) - d(h)) / 3)
    return out


def _reconcile(analytic: Sequence[float], fd_fun, l, h: float) -> tuple[list[float], list[int]]:
    last_err = None
    for step in (h, h / 10):
        try:
            fd = fd_fun(l, step)
        except NumericalError as exc:
            last_err = exc
            continue
        ks = [round((f - x) / (math.pi / 2)) for f, x in zip(fd, analytic)]
        fixed = [x + k * math.pi / 2 for x, k in zip(analytic, ks)]
        gaps = [abs(f - x) for f, x in zip(fd, fixed)]
        if max(gaps) < CONGRUENCE_TOL:
            return fixed, ks
        last_err = BranchIntegrityError(f"finite-difference and analytic partials differ by {max(gaps):.3g}")
    raise last_err


def analytic_partials(p: ComplexParams, zp: ZPair) -> list[float]:
    out = []
    for slot in LENGTH_SLOT:
        d = 0.25j * (a_dua(p, zp.z_minus, slot) - a_dua(p, zp.z_plus, slot))
        out.append(d.real)
    return out


def partials_vl(l: Sequence[float], h: float = 1e-5) -> tuple[float, ...]:
    """dV/dl_i on the principal branch, analytic and checked against finite differences."""
    l = gram.check_lengths(l)
    p = params_from_lengths(l)
    zp = z_roots(quad_coeffs(p), p)
    fixed, _ = _reconcile(analytic_partials(p, zp), _principal_fd, l, h)
    return tuple(fixed)


def _principal_fd(l, step):
    return _fd_partials(lambda x: v_eval(params_from_lengths(x)).real, l, step)


def _congruence_defects(partials: Sequence[float], angles: Sequence[float]) -> list[float]:
    out = []
    for d, a in zip(partials, angles):
        r = math.remainder(2 * d - a, math.pi)
        out.append(abs(r))
    return out


def volume_from_lengths(l: Sequence[float], h: float = 1e-5, allow_tracked: bool = True) -> VolumeResult:
    l = gram.check_lengths(l)
    angles = gram.lengths_to_angles(l)  # raises for unrealizable input
    p = params_from_lengths(l)
    q = quad_coeffs(p)
    zp = z_roots(q, p)
    diag = {"quad_residual": max(quad_residual(q, zp.z_minus), quad_residual(q, zp.z_plus))}
    if zp.closed_form_gap is not None:
        diag["closed_form_gap"] = zp.closed_form_gap
    try:
        ks, re_def, im_def = residue_defects(p, zp)
        v = v_eval(p, zp)
        partials, corr = _reconcile(analytic_partials(p, zp), _principal_fd, l, h)
        vol = v.real - sum(x * d for x, d in zip(l, partials))
        cong = max(_congruence_defects(partials, angles))
        diag.update(residue_real=re_def, residue_imag=im_def, congruence=cong, imag_part=abs(v.imag),
                    partial_corrections=float(sum(abs(k) for k in corr)))
        healthy = (re_def < RESIDUE_REAL_TOL and im_def < RESIDUE_SNAP and cong < CONGRUENCE_TOL
                   and abs(v.imag) < 1e-9 * max(1.0, abs(v)) and vol > 0)
    except NumericalError:
        if not allow_tracked:
            raise
        healthy = False
    if healthy or not allow_tracked:
        if not healthy:
            raise BranchIntegrityError(f"principal-branch diagnostics failed: {diag}")
        diag["tracked"] = 0.0
        return VolumeResult(vol, Shape.HYPERBOLIC, zp, ks, tuple(partials), "lengths", diag)
    return _volume_tracked(l, angles, zp, diag, h)


def _volume_tracked(l, angles, zp, diag, h) -> VolumeResult:
    p = params_from_lengths(l)
    tp = track(p)
    v = tp.value()
    analytic = [(0.25j * (lambda d: d[0] - d[1])(tp.a_dua(slot))).real for slot in LENGTH_SLOT]

    def fd(x, step):
        def vfun(y):
            return tp.move_to(params_from_lengths(y), 4).value().real
        return _fd_partials(vfun, x, step)

    partials, _ = _reconcile(analytic, fd, l, h)
    vol = v.real - sum(x * d for x, d in zip(l, partials))
    zu = tp.zdudz()
    ks = tuple(round(r.imag / TWO_PI) for r in zu)
    cong = max(_congruence_defects(partials, angles))
    diag.update(
        residue_real=max(abs(r.real) for r in zu),
        residue_imag=max(abs(r.imag - TWO_PI * k) for r, k in zip(zu, ks)),
        congruence=cong,
        imag_part=abs(v.imag),
        tracked=1.0,
    )
    if cong >= CONGRUENCE_TOL or vol <= 0:
        raise BranchIntegrityError(f"tracked evaluation failed its diagnostics: {diag}")
    zpair = ZPair(tp.roots[0].z, tp.roots[1].z, zp.discriminant, zp.swapped, zp.closed_form_gap)
    return VolumeResult(vol, Shape.HYPERBOLIC, zpair, ks, tuple(partials), "lengths", diag)


def schlafli_defect(a: Sequence[float], h: float = 1e-5) -> float:
    """max_i |dVol/dA_i + l_i/2|.

    The derivative is a central difference with step ``h`` plus one Richardson
    step (steps h and h/2), so thin tetrahedra with large third derivatives
    do not swamp the check with truncation error.
    """
    a = gram.check_angles(a)
    lengths = gram.angles_to_lengths(a)

    def vol(x):
        r = volume_from_angles(x)
        if r.shape is not Shape.HYPERBOLIC:
            raise ShapeError("angle perturbation left the hyperbolic region")
        return r.volume

    worst = 0.0
    for i, d in enumerate(_fd_partials(vol, a, h)):
        worst = max(worst, abs(d + lengths[i] / 2))
    return worst
