"""Hyperelliptic curve w^2 = prod(lambda - lambda_j): sheets, periods, Abel map.

Homology basis
--------------
Cuts are the straight segments [l1, l2], [l3, l4], ..., [l_{2g+1}, l_{2g+2}].
The cycle a_j encircles the cut [l_{2j+1}, l_{2j+2}].  The cycle b_j leaves the
first cut on sheet 1, runs through the gaps [l_2, l_3], ..., [l_{2j}, l_{2j+1}]
to the cut [l_{2j+1}, l_{2j+2}] and returns on sheet 2, passing the
intermediate cuts on the opposite side.  Its period is therefore twice the sum
of the sheet-1 gap integrals.  This realization reproduces the closed-form
branch-point Abel values ``U(l_{2j+1}) = B e_j / 2 + sum_{k>=j} e_k / 2``.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import (
    BranchAmbiguityError,
    ConfigurationError,
    DomainError,
    PathError,
)
from .numeric import (
    QuadratureSpec,
    det_inv,
    integrate_endpoint_singular,
    integrate_inverse_sqrt,
    integrate_smooth,
)

PERIOD_QUAD = QuadratureSpec(tol=1e-14, nodes=16, max_nodes=16384)


def _segments_intersect(p1, p2, q1, q2, eps=1e-14):
    """Proper or touching intersection of segments [p1,p2] and [q1,q2]."""
    def cross(a, b):
        return a.real * b.imag - a.imag * b.real

    d1 = cross(q2 - q1, p1 - q1)
    d2 = cross(q2 - q1, p2 - q1)
    d3 = cross(p2 - p1, q1 - p1)
    d4 = cross(p2 - p1, q2 - p1)
    scale = max(abs(p2 - p1), abs(q2 - q1)) ** 2
    tol = eps * scale
    if ((d1 > tol and d2 < -tol) or (d1 < -tol and d2 > tol)) and (
        (d3 > tol and d4 < -tol) or (d3 < -tol and d4 > tol)
    ):
        return True

    def on_segment(a, b, c):
        return (abs(cross(b - a, c - a)) <= tol
                and min(a.real, b.real) - 1e-15 <= c.real <= max(a.real, b.real) + 1e-15
                and min(a.imag, b.imag) - 1e-15 <= c.imag <= max(a.imag, b.imag) + 1e-15)

    return (on_segment(q1, q2, p1) or on_segment(q1, q2, p2)
            or on_segment(p1, p2, q1) or on_segment(p1, p2, q2))


def _segment_hits_cut(z0, z1, cut, allowed_endpoints=()):
    """True if the open segment (z0, z1) meets the closed cut.

    Endpoints listed in ``allowed_endpoints`` (branch points where the path
    starts or ends) are excluded from the test.
    """
    a, b = cut
    if not _segments_intersect(z0, z1, a, b):
        return False
    # Only touching at an allowed branch point is fine.
    for e in allowed_endpoints:
        if e in (a, b) and (abs(z0 - e) < 1e-15 or abs(z1 - e) < 1e-15):
            other = a if e == b else b
            d = z1 - z0
            if abs(z0 - e) < 1e-15:
                t_dir = d
            else:
                t_dir = -d
            # collinear with the cut and pointing into it -> crosses
            c = (other - e)
            crossp = t_dir.real * c.imag - t_dir.imag * c.real
            dot = t_dir.real * c.real + t_dir.imag * c.imag
            if abs(crossp) <= 1e-14 * abs(t_dir) * abs(c) and dot > 0:
                return True
            # segment touches the cut only at e unless it also meets elsewhere
            if not _segments_intersect(z0 + 1e-9 * (z1 - z0), z1 - 1e-9 * (z1 - z0), a, b) or \
                    abs(z0 - e) < 1e-15 and abs(z1 - e) < 1e-15:
                return False
            return True
    return True


@dataclass(frozen=True)
class BranchConfiguration:
    """Ordered distinct branch points; cuts pair them consecutively."""

    points: tuple
    degenerate_warning: str | None = field(default=None, compare=False)

    def __init__(self, points):
        pts = tuple(complex(p) for p in points)
        object.__setattr__(self, "points", pts)
        n = len(pts)
        if n < 4 or n % 2:
            raise ConfigurationError(f"need an even number >= 4 of branch points, got {n}")
        if not all(np.isfinite(p) for p in pts):
            raise ConfigurationError("branch points must be finite")
        dups = [(i + 1, j + 1) for i in range(n) for j in range(i + 1, n) if pts[i] == pts[j]]
        if dups:
            raise ConfigurationError(
                "coinciding branch points at indices "
                + ", ".join(f"{i} and {j}" for i, j in dups)
            )
        cuts = [(pts[2 * c], pts[2 * c + 1]) for c in range(n // 2)]
        for c1 in range(len(cuts)):
            for c2 in range(c1 + 1, len(cuts)):
                if _segments_intersect(*cuts[c1], *cuts[c2]):
                    raise ConfigurationError(
                        f"cuts {c1 + 1} and {c2 + 1} intersect; reorder the branch points"
                    )
        diam = max(abs(a - b) for a in pts for b in pts)
        dmin = min(abs(pts[i] - pts[j]) for i in range(n) for j in range(i + 1, n))
        msg = None
        if dmin < 1e-6 * diam:
            msg = f"near-degenerate configuration: min distance {dmin:.2e} vs diameter {diam:.2e}"
            warnings.warn(msg, RuntimeWarning, stacklevel=2)
        object.__setattr__(self, "degenerate_warning", msg)

    @property
    def genus(self) -> int:
        return len(self.points) // 2 - 1

    @property
    def cuts(self):
        p = self.points
        return [(p[2 * c], p[2 * c + 1]) for c in range(len(p) // 2)]

    @property
    def diameter(self) -> float:
        return max(abs(a - b) for a in self.points for b in self.points)

    @property
    def min_distance(self) -> float:
        p = self.points
        return min(abs(p[i] - p[j]) for i in range(len(p)) for j in range(i + 1, len(p)))

    @property
    def centroid(self) -> complex:
        return sum(self.points) / len(self.points)

    def perturbed(self, index: int, delta) -> "BranchConfiguration":
        """Copy with ``points[index]`` shifted by ``delta`` (0-based index)."""
        pts = list(self.points)
        pts[index] += delta
        return BranchConfiguration(pts)

    def on_cut(self, lam, rel_tol=1e-13) -> bool:
        lam = complex(lam)
        for a, b in self.cuts:
            d = b - a
            s = ((lam - a) / d)
            if abs(s.imag) * abs(d) <= rel_tol * max(1.0, self.diameter) and -1e-15 <= s.real <= 1 + 1e-15:
                return True
        return False


def _pair_factor(lam, a, b):
    # (lam - a) sqrt((lam - b)/(lam - a)): continuous off [a, b], ~ lam at infinity
    return (lam - a) * np.sqrt((lam - b) / (lam - a))


def w_values(cfg: BranchConfiguration, lam):
    """Sheet-1 branch of w at (an array of) points off the cuts, no checks."""
    lam = np.asarray(lam, dtype=complex)
    out = np.ones_like(lam)
    for a, b in cfg.cuts:
        out = out * _pair_factor(lam, a, b)
    return out


def w_near_branch(cfg: BranchConfiguration, base: complex, off):
    """Sheet-1 w at ``base + off`` for a branch point ``base``, using the exact offset."""
    off = np.asarray(off, dtype=complex)
    lam = base + off
    out = np.ones_like(lam)
    for a, b in cfg.cuts:
        if base == a:
            out = out * off * np.sqrt((lam - b) / off)
        elif base == b:
            out = out * (lam - a) * np.sqrt(off / (lam - a))
        else:
            out = out * _pair_factor(lam, a, b)
    return out


def w_eval(cfg: BranchConfiguration, lam, sheet: int = 1) -> complex:
    """Value of w at the sheet point (lam, sheet).

    Sheet 1 is the branch with w ~ +lam^(g+1) at infinity, continuous on the
    plane slit along the cuts; sheet 2 is its negative.
    """
    if sheet not in (1, 2):
        raise ValueError("sheet must be 1 or 2")
    if cfg.on_cut(lam):
        raise BranchAmbiguityError(f"point {complex(lam)} lies on a cut")
    val = complex(w_values(cfg, complex(lam)))
    return val if sheet == 1 else -val


def w_cut_boundary(cfg: BranchConfiguration, cut: int, lam, side: int = 1):
    """Boundary value of the sheet-1 branch on cut ``cut`` (0-based).

    ``side=+1`` is the limit from the left of the directed segment
    a -> b, ``side=-1`` from the right.
    """
    a, b = cfg.cuts[cut]
    lam = np.asarray(lam, dtype=complex)
    x = ((2 * lam - a - b) / (b - a)).real
    own = side * 1j * (b - a) / 2 * np.sqrt(np.clip(1.0 - x * x, 0.0, None))
    out = own
    for c, (ac, bc) in enumerate(cfg.cuts):
        if c != cut:
            out = out * _pair_factor(lam, ac, bc)
    return out


def _powers(lam, g):
    lam = np.asarray(lam, dtype=complex)
    return np.stack([lam ** k for k in range(g)])


@dataclass(frozen=True)
class PeriodData:
    """a-periods, b-periods and Riemann matrix of a configuration.

    ``a_side`` records which boundary value of w was used on the cuts for the
    a-periods (+1 left, -1 right); it is fixed by positivity of Im B.
    """

    A: np.ndarray
    Bcal: np.ndarray
    B: np.ndarray
    a_side: int
    symmetry_defect: float
    quad_error: float
    warning: str | None = None

    @cached_property
    def A_inv(self) -> np.ndarray:
        return det_inv(self.A)[1]

    @cached_property
    def det_A(self) -> complex:
        return complex(np.linalg.det(self.A))

    @property
    def genus(self) -> int:
        return self.A.shape[0]


def a_periods(cfg: BranchConfiguration, side: int = 1, quad: QuadratureSpec = PERIOD_QUAD):
    """Matrix A_kj = 2 * integral over cut j+1 of lam^(k-1)/w (boundary value ``side``).

    Returns ``(A, error_estimate)``.
    """
    g = cfg.genus
    A = np.empty((g, g), dtype=complex)
    err = 0.0
    for j in range(g):
        a, b = cfg.cuts[j + 1]
        others = [c for k, c in enumerate(cfg.cuts) if k != j + 1]

        # boundary value of w is side * i * root * (factors of the other cuts)
        def h(lam, da, db, root, others=others):
            rest = np.ones_like(lam)
            for ac, bc in others:
                rest = rest * _pair_factor(lam, ac, bc)
            return _powers(lam, g) / (side * 1j * rest)

        col, e = integrate_inverse_sqrt(h, a, b, quad)
        A[:, j] = 2 * col
        err = max(err, 2 * e)
    return A, err


def gap_integrals(cfg: BranchConfiguration, quad: QuadratureSpec = PERIOD_QUAD):
    """Sheet-1 integrals of lam^(k-1)/w over the gaps [l_{2i}, l_{2i+1}], i = 1..g.

    Column i-1 holds gap i.  The straight gap must avoid every cut.
    """
    g = cfg.genus
    pts = cfg.points
    G = np.empty((g, g), dtype=complex)
    err = 0.0
    for i in range(g):
        z0, z1 = pts[2 * i + 1], pts[2 * i + 2]
        for c, cut in enumerate(cfg.cuts):
            if _segment_hits_cut(z0, z1, cut, allowed_endpoints=(z0, z1)):
                raise PathError(
                    f"gap segment [l{2 * i + 2}, l{2 * i + 3}] crosses cut {c + 1}; "
                    "reorder the branch points"
                )

        left, right = cfg.cuts[i], cfg.cuts[i + 1]
        others = [c for k, c in enumerate(cfg.cuts) if k not in (i, i + 1)]

        # w with the two vanishing factors built from the exact offsets
        def h(lam, da, db, root, left=left, right=right, others=others):
            w = (lam - left[0]) * np.sqrt(da / (lam - left[0]))
            w = w * (-db) * np.sqrt((lam - right[1]) / (-db))
            for ac, bc in others:
                w = w * _pair_factor(lam, ac, bc)
            return _powers(lam, g) * root / w

        col, e = integrate_inverse_sqrt(h, z0, z1, quad)
        G[:, i] = col
        err = max(err, e)
    return G, err


def b_periods(cfg: BranchConfiguration, quad: QuadratureSpec = PERIOD_QUAD):
    """Matrix of b-periods: column j is twice the sum of the first j gap integrals."""
    G, err = gap_integrals(cfg, quad)
    return 2 * np.cumsum(G, axis=1), 2 * cfg.genus * err


def riemann_matrix(cfg: BranchConfiguration, quad: QuadratureSpec = PERIOD_QUAD,
                   symmetry_tol: float = 1e-9) -> PeriodData:
    """Period matrices and B = A^{-1} Bcal with validated invariants.

    The boundary side used for the a-periods is chosen so that Im B is
    positive definite; an indefinite Im B or an asymmetric B raises
    :class:`DomainError`.
    """
    Bcal, eb = b_periods(cfg, quad)
    A, ea = a_periods(cfg, +1, quad)
    _, Ainv = det_inv(A)
    B = Ainv @ Bcal
    side = +1
    eig = np.linalg.eigvalsh(((B.imag + B.imag.T) / 2))
    if np.all(eig < 0):
        A, B, side = -A, -B, -1
        eig = -eig[::-1]
    if not np.all(eig > 0):
        raise DomainError(f"Im B is not positive definite (eigenvalues {eig})")
    sym = float(np.max(np.abs(B - B.T)))
    if sym > symmetry_tol * max(1.0, float(np.max(np.abs(B)))):
        raise DomainError(f"Riemann matrix is not symmetric (defect {sym:.2e})")
    B = (B + B.T) / 2
    return PeriodData(A=A, Bcal=Bcal, B=B, a_side=side, symmetry_defect=sym,
                      quad_error=max(ea, eb), warning=cfg.degenerate_warning)


def normalized_a_periods(cfg: BranchConfiguration, periods: PeriodData,
                         quad: QuadratureSpec = PERIOD_QUAD):
    """Recompute the a-periods of the normalized differentials (should be I)."""
    A, _ = a_periods(cfg, periods.a_side, quad)
    return periods.A_inv @ A


def riemann_constants(periods: PeriodData) -> np.ndarray:
    """K = B (e_1 + ... + e_g)/2 + (e_1 + 2 e_2 + ... + g e_g)/2 for base point l_1."""
    g = periods.genus
    return periods.B @ np.full(g, 0.5) + 0.5 * np.arange(1, g + 1)


def branch_abel_halves(g: int, j: int):
    """Half-integer coordinates (n, m) with U(l_j) = B n + m (j is 1-based).

    Closed forms: U(l_1) = 0, U(l_2) = sum e_k / 2,
    U(l_{2i+1}) = B e_i/2 + sum_{k>=i} e_k/2, U(l_{2i+2}) = B e_i/2 + sum_{k>i} e_k/2.
    """
    n = np.zeros(g)
    m = np.zeros(g)
    if j == 1:
        return n, m
    if j == 2:
        return n, np.full(g, 0.5)
    i = (j - 1) // 2  # cut index 1..g for j = 2i+1, 2i+2
    n[i - 1] = 0.5
    if j % 2 == 1:
        m[i - 1:] = 0.5
    else:
        m[i:] = 0.5
    return n, m


def branch_abel_value(periods: PeriodData, j: int) -> np.ndarray:
    n, m = branch_abel_halves(periods.genus, j)
    return periods.B @ n + m


def diff_at_branch(cfg: BranchConfiguration, periods: PeriodData, j: int) -> np.ndarray:
    """Vector dU_l/dx_j at l_j for the local parameter x_j = sqrt(lam - l_j).

    Equals 2 sum_m (A^{-1})_{lm} l_j^{m-1} / prod_{k != j} (l_j - l_k)^{1/2}
    (j is 1-based).  The square root is the principal value of the product,
    so the overall sign is a convention; every consumer is invariant under it.
    """
    g = periods.genus
    lj = cfg.points[j - 1]
    prod = 1.0 + 0j
    for k, lk in enumerate(cfg.points):
        if k != j - 1:
            prod *= (lj - lk)
    root = np.sqrt(prod)
    return 2 * periods.A_inv @ (lj ** np.arange(g)) / root


# --- Abel map ----------------------------------------------------------------

def _integrate_path_segment(cfg, z0, z1, singular_start, singular_end, quad):
    g = cfg.genus

    def dU0(lam):
        return _powers(lam, g) / w_values(cfg, lam)

    if singular_start and singular_end:
        return integrate_endpoint_singular(dU0, z0, z1, quad)
    if singular_start or singular_end:
        base, far = (z0, z1) if singular_start else (z1, z0)
        d = far - base

        # lam = base + d s^2 removes the inverse square root at ``base``
        def h(s):
            s = np.asarray(s).real
            off = d * s * s
            return _powers(base + off, g) / w_near_branch(cfg, base, off) * 2 * d * s

        val, err = integrate_smooth(h, 0.0, 1.0, QuadratureSpec("gauss-legendre-adaptive", 16, quad.tol, quad.max_nodes))
        return (val if singular_start else -val), err
    return integrate_smooth(dU0, z0, z1, QuadratureSpec("gauss-legendre-adaptive", 16, quad.tol, quad.max_nodes))


def _check_path(cfg, waypoints):
    pts = set(cfg.points)
    for z0, z1 in zip(waypoints[:-1], waypoints[1:]):
        allowed = tuple(z for z in (z0, z1) if z in pts)
        for c, cut in enumerate(cfg.cuts):
            if _segment_hits_cut(z0, z1, cut, allowed_endpoints=allowed):
                raise PathError(f"path segment {z0} -> {z1} crosses cut {c + 1}")


def abel_map_unnormalized(cfg: BranchConfiguration, waypoints, quad: QuadratureSpec = PERIOD_QUAD):
    """Integral of lam^(k-1)/w dlam (sheet 1) along a polyline starting at a branch point."""
    waypoints = [complex(z) for z in waypoints]
    _check_path(cfg, waypoints)
    pts = set(cfg.points)
    total = np.zeros(cfg.genus, dtype=complex)
    err = 0.0
    for z0, z1 in zip(waypoints[:-1], waypoints[1:]):
        v, e = _integrate_path_segment(cfg, z0, z1, z0 in pts, z1 in pts, quad)
        total = total + v
        err += e
    return total, err


@dataclass(frozen=True)
class AbelValue:
    u: np.ndarray
    error: float
    reduced: bool = False


def reduce_mod_lattice(u, B):
    """Representative of u in the fundamental cell of Z^g + B Z^g."""
    u = np.asarray(u, dtype=complex)
    n = np.linalg.solve(B.imag, u.imag)
    n_int = np.round(n)
    u = u - B @ n_int
    u = u - np.round(u.real)
    return u


def lattice_distance(u, v, B) -> float:
    """Distance between u and v modulo the period lattice."""
    d = np.asarray(u, dtype=complex) - np.asarray(v, dtype=complex)
    n = np.linalg.solve(B.imag, d.imag)
    best = np.inf
    base = np.round(n)
    g = len(d)
    for shift in np.ndindex(*(3,) * g):
        nn = base + np.array(shift) - 1
        r = d - B @ nn
        r = r - np.round(r.real)
        best = min(best, float(np.max(np.abs(r))))
    return best


def abel_map(cfg: BranchConfiguration, periods: PeriodData, lam, sheet: int = 1,
             path_hint=None, reduce: bool = False, quad: QuadratureSpec = PERIOD_QUAD) -> AbelValue:
    """U(P) = integral from l_1 to P of the normalized differentials.

    The path is the polyline ``[l_1, *path_hint, lam]`` (straight line when no
    hint is given); it may not cross a cut.  Sheet-2 values are the negatives
    of sheet-1 values along the mirrored path.
    """
    lam = complex(lam)
    if lam not in cfg.points and cfg.on_cut(lam):
        raise BranchAmbiguityError(f"point {lam} lies on a cut")
    waypoints = [cfg.points[0], *(path_hint or []), lam]
    if abs(lam - cfg.points[0]) == 0:
        return AbelValue(np.zeros(cfg.genus, dtype=complex), 0.0)
    raw, err = abel_map_unnormalized(cfg, waypoints, quad)
    u = periods.A_inv @ raw
    if sheet == 2:
        u = -u
    if reduce:
        u = reduce_mod_lattice(u, periods.B)
    return AbelValue(u, err, reduce)


def _ray_direction(cfg: BranchConfiguration):
    """Direction for a ray from l_1 to infinity that meets no cut."""
    l1 = cfg.points[0]
    away = l1 - cfg.centroid
    base_angle = math.atan2(away.imag, away.real) if abs(away) > 0 else 0.0
    far = 1e3 * cfg.diameter + 1.0
    for k in range(0, 72):
        delta = (k + 1) // 2 * (math.pi / 36) * (1 if k % 2 else -1)
        d = complex(math.cos(base_angle + delta), math.sin(base_angle + delta))
        end = l1 + far * d
        if not any(_segment_hits_cut(l1, end, cut, allowed_endpoints=(l1,)) for cut in cfg.cuts):
            return d
    raise PathError("no cut-free ray from l_1 to infinity")


def abel_at_infinity(cfg: BranchConfiguration, periods: PeriodData, quad: QuadratureSpec = PERIOD_QUAD):
    """U(inf^1) along a cut-free ray from l_1 (sheet 1, where w ~ +lam^(g+1)).

    The ray is integrated up to radius ``10 * diameter``; the remainder is
    mapped to a finite interval by lam = l_1 + R d / s (the integrand decays
    at least like lam^-2).  U(inf^2) = -U(inf^1).
    """
    g = cfg.genus
    l1 = cfg.points[0]
    d = _ray_direction(cfg)
    R = 10.0 * cfg.diameter
    head, e1 = _integrate_path_segment(cfg, l1, l1 + R * d, True, False, quad)

    def tail(s):
        s = np.asarray(s).real
        lam = l1 + R * d / s
        return _powers(lam, g) / w_values(cfg, lam) * (R * d / (s * s))

    # s in (0, 1]; integrand is O(s^(g+1-k... )) -> bounded at s -> 0
    t, e2 = integrate_smooth(tail, 0.0, 1.0, QuadratureSpec("gauss-legendre-adaptive", 16, quad.tol, quad.max_nodes))
    raw = head + t
    return AbelValue(periods.A_inv @ raw, e1 + e2)
