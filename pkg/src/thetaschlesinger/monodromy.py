"""Independent check of monodromies by integrating dPsi/dlam = sum A_j/(lam - l_j) Psi."""
from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from .errors import PathError
from .schlesinger import MonodromyData, SchlesingerSolution


@dataclass(frozen=True)
class LoopPath:
    """Polyline from ``base`` to near ``center``, a CCW circle of ``radius``, and back."""

    base: complex
    center: complex
    radius: float
    waypoints: tuple = ()

    def pieces(self):
        """List of (lam(s), dlam/ds(s)) on s in [0, 1]."""
        start = self.center + self.radius * _unit(self.base - self.center if not self.waypoints
                                                  else self.waypoints[-1] - self.center)
        nodes = [self.base, *self.waypoints, start]
        out = []
        for a, b in zip(nodes[:-1], nodes[1:]):
            out.append(_segment(a, b))
        phi0 = cmath.phase(start - self.center)
        c, r = self.center, self.radius
        out.append((lambda s, c=c, r=r, p=phi0: c + r * np.exp(1j * (p + 2 * np.pi * s)),
                    lambda s, r=r, p=phi0: 2j * np.pi * r * np.exp(1j * (p + 2 * np.pi * s))))
        for a, b in zip(nodes[::-1][:-1], nodes[::-1][1:]):
            out.append(_segment(a, b))
        return out

    def length(self) -> float:
        nodes = [self.base, *self.waypoints]
        legs = sum(abs(b - a) for a, b in zip(nodes[:-1], nodes[1:]))
        last = abs(nodes[-1] - self.center) - self.radius
        return 2 * (legs + last) + 2 * math.pi * self.radius

    def clearance(self, points) -> float:
        """Smallest distance from the polyline legs and circle to the given poles."""
        nodes = [self.base, *self.waypoints,
                 self.center + self.radius * _unit((self.waypoints[-1] if self.waypoints else self.base) - self.center)]
        best = math.inf
        for p in points:
            if p == self.center:
                best = min(best, self.radius)
                continue
            for a, b in zip(nodes[:-1], nodes[1:]):
                best = min(best, _point_segment_distance(p, a, b))
            best = min(best, abs(abs(p - self.center) - self.radius))
        return best


def _unit(z):
    return z / abs(z)


def _segment(a, b):
    return (lambda s, a=a, b=b: a + (b - a) * s, lambda s, a=a, b=b: (b - a) + 0 * s)


def _point_segment_distance(p, a, b):
    d = b - a
    t = ((p - a) * d.conjugate()).real / (abs(d) ** 2)
    t = min(1.0, max(0.0, t))
    return abs(p - (a + t * d))


@dataclass(frozen=True)
class TransportResult:
    M: np.ndarray
    step_error: float
    path_length: float


def _rhs_factory(points, A, piece):
    lam_f, dlam_f = piece
    pts = np.asarray(points)
    As = np.asarray(A)

    def rhs(s, y):
        lam = lam_f(s)
        coef = np.tensordot(1.0 / (lam - pts), As, axes=1) * dlam_f(s)
        Y = y.reshape(2, 2)
        return (coef @ Y).ravel()

    return rhs


def transport(points, A, path: LoopPath, tol: float = 1e-10) -> TransportResult:
    """Fundamental solution of dY/dlam = sum A_j/(lam - l_j) Y around ``path`` with Y(base) = I."""
    min_dist = min(abs(a - b) for i, a in enumerate(points) for b in points[i + 1:]) if len(points) > 1 else 1.0
    if path.clearance(points) < 0.1 * min_dist:
        raise PathError("loop passes too close to a pole")

    def run(rtol):
        Y = np.eye(2, dtype=complex).ravel()
        for piece in path.pieces():
            sol = solve_ivp(_rhs_factory(points, A, piece), (0.0, 1.0), Y, method="DOP853",
                            rtol=rtol, atol=rtol * 1e-2)
            if not sol.success:
                raise PathError(f"integration failed: {sol.message}")
            Y = sol.y[:, -1]
        return Y.reshape(2, 2)

    M = run(tol)
    M_coarse = run(tol * 10)
    return TransportResult(M, float(np.max(np.abs(M - M_coarse))), path.length())


def default_loops(points, base: complex | None = None):
    """One small CCW loop per branch point, reached along straight rays from a common base.

    The base sits at 10 diameters from the centroid, on the left of the
    chain l_1 -> l_n.  Directions are tried from the perpendicular outward;
    the first one whose rays keep clear of the other points and see
    l_1, ..., l_n in counterclockwise order (the loop system of the
    predicted data) is used.  Returns (loops, base).
    """
    pts = list(points)
    centroid = sum(pts) / len(pts)
    diam = max(abs(a - b) for a in pts for b in pts)
    dmin = min(abs(a - b) for i, a in enumerate(pts) for b in pts[i + 1:])
    radius = 0.25 * dmin
    left = cmath.phase(1j * (pts[-1] - pts[0]))
    candidates = [base] if base is not None else [
        centroid + 10 * diam * cmath.exp(1j * (left + a))
        for a in [0.0] + [s * k * math.pi / 48 for k in range(1, 48) for s in (1, -1)]
    ]
    n = len(pts)
    fallback = None
    for b in candidates:
        loops = [LoopPath(b, c, radius) for c in pts]
        if all(lp.clearance(pts) >= 0.1 * dmin for lp in loops):
            if base is not None or angular_order(pts, b) == list(range(n)):
                return loops, b
            fallback = fallback or (loops, b)
    if fallback is None:
        raise PathError("no base point with clear rays to every branch point")
    warnings.warn("no base point sees the branch points in counterclockwise index order; "
                  "pair traces refer to a different loop system", RuntimeWarning, stacklevel=2)
    return fallback


def angular_order(points, base) -> list:
    """Indices of the points sorted counterclockwise as seen from ``base``.

    Angles are measured from the direction pointing from the centroid
    toward ``base``, so the branch cut of the argument lies behind the base.
    """
    centroid = sum(points) / len(points)
    ref = _unit(base - centroid)

    def key(i):
        return cmath.phase((points[i] - base) / -ref)

    return sorted(range(len(points)), key=key)


def _best_conjugation(M_num, M_pred):
    """K with det K = 1 minimizing sum |K M_num - M_pred K|, and the residual defect."""
    rows = []
    for Mn, Mp in zip(M_num, M_pred):
        # vec(K Mn - Mp K) linear in K (row-major vec)
        L = np.kron(np.eye(2), Mn.T) - np.kron(Mp, np.eye(2))
        rows.append(L)
    L = np.vstack(rows)
    _, _, vh = np.linalg.svd(L)
    K = vh[-1].conj().reshape(2, 2)
    d = np.linalg.det(K)
    if abs(d) < 1e-14:
        return K, math.inf
    K = K / cmath.sqrt(d)
    Kinv = np.linalg.inv(K)
    defect = max(float(np.max(np.abs(K @ Mn @ Kinv - Mp))) for Mn, Mp in zip(M_num, M_pred))
    return K, defect


@dataclass
class MonodromyReport:
    M_num: list
    traces: list
    pair_trace_defect: float
    conjugation_defect: float
    overall_sign: int
    cyclic_defect: float
    cyclic_order: list
    det_defect: float
    eigenvalue_defect: float
    step_error: float
    base: complex
    warnings: list = field(default_factory=list)

    @property
    def max_trace(self) -> float:
        return max(abs(t) for t in self.traces)

    def as_dict(self) -> dict:
        return {
            "max_trace": self.max_trace,
            "pair_trace_defect": self.pair_trace_defect,
            "conjugation_defect": self.conjugation_defect,
            "overall_sign": self.overall_sign,
            "cyclic_defect": self.cyclic_defect,
            "cyclic_order": [i + 1 for i in self.cyclic_order],
            "det_defect": self.det_defect,
            "eigenvalue_defect": self.eigenvalue_defect,
            "step_error": self.step_error,
        }


def verify_monodromies(sol: SchlesingerSolution, md: MonodromyData, tol: float = 1e-10,
                       base: complex | None = None) -> MonodromyReport:
    """Compare numerically transported monodromies with the predicted anti-diagonal ones.

    The transported matrices refer to a finite base point, so they agree with
    the prediction only up to one common conjugation (and a common sign,
    from the square root of det Phi).  Traces and pair traces are compared
    directly; the conjugation is fitted by least squares.
    """
    pts = list(sol.cfg.points)
    loops, base = default_loops(pts, base)
    results = [transport(pts, sol.A, lp, tol) for lp in loops]
    M_num = [r.M for r in results]
    notes = []
    n = len(pts)
    pair = 0.0
    for j in range(n):
        for k in range(n):
            pred = np.trace(md.M[j] @ md.M[k])
            pair = max(pair, abs(np.trace(M_num[j] @ M_num[k]) - pred))
    if all(np.max(np.abs(md.M[j] @ md.M[k] - md.M[k] @ md.M[j])) < 1e-12
           for j in range(n) for k in range(n)):
        notes.append("predicted monodromies commute; conjugation fit is degenerate")
        warnings.warn(notes[-1], RuntimeWarning, stacklevel=2)
    best = (math.inf, None, 1)
    for sign in (1, -1):
        K, d = _best_conjugation([sign * M for M in M_num], list(md.M))
        if d < best[0]:
            best = (d, K, sign)
    order = angular_order(pts, base)
    cyc = []
    for seq in (order, order[::-1]):
        P = np.eye(2, dtype=complex)
        for i in seq:
            P = M_num[i] @ P
        cyc.append((float(np.max(np.abs(P - np.eye(2)))), seq))
    cyc.sort(key=lambda c: c[0])
    dets = max(abs(np.linalg.det(M) - 1) for M in M_num)
    eig = max(float(np.max(np.abs(sorted(np.linalg.eigvals(M), key=lambda z: z.imag) - np.array([-1j, 1j]))))
              for M in M_num)
    return MonodromyReport(
        M_num=M_num,
        traces=[complex(np.trace(M)) for M in M_num],
        pair_trace_defect=float(pair),
        conjugation_defect=float(best[0]),
        overall_sign=best[2],
        cyclic_defect=cyc[0][0],
        cyclic_order=list(cyc[0][1]),
        det_defect=float(dets),
        eigenvalue_defect=eig,
        step_error=max(r.step_error for r in results),
        base=base,
        warnings=notes,
    )
