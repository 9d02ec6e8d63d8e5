"""Genus-one reduction: Painleve VI solutions built from Jacobi theta functions.

Conventions used throughout (checked against the residue matrices of the
genus-one Schlesinger solution):

* ``sigma`` is the 1x1 Riemann matrix of w^2 = (l - l1)...(l - l4) in the
  homology basis of :mod:`thetaschlesinger.curve`, and the cross-ratio
  t = (l3 - l1)(l4 - l2) / ((l3 - l2)(l4 - l1)) equals theta3^4 / theta4^4.
* Half-periods: U(l2) = 1/2, U(l3) = (1 + sigma)/2, U(l4) = sigma/2.
* With L(z) = ln(theta[p,q](z) / theta1(z)) the (12) entries of the gauged
  residues are proportional to L'/L'' at those half-periods.

Derivatives in t are central differences with Richardson extrapolation,
re-inverting sigma for every abscissa.  Inner quantities that need a third
derivative are differentiated in the sigma plane by Cauchy integrals.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .curve import BranchConfiguration, riemann_matrix
from .errors import (ConfigurationError, DegenerateSolutionError, DomainError,
                     ModuleInversionError, PathError, PreconditionError, QuadratureError,
                     RootFindingError,
                     ReducibleCaseError, SingularSampleError)
from .numeric import (FiniteDifferenceSpec, QuadratureSpec, cauchy_derivatives,
                      central_derivative, integrate_inverse_sqrt, newton_root)
from .theta import Characteristic, jacobi_theta, theta_full

T_CONVENTIONS = ("theta3/theta4", "theta4/theta2")
_EXCLUDED = ((0.5, 0.0), (0.0, 0.5))


# --- modulus ----------------------------------------------------------------

def t_of_sigma(sigma, convention: str = "theta3/theta4") -> complex:
    """Cross-ratio attached to the modulus.

    ``"theta3/theta4"`` (default) is the relation realized by the curve
    module; ``"theta4/theta2"`` is kept for comparison only, it is not a
    cross-ratio of the branch points for any choice of basis.
    """
    sigma = complex(sigma)
    if not sigma.imag > 0:
        raise DomainError("Im sigma must be positive")
    if convention == "theta3/theta4":
        return (jacobi_theta(3, 0, sigma) / jacobi_theta(4, 0, sigma)) ** 4
    if convention == "theta4/theta2":
        return (jacobi_theta(4, 0, sigma) / jacobi_theta(2, 0, sigma)) ** 4
    raise ValueError(f"convention must be one of {T_CONVENTIONS}")


def _dt_dsigma(sigma: complex, t: complex) -> complex:
    # heat equation: d/dsigma ln theta_k(0) = theta_k''(0) / (4 pi i theta_k(0))
    r3 = jacobi_theta(3, 0, sigma, derivs=2)
    r4 = jacobi_theta(4, 0, sigma, derivs=2)
    return t * (r3[2] / r3[0] - r4[2] / r4[0]) / (1j * math.pi)


@dataclass(frozen=True)
class EllipticModule:
    sigma: complex

    def __post_init__(self):
        object.__setattr__(self, "sigma", complex(self.sigma))
        if not self.sigma.imag > 0:
            raise DomainError("Im sigma must be positive")

    @property
    def t(self) -> complex:
        return t_of_sigma(self.sigma)

    def consistency_defect(self, t) -> float:
        t = t.t if isinstance(t, TParam) else complex(t)
        return abs(self.t - t)


def cross_ratio(points) -> complex:
    l1, l2, l3, l4 = (complex(x) for x in points)
    return (l3 - l1) * (l4 - l2) / ((l3 - l2) * (l4 - l1))


@dataclass(frozen=True)
class TParam:
    t: complex
    provenance: str = "given"

    def __post_init__(self):
        t = complex(self.t)
        object.__setattr__(self, "t", t)
        if not np.isfinite(t) or abs(t) < 1e-14 or abs(t - 1) < 1e-14:
            raise DomainError("t must be finite and different from 0 and 1")
        if self.provenance not in ("given", "cross-ratio"):
            raise ValueError("provenance must be 'given' or 'cross-ratio'")

    @classmethod
    def from_points(cls, points) -> "TParam":
        if len(points) != 4:
            raise ConfigurationError("the cross-ratio needs exactly four points")
        return cls(cross_ratio(points), "cross-ratio")


def _check_t(t) -> complex:
    return TParam(t).t


# Mobius images l = 1/(mu - c) of (inf, 0, 1, t); the first c that gives
# non-crossing cuts is used, so the seed is deterministic.
_SEED_SHIFTS = (-1 - 1j, -1 + 1j, 2 + 2j, 2 - 2j, 0.5 + 3j, 0.5 - 3j, -3.0, 4.0)


def _mobius_images(t):
    for c in _SEED_SHIFTS:
        if abs(t - c) < 1e-3:
            continue
        yield [0.0, 1 / (0 - c), 1 / (1 - c), 1 / (t - c)]


def seed_configuration(t) -> BranchConfiguration:
    """Four finite points with cross-ratio t, as a Mobius image of (inf, 0, 1, t).

    For real t < 0 the pairs (inf, 0) and (1, t) interlace on a circle, so
    every image has crossing cuts; :func:`sigma_from_t` then seeds from a
    slightly rotated t.
    """
    t = _check_t(t)
    return _seed(t)[0]


def _seed(t: complex):
    errors = []
    for pts in _mobius_images(t):
        try:
            cfg = BranchConfiguration(pts)
            return cfg, sigma_from_points(cfg)
        except (ConfigurationError, PathError, QuadratureError) as exc:
            errors.append(str(exc))
    raise ModuleInversionError(f"no admissible Mobius image for t={t}: {errors}")


def sigma_from_points(cfg: BranchConfiguration) -> complex:
    if cfg.genus != 1:
        raise ConfigurationError("an elliptic modulus needs exactly four branch points")
    return complex(riemann_matrix(cfg).B[0, 0])


def _newton_sigma(t: complex, seed: complex, tol: float) -> complex:
    f = lambda s: t_of_sigma(s) - t if s.imag > 0 else complex("nan")
    fp = lambda s: _dt_dsigma(s, t_of_sigma(s))
    return newton_root(f, seed, tol=tol * max(1.0, abs(t)), fprime=fp, maxiter=40)


@lru_cache(maxsize=4096)
def _sigma_from_t_cached(t: complex, tol: float) -> complex:
    drift = 1e-3
    failures = []
    for angle in (0.0, 0.02, 0.1, 0.3):
        # angle > 0: interlaced real case, seed from the upper side of the axis
        try:
            seed = _seed(t * cmath.exp(1j * angle))[1]
            break
        except ModuleInversionError as exc:
            failures.append(str(exc))
            drift = 0.5
    else:
        raise ModuleInversionError("; ".join(failures))
    try:
        s = _newton_sigma(t, seed, tol)
    except RootFindingError as exc:
        raise ModuleInversionError(
            f"Newton iteration for sigma failed from seed {seed}: {exc}; trace {exc.trace}"
        ) from exc
    if not s.imag > 0 or abs(s - seed) > drift * max(1.0, abs(seed)):
        raise ModuleInversionError(f"sigma drifted from the period seed {seed} to {s}")
    return s


def sigma_from_t(t, tol: float = 1e-13) -> EllipticModule:
    """Modulus with theta3^4/theta4^4 = t, seeded by the period ratio of a Mobius-equivalent curve."""
    return EllipticModule(_sigma_from_t_cached(_check_t(t), float(tol)))


def _sigma_near(t: complex, sigma0: complex, tol: float = 1e-13) -> complex:
    """Continuation of sigma to a nearby t, seeded by a known modulus."""
    try:
        return _newton_sigma(t, sigma0, tol)
    except RootFindingError as exc:
        raise ModuleInversionError(f"sigma continuation from {sigma0} failed: {exc}") from exc


# --- samples and the equation -----------------------------------------------

@dataclass(frozen=True)
class PviCoefficients:
    alpha: complex
    beta: complex
    gamma: complex
    delta: complex

    def as_tuple(self):
        return (self.alpha, self.beta, self.gamma, self.delta)

    @classmethod
    def from_exponents(cls, t1, t2, t3, t4) -> "PviCoefficients":
        return cls((t1 - 1) ** 2 / 2, -t2 ** 2 / 2, t3 ** 2 / 2, 0.5 - t4 ** 2 / 2)


HALF_EXPONENTS = PviCoefficients(0.125, -0.125, 0.125, 0.375)
PICARD_CASE = PviCoefficients(0.0, 0.0, 0.0, 0.5)


@dataclass
class PviSample:
    t: complex
    y: complex
    yp: complex | None = None
    ypp: complex | None = None
    error: float = 0.0
    singular: bool = False
    info: dict = field(default_factory=dict)


def pvi_rhs(t, y, yp, coeffs: PviCoefficients) -> complex:
    a, b, c, d = coeffs.as_tuple()
    return (0.5 * (1 / y + 1 / (y - 1) + 1 / (y - t)) * yp ** 2
            - (1 / t + 1 / (t - 1) + 1 / (y - t)) * yp
            + y * (y - 1) * (y - t) / (t ** 2 * (t - 1) ** 2)
            * (a + b * t / y ** 2 + c * (t - 1) / (y - 1) ** 2 + d * t * (t - 1) / (y - t) ** 2))


def pvi_residual(sample: PviSample, coeffs: PviCoefficients = HALF_EXPONENTS) -> float:
    """|y'' - RHS(t, y, y')| for the sixth Painleve equation."""
    if sample.singular:
        raise SingularSampleError(f"sample at t={sample.t} is flagged singular")
    if sample.yp is None or sample.ypp is None:
        raise PreconditionError("sample carries no derivatives")
    return float(abs(sample.ypp - pvi_rhs(sample.t, sample.y, sample.yp, coeffs)))


def fit_pvi_coefficients(samples) -> tuple:
    """Least-squares (alpha, beta, gamma, delta) making the samples solve the equation.

    The right-hand side is linear in the coefficients.  Returns
    (coefficients, max residual of the fit).
    """
    rows, rhs = [], []
    for s in samples:
        t, y, yp = s.t, s.y, s.yp
        k = y * (y - 1) * (y - t) / (t ** 2 * (t - 1) ** 2)
        rows.append([k, k * t / y ** 2, k * (t - 1) / (y - 1) ** 2, k * t * (t - 1) / (y - t) ** 2])
        rhs.append(s.ypp - pvi_rhs(t, y, yp, PviCoefficients(0, 0, 0, 0)))
    M, b = np.array(rows), np.array(rhs)
    c = np.linalg.lstsq(M, b, rcond=None)[0]
    return PviCoefficients(*c), float(np.max(np.abs(M @ c - b)))


def _fd_spec_for(t: complex, order: int, fd: FiniteDifferenceSpec | None) -> FiniteDifferenceSpec:
    if fd is not None and fd.step is not None:
        return fd
    dist = min(abs(t), abs(t - 1))
    base = (1e-4 if order == 1 else 2e-3) * max(1.0, abs(t))
    levels = fd.richardson_levels if fd is not None else 2
    return FiniteDifferenceSpec(step=min(base, 0.05 * dist), richardson_levels=levels)


def _is_singular(t, y, scale=1e-10) -> bool:
    if not np.isfinite(y):
        return True
    return min(abs(y), abs(y - 1), abs(y - t)) < scale * max(1.0, abs(t))


def sample_in_sigma(fn_sigma, t, **info) -> PviSample:
    """Value and t-derivatives of F(sigma(t)) by Cauchy integrals in the sigma plane.

    The error estimate compares two contour radii.
    """
    t = _check_t(t)
    s = sigma_from_t(t).sigma
    try:
        y = fn_sigma(s)
    except ZeroDivisionError:
        return PviSample(t, complex("nan"), singular=True, info=info)
    if _is_singular(t, y):
        return PviSample(t, y, singular=True, info=info)
    r = _sigma_radius(s)
    try:
        d = _t_derivatives(fn_sigma, s, 2, r)
        d_half = _t_derivatives(fn_sigma, s, 2, r / 2)
    except (ZeroDivisionError, DomainError):
        return PviSample(t, y, singular=True, info=info)
    err = max(abs(d[1] - d_half[1]), abs(d[2] - d_half[2]))
    ok = all(np.isfinite(v) for v in d)
    return PviSample(t, y, d[1], d[2], float(err), singular=not ok, info=info)


def _sample(fn_sigma, t, fd, method, **info) -> PviSample:
    if method == "cauchy":
        return sample_in_sigma(fn_sigma, t, **info)
    if method == "fd":
        return sample_in_t(_tracked(fn_sigma, t), t, fd, **info)
    raise ValueError("method must be 'cauchy' or 'fd'")


def sample_in_t(fn, t, fd: FiniteDifferenceSpec | None = None, **info) -> PviSample:
    """Value and first two t-derivatives of ``fn`` by Richardson central differences."""
    t = _check_t(t)
    try:
        y = fn(t)
    except ZeroDivisionError:
        return PviSample(t, complex("nan"), singular=True, info=info)
    if _is_singular(t, y):
        return PviSample(t, y, singular=True, info=info)
    yp, e1 = central_derivative(fn, t, _fd_spec_for(t, 1, fd), order=1)
    ypp, e2 = central_derivative(fn, t, _fd_spec_for(t, 2, fd), order=2)
    ok = all(np.isfinite(v) for v in (yp, ypp))
    return PviSample(t, y, yp, ypp, float(max(e1, e2)), singular=not ok, info=info)


# --- theta building blocks --------------------------------------------------

def _check_pq(p, q, allow_excluded: bool = False):
    p, q = complex(p), complex(q)
    if not allow_excluded:
        for ep, eq in _EXCLUDED:
            if abs(cmath.exp(2j * math.pi * (p - ep)) - 1) < 1e-12 and \
                    abs(cmath.exp(2j * math.pi * (q - eq)) - 1) < 1e-12:
                raise DegenerateSolutionError(
                    f"characteristic [{p:g}, {q:g}] is excluded: the formula degenerates"
                )
        if abs(cmath.exp(2j * math.pi * (p - 0.5)) - 1) < 1e-12 and \
                abs(cmath.exp(2j * math.pi * (q - 0.5)) - 1) < 1e-12:
            raise DegenerateSolutionError("characteristic [1/2, 1/2] gives theta[p,q] = +-theta_1")
    return p, q


def _log_ratio_derivs(z, sigma, p, q):
    """(L', L'', dL/dsigma) for L = ln(theta[p,q](z|sigma) / theta_1(z|sigma))."""
    r = theta_full([z], [[sigma]], Characteristic([p], [q]), derivs=2)
    a, a1, a2 = r.value, complex(r.grad[0]), complex(r.hess[0, 0])
    b, b1, b2 = jacobi_theta(1, z, sigma, derivs=2)
    L1 = a1 / a - b1 / b
    L2 = (a2 / a - (a1 / a) ** 2) - (b2 / b - (b1 / b) ** 2)
    Ls = (a2 / a - b2 / b) / (4j * math.pi)
    return L1, L2, Ls


def residue_ratio_at(z, sigma, p, q) -> complex:
    """L'/L'' at a half-period: proportional to the (12) entry of the gauged residue there."""
    L1, L2, _ = _log_ratio_derivs(z, sigma, p, q)
    return L1 / L2


def _v(z, sigma, p, q) -> complex:
    # d/dz ln d/dz L
    L1, L2, _ = _log_ratio_derivs(z, sigma, p, q)
    return L2 / L1


def y_of_sigma(sigma, p, q, variant: str = "derived") -> complex:
    """Closed-form y at modulus sigma (t = theta3^4/theta4^4).

    ``"derived"``: y = t / (1 + (1 - t) y1) with
    y1 = [d/dz ln d/dz L](1/2) / [d/dz ln d/dz L](sigma/2).
    ``"uncorrected"``: y = -t / (1 + (1 - t) y1) with y1 additionally multiplied by
    (dL/dsigma)(sigma/2) / (dL/dsigma)(1/2); kept to document that it does not
    solve the equation.
    """
    sigma = complex(sigma)
    t = t_of_sigma(sigma)
    v_half = _v(0.5, sigma, p, q)
    v_s = _v(sigma / 2, sigma, p, q)
    if variant == "derived":
        return t / (1 + (1 - t) * v_half / v_s)
    if variant == "uncorrected":
        Ls_half = _log_ratio_derivs(0.5, sigma, p, q)[2]
        Ls_s = _log_ratio_derivs(sigma / 2, sigma, p, q)[2]
        return -t / (1 + (1 - t) * v_half * Ls_s / (v_s * Ls_half))
    raise ValueError("variant must be 'derived' or 'uncorrected'")


def y_alt_of_sigma(sigma, p, q, variant: str = "derived") -> complex:
    """y = t u(sigma/2) / (u(sigma/2) + (1 - t) u(1/2)).

    ``"derived"``: u = d/dz ln d/dz L; ``"uncorrected"``: u additionally divided
    by dL/dsigma.
    """
    sigma = complex(sigma)
    t = t_of_sigma(sigma)

    def u(z):
        L1, L2, Ls = _log_ratio_derivs(z, sigma, p, q)
        if variant == "derived":
            return L2 / L1
        if variant == "uncorrected":
            return L2 / L1 / Ls
        raise ValueError("variant must be 'derived' or 'uncorrected'")

    us, uh = u(sigma / 2), u(0.5)
    return t * us / (us + (1 - t) * uh)


def _tracked(fn_sigma, t0):
    """Turn a function of sigma into one of t, continuing sigma from t0."""
    s0 = sigma_from_t(t0).sigma
    return lambda t: fn_sigma(_sigma_near(complex(t), s0))


def y_theta(t, p, q, fd: FiniteDifferenceSpec | None = None, variant: str = "derived",
            method: str = "cauchy") -> PviSample:
    """Theta-function solution of PVI(1/8, -1/8, 1/8, 3/8) as a sample with y', y''.

    ``method="cauchy"`` differentiates in the sigma plane; ``"fd"`` uses
    central differences in t with ``fd``.
    """
    p, q = _check_pq(p, q)
    t = _check_t(t)
    return _sample(lambda s: y_of_sigma(s, p, q, variant), t, fd, method,
                   form="y_theta", variant=variant, sigma=sigma_from_t(t).sigma)


def y_alt(t, p, q, fd: FiniteDifferenceSpec | None = None, variant: str = "derived",
          method: str = "cauchy") -> PviSample:
    p, q = _check_pq(p, q)
    t = _check_t(t)
    return _sample(lambda s: y_alt_of_sigma(s, p, q, variant), t, fd, method,
                   form="y_alt", variant=variant)


# --- elliptic tau ----------------------------------------------------------

def complete_integral(t, interval: str = "1t", quad: QuadratureSpec | None = None) -> complex:
    """Integral of dl / sqrt(l (l - 1)(l - t)) over [1, t] (``"1t"``) or [0, 1] (``"01"``).

    The root is taken as sqrt(l) * i * sqrt((l - a)(b - l)) on the segment
    [a, b] with the principal sqrt(l); the result is continuous in t away
    from the segment's degenerations.  [1, t] is the a-period of the basis
    behind :func:`t_of_sigma` and equals -i pi theta4(0)^2.
    """
    t = _check_t(t)
    quad = quad or QuadratureSpec("gauss-chebyshev", tol=1e-14, max_nodes=16384)
    if interval == "1t":
        a, b = 1.0, t
        h = lambda lam, da, db, root: 1 / (1j * np.sqrt(lam))
    elif interval == "01":
        a, b = 0.0, 1.0
        h = lambda lam, da, db, root: 1 / (1j * np.sqrt(lam - t))
    else:
        raise ValueError("interval must be '1t' or '01'")
    value, _ = integrate_inverse_sqrt(h, a, b, quad)
    return complex(value)


def log_tau_elliptic(t, p, q, interval: str = "1t", reference: complex | None = None) -> complex:
    """ln tau(t) = ln theta[p,q](0|sigma) - ln(t(t-1))/8 - ln(I)/2.

    Principal logarithms; with ``reference`` the imaginary part is shifted by
    a multiple of 2 pi i toward it, which continues the branch along a path.
    """
    t = _check_t(t)
    p, q = complex(p), complex(q)
    s = sigma_from_t(t).sigma
    th = theta_full([0.0], [[s]], Characteristic([p], [q])).value
    val = cmath.log(th) - cmath.log(t * (t - 1)) / 8 - cmath.log(complete_integral(t, interval)) / 2
    if reference is not None:
        k = round((reference - val).imag / (2 * math.pi))
        val += 2j * math.pi * k
    return val


def tau_elliptic(t, p, q, interval: str = "1t") -> complex:
    return cmath.exp(log_tau_elliptic(t, p, q, interval))


def zeta_of_sigma(sigma, p, q) -> complex:
    """zeta = t(t-1) d/dt ln tau, from the heat equation (no differencing)."""
    sigma = complex(sigma)
    t = t_of_sigma(sigma)
    r = theta_full([0.0], [[sigma]], Characteristic([p], [q]), derivs=2)
    r4 = jacobi_theta(4, 0, sigma, derivs=2)
    dlog_sigma = (complex(r.hess[0, 0]) / r.value - r4[2] / r4[0]) / (4j * math.pi)
    return t * (t - 1) * dlog_sigma / _dt_dsigma(sigma, t) - (2 * t - 1) / 8


def _sigma_radius(sigma: complex) -> float:
    return 0.05 * min(1.0, sigma.imag)


def _t_derivatives(fn_sigma, sigma: complex, n: int = 2, radius: float | None = None):
    """t-derivatives 0..n (n <= 3) of F(sigma(t)) by Cauchy integrals in the sigma plane."""
    r = radius or _sigma_radius(sigma)
    F = cauchy_derivatives(fn_sigma, sigma, r, n, nodes=48)
    T = cauchy_derivatives(t_of_sigma, sigma, r, n, nodes=48)
    t1 = T[1]
    out = [F[0], F[1] / t1]
    if n >= 2:
        out.append((F[2] - out[1] * T[2]) / t1 ** 2)
    if n >= 3:
        out.append((F[3] - 3 * out[2] * t1 * T[2] - out[1] * T[3]) / t1 ** 3)
    return out


def zeta_derivatives(t, p, q):
    """(zeta, zeta', zeta'') at t."""
    s = sigma_from_t(t).sigma
    return tuple(_t_derivatives(lambda x: zeta_of_sigma(x, p, q), s, 2))


def zeta_residual(t, p, q, form: str = "derived") -> float:
    """Defect of [t(t-1) z'']^2 = z' [(z' + 1/4)^2 - ((2t-1) z' - k z)^2].

    ``"derived"`` uses k = 2 (the sigma-form of the equation for all
    exponents 1/2); ``"uncorrected"`` uses k = 1.
    """
    t = _check_t(t)
    k = {"derived": 2, "uncorrected": 1}[form]
    z, z1, z2 = zeta_derivatives(t, p, q)
    return float(abs((t * (t - 1) * z2) ** 2 - z1 * ((z1 + 0.25) ** 2 - ((2 * t - 1) * z1 - k * z) ** 2)))


def _y_from_zeta(t, z, z1, z2, normalization: str = "t(t-1)") -> complex:
    P, P1 = t * (t - 1), 2 * t - 1
    # derivatives of l = ln tau
    l1 = z / P
    l2 = (z1 - P1 * l1) / P
    l3 = (z2 - 2 * l1 - 2 * P1 * l2) / P
    return _y_from_log_derivs(t, l1, l2, l3, normalization)


def _y_from_log_derivs(t, l1, l2, l3, normalization: str = "t(t-1)") -> complex:
    P, P1 = t * (t - 1), 2 * t - 1
    # ln(t(t-1)^(1/8) tau)
    m1 = l1 + P1 / (8 * P)
    m2 = l2 + (2 / P - P1 ** 2 / P ** 2) / 8
    m3 = l3 + (-6 * P1 / P ** 2 + 2 * P1 ** 3 / P ** 3) / 8
    if normalization == "t(t-1)":
        w, w1, w2 = P, P1, 2.0
    elif normalization == "plain":
        w, w1, w2 = 1.0, 0.0, 0.0
    else:
        raise ValueError("normalization must be 't(t-1)' or 'plain'")
    Dt, dDt, ddDt = w * l1, w1 * l1 + w * l2, w2 * l1 + 2 * w1 * l2 + w * l3
    Ds, dDs, ddDs = w * m1, w1 * m1 + w * m2, w2 * m1 + 2 * w1 * m2 + w * m3
    D_ratio = w * (ddDt / dDt - ddDs / dDs)
    D2 = w * dDs / Ds
    return t - P / (D_ratio + P / D2)


def y_from_log_tau(log_tau, t, normalization: str = "t(t-1)", radius: float | None = None) -> complex:
    """y from a callable t -> ln tau(t), differentiated by a Cauchy integral in t.

    Values on the contour are shifted by multiples of 2 pi i toward ln tau(t),
    so principal-branch jumps of the callable do not matter.  Only
    derivatives of ln tau enter, so a constant factor in tau drops out.
    """
    t = _check_t(t)
    r = radius or 0.05 * min(abs(t), abs(t - 1), 1.0)
    centre = complex(log_tau(t))

    def aligned(x):
        v = complex(log_tau(x))
        return v + 2j * math.pi * round((centre - v).imag / (2 * math.pi))

    d = cauchy_derivatives(aligned, t, r, 3, nodes=48)
    return _y_from_log_derivs(t, d[1], d[2], d[3], normalization)


def y_from_tau_value(t, p, q, normalization: str = "t(t-1)", sigma0: complex | None = None) -> complex:
    t = _check_t(t)
    s = sigma_from_t(t).sigma if sigma0 is None else _sigma_near(t, sigma0)
    z, z1, z2 = _t_derivatives(lambda x: zeta_of_sigma(x, p, q), s, 2)
    return _y_from_zeta(t, z, z1, z2, normalization)


def y_from_tau(t, p, q, fd: FiniteDifferenceSpec | None = None,
               normalization: str = "t(t-1)") -> PviSample:
    """y from logarithmic derivatives of the elliptic tau.

    D(f) = t(t-1) d/dt ln f and D^2 = D o D (``normalization="t(t-1)"``);
    ``"plain"`` uses D(f) = d/dt ln f.
    """
    p, q = _check_pq(p, q)
    t = _check_t(t)
    s0 = sigma_from_t(t).sigma
    fn = lambda x: y_from_tau_value(x, p, q, normalization, sigma0=s0)
    return sample_in_t(fn, t, fd, form="y_from_tau", normalization=normalization)


# --- Schlesinger route --------------------------------------------------------

def _residue_ratios(sigma, p, q):
    u = {2: 0.5, 3: 0.5 + sigma / 2, 4: sigma / 2}
    X = {j: residue_ratio_at(z, sigma, p, q) for j, z in u.items()}
    return X[3] / X[2], X[4] / X[2]


def y_pair_from_points(points, p, q):
    """Both expressions for y from the gauged (12) residues; returns (y_via_4, y_via_3, t, sigma)."""
    cfg = points if isinstance(points, BranchConfiguration) else BranchConfiguration(points)
    if cfg.genus != 1:
        raise ConfigurationError("the Painleve reduction needs exactly four branch points")
    p, q = _check_pq(p, q)
    if Characteristic([p], [q]).is_half_integer():
        raise ReducibleCaseError("half-integer characteristic gives a reducible solution")
    periods = riemann_matrix(cfg)
    sigma = complex(periods.B[0, 0])
    t = cross_ratio(cfg.points)
    r3, r4 = _residue_ratios(sigma, p, q)
    y4 = t / (1 + (1 - t) * r4)
    y3 = 1 / (1 - (1 - t) / t * r3)
    return y4, y3, t, sigma


def y_from_schlesinger(cfg4, p, q, fd: FiniteDifferenceSpec | None = None, move: int = 4) -> PviSample:
    """y for a 4-point configuration; derivatives by moving branch point ``move``.

    Both points' formulas are evaluated; their difference is stored in
    ``info["form_defect"]``.
    """
    cfg = cfg4 if isinstance(cfg4, BranchConfiguration) else BranchConfiguration(cfg4)
    y4, y3, t, sigma = y_pair_from_points(cfg, p, q)
    if _is_singular(t, y4):
        return PviSample(t, y4, singular=True, info={"form_defect": abs(y4 - y3)})
    pts = list(cfg.points)
    k = move - 1

    def moved(x):
        P = list(pts)
        P[k] = x
        return P

    fy = lambda x: y_pair_from_points(moved(x), p, q)[0]
    ft = lambda x: cross_ratio(moved(x))
    step1 = 1e-4 * cfg.min_distance
    step2 = 2e-3 * cfg.min_distance
    x0 = pts[k]
    y1, e1 = central_derivative(fy, x0, FiniteDifferenceSpec(step=step1), 1)
    t1, _ = central_derivative(ft, x0, FiniteDifferenceSpec(step=step1), 1)
    y2, e2 = central_derivative(fy, x0, FiniteDifferenceSpec(step=step2), 2)
    t2, _ = central_derivative(ft, x0, FiniteDifferenceSpec(step=step2), 2)
    yp = y1 / t1
    ypp = (y2 - yp * t2) / t1 ** 2
    return PviSample(t, y4, yp, ypp, float(max(e1, e2)),
                     info={"form_defect": abs(y4 - y3), "y_via_3": y3, "sigma": sigma})


def y_from_residues(A, points) -> complex:
    """Zero of the (12) entry of sum_j A_j/(mu - mu_j) after the gauge that diagonalizes A_1.

    ``A`` are numerical residues (for instance from
    :func:`thetaschlesinger.schlesinger.solve_residues`).  A_1 is brought to
    sigma_3 / 4; the points are mapped to (inf, 0, 1, t).
    """
    w, V = np.linalg.eig(A[0])
    G = V[:, np.argsort(-w.real)]
    c2 = np.linalg.solve(G, A[1] @ G)[0, 1]
    c4 = np.linalg.solve(G, A[3] @ G)[0, 1]
    t = cross_ratio(points)
    return t / (1 + (1 - t) * c4 / c2)


# --- classical solutions ----------------------------------------------------

def _log_theta1_derivs(z, sigma):
    """(ln theta_1)', '', ''' at z."""
    a0, a1, a2, a3 = jacobi_theta(1, z, sigma, derivs=3)
    L1 = a1 / a0
    L2 = a2 / a0 - L1 ** 2
    L3 = a3 / a0 - 3 * a1 * a2 / a0 ** 2 + 2 * L1 ** 3
    return L1, L2, L3


def wp_tilde(z, sigma):
    """(wp~, d wp~/dz) with wp~ = (wp(z) - wp(1/2)) / (wp((1+sigma)/2) - wp(1/2)).

    Periods 1 and sigma in z; roots 0, 1, t at z = 1/2, (1+sigma)/2, sigma/2
    with t = theta3^4/theta4^4.
    """
    sigma = complex(sigma)
    z = complex(z)
    e1 = _log_theta1_derivs(0.5, sigma)[1]
    e2 = _log_theta1_derivs(0.5 + sigma / 2, sigma)[1]
    L1, L2, L3 = _log_theta1_derivs(z, sigma)
    den = e1 - e2
    return (e1 - L2) / den, -L3 / den


def _lattice_point(z, sigma, tol=1e-12) -> bool:
    b = z.imag / sigma.imag
    a = z.real - b * sigma.real
    return abs(b - round(b)) < tol and abs(a - round(a)) < tol


def picard_of_sigma(sigma, c1, c2) -> complex:
    z = (c1 + c2 * sigma) / 2
    if _lattice_point(complex(z), complex(sigma)):
        raise DomainError("argument is a lattice point: wp has a pole")
    return wp_tilde(z, sigma)[0]


def picard_solution(t, c1, c2, fd: FiniteDifferenceSpec | None = None,
                    method: str = "cauchy") -> PviSample:
    """y0(t) = wp~(c1 w1 + c2 w2) with half-periods w1 <-> 1/2, w2 <-> sigma/2; solves PVI(0,0,0,1/2)."""
    t = _check_t(t)
    c1, c2 = complex(c1), complex(c2)
    return _sample(lambda s: picard_of_sigma(s, c1, c2), t, fd, method,
                   form="picard", c1=c1, c2=c2)


def _picard_with_slope(sigma, c1, c2):
    s = complex(sigma)
    y0, dy0 = _t_derivatives(lambda x: picard_of_sigma(x, c1, c2), s, 1)
    return t_of_sigma(s), y0, dy0


def okamoto_transform(sample: PviSample, variant: str = "derived") -> complex:
    """y = y0 + y0 (y0 - 1)(y0 - t) / (t(t-1) y0' - y0 (y0 - 1)).

    ``variant="uncorrected"`` uses y0^2 (y0 - 1)(y0 - t) in the numerator.
    Maps PVI(0, 0, 0, 1/2) solutions to PVI(1/8, -1/8, 1/8, 3/8) ones.
    """
    t, y0, d0 = sample.t, sample.y, sample.yp
    if d0 is None:
        raise PreconditionError("the transformation needs y0'")
    den = t * (t - 1) * d0 - y0 * (y0 - 1)
    if abs(den) < 1e-14 * max(1.0, abs(t * (t - 1) * d0)):
        raise SingularSampleError(f"vanishing denominator at t={t}")
    if variant == "derived":
        num = y0 * (y0 - 1) * (y0 - t)
    elif variant == "uncorrected":
        num = y0 ** 2 * (y0 - 1) * (y0 - t)
    else:
        raise ValueError("variant must be 'derived' or 'uncorrected'")
    return y0 + num / den


def okamoto_picard_solution(t, c1, c2, fd: FiniteDifferenceSpec | None = None,
                            variant: str = "derived", method: str = "fd") -> PviSample:
    """Okamoto transform of the Picard solution.

    The inner y0' always comes from a sigma-plane Cauchy integral; the outer
    derivatives default to differences in t.
    """
    t = _check_t(t)
    c1, c2 = complex(c1), complex(c2)

    def fn_sigma(s):
        tt, y0, d0 = _picard_with_slope(s, c1, c2)
        return okamoto_transform(PviSample(tt, y0, d0), variant)

    return _sample(fn_sigma, t, fd, method, form="okamoto", variant=variant, c1=c1, c2=c2)


def hitchin_of_sigma(sigma, c1, c2, variant: str = "derived"):
    """(t, y) in parametric form, nu = c1 sigma + c2, t = theta3^4/theta4^4.

    ``"derived"``: y = wp~(nu) + wp~'(nu) / (2 ((ln theta_1)'(nu) + 2 pi i c1)).
    ``"uncorrected"``: the expression with coefficients 2 and pi i c1 in the
    theta_1 combination and +theta_1'''(0)/(3 pi^2 theta_4^4 theta_1'(0)).
    """
    sigma = complex(sigma)
    nu = c1 * sigma + c2
    if _lattice_point(complex(nu), sigma):
        raise DomainError("nu is a lattice point")
    t = t_of_sigma(sigma)
    if variant == "derived":
        w, wz = wp_tilde(nu, sigma)
        L1 = _log_theta1_derivs(nu, sigma)[0]
        return t, w + wz / (2 * (L1 + 2j * math.pi * c1))
    if variant == "uncorrected":
        th4 = jacobi_theta(4, 0, sigma)
        d = jacobi_theta(1, 0, sigma, derivs=3)
        a0, a1, a2, a3 = jacobi_theta(1, nu, sigma, derivs=3)
        pi2 = math.pi ** 2
        y = (d[3] / (3 * pi2 * th4 ** 4 * d[1]) + (1 + t) / 3
             + (a3 * a0 - 2 * a2 * a1 + 2j * math.pi * c1 * (a2 * a0 - a1 ** 2))
             / (2 * pi2 * th4 ** 4 * a0 * (a1 + 1j * math.pi * c1 * a0)))
        return t, y
    raise ValueError("variant must be 'derived' or 'uncorrected'")


@dataclass
class HitchinSample:
    sigma: complex
    t: complex
    y: complex
    sample: PviSample


def hitchin_solution(sigma, c1, c2, variant: str = "derived",
                     step: float = 2e-3) -> HitchinSample:
    """Parametric solution with t-derivatives from sigma-differences and the chain rule."""
    sigma = complex(sigma)
    if not sigma.imag > 0:
        raise DomainError("Im sigma must be positive")
    c1, c2 = complex(c1), complex(c2)
    fy = lambda s: hitchin_of_sigma(s, c1, c2, variant)[1]
    h1 = FiniteDifferenceSpec(step=min(1e-4, 0.1 * sigma.imag))
    h2 = FiniteDifferenceSpec(step=min(step, 0.1 * sigma.imag))
    t, y = hitchin_of_sigma(sigma, c1, c2, variant)
    ys, e1 = central_derivative(fy, sigma, h1, 1)
    yss, e2 = central_derivative(fy, sigma, h2, 2)
    ts, _ = central_derivative(t_of_sigma, sigma, h1, 1)
    tss, _ = central_derivative(t_of_sigma, sigma, h2, 2)
    yp = ys / ts
    ypp = (yss - yp * tss) / ts ** 2
    smp = PviSample(t, y, yp, ypp, float(max(e1, e2)), singular=_is_singular(t, y),
                    info={"form": "hitchin", "variant": variant})
    return HitchinSample(sigma, t, y, smp)


def hitchin_parameters(p, q):
    """(c1, c2) = (p + 1/2, q + 1/2): the Hitchin constants of the theta solution [p, q]."""
    return complex(p) + 0.5, complex(q) + 0.5
