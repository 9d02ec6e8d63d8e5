"""Quadrature, finite differences, small dense linear algebra and root finding.

Everything here is a pure function of its arguments. Complex functions are
plain Python callables that accept (and, where noted, broadcast over) numpy
arrays.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Literal

import numpy as np
from scipy.special import roots_legendre

from .errors import (
    DerivativeUnreliableError,
    QuadratureError,
    RootFindingError,
    SingularMatrixError,
)

ComplexFn = Callable[[complex], complex]


@dataclass(frozen=True)
class QuadratureSpec:
    rule: Literal["gauss-chebyshev", "gauss-legendre-adaptive"] = "gauss-chebyshev"
    nodes: int = 16
    tol: float = 1e-13
    max_nodes: int = 8192

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.nodes < 4:
            raise ValueError("at least 4 nodes are required")


@dataclass(frozen=True)
class FiniteDifferenceSpec:
    """Central differences with Richardson extrapolation.

    ``step=None`` selects ``1e-5 * max(1, |x|)`` (first derivatives) at the
    point of use.  ``tol=None`` disables the reliability check.
    """

    step: float | None = None
    richardson_levels: int = 2
    tol: float | None = None

    def __post_init__(self):
        if self.step is not None and not self.step > 0:
            raise ValueError("step must be positive")
        if self.richardson_levels < 1:
            raise ValueError("richardson_levels must be >= 1")


DEFAULT_QUAD = QuadratureSpec()
DEFAULT_FD = FiniteDifferenceSpec()


def _chebyshev_sum(g, n):
    k = np.arange(1, n + 1)
    x = np.cos((2 * k - 1) * np.pi / (2 * n))
    return np.pi / n * np.sum(g(x), axis=-1)


@lru_cache(maxsize=32)
def _legendre_nodes(n):
    return roots_legendre(n)


def _legendre_sum(g, n):
    x, w = _legendre_nodes(n)
    return np.sum(w * g(x), axis=-1)


def _as_result(v):
    v = np.asarray(v, dtype=complex)
    return complex(v) if v.ndim == 0 else v


def integrate_endpoint_singular(f, a, b, spec: QuadratureSpec = DEFAULT_QUAD):
    """Integrate ``f`` along the straight segment from ``a`` to ``b``.

    ``f`` may blow up like an inverse square root at both endpoints.  With the
    Gauss-Chebyshev rule the weight ``1/sqrt(1-x^2)`` absorbs these
    singularities, so ``f`` is sampled only at interior nodes.  The
    Gauss-Legendre rule is meant for smooth integrands.

    ``f`` must accept a numpy array of complex points; it may return extra
    leading axes (vector-valued integrands), the node axis being last.
    Returns ``(value, error_estimate)``; the node count doubles from
    ``spec.nodes`` until two successive estimates agree to ``spec.tol``
    (relative to ``max(1, |value|)``).
    """
    a = complex(a)
    b = complex(b)
    half = (b - a) / 2
    mid = (a + b) / 2
    if spec.rule == "gauss-chebyshev":
        def g(x):
            # sqrt(1 - x^2) without cancellation at the endpoint nodes
            return f(mid + half * x) * half * np.sqrt((1.0 - x) * (1.0 + x))
        rule = _chebyshev_sum
    elif spec.rule == "gauss-legendre-adaptive":
        def g(x):
            return f(mid + half * x) * half
        rule = _legendre_sum
    else:
        raise ValueError(f"unknown quadrature rule {spec.rule!r}")

    n = spec.nodes
    prev = _as_result(rule(g, n))
    while True:
        n *= 2
        cur = _as_result(rule(g, n))
        err = float(np.max(np.abs(cur - prev)))
        if err <= spec.tol * max(1.0, float(np.max(np.abs(cur)))):
            return cur, err
        if n >= spec.max_nodes:
            raise QuadratureError(
                f"no convergence with {n} nodes (last change {err:.3e})",
                estimates=(prev, cur),
            )
        prev = cur


def integrate_inverse_sqrt(h, a, b, spec: QuadratureSpec = DEFAULT_QUAD):
    """Integral of h(lam) / sqrt((lam - a)(b - lam)) along the segment [a, b].

    The root is the branch ``(b - a)/2 * sqrt(1 - x^2)`` with
    lam = (a + b)/2 + (b - a) x / 2.  ``h`` is called as
    ``h(lam, lam - a, b - lam, root)`` with the offsets and the root computed
    from the Chebyshev angle, so no cancellation occurs near the endpoints.
    Node doubling as in :func:`integrate_endpoint_singular`.
    """
    a = complex(a)
    b = complex(b)
    half = (b - a) / 2

    def rule(n):
        th = (2 * np.arange(1, n + 1) - 1) * np.pi / (2 * n)
        da = (b - a) * np.cos(th / 2) ** 2  # half (1 + cos th)
        db = (b - a) * np.sin(th / 2) ** 2
        lam = np.where(np.arange(n) < n // 2, b - db, a + da)
        return np.pi / n * np.sum(h(lam, da, db, half * np.sin(th)), axis=-1)

    n = spec.nodes
    prev = _as_result(rule(n))
    while True:
        n *= 2
        cur = _as_result(rule(n))
        err = float(np.max(np.abs(cur - prev)))
        if err <= spec.tol * max(1.0, float(np.max(np.abs(cur)))):
            return cur, err
        if n >= spec.max_nodes:
            raise QuadratureError(
                f"no convergence with {n} nodes (last change {err:.3e})",
                estimates=(prev, cur),
            )
        prev = cur


def integrate_smooth(f, a, b, spec: QuadratureSpec | None = None):
    """Gauss-Legendre with node doubling; see :func:`integrate_endpoint_singular`."""
    spec = spec or QuadratureSpec(rule="gauss-legendre-adaptive")
    if spec.rule != "gauss-legendre-adaptive":
        spec = QuadratureSpec("gauss-legendre-adaptive", spec.nodes, spec.tol, spec.max_nodes)
    return integrate_endpoint_singular(f, a, b, spec)


def _richardson(estimates, ratio, order):
    """Richardson table for estimates with leading error ~ h**order."""
    table = [list(estimates)]
    p = order
    while len(table[-1]) > 1:
        row = table[-1]
        fac = ratio ** p
        table.append([(fac * row[i + 1] - row[i]) / (fac - 1) for i in range(len(row) - 1)])
        p += 2
    best = table[-1][0]
    if len(table) >= 2:
        err = abs(best - table[-2][-1])
    else:
        err = float("inf")
    return best, err


def central_derivative(f: ComplexFn, x, spec: FiniteDifferenceSpec = DEFAULT_FD, order: int = 1):
    """Richardson-extrapolated central difference of a (complex) function.

    Returns ``(value, error_estimate)``; the estimate is the size of the last
    extrapolation increment.  ``order`` selects the first or second
    derivative.
    """
    if order not in (1, 2):
        raise ValueError("order must be 1 or 2")
    x = complex(x)
    h = spec.step if spec.step is not None else (1e-5 if order == 1 else 1e-3) * max(1.0, abs(x))
    estimates = []
    f0 = f(x) if order == 2 else None
    for k in range(spec.richardson_levels + 1):
        hk = h / 2 ** k
        fp, fm = f(x + hk), f(x - hk)
        if order == 1:
            estimates.append((fp - fm) / (2 * hk))
        else:
            estimates.append((fp - 2 * f0 + fm) / (hk * hk))
    value, err = _richardson(estimates, 2.0, 2)
    if spec.tol is not None and err > 10 * spec.tol:
        raise DerivativeUnreliableError(
            f"derivative error estimate {err:.3e} exceeds 10*tol={10 * spec.tol:.1e}"
        )
    return value, err


def cauchy_derivatives(f: ComplexFn, x, radius: float, n_max: int, nodes: int = 64):
    """Derivatives ``f^(k)(x)``, k = 0..n_max, of an analytic function.

    Trapezoidal rule for the Cauchy integral on a circle of the given radius;
    converges geometrically when ``f`` is holomorphic on a slightly larger
    disk.  Used where nested finite differences would lose too many digits.
    """
    theta = 2 * np.pi * np.arange(nodes) / nodes
    pts = complex(x) + radius * np.exp(1j * theta)
    vals = np.array([f(p) for p in pts], dtype=complex)
    coeffs = np.fft.fft(vals) / nodes
    return np.array(
        [math.factorial(k) * coeffs[k] / radius ** k for k in range(n_max + 1)]
    )


def det_inv(M, threshold: float = 1e-13):
    """Determinant and inverse of a small square matrix.

    Closed form for n = 2, LAPACK's partially pivoted LU otherwise.  A
    determinant below ``threshold * ||M||^n`` raises
    :class:`SingularMatrixError`.
    """
    M = np.asarray(M, dtype=complex)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError("matrix must be square")
    n = M.shape[0]
    scale = np.max(np.abs(M)) if M.size else 0.0
    if n == 2:
        det = M[0, 0] * M[1, 1] - M[0, 1] * M[1, 0]
    else:
        det = np.linalg.det(M)
    if scale == 0.0 or abs(det) < threshold * scale ** n:
        raise SingularMatrixError(f"matrix is numerically singular (|det|={abs(det):.3e})")
    if n == 2:
        inv = np.array([[M[1, 1], -M[0, 1]], [-M[1, 0], M[0, 0]]]) / det
    else:
        inv = np.linalg.inv(M)
    return complex(det), inv


def newton_root(f: ComplexFn, x0, tol: float = 1e-12, fprime: ComplexFn | None = None,
                maxiter: int = 60):
    """Newton iteration for a simple root of an analytic function.

    Without ``fprime`` the derivative comes from :func:`central_derivative`.
    Stops once ``|f(x)| <= tol``.
    """
    x = complex(x0)
    trace = [x]
    for _ in range(maxiter):
        fx = f(x)
        if abs(fx) <= tol:
            return x
        if fprime is None:
            d, _ = central_derivative(f, x)
        else:
            d = fprime(x)
        if d == 0 or not np.isfinite(d):
            raise RootFindingError("zero or non-finite derivative", trace)
        step = fx / d
        x = x - step
        trace.append(x)
        if not np.isfinite(x):
            raise RootFindingError("iteration diverged", trace)
    if abs(f(x)) <= tol:
        return x
    raise RootFindingError(f"no convergence after {maxiter} iterations", trace)
