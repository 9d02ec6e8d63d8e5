"""Riemann theta functions with characteristics and their derivatives.

    Theta[p, q](z | B) = sum_m exp(pi i (m+p)^T B (m+p) + 2 pi i (z+q)^T (m+p))

Lattice points are enumerated on an ellipsoid around the dominant term; the
omitted tail is bounded with the smallest eigenvalue of Im B.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import CharacteristicKindError, DomainError, TruncationError

DEFAULT_TOL = 1e-15
MAX_INDEX = 60


@dataclass(frozen=True)
class Characteristic:
    p: tuple
    q: tuple

    def __init__(self, p, q):
        p = tuple(complex(x) for x in np.atleast_1d(p))
        q = tuple(complex(x) for x in np.atleast_1d(q))
        if len(p) != len(q):
            raise ValueError("p and q must have the same length")
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "q", q)

    @property
    def genus(self) -> int:
        return len(self.p)

    @property
    def p_vec(self) -> np.ndarray:
        return np.array(self.p, dtype=complex)

    @property
    def q_vec(self) -> np.ndarray:
        return np.array(self.q, dtype=complex)

    def is_half_integer(self, tol: float = 1e-12) -> bool:
        v = 2 * np.concatenate([self.p_vec, self.q_vec])
        return bool(np.all(np.abs(v - np.round(v.real)) < tol))

    def parity(self) -> int:
        """0 for even, 1 for odd; defined only for half-integer characteristics."""
        if not self.is_half_integer():
            raise CharacteristicKindError("parity is defined only for half-integer characteristics")
        s = 4 * np.dot(self.p_vec.real, self.q_vec.real)
        return int(round(s)) % 2

    def __repr__(self):
        def fmt(v):
            return "[" + ", ".join(f"{x.real:g}" if x.imag == 0 else f"{x:g}" for x in v) + "]"
        return f"Characteristic(p={fmt(self.p)}, q={fmt(self.q)})"


@dataclass(frozen=True)
class ThetaResult:
    value: complex
    truncation_error: float
    radius_used: int
    grad: np.ndarray | None = None
    hess: np.ndarray | None = None
    third: np.ndarray | None = None


def _check_B(B):
    B = np.atleast_2d(np.asarray(B, dtype=complex))
    if B.shape[0] != B.shape[1]:
        raise DomainError("Riemann matrix must be square")
    Y = (B.imag + B.imag.T) / 2
    ev = np.linalg.eigvalsh(Y)
    if not np.all(ev > 0):
        raise DomainError(f"Im B is not positive definite (eigenvalues {ev})")
    return B, Y, float(ev[0])


@lru_cache(maxsize=64)
def _box(g: int, r: int) -> np.ndarray:
    rng = range(-r, r + 1)
    return np.array(list(itertools.product(rng, repeat=g)), dtype=float).reshape(-1, g)


def _lattice_points(Y, lam_min, center, tol):
    """Integer points m with (m - center)^T Y (m - center) <= R^2.

    R is chosen so that exp(-pi R^2) times the shell-count growth is below
    ``tol`` relative to the largest term.
    """
    g = len(center)
    # tail of sum_{|x|>R} exp(-pi x^T Y x) over a shifted lattice; the shell
    # count grows like R^(g-1), absorbed by the margin below
    R2 = (math.log(1.0 / tol) + g * math.log(10.0)) / math.pi
    R = math.sqrt(R2)
    half_width = R / math.sqrt(lam_min)
    c_int = np.round(center.real)
    r = int(math.ceil(half_width + 1))
    if r + np.max(np.abs(c_int)) > MAX_INDEX:
        raise TruncationError(
            f"lattice radius {r} around {c_int} exceeds the cap |m| <= {MAX_INDEX}"
        )
    pts = _box(g, r) + c_int
    d = pts - center
    quad = np.einsum("ni,ij,nj->n", d, Y, d)
    keep = quad <= R2
    tail = math.exp(-math.pi * R2) * (2 * R + 1) ** g
    return pts[keep], r, tail


def theta_full(z, B, ch: Characteristic | None = None, tol: float = DEFAULT_TOL,
               derivs: int = 0) -> ThetaResult:
    """Theta value and optionally gradient (derivs >= 1), Hessian (>= 2) and third derivatives (3) in z."""
    B, Y, lam_min = _check_B(B)
    g = B.shape[0]
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    if ch is None:
        ch = Characteristic(np.zeros(g), np.zeros(g))
    if ch.genus != g or z.shape != (g,):
        raise ValueError("dimension mismatch between z, B and characteristic")
    p, q = ch.p_vec, ch.q_vec
    # |term| peaks where Y (m + Re p) = -(Im(z + q) + Re B Im p)
    center = -(p.real + np.linalg.solve(Y, (z + q).imag + B.real @ p.imag))
    pts, r, tail = _lattice_points(Y, lam_min, center, tol)
    n = pts + p
    expo = 1j * math.pi * np.einsum("ni,ij,nj->n", n, B, n) + 2j * math.pi * (n @ (z + q))
    emax = float(np.max(expo.real))
    terms = np.exp(expo - emax)
    scale = math.exp(emax)
    value = complex(np.sum(terms) * scale)
    grad = hess = third = None
    if derivs >= 1:
        fac = 2j * math.pi * n
        grad = (fac.T @ terms) * scale
    if derivs >= 2:
        hess = np.einsum("ni,nj,n->ij", fac, fac, terms) * scale
    if derivs >= 3:
        third = np.einsum("ni,nj,nk,n->ijk", fac, fac, fac, terms) * scale
    return ThetaResult(value, tail * scale, r, grad, hess, third)


def theta(z, B, ch: Characteristic | None = None, tol: float = DEFAULT_TOL) -> ThetaResult:
    return theta_full(z, B, ch, tol, 0)


def theta_value(z, B, ch: Characteristic | None = None, tol: float = DEFAULT_TOL) -> complex:
    return theta_full(z, B, ch, tol, 0).value


def theta_grad(z, B, ch: Characteristic | None = None, tol: float = DEFAULT_TOL) -> np.ndarray:
    return theta_full(z, B, ch, tol, 1).grad


def theta_hess(z, B, ch: Characteristic | None = None, tol: float = DEFAULT_TOL) -> np.ndarray:
    return theta_full(z, B, ch, tol, 2).hess


def theta_dB(z, B, ch: Characteristic | None = None, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Derivative with respect to the entries of B, as a symmetric matrix.

    Entry (k, l) is d/dB_kl treating B_kl and B_lk as one variable for
    k != l.  Follows from the heat equation: hess / (4 pi i) on the diagonal,
    hess / (2 pi i) off the diagonal.
    """
    H = theta_hess(z, B, ch, tol)
    D = H / (2j * math.pi)
    np.fill_diagonal(D, np.diag(H) / (4j * math.pi))
    return D


# --- half-integer characteristics from branch subsets -----------------------

@dataclass(frozen=True)
class BranchSubset:
    """Set of 1-based branch indices; kind 'S' has g-1 elements, 'T' has g+1."""

    indices: frozenset
    kind: str

    def __init__(self, indices, kind: str):
        idx = list(indices)
        if len(set(idx)) != len(idx):
            raise CharacteristicKindError("branch subset indices must be distinct")
        if kind not in ("S", "T"):
            raise CharacteristicKindError("kind must be 'S' or 'T'")
        object.__setattr__(self, "indices", frozenset(int(i) for i in idx))
        object.__setattr__(self, "kind", kind)

    def validate(self, g: int):
        want = g - 1 if self.kind == "S" else g + 1
        if len(self.indices) != want:
            raise CharacteristicKindError(
                f"subset of kind {self.kind} must have {want} elements for genus {g}, got {len(self.indices)}"
            )
        if any(i < 1 or i > 2 * g + 2 for i in self.indices):
            raise CharacteristicKindError(f"indices must lie in 1..{2 * g + 2}")


def _branch_halves(g: int, j: int):
    from .curve import branch_abel_halves
    return branch_abel_halves(g, j)


def half_characteristic(subset: BranchSubset, g: int) -> Characteristic:
    """[p, q] with B p + q = sum_{i in subset} U(l_i) - K, entries in {0, 1/2, 1, 3/2}.

    Exact: every U(l_i) and K are explicit half-lattice combinations, so p
    and q are read off as rational vectors.
    """
    subset.validate(g)
    n = np.zeros(g)
    m = np.zeros(g)
    for i in subset.indices:
        dn, dm = _branch_halves(g, i)
        n += dn
        m += dm
    n -= 0.5
    m -= 0.5 * np.arange(1, g + 1)
    return Characteristic(np.mod(n, 2.0), np.mod(m, 2.0))


def all_subsets(g: int, kind: str, exclude=()):
    size = g - 1 if kind == "S" else g + 1
    pool = [i for i in range(1, 2 * g + 3) if i not in set(exclude)]
    return [BranchSubset(c, kind) for c in itertools.combinations(pool, size)]


def thomae_check(cfg, periods, T: BranchSubset) -> float:
    """Relative defect of Thomae's formula in absolute values.

    |Theta[T](0)|^4 = (2 pi)^(-2g) |det A|^2 |prod_{i<k in T} (l_i - l_k)|
    |prod_{i<k not in T} (l_i - l_k)|.  The sign (a fourth root of unity)
    depends on the configuration and is not compared.
    """
    g = cfg.genus
    T.validate(g)
    ch = half_characteristic(T, g)
    lhs = abs(theta_value(np.zeros(g), periods.B, ch)) ** 4
    rhs = thomae_rhs(cfg, periods, T)
    return abs(lhs - rhs) / max(lhs, rhs)


def thomae_rhs(cfg, periods, T: BranchSubset) -> float:
    pts = cfg.points
    inside = sorted(T.indices)
    outside = [i for i in range(1, len(pts) + 1) if i not in T.indices]

    def vprod(idx):
        out = 1.0
        for a, b in itertools.combinations(idx, 2):
            out *= abs(pts[a - 1] - pts[b - 1])
        return out

    return abs(periods.det_A) ** 2 * vprod(inside) * vprod(outside) / (2 * math.pi) ** (2 * cfg.genus)


# --- Jacobi specialization --------------------------------------------------

_JACOBI = {
    1: ((0.5,), (0.5,), -1.0),
    2: ((0.5,), (0.0,), 1.0),
    3: ((0.0,), (0.0,), 1.0),
    4: ((0.0,), (0.5,), 1.0),
}


def jacobi_theta(k: int, z, sigma, tol: float = DEFAULT_TOL, derivs: int = 0):
    """Jacobi theta_k(z | sigma), quasi-periods 1 and sigma; theta_1 = -Theta[1/2, 1/2].

    With ``derivs`` > 0 returns a tuple (value, d/dz, ..., d^derivs/dz^derivs),
    derivs <= 3.
    """
    if k not in _JACOBI:
        raise ValueError("k must be 1, 2, 3 or 4")
    sigma = complex(sigma)
    if not sigma.imag > 0:
        raise DomainError("Im sigma must be positive")
    p, q, sgn = _JACOBI[k]
    res = theta_full([z], [[sigma]], Characteristic(p, q), tol, derivs)
    if derivs == 0:
        return sgn * res.value
    out = [sgn * res.value, sgn * complex(res.grad[0])]
    if derivs >= 2:
        out.append(sgn * complex(res.hess[0, 0]))
    if derivs >= 3:
        out.append(sgn * complex(res.third[0, 0, 0]))
    return tuple(out)
