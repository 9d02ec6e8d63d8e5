"""Theta-functional solutions of the Schlesinger system with half-integer eigenvalues.

The residue matrices A_j come from the 2x2 function

    Phi(P) = [[phi(P), phi(P*)], [psi(P), psi(P*)]],
    phi(z) = Theta[p,q](z + U(inf2)) Theta[S](z - U(inf2)) / (Theta[p,q](0) Theta[S](-2 U(inf2))),

with psi obtained by exchanging the two infinities.  Near l_j, with the local
parameter x = sqrt(lam - l_j), Phi = P0 + x P1 + O(x^2) where P0 has rank one.
The residue of Psi_lam Psi^{-1}, Psi = Phi / sqrt(det Phi), is

    A_j = P1 adj(P0) / (2 tr(adj(P0) P1)) - I/4.

This expression does not depend on the lattice representative of U(l_j) or on
the sign of the local parameter.
"""
from __future__ import annotations

import cmath
import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .curve import (
    BranchConfiguration,
    PeriodData,
    abel_at_infinity,
    branch_abel_value,
    diff_at_branch,
    riemann_matrix,
)
from .errors import (
    DivisorSingularityError,
    PreconditionError,
    ReducibleCaseError,
)
from .numeric import FiniteDifferenceSpec
from .theta import (
    BranchSubset,
    Characteristic,
    all_subsets,
    half_characteristic,
    theta_full,
    theta_hess,
    theta_value,
)

SIGMA3 = np.diag([1.0 + 0j, -1.0])
DIVISOR_TOL = 1e-12


# --- monodromy data ----------------------------------------------------------

@dataclass(frozen=True)
class MonodromyData:
    m: tuple
    M: tuple

    @property
    def C(self) -> tuple:
        """Matrices C_j = (2 i m_j)^{-1/2} [[1, i m_j], [-1, i m_j]]."""
        out = []
        for mj in self.m:
            out.append(np.array([[1, 1j * mj], [-1, 1j * mj]]) / cmath.sqrt(2j * mj))
        return tuple(out)

    def ordered_product(self) -> np.ndarray:
        """M_{2g+2} ... M_2 M_1 (loops traversed in order l_1, l_2, ...)."""
        out = np.eye(2, dtype=complex)
        for Mj in self.M:
            out = Mj @ out
        return out


def monodromy_matrix(mj: complex) -> np.ndarray:
    return np.array([[0, mj], [-1 / mj, 0]], dtype=complex)


def monodromy_data(g: int, ch: Characteristic, allow_reducible: bool = False,
                   convention: str = "consistent") -> MonodromyData:
    """Off-diagonal entries m_j of the anti-diagonal monodromies.

    m_1 = i, m_2 = i (-1)^g exp(-2 pi i sum p),
    m_{2j+1} = i (-1)^(g+1) exp(2 pi i q_j - 2 pi i sum_{k>=j} p_k),
    m_{2j+2} = i (-1)^g exp(2 pi i q_j - 2 pi i sum_{k>j} p_k).

    These satisfy M_{2j+2} M_{2j+1} = exp(2 pi i p_j sigma_3) and
    M_{2j+1} M_{2j} = exp(2 pi i (q_j - q_{j-1}) sigma_3), but their ordered
    product is (-1)^(g+1) I.  With ``convention="consistent"`` (default)
    m_2, ..., m_{2g+2} are multiplied by (-1)^(g+1), which restores the cyclic
    relation for even g and changes nothing for odd g.  ``"uncorrected"`` keeps
    the formulas verbatim.
    """
    if ch.genus != g:
        raise ValueError("characteristic dimension does not match the genus")
    if convention not in ("consistent", "uncorrected"):
        raise ValueError("convention must be 'consistent' or 'uncorrected'")
    if ch.is_half_integer() and not allow_reducible:
        raise ReducibleCaseError(
            "half-integer characteristic: all monodromies are proportional to sigma_1"
        )
    p, q = ch.p_vec, ch.q_vec
    e = cmath.exp
    m = [1j * (-1) ** g * e(-2j * math.pi * np.sum(p))]
    for j in range(1, g + 1):
        m.append(1j * (-1) ** (g + 1) * e(2j * math.pi * q[j - 1] - 2j * math.pi * np.sum(p[j - 1:])))
        m.append(1j * (-1) ** g * e(2j * math.pi * q[j - 1] - 2j * math.pi * np.sum(p[j:])))
    if convention == "consistent":
        m = [(-1) ** (g + 1) * x for x in m]
    m = tuple(complex(x) for x in [1j, *m])
    return MonodromyData(m, tuple(monodromy_matrix(x) for x in m))


def cylinder_condition_defect(md: MonodromyData) -> float:
    """|prod m_{2k} - (-1)^(g+1) prod m_{2k-1}|."""
    g = len(md.m) // 2 - 1
    even = np.prod(md.m[1::2])
    odd = np.prod(md.m[0::2])
    return float(abs(even - (-1) ** (g + 1) * odd))


# --- frames and residues -----------------------------------------------------

@dataclass
class CurveContext:
    """Period data and Abel values of the infinities for one configuration."""

    cfg: BranchConfiguration
    periods: PeriodData
    u_inf1: np.ndarray

    @classmethod
    def build(cls, cfg: BranchConfiguration) -> "CurveContext":
        periods = riemann_matrix(cfg)
        return cls(cfg, periods, abel_at_infinity(cfg, periods).u)

    @property
    def u_inf2(self) -> np.ndarray:
        return -self.u_inf1

    @property
    def genus(self) -> int:
        return self.cfg.genus


def default_subset(g: int, j: int) -> BranchSubset:
    """First g-1 branch indices other than j."""
    pool = [i for i in range(1, 2 * g + 3) if i != j]
    return BranchSubset(pool[: g - 1], "S")


class _Row:
    """z -> Theta[p,q](z + c) Theta[S](z - c), normalized to 1 at z = -c."""

    def __init__(self, B, ch, chS, c):
        self.B, self.ch, self.chS, self.c = B, ch, chS, c
        g = len(c)
        t0 = theta_value(np.zeros(g), B, ch)
        tS = theta_value(-2 * c, B, chS)
        if abs(t0) < DIVISOR_TOL or abs(tS) < DIVISOR_TOL:
            raise DivisorSingularityError(
                "theta vanishes at a normalization point (characteristic on the theta divisor)"
            )
        self.norm = t0 * tS

    def value_grad(self, z):
        a = theta_full(z + self.c, self.B, self.ch, derivs=1)
        b = theta_full(z - self.c, self.B, self.chS, derivs=1)
        val = a.value * b.value / self.norm
        grad = (a.grad * b.value + a.value * b.grad) / self.norm
        return val, grad


@dataclass(frozen=True)
class FrameMatrix:
    j: int
    S: BranchSubset
    F: np.ndarray
    G: np.ndarray
    P0: np.ndarray
    P1: np.ndarray
    A: np.ndarray

    @property
    def A_frame(self) -> np.ndarray:
        """(1/4) F sigma_3 F^{-1} built from the frame itself."""
        return 0.25 * self.F @ SIGMA3 @ np.linalg.inv(self.F)


def frame_matrix(ctx: CurveContext, ch: Characteristic, j: int,
                 S: BranchSubset | None = None) -> FrameMatrix:
    """Local data of Phi at l_j (1-based) and the residue A_j."""
    g = ctx.genus
    S = S if S is not None else default_subset(g, j)
    S.validate(g)
    if S.kind != "S":
        raise PreconditionError("frame subsets must be of kind 'S'")
    if j in S.indices:
        raise PreconditionError(f"branch point {j} must not belong to S_j")
    chS = half_characteristic(S, g)
    B = ctx.periods.B
    phi = _Row(B, ch, chS, ctx.u_inf2)
    psi = _Row(B, ch, chS, ctx.u_inf1)
    u = branch_abel_value(ctx.periods, j)
    v = diff_at_branch(ctx.cfg, ctx.periods, j)
    P0 = np.empty((2, 2), dtype=complex)
    P1 = np.empty((2, 2), dtype=complex)
    for r, row in enumerate((phi, psi)):
        f_plus, d_plus = row.value_grad(u)
        f_minus, d_minus = row.value_grad(-u)
        P0[r] = (f_plus, f_minus)
        P1[r] = (d_plus @ v, -(d_minus @ v))
    adj0 = np.array([[P0[1, 1], -P0[0, 1]], [-P0[1, 0], P0[0, 0]]])
    t = np.trace(adj0 @ P1)
    if abs(t) < DIVISOR_TOL * max(1.0, np.max(np.abs(P0)) * np.max(np.abs(P1))):
        raise DivisorSingularityError(f"degenerate local frame at branch point {j}")
    A = P1 @ adj0 / (2 * t) - 0.25 * np.eye(2)
    F = np.column_stack([P0[:, 0], P1[:, 0]])
    detF = np.linalg.det(F)
    G = F / cmath.sqrt(detF) if detF != 0 else F
    return FrameMatrix(j, S, F, G, P0, P1, A)


# --- solution ----------------------------------------------------------------

@dataclass
class SchlesingerSolution:
    cfg: BranchConfiguration
    ch: Characteristic
    A: list
    H: list
    tau: complex
    log_tau: complex
    frames: list = field(repr=False, default_factory=list)
    periods: PeriodData | None = field(repr=False, default=None)
    u_inf1: np.ndarray | None = field(repr=False, default=None)

    @property
    def sum_A(self) -> np.ndarray:
        return sum(self.A)

    def invariant_defects(self) -> dict:
        eig = max(
            float(np.max(np.abs(np.sort_complex(np.linalg.eigvals(a)) - np.array([-0.25, 0.25]))))
            for a in self.A
        )
        return {
            "sum_A": float(np.max(np.abs(self.sum_A))),
            "trace": max(abs(np.trace(a)) for a in self.A),
            "eigenvalues": eig,
        }


def hamiltonians_from_A(points, A) -> list:
    """H_j = sum_{i != j} tr(A_j A_i) / (l_j - l_i)."""
    n = len(points)
    return [
        complex(sum(np.trace(A[j] @ A[i]) / (points[j] - points[i]) for i in range(n) if i != j))
        for j in range(n)
    ]


def hamiltonians(sol: SchlesingerSolution) -> list:
    return hamiltonians_from_A(sol.cfg.points, sol.A)


def reference_subset(g: int) -> BranchSubset:
    """The last g-1 branch points; fixes the gauge of the assembled solution."""
    return BranchSubset(range(g + 4, 2 * g + 3), "S")


def _diagonal_gauge(A_from, A_to):
    """d with diag(1, d) A_from diag(1, 1/d) = A_to (constant diagonal gauge)."""
    if abs(A_to[1, 0]) >= abs(A_to[0, 1]):
        return A_to[1, 0] / A_from[1, 0]
    return A_from[0, 1] / A_to[0, 1]


def solve_residues(cfg: BranchConfiguration, ch: Characteristic, subsets=None,
                   ctx: CurveContext | None = None):
    """Residue matrices A_1..A_{2g+2} only (no tau); returns (A, frames, ctx).

    Phi built from different subsets S gives the same Psi only up to a
    constant diagonal gauge (the sign of sqrt(det Phi) around the loops).
    Every A_j is therefore brought to the gauge of :func:`reference_subset`
    by comparing the two constructions at a branch point outside both
    subsets.
    """
    g = cfg.genus
    if ch.genus != g:
        raise ValueError("characteristic dimension does not match the genus")
    if ch.is_half_integer():
        raise ReducibleCaseError("half-integer characteristic gives a reducible (diagonal) solution")
    ctx = ctx or CurveContext.build(cfg)
    S_ref = reference_subset(g)
    ref_cache = {}

    def ref_frame(k):
        if k not in ref_cache:
            ref_cache[k] = frame_matrix(ctx, ch, k, S_ref)
        return ref_cache[k]

    frames = []
    A = []
    for j in range(1, 2 * g + 3):
        if subsets is not None:
            S = subsets[j - 1]
        elif j in S_ref.indices:
            S = default_subset(g, j)
        else:
            S = S_ref
        fr = frame_matrix(ctx, ch, j, S)
        Aj = fr.A
        if S != S_ref:
            k = min(set(range(1, 2 * g + 3)) - S.indices - S_ref.indices - {j})
            d = _diagonal_gauge(frame_matrix(ctx, ch, k, S).A, ref_frame(k).A)
            D = np.diag([1.0, d])
            Aj = D @ Aj @ np.diag([1.0, 1.0 / d])
        frames.append(fr)
        A.append(Aj)
    return A, frames, ctx


def solve(cfg: BranchConfiguration, ch: Characteristic, subsets=None) -> SchlesingerSolution:
    A, frames, ctx = solve_residues(cfg, ch, subsets)
    H = hamiltonians_from_A(cfg.points, A)
    lt = log_tau(cfg, ch, ctx.periods)
    return SchlesingerSolution(cfg, ch, A, H, cmath.exp(lt), lt, frames, ctx.periods, ctx.u_inf1)


# --- Hamiltonians via theta expansion ---------------------------------------

def hamiltonian_theta(cfg: BranchConfiguration, periods: PeriodData, ch: Characteristic,
                      j: int, T: BranchSubset | None = None) -> complex:
    """H_j from second derivatives of theta constants at z = 0.

    Without ``T`` every subset of g+1 branch points is tried until
    Theta[T](0) is nonzero.
    """
    g = cfg.genus
    candidates = [T] if T is not None else all_subsets(g, "T")
    B = periods.B
    v = diff_at_branch(cfg, periods, j)
    t0 = theta_value(np.zeros(g), B, ch)
    if abs(t0) < DIVISOR_TOL:
        raise DivisorSingularityError("Theta[p,q](0) vanishes")
    main = v @ theta_hess(np.zeros(g), B, ch) @ v / (4 * t0)
    for Tc in candidates:
        Tc.validate(g)
        chT = half_characteristic(Tc, g)
        tT = theta_value(np.zeros(g), B, chT)
        if abs(tT) < DIVISOR_TOL:
            continue
        n = [1 if k in Tc.indices else -1 for k in range(1, 2 * g + 3)]
        lj = cfg.points[j - 1]
        rational = sum(n[j - 1] * n[k - 1] / (lj - cfg.points[k - 1])
                       for k in range(1, 2 * g + 3) if k != j) / 8
        even = v @ theta_hess(np.zeros(g), B, chT) @ v / (4 * tT)
        return complex(rational - even + main)
    raise DivisorSingularityError("Theta[T](0) vanishes for every admissible T")


# --- tau function ------------------------------------------------------------

def log_tau_terms(cfg: BranchConfiguration, ch: Characteristic, periods: PeriodData | None = None):
    """Principal logarithms of the three factors of tau.

    tau = Theta[p,q](0) (det A)^{-1/2} prod_{j<k} (l_j - l_k)^{-1/8}.
    Returns a dict with the log of each factor (branches principal per factor).
    """
    periods = periods or riemann_matrix(cfg)
    g = cfg.genus
    th = theta_value(np.zeros(g), periods.B, ch)
    if abs(th) < DIVISOR_TOL:
        raise DivisorSingularityError("Theta[p,q](0) vanishes")
    pts = cfg.points
    pair_logs = [cmath.log(pts[a] - pts[b]) for a, b in itertools.combinations(range(len(pts)), 2)]
    return {
        "theta": cmath.log(th),
        "det": -0.5 * cmath.log(periods.det_A),
        "pairs": pair_logs,
    }


def _unwrap(value: complex, reference: complex) -> complex:
    k = round((reference.imag - value.imag) / (2 * math.pi))
    return value + 2j * math.pi * k


def log_tau(cfg: BranchConfiguration, ch: Characteristic, periods: PeriodData | None = None,
            reference: dict | None = None) -> complex:
    """ln tau with each factor's logarithm continued from ``reference`` when given."""
    terms = log_tau_terms(cfg, ch, periods)
    if reference is not None:
        terms = {
            "theta": _unwrap(terms["theta"], reference["theta"]),
            "det": terms["det"],
            "pairs": [_unwrap(a, b) for a, b in zip(terms["pairs"], reference["pairs"])],
        }
        # det term carries a factor -1/2: continue log det itself
        ld = _unwrap(-2 * terms["det"], -2 * reference["det"])
        terms["det"] = -0.5 * ld
    return terms["theta"] + terms["det"] - sum(terms["pairs"]) / 8


def tau(cfg: BranchConfiguration, ch: Characteristic) -> dict:
    """Value of tau with the branch record (principal logarithm of every factor)."""
    if ch.is_half_integer():
        raise ReducibleCaseError("tau is defined here for non-half-integer characteristics")
    terms = log_tau_terms(cfg, ch)
    lt = terms["theta"] + terms["det"] - sum(terms["pairs"]) / 8
    return {"tau": cmath.exp(lt), "log_tau": lt, "branches": terms}


def dlog_tau(cfg: BranchConfiguration, ch: Characteristic, j: int, h: float = 1e-5) -> complex:
    """Central difference of ln tau in l_j with branch continuation (4th order)."""
    ref = log_tau_terms(cfg, ch)

    def f(d):
        c = cfg.perturbed(j - 1, d)
        return log_tau(c, ch, reference=ref)

    d1 = (f(h) - f(-h)) / (2 * h)
    d2 = (f(2 * h) - f(-2 * h)) / (4 * h)
    return (4 * d1 - d2) / 3


# --- residual checks ---------------------------------------------------------

def residue_derivatives(cfg: BranchConfiguration, ch: Characteristic, i: int, h: float = 1e-4,
                        scheme: str = "richardson"):
    """d A_j / d l_i for all j (0-based i).

    ``scheme="richardson"``: fourth-order combination of steps h and 2h;
    ``scheme="central"``: plain second-order central difference.
    """
    Ap, _, _ = solve_residues(cfg.perturbed(i, h), ch)
    Am, _, _ = solve_residues(cfg.perturbed(i, -h), ch)
    if scheme == "central":
        return [(Ap[j] - Am[j]) / (2 * h) for j in range(len(Ap))]
    if scheme != "richardson":
        raise ValueError("scheme must be 'richardson' or 'central'")
    A2p, _, _ = solve_residues(cfg.perturbed(i, 2 * h), ch)
    A2m, _, _ = solve_residues(cfg.perturbed(i, -2 * h), ch)
    return [(8 * (Ap[j] - Am[j]) - (A2p[j] - A2m[j])) / (12 * h) for j in range(len(Ap))]


def schlesinger_residual(cfg: BranchConfiguration, ch: Characteristic,
                         fd: FiniteDifferenceSpec | None = None, detail: bool = False,
                         scheme: str = "richardson"):
    """Max defect of dA_j/dl_i = [A_i, A_j]/(l_i - l_j) (i != j) and of the i = j equation.

    Every perturbed configuration is solved afresh with the same
    characteristic, i.e. with fixed monodromy data.  The default step is
    1e-4 (``fd.step`` overrides).
    """
    h = (fd.step if fd is not None and fd.step is not None else 1e-4)
    A, _, _ = solve_residues(cfg, ch)
    pts = cfg.points
    n = len(pts)
    worst = 0.0
    total = [np.zeros((2, 2), dtype=complex) for _ in range(n)]
    for i in range(n):
        dA = residue_derivatives(cfg, ch, i, h, scheme)
        for j in range(n):
            total[j] += dA[j]
            if i != j:
                rhs = (A[i] @ A[j] - A[j] @ A[i]) / (pts[i] - pts[j])
            else:
                rhs = -sum((A[k] @ A[j] - A[j] @ A[k]) / (pts[k] - pts[j]) for k in range(n) if k != j)
            worst = max(worst, float(np.max(np.abs(dA[j] - rhs))))
    translation = max(float(np.max(np.abs(t))) for t in total)
    if detail:
        return {"residual": worst, "translation": translation}
    return worst


def b_derivative_check(cfg: BranchConfiguration, fd: FiniteDifferenceSpec | None = None) -> float:
    """Max defect of dB_kl/dl_j against pi i (dU_l/dx_j)(dU_k/dx_j)."""
    h = (fd.step if fd is not None and fd.step is not None else 1e-4)
    periods = riemann_matrix(cfg)
    worst = 0.0
    for j in range(1, len(cfg.points) + 1):
        Bs = [riemann_matrix(cfg.perturbed(j - 1, d)).B for d in (h, -h, 2 * h, -2 * h)]
        dB = (8 * (Bs[0] - Bs[1]) - (Bs[2] - Bs[3])) / (12 * h)
        v = diff_at_branch(cfg, periods, j)
        worst = max(worst, float(np.max(np.abs(dB - 1j * math.pi * np.outer(v, v)))))
    return worst
