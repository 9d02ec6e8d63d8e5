"""Invariant suites: each returns measured defects next to their tolerances."""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from . import painleve6 as p6
from .curve import (BranchConfiguration, abel_map, branch_abel_value, lattice_distance,
                    normalized_a_periods, riemann_matrix)
from .errors import (DegenerateSolutionError, PathError, ReducibleCaseError,
                     ThetaSchlesingerError)
from .monodromy import verify_monodromies
from .numeric import FiniteDifferenceSpec
from .schlesinger import (b_derivative_check, dlog_tau, hamiltonian_theta, hamiltonians_from_A,
                          monodromy_data, schlesinger_residual, solve, solve_residues)
from .theta import (BranchSubset, Characteristic, all_subsets, jacobi_theta, theta_full,
                    thomae_check)

SUITES = ("periods", "abel", "theta", "schlesinger", "invariants", "tau",
          "monodromy", "pvi", "reducible")


@dataclass
class Check:
    name: str
    defect: float
    tol: float
    note: str = ""

    @property
    def passed(self) -> bool:
        return bool(np.isfinite(self.defect) and self.defect < self.tol)

    def as_dict(self) -> dict:
        out = {"name": self.name, "defect": float(self.defect), "tol": self.tol,
               "passed": self.passed}
        if self.note:
            out["note"] = self.note
        return out


def random_configuration(g: int, rng: np.random.Generator) -> BranchConfiguration:
    """Cuts of random length and tilt, strung left to right so that the gaps stay clear."""
    pts = []
    for k in range(g + 1):
        centre = complex(2.0 * k + rng.uniform(-0.2, 0.2), rng.uniform(-0.4, 0.4))
        half = 0.5 * rng.uniform(0.5, 1.1) * cmath.exp(1j * rng.uniform(-0.6, 0.6))
        pts += [centre - half, centre + half]
    return BranchConfiguration(pts)


def random_characteristic(g: int, rng: np.random.Generator) -> Characteristic:
    """Generic real characteristic, kept away from the half-integer lattice."""
    draw = lambda: rng.uniform(0.08, 0.42) * rng.choice([-1, 1]) + rng.choice([0.0, 0.5])
    return Characteristic([draw() for _ in range(g)], [draw() for _ in range(g)])


# --- curve ------------------------------------------------------------------

def periods_suite(cfg: BranchConfiguration, tol: float = 1e-9) -> list:
    per = riemann_matrix(cfg)
    B = per.B
    eig = np.linalg.eigvalsh(B.imag)
    N = normalized_a_periods(cfg, per)
    return [
        Check("B symmetry", per.symmetry_defect, tol),
        Check("Im B positive definite (1 = violated)", float(eig.min() <= 0), 0.5,
              note=f"min eigenvalue {eig.min():.3e}"),
        Check("normalized a-periods = I", float(np.max(np.abs(N - np.eye(cfg.genus)))), tol),
    ]


def _abel_at_branch(cfg, per, j):
    """U(l_j) along the first cut-free polyline that detours away from the cuts."""
    l1, lj = cfg.points[0], cfg.points[j - 1]
    R = 2 * cfg.diameter
    errors = []
    for k in range(12):
        d = cmath.exp(1j * (math.pi / 2 + k * math.pi / 6))
        for hint in ([], [l1 + R * d, lj + R * d]):
            try:
                return abel_map(cfg, per, lj, path_hint=hint).u
            except (PathError, ThetaSchlesingerError) as exc:
                errors.append(str(exc))
    raise PathError(f"no cut-free path to l_{j}: {errors[-1]}")


def abel_suite(cfg: BranchConfiguration, tol: float = 1e-8) -> list:
    per = riemann_matrix(cfg)
    worst = 0.0
    for j in range(1, len(cfg.points) + 1):
        u = _abel_at_branch(cfg, per, j)
        worst = max(worst, lattice_distance(u, branch_abel_value(per, j), per.B))
    return [Check("branch-point Abel values (closed forms, mod lattice)", worst, tol)]


# --- theta ------------------------------------------------------------------

def theta_suite(cfg: BranchConfiguration, ch: Characteristic, rng: np.random.Generator) -> list:
    per = riemann_matrix(cfg)
    B, g = per.B, cfg.genus
    p, q = ch.p_vec, ch.q_vec
    per_def = 0.0
    heat = 0.0
    for _ in range(3):
        z = rng.normal(size=g) * 0.3 + 1j * rng.normal(size=g) * 0.3
        t0 = theta_full(z, B, ch).value
        for k in range(g):
            e = np.eye(g)[k]
            factor = cmath.exp(-2j * math.pi * q[k] - 1j * math.pi * B[k, k] - 2j * math.pi * z[k])
            # defects relative to the size of the shifted value (it carries |factor|)
            for shift, rhs in ((e, cmath.exp(2j * math.pi * p[k]) * t0), (B @ e, factor * t0)):
                lhs = theta_full(z + shift, B, ch).value
                per_def = max(per_def, abs(lhs - rhs) / max(1.0, abs(rhs)))
        # heat equation: d Theta / d B_kl = (1 + delta_kl)^-1 d^2 Theta / dz_k dz_l / (4 pi i)
        r = theta_full(z, B, ch, derivs=2)
        h = 1e-4
        for k in range(g):
            for l in range(k, g):
                E = np.zeros((g, g), dtype=complex)
                E[k, l] = E[l, k] = 1.0
                fp = theta_full(z, B + h * E, ch).value
                fm = theta_full(z, B - h * E, ch).value
                f2p = theta_full(z, B + 2 * h * E, ch).value
                f2m = theta_full(z, B - 2 * h * E, ch).value
                dB = (8 * (fp - fm) - (f2p - f2m)) / (12 * h)
                rhs = (r.hess[k, l] if k != l else 0.5 * r.hess[k, k]) / (2j * math.pi)
                heat = max(heat, abs(dB - rhs) / max(1.0, abs(rhs)))
    out = [Check("quasi-periodicity", per_def, 1e-10), Check("heat equation", heat, 1e-6)]
    if g <= 2:
        th = max(thomae_check(cfg, per, T) for T in all_subsets(g, "T"))
        out.append(Check("Thomae magnitude", th, 1e-8))
    sig = complex(rng.uniform(-0.5, 0.5), rng.uniform(0.6, 1.6))
    d1 = jacobi_theta(1, 0, sig, derivs=1)[1]
    th2, th3, th4 = (jacobi_theta(k, 0, sig) for k in (2, 3, 4))
    out.append(Check("theta1'(0) = pi theta2 theta3 theta4", abs(d1 - math.pi * th2 * th3 * th4), 1e-9))
    out.append(Check("theta2^4 + theta4^4 = theta3^4", abs(th2 ** 4 + th4 ** 4 - th3 ** 4), 1e-9))
    return out


# --- Schlesinger ------------------------------------------------------------

def schlesinger_suite(cfg: BranchConfiguration, ch: Characteristic, order_check: bool = False) -> list:
    tol = 1e-5 if cfg.genus == 1 else 1e-4
    out = [Check("Schlesinger residual", schlesinger_residual(cfg, ch), tol)]
    if order_check:
        coarse = schlesinger_residual(cfg, ch, FiniteDifferenceSpec(step=1e-2), scheme="central")
        fine = schlesinger_residual(cfg, ch, FiniteDifferenceSpec(step=1e-3), scheme="central")
        out.append(Check("order check (fine/coarse defect ratio)", fine / coarse, 0.1,
                         note=f"h=1e-2: {coarse:.3e}, h=1e-3: {fine:.3e}"))
    return out


def invariants_suite(cfg: BranchConfiguration, ch: Characteristic, n_subsets: int = 3) -> list:
    A, _, _ = solve_residues(cfg, ch)
    g = cfg.genus
    n = len(A)
    eig = max(float(np.max(np.abs(np.sort_complex(np.linalg.eigvals(a)) - np.array([-0.25, 0.25]))))
              for a in A)
    choice = 0.0
    for shift in range(1, n_subsets + 1):
        subsets = []
        for j in range(1, n + 1):
            pool = [i for i in range(1, n + 1) if i != j]
            pool = pool[shift % len(pool):] + pool[:shift % len(pool)]
            subsets.append(BranchSubset(pool[: g - 1], "S"))
        A2, _, _ = solve_residues(cfg, ch, subsets)
        choice = max(choice, max(float(np.max(np.abs(a - b))) for a, b in zip(A, A2)))
    return [
        Check("sum of residues", float(np.max(np.abs(sum(A)))), 1e-10),
        Check("residue eigenvalues +-1/4", eig, 1e-9),
        Check("independence of the S_j choice", choice, 1e-8),
    ]


def tau_suite(cfg: BranchConfiguration, ch: Characteristic) -> list:
    sol = solve(cfg, ch)
    n = len(cfg.points)
    H = sol.H
    dl = max(abs(dlog_tau(cfg, ch, j) - H[j - 1]) for j in range(1, n + 1))
    Ht = max(abs(hamiltonian_theta(cfg, sol.periods, ch, j) - H[j - 1]) for j in range(1, n + 1))
    # cross-derivative symmetry dH_j/dl_k = dH_k/dl_j
    h = 1e-4
    dH = np.zeros((n, n), dtype=complex)
    for k in range(n):
        Hs = []
        for d in (h, -h, 2 * h, -2 * h):
            c = cfg.perturbed(k, d)
            Hs.append(np.array(hamiltonians_from_A(c.points, solve_residues(c, ch)[0])))
        dH[:, k] = (8 * (Hs[0] - Hs[1]) - (Hs[2] - Hs[3])) / (12 * h)
    sym = float(np.max(np.abs(dH - dH.T)))
    return [
        Check("d ln tau / dl_j = H_j", dl, 1e-6),
        Check("theta-form Hamiltonians = residue Hamiltonians", Ht, 1e-6),
        Check("dH_j/dl_k symmetric", sym, 1e-5),
        Check("dB/dl_j = pi i v v^T", b_derivative_check(cfg), 1e-6 if cfg.genus == 1 else 1e-5),
    ]


def monodromy_suite(cfg: BranchConfiguration, ch: Characteristic, tol: float = 1e-6,
                    perturb: float | None = None) -> list:
    """Transported monodromies against the predicted data.

    With ``perturb`` the (1,2) entry of A_1 is shifted before transport;
    used as a negative control.
    """
    sol = solve(cfg, ch)
    if perturb is not None:
        sol.A = [a.copy() for a in sol.A]
        sol.A[0][0, 1] += perturb
    md = monodromy_data(cfg.genus, ch)
    rep = verify_monodromies(sol, md)
    return [
        Check("tr M_j = 0", rep.max_trace, tol),
        Check("eigenvalues +-i", rep.eigenvalue_defect, tol),
        Check("pair traces tr(M_j M_k)", rep.pair_trace_defect, tol),
        Check("cyclic product", rep.cyclic_defect, tol),
    ]


# --- genus one --------------------------------------------------------------

def t_grid(n: int, rng: np.random.Generator, avoid: float = 0.15) -> list:
    """Seeded complex t values with |t|, |t - 1| >= avoid and |t| < 3."""
    out = []
    while len(out) < n:
        t = complex(rng.uniform(-1.5, 2.5), rng.uniform(-1.5, 1.5))
        if min(abs(t), abs(t - 1)) > avoid and abs(t) < 3:
            out.append(t)
    return out


def pvi_suite(ts, p, q, cross: int | None = None) -> list:
    """Residuals of every genus-one form on the grid ``ts``; cross-form checks on the first ``cross`` points."""
    ts = list(ts)
    cross = len(ts) if cross is None else cross
    res, singular = 0.0, 0
    for t in ts:
        s = p6.y_theta(t, p, q)
        if s.singular:
            singular += 1
            continue
        res = max(res, p6.pvi_residual(s))
    eq, zeta = 0.0, 0.0
    for t in ts[:cross]:
        y = p6.y_theta(t, p, q).y
        eq = max(eq, abs(y - p6.y_alt(t, p, q).y), abs(y - p6.y_from_tau_value(t, p, q)),
                 abs(y - p6.y_pair_from_points(p6.seed_configuration(t), p, q)[0]))
        zeta = max(zeta, p6.zeta_residual(t, p, q))
    pic, oka, hit = 0.0, 0.0, 0.0
    for t in ts[:cross]:
        pic = max(pic, p6.pvi_residual(p6.picard_solution(t, 0.3, 0.2), p6.PICARD_CASE))
        oka = max(oka, p6.pvi_residual(p6.okamoto_picard_solution(t, 0.3, 0.2)))
        hs = p6.hitchin_solution(p6.sigma_from_t(t).sigma, 0.31, 0.17)
        hit = max(hit, p6.pvi_residual(hs.sample))
    return [
        Check("y_theta PVI(1/8,-1/8,1/8,3/8) residual", res, 1e-6,
              note=f"{len(ts) - singular} samples, {singular} singular"),
        Check("y_theta = y_alt = y_from_tau = y_from_schlesinger", eq, 1e-5),
        Check("zeta equation residual", zeta, 1e-6),
        Check("Picard PVI(0,0,0,1/2) residual", pic, 1e-6),
        Check("Okamoto(Picard) PVI(1/8,-1/8,1/8,3/8) residual", oka, 1e-5),
        Check("Hitchin PVI(1/8,-1/8,1/8,3/8) residual", hit, 1e-5),
    ]


def reducible_suite(cfg: BranchConfiguration) -> list:
    """1.0 when the gates reject every case, 0.0 per escaped case otherwise."""
    g = cfg.genus
    escaped = 0
    for p, q in ((0.5, 0.0), (0.0, 0.5), (0.5, 0.5), (0.0, 0.0), (1.0, 0.5)):
        try:
            solve_residues(cfg, Characteristic([p] * g, [q] * g))
            escaped += 1
        except ReducibleCaseError:
            pass
    excluded = 0
    for p, q in ((0.5, 0.0), (0.0, 0.5), (1.5, 0.0), (0.0, -0.5)):
        try:
            p6.y_theta(0.37, p, q)
            excluded += 1
        except DegenerateSolutionError:
            pass
    return [
        Check("half-integer characteristics rejected (escapes)", escaped, 0.5),
        Check("excluded genus-one characteristics rejected (escapes)", excluded, 0.5),
    ]
