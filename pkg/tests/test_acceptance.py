"""Acceptance criteria 1-9, each at its stated tolerance.

Every test prints one PASS/FAIL line; the lines are also collected in the
terminal summary under "acceptance criteria".
"""
import numpy as np
import pytest

from thetaschlesinger import painleve6 as p6
from thetaschlesinger.curve import riemann_matrix
from thetaschlesinger.errors import DegenerateSolutionError, ReducibleCaseError
from thetaschlesinger.schlesinger import solve_residues
from thetaschlesinger.theta import Characteristic
from thetaschlesinger.verification import (Check, abel_suite, invariants_suite, monodromy_suite,
                                           periods_suite, pvi_suite, random_characteristic,
                                           random_configuration, schlesinger_suite, t_grid, tau_suite,
                                           theta_suite)

pytestmark = pytest.mark.acceptance


def cases(g, n, seed=0):
    rng = np.random.default_rng(1000 * g + seed)
    return [(random_configuration(g, rng), random_characteristic(g, rng)) for _ in range(n)]


def worst(checks):
    """Collapse repeated checks to the worst defect per name."""
    out = {}
    for c in checks:
        if c.name not in out or not (c.defect <= out[c.name].defect):
            out[c.name] = c
    return list(out.values())


def tagged(checks, tag):
    return [Check(f"{c.name} ({tag})", c.defect, c.tol, c.note) for c in checks]


def test_criterion_1_periods(record_criterion):
    checks = []
    for g in (1, 2, 3):
        rng = np.random.default_rng(g)
        for _ in range(20):
            checks += tagged(periods_suite(random_configuration(g, rng), tol=1e-9), f"g={g}")
    assert record_criterion(1, "period sanity, 20 configurations at g=1,2,3", worst(checks))


def test_criterion_2_abel(record_criterion):
    checks = []
    for g in (1, 2):
        for cfg, _ in cases(g, 5):
            checks += tagged(abel_suite(cfg, tol=1e-8), f"g={g}")
    assert record_criterion(2, "branch-point Abel values mod lattice", worst(checks))


def test_criterion_3_theta(record_criterion):
    checks = []
    for g in (1, 2):
        rng = np.random.default_rng(30 + g)
        for cfg, ch in cases(g, 5):
            checks += tagged(theta_suite(cfg, ch, rng), f"g={g}")
    assert record_criterion(3, "theta periodicity, heat, Thomae, Jacobi identities", worst(checks))


def test_criterion_4_schlesinger(record_criterion):
    checks = []
    for g, n in ((1, 3), (2, 2)):
        for k, (cfg, ch) in enumerate(cases(g, n)):
            checks += tagged(schlesinger_suite(cfg, ch, order_check=(k == 0)), f"g={g}")
    assert record_criterion(4, "Schlesinger residual with order check", worst(checks))


def test_criterion_5_invariants(record_criterion):
    checks = []
    for g in (1, 2, 3):
        for cfg, ch in cases(g, 3):
            checks += tagged(invariants_suite(cfg, ch), f"g={g}")
    assert record_criterion(5, "sum A_j, eigenvalues, S_j-choice invariance", worst(checks))


def test_criterion_6_tau(record_criterion):
    checks = []
    for g in (1, 2):
        for cfg, ch in cases(g, 2):
            checks += tagged(tau_suite(cfg, ch), f"g={g}")
    assert record_criterion(6, "tau derivatives, Hamiltonians, dB/dl_j", worst(checks))


def test_criterion_7_monodromy(record_criterion):
    checks = []
    for g in (1, 2):
        for cfg, ch in cases(g, 3):
            checks += tagged(monodromy_suite(cfg, ch, tol=1e-6), f"g={g}")
    # negative control: one entry of A_1 shifted by 1e-3 must break the pair traces by > 1e-4
    for g in (1, 2):
        cfg, ch = cases(g, 1)[0]
        bad = {c.name: c.defect for c in monodromy_suite(cfg, ch, perturb=1e-3)}
        broken = bad["pair traces tr(M_j M_k)"]
        checks.append(Check(f"negative control margin (g={g}), 1e-4 / defect", 1e-4 / broken, 1.0,
                            note=f"perturbed pair-trace defect {broken:.2e}"))
    assert record_criterion(7, "transported monodromies and negative control", worst(checks))


def test_criterion_8_painleve(record_criterion):
    p, q = 0.31, 0.17
    ts = t_grid(50, np.random.default_rng(8))
    checks = pvi_suite(ts, p, q, cross=10)
    assert record_criterion(8, "PVI on a 50-point grid and all solution forms", checks)


def test_criterion_9_reducible(record_criterion):
    escapes = 0
    for g in (1, 2):
        cfg = cases(g, 1)[0][0]
        for pv, qv in ((0.5, 0.0), (0.0, 0.5), (0.5, 0.5), (0.0, 0.0), (1.0, -0.5)):
            try:
                solve_residues(cfg, Characteristic([pv] * g, [qv] * g))
                escapes += 1
            except ReducibleCaseError:
                pass
    excluded = 0
    for pv, qv in ((0.5, 0.0), (0.0, 0.5), (1.5, 1.0), (-0.5, 0.0)):
        for t in (0.37, 0.2 + 0.6j):
            try:
                p6.y_theta(t, pv, qv)
                excluded += 1
            except DegenerateSolutionError:
                pass
    checks = [Check("half-integer characteristics accepted (count)", escapes, 0.5),
              Check("excluded genus-one characteristics accepted (count)", excluded, 0.5)]
    assert record_criterion(9, "reducible-case and excluded-characteristic gates", checks)
