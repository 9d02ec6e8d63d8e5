import cmath
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from thetaschlesinger.errors import ReducibleCaseError
from thetaschlesinger.schlesinger import (b_derivative_check, cylinder_condition_defect, dlog_tau,
                                          hamiltonian_theta, log_tau, log_tau_terms, monodromy_data,
                                          schlesinger_residual, solve, solve_residues, tau)
from thetaschlesinger.theta import Characteristic

generic = st.floats(0.05, 0.45).flatmap(lambda a: st.sampled_from([a, -a, a + 0.5]))


def sigma3_exp(x):
    return np.diag([cmath.exp(2j * math.pi * x), cmath.exp(-2j * math.pi * x)])


@given(st.integers(1, 3).flatmap(lambda g: st.tuples(st.just(g), st.lists(generic, min_size=2 * g, max_size=2 * g))))
def test_monodromy_data_relations(args):
    g, vals = args
    ch = Characteristic(vals[:g], vals[g:])
    md = monodromy_data(g, ch)
    M = md.M
    for j in range(1, g + 1):
        # M_{2j+2} M_{2j+1} = exp(2 pi i p_j sigma_3)
        assert np.allclose(M[2 * j + 1] @ M[2 * j], sigma3_exp(ch.p[j - 1].real), atol=1e-12)
    for Mj in M:
        assert abs(np.trace(Mj)) < 1e-14 and abs(np.linalg.det(Mj) - 1) < 1e-12
    assert np.allclose(md.ordered_product(), np.eye(2), atol=1e-12)
    assert cylinder_condition_defect(md) < 1e-12


def test_uncorrected_convention_product_sign():
    ch = Characteristic([0.2, 0.3], [0.1, -0.15])
    md = monodromy_data(2, ch, convention="uncorrected")
    assert np.allclose(md.ordered_product(), -np.eye(2), atol=1e-12)
    with pytest.raises(ValueError):
        monodromy_data(2, ch, convention="other")


def test_reducible_gate(cfg1):
    with pytest.raises(ReducibleCaseError):
        solve_residues(cfg1, Characteristic([0.5], [0]))
    with pytest.raises(ReducibleCaseError):
        tau(cfg1, Characteristic([0], [0.5]))
    md = monodromy_data(1, Characteristic([0.5], [0.5]), allow_reducible=True)
    assert len(md.M) == 4


def test_residue_invariants(cfg1, ch1):
    sol = solve(cfg1, ch1)
    d = sol.invariant_defects()
    assert d["sum_A"] < 1e-10 and d["trace"] < 1e-12 and d["eigenvalues"] < 1e-9


def test_hamiltonian_sum_rules(cfg2, ch2):
    # sum H_j = 0 and sum l_j H_j = sum_{i<j} tr(A_i A_j) = -n/16 when sum A = 0, A_j^2 = I/16
    sol = solve(cfg2, ch2)
    pts = np.array(cfg2.points)
    assert abs(sum(sol.H)) < 1e-10
    assert abs(np.dot(pts, sol.H) + len(pts) / 16) < 1e-9


def test_residual_genus_one(cfg1, ch1):
    d = schlesinger_residual(cfg1, ch1, detail=True)
    assert d["residual"] < 1e-5
    assert d["translation"] < 1e-6


def test_residual_detects_wrong_characteristic_mixing(cfg1, ch1):
    # residues from a different characteristic at the perturbed points break the flow
    A = solve_residues(cfg1, ch1)[0]
    other = Characteristic([0.31], [0.1])
    h = 1e-4
    Ap = solve_residues(cfg1.perturbed(0, h), other)[0]
    dA = (Ap[1] - A[1]) / h
    rhs = (A[0] @ A[1] - A[1] @ A[0]) / (cfg1.points[0] - cfg1.points[1])
    assert np.max(np.abs(dA - rhs)) > 1.0


def test_tau_log_derivative_is_hamiltonian(cfg1, ch1):
    sol = solve(cfg1, ch1)
    for j in range(1, 5):
        assert abs(dlog_tau(cfg1, ch1, j) - sol.H[j - 1]) < 1e-6
        assert abs(hamiltonian_theta(cfg1, sol.periods, ch1, j) - sol.H[j - 1]) < 1e-6


def test_tau_branch_record(cfg1, ch1):
    rec = tau(cfg1, ch1)
    assert abs(cmath.exp(rec["log_tau"]) - rec["tau"]) < 1e-14 * abs(rec["tau"])
    assert set(rec["branches"]) == {"theta", "det", "pairs"}
    assert len(rec["branches"]["pairs"]) == 6
    # continuation from the record reproduces the principal value at the same point
    assert abs(log_tau(cfg1, ch1, reference=log_tau_terms(cfg1, ch1)) - rec["log_tau"]) < 1e-14


def test_riemann_matrix_variation(cfg1):
    assert b_derivative_check(cfg1) < 1e-6
