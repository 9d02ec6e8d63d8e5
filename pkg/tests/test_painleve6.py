import cmath
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from thetaschlesinger import painleve6 as p6
from thetaschlesinger.curve import riemann_matrix
from thetaschlesinger.errors import (DegenerateSolutionError, DomainError, PreconditionError,
                                     ReducibleCaseError, SingularSampleError)
from thetaschlesinger.numeric import FiniteDifferenceSpec
from thetaschlesinger.schlesinger import solve_residues
from thetaschlesinger.theta import Characteristic, jacobi_theta
from thetaschlesinger.verification import t_grid

P, Q = 0.31, 0.17
T0 = 0.37
# regression value; agrees with the genus-independent residue route below
Y_REF = 0.36097070665754727 - 0.3307378071287224j

t_values = st.builds(complex, st.floats(-1.2, 2.2), st.floats(-1.2, 1.2)).filter(
    lambda t: min(abs(t), abs(t - 1)) > 0.2 and abs(t.imag) > 0.05)


def tenpoint_grid():
    return t_grid(10, np.random.default_rng(3))


# --- modulus ---------------------------------------------------------------

def test_sigma_round_trip():
    t = p6.t_of_sigma(1.3j)
    assert abs(p6.sigma_from_t(t).sigma - 1.3j) < 1e-9


def test_sigma_matches_independent_period_ratio():
    # cross-ratio of (0, 1, 2, 3) is 4/3; its period ratio was computed to 40 digits separately
    assert abs(p6.sigma_from_t(4 / 3).sigma - 1.2792615711710065j) < 1e-12


@given(t_values)
def test_sigma_consistency(t):
    m = p6.sigma_from_t(t)
    assert m.sigma.imag > 0
    assert m.consistency_defect(p6.TParam(t)) < 1e-9


def test_real_t_in_unit_interval_and_negative_axis():
    for t in (0.2, 0.5, 0.9, -1.0, 3.0):
        m = p6.sigma_from_t(t)
        assert m.sigma.imag > 0
        assert m.consistency_defect(t) < 1e-9


def test_sigma_equals_period_ratio_of_seed_curve():
    t = 0.37 + 0.2j
    cfg = p6.seed_configuration(t)
    assert abs(p6.cross_ratio(cfg.points) - t) < 1e-12
    assert abs(complex(riemann_matrix(cfg).B[0, 0]) - p6.sigma_from_t(t).sigma) < 1e-8


def test_t_conventions_differ():
    s = 1.2j
    a, b = p6.t_of_sigma(s), p6.t_of_sigma(s, "theta4/theta2")
    assert abs(a - b) > 0.1
    with pytest.raises(ValueError):
        p6.t_of_sigma(s, "other")


def test_tparam():
    tp = p6.TParam.from_points([0, 1, 2, 3])
    assert tp.provenance == "cross-ratio" and abs(tp.t - 4 / 3) < 1e-15
    with pytest.raises(DomainError):
        p6.TParam(1.0)
    with pytest.raises(DomainError):
        p6.EllipticModule(-1j)


# --- the equation ----------------------------------------------------------

def test_y_theta_residual_and_reference():
    s = p6.y_theta(T0, P, Q)
    assert abs(s.y - Y_REF) < 1e-12
    assert p6.pvi_residual(s) < 1e-6


def test_y_theta_matches_residue_route():
    cfg = p6.seed_configuration(T0)
    A = solve_residues(cfg, Characteristic([P], [Q]))[0]
    assert abs(p6.y_from_residues(A, cfg.points) - Y_REF) < 1e-10


def test_wrong_alpha_is_detected():
    s = p6.y_theta(T0, P, Q)
    wrong = p6.PviCoefficients(0, -0.125, 0.125, 0.375)
    assert p6.pvi_residual(s, wrong) > 1e-2


def test_coefficient_fit_recovers_half_exponents():
    samples = [p6.y_theta(t, P, Q) for t in tenpoint_grid()]
    c, res = p6.fit_pvi_coefficients(samples)
    assert np.max(np.abs(np.array(c.as_tuple()) - np.array(p6.HALF_EXPONENTS.as_tuple()))) < 1e-6
    assert res < 1e-6
    assert p6.PviCoefficients.from_exponents(0.5, 0.5, 0.5, 0.5) == p6.HALF_EXPONENTS


def test_uncorrected_variant_fails_the_equation():
    assert p6.pvi_residual(p6.y_theta(T0, P, Q, variant="uncorrected")) > 1e-2


def test_y_alt_agrees_on_grid():
    for t in tenpoint_grid():
        assert abs(p6.y_theta(t, P, Q).y - p6.y_alt(t, P, Q).y) < 1e-7


def test_fd_route_converges_at_fourth_order():
    t = 0.37 + 0.2j
    coarse = p6.pvi_residual(p6.y_theta(t, P, Q, FiniteDifferenceSpec(step=0.02, richardson_levels=1), method="fd"))
    fine = p6.pvi_residual(p6.y_theta(t, P, Q, FiniteDifferenceSpec(step=0.01, richardson_levels=1), method="fd"))
    assert fine < coarse / 8


def test_holomorphic_in_characteristic():
    s = p6.sigma_from_t(T0).sigma
    g = [(p6.y_of_sigma(s, P + h, Q) - p6.y_of_sigma(s, P - h, Q)) / (2 * h) for h in (4e-3, 2e-3, 1e-3)]
    # successive differences shrink 4x for a smooth function
    ratio = abs(g[0] - g[1]) / abs(g[1] - g[2])
    assert 3.5 < ratio < 4.5


def test_sample_preconditions():
    with pytest.raises(SingularSampleError):
        p6.pvi_residual(p6.PviSample(0.3, 0.3, 0, 0, singular=True))
    with pytest.raises(PreconditionError):
        p6.pvi_residual(p6.PviSample(0.3, 0.5))


@pytest.mark.parametrize("p,q", [(0.5, 0.0), (0.0, 0.5), (1.5, 0.0), (0.0, -0.5), (0.5, 0.5)])
def test_excluded_characteristics(p, q):
    with pytest.raises(DegenerateSolutionError):
        p6.y_theta(T0, p, q)
    with pytest.raises(DegenerateSolutionError):
        p6.y_alt(T0, p, q)


# --- tau -------------------------------------------------------------------

def test_tau_log_derivative_matches_residue_hamiltonian():
    t = 0.37 + 0.2j
    cfg = p6.seed_configuration(t)
    A = solve_residues(cfg, Characteristic([P], [Q]))[0]
    # residues sit at the images of (inf, 0, 1, t)
    H = np.trace(A[3] @ A[1]) / t + np.trace(A[3] @ A[2]) / (t - 1)
    h = 1e-4
    d = (p6.log_tau_elliptic(t + h, P, Q) - p6.log_tau_elliptic(t - h, P, Q)) / (2 * h)
    assert abs(d - H) < 1e-6


def test_complete_integral_closed_form():
    t = 0.37 + 0.2j
    th4 = jacobi_theta(4, 0, p6.sigma_from_t(t).sigma)
    assert abs(p6.complete_integral(t) + 1j * math.pi * th4 ** 2) < 1e-12


def test_tau_continuous_around_small_loop():
    t0, r = 0.37 + 0.2j, 0.05
    start = p6.log_tau_elliptic(t0 + r, P, Q)
    val = start
    for k in range(1, 41):
        val = p6.log_tau_elliptic(t0 + r * cmath.exp(2j * math.pi * k / 40), P, Q, reference=val)
    assert abs(val - start) < 1e-10


def test_zeta_equation():
    for t in tenpoint_grid()[:4]:
        assert p6.zeta_residual(t, P, Q) < 1e-6
    assert p6.zeta_residual(0.37 + 0.2j, P, Q, form="uncorrected") > 1e-4


def test_y_from_tau():
    t = 0.37 + 0.2j
    s = p6.y_from_tau(t, P, Q)
    assert abs(s.y - p6.y_theta(t, P, Q).y) < 1e-5
    assert p6.pvi_residual(s) < 1e-5
    assert abs(p6.y_from_tau_value(t, P, Q, "plain") - s.y) > 1e-2


def test_tau_constant_drops_out():
    t = 0.37 + 0.2j
    f = lambda x: p6.log_tau_elliptic(x, P, Q)
    a = p6.y_from_log_tau(f, t)
    b = p6.y_from_log_tau(lambda x: f(x) + cmath.log(3.7 - 2j), t)
    assert abs(a - b) < 1e-9
    assert abs(a - p6.y_theta(t, P, Q).y) < 1e-6


# --- four-point reduction ---------------------------------------------------

def test_schlesinger_route():
    cfg = p6.seed_configuration(T0)
    s = p6.y_from_schlesinger(cfg, P, Q)
    assert s.info["form_defect"] < 1e-8
    assert abs(s.y - p6.y_theta(T0, P, Q).y) < 1e-6


def test_mobius_invariance():
    pts = list(p6.seed_configuration(T0).points)
    a, b, c, d = 1.3 - 0.4j, 0.2, 0.1 + 0.05j, 1.0
    moved = [(a * z + b) / (c * z + d) for z in pts]
    y0 = p6.y_pair_from_points(pts, P, Q)[0]
    y1 = p6.y_pair_from_points(moved, P, Q)[0]
    assert abs(y0 - y1) < 1e-6


def test_reducible_rejected_in_reduction():
    with pytest.raises(ReducibleCaseError):
        p6.y_pair_from_points([0, 1, 2, 3], 0.0, 0.0)


# --- classical solutions ----------------------------------------------------

def test_picard_residual():
    s = p6.picard_solution(0.4, 0.3, 0.2)
    assert p6.pvi_residual(s, p6.PICARD_CASE) < 1e-6


@pytest.mark.parametrize("t", [0.4, 0.3 + 0.5j, -0.7 + 0.2j])
def test_picard_half_period_is_a_root(t):
    s = p6.sigma_from_t(t).sigma
    y = p6.picard_of_sigma(s, 1, 0)
    assert min(abs(y), abs(y - 1), abs(y - t)) < 1e-9


def test_picard_periodicity_and_lattice_error():
    s = p6.sigma_from_t(0.4).sigma
    assert abs(p6.picard_of_sigma(s, 2.3, 0.2) - p6.picard_of_sigma(s, 0.3, 0.2)) < 1e-9
    with pytest.raises(DomainError):
        p6.picard_of_sigma(s, 2, 0)


def test_okamoto_transform():
    s = p6.okamoto_picard_solution(0.4, 0.3, 0.2)
    assert np.isfinite(s.yp) and np.isfinite(s.ypp)
    assert p6.pvi_residual(s) < 1e-5
    # zero numerator leaves y0 unchanged
    assert p6.okamoto_transform(p6.PviSample(0.4, 0.0, 0.7)) == 0.0
    with pytest.raises(PreconditionError):
        p6.okamoto_transform(p6.PviSample(0.4, 0.2))
    bad = p6.okamoto_picard_solution(0.4, 0.3, 0.2, variant="uncorrected")
    assert p6.pvi_residual(bad) > 1e-3


def test_hitchin_residual():
    h = p6.hitchin_solution(1.2j, 0.31, 0.17)
    assert abs(h.t - p6.t_of_sigma(1.2j)) < 1e-15
    assert p6.pvi_residual(h.sample) < 1e-5
    with pytest.raises(DomainError):
        p6.hitchin_of_sigma(1.2j, 1, 0)


def test_hitchin_dictionary():
    s = 0.2 + 1.1j
    c1, c2 = p6.hitchin_parameters(P, Q)
    assert abs(p6.hitchin_of_sigma(s, c1, c2)[1] - p6.y_of_sigma(s, P, Q)) < 1e-9


def test_hitchin_is_okamoto_of_picard():
    s = 0.2 + 1.1j
    c1, c2 = 0.31, 0.17
    t, y = p6.hitchin_of_sigma(s, c1, c2)
    t_, y0, d0 = p6._picard_with_slope(s, 2 * c2, 2 * c1)
    assert abs(y - p6.okamoto_transform(p6.PviSample(t_, y0, d0))) < 1e-9
