import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from thetaschlesinger.curve import (BranchConfiguration, abel_at_infinity, abel_map, branch_abel_value,
                                    lattice_distance, normalized_a_periods, reduce_mod_lattice,
                                    riemann_constants, riemann_matrix, w_eval)
from thetaschlesinger.errors import BranchAmbiguityError, ConfigurationError
from thetaschlesinger.verification import abel_suite, periods_suite, random_configuration

# Im B for real configurations, computed independently in 40-digit arithmetic
# (B is purely imaginary when all branch points are real).
FROZEN_IM_B = [
    ([0, 1, 2, 3], [[1.2792615711710065]]),
    ([0, 1, 2, 3, 4, 5], [[1.2767141713330621, 0.85458444327874354],
                          [0.85458444327874354, 1.7091688865574871]]),
    ([-1, 0, 1.5, 2, 3.5, 4.25, 5, 6.5],
     [[1.5967450395579819, 0.91543707374132673, 0.83762402433434193],
      [0.91543707374132673, 1.8831053233671471, 1.3028786306681698],
      [0.83762402433434193, 1.3028786306681698, 1.892235550805941]]),
]


@pytest.mark.parametrize("pts,im_b", FROZEN_IM_B)
def test_riemann_matrix_frozen(pts, im_b):
    per = riemann_matrix(BranchConfiguration(pts))
    assert np.max(np.abs(per.B.real)) < 1e-13
    assert np.max(np.abs(per.B.imag - np.array(im_b))) < 1e-13


def test_equianharmonic_symmetry():
    # cube roots of unity plus 0: the modulus is fixed by the Z/3 symmetry, B = e^{i pi/3} mod SL2
    pts = [0, 1, np.exp(2j * np.pi / 3), np.exp(4j * np.pi / 3)]
    per = riemann_matrix(BranchConfiguration(pts))
    b = complex(per.B[0, 0])
    j = abs(abs(b) - 1) < 1e-12 or abs(abs(b - 1) - 1) < 1e-12 or abs(abs(b + 1) - 1) < 1e-12
    assert j


def test_configuration_validation():
    with pytest.raises(ConfigurationError, match="even"):
        BranchConfiguration([0, 1, 2])
    with pytest.raises(ConfigurationError, match="1 and 3"):
        BranchConfiguration([0, 1, 0, 3])
    with pytest.raises(ConfigurationError, match="intersect"):
        BranchConfiguration([0, 2, 1 - 1j, 1 + 1j])
    with pytest.warns(RuntimeWarning):
        BranchConfiguration([0, 1e-9, 2, 3])


def test_periods_invariants(cfg2):
    per = riemann_matrix(cfg2)
    assert np.max(np.abs(normalized_a_periods(cfg2, per) - np.eye(2))) < 1e-10
    assert np.all(np.linalg.eigvalsh(per.B.imag) > 0)
    assert all(c.passed for c in periods_suite(cfg2))


def test_w_branch_behaviour(cfg1):
    # w ~ lam^(g+1) on sheet 1 at infinity
    lam = 1e4 + 3e3j
    assert abs(w_eval(cfg1, lam) / lam ** 2 - 1) < 1e-3
    assert abs(w_eval(cfg1, lam, sheet=2) + w_eval(cfg1, lam)) < 1e-9


@pytest.mark.parametrize("g", [1, 2])
def test_abel_branch_points_closed_forms(g):
    cfg = random_configuration(g, np.random.default_rng(g))
    assert all(c.passed for c in abel_suite(cfg))


def test_abel_on_cut_rejected(cfg1):
    per = riemann_matrix(cfg1)
    with pytest.raises(BranchAmbiguityError):
        abel_map(cfg1, per, 0.5)


def test_abel_sheets_and_reduction(cfg1):
    per = riemann_matrix(cfg1)
    u1 = abel_map(cfg1, per, 1.5 + 0.7j).u
    u2 = abel_map(cfg1, per, 1.5 + 0.7j, sheet=2).u
    assert np.allclose(u1, -u2)
    r = abel_map(cfg1, per, 1.5 + 0.7j, reduce=True).u
    assert lattice_distance(r, u1, per.B) < 1e-12


def test_abel_infinity_matches_far_point(cfg1):
    per = riemann_matrix(cfg1)
    u_inf = abel_at_infinity(cfg1, per).u
    # the tail beyond radius R is c/R + O(R^-2); extrapolate it away
    hint = [-1, -10, -100]
    f1 = abel_map(cfg1, per, -1000, path_hint=hint).u
    f2 = abel_map(cfg1, per, -2000, path_hint=hint).u
    assert np.max(np.abs(2 * f2 - f1 - u_inf)) < 1e-6
    # Riemann constant at g = 1 is B/2 + 1/2
    assert np.allclose(riemann_constants(per), per.B[0] / 2 + 0.5)


@given(st.floats(-5, 5), st.floats(-5, 5), st.integers(-3, 3), st.integers(-3, 3))
def test_reduce_mod_lattice_invariance(x, y, m, n):
    B = np.array([[0.3 + 1.1j]])
    u = np.array([complex(x, y)])
    r = reduce_mod_lattice(u + m + n * B[0], B)
    assert lattice_distance(r, u, B) < 1e-12
    assert -0.5 - 1e-12 <= r[0].real <= 0.5 + 1e-12


def test_branch_abel_values_are_half_periods(cfg2):
    per = riemann_matrix(cfg2)
    for j in range(1, 7):
        u = branch_abel_value(per, j)
        assert lattice_distance(2 * u, np.zeros(2), per.B) < 1e-12
