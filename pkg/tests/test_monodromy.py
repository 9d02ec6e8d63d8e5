import cmath
import math

import numpy as np
import pytest
from scipy.linalg import expm

from thetaschlesinger.errors import PathError
from thetaschlesinger.monodromy import LoopPath, angular_order, default_loops, transport, verify_monodromies
from thetaschlesinger.schlesinger import monodromy_data, solve
from thetaschlesinger.verification import monodromy_suite, random_characteristic, random_configuration


def test_transport_commuting_system_closed_form():
    # A_1 = -A_2 = D diagonal: Y = ((lam - l1)/(lam - l2))^D, loop around l1 gives exp(2 pi i D)
    D = np.diag([0.3, -0.3]).astype(complex)
    pts = [0.0, 1.0]
    res = transport(pts, [D, -D], LoopPath(0.5 + 3j, 0.0, 0.25))
    assert np.max(np.abs(res.M - expm(2j * math.pi * D))) < 1e-9
    assert res.step_error < 1e-8


def test_transport_rejects_close_path():
    with pytest.raises(PathError):
        transport([0.0, 1.0], [np.eye(2), -np.eye(2)], LoopPath(0.5 + 3j, 0.0, 0.99))


def test_default_loops_see_points_in_order(cfg2):
    pts = list(cfg2.points)
    loops, base = default_loops(pts)
    assert angular_order(pts, base) == list(range(len(pts)))
    # base on the left of the chain l_1 -> l_n
    assert ((base - pts[0]) / (pts[-1] - pts[0])).imag > 0
    assert all(lp.clearance(pts) > 0 for lp in loops)


def test_verify_genus_one(cfg1, ch1):
    rep = verify_monodromies(solve(cfg1, ch1), monodromy_data(1, ch1))
    assert rep.max_trace < 1e-6
    assert rep.pair_trace_defect < 1e-6
    assert rep.cyclic_defect < 1e-6
    assert rep.conjugation_defect < 1e-6
    # M_j^2 = -I with an even count makes both traversal directions close up
    assert rep.cyclic_order in ([0, 1, 2, 3], [3, 2, 1, 0])
    assert sorted(rep.as_dict()["cyclic_order"]) == [1, 2, 3, 4]


def test_perturbed_residues_break_traces(rng):
    cfg = random_configuration(1, rng)
    ch = random_characteristic(1, rng)
    good = {c.name: c.defect for c in monodromy_suite(cfg, ch)}
    bad = {c.name: c.defect for c in monodromy_suite(cfg, ch, perturb=1e-3)}
    assert good["pair traces tr(M_j M_k)"] < 1e-6
    assert bad["pair traces tr(M_j M_k)"] > 1e-4
