import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from chi2qudit.fock import enumerate_pump_subspace
from chi2qudit.gates import evolve, unitarity_error
from chi2qudit.operators import chi2_generators
from chi2qudit.trotter import (HADAMARD, PAULI_X, PAULI_Y, TrotterPlan, boundary_generator,
                               boundary_su2, bulk_generator, bulk_rotation, curve_csv, error_curve,
                               trotter_v)


@pytest.mark.parametrize("axis", [1, 2])
def test_bulk_rotation_fixes_boundary(axis):
    n = 3
    U = bulk_rotation(axis, 0.8, n).unitary
    b = U.basis
    for occ in ((0, 0, n + 1), (n + 1, n + 1, 0)):
        v = b.vector(occ)
        assert np.allclose(U.entries @ v, v, atol=1e-12)


def test_bulk_rotation_zero_angle():
    # acts on H_{n+1}, which has n + 2 states
    assert np.allclose(bulk_rotation(1, 0.0, 4).unitary.entries, np.eye(6))


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_generator_split(n):
    b = enumerate_pump_subspace(n + 1)
    g = chi2_generators(n + 1, basis=b)
    for axis, key in (("y", "G1"), ("x", "G2")):
        lhs = boundary_generator(axis, n, b).entries
        rhs = 2 * g[key].entries - bulk_generator(axis, n, b).entries
        assert np.max(np.abs(lhs - rhs)) < 1e-12


def test_first_order_convergence():
    e = dict(error_curve(0.7, 2, 1, 1024))
    for m in (8, 16):
        assert 1.8 <= e[m] / e[2 * m] <= 2.2
    assert e[1024] < 1e-3 * e[1]


def test_zero_angle_is_identity():
    for m in (1, 3, 8):
        r = trotter_v(TrotterPlan(0.0, m))
        assert r.error < 1e-12


def test_plan_validation():
    with pytest.raises(ValueError):
        TrotterPlan(0.1, 0)
    with pytest.raises(ValueError):
        TrotterPlan(0.1, 1, axis=3)


def test_curve_csv():
    text = curve_csv([(1, 0.5), (2, 0.25)])
    assert text.splitlines() == ["m,distance", "1,0.5", "2,0.25"]


@pytest.mark.parametrize("target", [PAULI_X, PAULI_Y, HADAMARD])
@pytest.mark.parametrize("doublet", ["low", "high"])
def test_boundary_su2(target, doublet):
    r = boundary_su2(target, doublet, 2)
    assert r.passed
    assert r.doublet_distance < 1e-8 and r.opposite_distance < 1e-8
    assert len(r.sequence.steps) == 6


def test_boundary_su2_identity_zero_angles():
    r = boundary_su2(np.eye(2))
    assert all(t == 0 for _, t in r.sequence.steps)


def test_boundary_su2_fixes_bulk():
    r = boundary_su2(PAULI_X, "low", 3)
    assert r.passed and r.bulk_error < 1e-10


@settings(max_examples=20, deadline=None)
@given(st.floats(min_value=-2, max_value=2), st.integers(min_value=1, max_value=40),
       st.sampled_from([1, 2]))
def test_trotter_output_unitary(theta, m, axis):
    r = trotter_v(TrotterPlan(theta, m, axis, 2))
    assert unitarity_error(r.gate.unitary.entries) < 1e-10


@settings(max_examples=20, deadline=None)
@given(st.floats(min_value=-3, max_value=3), st.floats(min_value=-3, max_value=3))
def test_boundary_rotations_commute(t1, t2):
    n = 3
    B = boundary_generator("y", n)
    A = evolve(B, t1).unitary.entries
    C = evolve(B, t2).unitary.entries
    assert np.allclose(A @ C, C @ A, atol=1e-12)
    # support is the four edge states only
    b = B.basis
    edge = {b.index_of_occupations(o) for o in ((0, 0, n + 1), (1, 1, n), (n, n, 1), (n + 1, n + 1, 0))}
    rows, cols = np.nonzero(np.abs(B.entries) > 1e-14)
    assert set(rows) | set(cols) <= edge
