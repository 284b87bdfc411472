from math import sqrt

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from chi2qudit.fock import ModeSet, enumerate_pump_subspace, logical_qutrit_basis, product_basis
from chi2qudit.operators import (BoundaryPauli, LeakageError, OperatorMatrix, annihilate,
                                 ancilla_generators, boundary_pauli, chi2_generators, conversion,
                                 create, g1_expr, g2_expr, invariant_basis, number, rung_coefficients,
                                 rung_sum, to_matrix)


def _ladder(trunc):
    # single-mode annihilation operator, independent of the package
    return np.diag(np.sqrt(np.arange(1, trunc + 1)), 1).astype(complex)


def _kron_oracle(truncs):
    a = [_ladder(t) for t in truncs]
    eye = [np.eye(t + 1) for t in truncs]

    def op(k, m):
        mats = [m if j == k else eye[j] for j in range(len(truncs))]
        out = mats[0]
        for x in mats[1:]:
            out = np.kron(out, x)
        return out
    return [op(k, a[k]) for k in range(len(truncs))]


def test_conversion_matches_kron_oracle():
    m = ModeSet.of(s=2, i=2, p=2)
    b = product_basis(m)
    a_s, a_i, a_p = _kron_oracle((2, 2, 2))
    T = a_s.conj().T @ a_i.conj().T @ a_p
    assert np.allclose(to_matrix(conversion(), b).entries, T, atol=1e-14)
    G1 = 0.5j * (T - T.conj().T)
    assert np.allclose(to_matrix(g1_expr(), b).entries, G1, atol=1e-14)


def test_number_operator_diagonal():
    b = product_basis(ModeSet.of(x=3))
    assert np.allclose(to_matrix(number("x"), b).entries, np.diag([0, 1, 2, 3]))


def test_truncation_leakage_is_reported():
    b = product_basis(ModeSet.of(x=1))
    M = to_matrix(create("x"), b)
    # a^+ |1> = sqrt(2)|2> falls outside
    assert M.leakage == pytest.approx(sqrt(2))


def test_g1_on_h2_entries():
    # T|1,1,1> = 2|2,2,0>,  T|0,0,2> = sqrt(2)|1,1,1>
    g = chi2_generators(2, basis=logical_qutrit_basis())
    expected = np.array([[0, -1j, 1j / sqrt(2)], [1j, 0, 0], [-1j / sqrt(2), 0, 0]])
    assert np.allclose(g["G1"].entries, expected, atol=1e-14)
    expected2 = np.array([[0, 1, 1 / sqrt(2)], [1, 0, 0], [1 / sqrt(2), 0, 0]])
    assert np.allclose(g["G2"].entries, expected2, atol=1e-14)


def test_generators_close_on_pump_subspace():
    for n in range(1, 6):
        g = chi2_generators(n)
        for M in g.values():
            assert M.leakage == 0 and M.is_hermitian()


def test_kappa_scales_generators():
    g1 = chi2_generators(3, kappa=1.0)["G1"].entries
    g2 = chi2_generators(3, kappa=2.5)["G1"].entries
    assert np.allclose(g2, 2.5 * g1)


def test_invariant_basis_detects_truncation():
    m = ModeSet.of(s=1, i=1, p=2)
    with pytest.raises(LeakageError):
        invariant_basis(m, [(0, 0, 2)], [conversion() + conversion().dag()])


def test_invariant_basis_of_pump_seed_is_h_n():
    m = ModeSet.of(s=3, i=3, p=3)
    b = invariant_basis(m, [(0, 0, 3)], [g1_expr(), g2_expr()])
    assert sorted(s.occupations for s in b) == sorted(s.occupations for s in enumerate_pump_subspace(3))


def test_ancilla_kinds():
    g1, _ = ancilla_generators("p'")
    assert g1.mode_ids == {"s", "i", "p'"}
    g1, _ = ancilla_generators("s'i'")
    assert g1.mode_ids == {"s'", "i'", "p"}
    with pytest.raises(ValueError):
        ancilla_generators("q")


def test_boundary_pauli_y_convention():
    b = enumerate_pump_subspace(3)
    Y = boundary_pauli(BoundaryPauli(2, 0, "y"), b).entries
    lo, hi = b.index_of_occupations((2, 2, 1)), b.index_of_occupations((3, 3, 0))
    assert Y[hi, lo] == 1j and Y[lo, hi] == -1j


def test_rung_coefficients():
    assert rung_coefficients(2) == pytest.approx({0: 3.0, 1: 2 * sqrt(2), 2: sqrt(3)})


@pytest.mark.parametrize("n", [2, 3, 4, 5, 6])
def test_rung_decomposition(n):
    g = chi2_generators(n + 1)
    b = g["G1"].basis
    full = range(n + 1)
    assert np.max(np.abs(g["G1"].entries - 0.5 * rung_sum(n, "y", full, b).entries)) < 1e-12
    assert np.max(np.abs(g["G2"].entries - 0.5 * rung_sum(n, "x", full, b).entries)) < 1e-12


def test_operator_matrix_json_roundtrip():
    g = chi2_generators(2)["G1"]
    again = OperatorMatrix.from_json(g.to_json())
    assert np.array_equal(again.entries, g.entries) and again.basis == g.basis


@settings(max_examples=25, deadline=None)
@given(st.integers(min_value=1, max_value=4), st.sampled_from(["x", "y"]))
def test_commutator_away_from_edge(t, mode):
    b = product_basis(ModeSet.of(x=t + 1, y=t + 1))
    a = to_matrix(annihilate(mode), b).entries
    ad = to_matrix(create(mode), b).entries
    C = a @ ad - ad @ a
    keep = [k for k, s in enumerate(b) if s[mode] < t + 1]
    assert np.allclose(C[np.ix_(keep, keep)], np.eye(len(keep)))


@settings(max_examples=25, deadline=None)
@given(st.integers(min_value=1, max_value=6),
       st.floats(min_value=-3, max_value=3, allow_nan=False))
def test_generators_hermitian_and_number_conserving(n, kappa):
    g = chi2_generators(n, kappa=kappa)
    b = g["G1"].basis
    Ns, Np = g["Ns"].entries, g["Np"].entries
    for k in ("G1", "G2"):
        G = g[k].entries
        assert np.allclose(G, G.conj().T)
        # n_s + n_p is the same on every state of H_n
        assert np.allclose(G @ (Ns + Np), (Ns + Np) @ G)
    assert np.allclose(np.diag(Ns + Np), n)
    assert b.dim == n + 1
