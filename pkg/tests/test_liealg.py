import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from chi2qudit.liealg import (H2_TABLE, AlgebraBasis, bracket, bracket_chain, closure,
                              gell_mann_checks, gell_mann_reconstruct, h2_generators,
                              h2_table_consistency, membership, standard_gell_mann,
                              su3_structure_constants)
from chi2qudit.operators import chi2_generators


def _rank_closure_oracle(mats, tol=1e-9):
    """Dimension of the Lie closure by brute force: real-vectorize, keep a
    spanning set, add every pairwise bracket until the rank stops growing."""
    def vec(m):
        return np.concatenate([m.real.ravel(), m.imag.ravel()])
    span = list(mats)
    rank = np.linalg.matrix_rank(np.array([vec(m) for m in span]), tol)
    while True:
        new = span + [1j * (a @ b - b @ a) for a in span for b in span]
        A = np.array([vec(m) for m in new])
        r = np.linalg.matrix_rank(A, tol)
        # keep a row basis so the next round stays small
        _, _, Vt = np.linalg.svd(A, full_matrices=False)
        d = mats[0].shape[0]
        span = [(v[: d * d] + 1j * v[d * d:]).reshape(d, d) for v in Vt[:r]]
        if r == rank:
            return r
        rank = r


def _gens(n):
    g = chi2_generators(n)
    return [g[k] for k in ("G1", "G2", "Ns", "Ni", "Np")]


@pytest.mark.parametrize("n, dim", [(1, 4), (2, 9)])
def test_closure_dimension(n, dim):
    rep, basis = closure(_gens(n))
    assert rep.dim == dim
    assert basis.gram_error() < 1e-10


@pytest.mark.parametrize("n", [1, 2, 3])
def test_closure_agrees_with_rank_oracle(n):
    mats = [g.entries for g in _gens(n)]
    assert closure(mats)[0].dim == _rank_closure_oracle(mats)


def test_two_generators_alone_close_to_su():
    # without number operators the trace part is missing on H_2
    g = chi2_generators(2)
    rep, _ = closure([g["G1"], g["G2"]])
    assert rep.dim == 8


def test_closure_rejects_non_hermitian():
    with pytest.raises(ValueError):
        closure([np.array([[0, 1], [0, 0]], dtype=complex)])


def test_membership():
    rep, basis = closure(_gens(2))
    ok, res = membership(np.eye(3), basis)
    assert ok and res < 1e-9


def test_bracket_chain_definitions():
    g1, g2 = (chi2_generators(2)[k].entries for k in ("G1", "G2"))
    c = bracket_chain(g1, g2)
    assert np.allclose(c["G3"], bracket(g1, g2))
    assert np.allclose(c["G4"], bracket(g2, c["G3"]))
    assert np.allclose(c["G5"], bracket(c["G3"], g1))


def test_standard_gell_mann_pass_checks():
    res = gell_mann_checks(standard_gell_mann())
    assert max(res.values()) < 1e-12


def test_structure_constants_antisymmetric():
    f = su3_structure_constants()
    assert np.allclose(f, -f.transpose(1, 0, 2))
    assert np.allclose(f, -f.transpose(0, 2, 1))


# The tabulated H_2 forms are only partly consistent with the ladder
# definitions. These pin down exactly which relations do hold.

@pytest.mark.parametrize("k", ["G2", "G3", "G8", "G9"])
def test_table_entries_that_match(k):
    assert h2_table_consistency()[k] < 1e-12


def test_table_g1_differs_by_pump_parity():
    G1 = h2_generators()["G1"].entries
    D = np.diag([1, 1, -1])
    assert np.allclose(H2_TABLE["G1"], D @ G1 @ D, atol=1e-14)
    assert not np.allclose(H2_TABLE["G1"], G1)


def test_table_g4_g5_are_brackets_with_g3():
    G = {k: v.entries for k, v in h2_generators().items()}
    assert np.allclose(H2_TABLE["G4"], bracket(G["G3"], G["G1"]), atol=1e-12)
    assert np.allclose(H2_TABLE["G5"], bracket(G["G3"], G["G2"]), atol=1e-12)


def test_table_g6_g7_not_rescaled_brackets():
    G = {k: v.entries for k, v in h2_generators().items()}
    for k in ("G6", "G7"):
        t, c = H2_TABLE[k], G[k]
        idx = np.unravel_index(np.argmax(np.abs(t)), t.shape)
        assert np.max(np.abs(c - c[idx] / t[idx] * t)) > 1.0


def test_gell_mann_reconstruction_g9_identity():
    assert np.allclose(gell_mann_reconstruct()["G9"], np.eye(3))


def test_table_spans_u3():
    rep, _ = closure(list(H2_TABLE.values()))
    assert rep.dim == 9


@settings(max_examples=30, deadline=None)
@given(st.integers(min_value=0, max_value=2 ** 31 - 1))
def test_bracket_antisymmetric_and_hermitian(seed):
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    B = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    A, B = A + A.conj().T, B + B.conj().T
    C = bracket(A, B)
    assert np.allclose(C, -bracket(B, A))
    assert np.allclose(C, C.conj().T)


@settings(max_examples=15, deadline=None)
@given(st.permutations(range(5)))
def test_closure_dimension_independent_of_order(perm):
    gens = _gens(2)
    assert closure([gens[k] for k in perm])[0].dim == 9


@settings(max_examples=20, deadline=None)
@given(st.floats(min_value=0.1, max_value=10))
def test_try_add_tolerance_is_relative(scale):
    b = AlgebraBasis([], 2)
    X = np.array([[0, 1], [1, 0]], dtype=complex)
    assert b.try_add(X, 1e-9)[0]
    assert not b.try_add(scale * X, 1e-9)[0]
