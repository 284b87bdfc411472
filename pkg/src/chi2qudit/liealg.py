"""Real Lie-algebra closure of Hermitian generator sets under A, B -> i[A, B].

Elements are kept orthonormal under the Hilbert-Schmidt product Re tr(A^+ B),
so rank decisions reduce to residual norms after Gram-Schmidt.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from math import sqrt
from typing import Mapping, Sequence

import numpy as np

from .operators import OperatorMatrix, to_matrix, number
from .fock import logical_qutrit_basis, SIGNAL, IDLER, PUMP


def bracket(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return 1j * (a @ b - b @ a)


def hs_inner(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.real(np.vdot(a, b)))


def _as_array(m) -> np.ndarray:
    return m.entries if isinstance(m, OperatorMatrix) else np.asarray(m, dtype=complex)


@dataclass
class AlgebraBasis:
    elements: list[np.ndarray]
    size: int

    @property
    def dim(self) -> int:
        return len(self.elements)

    def gram_error(self) -> float:
        G = np.array([[hs_inner(a, b) for b in self.elements] for a in self.elements])
        return float(np.max(np.abs(G - np.eye(self.dim)), initial=0.0))

    def residual(self, a: np.ndarray) -> np.ndarray:
        r = np.array(a, dtype=complex)
        for _ in range(2):  # second pass re-orthogonalizes
            for e in self.elements:
                r = r - hs_inner(e, r) * e
        return r

    def try_add(self, a: np.ndarray, tol: float) -> tuple[bool, float]:
        """Add the normalized orthogonal component of ``a`` if it exceeds ``tol``
        (relative to |a|). Returns (added, relative residual)."""
        na = np.linalg.norm(a)
        if na == 0:
            return False, 0.0
        r = self.residual(a / na)
        nr = float(np.linalg.norm(r))
        if nr > tol:
            r = (r + r.conj().T) / 2
            self.elements.append(r / np.linalg.norm(r))
            return True, nr
        return False, nr


@dataclass
class ClosureReport:
    dim: int
    rounds: int
    residual: float
    generators_used: list[str]
    added_per_round: list[int] = field(default_factory=list)
    saturated: bool = False

    def to_json(self) -> dict:
        return asdict(self)

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)


def closure(generators: Sequence, tol: float = 1e-9, labels: Sequence[str] | None = None
            ) -> tuple[ClosureReport, AlgebraBasis]:
    mats = [_as_array(g) for g in generators]
    if not mats:
        raise ValueError("need at least one generator")
    d = mats[0].shape[0]
    for m in mats:
        if m.shape != (d, d):
            raise ValueError("generators must be square and of equal size")
        if np.max(np.abs(m - m.conj().T)) > tol:
            raise ValueError("generator is not Hermitian")
    if labels is None:
        labels = [getattr(g, "label", "") or f"g{k}" for k, g in enumerate(generators)]
    cap = d * d
    basis = AlgebraBasis([], d)
    for m in mats:
        basis.try_add(m, tol)
    added = [basis.dim]
    worst_rejected = 0.0
    rounds = 0
    done = 0  # elements whose brackets with all earlier ones are processed
    while basis.dim < cap:
        rounds += 1
        start = basis.dim
        new = 0
        for j in range(done, start):
            for i in range(j):
                ok, res = basis.try_add(bracket(basis.elements[i], basis.elements[j]), tol)
                if ok:
                    new += 1
                else:
                    worst_rejected = max(worst_rejected, res)
                if basis.dim >= cap:
                    break
            if basis.dim >= cap:
                break
        done = start
        added.append(new)
        if new == 0:
            break
    report = ClosureReport(basis.dim, rounds, worst_rejected, list(labels), added, basis.dim >= cap)
    return report, basis


def membership(a, basis: AlgebraBasis, tol: float = 1e-9) -> tuple[bool, float]:
    r = float(np.linalg.norm(basis.residual(_as_array(a))))
    return r <= tol, r


# --- the qutrit (H_2) algebra ------------------------------------------------

_S2 = sqrt(2.0)

# Closed forms of G1..G9 on H_2 in the logical order (|1,1,1>, |2,2,0>, |0,0,2>),
# transcribed as tabulated. Not all are mutually consistent; see h2_table_consistency.
H2_TABLE: dict[str, np.ndarray] = {
    "G1": -0.5j * np.array([[0, 2, _S2], [-2, 0, 0], [-_S2, 0, 0]]),
    "G2": 0.5 * np.array([[0, 2, _S2], [2, 0, 0], [_S2, 0, 0]], dtype=complex),
    "G3": np.diag([1, -2, 1]).astype(complex),
    "G4": 3 * np.array([[0, 1, 0], [1, 0, 0], [0, 0, 0]], dtype=complex),
    "G5": 3j * np.array([[0, 1, 0], [-1, 0, 0], [0, 0, 0]]),
    "G6": 0.75 * np.array([[0, 0, 0], [0, 0, 1], [0, 1, 0]], dtype=complex),
    "G7": 0.75j * np.array([[0, 0, 0], [0, 0, -1], [0, 1, 0]]),
    "G8": 0.5 * np.diag([0, 1, -1]).astype(complex),
    "G9": np.eye(3, dtype=complex),
}


def h2_generators(kappa: float = 1.0) -> dict[str, OperatorMatrix]:
    """G1..G9 on H_2 (logical order) computed from the ladder definitions:
    G1, G2 from the Hamiltonians, G3..G7 by the nested brackets, G8, G9 from
    number operators."""
    from .operators import chi2_generators

    basis = logical_qutrit_basis()
    gens = chi2_generators(2, kappa, basis)
    out = {"G1": gens["G1"], "G2": gens["G2"]}
    chain = bracket_chain(gens["G1"].entries, gens["G2"].entries)
    for k, v in chain.items():
        out[k] = OperatorMatrix(basis, v, label=k)
    Ns, Ni, Np = (to_matrix(number(m), basis).entries for m in (SIGNAL, IDLER, PUMP))
    I = np.eye(3)
    out["G8"] = OperatorMatrix(basis, 0.5 * (I - Np), label="G8")
    out["G9"] = OperatorMatrix(basis, 0.5 * ((Ns + Ni) / 2 + Np), label="G9")
    return out


def bracket_chain(g1: np.ndarray, g2: np.ndarray) -> dict[str, np.ndarray]:
    """G3 = i[G1,G2], G4 = i[G2,G3], G5 = i[G3,G1],
    G6 = (i[G1,G4] + i[G5,G2])/2, G7 = i[G4,G2]."""
    g3 = bracket(g1, g2)
    g4 = bracket(g2, g3)
    g5 = bracket(g3, g1)
    g6 = 0.5 * (bracket(g1, g4) + bracket(g5, g2))
    g7 = bracket(g4, g2)
    return {"G3": g3, "G4": g4, "G5": g5, "G6": g6, "G7": g7}


def gell_mann_reconstruct(table: Mapping[str, np.ndarray] | None = None) -> dict[str, np.ndarray]:
    """lambda_1..lambda_8 (and G9) as fixed linear combinations of G1..G9.

    Uses ``H2_TABLE`` by default.
    """
    G = {k: _as_array(v) for k, v in (table or H2_TABLE).items()}
    r2, r3 = sqrt(2.0), sqrt(3.0)
    return {
        "l1": G["G4"] / 3,
        "l2": -G["G5"] / 3,
        "l3": 2 * G["G8"] + G["G3"],
        "l4": r2 * (G["G2"] - G["G4"] / 3),
        "l5": r2 * (G["G1"] - G["G5"] / 3),
        "l6": 4 * G["G6"] / 3,
        "l7": 4 * G["G7"] / 3,
        "l8": (G["G3"] + 6 * G["G8"]) / r3,
        "G9": G["G9"],
    }


def standard_gell_mann() -> dict[str, np.ndarray]:
    l = {f"l{k}": np.zeros((3, 3), dtype=complex) for k in range(1, 9)}
    l["l1"][0, 1] = l["l1"][1, 0] = 1
    l["l2"][0, 1], l["l2"][1, 0] = -1j, 1j
    l["l3"][0, 0], l["l3"][1, 1] = 1, -1
    l["l4"][0, 2] = l["l4"][2, 0] = 1
    l["l5"][0, 2], l["l5"][2, 0] = -1j, 1j
    l["l6"][1, 2] = l["l6"][2, 1] = 1
    l["l7"][1, 2], l["l7"][2, 1] = -1j, 1j
    l["l8"] = np.diag([1, 1, -2]).astype(complex) / sqrt(3.0)
    return l


def su3_structure_constants() -> np.ndarray:
    """Totally antisymmetric f_abc (0-based) with [l_a, l_b] = 2i f_abc l_c."""
    f = np.zeros((8, 8, 8))
    r3 = sqrt(3.0) / 2
    for (a, b, c), v in {(1, 2, 3): 1.0, (1, 4, 7): 0.5, (1, 5, 6): -0.5, (2, 4, 6): 0.5,
                         (2, 5, 7): 0.5, (3, 4, 5): 0.5, (3, 6, 7): -0.5,
                         (4, 5, 8): r3, (6, 7, 8): r3}.items():
        for p, s in (((a, b, c), 1), ((b, c, a), 1), ((c, a, b), 1),
                     ((b, a, c), -1), ((a, c, b), -1), ((c, b, a), -1)):
            f[p[0] - 1, p[1] - 1, p[2] - 1] = s * v
    return f


def gell_mann_checks(lams: Mapping[str, np.ndarray]) -> dict[str, float]:
    """Worst deviations from tr(l_a l_b) = 2 delta_ab and from the su(3)
    commutation relations with standard structure constants."""
    L = [lams[f"l{k}"] for k in range(1, 9)]
    trace_err = max(abs(np.trace(L[a] @ L[b]) - 2 * (a == b)) for a in range(8) for b in range(8))
    f = su3_structure_constants()
    comm_err = 0.0
    for a in range(8):
        for b in range(8):
            rhs = 2j * sum(f[a, b, c] * L[c] for c in range(8))
            comm_err = max(comm_err, float(np.max(np.abs(L[a] @ L[b] - L[b] @ L[a] - rhs))))
    herm_err = max(float(np.max(np.abs(x - x.conj().T))) for x in L)
    tr_err = max(abs(np.trace(x)) for x in L)
    return {"trace_orthonormality": float(trace_err), "structure_relations": comm_err,
            "hermiticity": herm_err, "tracelessness": float(tr_err)}


def h2_table_consistency(kappa: float = 1.0) -> dict[str, float]:
    """Max entrywise gap between each computed G_k and its tabulated form."""
    computed = h2_generators(kappa)
    return {k: float(np.max(np.abs(computed[k].entries - H2_TABLE[k]))) for k in H2_TABLE}
