"""Optical gate primitives, circuits, and the controlled-Z constructions.

A :class:`Gate` carries a unitary on a *local* basis over its footprint
modes. It is embedded into a circuit's joint basis by acting on the
footprint occupations of each joint state and leaving the rest alone, so a
gate is the identity off its footprint by construction. Dichroic mirrors are
pure relabeling and appear in circuits only as :class:`Route` markers.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from math import pi, sqrt
from typing import Iterable, Sequence

import numpy as np

from .fock import (ModeSet, StateVector, SubspaceBasis, logical_qubit_basis, logical_qutrit_basis,
                   product_basis)
from .operators import ANNIHILATE, CREATE, LeakageError, OperatorExpr, OperatorMatrix, to_matrix

UNITARITY_TOL = 1e-10


class GateDomainError(RuntimeError):
    """A gate was applied to input outside the sector it is specified on."""


def unitarity_error(U: np.ndarray) -> float:
    return float(np.max(np.abs(U.conj().T @ U - np.eye(U.shape[0])), initial=0.0))


def expm_hermitian(H: np.ndarray, t: float) -> np.ndarray:
    """exp(-i t H) for Hermitian H via its eigendecomposition."""
    w, V = np.linalg.eigh(H)
    return (V * np.exp(-1j * t * w)) @ V.conj().T


@dataclass
class Gate:
    unitary: OperatorMatrix
    label: str
    params: dict = field(default_factory=dict)
    # local occupation patterns the gate is specified on (None: everywhere)
    domain: frozenset | None = None

    def __post_init__(self):
        err = unitarity_error(self.unitary.entries)
        if err > UNITARITY_TOL:
            raise ValueError(f"gate {self.label!r} not unitary (error {err:.2e})")

    @property
    def footprint(self) -> tuple[str, ...]:
        return self.unitary.basis.modes.ids

    def _local_columns(self, joint: ModeSet):
        pos = [joint.position(m) for m in self.footprint]
        lb = self.unitary.basis
        return pos, lb

    def embed(self, basis: SubspaceBasis) -> np.ndarray:
        """Matrix of this gate on a joint basis. Raises LeakageError if the
        joint basis is not closed under the gate."""
        pos, lb = self._local_columns(basis.modes)
        U = self.unitary.entries
        d = basis.dim
        M = np.zeros((d, d), dtype=complex)
        for col, st in enumerate(basis):
            occ = st.occupations
            loc = tuple(occ[p] for p in pos)
            k = lb.index_of_occupations(loc)
            if k is None:
                M[col, col] = 1.0
                continue
            for r in np.flatnonzero(np.abs(U[:, k]) > 0):
                new = list(occ)
                for p, n in zip(pos, lb[r].occupations):
                    new[p] = n
                row = basis.index_of_occupations(new)
                if row is None:
                    raise LeakageError(f"{self.label}: image {tuple(new)} of {occ} not in joint basis")
                M[row, col] += U[r, k]
        return M

    def successors(self, occ: Sequence[int], joint: ModeSet) -> list[tuple]:
        pos, lb = self._local_columns(joint)
        loc = tuple(occ[p] for p in pos)
        k = lb.index_of_occupations(loc)
        if k is None:
            return []
        out = []
        for r in np.flatnonzero(np.abs(self.unitary.entries[:, k]) > 0):
            new = list(occ)
            for p, n in zip(pos, lb[r].occupations):
                new[p] = n
            out.append(tuple(new))
        return out

    def domain_violation(self, state: StateVector) -> float:
        """Norm of the input amplitude outside the gate's specified sector."""
        if self.domain is None:
            return 0.0
        pos = [state.basis.modes.position(m) for m in self.footprint]
        w = 0.0
        for a, st in zip(state.amplitudes, state.basis):
            if tuple(st.occupations[p] for p in pos) not in self.domain:
                w += abs(a) ** 2
        return sqrt(w)

    def to_json(self) -> dict:
        return {"label": self.label, "footprint": list(self.footprint), "params": self.params}


@dataclass
class Route:
    """Dichroic-mirror routing: relabels which rail a mode travels on."""

    label: str
    mapping: dict[str, str]

    footprint: tuple = ()

    def embed(self, basis: SubspaceBasis) -> np.ndarray:
        return np.eye(basis.dim, dtype=complex)

    def successors(self, occ, joint):
        return []

    def domain_violation(self, state) -> float:
        return 0.0

    def to_json(self) -> dict:
        return {"label": self.label, "footprint": [], "params": {"route": self.mapping}}


def reachable_basis(modes: ModeSet, seeds: Iterable[Sequence[int]], gates: Sequence) -> SubspaceBasis:
    """Closure of ``seeds`` under the support of every gate's local unitary."""
    seen = {tuple(s) for s in seeds}
    queue = deque(seen)
    while queue:
        occ = queue.popleft()
        for g in gates:
            for new in g.successors(occ, modes):
                if new not in seen:
                    seen.add(new)
                    queue.append(new)
    return SubspaceBasis(modes, sorted(seen))


@dataclass
class Circuit:
    basis: SubspaceBasis
    gates: list

    def unitary(self) -> np.ndarray:
        U = np.eye(self.basis.dim, dtype=complex)
        for g in self.gates:
            U = g.embed(self.basis) @ U
        return U

    def apply(self, state: StateVector, tol: float = 1e-12, trace: bool = False):
        """Run ``state`` through the gates in order. With ``trace`` also return
        the intermediate states (one per gate)."""
        psi = state.to(self.basis)
        history = []
        for g in self.gates:
            bad = g.domain_violation(psi)
            if bad > tol:
                raise GateDomainError(f"{g.label}: input weight {bad:.2e} outside specified sector")
            psi = StateVector(self.basis, g.embed(self.basis) @ psi.amplitudes)
            history.append(psi)
        return (psi, history) if trace else psi

    def netlist(self) -> dict:
        return {"modes": self.basis.modes.to_json(), "gates": [g.to_json() for g in self.gates]}

    def dumps(self) -> str:
        return json.dumps(self.netlist(), sort_keys=True)


# --- primitives -----------------------------------------------------------------

def evolve(H: OperatorMatrix, t: float, label: str = "") -> Gate:
    """exp(-i t H) as a gate on H's basis."""
    err = H.hermiticity_error()
    if err > UNITARITY_TOL:
        raise ValueError(f"Hamiltonian not Hermitian (error {err:.2e})")
    U = expm_hermitian(H.entries, t)
    return Gate(OperatorMatrix(H.basis, U), label or f"exp(-i*{t:.6g}*{H.label or 'H'})", {"t": t})


def _local_basis(truncations: dict[str, int]) -> SubspaceBasis:
    return product_basis(ModeSet.from_pairs(truncations.items()))


def sfg(theta: float, modes: Sequence[str] = ("1", "2", "3"), truncations: Sequence[int] = (1, 1, 1)) -> Gate:
    """Generalized sum-frequency generation: exp(theta (K - K^+)) with
    K = a_1 a_2 a_3^+, so |1,1,0> -> cos|1,1,0> + sin|0,0,1>."""
    m1, m2, m3 = modes
    if len(set(modes)) != 3:
        raise ValueError("SFG needs three distinct modes")
    basis = _local_basis(dict(zip(modes, truncations)))
    K = OperatorExpr.monomial((m1, ANNIHILATE), (m2, ANNIHILATE), (m3, CREATE))
    H = to_matrix(1j * (K - K.dag()), basis)
    g = evolve(H, theta)
    return Gate(g.unitary, f"SFG_{theta:.6g}", {"theta": theta, "modes": list(modes)})


def qfc(mode_a: str, mode_b: str, truncations: Sequence[int] = (1, 1)) -> Gate:
    """Single-photon frequency conversion: |1,0> <-> |0,1>, vacuum fixed.

    Multi-photon inputs fall outside the gate's domain and are flagged when
    the gate is applied through :meth:`Circuit.apply`.
    """
    if min(truncations) < 1:
        raise ValueError("QFC modes need truncation >= 1")
    basis = _local_basis({mode_a: truncations[0], mode_b: truncations[1]})
    U = np.zeros((basis.dim, basis.dim), dtype=complex)
    for k, st in enumerate(basis):
        a, b = st.occupations
        j = basis.index_of_occupations((b, a)) if a + b <= 1 else None
        U[k if j is None else j, k] = 1.0
    domain = frozenset({(0, 0), (1, 0), (0, 1)})
    return Gate(OperatorMatrix(basis, U), f"QFC[{mode_a}->{mode_b}]", {"modes": [mode_a, mode_b]}, domain)


@dataclass(frozen=True)
class PhaseConvention:
    """Phases of the full-conversion SHG and SPDC doublet maps.

    shg: |2,0> -> shg_phase |0,1>; spdc: |0,1> -> spdc_phase |2,0>; the SHG
    then SPDC round trip therefore multiplies |2,0> by their product.
    """

    shg_phase: complex = 1.0
    spdc_phase: complex = -1.0

    def __post_init__(self):
        for name in ("shg_phase", "spdc_phase"):
            if abs(abs(complex(getattr(self, name))) - 1) > 1e-12:
                raise ValueError(f"{name} must have unit modulus")

    @property
    def berry_roundtrip(self) -> complex:
        return complex(self.shg_phase) * complex(self.spdc_phase)

    @classmethod
    def with_roundtrip(cls, berry: complex) -> "PhaseConvention":
        return cls(1.0, berry)


def _doublet_rotation(low: str, high: str, truncations, forward_phase: complex, forward: bool) -> OperatorMatrix:
    basis = _local_basis({low: truncations[0], high: truncations[1]})
    a = basis.index_of_occupations((2, 0))
    b = basis.index_of_occupations((0, 1))
    U = np.eye(basis.dim, dtype=complex)
    U[a, a] = U[b, b] = 0
    ph = complex(forward_phase)
    if forward:  # |2,0> -> ph |0,1>
        U[b, a] = ph
        U[a, b] = -np.conj(ph)
    else:  # |0,1> -> ph |2,0>
        U[a, b] = ph
        U[b, a] = -np.conj(ph)
    return OperatorMatrix(basis, U)


def shg(mode_low: str, mode_high: str, conv: PhaseConvention = PhaseConvention(),
        truncations: Sequence[int] = (2, 1)) -> Gate:
    """Second-harmonic generation at full conversion on the |2,0>, |0,1> doublet."""
    if truncations[0] < 2 or truncations[1] < 1:
        raise ValueError("SHG needs low-mode truncation >= 2 and high-mode >= 1")
    U = _doublet_rotation(mode_low, mode_high, truncations, conv.shg_phase, True)
    return Gate(U, f"SHG[{mode_low}->{mode_high}]", {"phase": str(complex(conv.shg_phase))})


def spdc(mode_high: str, mode_low: str, conv: PhaseConvention = PhaseConvention(),
         truncations: Sequence[int] = (2, 1)) -> Gate:
    """Degenerate downconversion |0,1> -> spdc_phase |2,0> (local order low, high)."""
    if truncations[0] < 2 or truncations[1] < 1:
        raise ValueError("SPDC needs low-mode truncation >= 2 and high-mode >= 1")
    U = _doublet_rotation(mode_low, mode_high, truncations, conv.spdc_phase, False)
    return Gate(U, f"SPDC[{mode_high}->{mode_low}]", {"phase": str(complex(conv.spdc_phase))})


def shg_hamiltonian(mode_low: str, mode_high: str, truncations: Sequence[int] = (2, 1)) -> Gate:
    """SHG as a timed evolution under i(b^+ a^2 - b a^+2)/2, run to full transfer.

    The doublet coupling is 1/sqrt(2), so full transfer takes t = pi/sqrt(2).
    Agrees with ``shg`` at shg_phase = +1 on the doublet.
    """
    basis = _local_basis({mode_low: truncations[0], mode_high: truncations[1]})
    L = OperatorExpr.monomial((mode_high, CREATE), (mode_low, ANNIHILATE), (mode_low, ANNIHILATE))
    H = to_matrix(0.5j * (L - L.dag()), basis)
    t = pi / sqrt(2)
    g = evolve(H, t)
    return Gate(g.unitary, f"SHG~H[{mode_low}->{mode_high}]", {"t": t})


def phase_shift(mode: str, phi: float, truncation: int = 2) -> Gate:
    """exp(i phi N) on one mode."""
    basis = _local_basis({mode: truncation})
    U = np.diag(np.exp(1j * phi * np.arange(truncation + 1)))
    return Gate(OperatorMatrix(basis, U), f"PS[{mode}]({phi:.6g})", {"phi": phi})


def distance_up_to_phase(U, V, tol: float = 1e-8) -> float:
    """1 - |tr(U^+ V)|/d; zero iff U = e^{i phi} V."""
    U = U.entries if isinstance(U, OperatorMatrix) else np.asarray(U, dtype=complex)
    V = V.entries if isinstance(V, OperatorMatrix) else np.asarray(V, dtype=complex)
    if U.shape != V.shape:
        raise ValueError("dimension mismatch")
    for M in (U, V):
        if unitarity_error(M) > tol:
            raise ValueError("distance_up_to_phase needs unitary inputs")
    d = U.shape[0]
    return float(max(0.0, 1 - abs(np.trace(U.conj().T @ V)) / d))


def operator_schmidt_rank(U: np.ndarray, dims: tuple[int, int], tol: float = 1e-9) -> int:
    """Operator-Schmidt rank of a bipartite operator on C^da (x) C^db."""
    da, db = dims
    T = U.reshape(da, db, da, db).transpose(0, 2, 1, 3).reshape(da * da, db * db)
    s = np.linalg.svd(T, compute_uv=False)
    return int(np.sum(s > tol * s[0]))


# --- controlled-Z circuits ---------------------------------------------------------

@dataclass
class LogicalReport:
    logical: np.ndarray
    ideal: np.ndarray
    leakage: float
    distance: float
    residual: float
    corrections: dict = field(default_factory=dict)
    tol: float = 1e-10

    @property
    def passed(self) -> bool:
        return self.leakage < self.tol and self.residual < self.tol

    def to_json(self) -> dict:
        def cplx(M):
            return [[[z.real, z.imag] for z in row] for row in np.atleast_2d(M)]
        return {
            "leakage": self.leakage, "distance": self.distance, "residual": self.residual,
            "passed": self.passed, "logical": cplx(self.logical),
            "corrections": {k: [[z.real, z.imag] for z in v] for k, v in self.corrections.items()},
        }


def _logical_restriction(circ: Circuit, logical_states: list[tuple]) -> tuple[np.ndarray, float]:
    U = circ.unitary()
    idx = [circ.basis.index_of_occupations(s) for s in logical_states]
    UL = U[np.ix_(idx, idx)]
    rest = np.setdiff1d(np.arange(U.shape[0]), idx)
    leak = float(np.max(np.linalg.norm(U[np.ix_(rest, idx)], axis=0), initial=0.0))
    return UL, leak


def _joint_logical_states(joint: ModeSet, control: SubspaceBasis, target: SubspaceBasis) -> list[tuple]:
    cpos = [joint.position(m) for m in control.modes.ids]
    tpos = [joint.position(m) for m in target.modes.ids]
    out = []
    for c in control:
        for t in target:
            occ = [0] * len(joint)
            for p, n in zip(cpos, c.occupations):
                occ[p] = n
            for p, n in zip(tpos, t.occupations):
                occ[p] = n
            out.append(tuple(occ))
    return out


def lambda2_modes() -> ModeSet:
    # control s,i at w and pump at 2w; control pump after QFC1 at 2w'; SFG output at 2w+2w'
    return ModeSet.from_pairs([("s_c", 1), ("i_c", 1), ("p_c", 1), ("p_c'", 1),
                               ("s_t", 1), ("i_t", 1), ("p_t", 1), ("sfg", 1)])


def build_lambda2_z(tol: float = 1e-10) -> tuple[Circuit, LogicalReport]:
    """Qubit controlled-Z: QFC1, DM, SFG_pi, DM, QFC2 on H_1 (x) H_1."""
    modes = lambda2_modes()
    gates = [
        qfc("p_c", "p_c'"),
        Route("DM1", {"p_c'": "center", "p_t": "center"}),
        sfg(pi, ("p_c'", "p_t", "sfg")),
        Route("DM2", {"p_c'": "upper", "p_t": "lower"}),
        qfc("p_c'", "p_c"),
    ]
    control = logical_qubit_basis(("s_c", "i_c", "p_c"))
    target = logical_qubit_basis(("s_t", "i_t", "p_t"))
    logical = _joint_logical_states(modes, control, target)
    circ = Circuit(reachable_basis(modes, logical, gates), gates)
    UL, leak = _logical_restriction(circ, logical)
    ideal = np.diag([1, 1, 1, -1]).astype(complex)
    dist = distance_up_to_phase(UL, ideal) if leak < 1e-8 else 1.0
    ph = UL[0, 0] / abs(UL[0, 0]) if abs(UL[0, 0]) > 0 else 1.0
    residual = float(np.max(np.abs(UL - ph * ideal)))
    return circ, LogicalReport(UL, ideal, leak, dist, residual, tol=tol)


def lambda3_ideal() -> np.ndarray:
    return np.diag([1, 1, 1, 1, 1, 1, 1, 1, -1]).astype(complex)


def lambda3_modes() -> ModeSet:
    return ModeSet.from_pairs([("s_c", 2), ("i_c", 2), ("p_c", 2), ("q_c", 1), ("q_c'", 1),
                               ("s_t", 2), ("i_t", 2), ("p_t", 2), ("q_t", 1), ("sfg", 1)])


def build_lambda3_z(conv: PhaseConvention = PhaseConvention(), tol: float = 1e-10
                    ) -> tuple[Circuit, LogicalReport]:
    """Qutrit controlled-Z: SHG per rail (2w -> 4w), the 4w version of the
    qubit circuit, SPDC per rail. The logical restriction is compared with
    Lambda_3[Z] (D_c (x) D_t) where the diagonal corrections are fitted and
    reported."""
    modes = lambda3_modes()
    gates = [
        shg("p_c", "q_c", conv),
        shg("p_t", "q_t", conv),
        qfc("q_c", "q_c'"),
        Route("DM1", {"q_c'": "center", "q_t": "center"}),
        sfg(pi, ("q_c'", "q_t", "sfg")),
        Route("DM2", {"q_c'": "upper", "q_t": "lower"}),
        qfc("q_c'", "q_c"),
        spdc("q_c", "p_c", conv),
        spdc("q_t", "p_t", conv),
    ]
    control = logical_qutrit_basis(("s_c", "i_c", "p_c"))
    target = logical_qutrit_basis(("s_t", "i_t", "p_t"))
    logical = _joint_logical_states(modes, control, target)
    circ = Circuit(reachable_basis(modes, logical, gates), gates)
    UL, leak = _logical_restriction(circ, logical)
    ideal = lambda3_ideal()
    phases = np.diag(UL).reshape(3, 3)
    g = phases[0, 0]
    Dc = phases[:, 0] / g
    Dt = phases[0, :] / g
    fitted = g * ideal @ np.kron(np.diag(Dc), np.diag(Dt))
    residual = float(np.max(np.abs(UL - fitted)))
    dist = distance_up_to_phase(UL, ideal @ np.kron(np.diag(Dc), np.diag(Dt))) if leak < 1e-8 else 1.0
    report = LogicalReport(UL, ideal, leak, dist, residual, {"D_c": Dc, "D_t": Dt}, tol)
    return circ, report
