"""Boundary-rung rotations on H_{n+1} and their first-order Trotter construction.

On H_{n+1} the conversion Hamiltonians split into rung Paulis,
2 G1 = sum_k c_k Y_k and 2 G2 = sum_k c_k X_k with c_k = (n+1-k) sqrt(k+1).
The bulk rungs k = 1..n-1 are assumed available; the two end rungs (k = 0
and k = n) are reached by interleaving exp(2i theta G / m) with bulk steps.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np

from .fock import SubspaceBasis, enumerate_pump_subspace
from .gates import Gate, distance_up_to_phase, evolve, unitarity_error
from .operators import OperatorMatrix, chi2_generators, rung_sum
from .synthesis import PulseSequence, SynthesisProblem, synthesize

AXES = {1: "y", 2: "x"}


def _axis(axis) -> str:
    if axis in AXES:
        return AXES[axis]
    if axis in ("x", "y"):
        return axis
    raise ValueError(f"axis must be 1 (y), 2 (x), 'x' or 'y', got {axis!r}")


def bulk_generator(axis, n: int, basis: SubspaceBasis | None = None) -> OperatorMatrix:
    if n < 2:
        raise ValueError("bulk rungs need n >= 2")
    return rung_sum(n, _axis(axis), range(1, n), basis or enumerate_pump_subspace(n + 1))


def boundary_generator(axis, n: int, basis: SubspaceBasis | None = None) -> OperatorMatrix:
    """sqrt(n+1) P_{n+1,n} + (n+1) P_{1,0}: the two end rungs only."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return rung_sum(n, _axis(axis), (0, n), basis or enumerate_pump_subspace(n + 1))


def bulk_rotation(axis, theta: float, n: int) -> Gate:
    """exp(-i theta * bulk rung sum) on H_{n+1}; fixes both boundary states."""
    g = evolve(bulk_generator(axis, n), theta)
    g.label = f"U{_axis(axis)}({theta:.6g})"
    g.params = {"axis": _axis(axis), "theta": theta, "n": n}
    return g


@dataclass(frozen=True)
class TrotterPlan:
    theta: float
    m: int
    axis: int = 1
    n: int = 2

    def __post_init__(self):
        if self.m < 1:
            raise ValueError("m must be >= 1")
        _axis(self.axis)
        if self.n < 2:
            raise ValueError("n must be >= 2")


@dataclass
class TrotterResult:
    gate: Gate
    exact: np.ndarray
    error: float       # spectral norm of the difference
    distance: float    # distance_up_to_phase

    def to_json(self) -> dict:
        return {"params": self.gate.params, "error": self.error, "distance": self.distance}


def trotter_v(plan: TrotterPlan) -> TrotterResult:
    """[exp(2i theta G/m) U(theta/m)]^m against exp(i theta * boundary sum)."""
    n, ax = plan.n, _axis(plan.axis)
    basis = enumerate_pump_subspace(n + 1)
    G = chi2_generators(n + 1, basis=basis)["G1" if ax == "y" else "G2"]
    step = bulk_rotation(ax, plan.theta / plan.m, n).unitary.entries
    step = evolve(G, -2 * plan.theta / plan.m).unitary.entries @ step
    U = np.linalg.matrix_power(step, plan.m)
    V = evolve(boundary_generator(ax, n, basis), -plan.theta).unitary.entries
    err = float(np.linalg.norm(U - V, 2))
    gate = Gate(OperatorMatrix(basis, U), f"V{plan.axis}~(m={plan.m})",
                {"theta": plan.theta, "m": plan.m, "axis": plan.axis, "n": n})
    return TrotterResult(gate, V, err, distance_up_to_phase(U, V))


def error_curve(theta: float, n: int = 2, axis: int = 1, m_max: int = 1024) -> list[tuple[int, float]]:
    """Errors at m = 1, 2, 4, ... up to m_max."""
    if m_max < 1:
        raise ValueError("m_max must be >= 1")
    out, m = [], 1
    while m <= m_max:
        out.append((m, trotter_v(TrotterPlan(theta, m, axis, n)).error))
        m *= 2
    return out


def curve_csv(curve: list[tuple[int, float]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["m", "distance"])
    for m, e in curve:
        w.writerow([m, repr(float(e))])
    return buf.getvalue()


# --- single-doublet SU(2) from the exact boundary generators ---------------------

def doublets(n: int) -> dict[str, tuple[tuple[int, int, int], tuple[int, int, int]]]:
    """The two boundary doublets of H_{n+1}, each as (first, second) states."""
    return {"low": ((0, 0, n + 1), (1, 1, n)), "high": ((n + 1, n + 1, 0), (n, n, 1))}


@dataclass
class BoundarySU2Report:
    doublet: str
    n: int
    sequence: PulseSequence
    doublet_distance: float
    opposite_distance: float
    bulk_error: float
    tol: float
    gate: Gate = field(repr=False, default=None)

    @property
    def passed(self) -> bool:
        return max(self.doublet_distance, self.opposite_distance, self.bulk_error) < self.tol

    def to_json(self) -> dict:
        return {"doublet": self.doublet, "n": self.n, "sequence": self.sequence.to_json(),
                "doublet_distance": self.doublet_distance, "opposite_distance": self.opposite_distance,
                "bulk_error": self.bulk_error, "passed": self.passed}


def boundary_su2(target: np.ndarray, doublet: str = "low", n: int = 2, segments: int = 6,
                 tol: float = 1e-8, seed: int = 0, restarts: int = 16) -> BoundarySU2Report:
    """Angles for alternating exact V_1/V_2 rotations realizing ``target`` on
    one boundary doublet of H_{n+1} while fixing the other (up to phase).

    The two boundary generators are block diagonal on the four boundary
    states, so the solve runs there against det-normalized target (+) identity.
    """
    target = np.asarray(target, dtype=complex)
    if target.shape != (2, 2) or unitarity_error(target) > 1e-10:
        raise ValueError("target must be a 2x2 unitary")
    ds = doublets(n)
    if doublet not in ds:
        raise ValueError(f"doublet must be one of {sorted(ds)}")
    other = "high" if doublet == "low" else "low"
    full = enumerate_pump_subspace(n + 1)
    edge = SubspaceBasis(full.modes, list(ds[doublet]) + list(ds[other]))
    gens = [boundary_generator("y", n, edge), boundary_generator("x", n, edge)]
    for g, lab in zip(gens, ("By", "Bx")):
        g.label = lab
    W = target / np.sqrt(np.linalg.det(target))
    block = np.eye(4, dtype=complex)
    block[:2, :2] = W
    prob = SynthesisProblem(gens, target=OperatorMatrix(edge, block), n_segments=segments,
                            tol=tol * 1e-2, seed=seed, restarts=restarts)
    seq = synthesize(prob)
    # V(theta) = exp(+i theta B), so durations t are angles -t
    U = seq.unitary([boundary_generator(a, n, full) for a in ("y", "x")])
    idx = [[full.index_of_occupations(s) for s in ds[k]] for k in (doublet, other)]
    d_err = distance_up_to_phase(U[np.ix_(idx[0], idx[0])], target)
    o_err = distance_up_to_phase(U[np.ix_(idx[1], idx[1])], np.eye(2))
    bulk = [k for k in range(full.dim) if k not in idx[0] + idx[1]]
    b_err = float(np.max(np.abs(U[np.ix_(bulk, bulk)] - np.eye(len(bulk))), initial=0.0))
    gate = Gate(OperatorMatrix(full, U), f"SU2[{doublet}]", {"n": n, "doublet": doublet,
                                                               "angles": [-t for _, t in seq.steps]})
    return BoundarySU2Report(doublet, n, seq, d_err, o_err, b_err, tol, gate)


PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]])
HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
