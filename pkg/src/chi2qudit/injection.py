"""Photon injection and subtraction through ancilla modes.

Covers the single-ancilla pump injection, the Fock-state ladder built from
it, the |1,1,1> -> |0,0,2> protocol, synthesized subtraction unitaries and
the entangling check between the core modes and the ancilla pump.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from math import pi, sqrt
from typing import Sequence

import numpy as np

from .fock import (IDLER, PUMP, SIGNAL, ModeSet, StateVector, SubspaceBasis,
                   enumerate_pump_subspace, logical_qutrit_basis)
from .gates import (Circuit, PhaseConvention, Route, evolve, phase_shift, reachable_basis,
                    shg, spdc)
from .operators import (ANCILLA_IDLER, ANCILLA_PUMP, ANCILLA_SIGNAL, LeakageError, OperatorMatrix,
                        ancilla_generators, chi2_generators, g1_expr, g2_expr, invariant_basis,
                        number, to_matrix)
from .synthesis import PulseSequence, SynthesisProblem, synthesize

LEAKAGE_TOL = 1e-12


def _vec(sv: StateVector) -> list:
    return [{"state": list(occ), "re": a.real, "im": a.imag} for occ, a in sv.as_dict(1e-15).items()]


def _drop_mode(state: StateVector, mode: str, value: int, tol: float = 1e-10) -> StateVector:
    """Project ``mode`` onto occupation ``value`` and remove it from the mode set.
    The discarded weight must be below ``tol``."""
    modes = state.basis.modes
    k = modes.position(mode)
    keep = ModeSet(tuple(m for m in modes if m.id != mode))
    states, amps, lost = [], [], 0.0
    for st, a in zip(state.basis, state.amplitudes):
        if st.occupations[k] == value:
            states.append(st.occupations[:k] + st.occupations[k + 1:])
            amps.append(a)
        else:
            lost += abs(a) ** 2
    if sqrt(lost) > tol:
        raise ValueError(f"mode {mode} not in |{value}>: weight {sqrt(lost):.3e} elsewhere")
    return StateVector(SubspaceBasis(keep, states), np.array(amps, dtype=complex))


def _add_mode(state: StateVector, mode: str, truncation: int, value: int) -> StateVector:
    modes = state.basis.modes + ModeSet.from_pairs([(mode, truncation)])
    basis = SubspaceBasis(modes, [st.occupations + (value,) for st in state.basis])
    return StateVector(basis, state.amplitudes.copy())


def _mean_number(state: StateVector, mode: str) -> float:
    k = state.basis.modes.position(mode)
    return float(sum(abs(a) ** 2 * st.occupations[k] for st, a in zip(state.basis, state.amplitudes)))


# --- pump injection -----------------------------------------------------------------

def injection_hamiltonian(kappa: float = 1.0):
    """a_s^+ a_i^+ a_p' + h.c. (no factor 1/2)."""
    return g2_expr(SIGNAL, IDLER, ANCILLA_PUMP, kappa=kappa, prefactor=1.0)


def inject_pump(state: StateVector, kappa: float = 1.0) -> StateVector:
    """exp(i pi G / 2) with G = a_s^+ a_i^+ a_p' + h.c. on a state over modes
    including s, i, p'. Raises LeakageError if the evolution would leave the
    state's mode truncations."""
    H = injection_hamiltonian(kappa)
    seeds = [st.occupations for st, a in zip(state.basis, state.amplitudes) if abs(a) > 0]
    basis = invariant_basis(state.basis.modes, seeds, [H])
    Hm = to_matrix(H, basis, "G2a")
    if Hm.leakage > LEAKAGE_TOL:
        raise LeakageError(f"injection Hamiltonian leaks {Hm.leakage:.3e}")
    U = evolve(Hm, -pi / 2).unitary.entries
    psi = state.to(basis)
    return StateVector(basis, U @ psi.amplitudes)


def injection_modes(n: int = 1) -> ModeSet:
    return ModeSet.from_pairs([(SIGNAL, n), (IDLER, n), (PUMP, n), (ANCILLA_PUMP, 1)])


# --- |1,1,1> -> |0,0,2> -----------------------------------------------------------

ROT_AUX = "u"  # idler second harmonic used by the sign-flip circuit
STEP3_MODES = ("pump-flipped", "as-written")


def rotation_modes() -> ModeSet:
    return ModeSet.from_pairs([(SIGNAL, 2), (IDLER, 2), (PUMP, 2), (ROT_AUX, 1)])


def rotation_time(kappa: float = 1.0) -> float:
    return 2 * pi / (3 * kappa * sqrt(6))


def rotation_hamiltonian(kappa: float = 1.0) -> OperatorMatrix:
    """i kappa (a_s^+ a_i^+ a_p - h.c.) on H_2, i.e. twice the usual G1."""
    return to_matrix(g1_expr(kappa=kappa, prefactor=1.0), enumerate_pump_subspace(2), "G")


def rotation_circuit(kappa: float = 1.0, conv: PhaseConvention = PhaseConvention(),
                     step3: str = "pump-flipped") -> tuple[Circuit, list[int]]:
    """The three-step circuit and the gate count at the end of each step.

    Step 3 evolves under the same Hamiltonian as step 1. In the default
    ``"pump-flipped"`` mode it is sandwiched between pump phase flips, which
    reverse the sign of the Hamiltonian; ``"as-written"`` omits them.
    """
    if step3 not in STEP3_MODES:
        raise ValueError(f"step3 must be one of {STEP3_MODES}")
    G = rotation_hamiltonian(kappa)
    t = rotation_time(kappa)
    step1 = [evolve(G, t, "exp(-iGt)")]
    step2 = [
        Route("DM1", {PUMP: "upper", IDLER: "lower"}),
        shg(IDLER, ROT_AUX, conv),
        spdc(ROT_AUX, IDLER, conv),
        Route("DM2", {PUMP: "output"}),
    ]
    if step3 == "pump-flipped":
        step3_gates = [phase_shift(PUMP, pi), evolve(G, t, "exp(-iGt)"), phase_shift(PUMP, pi)]
    else:
        step3_gates = [evolve(G, t, "exp(-iGt)")]
    gates = step1 + step2 + step3_gates
    modes = rotation_modes()
    seeds = [st.occupations + (0,) for st in enumerate_pump_subspace(2, modes=modes.sub((SIGNAL, IDLER, PUMP)))]
    basis = reachable_basis(modes, seeds, gates)
    ends = [len(step1), len(step1) + len(step2), len(gates)]
    return Circuit(basis, gates), ends


ROTATION_EXPECTED = {
    # logical order |1,1,1>, |2,2,0>, |0,0,2>
    "psi1": np.array([-0.5, 1 / sqrt(2), -0.5]),
    "psi2": np.array([-0.5, -1 / sqrt(2), -0.5]),
    "psi3": np.array([0.0, 0.0, -1.0]),
}


@dataclass
class RotationReport:
    states: dict[str, np.ndarray]
    errors: dict[str, float]
    aux_weight: float
    final_overlap: float
    failed_step: str | None
    step3: str
    tol: float = 1e-10

    @property
    def passed(self) -> bool:
        return self.failed_step is None

    def to_json(self) -> dict:
        return {
            "states": {k: [[z.real, z.imag] for z in v] for k, v in self.states.items()},
            "errors": self.errors, "aux_weight": self.aux_weight, "final_overlap": self.final_overlap,
            "failed_step": self.failed_step, "step3": self.step3, "passed": self.passed,
        }


def rotate_111_to_002(kappa: float = 1.0, conv: PhaseConvention = PhaseConvention(),
                      step3: str = "pump-flipped", tol: float = 1e-10) -> tuple[Circuit, RotationReport]:
    circ, ends = rotation_circuit(kappa, conv, step3)
    start = StateVector.basis_state(circ.basis, (1, 1, 1, 0))
    _, history = circ.apply(start, trace=True)
    logical = [st.occupations + (0,) for st in logical_qutrit_basis()]
    states, errors, failed = {}, {}, None
    aux = 0.0
    for name, end in zip(("psi1", "psi2", "psi3"), ends):
        psi = history[end - 1]
        v = np.array([psi.amplitude(o) for o in logical])
        off = [a for st, a in zip(psi.basis, psi.amplitudes) if st.occupations not in logical]
        aux = max(aux, float(np.linalg.norm(off)))
        states[name] = v
        errors[name] = float(np.max(np.abs(v - ROTATION_EXPECTED[name])))
        if failed is None and errors[name] > tol:
            failed = name
    final = abs(states["psi3"][2])
    return circ, RotationReport(states, errors, aux, float(final), failed, step3, tol)


# --- Fock ladder ------------------------------------------------------------------------

@dataclass
class RungReport:
    k: int
    method: str
    inject_overlap: float
    rotation_fidelity: float
    ancilla_consumed: float
    sequence: PulseSequence | None = None

    def to_json(self) -> dict:
        return {"k": self.k, "method": self.method, "inject_overlap": self.inject_overlap,
                "rotation_fidelity": self.rotation_fidelity, "ancilla_consumed": self.ancilla_consumed,
                "sequence": None if self.sequence is None else self.sequence.to_json()}


@dataclass
class LadderReport:
    n_target: int
    achieved_rung: int
    fidelity: float
    ancilla_photons: float
    rungs: list[RungReport] = field(default_factory=list)
    success: bool = True
    state: StateVector | None = field(default=None, repr=False)

    def to_json(self) -> dict:
        return {"n_target": self.n_target, "achieved_rung": self.achieved_rung, "fidelity": self.fidelity,
                "ancilla_photons": self.ancilla_photons, "success": self.success,
                "rungs": [r.to_json() for r in self.rungs],
                "state": None if self.state is None else _vec(self.state)}


def rung_rotation(k: int, tol: float = 1e-10, seed: int = 0,
                  segments: Sequence[int] = (6, 12, 24)) -> tuple[PulseSequence, SynthesisProblem]:
    """Pulse sequence over {G1, G2} on H_{k+1} sending |1,1,k> to |0,0,k+1>."""
    if k < 2:
        raise ValueError("synthesized rungs start at k = 2")
    gens = chi2_generators(k + 1)
    b = gens["G1"].basis
    prob = None
    seq = None
    for ns in segments:
        prob = SynthesisProblem([gens["G1"], gens["G2"]], constraints=[(b.vector((1, 1, k)), b.vector((0, 0, k + 1)))],
                                n_segments=ns, tol=tol, seed=seed)
        seq = synthesize(prob)
        if seq.success:
            break
    return seq, prob


def prepare_fock_ladder(n_target: int, kappa: float = 1.0, tol: float = 1e-8, seed: int = 0) -> LadderReport:
    """Build |0,0,n_target> from |0,0,1> one pump photon at a time.

    Each rung injects a fresh single-photon ancilla pump, turning |0,0,k> into
    |1,1,k>, then rotates |1,1,k> to |0,0,k+1> inside H_{k+1}.
    """
    if n_target < 1:
        raise ValueError("n_target must be >= 1")
    core = ModeSet.from_pairs([(SIGNAL, n_target), (IDLER, n_target), (PUMP, n_target)])
    state = StateVector.basis_state(SubspaceBasis(core, [(0, 0, 1)]), (0, 0, 1))
    report = LadderReport(n_target, 1, 1.0, 0.0, state=state)
    for k in range(1, n_target):
        # p' may climb above 1 through rounding-level amplitudes; keep headroom
        joint = _add_mode(state, ANCILLA_PUMP, n_target, 1)
        before = _mean_number(joint, ANCILLA_PUMP)
        joint = inject_pump(joint, kappa)
        used = before - _mean_number(joint, ANCILLA_PUMP)
        ov = abs(joint.amplitude((1, 1, k, 0)))
        state = _drop_mode(joint, ANCILLA_PUMP, 0)
        seq = None
        if k == 1:
            circ, _ = rotation_circuit(kappa)
            h2 = state.to(SubspaceBasis(core, [st.occupations for st in enumerate_pump_subspace(2)]))
            amps = {st.occupations + (0,): a for st, a in zip(h2.basis, h2.amplitudes)}
            out = circ.apply(StateVector.from_dict(circ.basis, amps))
            out = _drop_mode(out, ROT_AUX, 0)
            basis = SubspaceBasis(core, [st.occupations for st in out.basis])
            state = StateVector(basis, out.amplitudes)
            method = "three-step"
        else:
            seq, prob = rung_rotation(k, tol=tol * 1e-2, seed=seed)
            hk = enumerate_pump_subspace(k + 1)
            v = state.to(SubspaceBasis(core, [st.occupations for st in hk]))
            U = seq.unitary(prob.generators)
            state = StateVector(v.basis, U @ v.amplitudes)
            method = "synthesized"
        fid = abs(state.amplitude((0, 0, k + 1))) ** 2
        report.rungs.append(RungReport(k, method, float(ov), float(fid), float(used), seq))
        report.ancilla_photons += used
        if seq is not None and not seq.success:
            report.success = False
            break
        report.achieved_rung = k + 1
    report.state = state
    report.fidelity = float(abs(state.amplitude((0, 0, n_target))) ** 2) if report.success else 0.0
    report.success = report.success and report.fidelity >= 1 - tol
    return report


# --- synthesized subtraction --------------------------------------------------------------

SUBTRACTION_ORDER = (SIGNAL, IDLER, PUMP, ANCILLA_SIGNAL, ANCILLA_IDLER, ANCILLA_PUMP)


def _joint(core: Sequence[int], si: Sequence[int], pp: int) -> tuple:
    return tuple(core) + tuple(si) + (pp,)


def sip_targets(n: int) -> list[tuple[tuple, tuple]]:
    """|j,j,n+1-j>|0,0>|n-3> -> |j-1,j-1,n+1-j>|0,0>|n-2>, j = 1..n."""
    if n < 3:
        raise ValueError("pump-ancilla subtraction needs n >= 3")
    return [(_joint((j, j, n + 1 - j), (0, 0), n - 3), _joint((j - 1, j - 1, n + 1 - j), (0, 0), n - 2))
            for j in range(1, n + 1)]


def psi_targets(n: int) -> list[tuple[tuple, tuple]]:
    """|j-1,j-1,n+1-j>|0,0>|n-2> -> |j-1,j-1,n-j>|1,1>|n-2>, j = 1..n."""
    if n < 2:
        raise ValueError("signal/idler-ancilla subtraction needs n >= 2")
    return [(_joint((j - 1, j - 1, n + 1 - j), (0, 0), n - 2), _joint((j - 1, j - 1, n - j), (1, 1), n - 2))
            for j in range(1, n + 1)]


def subtraction_targets(n: int) -> dict[str, list[tuple[tuple, tuple]]]:
    """Constraint pairs (joint occupations in SUBTRACTION_ORDER) for both unitaries."""
    return {"sip'": sip_targets(n), "ps'i'": psi_targets(n)}


def subtraction_basis(n: int) -> SubspaceBasis:
    """Smallest joint basis holding every constraint and both boundary states,
    closed under all four ancilla couplings."""
    modes = ModeSet.from_pairs([(SIGNAL, 2 * n), (IDLER, 2 * n), (PUMP, n + 1),
                                (ANCILLA_SIGNAL, n + 1), (ANCILLA_IDLER, n + 1), (ANCILLA_PUMP, 2 * n)])
    seeds = [a for a, _ in sip_targets(n)] + [a for a, _ in psi_targets(n)] + list(boundary_inputs(n).values())
    exprs = list(ancilla_generators("p'")) + list(ancilla_generators("s'i'"))
    return invariant_basis(modes, seeds, exprs)


def boundary_inputs(n: int) -> dict[str, tuple]:
    return {"low": _joint((0, 0, n + 1), (0, 0), n - 3), "high": _joint((n + 1, n + 1, 0), (0, 0), n - 3)}


def generator_sets(kind: str, basis: SubspaceBasis) -> list[list[OperatorMatrix]]:
    """Candidate generator sets, smallest first."""
    g1, g2 = ancilla_generators("p'" if kind == "sip'" else "s'i'")
    extra = (SIGNAL, ANCILLA_PUMP) if kind == "sip'" else (ANCILLA_SIGNAL, PUMP)
    tag = kind
    base = [to_matrix(g1, basis, f"G1[{tag}]"), to_matrix(g2, basis, f"G2[{tag}]")]
    nums = [to_matrix(number(m), basis, f"N[{m}]") for m in extra]
    return [base, base + nums]


@dataclass
class SubtractionResult:
    kind: str
    sequence: PulseSequence
    generators_used: list[str]
    attempts: list[dict]
    problem: SynthesisProblem = field(repr=False)

    def to_json(self) -> dict:
        return {"kind": self.kind, "residual": self.sequence.achieved_residual, "success": self.sequence.success,
                "generators_used": self.generators_used, "attempts": self.attempts,
                "sequence": self.sequence.to_json()}


def synthesize_subtraction(kind: str, n: int = 3, basis: SubspaceBasis | None = None, tol: float = 1e-8,
                           seed: int = 0, segments: Sequence[int] = (8, 16, 32),
                           generator_set: int | None = None) -> SubtractionResult:
    """Find one of the subtraction unitaries from its constraints.

    Generator sets are tried smallest first (or only ``generator_set``);
    every attempt is recorded.
    """
    targets = subtraction_targets(n)
    if kind not in targets:
        raise ValueError(f"kind must be one of {sorted(targets)}")
    basis = basis or subtraction_basis(n)
    cons = [(basis.vector(a), basis.vector(c)) for a, c in targets[kind]]
    sets = generator_sets(kind, basis)
    if generator_set is not None:
        sets = [sets[generator_set]]
    attempts = []
    best = None
    for gens in sets:
        for ns in segments:
            prob = SynthesisProblem(gens, constraints=cons, n_segments=ns, tol=tol, seed=seed, restarts=4)
            seq = synthesize(prob)
            attempts.append({"generators": [g.label for g in gens], "segments": ns,
                             "residual": seq.achieved_residual, "success": seq.success})
            if best is None or seq.achieved_residual < best[0].achieved_residual:
                best = (seq, prob)
            if seq.success:
                return SubtractionResult(kind, seq, [g.label for g in gens], attempts, prob)
    seq, prob = best
    return SubtractionResult(kind, seq, [g.label for g in prob.generators], attempts, prob)


@dataclass
class LeakageAmplitudes:
    """Images of the two boundary states under the composed subtraction.

    ``c[k]`` is the amplitude on |0,0,n+1-k>|k,k>|n-3> and ``d[k]`` on
    |n+1-k,n+1-k,0>|0,0>|n-3+k>; ``*_defect`` is any weight outside those
    forms and ``forbidden`` the largest amplitude in the |1,1>|n-2> ancilla
    sector.
    """

    c: np.ndarray
    d: np.ndarray
    c_defect: float
    d_defect: float
    forbidden: float

    def to_json(self) -> dict:
        return {"c": [[float(z.real), float(z.imag)] for z in self.c],
                "d": [[float(z.real), float(z.imag)] for z in self.d],
                "c_defect": self.c_defect, "d_defect": self.d_defect, "forbidden": self.forbidden}


def boundary_images(n: int, U: np.ndarray, basis: SubspaceBasis) -> LeakageAmplitudes:
    ins = boundary_inputs(n)
    out = {}
    for key, occ in ins.items():
        out[key] = StateVector(basis, U @ basis.vector(occ))
    c_states = [_joint((0, 0, n + 1 - k), (k, k), n - 3) for k in range(n + 2)]
    d_states = [_joint((n + 1 - k, n + 1 - k, 0), (0, 0), n - 3 + k) for k in range(n + 2)]
    c = np.array([out["low"].amplitude(o) for o in c_states])
    d = np.array([out["high"].amplitude(o) for o in d_states])

    def defect(sv, form):
        form = set(form)
        return float(np.linalg.norm([a for st, a in zip(basis, sv.amplitudes) if st.occupations not in form]))

    forbidden = 0.0
    for sv in out.values():
        for st, a in zip(basis, sv.amplitudes):
            o = st.occupations
            if o[3] == 1 and o[4] == 1 and o[5] == n - 2:
                forbidden = max(forbidden, abs(a))
    return LeakageAmplitudes(c, d, defect(out["low"], c_states), defect(out["high"], d_states), float(forbidden))


@dataclass
class SubtractionReport:
    n: int
    sip: SubtractionResult
    psi: SubtractionResult
    composed_residual: float
    images: LeakageAmplitudes

    def to_json(self) -> dict:
        return {"n": self.n, "sip'": self.sip.to_json(), "ps'i'": self.psi.to_json(),
                "composed_residual": self.composed_residual, "images": self.images.to_json()}


def composed_subtraction(n: int = 3, tol: float = 1e-8, seed: int = 0) -> SubtractionReport:
    """Synthesize both unitaries on a shared basis, compose them and examine
    the boundary images."""
    basis = subtraction_basis(n)
    sip = synthesize_subtraction("sip'", n, basis, tol, seed)
    psi = synthesize_subtraction("ps'i'", n, basis, tol, seed)
    U = psi.sequence.unitary(psi.problem.generators) @ sip.sequence.unitary(sip.problem.generators)
    # bulk states follow the concatenated map
    res = 0.0
    for j in range(1, n + 1):
        a = basis.vector(_joint((j, j, n + 1 - j), (0, 0), n - 3))
        c = basis.vector(_joint((j - 1, j - 1, n - j), (1, 1), n - 2))
        res += 1 - abs(np.vdot(c, U @ a)) ** 2
    return SubtractionReport(n, sip, psi, float(max(res, 0.0)), boundary_images(n, U, basis))


# --- entangling check ------------------------------------------------------------------

@dataclass
class ImprimitivityReport:
    theta: float
    entropy: float
    schmidt: np.ndarray
    gamma: dict[str, dict[str, complex]]

    def to_json(self) -> dict:
        return {"theta": self.theta, "entropy": self.entropy, "schmidt": list(map(float, self.schmidt)),
                "gamma": {k: {s: [z.real, z.imag] for s, z in v.items()} for k, v in self.gamma.items()}}


def _label(occ: tuple) -> str:
    return "|" + ",".join(map(str, occ[:3])) + ";" + str(occ[3]) + ">"


def imprimitivity_check(theta: float, alpha: Sequence[complex], beta: Sequence[complex], k: int = 2,
                        kappa: float = 1.0) -> ImprimitivityReport:
    """Evolve sum_j alpha_j |j,j,k-j> (x) sum_q beta_q |q>_p' under
    exp(-i theta G2[p']) and return the entanglement entropy (natural log)
    between the core modes and the ancilla pump.

    ``gamma`` holds the transition amplitudes of every product basis input.
    """
    alpha = np.asarray(alpha, dtype=complex)
    beta = np.asarray(beta, dtype=complex)
    if len(alpha) > k + 1 or len(beta) > 2:
        raise ValueError("alpha has at most k+1 entries and beta at most 2")
    if abs(np.linalg.norm(alpha) - 1) > 1e-10 or abs(np.linalg.norm(beta) - 1) > 1e-10:
        raise ValueError("alpha and beta must be normalized")
    top = k + 2
    modes = ModeSet.from_pairs([(SIGNAL, top), (IDLER, top), (PUMP, k), (ANCILLA_PUMP, top)])
    inputs = [(j, j, k - j, q) for j in range(len(alpha)) for q in range(len(beta))]
    g2 = ancilla_generators("p'", kappa)[1]
    basis = invariant_basis(modes, inputs, [g2])
    H = to_matrix(g2, basis, "G2[p']")
    if H.leakage > LEAKAGE_TOL:
        raise LeakageError(f"ancilla Hamiltonian leaks {H.leakage:.3e}")
    U = evolve(H, theta).unitary.entries
    psi0 = np.zeros(basis.dim, dtype=complex)
    gamma = {}
    for (j, q) in [(j, q) for j in range(len(alpha)) for q in range(len(beta))]:
        occ = (j, j, k - j, q)
        col = U @ basis.vector(occ)
        psi0 += alpha[j] * beta[q] * basis.vector(occ)
        gamma[_label(occ)] = {_label(st.occupations): complex(a) for st, a in zip(basis, col) if abs(a) > 1e-14}
    psi = U @ psi0
    cores = sorted({st.occupations[:3] for st in basis})
    ancs = sorted({st.occupations[3] for st in basis})
    M = np.zeros((len(cores), len(ancs)), dtype=complex)
    for st, a in zip(basis, psi):
        M[cores.index(st.occupations[:3]), ancs.index(st.occupations[3])] = a
    s = np.linalg.svd(M, compute_uv=False)
    p = s ** 2
    p = p[p > 1e-300]
    entropy = float(max(0.0, -np.sum(p * np.log(p))))
    return ImprimitivityReport(theta, entropy, s, gamma)


def to_json_str(obj) -> str:
    return json.dumps(obj.to_json(), sort_keys=True)
