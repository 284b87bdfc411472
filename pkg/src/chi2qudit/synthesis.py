"""Numerical compilation of targets into sequences of generator exponentials.

A pulse sequence is a list of (generator index, duration) pairs; its unitary
is the time-ordered product exp(-i t_K G_K) ... exp(-i t_1 G_1). Durations
are found by coordinate-wise golden-section sweeps from deterministic
restarts, then polished with a least-squares solve using central finite
differences.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from math import pi
from typing import Mapping, Sequence

import numpy as np
from scipy.optimize import least_squares, minimize_scalar

from .fock import ModeSet, SubspaceBasis, product_basis
from .gates import distance_up_to_phase, unitarity_error
from .operators import OperatorMatrix


@dataclass
class SynthesisProblem:
    """Either ``target`` (full unitary, up to global phase) or ``constraints``
    (pairs of normalized input/output vectors, each matched up to its own
    phase) must be given."""

    generators: list[OperatorMatrix]
    target: OperatorMatrix | None = None
    constraints: list[tuple[np.ndarray, np.ndarray]] | None = None
    n_segments: int | None = None
    tol: float = 1e-8
    order: list[int] | None = None
    restarts: int = 8
    seed: int = 0
    sweeps: int = 3
    labels: list[str] | None = None

    def __post_init__(self):
        if not self.generators:
            raise ValueError("need at least one generator")
        b = self.generators[0].basis
        for g in self.generators:
            if g.basis != b:
                raise ValueError("generators must share a basis")
            if not g.is_hermitian(1e-10):
                raise ValueError("generators must be Hermitian")
        if (self.target is None) == (self.constraints is None):
            raise ValueError("give exactly one of target or constraints")
        if self.constraints is not None:
            cons = []
            for a, c in self.constraints:
                a, c = np.asarray(a, dtype=complex), np.asarray(c, dtype=complex)
                if abs(np.linalg.norm(a) - 1) > 1e-10 or abs(np.linalg.norm(c) - 1) > 1e-10:
                    raise ValueError("constraint states must be normalized")
                cons.append((a, c))
            self.constraints = cons
        if self.n_segments is None:
            self.n_segments = 8 * self.basis.dim
        if self.n_segments < 1:
            raise ValueError("n_segments must be >= 1")
        if self.order is None:
            k = len(self.generators)
            self.order = [s % k for s in range(self.n_segments)]
        if len(self.order) != self.n_segments:
            raise ValueError("order must list one generator per segment")
        if self.labels is None:
            self.labels = [g.label or f"g{k}" for k, g in enumerate(self.generators)]

    @property
    def basis(self) -> SubspaceBasis:
        return self.generators[0].basis

    def to_json(self) -> dict:
        def vec(v):
            return [[z.real, z.imag] for z in v]
        return {
            "generators": [g.to_json() for g in self.generators],
            "target": None if self.target is None else self.target.to_json(),
            "constraints": None if self.constraints is None else
            [{"in": vec(a), "out": vec(c)} for a, c in self.constraints],
            "n_segments": self.n_segments, "tol": self.tol, "order": self.order,
            "restarts": self.restarts, "seed": self.seed, "sweeps": self.sweeps, "labels": self.labels,
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "SynthesisProblem":
        def vec(v):
            return np.array([complex(re, im) for re, im in v])
        gens = [OperatorMatrix.from_json(g) for g in data["generators"]]
        target = OperatorMatrix.from_json(data["target"]) if data.get("target") else None
        cons = None
        if data.get("constraints") is not None:
            cons = [(vec(c["in"]), vec(c["out"])) for c in data["constraints"]]
        return cls(gens, target, cons, data.get("n_segments"), float(data.get("tol", 1e-8)),
                   data.get("order"), int(data.get("restarts", 8)), int(data.get("seed", 0)),
                   int(data.get("sweeps", 3)), data.get("labels"))


@dataclass
class PulseSequence:
    steps: list[tuple[int, float]]
    achieved_residual: float
    success: bool = True
    labels: list[str] = field(default_factory=list)
    restart: int = 0

    @property
    def durations(self) -> np.ndarray:
        return np.array([t for _, t in self.steps])

    def unitary(self, generators: Sequence[OperatorMatrix]) -> np.ndarray:
        """Replay through gates.evolve on any basis carrying the same generators."""
        from .gates import evolve
        d = generators[0].dim
        U = np.eye(d, dtype=complex)
        for g, t in self.steps:
            U = evolve(generators[g], t).unitary.entries @ U
        return U

    def to_json(self) -> dict:
        return {"steps": [[int(g), float(t)] for g, t in self.steps],
                "achieved_residual": self.achieved_residual, "success": self.success,
                "labels": self.labels, "restart": self.restart}

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)

    @classmethod
    def from_json(cls, data: Mapping) -> "PulseSequence":
        return cls([(int(g), float(t)) for g, t in data["steps"]], float(data["achieved_residual"]),
                   bool(data.get("success", True)), list(data.get("labels", [])), int(data.get("restart", 0)))


class _Evaluator:
    """Fast products of exponentials from cached eigendecompositions."""

    def __init__(self, problem: SynthesisProblem):
        self.p = problem
        self.eig = [np.linalg.eigh(g.entries) for g in problem.generators]
        if problem.target is not None:
            self.V = problem.target.entries
            if unitarity_error(self.V) > 1e-8:
                raise ValueError("target must be unitary")
        else:
            self.ins = np.array([a for a, _ in problem.constraints]).T
            self.outs = np.array([c for _, c in problem.constraints]).T

    def unitary(self, x: np.ndarray) -> np.ndarray:
        d = self.p.basis.dim
        U = np.eye(d, dtype=complex)
        for g, t in zip(self.p.order, x):
            w, V = self.eig[g]
            U = ((V * np.exp(-1j * t * w)) @ V.conj().T) @ U
        return U

    def objective_of(self, U: np.ndarray) -> float:
        if self.p.target is not None:
            d = U.shape[0]
            return float(max(0.0, 1 - abs(np.trace(self.V.conj().T @ U)) / d))
        ov = np.sum(self.outs.conj() * (U @ self.ins), axis=0)
        return float(max(0.0, np.sum(1 - np.abs(ov) ** 2)))

    def objective(self, x: np.ndarray) -> float:
        return self.objective_of(self.unitary(x))

    def residuals(self, x: np.ndarray) -> np.ndarray:
        # squared norm equals the objective exactly for unitary U
        U = self.unitary(x)
        if self.p.target is not None:
            d = U.shape[0]
            tr = np.trace(self.V.conj().T @ U)
            ph = tr / abs(tr) if abs(tr) > 0 else 1.0
            r = (U - ph * self.V).ravel() / np.sqrt(2 * d)
        else:
            img = U @ self.ins
            ov = np.sum(self.outs.conj() * img, axis=0)
            r = (img - self.outs * ov).ravel()
        return np.concatenate([r.real, r.imag])


def _coordinate_sweeps(ev: _Evaluator, x: np.ndarray, sweeps: int, period: float) -> np.ndarray:
    grid = np.linspace(0.0, period, 17)[:-1]
    step = grid[1]
    for _ in range(sweeps):
        for k in range(len(x)):
            def f(t, k=k):
                y = x.copy()
                y[k] = t
                return ev.objective(y)
            vals = [f(t) for t in grid]
            t0 = grid[int(np.argmin(vals))]
            best = t0
            if min(vals) > 0:
                try:
                    res = minimize_scalar(f, bracket=(t0 - step, t0, t0 + step), method="golden",
                                          tol=1e-10)
                    if res.fun <= min(vals):
                        best = res.x
                except ValueError:  # flat neighbourhood, no strict bracket
                    pass
            x[k] = best
    return x


def synthesize(problem: SynthesisProblem, period: float = 2 * pi) -> PulseSequence:
    """Minimize the problem's objective over segment durations.

    Restart 0 starts from all-zero durations; later restarts draw uniform
    durations in [0, period) from ``seed + restart``. The best result (ties by
    restart order) is returned; ``success`` is residual <= tol.
    """
    ev = _Evaluator(problem)
    n = problem.n_segments
    best_x, best_f, best_r = None, np.inf, 0
    for r in range(problem.restarts):
        if r == 0:
            x = np.zeros(n)
        else:
            x = np.random.default_rng(problem.seed + r).uniform(0, period, n)
        if ev.objective(x) > problem.tol * 1e-3:
            x = _coordinate_sweeps(ev, x, problem.sweeps, period)
            if ev.objective(x) > 0:
                sol = least_squares(ev.residuals, x, jac="3-point", method="trf",
                                    diff_step=1e-6, xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=200 * n)
                if ev.objective(sol.x) < ev.objective(x):
                    x = sol.x
        f = ev.objective(x)
        if f < best_f:
            best_x, best_f, best_r = x, f, r
        if best_f <= problem.tol * 1e-2:
            break
    steps = [(int(g), float(t)) for g, t in zip(problem.order, best_x)]
    return PulseSequence(steps, float(best_f), bool(best_f <= problem.tol), list(problem.labels), best_r)


def evaluate(problem: SynthesisProblem, seq: PulseSequence) -> float:
    """Objective of ``seq`` recomputed through gates.evolve."""
    U = seq.unitary(problem.generators)
    if problem.target is not None:
        return distance_up_to_phase(U, problem.target.entries)
    return float(sum(1 - abs(np.vdot(c, U @ a)) ** 2 for a, c in problem.constraints))


def qudit_basis(d: int) -> SubspaceBasis:
    return product_basis(ModeSet.from_pairs([("q", d - 1)]))


def random_target_su(d: int, seed: int = 0, basis: SubspaceBasis | None = None) -> OperatorMatrix:
    """Haar-distributed special unitary (QR of a complex Ginibre matrix with
    phase correction, then det normalized), deterministic per seed."""
    if d < 2:
        raise ValueError("d must be >= 2")
    rng = np.random.default_rng(seed)
    Z = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / np.sqrt(2)
    Q, R = np.linalg.qr(Z)
    Q = Q * (np.diag(R) / np.abs(np.diag(R)))
    Q = Q / np.linalg.det(Q) ** (1.0 / d)
    return OperatorMatrix(basis or qudit_basis(d), Q, label=f"haar_su{d}[{seed}]")
