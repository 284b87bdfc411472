"""Second-quantized operator expressions and their dense restrictions.

An :class:`OperatorExpr` is a finite sum of ladder-operator monomials; a
monomial is written left to right and applied right to left, as in operator notation.
:func:`to_matrix` restricts an expression to a :class:`SubspaceBasis` and
reports how much amplitude the restriction threw away.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass
from math import sqrt
from typing import Iterable, Mapping, Sequence

import numpy as np

from .fock import (IDLER, PUMP, SIGNAL, ModeMismatchError, ModeSet, SubspaceBasis,
                   enumerate_pump_subspace)

CREATE = "+"
ANNIHILATE = "-"

Ladder = tuple[str, str]
Monomial = tuple[Ladder, ...]


class LeakageError(RuntimeError):
    """Dynamics would carry amplitude outside the basis or the mode truncations."""


@dataclass(frozen=True)
class OperatorExpr:
    terms: tuple[tuple[complex, Monomial], ...] = ()

    @classmethod
    def monomial(cls, *ladders: Ladder, coeff: complex = 1.0) -> "OperatorExpr":
        for _, kind in ladders:
            if kind not in (CREATE, ANNIHILATE):
                raise ValueError(f"bad ladder kind {kind!r}")
        return cls(((complex(coeff), tuple(ladders)),))

    def __add__(self, other: "OperatorExpr") -> "OperatorExpr":
        return OperatorExpr(self.terms + other.terms)

    def __sub__(self, other: "OperatorExpr") -> "OperatorExpr":
        return self + (-1) * other

    def __neg__(self) -> "OperatorExpr":
        return (-1) * self

    def __mul__(self, other) -> "OperatorExpr":
        if isinstance(other, OperatorExpr):
            return OperatorExpr(tuple((c1 * c2, m1 + m2)
                                      for c1, m1 in self.terms for c2, m2 in other.terms))
        c = complex(other)
        return OperatorExpr(tuple((c * t, m) for t, m in self.terms))

    __rmul__ = __mul__

    def dag(self) -> "OperatorExpr":
        flip = {CREATE: ANNIHILATE, ANNIHILATE: CREATE}
        return OperatorExpr(tuple(
            (np.conj(c), tuple((m, flip[k]) for m, k in reversed(mono)))
            for c, mono in self.terms))

    @property
    def mode_ids(self) -> set[str]:
        return {m for _, mono in self.terms for m, _ in mono}

    def __str__(self) -> str:
        def lad(m, k):
            return f"a_{m}" + ("^+" if k == CREATE else "")
        parts = [f"({c:g})" + "".join(lad(m, k) for m, k in mono) for c, mono in self.terms]
        return " + ".join(parts) or "0"


def create(mode: str) -> OperatorExpr:
    return OperatorExpr.monomial((mode, CREATE))


def annihilate(mode: str) -> OperatorExpr:
    return OperatorExpr.monomial((mode, ANNIHILATE))


def number(mode: str) -> OperatorExpr:
    return OperatorExpr.monomial((mode, CREATE), (mode, ANNIHILATE))


def identity() -> OperatorExpr:
    return OperatorExpr.monomial()


def _apply(monomial: Monomial, occ: list[int], pos: Mapping[str, int]) -> tuple[float, tuple[int, ...]] | None:
    # exact ladder algebra, no intermediate truncation
    amp = 1.0
    occ = list(occ)
    for mode, kind in reversed(monomial):
        k = pos[mode]
        n = occ[k]
        if kind == ANNIHILATE:
            if n == 0:
                return None
            amp *= sqrt(n)
            occ[k] = n - 1
        else:
            amp *= sqrt(n + 1)
            occ[k] = n + 1
    return amp, tuple(occ)


def _positions(expr: OperatorExpr, modes: ModeSet) -> dict[str, int]:
    missing = expr.mode_ids - set(modes.ids)
    if missing:
        raise ModeMismatchError(f"expression uses modes {sorted(missing)} absent from {modes.ids}")
    return {m: modes.position(m) for m in expr.mode_ids}


def apply_expr(expr: OperatorExpr, occupations: Sequence[int], modes: ModeSet) -> dict[tuple, complex]:
    """Image of one basis ket as {occupations: amplitude}, untruncated."""
    pos = _positions(expr, modes)
    out: dict[tuple, complex] = {}
    for c, mono in expr.terms:
        r = _apply(mono, list(occupations), pos)
        if r is not None:
            amp, occ = r
            out[occ] = out.get(occ, 0j) + c * amp
    return {k: v for k, v in out.items() if v != 0}


@dataclass
class OperatorMatrix:
    """Dense matrix of an operator on ``basis``; ``leakage`` is the Frobenius
    norm of contributions that fell outside the basis when it was built."""

    basis: SubspaceBasis
    entries: np.ndarray
    leakage: float = 0.0
    label: str = ""

    def __post_init__(self):
        self.entries = np.asarray(self.entries, dtype=complex)
        d = self.basis.dim
        if self.entries.shape != (d, d):
            raise ValueError(f"entries shape {self.entries.shape} does not match basis dim {d}")

    @property
    def dim(self) -> int:
        return self.basis.dim

    def hermiticity_error(self) -> float:
        return float(np.max(np.abs(self.entries - self.entries.conj().T), initial=0.0))

    def is_hermitian(self, tol: float = 1e-12) -> bool:
        return self.hermiticity_error() <= tol

    def dag(self) -> "OperatorMatrix":
        return OperatorMatrix(self.basis, self.entries.conj().T, self.leakage)

    def _check(self, other: "OperatorMatrix"):
        if other.basis != self.basis:
            raise ModeMismatchError("operators live on different bases")

    def __add__(self, other: "OperatorMatrix") -> "OperatorMatrix":
        self._check(other)
        return OperatorMatrix(self.basis, self.entries + other.entries)

    def __sub__(self, other: "OperatorMatrix") -> "OperatorMatrix":
        self._check(other)
        return OperatorMatrix(self.basis, self.entries - other.entries)

    def __mul__(self, c) -> "OperatorMatrix":
        return OperatorMatrix(self.basis, complex(c) * self.entries)

    __rmul__ = __mul__

    def __truediv__(self, c) -> "OperatorMatrix":
        return OperatorMatrix(self.basis, self.entries / complex(c))

    def __neg__(self) -> "OperatorMatrix":
        return OperatorMatrix(self.basis, -self.entries)

    def __matmul__(self, other: "OperatorMatrix") -> "OperatorMatrix":
        self._check(other)
        return OperatorMatrix(self.basis, self.entries @ other.entries)

    def in_basis(self, basis: SubspaceBasis) -> "OperatorMatrix":
        """Same operator in a permuted basis of the same span."""
        P = self.basis.permutation_to(basis)
        return OperatorMatrix(basis, P @ self.entries @ P.T, self.leakage, self.label)

    def to_json(self) -> dict:
        return {
            "basis": self.basis.to_json(),
            "entries": [[[z.real, z.imag] for z in row] for row in self.entries],
            "leakage": self.leakage,
            "label": self.label,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json())

    @classmethod
    def from_json(cls, data: Mapping) -> "OperatorMatrix":
        basis = SubspaceBasis.from_json(data["basis"])
        entries = np.array([[complex(re, im) for re, im in row] for row in data["entries"]])
        return cls(basis, entries, float(data.get("leakage", 0.0)), data.get("label", ""))


def to_matrix(expr: OperatorExpr, basis: SubspaceBasis, label: str = "") -> OperatorMatrix:
    """Matrix elements <row|expr|col>; out-of-basis images are dropped and
    their Frobenius norm reported as ``leakage``."""
    pos = _positions(expr, basis.modes)
    d = basis.dim
    M = np.zeros((d, d), dtype=complex)
    lost = 0.0
    for col, st in enumerate(basis):
        outside: dict[tuple, complex] = {}
        for c, mono in expr.terms:
            r = _apply(mono, list(st.occupations), pos)
            if r is None:
                continue
            amp, occ = r
            row = basis.index_of_occupations(occ)
            if row is None:
                outside[occ] = outside.get(occ, 0j) + c * amp
            else:
                M[row, col] += c * amp
        lost += sum(abs(v) ** 2 for v in outside.values())
    return OperatorMatrix(basis, M, sqrt(lost), label)


def invariant_basis(modes: ModeSet, seeds: Iterable[Sequence[int]], exprs: Sequence[OperatorExpr],
                    max_states: int = 20000) -> SubspaceBasis:
    """Smallest set of Fock states containing ``seeds`` and closed under every
    expression in ``exprs``; sorted lexicographically.

    Raises :class:`LeakageError` if the closure crosses a mode truncation.
    """
    seen: set[tuple] = set()
    queue = deque()
    for s in seeds:
        s = tuple(int(n) for n in s)
        if s not in seen:
            seen.add(s)
            queue.append(s)
    trunc = modes.truncations
    while queue:
        occ = queue.popleft()
        for e in exprs:
            for new in apply_expr(e, occ, modes):
                if new in seen:
                    continue
                if any(n > t for n, t in zip(new, trunc)):
                    raise LeakageError(f"closure reaches {new}, beyond truncations {trunc}")
                seen.add(new)
                queue.append(new)
                if len(seen) > max_states:
                    raise LeakageError("invariant subspace exceeds max_states")
    return SubspaceBasis(modes, sorted(seen))


# --- chi(2) Hamiltonians ----------------------------------------------------

def conversion(s: str = SIGNAL, i: str = IDLER, p: str = PUMP) -> OperatorExpr:
    """a_s^+ a_i^+ a_p: one pump photon converted into a signal-idler pair."""
    return OperatorExpr.monomial((s, CREATE), (i, CREATE), (p, ANNIHILATE))


def g1_expr(s: str = SIGNAL, i: str = IDLER, p: str = PUMP, kappa: float = 1.0,
            prefactor: float = 0.5) -> OperatorExpr:
    """prefactor * i*kappa * (a_s^+ a_i^+ a_p - a_s a_i a_p^+).

    ``prefactor=0.5`` is the standard G1; ``prefactor=1`` gives the
    un-halved form used for the |1,1,1> -> |0,0,2> protocol (= 2 G1).
    """
    T = conversion(s, i, p)
    return (1j * kappa * prefactor) * (T - T.dag())


def g2_expr(s: str = SIGNAL, i: str = IDLER, p: str = PUMP, kappa: float = 1.0,
            prefactor: float = 0.5) -> OperatorExpr:
    """prefactor * kappa * (a_s^+ a_i^+ a_p + a_s a_i a_p^+)."""
    T = conversion(s, i, p)
    return (kappa * prefactor) * (T + T.dag())


def chi2_generators(n: int, kappa: float = 1.0, basis: SubspaceBasis | None = None) -> dict[str, OperatorMatrix]:
    """G1, G2 and the three modal number operators restricted to H_n.

    ``basis`` defaults to canonical H_n; pass e.g. ``logical_qutrit_basis()``
    to get the logical ordering.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if basis is None:
        basis = enumerate_pump_subspace(n)
    exprs = {
        "G1": g1_expr(kappa=kappa),
        "G2": g2_expr(kappa=kappa),
        "Ns": number(SIGNAL),
        "Ni": number(IDLER),
        "Np": number(PUMP),
    }
    out = {k: to_matrix(e, basis, k) for k, e in exprs.items()}
    for k, m in out.items():
        if m.leakage > 1e-12:
            raise LeakageError(f"{k} leaks {m.leakage:.3e} out of the basis")
    return out


ANCILLA_PUMP = "p'"
ANCILLA_SIGNAL = "s'"
ANCILLA_IDLER = "i'"


def ancilla_generators(kind: str, kappa: float = 1.0) -> tuple[OperatorExpr, OperatorExpr]:
    """(G1-type, G2-type) couplings to ancilla modes.

    ``"p'"`` couples (s, i, p'); ``"s'i'"`` couples (s', i', p).
    """
    if kind == "p'":
        modes = (SIGNAL, IDLER, ANCILLA_PUMP)
    elif kind == "s'i'":
        modes = (ANCILLA_SIGNAL, ANCILLA_IDLER, PUMP)
    else:
        raise ValueError(f"unknown ancilla kind {kind!r}")
    return g1_expr(*modes, kappa=kappa), g2_expr(*modes, kappa=kappa)


# --- rung Paulis on H_{n+1} --------------------------------------------------

@dataclass(frozen=True)
class BoundaryPauli:
    """Pauli X/Y on the rung k of H_{n+1}, coupling |n-k,n-k,k+1> and |n+1-k,n+1-k,k>.

    The higher-pump state is the Pauli |0>, so <n+1-k,..,k| Y |n-k,..,k+1> = +i.
    """

    n: int
    k: int
    axis: str

    def __post_init__(self):
        if self.axis not in ("x", "y"):
            raise ValueError("axis must be 'x' or 'y'")
        if not 0 <= self.k <= self.n:
            raise ValueError(f"rung {self.k} outside [0, {self.n}]")

    def pair(self) -> tuple[tuple[int, int, int], tuple[int, int, int]]:
        n, k = self.n, self.k
        return (n - k, n - k, k + 1), (n + 1 - k, n + 1 - k, k)


def boundary_pauli(p: BoundaryPauli, basis: SubspaceBasis | None = None) -> OperatorMatrix:
    if basis is None:
        basis = enumerate_pump_subspace(p.n + 1)
    lo, hi = p.pair()
    a = basis.index_of_occupations(lo)
    b = basis.index_of_occupations(hi)
    if a is None or b is None:
        raise ValueError(f"rung states {lo}, {hi} not in basis")
    M = np.zeros((basis.dim, basis.dim), dtype=complex)
    if p.axis == "x":
        M[a, b] = M[b, a] = 1.0
    else:
        M[b, a] = 1j
        M[a, b] = -1j
    return OperatorMatrix(basis, M, label=f"sigma{p.axis}[{p.k + 1},{p.k}]")


def rung_coefficients(n: int) -> dict[int, float]:
    """Coefficient (n+1-k)*sqrt(k+1) of each rung Pauli in 2*G on H_{n+1}.

    The end rungs are the boundary couplings: n+1 at k=0, sqrt(n+1) at k=n.
    """
    return {k: (n + 1 - k) * sqrt(k + 1) for k in range(n + 1)}


def rung_sum(n: int, axis: str, ks: Iterable[int], basis: SubspaceBasis | None = None) -> OperatorMatrix:
    if basis is None:
        basis = enumerate_pump_subspace(n + 1)
    c = rung_coefficients(n)
    M = np.zeros((basis.dim, basis.dim), dtype=complex)
    for k in ks:
        M += c[k] * boundary_pauli(BoundaryPauli(n, k, axis), basis).entries
    return OperatorMatrix(basis, M)
