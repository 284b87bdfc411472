"""Multi-mode bosonic Fock bases.

A basis is an ordered list of occupation-number states over a fixed set of
truncated modes. The n-pump-photon subspaces H_n = span{|j,j,n-j>} of the
signal/idler/pump triple are the main objects; joint bases with ancilla or
circuit modes are built either as full truncated products or as closures of
a seed set under some dynamics (see ``operators.invariant_basis``).
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np

SIGNAL, IDLER, PUMP = "s", "i", "p"


class ModeMismatchError(ValueError):
    """Raised when states, bases or operators disagree on their mode sets."""


@dataclass(frozen=True)
class ModeSpec:
    id: str
    max_occupation: int

    def __post_init__(self):
        if self.max_occupation < 0:
            raise ValueError(f"mode {self.id!r}: negative truncation")


@dataclass(frozen=True)
class ModeSet:
    modes: tuple[ModeSpec, ...]

    def __post_init__(self):
        ids = [m.id for m in self.modes]
        if len(set(ids)) != len(ids):
            raise ValueError(f"duplicate mode ids in {ids}")

    @classmethod
    def of(cls, **truncations: int) -> "ModeSet":
        return cls(tuple(ModeSpec(k, v) for k, v in truncations.items()))

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[str, int]]) -> "ModeSet":
        return cls(tuple(ModeSpec(k, int(v)) for k, v in pairs))

    @property
    def ids(self) -> tuple[str, ...]:
        return tuple(m.id for m in self.modes)

    @property
    def truncations(self) -> tuple[int, ...]:
        return tuple(m.max_occupation for m in self.modes)

    def position(self, mode_id: str) -> int:
        try:
            return self.ids.index(mode_id)
        except ValueError:
            raise ModeMismatchError(f"unknown mode {mode_id!r}; have {self.ids}") from None

    def __len__(self) -> int:
        return len(self.modes)

    def __iter__(self) -> Iterator[ModeSpec]:
        return iter(self.modes)

    def __contains__(self, mode_id: str) -> bool:
        return mode_id in self.ids

    def disjoint(self, other: "ModeSet") -> bool:
        return not set(self.ids) & set(other.ids)

    def __add__(self, other: "ModeSet") -> "ModeSet":
        return ModeSet(self.modes + other.modes)

    def sub(self, ids: Sequence[str]) -> "ModeSet":
        return ModeSet(tuple(self.modes[self.position(i)] for i in ids))

    def state(self, *occupations: int, **by_id: int) -> "FockState":
        """Build a state either positionally or by mode id (missing ids are 0)."""
        if occupations and by_id:
            raise TypeError("give occupations positionally or by id, not both")
        if by_id:
            for k in by_id:
                self.position(k)
            occupations = tuple(by_id.get(i, 0) for i in self.ids)
        return FockState(tuple(int(n) for n in occupations), self)

    def to_json(self) -> list[dict]:
        return [{"id": m.id, "max_occupation": m.max_occupation} for m in self.modes]

    @classmethod
    def from_json(cls, data: list[dict]) -> "ModeSet":
        return cls.from_pairs((d["id"], d["max_occupation"]) for d in data)


@dataclass(frozen=True, order=True)
class FockState:
    """Occupation numbers, one per mode of ``modes``; ordered lexicographically."""

    occupations: tuple[int, ...]
    modes: ModeSet = field(compare=False, repr=False)

    def __post_init__(self):
        if len(self.occupations) != len(self.modes):
            raise ModeMismatchError(
                f"{len(self.occupations)} occupations for {len(self.modes)} modes")
        for n, m in zip(self.occupations, self.modes):
            if n < 0 or n > m.max_occupation:
                raise ValueError(f"occupation {n} outside [0, {m.max_occupation}] for mode {m.id!r}")

    def __getitem__(self, mode_id: str) -> int:
        return self.occupations[self.modes.position(mode_id)]

    def __str__(self) -> str:
        return "|" + ",".join(map(str, self.occupations)) + ">"

    def as_dict(self) -> dict[str, int]:
        return dict(zip(self.modes.ids, self.occupations))


class SubspaceBasis:
    """Ordered, duplicate-free list of Fock states over one mode set."""

    def __init__(self, modes: ModeSet, states: Iterable[FockState | Sequence[int]]):
        self.modes = modes
        built = []
        for st in states:
            if isinstance(st, FockState):
                if st.modes != modes:
                    raise ModeMismatchError("state built on a different mode set")
            else:
                st = FockState(tuple(int(n) for n in st), modes)
            built.append(st)
        self.states: tuple[FockState, ...] = tuple(built)
        self._index = {st.occupations: k for k, st in enumerate(self.states)}
        if len(self._index) != len(self.states):
            raise ValueError("duplicate states in basis")

    @property
    def dim(self) -> int:
        return len(self.states)

    def __len__(self) -> int:
        return len(self.states)

    def __iter__(self) -> Iterator[FockState]:
        return iter(self.states)

    def __getitem__(self, k: int) -> FockState:
        return self.states[k]

    def __contains__(self, state: FockState) -> bool:
        return self.index_of(state) is not None

    def __eq__(self, other) -> bool:
        return (isinstance(other, SubspaceBasis) and self.modes == other.modes
                and [s.occupations for s in self.states] == [s.occupations for s in other.states])

    def __hash__(self):
        return hash((self.modes, tuple(s.occupations for s in self.states)))

    def __repr__(self) -> str:
        body = ", ".join(str(s) for s in self.states[:6])
        more = ", ..." if self.dim > 6 else ""
        return f"SubspaceBasis({self.modes.ids}: [{body}{more}])"

    def index_of(self, state: FockState) -> int | None:
        if state.modes != self.modes:
            raise ModeMismatchError(f"state modes {state.modes.ids} vs basis modes {self.modes.ids}")
        return self._index.get(state.occupations)

    def index_of_occupations(self, occupations: Sequence[int]) -> int | None:
        return self._index.get(tuple(occupations))

    def vector(self, state: FockState | Sequence[int]) -> np.ndarray:
        occ = state.occupations if isinstance(state, FockState) else tuple(state)
        k = self._index.get(occ)
        if k is None:
            raise KeyError(f"{occ} not in basis")
        v = np.zeros(self.dim, dtype=complex)
        v[k] = 1.0
        return v

    def reordered(self, states: Sequence[FockState | Sequence[int]]) -> "SubspaceBasis":
        """Same span, new order; ``states`` must be a permutation of this basis."""
        new = SubspaceBasis(self.modes, states)
        if sorted(s.occupations for s in new) != sorted(s.occupations for s in self):
            raise ValueError("reordering must be a permutation of the basis")
        return new

    def permutation_to(self, other: "SubspaceBasis") -> np.ndarray:
        """Matrix P with P @ v_self = v_other for vectors expressed in each basis."""
        P = np.zeros((other.dim, self.dim))
        for k, st in enumerate(self.states):
            j = other.index_of_occupations(st.occupations)
            if j is None:
                raise ValueError(f"{st} missing from target basis")
            P[j, k] = 1.0
        return P

    def to_json(self) -> dict:
        return {"modes": self.modes.to_json(), "states": [list(s.occupations) for s in self.states]}

    def dumps(self) -> str:
        return json.dumps(self.to_json())

    @classmethod
    def from_json(cls, data: Mapping) -> "SubspaceBasis":
        return cls(ModeSet.from_json(data["modes"]), data["states"])


def index_of(basis: SubspaceBasis, state: FockState) -> int | None:
    return basis.index_of(state)


def pump_modes(n: int, ids: Sequence[str] = (SIGNAL, IDLER, PUMP)) -> ModeSet:
    s, i, p = ids
    return ModeSet.from_pairs([(s, n), (i, n), (p, n)])


def enumerate_pump_subspace(n: int, ids: Sequence[str] = (SIGNAL, IDLER, PUMP),
                            modes: ModeSet | None = None) -> SubspaceBasis:
    """H_n in canonical order: ascending pump count, [|n,n,0>, ..., |0,0,n>].

    ``modes`` may be a wider mode set (e.g. with higher truncations or extra
    modes, which are then held at zero).
    """
    if n < 0:
        raise ValueError("n must be non-negative")
    if modes is None:
        modes = pump_modes(n, ids)
    s, i, p = (modes.position(x) for x in ids)
    states = []
    for k in range(n + 1):
        occ = [0] * len(modes)
        occ[s] = occ[i] = n - k
        occ[p] = k
        states.append(occ)
    return SubspaceBasis(modes, states)


def logical_qubit_basis(ids: Sequence[str] = (SIGNAL, IDLER, PUMP), truncation: int = 1) -> SubspaceBasis:
    """H_1 in logical order |0~>=|1,1,0>, |1~>=|0,0,1> (same as canonical)."""
    return enumerate_pump_subspace(1, ids, pump_modes(truncation, ids))


def logical_qutrit_basis(ids: Sequence[str] = (SIGNAL, IDLER, PUMP), truncation: int = 2) -> SubspaceBasis:
    """H_2 in logical order |0~>=|1,1,1>, |1~>=|2,2,0>, |2~>=|0,0,2>."""
    return to_qutrit_order(enumerate_pump_subspace(2, ids, pump_modes(truncation, ids)), ids)


def to_qutrit_order(h2: SubspaceBasis, ids: Sequence[str] = (SIGNAL, IDLER, PUMP)) -> SubspaceBasis:
    """Permute a canonical H_2 basis [|2,2,0>, |1,1,1>, |0,0,2>] into logical order."""
    by_pump = {st[ids[2]]: st for st in h2}
    if sorted(by_pump) != [0, 1, 2] or h2.dim != 3:
        raise ValueError("expected a three-state H_2 basis")
    return h2.reordered([by_pump[1], by_pump[0], by_pump[2]])


def product_basis(modes: ModeSet) -> SubspaceBasis:
    """Every occupation pattern within the truncations, lexicographic order."""
    ranges = [range(m.max_occupation + 1) for m in modes]
    return SubspaceBasis(modes, itertools.product(*ranges))


def tensor_basis(a: SubspaceBasis, b: SubspaceBasis) -> SubspaceBasis:
    """Row-major product basis (``a`` outer, ``b`` inner) over the union of modes."""
    if not a.modes.disjoint(b.modes):
        raise ModeMismatchError(f"overlapping modes {set(a.modes.ids) & set(b.modes.ids)}")
    modes = a.modes + b.modes
    return SubspaceBasis(modes, (sa.occupations + sb.occupations for sa in a for sb in b))


def extend_modes(basis: SubspaceBasis, modes: ModeSet) -> SubspaceBasis:
    """Re-express ``basis`` on a wider mode set; new modes are held at zero."""
    pos = [modes.position(i) for i in basis.modes.ids]
    states = []
    for st in basis:
        occ = [0] * len(modes)
        for p, n in zip(pos, st.occupations):
            occ[p] = n
        states.append(occ)
    return SubspaceBasis(modes, states)


@dataclass
class StateVector:
    """Amplitudes over a basis. Plain data; no normalization is enforced."""

    basis: SubspaceBasis
    amplitudes: np.ndarray

    def __post_init__(self):
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex)
        if self.amplitudes.shape != (self.basis.dim,):
            raise ValueError("amplitude vector does not match basis dimension")

    @classmethod
    def basis_state(cls, basis: SubspaceBasis, state: FockState | Sequence[int]) -> "StateVector":
        return cls(basis, basis.vector(state))

    @classmethod
    def from_dict(cls, basis: SubspaceBasis, amps: Mapping[tuple, complex]) -> "StateVector":
        v = np.zeros(basis.dim, dtype=complex)
        for occ, a in amps.items():
            k = basis.index_of_occupations(occ)
            if k is None:
                raise KeyError(f"{occ} not in basis")
            v[k] += a
        return cls(basis, v)

    def amplitude(self, state: FockState | Sequence[int]) -> complex:
        occ = state.occupations if isinstance(state, FockState) else tuple(state)
        k = self.basis.index_of_occupations(occ)
        return 0j if k is None else complex(self.amplitudes[k])

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def overlap(self, other: "StateVector") -> complex:
        """<self|other>, matching states by occupation (bases may differ)."""
        if other.basis.modes != self.basis.modes:
            raise ModeMismatchError("overlap between different mode sets")
        total = 0j
        for k, st in enumerate(other.basis):
            j = self.basis.index_of_occupations(st.occupations)
            if j is not None:
                total += np.conj(self.amplitudes[j]) * other.amplitudes[k]
        return complex(total)

    def to(self, basis: SubspaceBasis, tol: float = 1e-12) -> "StateVector":
        """Re-express on another basis over the same modes; dropped weight must be < tol."""
        if basis.modes != self.basis.modes:
            raise ModeMismatchError("target basis has a different mode set")
        v = np.zeros(basis.dim, dtype=complex)
        lost = 0.0
        for k, st in enumerate(self.basis):
            j = basis.index_of_occupations(st.occupations)
            if j is None:
                lost += abs(self.amplitudes[k]) ** 2
            else:
                v[j] = self.amplitudes[k]
        if np.sqrt(lost) > tol:
            raise ValueError(f"state has weight {np.sqrt(lost):.3e} outside target basis")
        return StateVector(basis, v)

    def as_dict(self, tol: float = 0.0) -> dict[tuple, complex]:
        return {st.occupations: complex(a) for st, a in zip(self.basis, self.amplitudes) if abs(a) > tol}

    def to_json(self, tol: float = 1e-15) -> dict:
        return {
            "modes": self.basis.modes.to_json(),
            "amplitudes": [
                {"state": list(occ), "re": a.real, "im": a.imag}
                for occ, a in self.as_dict(tol).items()
            ],
        }
