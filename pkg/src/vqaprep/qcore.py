"""Dense complex linear algebra for 2- and 3-qubit pure and mixed states.

Index convention: qubit 0 is the most significant bit of a basis-state
index, so ket labels read left to right as binary indices (for two qubits
|10> sits at index 2). Global phase is never constrained; states are
compared through fidelity, not amplitude equality.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

__all__ = [
    "StateVector",
    "DensityMatrix",
    "Unitary",
    "apply_unitary",
    "basis_probabilities",
    "state_fidelity",
    "pure_state_fidelity",
    "zero_state",
    "basis_state",
    "bell_state",
    "ghz_state",
    "BELL_LABELS",
]

NORM_TOL = 1e-12
HERMITICITY_TOL = 1e-10
TRACE_TOL = 1e-10
EIGENVALUE_FLOOR = -1e-9
UNITARITY_TOL = 1e-10


def _frozen_array(values, dtype=complex) -> np.ndarray:
    arr = np.array(values, dtype=dtype)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class StateVector:
    """Normalized pure state on ``n_qubits`` qubits (2**n amplitudes)."""

    n_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self) -> None:
        amps = np.array(self.amplitudes, dtype=complex)
        if amps.ndim != 1 or amps.size != 2**self.n_qubits:
            raise ValueError(
                f"expected 2**{self.n_qubits} amplitudes, got shape {amps.shape}"
            )
        norm_sq = float(np.sum(np.abs(amps) ** 2))
        if abs(norm_sq - 1.0) > 1e-9:
            raise ValueError(f"state is not normalized: sum |a|^2 = {norm_sq!r}")
        # Remove residual float drift so |amplitudes|^2 sums to 1 within 1e-12.
        amps = amps / math.sqrt(norm_sq)
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    def to_density_matrix(self) -> "DensityMatrix":
        return DensityMatrix(self.n_qubits, np.outer(self.amplitudes, self.amplitudes.conj()))


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Hermitian, unit-trace, positive-semidefinite 2**n x 2**n matrix."""

    n_qubits: int
    elements: np.ndarray

    def __post_init__(self) -> None:
        mat = np.array(self.elements, dtype=complex)
        d = 2**self.n_qubits
        if mat.shape != (d, d):
            raise ValueError(f"expected a {d}x{d} matrix, got shape {mat.shape}")
        if np.max(np.abs(mat - mat.conj().T)) > HERMITICITY_TOL:
            raise ValueError("density matrix is not Hermitian")
        tr = complex(np.trace(mat))
        if abs(tr - 1.0) > TRACE_TOL:
            raise ValueError(f"density matrix trace is {tr!r}, expected 1")
        eigvals = np.linalg.eigvalsh((mat + mat.conj().T) / 2.0)
        if float(eigvals.min()) < EIGENVALUE_FLOOR:
            raise ValueError(f"density matrix has negative eigenvalue {eigvals.min()!r}")
        mat.setflags(write=False)
        object.__setattr__(self, "elements", mat)

    @property
    def dim(self) -> int:
        return self.elements.shape[0]

    @classmethod
    def maximally_mixed(cls, n_qubits: int) -> "DensityMatrix":
        d = 2**n_qubits
        return cls(n_qubits, np.eye(d, dtype=complex) / d)

    def to_json_dict(self) -> dict:
        return {
            "n_qubits": self.n_qubits,
            "real": self.elements.real.tolist(),
            "imag": self.elements.imag.tolist(),
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "DensityMatrix":
        mat = np.array(data["real"], dtype=float) + 1j * np.array(data["imag"], dtype=float)
        return cls(int(data["n_qubits"]), mat)


@dataclass(frozen=True, eq=False)
class Unitary:
    """Unitary matrix on 1, 2 or 3 qubits (dimension 2, 4 or 8)."""

    elements: np.ndarray

    def __post_init__(self) -> None:
        mat = np.array(self.elements, dtype=complex)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise ValueError(f"expected a square matrix, got shape {mat.shape}")
        if mat.shape[0] not in (2, 4, 8):
            raise ValueError(f"unsupported dimension {mat.shape[0]}; expected 2, 4 or 8")
        d = mat.shape[0]
        if np.max(np.abs(mat.conj().T @ mat - np.eye(d))) > UNITARITY_TOL:
            raise ValueError("matrix is not unitary")
        mat.setflags(write=False)
        object.__setattr__(self, "elements", mat)

    @property
    def dimension(self) -> int:
        return self.elements.shape[0]

    @property
    def n_qubits(self) -> int:
        return self.dimension.bit_length() - 1


def zero_state(n_qubits: int) -> StateVector:
    """|0...0> on ``n_qubits`` qubits."""
    return basis_state(n_qubits, 0)


def basis_state(n_qubits: int, index: int) -> StateVector:
    d = 2**n_qubits
    if not 0 <= index < d:
        raise ValueError(f"basis index {index} out of range for {n_qubits} qubits")
    amps = np.zeros(d, dtype=complex)
    amps[index] = 1.0
    return StateVector(n_qubits, amps)


BELL_LABELS = ("beta00", "beta01", "beta10", "beta11")

_BELL_AMPLITUDES = {
    "beta00": (0, 3, 1.0),  # (|00> + |11>)/sqrt(2)
    "beta01": (1, 2, 1.0),  # (|01> + |10>)/sqrt(2)
    "beta10": (0, 3, -1.0),  # (|00> - |11>)/sqrt(2)
    "beta11": (1, 2, -1.0),  # (|01> - |10>)/sqrt(2)
}


def bell_state(label: str) -> StateVector:
    """One of the four Bell states, by label 'beta00'..'beta11'."""
    key = label.strip().lower().replace("β", "beta")
    if key in ("00", "01", "10", "11"):
        key = "beta" + key
    if key not in _BELL_AMPLITUDES:
        raise ValueError(f"unknown Bell state label {label!r}")
    i, j, sign = _BELL_AMPLITUDES[key]
    amps = np.zeros(4, dtype=complex)
    amps[i] = 1.0 / math.sqrt(2.0)
    amps[j] = sign / math.sqrt(2.0)
    return StateVector(2, amps)


def ghz_state(n_qubits: int = 3) -> StateVector:
    """(|0...0> + |1...1>)/sqrt(2)."""
    d = 2**n_qubits
    amps = np.zeros(d, dtype=complex)
    amps[0] = amps[d - 1] = 1.0 / math.sqrt(2.0)
    return StateVector(n_qubits, amps)


def apply_unitary(state: StateVector, gate: Unitary, targets: Sequence[int]) -> StateVector:
    """Apply ``gate`` to the given qubits of ``state``.

    ``targets`` are ordered: the first target is the most significant bit
    of the gate's own basis indexing. Non-target qubits are untouched.
    """
    targets = tuple(int(t) for t in targets)
    n = state.n_qubits
    k = len(targets)
    if len(set(targets)) != k:
        raise ValueError(f"repeated target index in {targets}")
    if any(t < 0 or t >= n for t in targets):
        raise ValueError(f"target out of range for {n} qubits: {targets}")
    if gate.dimension != 2**k:
        raise ValueError(
            f"gate dimension {gate.dimension} does not match {k} target qubit(s)"
        )

    psi = state.amplitudes.reshape((2,) * n)
    op = gate.elements.reshape((2,) * (2 * k))
    out = np.tensordot(op, psi, axes=(tuple(range(k, 2 * k)), targets))
    out = np.moveaxis(out, tuple(range(k)), targets)
    out = out.reshape(-1)
    out = out / np.linalg.norm(out)
    return StateVector(n, out)


def basis_probabilities(state: StateVector) -> np.ndarray:
    """Probabilities of each computational basis outcome, MSB-first order."""
    return np.abs(state.amplitudes) ** 2


def state_fidelity(rho_exp: DensityMatrix, rho_targ: DensityMatrix) -> float:
    """sqrt(Tr(rho_exp . rho_targ)); equals sqrt(<psi|rho_exp|psi>) for pure targets."""
    if rho_exp.dim != rho_targ.dim:
        raise ValueError(
            f"dimension mismatch: {rho_exp.dim} vs {rho_targ.dim}"
        )
    overlap = float(np.real(np.trace(rho_exp.elements @ rho_targ.elements)))
    return math.sqrt(min(max(overlap, 0.0), 1.0))


def pure_state_fidelity(a: StateVector, b: StateVector) -> float:
    """|<a|b>|; identical to state_fidelity on the two pure density matrices."""
    if a.dim != b.dim:
        raise ValueError(f"dimension mismatch: {a.dim} vs {b.dim}")
    return float(abs(np.vdot(a.amplitudes, b.amplitudes)))
