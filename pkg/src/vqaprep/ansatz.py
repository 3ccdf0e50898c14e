"""Variational circuits for Bell (12 parameters, 2 entanglers) and GHZ
(24 parameters, 4 entanglers) state preparation.

Layout: three rotation layers per entangled pair, each layer applying an
X rotation followed by a Y rotation on every qubit of the pair, with a
fixed entangler between consecutive layers. The GHZ circuit is the Bell
block on qubits (0, 1) followed by an identical block on qubits (1, 2)
using the second half of the parameter vector.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .gates import ISwapLikeParams, iswap_like, _SIGMA
from .qcore import StateVector, zero_state

__all__ = [
    "RotationSlot",
    "EntanglerSlot",
    "AnsatzCircuit",
    "build_bell_ansatz",
    "build_ghz_ansatz",
    "run_ansatz",
    "circuit_layout",
]

BELL_N_PARAMS = 12
GHZ_N_PARAMS = 24


@dataclass(frozen=True)
class RotationSlot:
    """A parameterized single-qubit rotation: which qubit, which axis,
    and which entry of the parameter vector supplies the angle."""

    qubit: int
    axis: str
    param_index: int


@dataclass(frozen=True)
class EntanglerSlot:
    """A fixed (non-trainable) iSwap-like gate on an ordered qubit pair."""

    qubits: tuple[int, int]
    params: ISwapLikeParams


Element = Union[RotationSlot, EntanglerSlot]


def _embed_single(mat2: np.ndarray, qubit: int, n: int) -> np.ndarray:
    full = np.eye(1, dtype=complex)
    for q in range(n):
        full = np.kron(full, mat2 if q == qubit else np.eye(2, dtype=complex))
    return full


def _embed_pair(mat4: np.ndarray, qubits: tuple[int, int], n: int) -> np.ndarray:
    a, b = qubits
    if b != a + 1:
        raise ValueError(f"entangler qubits must be adjacent ascending, got {qubits}")
    before = np.eye(2**a, dtype=complex)
    after = np.eye(2 ** (n - a - 2), dtype=complex)
    return np.kron(np.kron(before, mat4), after)


@dataclass(frozen=True, eq=False)
class AnsatzCircuit:
    """Immutable ordered element list with a fixed parameter budget."""

    n_qubits: int
    elements: tuple[Element, ...]
    n_params: int

    def __post_init__(self) -> None:
        seen = set()
        for el in self.elements:
            if isinstance(el, RotationSlot):
                if el.axis not in ("X", "Y"):
                    raise ValueError(f"bad rotation axis {el.axis!r}")
                if not 0 <= el.qubit < self.n_qubits:
                    raise ValueError(f"rotation qubit {el.qubit} out of range")
                if el.param_index in seen:
                    raise ValueError(f"parameter index {el.param_index} used twice")
                seen.add(el.param_index)
        if seen != set(range(self.n_params)):
            raise ValueError(
                f"parameter indices must cover 0..{self.n_params - 1} exactly once"
            )
        object.__setattr__(self, "_compiled", None)

    @property
    def n_entanglers(self) -> int:
        return sum(1 for el in self.elements if isinstance(el, EntanglerSlot))

    def _ops(self) -> list:
        """Per-element full-dimension operators, cached.

        Rotations compile to their embedded Pauli generator so the matrix
        for any angle is cos(a/2)*I - i*sin(a/2)*sigma_full.
        """
        compiled = object.__getattribute__(self, "_compiled")
        if compiled is None:
            compiled = []
            for el in self.elements:
                if isinstance(el, RotationSlot):
                    sigma = _embed_single(_SIGMA[el.axis], el.qubit, self.n_qubits)
                    compiled.append((el.param_index, sigma))
                else:
                    u4 = iswap_like(el.params).elements
                    compiled.append((None, _embed_pair(u4, el.qubits, self.n_qubits)))
            object.__setattr__(self, "_compiled", compiled)
        return compiled


def _rotation_block(
    qubits: Sequence[int], first_index: int
) -> tuple[list[RotationSlot], int]:
    slots = []
    index = first_index
    for q in qubits:
        for axis in ("X", "Y"):
            slots.append(RotationSlot(q, axis, index))
            index += 1
    return slots, index


def _pair_block(
    qubits: tuple[int, int], entangler: ISwapLikeParams, first_index: int
) -> tuple[list[Element], int]:
    """Three rotation layers on the pair with an entangler between each."""
    elements: list[Element] = []
    index = first_index
    for layer in range(3):
        slots, index = _rotation_block(qubits, index)
        elements.extend(slots)
        if layer < 2:
            elements.append(EntanglerSlot(qubits, entangler))
    return elements, index


def build_bell_ansatz(entangler: ISwapLikeParams) -> AnsatzCircuit:
    """Two-qubit circuit: 6 X and 6 Y rotation slots, 2 fixed entanglers."""
    elements, n_params = _pair_block((0, 1), entangler, 0)
    assert n_params == BELL_N_PARAMS
    return AnsatzCircuit(2, tuple(elements), n_params)


def build_ghz_ansatz(
    entangler_01: ISwapLikeParams, entangler_12: ISwapLikeParams
) -> AnsatzCircuit:
    """Three-qubit circuit: Bell block on (0, 1) then the same block shape
    on (1, 2), 24 rotation slots and 4 fixed entanglers in total."""
    first, index = _pair_block((0, 1), entangler_01, 0)
    second, n_params = _pair_block((1, 2), entangler_12, index)
    assert n_params == GHZ_N_PARAMS
    return AnsatzCircuit(3, tuple(first + second), n_params)


def run_ansatz(
    circuit: AnsatzCircuit,
    params: Sequence[float],
    input_state: StateVector | None = None,
) -> StateVector:
    """Apply every circuit element in order to the input state.

    The input defaults to |0...0>. Output is renormalized to absorb
    float drift from the chain of small matrix products.
    """
    theta = np.asarray(params, dtype=float)
    if theta.shape != (circuit.n_params,):
        raise ValueError(
            f"expected {circuit.n_params} parameters, got shape {theta.shape}"
        )
    if input_state is None:
        input_state = zero_state(circuit.n_qubits)
    elif input_state.n_qubits != circuit.n_qubits:
        raise ValueError(
            f"input has {input_state.n_qubits} qubits, circuit has {circuit.n_qubits}"
        )
    psi = _run_raw(circuit, theta, input_state.amplitudes)
    return StateVector(circuit.n_qubits, psi)


def _run_raw(circuit: AnsatzCircuit, theta: np.ndarray, amplitudes: np.ndarray) -> np.ndarray:
    """Hot path shared with the optimizer: raw in, raw (unnormalized) out."""
    psi = amplitudes
    for param_index, op in circuit._ops():
        if param_index is None:
            psi = op @ psi
        else:
            half = 0.5 * theta[param_index]
            psi = math.cos(half) * psi - (1j * math.sin(half)) * (op @ psi)
    return psi


def circuit_layout(circuit: AnsatzCircuit) -> dict:
    """JSON-ready description of the element list and parameter slots."""
    elements = []
    for el in circuit.elements:
        if isinstance(el, RotationSlot):
            elements.append(
                {
                    "type": "rotation",
                    "qubit": el.qubit,
                    "axis": el.axis,
                    "param_index": el.param_index,
                }
            )
        else:
            elements.append(
                {
                    "type": "entangler",
                    "qubits": list(el.qubits),
                    "params": el.params.as_dict(),
                }
            )
    return {
        "n_qubits": circuit.n_qubits,
        "n_params": circuit.n_params,
        "elements": elements,
    }
