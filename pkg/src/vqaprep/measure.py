"""Measurement pipeline: tomography pre-rotations, shot sampling,
readout-noise injection, confusion-matrix calibration, and inverse-matrix
mitigation.

The confusion matrix M is column-stochastic: M[j, k] = P(read j | prepared k),
so noise injection is M @ p and mitigation is a left-solve by M.
"""

from __future__ import annotations

import functools
import math
import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .gates import rotation
from .qcore import StateVector, Unitary, apply_unitary, basis_probabilities

__all__ = [
    "TomographySetting",
    "ReadoutModel",
    "MeasurementRecord",
    "MitigationError",
    "CalibrationWarning",
    "tomography_settings",
    "setting_unitary",
    "measure_with_setting",
    "sample_shots",
    "apply_readout_noise",
    "calibrate_confusion",
    "mitigate",
    "readout_inverse",
    "process_probabilities",
    "acquire_record",
    "DEFAULT_SHOTS",
]

DEFAULT_SHOTS = 2000
HALF_PI = math.pi / 2.0

#: Per-qubit pre-rotation choices: identity, X by pi/2, Y by pi/2.
_PRE_ROTATIONS = (("I", 0.0), ("X", HALF_PI), ("Y", HALF_PI))


class MitigationError(ValueError):
    """Raised when the confusion matrix is too ill-conditioned to invert."""

    def __init__(self, condition_number: float, cap: float):
        self.condition_number = condition_number
        super().__init__(
            f"confusion matrix condition number {condition_number:.3e} exceeds cap {cap:.3e}"
        )


class CalibrationWarning(UserWarning):
    """Emitted when a calibrated confusion matrix looks near-singular."""


@dataclass(frozen=True)
class TomographySetting:
    """Per-qubit pre-measurement rotation, one of I, X_{pi/2}, Y_{pi/2} each."""

    index: int
    rotations: tuple[tuple[str, float], ...]

    def __post_init__(self) -> None:
        for axis, angle in self.rotations:
            if axis == "I":
                if angle != 0.0:
                    raise ValueError("identity entry must carry angle 0")
            elif axis in ("X", "Y"):
                if angle not in (0.0, HALF_PI):
                    raise ValueError(f"angle must be 0 or pi/2, got {angle!r}")
            else:
                raise ValueError(f"bad pre-rotation axis {axis!r}")

    @property
    def n_qubits(self) -> int:
        return len(self.rotations)

    def labels(self) -> tuple[str, ...]:
        return tuple(
            "I" if angle == 0.0 else axis for axis, angle in self.rotations
        )


def tomography_settings(n_qubits: int) -> list[TomographySetting]:
    """All per-qubit combinations of {I, X_{pi/2}, Y_{pi/2}}: 9 settings for
    two qubits, 27 for three. Setting 0 is all-identity."""
    if n_qubits not in (2, 3):
        raise ValueError(f"unsupported qubit count {n_qubits}; expected 2 or 3")
    settings = []
    choices = [_PRE_ROTATIONS] * n_qubits
    index = 0
    for combo in _cartesian(choices):
        settings.append(TomographySetting(index, tuple(combo)))
        index += 1
    return settings


def _cartesian(choice_lists):
    if not choice_lists:
        yield ()
        return
    for head in choice_lists[0]:
        for rest in _cartesian(choice_lists[1:]):
            yield (head,) + rest


@functools.lru_cache(maxsize=None)
def _setting_matrix(rotations: tuple[tuple[str, float], ...]) -> np.ndarray:
    """Full-dimension pre-rotation unitary for a setting (cached)."""
    full = np.eye(1, dtype=complex)
    for axis, angle in rotations:
        if angle == 0.0:
            block = np.eye(2, dtype=complex)
        else:
            block = rotation(axis, angle).elements
        full = np.kron(full, block)
    return full


def setting_unitary(setting: TomographySetting) -> np.ndarray:
    return _setting_matrix(setting.rotations)


def measure_with_setting(state: StateVector, setting: TomographySetting) -> np.ndarray:
    """Apply the setting's pre-rotations, then basis probabilities."""
    if setting.n_qubits != state.n_qubits:
        raise ValueError(
            f"setting is for {setting.n_qubits} qubits, state has {state.n_qubits}"
        )
    out = state
    for qubit, (axis, angle) in enumerate(setting.rotations):
        if angle != 0.0:
            out = apply_unitary(out, rotation(axis, angle), (qubit,))
    return basis_probabilities(out)


def _check_probs(probs, atol: float = 1e-9) -> np.ndarray:
    p = np.asarray(probs, dtype=float)
    if p.ndim != 1:
        raise ValueError(f"expected a probability vector, got shape {p.shape}")
    if p.min() < -atol:
        raise ValueError(f"negative probability {p.min()!r}")
    total = float(p.sum())
    if abs(total - 1.0) > atol:
        raise ValueError(f"probabilities sum to {total!r}, expected 1")
    return np.clip(p, 0.0, None) / total


def sample_shots(probs: Sequence[float], shots: int, seed) -> np.ndarray:
    """Multinomial counts for ``shots`` repetitions; deterministic per seed."""
    if shots < 1:
        raise ValueError(f"shots must be >= 1, got {shots}")
    p = _check_probs(probs)
    rng = np.random.default_rng(seed)
    return rng.multinomial(shots, p)


@dataclass(frozen=True, eq=False)
class ReadoutModel:
    """Column-stochastic confusion matrix M[j, k] = P(read j | prepared k)."""

    n_qubits: int
    confusion: np.ndarray

    def __post_init__(self) -> None:
        mat = np.array(self.confusion, dtype=float)
        d = 2**self.n_qubits
        if mat.shape != (d, d):
            raise ValueError(f"expected a {d}x{d} matrix, got shape {mat.shape}")
        if mat.min() < -1e-12 or mat.max() > 1.0 + 1e-12:
            raise ValueError("confusion entries must lie in [0, 1]")
        col_sums = mat.sum(axis=0)
        if np.max(np.abs(col_sums - 1.0)) > 1e-12:
            raise ValueError(f"columns must sum to 1, got {col_sums!r}")
        mat.setflags(write=False)
        object.__setattr__(self, "confusion", mat)

    @property
    def dim(self) -> int:
        return self.confusion.shape[0]

    @property
    def condition_number(self) -> float:
        return float(np.linalg.cond(self.confusion))

    @classmethod
    def identity(cls, n_qubits: int) -> "ReadoutModel":
        return cls(n_qubits, np.eye(2**n_qubits))

    @classmethod
    def from_single_qubit(cls, matrices: Sequence[np.ndarray]) -> "ReadoutModel":
        """Tensor product of per-qubit 2x2 confusion matrices."""
        full = np.eye(1)
        for m in matrices:
            m = np.asarray(m, dtype=float)
            if m.shape != (2, 2):
                raise ValueError(f"per-qubit matrix must be 2x2, got {m.shape}")
            full = np.kron(full, m)
        return cls(len(matrices), full)

    @classmethod
    def uniform(cls, n_qubits: int, fidelity: float) -> "ReadoutModel":
        """Symmetric per-qubit readout with P(correct) = fidelity on every qubit."""
        if not 0.0 <= fidelity <= 1.0:
            raise ValueError(f"fidelity must lie in [0, 1], got {fidelity}")
        m = np.array([[fidelity, 1.0 - fidelity], [1.0 - fidelity, fidelity]])
        return cls.from_single_qubit([m] * n_qubits)

    def to_json_dict(self) -> dict:
        return {
            "dimension": self.dim,
            "matrix": [float(x) for x in self.confusion.reshape(-1)],
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "ReadoutModel":
        d = int(data["dimension"])
        mat = np.array(data["matrix"], dtype=float).reshape(d, d)
        return cls(d.bit_length() - 1, mat)


def apply_readout_noise(probs: Sequence[float], model: ReadoutModel) -> np.ndarray:
    """Push exact probabilities through the confusion matrix: M @ p."""
    p = _check_probs(probs)
    if p.size != model.dim:
        raise ValueError(f"dimension mismatch: {p.size} vs {model.dim}")
    return model.confusion @ p


def calibrate_confusion(
    source: ReadoutModel,
    n_qubits: int,
    *,
    shots: int | None = None,
    seed=0,
    cond_cap: float = 1e8,
) -> ReadoutModel:
    """Estimate the confusion matrix by preparing each basis state.

    With ``shots=None`` the exact per-column response is read off, which
    recovers the source matrix exactly; otherwise each column is estimated
    from multinomial counts. A near-singular estimate triggers a
    CalibrationWarning.
    """
    d = 2**n_qubits
    if source.dim != d:
        raise ValueError(f"source model is {source.dim}-dimensional, expected {d}")
    columns = []
    for k in range(d):
        prepared = np.zeros(d)
        prepared[k] = 1.0
        response = apply_readout_noise(prepared, source)
        if shots is None:
            columns.append(response)
        else:
            counts = sample_shots(response, shots, np.random.SeedSequence([int(seed), k]))
            columns.append(counts / shots)
    estimate = ReadoutModel(n_qubits, np.column_stack(columns))
    if estimate.condition_number > cond_cap:
        warnings.warn(
            f"calibrated confusion matrix is near-singular "
            f"(condition number {estimate.condition_number:.3e})",
            CalibrationWarning,
        )
    return estimate


def readout_inverse(
    raw: Sequence[float], model: ReadoutModel, *, cond_cap: float = 1e8
) -> np.ndarray:
    """Unprojected quasi-probabilities M^{-1} @ raw (may have negative entries)."""
    p = np.asarray(raw, dtype=float)
    if p.size != model.dim:
        raise ValueError(f"dimension mismatch: {p.size} vs {model.dim}")
    cond = model.condition_number
    if not math.isfinite(cond) or cond > cond_cap:
        raise MitigationError(cond, cond_cap)
    return np.linalg.solve(model.confusion, p)


def _project_simplex(quasi: np.ndarray) -> np.ndarray:
    clipped = np.clip(quasi, 0.0, None)
    total = clipped.sum()
    if total <= 0.0:
        # Degenerate inversion; fall back to the uniform distribution.
        return np.full_like(clipped, 1.0 / clipped.size)
    return clipped / total


def mitigate(
    raw: Sequence[float], model: ReadoutModel, *, cond_cap: float = 1e8
) -> np.ndarray:
    """Inverse-matrix mitigation: M^{-1} @ raw, clipped to the simplex."""
    return _project_simplex(readout_inverse(raw, model, cond_cap=cond_cap))


@dataclass(frozen=True, eq=False)
class MeasurementRecord:
    """One tomography setting's data: counts plus raw and mitigated probabilities.

    ``quasi_probs`` keeps the unprojected inverse for diagnostics; it equals
    ``mitigated_probs`` whenever the projection was a no-op.
    """

    setting_index: int
    shots: int | None
    counts: np.ndarray | None
    raw_probs: np.ndarray
    mitigated_probs: np.ndarray
    quasi_probs: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self) -> None:
        if self.quasi_probs is None:
            object.__setattr__(self, "quasi_probs", self.mitigated_probs)
        if self.counts is not None:
            if self.shots is None or int(self.counts.sum()) != self.shots:
                raise ValueError("counts must sum to shots")
        for name in ("raw_probs", "mitigated_probs"):
            vec = getattr(self, name)
            if abs(float(np.sum(vec)) - 1.0) > 1e-9:
                raise ValueError(f"{name} must sum to 1")

    @property
    def probs(self) -> np.ndarray:
        """The probabilities downstream consumers should use."""
        return self.mitigated_probs


def process_probabilities(
    probs: Sequence[float],
    *,
    readout: ReadoutModel | None = None,
    shots: int | None = None,
    mitigation: bool = False,
    seed=None,
    cond_cap: float = 1e8,
) -> np.ndarray:
    """Exact probabilities -> readout noise -> shot sampling -> mitigation.

    Readout noise is applied to the exact vector before sampling (it
    commutes with multinomial sampling in expectation). Mitigation is a
    no-op when no readout model is supplied.
    """
    p = _check_probs(probs)
    if readout is not None:
        p = apply_readout_noise(p, readout)
    if shots is not None:
        counts = sample_shots(p, shots, seed)
        p = counts / shots
    if mitigation and readout is not None:
        p = mitigate(p, readout, cond_cap=cond_cap)
    return p


def acquire_record(
    state: StateVector,
    setting: TomographySetting,
    *,
    readout: ReadoutModel | None = None,
    shots: int | None = None,
    mitigation: bool = False,
    seed=None,
    cond_cap: float = 1e8,
) -> MeasurementRecord:
    """Full per-setting pipeline producing a MeasurementRecord."""
    exact = measure_with_setting(state, setting)
    noisy = apply_readout_noise(exact, readout) if readout is not None else exact
    counts = None
    raw = noisy
    if shots is not None:
        counts = sample_shots(noisy, shots, seed)
        raw = counts / shots
    if mitigation and readout is not None:
        quasi = readout_inverse(raw, readout, cond_cap=cond_cap)
        mitigated = _project_simplex(quasi)
    else:
        quasi = raw
        mitigated = raw
    return MeasurementRecord(
        setting_index=setting.index,
        shots=shots,
        counts=counts,
        raw_probs=raw,
        mitigated_probs=mitigated,
        quasi_probs=quasi,
    )
