"""Gate matrices: parameterized X/Y rotations, the five-parameter
iSwap-like entangler family, and ideal reference gates.

Rotations use the convention R_axis(angle) = exp(-i * angle * sigma_axis / 2).
The iSwap-like family acts on the {|00>, |01>, |10>, |11>} basis with the
first qubit of the pair as the most significant bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .qcore import Unitary

__all__ = [
    "ISwapLikeParams",
    "ROTATION_AXES",
    "rotation",
    "iswap_like",
    "ideal_gate",
    "ideal_iswap_params",
    "FITTED_ENTANGLER",
]

ROTATION_AXES = ("X", "Y")

_SIGMA = {
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
}


def _wrap_phase(angle: float) -> float:
    """Wrap an angle to (-pi, pi]."""
    wrapped = math.fmod(angle, 2.0 * math.pi)
    if wrapped > math.pi:
        wrapped -= 2.0 * math.pi
    elif wrapped <= -math.pi:
        wrapped += 2.0 * math.pi
    return wrapped


@dataclass(frozen=True)
class ISwapLikeParams:
    """Parameters of the iSwap-like two-qubit gate family.

    theta is the |01><->|10> swap angle, phi the conditional phase on |11>,
    and the three deltas are single-qubit-like phase offsets. Canonical
    reporting range: theta in [0, pi], other angles in (-pi, pi]; inputs
    are never wrapped silently.
    """

    theta: float
    phi: float = 0.0
    delta_plus: float = 0.0
    delta_minus: float = 0.0
    delta_minus_off: float = 0.0

    def __post_init__(self) -> None:
        for name in ("theta", "phi", "delta_plus", "delta_minus", "delta_minus_off"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise ValueError(f"{name} must be finite, got {value!r}")

    def canonical(self) -> "ISwapLikeParams":
        """Gauge-equivalent parameters with theta in [0, pi], phases in (-pi, pi]."""
        theta = _wrap_phase(self.theta)
        off = self.delta_minus_off
        if theta < 0.0:
            # (theta, off) -> (-theta, off + pi) leaves the matrix unchanged.
            theta = -theta
            off = off + math.pi
        return ISwapLikeParams(
            theta=theta,
            phi=_wrap_phase(self.phi),
            delta_plus=_wrap_phase(self.delta_plus),
            delta_minus=_wrap_phase(self.delta_minus),
            delta_minus_off=_wrap_phase(off),
        )

    def as_dict(self) -> dict:
        return {
            "theta": self.theta,
            "phi": self.phi,
            "delta_plus": self.delta_plus,
            "delta_minus": self.delta_minus,
            "delta_minus_off": self.delta_minus_off,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ISwapLikeParams":
        return cls(**{k: float(v) for k, v in data.items()})


#: Representative fitted parameters of a hardware-calibrated iSwap-like gate,
#: used as the realistic imperfect-entangler default.
FITTED_ENTANGLER = ISwapLikeParams(
    theta=1.52, phi=1.21, delta_plus=-1.69, delta_minus=0.41, delta_minus_off=0.15
)


def ideal_iswap_params() -> ISwapLikeParams:
    """Parameters reducing the iSwap-like family to the plain iSwap."""
    return ISwapLikeParams(theta=math.pi / 2.0)


def rotation(axis: str, angle: float) -> Unitary:
    """Single-qubit rotation exp(-i * angle * sigma_axis / 2); axis 'X' or 'Y'."""
    key = str(axis).upper()
    if key not in _SIGMA:
        raise ValueError(f"unknown rotation axis {axis!r}; expected one of {ROTATION_AXES}")
    if not math.isfinite(angle):
        raise ValueError(f"rotation angle must be finite, got {angle!r}")
    half = 0.5 * angle
    mat = math.cos(half) * np.eye(2, dtype=complex) - 1j * math.sin(half) * _SIGMA[key]
    return Unitary(mat)


def iswap_like(params: ISwapLikeParams) -> Unitary:
    """The 4x4 iSwap-like matrix for the given parameters."""
    c = math.cos(params.theta)
    s = math.sin(params.theta)
    dp = params.delta_plus
    dm = params.delta_minus
    dmo = params.delta_minus_off
    mat = np.array(
        [
            [1.0, 0.0, 0.0, 0.0],
            [0.0, np.exp(1j * (dp + dm)) * c, -1j * np.exp(1j * (dp - dmo)) * s, 0.0],
            [0.0, -1j * np.exp(1j * (dp + dmo)) * s, np.exp(1j * (dp - dm)) * c, 0.0],
            [0.0, 0.0, 0.0, np.exp(1j * (2.0 * dp + params.phi))],
        ],
        dtype=complex,
    )
    return Unitary(mat)


_HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2.0)

_CNOT = np.array(
    [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex
)

_GATE_ALIASES = {
    "iswap": "iswap",
    "cnot": "cnot",
    "hadamard": "hadamard",
    "h": "hadamard",
    "identity": "identity",
    "i": "identity",
}


def ideal_gate(name: str) -> Unitary:
    """Textbook gate by name: 'iSwap', 'CNOT', 'Hadamard' or 'Identity'.

    The iSwap here is the theta = pi/2 member of the iSwap-like family
    (swap amplitudes -i), so it matches iswap_like(pi/2, 0, 0, 0, 0)
    elementwise.
    """
    key = _GATE_ALIASES.get(str(name).strip().lower())
    if key is None:
        raise ValueError(f"unknown gate name {name!r}")
    if key == "iswap":
        return iswap_like(ideal_iswap_params())
    if key == "cnot":
        return Unitary(_CNOT)
    if key == "hadamard":
        return Unitary(_HADAMARD)
    return Unitary(np.eye(2, dtype=complex))
