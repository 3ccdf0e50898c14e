"""Variational training loop: tomography-based quadratic loss,
parameter-shift gradients, Nesterov accelerated descent, multi-restart
and staged (freeze/unfreeze) schedules.

The loss for an n-qubit circuit over N tomography settings is

    L = 1 / (2**n * N) * sum_i sum_j (p_targ[i, j] - p_exp[i, j])**2

which reduces to the 1/(4N) two-qubit form. In sampled mode p_exp flows
through the measurement pipeline (readout noise, finite shots, optional
inverse-matrix mitigation).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from ._util import derive_rng, parallel_map, seed_key
from .ansatz import AnsatzCircuit, _run_raw
from .measure import (
    ReadoutModel,
    TomographySetting,
    measure_with_setting,
    process_probabilities,
    setting_unitary,
    tomography_settings,
)
from .qcore import StateVector, pure_state_fidelity, zero_state

__all__ = [
    "LossConfig",
    "OptimizerState",
    "TrainTrace",
    "target_probabilities",
    "loss_from_probabilities",
    "loss",
    "setting_probabilities",
    "gradient_parameter_shift",
    "nesterov_step",
    "train",
    "train_restarts",
    "train_staged",
    "DEFAULT_LEARNING_RATE",
    "DEFAULT_MOMENTUM",
    "DEFAULT_MAX_ITERS",
    "DEFAULT_LOSS_TOL",
    "DEFAULT_PATIENCE",
]

DEFAULT_LEARNING_RATE = 0.05
DEFAULT_MOMENTUM = 0.9
DEFAULT_MAX_ITERS = 500
DEFAULT_LOSS_TOL = 1e-6
DEFAULT_PATIENCE = 50

_HALF_PI = math.pi / 2.0


def target_probabilities(target: StateVector, setting: TomographySetting) -> np.ndarray:
    """Theoretical outcome probabilities of the target under one setting."""
    return measure_with_setting(target, setting)


@dataclass
class LossConfig:
    """Everything the loss needs besides the circuit parameters."""

    target: StateVector
    settings: tuple[TomographySetting, ...]
    mode: str = "exact"
    shots: int = 2000
    readout: ReadoutModel | None = None
    mitigation: bool = True
    shared_shift_seeds: bool = False
    cond_cap: float = 1e8

    def __post_init__(self) -> None:
        self.settings = tuple(self.settings)
        if not self.settings:
            raise ValueError("settings must be nonempty")
        if self.mode not in ("exact", "sampled"):
            raise ValueError(f"mode must be 'exact' or 'sampled', got {self.mode!r}")
        if self.mode == "sampled" and self.shots < 1:
            raise ValueError("sampled mode requires shots >= 1")
        for s in self.settings:
            if s.n_qubits != self.target.n_qubits:
                raise ValueError("settings and target disagree on qubit count")

    @classmethod
    def for_target(cls, target: StateVector, **kwargs) -> "LossConfig":
        """Config with the standard setting list for the target's size."""
        return cls(target=target, settings=tuple(tomography_settings(target.n_qubits)), **kwargs)

    @property
    def n_settings(self) -> int:
        return len(self.settings)

    @property
    def dim(self) -> int:
        return self.target.dim

    @cached_property
    def _stacked_settings(self) -> np.ndarray:
        """All pre-rotation unitaries stacked to one (N*d, d) matrix."""
        mats = [setting_unitary(s) for s in self.settings]
        return np.concatenate(mats, axis=0)

    @cached_property
    def p_targ(self) -> np.ndarray:
        """(N, d) target probabilities, one row per setting."""
        return np.stack([target_probabilities(self.target, s) for s in self.settings])


def _exact_setting_probs(cfg: LossConfig, psi: np.ndarray) -> np.ndarray:
    rotated = cfg._stacked_settings @ psi
    return (np.abs(rotated) ** 2).reshape(cfg.n_settings, cfg.dim)


def setting_probabilities(
    circuit: AnsatzCircuit,
    params: Sequence[float],
    cfg: LossConfig,
    seed=None,
    input_state: StateVector | None = None,
) -> np.ndarray:
    """(N, d) measured probabilities for every tomography setting.

    Exact mode returns the simulator's probabilities; sampled mode pushes
    each setting through readout noise, multinomial shots and (optionally)
    mitigation, with one independent seed stream per setting.
    """
    theta = np.asarray(params, dtype=float)
    amps = (input_state or zero_state(circuit.n_qubits)).amplitudes
    psi = _run_raw(circuit, theta, amps)
    exact = _exact_setting_probs(cfg, psi)
    if cfg.mode == "exact":
        return exact
    out = np.empty_like(exact)
    base = seed_key(seed if seed is not None else 0)
    for i in range(cfg.n_settings):
        out[i] = process_probabilities(
            exact[i],
            readout=cfg.readout,
            shots=cfg.shots,
            mitigation=cfg.mitigation,
            seed=np.random.SeedSequence(list(base) + [i]),
            cond_cap=cfg.cond_cap,
        )
    return out


def loss_from_probabilities(p_exp: np.ndarray, p_targ: np.ndarray) -> float:
    """The quadratic loss given measured and target probability tables.

    Per-setting partial sums are combined with math.fsum, so the value is
    exactly independent of setting order.
    """
    p_exp = np.asarray(p_exp, dtype=float)
    p_targ = np.asarray(p_targ, dtype=float)
    if p_exp.shape != p_targ.shape:
        raise ValueError(f"shape mismatch: {p_exp.shape} vs {p_targ.shape}")
    n_settings, dim = p_exp.shape
    per_setting = [float(np.sum((p_exp[i] - p_targ[i]) ** 2)) for i in range(n_settings)]
    return math.fsum(per_setting) / (dim * n_settings)


def loss(
    circuit: AnsatzCircuit,
    params: Sequence[float],
    cfg: LossConfig,
    seed=None,
    input_state: StateVector | None = None,
) -> float:
    p_exp = setting_probabilities(circuit, params, cfg, seed=seed, input_state=input_state)
    return loss_from_probabilities(p_exp, cfg.p_targ)


def gradient_parameter_shift(
    circuit: AnsatzCircuit,
    params: Sequence[float],
    cfg: LossConfig,
    seed=None,
    free_indices: Iterable[int] | None = None,
    input_state: StateVector | None = None,
) -> np.ndarray:
    """Gradient of the loss via +-pi/2 parameter shifts.

    Exact for rotation-generated parameters: dp/dtheta_k is half the
    difference of the probabilities at theta_k +- pi/2, and the quadratic
    loss chains it to dL/dtheta_k = 2/(2**n N) * sum (p_exp - p_targ) dp.
    Components outside ``free_indices`` are returned as exactly zero.
    """
    theta = np.array(params, dtype=float)
    if free_indices is None:
        free = list(range(circuit.n_params))
    else:
        free = sorted(set(int(k) for k in free_indices))
    base = seed_key(seed if seed is not None else 0)
    p_base = setting_probabilities(
        circuit, theta, cfg, seed=base + (0,), input_state=input_state
    )
    residual = p_base - cfg.p_targ
    scale = 2.0 / (cfg.dim * cfg.n_settings)
    grad = np.zeros(circuit.n_params)
    for k in free:
        if cfg.shared_shift_seeds:
            seed_plus = base + (k + 1, 0)
            seed_minus = seed_plus
        else:
            seed_plus = base + (k + 1, 1)
            seed_minus = base + (k + 1, 2)
        theta[k] += _HALF_PI
        p_plus = setting_probabilities(circuit, theta, cfg, seed=seed_plus, input_state=input_state)
        theta[k] -= math.pi
        p_minus = setting_probabilities(circuit, theta, cfg, seed=seed_minus, input_state=input_state)
        theta[k] += _HALF_PI
        grad[k] = scale * float(np.sum(residual * (p_plus - p_minus) * 0.5))
    return grad


@dataclass(frozen=True)
class OptimizerState:
    """Nesterov accelerated gradient descent state."""

    params: np.ndarray
    velocity: np.ndarray
    learning_rate: float
    momentum: float
    iteration: int = 0

    def __post_init__(self) -> None:
        p = np.asarray(self.params, dtype=float)
        v = np.asarray(self.velocity, dtype=float)
        if p.shape != v.shape:
            raise ValueError("params and velocity must have equal length")
        if self.learning_rate <= 0.0:
            raise ValueError("learning rate must be positive")
        if not 0.0 <= self.momentum < 1.0:
            raise ValueError("momentum must lie in [0, 1)")
        object.__setattr__(self, "params", p)
        object.__setattr__(self, "velocity", v)

    @property
    def lookahead(self) -> np.ndarray:
        """Where the gradient must be evaluated: params + momentum * velocity."""
        return self.params + self.momentum * self.velocity


def nesterov_step(state: OptimizerState, grad_at_lookahead: np.ndarray) -> OptimizerState:
    """v <- mu*v - eta*grad, theta <- theta + v."""
    g = np.asarray(grad_at_lookahead, dtype=float)
    if not np.all(np.isfinite(g)):
        raise ValueError("gradient contains non-finite entries")
    v = state.momentum * state.velocity - state.learning_rate * g
    return OptimizerState(
        params=state.params + v,
        velocity=v,
        learning_rate=state.learning_rate,
        momentum=state.momentum,
        iteration=state.iteration + 1,
    )


@dataclass
class TrainTrace:
    """Per-iteration history of one training run (index 0 = initial point)."""

    losses: list[float]
    params_history: list[np.ndarray]
    fidelities: list[float]
    converged: bool = False
    stop_reason: str = "max_iters"
    unfreeze_iteration: int | None = None
    restart_seed: int | None = None

    @property
    def n_iterations(self) -> int:
        return len(self.losses) - 1

    @property
    def final_loss(self) -> float:
        return self.losses[-1]

    @property
    def final_params(self) -> np.ndarray:
        return self.params_history[-1]

    @property
    def final_fidelity(self) -> float | None:
        return self.fidelities[-1] if self.fidelities else None

    def rows(self):
        for it, (l, p) in enumerate(zip(self.losses, self.params_history)):
            f = self.fidelities[it] if self.fidelities else float("nan")
            yield it, l, f, p

    def to_csv(self, path) -> None:
        n_params = len(self.params_history[0])
        header = ["iteration", "loss", "fidelity"] + [f"p{k}" for k in range(n_params)]
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(",".join(header) + "\n")
            for it, l, f, p in self.rows():
                cells = [str(it), repr(float(l)), repr(float(f))]
                cells += [repr(float(x)) for x in p]
                fh.write(",".join(cells) + "\n")


def _diag_fidelity(circuit, theta, cfg, input_state) -> float:
    amps = (input_state or zero_state(circuit.n_qubits)).amplitudes
    psi = _run_raw(circuit, np.asarray(theta, float), amps)
    psi = psi / np.linalg.norm(psi)
    return pure_state_fidelity(StateVector(circuit.n_qubits, psi), cfg.target)


def train(
    circuit: AnsatzCircuit,
    cfg: LossConfig,
    *,
    learning_rate: float = DEFAULT_LEARNING_RATE,
    momentum: float = DEFAULT_MOMENTUM,
    max_iters: int = DEFAULT_MAX_ITERS,
    loss_tol: float = DEFAULT_LOSS_TOL,
    patience: int | None = DEFAULT_PATIENCE,
    init: Sequence[float] | None = None,
    seed=0,
    freeze: Iterable[int] = (),
    input_state: StateVector | None = None,
    record_fidelity: bool = True,
) -> TrainTrace:
    """Nesterov descent on the tomography loss until a stop condition.

    ``init=None`` draws a uniform [0, 2*pi) start from the seed. Indices in
    ``freeze`` are held fixed (their gradient entries and velocity stay
    zero). Divergence (loss above 10x the initial value for 20 consecutive
    iterations) aborts with the trace marked ``stop_reason='diverged'``.

    The fidelity column is a diagnostic read off the exact simulator state;
    the optimizer itself only ever sees the (possibly sampled) loss.
    """
    base = seed_key(seed)
    frozen = set(int(k) for k in freeze)
    free = [k for k in range(circuit.n_params) if k not in frozen]
    if init is None:
        theta0 = derive_rng(base, 0).uniform(0.0, 2.0 * math.pi, circuit.n_params)
    else:
        theta0 = np.array(init, dtype=float)
        if theta0.shape != (circuit.n_params,):
            raise ValueError(f"init must have length {circuit.n_params}")

    state = OptimizerState(
        params=theta0,
        velocity=np.zeros(circuit.n_params),
        learning_rate=learning_rate,
        momentum=momentum,
    )
    initial_loss = loss(circuit, state.params, cfg, seed=base + (1, 0), input_state=input_state)
    losses = [initial_loss]
    params_history = [state.params.copy()]
    fidelities = (
        [_diag_fidelity(circuit, state.params, cfg, input_state)] if record_fidelity else []
    )
    trace = TrainTrace(losses, params_history, fidelities)

    if initial_loss <= loss_tol:
        trace.converged = True
        trace.stop_reason = "loss_tol"
        return trace

    best_loss = initial_loss
    stall = 0
    diverged_streak = 0
    for it in range(1, max_iters + 1):
        grad = gradient_parameter_shift(
            circuit,
            state.lookahead,
            cfg,
            seed=base + (2, it),
            free_indices=free,
            input_state=input_state,
        )
        state = nesterov_step(state, grad)
        current = loss(circuit, state.params, cfg, seed=base + (3, it), input_state=input_state)
        losses.append(current)
        params_history.append(state.params.copy())
        if record_fidelity:
            fidelities.append(_diag_fidelity(circuit, state.params, cfg, input_state))

        if current <= loss_tol:
            trace.converged = True
            trace.stop_reason = "loss_tol"
            return trace
        if current < best_loss - 1e-15:
            best_loss = current
            stall = 0
        else:
            stall += 1
            if patience is not None and stall >= patience:
                trace.stop_reason = "patience"
                return trace
        diverged_streak = diverged_streak + 1 if current > 10.0 * initial_loss else 0
        if diverged_streak >= 20:
            trace.stop_reason = "diverged"
            return trace

    trace.stop_reason = "max_iters"
    return trace


def train_restarts(
    circuit: AnsatzCircuit,
    cfg: LossConfig,
    *,
    restarts: int = 10,
    root_seed=0,
    threads: int = 1,
    early_stop: bool = True,
    **train_kwargs,
) -> TrainTrace:
    """Best-of-R training with per-restart derived seeds.

    Selection is deterministic and independent of thread count: the
    lowest-index restart that converged wins; if none converged, the run
    with the lowest final loss (ties to the lowest index). With
    ``early_stop`` later batches are skipped once a converged run exists.
    """
    if restarts < 1:
        raise ValueError("restarts must be >= 1")
    base = seed_key(root_seed)

    def _run(r: int) -> TrainTrace:
        trace = train(circuit, cfg, seed=base + (r,), **train_kwargs)
        trace.restart_seed = r
        return trace

    done: list[TrainTrace] = []
    batch = max(1, threads)
    for start in range(0, restarts, batch):
        indices = list(range(start, min(start + batch, restarts)))
        done.extend(parallel_map(_run, indices, threads))
        if early_stop and any(t.converged for t in done):
            break
    for t in done:
        if t.converged:
            return t
    return min(done, key=lambda t: (t.final_loss, t.restart_seed))


def train_staged(
    circuit: AnsatzCircuit,
    cfg: LossConfig,
    *,
    stage1_free: Iterable[int],
    init: Sequence[float],
    seed=0,
    stage1_kwargs: dict | None = None,
    stage2_kwargs: dict | None = None,
    input_state: StateVector | None = None,
) -> TrainTrace:
    """Two-phase schedule: optimize ``stage1_free`` with the rest frozen,
    then unfreeze everything and continue from the stage-1 optimum.

    The returned trace is the concatenation of both phases, with
    ``unfreeze_iteration`` marking the transition.
    """
    base = seed_key(seed)
    stage1_free = sorted(set(int(k) for k in stage1_free))
    frozen1 = [k for k in range(circuit.n_params) if k not in stage1_free]
    first = train(
        circuit,
        cfg,
        init=init,
        seed=base + (0,),
        freeze=frozen1,
        input_state=input_state,
        **(stage1_kwargs or {}),
    )
    second = train(
        circuit,
        cfg,
        init=first.final_params,
        seed=base + (1,),
        input_state=input_state,
        **(stage2_kwargs or {}),
    )
    trace = TrainTrace(
        losses=first.losses + second.losses[1:],
        params_history=first.params_history + second.params_history[1:],
        fidelities=(
            first.fidelities + second.fidelities[1:] if first.fidelities else []
        ),
        converged=second.converged,
        stop_reason=second.stop_reason,
        unfreeze_iteration=first.n_iterations,
    )
    return trace
