"""Variational preparation of Bell and GHZ states with imperfect
iSwap-like entanglers: simulation, training, tomography, readout-error
mitigation, CHSH sweeps, and gate-model fitting."""

from .qcore import (
    StateVector,
    DensityMatrix,
    Unitary,
    apply_unitary,
    basis_probabilities,
    state_fidelity,
    pure_state_fidelity,
    zero_state,
    basis_state,
    bell_state,
    ghz_state,
    BELL_LABELS,
)
from .gates import (
    ISwapLikeParams,
    rotation,
    iswap_like,
    ideal_gate,
    ideal_iswap_params,
    FITTED_ENTANGLER,
)
from .ansatz import (
    AnsatzCircuit,
    RotationSlot,
    EntanglerSlot,
    build_bell_ansatz,
    build_ghz_ansatz,
    run_ansatz,
    circuit_layout,
)
from .measure import (
    TomographySetting,
    ReadoutModel,
    MeasurementRecord,
    MitigationError,
    tomography_settings,
    measure_with_setting,
    sample_shots,
    apply_readout_noise,
    calibrate_confusion,
    mitigate,
    readout_inverse,
    process_probabilities,
    acquire_record,
    DEFAULT_SHOTS,
)
from .vqa import (
    LossConfig,
    OptimizerState,
    TrainTrace,
    target_probabilities,
    loss,
    loss_from_probabilities,
    gradient_parameter_shift,
    nesterov_step,
    train,
    train_restarts,
    train_staged,
)

__version__ = "0.1.0"
