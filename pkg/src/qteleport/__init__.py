"""Exact state-vector simulation of two-qubit teleportation through a
partially entangled four-qubit channel, with optimal POVM discrimination."""

__version__ = "0.1.0"

from ._accel import backend_name
from .bellcheck import AnalyzerSetting, chsh_value, singlet_correlation
from .gates import BellOutcome, bell_measure, bell_state, pauli_correction, standard_gate
from .povm import ChannelParams, POVMSet, build_povm, discrimination_states, is_psd, min_x, povm_sample
from .protocol import (
    InputState,
    RunStatistics,
    TeleportResult,
    exact_success_probability,
    prepare_world,
    run_teleportation,
    teleport_once,
    teleport_single,
)
from .qstate import BlochAngles, DenseOperator, StateVector, apply_gate, bloch_angles, fidelity, inner, normalize, tensor

__all__ = [
    "AnalyzerSetting",
    "BellOutcome",
    "BlochAngles",
    "ChannelParams",
    "DenseOperator",
    "InputState",
    "POVMSet",
    "RunStatistics",
    "StateVector",
    "TeleportResult",
    "apply_gate",
    "backend_name",
    "bell_measure",
    "bell_state",
    "bloch_angles",
    "build_povm",
    "chsh_value",
    "discrimination_states",
    "exact_success_probability",
    "fidelity",
    "inner",
    "is_psd",
    "min_x",
    "normalize",
    "pauli_correction",
    "povm_sample",
    "prepare_world",
    "run_teleportation",
    "singlet_correlation",
    "standard_gate",
    "teleport_once",
    "teleport_single",
    "tensor",
]
