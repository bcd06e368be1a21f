"""Standard gates, the Bell basis, Bell measurement and Pauli corrections."""
from __future__ import annotations

import enum
import math
from typing import Sequence

import numpy as np

from . import kernels
from .qstate import (
    EPS_ZERO,
    DenseOperator,
    Label,
    StateVector,
    apply_operator,
    normalize,
    project,
)

_S = 1.0 / math.sqrt(2.0)

_MATRICES = {
    "I": np.eye(2),
    "X": np.array([[0, 1], [1, 0]]),
    "Z": np.array([[1, 0], [0, -1]]),
    "H": np.array([[_S, _S], [_S, -_S]]),
    "ZX": np.array([[0, 1], [-1, 0]]),
    "CNOT": np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]]),
}


def standard_gate(name: str) -> DenseOperator:
    try:
        m = _MATRICES[name]
    except KeyError:
        raise ValueError(f"unknown gate {name!r}; known: {sorted(_MATRICES)}") from None
    return DenseOperator(m, unitary=True, name=name)


class BellOutcome(enum.IntEnum):
    """Bell basis element; the integer value is the 2-bit classical message."""

    PHI_PLUS = 0b00
    PSI_PLUS = 0b01
    PHI_MINUS = 0b10
    PSI_MINUS = 0b11

    @property
    def bits(self) -> str:
        return format(int(self), "02b")

    @property
    def symbol(self) -> str:
        return {0: "Phi+", 1: "Psi+", 2: "Phi-", 3: "Psi-"}[int(self)]


_BELL_VECTORS = {
    BellOutcome.PHI_PLUS: np.array([_S, 0, 0, _S]),
    BellOutcome.PSI_PLUS: np.array([0, _S, _S, 0]),
    BellOutcome.PHI_MINUS: np.array([_S, 0, 0, -_S]),
    BellOutcome.PSI_MINUS: np.array([0, _S, -_S, 0]),
}

# rows indexed by BellOutcome value, consumed by the trial kernels
BELL_MATRIX = np.array([_BELL_VECTORS[k] for k in BellOutcome], dtype=np.complex128)


def bell_state(kind: BellOutcome, labels: Sequence[Label] = (0, 1)) -> StateVector:
    return StateVector(tuple(labels), _BELL_VECTORS[BellOutcome(kind)])


def bell_projections(state: StateVector, q_i: Label, q_j: Label) -> list[tuple[StateVector, float]]:
    """Unnormalized post-states and Born weights for all four outcomes, in BellOutcome order."""
    if q_i == q_j:
        raise ValueError("Bell measurement needs two distinct qubits")
    out = []
    for kind in BellOutcome:
        branch = project(state, (q_i, q_j), bell_state(kind))
        out.append((branch, branch.norm() ** 2))
    return out


def _draw(probs: np.ndarray, rng) -> int:
    k = int(kernels.sample_index(np.asarray(probs, dtype=np.float64), rng.random()))
    if k < 0 or probs[k] < EPS_ZERO**2:
        raise RuntimeError(f"sampled a zero-probability branch (probabilities {probs})")
    return k


def bell_measure(state: StateVector, q_i: Label, q_j: Label, rng) -> tuple[BellOutcome, StateVector, float]:
    """Projective Bell measurement of ``(q_i, q_j)``.

    The measured qubits are removed from the returned post-state. Consumes one
    ``rng.random()`` draw.
    """
    branches = bell_projections(state, q_i, q_j)
    probs = np.array([p for _, p in branches])
    k = _draw(probs, rng)
    post, _ = normalize(branches[k][0])
    return BellOutcome(k), post, float(probs[k])


def bell_measure_retained(state: StateVector, q_i: Label, q_j: Label, rng) -> tuple[BellOutcome, StateVector, float]:
    """Like :func:`bell_measure` but keeps the measured pair in the post-state."""
    branches = bell_projections(state, q_i, q_j)
    probs = np.array([p for _, p in branches])
    k = _draw(probs, rng)
    vec = _BELL_VECTORS[BellOutcome(k)]
    projector = DenseOperator(np.outer(vec, vec.conj()))
    post, _ = normalize(apply_operator(state, projector, (q_i, q_j)))
    return BellOutcome(k), post, float(probs[k])


def measure_computational(state: StateVector, labels: Sequence[Label], rng) -> tuple[str, StateVector, float]:
    """Computational-basis measurement of ``labels``; they are removed from the post-state."""
    labels = tuple(labels)
    width = len(labels)
    branches = [project(state, labels, StateVector.basis(labels, format(v, f"0{width}b"))) for v in range(1 << width)]
    probs = np.array([b.norm() ** 2 for b in branches])
    k = _draw(probs, rng)
    post, _ = normalize(branches[k])
    return format(k, f"0{width}b"), post, float(probs[k])


_CORRECTIONS = {"00": "I", "01": "X", "10": "Z", "11": "ZX"}


def pauli_correction(bits) -> DenseOperator:
    """Correction for a 2-bit message: 00 -> I, 01 -> X, 10 -> Z, 11 -> ZX."""
    if isinstance(bits, (int, np.integer)):
        bits = format(int(bits), "02b")
    if bits not in _CORRECTIONS:
        raise ValueError(f"expected a 2-bit message, got {bits!r}")
    return standard_gate(_CORRECTIONS[bits])
