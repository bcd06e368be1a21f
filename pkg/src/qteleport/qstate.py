"""Dense state vectors and operators over labeled qubits.

The first label is the most significant bit of the amplitude index, so the
ket ``|q1 q2 ... qn>`` is read left to right.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Hashable, Sequence

import numpy as np

from . import kernels
from .errors import ArityError, InvalidStateError, LabelError, NotUnitaryError, ZeroNormError

EPS_NORM = 1e-12
EPS_ZERO = 1e-12
EPS_PSD = 1e-10
MAX_QUBITS = 8

Label = Hashable


@dataclass(frozen=True, eq=False)
class StateVector:
    """Complex amplitudes over an ordered tuple of qubit labels.

    Instances are immutable: the amplitude array is copied and locked on
    construction.
    """

    labels: tuple
    amplitudes: np.ndarray

    def __post_init__(self):
        labels = tuple(self.labels)
        if len(set(labels)) != len(labels):
            raise LabelError(f"duplicate labels in {labels!r}")
        if len(labels) > MAX_QUBITS:
            raise ValueError(f"at most {MAX_QUBITS} qubits are supported, got {len(labels)}")
        amps = np.array(self.amplitudes, dtype=np.complex128).reshape(-1)
        if amps.shape[0] != 1 << len(labels):
            raise ValueError(f"{len(labels)} labels need {1 << len(labels)} amplitudes, got {amps.shape[0]}")
        amps.flags.writeable = False
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "amplitudes", amps)

    @property
    def n_qubits(self) -> int:
        return len(self.labels)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    @classmethod
    def basis(cls, labels: Sequence[Label], bits: str) -> "StateVector":
        """Computational basis ket, e.g. ``StateVector.basis((1, 2), "01")``."""
        if len(bits) != len(labels) or set(bits) - {"0", "1"}:
            raise ValueError(f"bit string {bits!r} does not match {len(labels)} labels")
        amps = np.zeros(1 << len(labels), dtype=np.complex128)
        amps[int(bits, 2) if bits else 0] = 1.0
        return cls(tuple(labels), amps)

    def __repr__(self) -> str:
        return f"StateVector(labels={self.labels!r}, amplitudes={np.array2string(self.amplitudes, precision=6)})"


@dataclass(frozen=True, eq=False)
class DenseOperator:
    """Square matrix acting on ``target_arity`` qubits."""

    matrix: np.ndarray
    unitary: bool = False
    name: str = ""

    def __post_init__(self):
        m = np.array(self.matrix, dtype=np.complex128)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"operator must be square, got shape {m.shape}")
        dim = m.shape[0]
        if dim < 2 or dim & (dim - 1):
            raise ValueError(f"operator dimension must be a power of two, got {dim}")
        if self.unitary:
            err = np.max(np.abs(m.conj().T @ m - np.eye(dim)))
            if err > EPS_NORM:
                raise NotUnitaryError(f"{self.name or 'operator'} deviates from unitarity by {err:.3e}")
        m.flags.writeable = False
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def target_arity(self) -> int:
        return self.dim.bit_length() - 1

    def dagger(self) -> "DenseOperator":
        return DenseOperator(self.matrix.conj().T, self.unitary, f"{self.name}^dag" if self.name else "")

    def __matmul__(self, other: "DenseOperator") -> "DenseOperator":
        name = f"{self.name}{other.name}" if self.name and other.name else ""
        return DenseOperator(self.matrix @ other.matrix, self.unitary and other.unitary, name)

    def kron(self, other: "DenseOperator") -> "DenseOperator":
        name = f"{self.name}(x){other.name}" if self.name and other.name else ""
        return DenseOperator(np.kron(self.matrix, other.matrix), self.unitary and other.unitary, name)


@dataclass(frozen=True)
class BlochAngles:
    theta: float
    phi: float

    def to_state(self, label: Label = 0) -> StateVector:
        amps = [math.cos(self.theta / 2), np.exp(1j * self.phi) * math.sin(self.theta / 2)]
        return StateVector((label,), amps)


def _positions(state: StateVector, targets: Sequence[Label]) -> np.ndarray:
    index = {lab: i for i, lab in enumerate(state.labels)}
    pos = []
    for t in targets:
        if t not in index:
            raise LabelError(f"label {t!r} not in state labels {state.labels!r}")
        pos.append(index[t])
    if len(set(pos)) != len(pos):
        raise LabelError(f"repeated target labels {tuple(targets)!r}")
    return np.array(pos, dtype=np.int64)


def tensor(s1: StateVector, s2: StateVector) -> StateVector:
    """Kronecker product with ``s1``'s labels first."""
    clash = set(s1.labels) & set(s2.labels)
    if clash:
        raise LabelError(f"label collision: {sorted(map(str, clash))}")
    return StateVector(s1.labels + s2.labels, np.kron(s1.amplitudes, s2.amplitudes))


def apply_operator(state: StateVector, op: DenseOperator, targets: Sequence[Label]) -> StateVector:
    """Apply any (not necessarily unitary) operator on ``targets``; no renormalization."""
    targets = tuple(targets)
    if op.target_arity != len(targets):
        raise ArityError(f"operator acts on {op.target_arity} qubits, {len(targets)} targets given")
    pos = _positions(state, targets)
    out = kernels.apply_matrix(state.amplitudes, state.n_qubits, op.matrix, pos)
    return StateVector(state.labels, out)


def apply_gate(state: StateVector, gate: DenseOperator, targets: Sequence[Label]) -> StateVector:
    if not gate.unitary:
        raise NotUnitaryError(f"{gate.name or 'operator'} is not flagged unitary; use apply_operator")
    return apply_operator(state, gate, targets)


def project(state: StateVector, targets: Sequence[Label], bra: StateVector) -> StateVector:
    """Contract ``targets`` with ``<bra|``; the measured labels are removed.

    The result is unnormalized: its squared norm is the Born weight.
    """
    targets = tuple(targets)
    if bra.n_qubits != len(targets):
        raise ArityError(f"bra has {bra.n_qubits} qubits, {len(targets)} targets given")
    pos = _positions(state, targets)
    rest = tuple(lab for lab in state.labels if lab not in set(targets))
    out = kernels.contract(state.amplitudes, state.n_qubits, pos, bra.amplitudes)
    return StateVector(rest, out)


def inner(s1: StateVector, s2: StateVector) -> complex:
    """<s1|s2>, conjugating ``s1``."""
    if s1.labels != s2.labels:
        raise LabelError(f"label mismatch: {s1.labels!r} vs {s2.labels!r}")
    return complex(np.vdot(s1.amplitudes, s2.amplitudes))


def normalize(state: StateVector) -> tuple[StateVector, float]:
    norm = state.norm()
    if norm < EPS_ZERO:
        raise ZeroNormError(f"cannot normalize a vector of norm {norm:.3e}")
    return StateVector(state.labels, state.amplitudes / norm), norm


def relabel(state: StateVector, labels: Sequence[Label]) -> StateVector:
    return StateVector(tuple(labels), state.amplitudes)


def fidelity(state: StateVector, reference: StateVector) -> float:
    """|<reference|state>|^2 for pure states of equal size. Labels are not compared."""
    if state.n_qubits != reference.n_qubits:
        raise ArityError(f"fidelity between {state.n_qubits} and {reference.n_qubits} qubits")
    ov = np.vdot(reference.amplitudes, state.amplitudes)
    return float(min(1.0, ov.real * ov.real + ov.imag * ov.imag))


def bloch_angles(state: StateVector) -> BlochAngles:
    if state.n_qubits != 1:
        raise ArityError(f"Bloch angles need one qubit, got {state.n_qubits}")
    if abs(state.norm() - 1.0) > EPS_NORM:
        raise InvalidStateError(f"state is not normalized (norm {state.norm():.15g})")
    a, b = state.amplitudes
    theta = 2.0 * math.atan2(abs(b), abs(a))
    if abs(a) < EPS_ZERO or abs(b) < EPS_ZERO:
        phi = 0.0
    else:
        phi = (np.angle(b) - np.angle(a)) % (2 * math.pi)
        if phi >= 2 * math.pi:
            phi = 0.0
    return BlochAngles(float(theta), float(phi))


def random_state(labels: Sequence[Label], rng: np.random.Generator) -> StateVector:
    """Haar-random pure state (normalized complex Gaussian vector)."""
    dim = 1 << len(labels)
    z = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return StateVector(tuple(labels), z / np.linalg.norm(z))
