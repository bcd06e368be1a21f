"""The five-outcome discrimination POVM on the ancilla pair.

Four conclusive elements ``P_i = |Psi_i><Psi_i| / x`` and one inconclusive
remainder ``P_5 = I - sum_i P_i``. ``x`` must be large enough for ``P_5`` to
stay positive; :func:`min_x` returns the smallest such value.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np

from . import kernels
from .errors import ArityError, DegenerateChannelError, InvalidStateError, NotHermitianError, PositivityError
from .qstate import EPS_NORM, EPS_PSD, EPS_ZERO, DenseOperator, Label, StateVector, apply_operator, normalize

EPS_COEF = 1e-9

# sign pattern of Psi_1..Psi_4 over the ancilla kets |00>, |01>, |10>, |11>
SIGN_PATTERNS = np.array(
    [
        [1, 1, 1, 1],
        [1, 1, -1, -1],
        [1, -1, 1, -1],
        [1, -1, -1, 1],
    ],
    dtype=np.float64,
)


@dataclass(frozen=True)
class ChannelParams:
    """Real, strictly positive amplitudes of the four-qubit channel state."""

    alpha: float
    beta: float
    gamma: float
    delta: float

    def __post_init__(self):
        for name in ("alpha", "beta", "gamma", "delta"):
            value = getattr(self, name)
            if isinstance(value, complex) or not math.isfinite(float(value)):
                raise DegenerateChannelError(f"{name} must be a finite real number, got {value!r}")
            object.__setattr__(self, name, float(value))
            if float(value) < EPS_COEF:
                raise DegenerateChannelError(f"{name} = {value!r} is below {EPS_COEF:g}; coefficients must be positive")
        total = self.alpha**2 + self.beta**2 + self.gamma**2 + self.delta**2
        if abs(total - 1.0) > EPS_NORM:
            raise InvalidStateError(f"channel coefficients are not normalized: sum of squares = {total:.15g}")

    @property
    def coefficients(self) -> np.ndarray:
        return np.array([self.alpha, self.beta, self.gamma, self.delta])

    @classmethod
    def from_sequence(cls, values: Sequence[float]) -> "ChannelParams":
        if len(values) != 4:
            raise ValueError(f"a channel has 4 coefficients, got {len(values)}")
        return cls(*values)

    @classmethod
    def uniform(cls) -> "ChannelParams":
        return cls(0.5, 0.5, 0.5, 0.5)

    @classmethod
    def skew(cls, t: float) -> "ChannelParams":
        """Product family (cos t, sin t) x (cos t, sin t); uniform at t = pi/4, valid for 0 < t < pi/2."""
        c, s = math.cos(t), math.sin(t)
        return cls(c * c, c * s, s * c, s * s)

    @classmethod
    def random(cls, rng: np.random.Generator, floor: float = 0.05) -> "ChannelParams":
        """Uniform on the positive orthant of the unit 3-sphere, rejecting coefficients below ``floor``."""
        while True:
            v = np.abs(rng.standard_normal(4))
            v /= np.linalg.norm(v)
            if v.min() >= floor:
                return cls(*v)


@dataclass(frozen=True, eq=False)
class POVMSet:
    elements: tuple
    x: float
    outcome_vectors: tuple
    provenance: tuple

    @property
    def matrices(self) -> np.ndarray:
        return np.array([e.matrix for e in self.elements])

    def completeness_error(self) -> float:
        dim = self.elements[0].dim
        return float(np.max(np.abs(self.matrices.sum(axis=0) - np.eye(dim))))

    @cached_property
    def kraus(self) -> tuple:
        """Spectral square roots ``M_m = sqrt(P_m)``."""
        return tuple(DenseOperator(psd_sqrt(e.matrix), name=f"sqrt({p})") for e, p in zip(self.elements, self.provenance))

    def __len__(self) -> int:
        return len(self.elements)


def _check_channel(channel) -> ChannelParams:
    if not isinstance(channel, ChannelParams):
        raise TypeError(f"expected ChannelParams, got {type(channel).__name__}")
    return channel


def discrimination_states(channel: ChannelParams, labels: Sequence[Label] = ("A", "B")) -> tuple:
    """The four states Psi_1..Psi_4 with amplitudes +-1/coefficient, sharing one normalization."""
    channel = _check_channel(channel)
    inv = 1.0 / channel.coefficients
    norm = math.sqrt(float(np.sum(inv**2)))
    return tuple(StateVector(tuple(labels), SIGN_PATTERNS[i] * inv / norm) for i in range(4))


def projector_sum(channel: ChannelParams) -> np.ndarray:
    vecs = np.array([s.amplitudes for s in discrimination_states(channel)])
    return np.einsum("ki,kj->ij", vecs, vecs.conj())


def _hermitian(op) -> np.ndarray:
    m = op.matrix if isinstance(op, DenseOperator) else np.asarray(op, dtype=np.complex128)
    err = float(np.max(np.abs(m - m.conj().T)))
    if err > EPS_NORM:
        raise NotHermitianError(f"operator is not Hermitian (max deviation {err:.3e})")
    return np.ascontiguousarray(m, dtype=np.complex128)


def eigh(op) -> tuple[np.ndarray, np.ndarray]:
    """Ascending eigenvalues and eigenvector columns of a Hermitian operator (cyclic Jacobi)."""
    return kernels.jacobi_eigh(_hermitian(op))


def is_psd(op, tol: float = EPS_PSD) -> tuple[bool, float]:
    w, _ = eigh(op)
    lo = float(w[0])
    return lo >= -tol, lo


def psd_sqrt(matrix) -> np.ndarray:
    w, v = eigh(matrix)
    if w[0] < -EPS_PSD:
        raise PositivityError(f"square root of an operator with eigenvalue {w[0]:.3e}", float(w[0]))
    w = np.where(w < 0.0, 0.0, w)
    return (v * np.sqrt(w)) @ v.conj().T


def min_x(channel: ChannelParams) -> float:
    """Smallest scaling that keeps the inconclusive element positive."""
    w, _ = eigh(projector_sum(_check_channel(channel)))
    return float(w[-1])


def build_povm(channel: ChannelParams, x: float) -> POVMSet:
    states = discrimination_states(channel)
    x = float(x)
    if not math.isfinite(x) or x <= 0.0:
        raise PositivityError(f"scaling x must be positive and finite, got {x!r}", float("nan"))
    elements = []
    for i, s in enumerate(states, start=1):
        v = s.amplitudes
        elements.append(DenseOperator(np.outer(v, v.conj()) / x, name=f"P{i}"))
    rest = np.eye(4) - sum(e.matrix for e in elements)
    ok, lo = is_psd(rest)
    if not ok:
        raise PositivityError(
            f"P5 has negative eigenvalue {lo:.6e} at x = {x:.15g}; need x >= {min_x(channel):.15g}", lo
        )
    elements.append(DenseOperator(rest, name="P5"))
    provenance = tuple(f"|Psi{i}><Psi{i}|/x" for i in range(1, 5)) + ("I - sum(P1..P4)",)
    return POVMSet(tuple(elements), x, states, provenance)


def povm_probabilities(state: StateVector, povm: POVMSet, targets: Sequence[Label] | None = None) -> np.ndarray:
    """Born probabilities <psi|P_m|psi> for every element, acting on ``targets``."""
    targets = _targets(state, targets)
    probs = np.empty(len(povm))
    for m, e in enumerate(povm.elements):
        val = np.vdot(state.amplitudes, apply_operator(state, e, targets).amplitudes).real
        probs[m] = max(val, 0.0)
    return probs


def _targets(state: StateVector, targets):
    if targets is None:
        if state.n_qubits != 2:
            raise ArityError(f"POVM acts on 2 qubits; state has {state.n_qubits}, pass targets explicitly")
        return state.labels
    return tuple(targets)


def povm_sample(state: StateVector, povm: POVMSet, rng, targets: Sequence[Label] | None = None) -> tuple[int, StateVector, float]:
    """Draw an outcome; returns (1-based index, normalized post-state, its probability).

    The post-state is ``M_m|psi>`` renormalized with ``M_m = sqrt(P_m)``.
    Consumes one ``rng.random()`` draw.
    """
    targets = _targets(state, targets)
    probs = povm_probabilities(state, povm, targets)
    m = int(kernels.sample_index(probs, rng.random()))
    if m < 0 or probs[m] < EPS_ZERO**2:
        raise RuntimeError(f"sampled a zero-probability POVM outcome (probabilities {probs})")
    post, _ = normalize(apply_operator(state, povm.kraus[m], targets))
    return m + 1, post, float(probs[m])
