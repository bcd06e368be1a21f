"""Teleportation engines: the one-qubit textbook circuit and the two-qubit
scheme through the four-qubit channel with POVM discrimination on Bob's side.

Particle labels are the integers 1..6; Bob's ancillas are ``"A"`` and ``"B"``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from types import MappingProxyType
from typing import Iterator, NamedTuple, Sequence

import numpy as np

from . import kernels
from .errors import InvalidStateError, ZeroNormError
from .gates import (
    BELL_MATRIX,
    BellOutcome,
    bell_measure,
    bell_state,
    measure_computational,
    pauli_correction,
    standard_gate,
)
from .povm import ChannelParams, POVMSet, build_povm, min_x, povm_probabilities, povm_sample
from .qstate import (
    EPS_NORM,
    EPS_ZERO,
    DenseOperator,
    StateVector,
    apply_gate,
    apply_operator,
    fidelity,
    normalize,
    project,
    relabel,
    tensor,
)

ANCILLAS = ("A", "B")
BOB = (5, 6)

# (bell_23, bell_14, povm index) -> (operator on 5, operator on 6).
# Generated by qteleport.recovery.derive_recovery_table; regenerate there, never edit by hand.
RECOVERY_TABLE = MappingProxyType({
    (0, 0, 1): ('I', 'I'),
    (0, 0, 2): ('Z', 'I'),
    (0, 0, 3): ('I', 'Z'),
    (0, 0, 4): ('Z', 'Z'),
    (0, 1, 1): ('X', 'I'),
    (0, 1, 2): ('ZX', 'I'),
    (0, 1, 3): ('X', 'Z'),
    (0, 1, 4): ('ZX', 'Z'),
    (0, 2, 1): ('Z', 'I'),
    (0, 2, 2): ('I', 'I'),
    (0, 2, 3): ('Z', 'Z'),
    (0, 2, 4): ('I', 'Z'),
    (0, 3, 1): ('ZX', 'I'),
    (0, 3, 2): ('X', 'I'),
    (0, 3, 3): ('ZX', 'Z'),
    (0, 3, 4): ('X', 'Z'),
    (1, 0, 1): ('I', 'X'),
    (1, 0, 2): ('Z', 'X'),
    (1, 0, 3): ('I', 'ZX'),
    (1, 0, 4): ('Z', 'ZX'),
    (1, 1, 1): ('X', 'X'),
    (1, 1, 2): ('ZX', 'X'),
    (1, 1, 3): ('X', 'ZX'),
    (1, 1, 4): ('ZX', 'ZX'),
    (1, 2, 1): ('Z', 'X'),
    (1, 2, 2): ('I', 'X'),
    (1, 2, 3): ('Z', 'ZX'),
    (1, 2, 4): ('I', 'ZX'),
    (1, 3, 1): ('ZX', 'X'),
    (1, 3, 2): ('X', 'X'),
    (1, 3, 3): ('ZX', 'ZX'),
    (1, 3, 4): ('X', 'ZX'),
    (2, 0, 1): ('I', 'Z'),
    (2, 0, 2): ('Z', 'Z'),
    (2, 0, 3): ('I', 'I'),
    (2, 0, 4): ('Z', 'I'),
    (2, 1, 1): ('X', 'Z'),
    (2, 1, 2): ('ZX', 'Z'),
    (2, 1, 3): ('X', 'I'),
    (2, 1, 4): ('ZX', 'I'),
    (2, 2, 1): ('Z', 'Z'),
    (2, 2, 2): ('I', 'Z'),
    (2, 2, 3): ('Z', 'I'),
    (2, 2, 4): ('I', 'I'),
    (2, 3, 1): ('ZX', 'Z'),
    (2, 3, 2): ('X', 'Z'),
    (2, 3, 3): ('ZX', 'I'),
    (2, 3, 4): ('X', 'I'),
    (3, 0, 1): ('I', 'ZX'),
    (3, 0, 2): ('Z', 'ZX'),
    (3, 0, 3): ('I', 'X'),
    (3, 0, 4): ('Z', 'X'),
    (3, 1, 1): ('X', 'ZX'),
    (3, 1, 2): ('ZX', 'ZX'),
    (3, 1, 3): ('X', 'X'),
    (3, 1, 4): ('ZX', 'X'),
    (3, 2, 1): ('Z', 'ZX'),
    (3, 2, 2): ('I', 'ZX'),
    (3, 2, 3): ('Z', 'X'),
    (3, 2, 4): ('I', 'X'),
    (3, 3, 1): ('ZX', 'ZX'),
    (3, 3, 2): ('X', 'ZX'),
    (3, 3, 3): ('ZX', 'X'),
    (3, 3, 4): ('X', 'X'),
})


@dataclass(frozen=True)
class InputState:
    """Unknown two-qubit state a|00> + b|01> + c|10> + d|11> on particles 1, 2."""

    a: complex
    b: complex
    c: complex
    d: complex

    def __post_init__(self):
        for name in "abcd":
            value = complex(getattr(self, name))
            if not (math.isfinite(value.real) and math.isfinite(value.imag)):
                raise InvalidStateError(f"coefficient {name} is not finite")
            object.__setattr__(self, name, value)
        total = float(np.sum(np.abs(self.coefficients) ** 2))
        if abs(total - 1.0) > EPS_NORM:
            raise InvalidStateError(f"input is not normalized: |a|^2+|b|^2+|c|^2+|d|^2 = {total:.15g}")

    @property
    def coefficients(self) -> np.ndarray:
        return np.array([self.a, self.b, self.c, self.d], dtype=np.complex128)

    def state(self, labels: Sequence = (1, 2)) -> StateVector:
        return StateVector(tuple(labels), self.coefficients)

    @classmethod
    def random(cls, rng: np.random.Generator) -> "InputState":
        """Haar-random (complex Gaussian, normalized)."""
        z = rng.standard_normal(4) + 1j * rng.standard_normal(4)
        return cls(*(z / np.linalg.norm(z)))


@dataclass(frozen=True, eq=False)
class TeleportResult:
    bell_23: BellOutcome
    bell_14: BellOutcome
    povm_index: int
    recovered: StateVector | None
    fidelity: float | None
    branch_probability: float
    povm_probability: float

    @property
    def conclusive(self) -> bool:
        return self.povm_index <= 4


@dataclass(frozen=True)
class RunStatistics:
    trials: int
    conclusive_rate: float
    mean_conclusive_fidelity: float
    exact_success_probability: float
    x_used: float
    seed: int


class TrialBatch(NamedTuple):
    """Per-trial raw outcomes; ``povm_index`` is 1-based, ``fidelity`` is NaN when inconclusive."""

    bell_23: np.ndarray
    bell_14: np.ndarray
    povm_index: np.ndarray
    fidelity: np.ndarray
    branch_probability: np.ndarray


# ---------------------------------------------------------------------------
# one-qubit baseline


def teleport_single(state: StateVector, rng) -> tuple[str, StateVector]:
    """Teleport a one-qubit state through a shared Phi+ pair.

    Returns Alice's two bits and Bob's corrected qubit (label 2).
    """
    if state.n_qubits != 1:
        raise InvalidStateError(f"expected a single qubit, got {state.n_qubits}")
    if abs(state.norm() - 1.0) > EPS_NORM:
        raise InvalidStateError(f"input is not normalized (norm {state.norm():.15g})")
    world = tensor(relabel(state, (0,)), bell_state(BellOutcome.PHI_PLUS, (1, 2)))
    world = apply_gate(world, standard_gate("CNOT"), (0, 1))
    world = apply_gate(world, standard_gate("H"), (0,))
    bits, bob, _ = measure_computational(world, (0, 1), rng)
    return bits, apply_gate(bob, pauli_correction(bits), (2,))


# ---------------------------------------------------------------------------
# two-qubit scheme


def channel_state(coefficients: Sequence[float], labels: Sequence = (3, 4, 5, 6)) -> StateVector:
    """alpha|0000> + beta|1001> + gamma|0110> + delta|1111>."""
    amps = np.zeros(16, dtype=np.complex128)
    amps[[0b0000, 0b1001, 0b0110, 0b1111]] = coefficients
    return StateVector(tuple(labels), amps)


def world_state(input_coefficients: Sequence[complex], channel_coefficients: Sequence[float]) -> StateVector:
    """Six-particle product state from raw coefficients, without validating either factor."""
    return tensor(StateVector((1, 2), input_coefficients), channel_state(channel_coefficients))


def prepare_world(input: InputState, channel: ChannelParams) -> StateVector:
    return world_state(input.coefficients, channel.coefficients)


def alice_measure(world: StateVector, rng) -> tuple[BellOutcome, BellOutcome, StateVector, float]:
    """Bell measurements on (2, 3) then (1, 4); Bob's pair (5, 6) is returned."""
    b23, rest, p23 = bell_measure(world, 2, 3, rng)
    b14, bob, p14 = bell_measure(rest, 1, 4, rng)
    return b23, b14, bob, p23 * p14


def alice_branch(world: StateVector, bell_23: BellOutcome, bell_14: BellOutcome) -> tuple[StateVector | None, float]:
    """Bob's normalized state and the joint probability for one given pair of Bell outcomes."""
    branch = project(world, (2, 3), bell_state(bell_23))
    branch = project(branch, (1, 4), bell_state(bell_14))
    prob = branch.norm() ** 2
    if prob < EPS_ZERO**2:
        return None, 0.0
    return normalize(branch)[0], prob


def bob_entangle_ancilla(state56: StateVector) -> StateVector:
    """Append |00>_AB and copy 5 -> A, 6 -> B with two CNOTs."""
    if state56.labels != BOB:
        raise InvalidStateError(f"expected Bob's pair {BOB}, got labels {state56.labels}")
    cnot = standard_gate("CNOT")
    full = tensor(state56, StateVector.basis(ANCILLAS, "00"))
    full = apply_gate(full, cnot, (5, "A"))
    return apply_gate(full, cnot, (6, "B"))


def recovery_operator(bell_23: BellOutcome, bell_14: BellOutcome, index: int) -> DenseOperator:
    op5, op6 = RECOVERY_TABLE[(int(bell_23), int(bell_14), int(index))]
    return standard_gate(op5).kron(standard_gate(op6))


def bob_state_after_povm(post: StateVector, povm: POVMSet, index: int) -> StateVector:
    """Bob's (5, 6) factor after conclusive outcome ``index``, before any correction.

    A conclusive outcome leaves the ancillas in that element's outcome vector,
    so projecting onto it factors the pair out exactly.
    """
    bob, _ = normalize(project(post, ANCILLAS, povm.outcome_vectors[index - 1]))
    return bob


def _recover(post: StateVector, povm: POVMSet, bell_23, bell_14, index: int) -> StateVector:
    bob = bob_state_after_povm(post, povm, index)
    return apply_gate(bob, recovery_operator(bell_23, bell_14, index), BOB)


def bob_discriminate_and_recover(
    state56ab: StateVector,
    channel: ChannelParams,
    x: float,
    bell_23: BellOutcome,
    bell_14: BellOutcome,
    rng,
    *,
    reference: InputState,
    branch_probability: float = float("nan"),
    povm: POVMSet | None = None,
) -> TeleportResult:
    """Measure the ancillas with the discrimination POVM and undo the branch on (5, 6).

    ``reference`` is the state Alice started with; it only feeds the reported
    fidelity.
    """
    if povm is None:
        povm = build_povm(channel, x)
    index, post, prob = povm_sample(state56ab, povm, rng, targets=ANCILLAS)
    if index == 5:
        return TeleportResult(bell_23, bell_14, 5, None, None, branch_probability, prob)
    recovered = _recover(post, povm, bell_23, bell_14, index)
    fid = fidelity(recovered, reference.state(BOB))
    return TeleportResult(bell_23, bell_14, index, recovered, fid, branch_probability, prob)


def teleport_once(input: InputState, channel: ChannelParams, x: float, rng, povm: POVMSet | None = None) -> TeleportResult:
    """One full run through the state-vector API. Consumes three ``rng.random()`` draws."""
    if povm is None:
        povm = build_povm(channel, x)
    b23, b14, bob, p = alice_measure(prepare_world(input, channel), rng)
    full = bob_entangle_ancilla(bob)
    return bob_discriminate_and_recover(full, channel, x, b23, b14, rng, reference=input, branch_probability=p, povm=povm)


class BranchOutcome(NamedTuple):
    bell_23: BellOutcome
    bell_14: BellOutcome
    branch_probability: float
    povm_index: int
    conditional_probability: float
    recovered: StateVector | None


def enumerate_outcomes(input: InputState, channel: ChannelParams, x: float, povm: POVMSet | None = None) -> Iterator[BranchOutcome]:
    """Deterministic walk over all 16 Bell branches and 5 POVM outcomes.

    ``recovered`` is the corrected Bob state for conclusive outcomes of
    nonzero probability, else None.
    """
    if povm is None:
        povm = build_povm(channel, x)
    world = prepare_world(input, channel)
    for b23 in BellOutcome:
        for b14 in BellOutcome:
            bob, p = alice_branch(world, b23, b14)
            if bob is None:
                continue
            full = bob_entangle_ancilla(bob)
            probs = povm_probabilities(full, povm, ANCILLAS)
            for m in range(1, 6):
                recovered = None
                if m <= 4:
                    try:
                        post, _ = normalize(apply_operator(full, povm.kraus[m - 1], ANCILLAS))
                        recovered = _recover(post, povm, b23, b14, m)
                    except ZeroNormError:
                        recovered = None
                yield BranchOutcome(b23, b14, p, m, float(probs[m - 1]), recovered)


def exact_success_probability(input: InputState, channel: ChannelParams, x: float) -> float:
    """Born-rule probability that Bob's POVM is conclusive, summed over all Alice outcomes."""
    povm = build_povm(channel, x)
    world = prepare_world(input, channel)
    total = 0.0
    for b23 in BellOutcome:
        for b14 in BellOutcome:
            bob, p = alice_branch(world, b23, b14)
            if bob is None:
                continue
            probs = povm_probabilities(bob_entangle_ancilla(bob), povm, ANCILLAS)
            total += p * float(np.sum(probs[:4]))
    return total


def success_probability_closed_form(channel: ChannelParams, x: float) -> float:
    """16 F^2 / x with F^2 = 1 / (1/alpha^2 + 1/beta^2 + 1/gamma^2 + 1/delta^2).

    Candidate reading of the undefined F; compared against
    :func:`exact_success_probability` in the tests, not used by the engine.
    """
    return 16.0 / (float(x) * float(np.sum(1.0 / channel.coefficients**2)))


# ---------------------------------------------------------------------------
# Monte Carlo harness


def resolve_x(channel: ChannelParams, x) -> float:
    if isinstance(x, str):
        if x != "auto":
            raise ValueError(f"x must be a number or 'auto', got {x!r}")
        return min_x(channel)
    return float(x)


def _recovery_array() -> np.ndarray:
    out = np.empty((16, 4, 4, 4), dtype=np.complex128)
    for (b23, b14, m), _ in RECOVERY_TABLE.items():
        out[b23 * 4 + b14, m - 1] = recovery_operator(BellOutcome(b23), BellOutcome(b14), m).matrix
    return out


def run_trials(input: InputState, channel: ChannelParams, x: float, trials: int, seed: int, kernel=None) -> TrialBatch:
    """Run ``trials`` independent teleportations through the compiled trial kernel.

    Trial ``t`` consumes row ``t`` of a (trials, 3) uniform table drawn from
    ``numpy.random.default_rng(seed)``, so results do not depend on scheduling.
    """
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    povm = build_povm(channel, x)
    uniforms = np.random.default_rng(seed).random((trials, 3))
    kernel = kernel or kernels.simulate_trials
    b23, b14, idx, fid, bp = kernel(
        prepare_world(input, channel).amplitudes.copy(),
        BELL_MATRIX,
        np.array([k.matrix for k in povm.kraus]),
        np.array([v.amplitudes for v in povm.outcome_vectors]),
        _recovery_array(),
        input.coefficients,
        uniforms,
    )
    return TrialBatch(b23, b14, idx + 1, fid, bp)


def run_teleportation(input: InputState, channel: ChannelParams, x="auto", trials: int = 1000, seed: int = 0) -> RunStatistics:
    x_used = resolve_x(channel, x)
    batch = run_trials(input, channel, x_used, trials, seed)
    conclusive = batch.povm_index <= 4
    n_conc = int(np.count_nonzero(conclusive))
    mean_fid = float(np.mean(batch.fidelity[conclusive])) if n_conc else float("nan")
    return RunStatistics(
        trials=int(trials),
        conclusive_rate=n_conc / trials,
        mean_conclusive_fidelity=mean_fid,
        exact_success_probability=exact_success_probability(input, channel, x_used),
        x_used=x_used,
        seed=int(seed),
    )
