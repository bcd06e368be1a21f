"""Brute-force derivation of the recovery lookup table.

For every pair of Alice's Bell outcomes and every conclusive POVM index, Bob's
pair ends up in a fixed Pauli image of the input. The search below tries all
16 phase-free two-qubit Paulis built from {I, X, Z, ZX} and keeps the ones
that restore the input with fidelity 1 on several random instances. Exactly
one candidate must survive for each of the 64 cases.
"""
from __future__ import annotations

import itertools

import numpy as np

from .gates import BellOutcome, standard_gate
from .povm import ChannelParams, build_povm, min_x
from .protocol import (
    ANCILLAS,
    BOB,
    InputState,
    alice_branch,
    bob_entangle_ancilla,
    bob_state_after_povm,
    prepare_world,
)
from .qstate import apply_gate, apply_operator, fidelity, normalize

PAULI_NAMES = ("I", "X", "Z", "ZX")


def candidates():
    for p5, p6 in itertools.product(PAULI_NAMES, repeat=2):
        yield (p5, p6), standard_gate(p5).kron(standard_gate(p6))


def _survivors(input: InputState, channel: ChannelParams, tol: float) -> dict:
    povm = build_povm(channel, min_x(channel))
    world = prepare_world(input, channel)
    reference = input.state(BOB)
    found = {}
    for b23, b14 in itertools.product(BellOutcome, repeat=2):
        bob, _ = alice_branch(world, b23, b14)
        full = bob_entangle_ancilla(bob)
        for m in range(1, 5):
            post, _ = normalize(apply_operator(full, povm.kraus[m - 1], ANCILLAS))
            before = bob_state_after_povm(post, povm, m)
            found[(int(b23), int(b14), m)] = {
                key for key, op in candidates() if fidelity(apply_gate(before, op, BOB), reference) > 1.0 - tol
            }
    return found


def derive_recovery_table(seed: int = 2024, instances: int = 4, tol: float = 1e-10) -> dict:
    rng = np.random.default_rng(seed)
    table = None
    for _ in range(instances):
        found = _survivors(InputState.random(rng), ChannelParams.random(rng), tol)
        if table is None:
            table = found
        else:
            table = {k: table[k] & found[k] for k in table}
    out = {}
    for key in sorted(table):
        hits = table[key]
        if len(hits) != 1:
            raise RuntimeError(f"recovery for {key} is not unique: {sorted(hits)}")
        out[key] = next(iter(hits))
    return out


def format_table(table: dict) -> str:
    lines = ["RECOVERY_TABLE = {"]
    for (b23, b14, m), (p5, p6) in sorted(table.items()):
        lines.append(f"    ({b23}, {b14}, {m}): ({p5!r}, {p6!r}),")
    lines.append("}")
    return "\n".join(lines)


if __name__ == "__main__":
    print(format_table(derive_recovery_table()))
