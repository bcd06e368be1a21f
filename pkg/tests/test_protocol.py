import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from qteleport.errors import InvalidStateError, PositivityError
from qteleport.gates import BellOutcome
from qteleport.povm import ChannelParams, build_povm, min_x
from qteleport.protocol import (
    ANCILLAS,
    BOB,
    RECOVERY_TABLE,
    InputState,
    alice_branch,
    bob_entangle_ancilla,
    enumerate_outcomes,
    exact_success_probability,
    prepare_world,
    resolve_x,
    run_teleportation,
    run_trials,
    success_probability_closed_form,
    teleport_once,
    teleport_single,
)
from qteleport.qstate import StateVector, fidelity, random_state

import oracles

GENERIC = ChannelParams(0.8, 0.4, 0.3, math.sqrt(0.11))
seeds = st.integers(0, 2**32 - 1)


class TestSingleQubit:
    def test_fidelity_and_bits(self, rng):
        seen = set()
        for _ in range(200):
            s = random_state((0,), rng)
            bits, bob = teleport_single(s, rng)
            assert bob.labels == (2,)
            assert abs(fidelity(bob, StateVector((2,), s.amplitudes)) - 1) < 1e-12
            seen.add(bits)
        assert seen == {"00", "01", "10", "11"}

    def test_rejects_bad_input(self, rng):
        with pytest.raises(InvalidStateError):
            teleport_single(StateVector((0,), [1, 1]), rng)
        with pytest.raises(InvalidStateError):
            teleport_single(random_state((0, 1), rng), rng)


class TestInputState:
    def test_validation(self):
        with pytest.raises(InvalidStateError):
            InputState(1, 1, 0, 0)
        with pytest.raises(InvalidStateError):
            InputState(float("nan"), 0, 0, 0)
        assert InputState(1, 0, 0, 0).state().labels == (1, 2)


class TestAliceBranches:
    def test_world_matches_oracle(self, rng):
        inp = InputState.random(rng)
        w = prepare_world(inp, GENERIC)
        np.testing.assert_allclose(w.amplitudes, oracles.world(inp.coefficients, GENERIC.coefficients), atol=1e-15)

    @given(seed=seeds)
    def test_branch_probabilities(self, seed):
        rng = np.random.default_rng(seed)
        inp, ch = InputState.random(rng), ChannelParams.random(rng)
        w = prepare_world(inp, ch)
        total = 0.0
        for b23 in BellOutcome:
            for b14 in BellOutcome:
                bob, p = alice_branch(w, b23, b14)
                want = oracles.bob_branch(w.amplitudes, b23.symbol, b14.symbol)
                assert abs(p - np.vdot(want, want).real) < 1e-14
                total += p
        assert abs(total - 1) < 1e-12

    def test_uniform_branch_equiprobable(self, rng):
        w = prepare_world(InputState.random(rng), ChannelParams.uniform())
        for b23 in BellOutcome:
            for b14 in BellOutcome:
                assert abs(alice_branch(w, b23, b14)[1] - 1 / 16) < 1e-14

    def test_ancilla_copy(self):
        s = StateVector(BOB, [0.5, 0.5, 0.5, -0.5])
        full = bob_entangle_ancilla(s)
        assert full.labels == (5, 6, *ANCILLAS)
        idx = [0b0000, 0b0101, 0b1010, 0b1111]
        np.testing.assert_allclose(full.amplitudes[idx], [0.5, 0.5, 0.5, -0.5])
        assert abs(full.norm() - 1) < 1e-15
        with pytest.raises(InvalidStateError):
            bob_entangle_ancilla(StateVector((1, 2), [1, 0, 0, 0]))


class TestRecovery:
    def test_table_shape(self):
        assert len(RECOVERY_TABLE) == 64
        assert RECOVERY_TABLE[(0, 0, 1)] == ("I", "I")
        with pytest.raises(TypeError):
            RECOVERY_TABLE[(0, 0, 1)] = ("X", "X")

    def test_uniform_phi_plus_branch_first_outcome(self, rng):
        inp = InputState(0.5, 0.5j, -0.5, 0.5)
        povm = build_povm(ChannelParams.uniform(), 1.0)
        hits = [o for o in enumerate_outcomes(inp, ChannelParams.uniform(), 1.0, povm) if o.povm_index == 1]
        first = next(o for o in hits if o.bell_23 == BellOutcome.PHI_PLUS and o.bell_14 == BellOutcome.PHI_PLUS)
        assert abs(first.conditional_probability - 0.25) < 1e-14
        np.testing.assert_allclose(first.recovered.amplitudes, inp.coefficients, atol=1e-14)

    @pytest.mark.parametrize("scale", [1.0, 1.5, 3.0])
    def test_every_conclusive_branch_is_exact(self, rng, scale):
        for _ in range(5):
            inp, ch = InputState.random(rng), ChannelParams.random(rng)
            target = inp.state(BOB)
            n = 0
            for o in enumerate_outcomes(inp, ch, min_x(ch) * scale):
                if o.povm_index <= 4:
                    assert o.recovered is not None
                    assert abs(fidelity(o.recovered, target) - 1) < 1e-10
                    n += 1
            assert n == 64


class TestSuccessProbability:
    def test_generic_value_at_min_x(self, rng):
        p = exact_success_probability(InputState.random(rng), GENERIC, min_x(GENERIC))
        assert abs(p - 0.36) < 1e-12

    @given(seed=seeds, scale=st.floats(1.0, 4.0))
    def test_closed_form(self, seed, scale):
        rng = np.random.default_rng(seed)
        inp, ch = InputState.random(rng), ChannelParams.random(rng)
        x = min_x(ch) * scale
        assert abs(exact_success_probability(inp, ch, x) - success_probability_closed_form(ch, x)) < 1e-12

    def test_dense_oracle(self, rng):
        for _ in range(3):
            inp, ch = InputState.random(rng), ChannelParams.random(rng)
            x = min_x(ch) * 1.2
            want = oracles.conclusive_probability(inp.coefficients, ch.coefficients, x)
            assert abs(exact_success_probability(inp, ch, x) - want) < 1e-12

    def test_independent_of_input(self, rng):
        x = 2.0
        values = [exact_success_probability(InputState.random(rng), GENERIC, x) for _ in range(10)]
        assert np.ptp(values) < 1e-13

    def test_enumeration_is_a_distribution(self, rng):
        inp = InputState.random(rng)
        total = sum(o.branch_probability * o.conditional_probability for o in enumerate_outcomes(inp, GENERIC, 2.0))
        assert abs(total - 1) < 1e-12


class TestMonteCarlo:
    def test_teleport_once(self, rng):
        povm = build_povm(GENERIC, 1.6)
        inp = InputState.random(rng)
        outcomes = set()
        for _ in range(100):
            r = teleport_once(inp, GENERIC, 1.6, rng, povm)
            outcomes.add(r.povm_index)
            if r.conclusive:
                assert abs(r.fidelity - 1) < 1e-10
            else:
                assert r.recovered is None and r.fidelity is None
        assert 5 in outcomes and len(outcomes) > 2

    def test_teleport_once_consumes_three_draws(self, rng):
        a = np.random.default_rng(8)
        teleport_once(InputState.random(rng), GENERIC, 2.0, a)
        b = np.random.default_rng(8)
        b.random(3)
        assert a.random() == b.random()

    def test_trials_reproducible_and_prefix_stable(self, rng):
        inp = InputState.random(rng)
        a = run_trials(inp, GENERIC, 2.0, 500, 42)
        b = run_trials(inp, GENERIC, 2.0, 1000, 42)
        for f in ("bell_23", "bell_14", "povm_index"):
            np.testing.assert_array_equal(getattr(a, f), getattr(b, f)[:500])
        c = run_trials(inp, GENERIC, 2.0, 500, 43)
        assert not np.array_equal(a.povm_index, c.povm_index)

    def test_trials_match_state_vector_path(self, rng):
        inp = InputState.random(rng)
        uniforms = np.random.default_rng(7).random((200, 3))
        batch = run_trials(inp, GENERIC, 2.0, 200, 7)
        povm = build_povm(GENERIC, 2.0)

        class Replay:
            def __init__(self, row):
                self.values = iter(row)

            def random(self):
                return next(self.values)

        for t in range(200):
            r = teleport_once(inp, GENERIC, 2.0, Replay(uniforms[t]), povm)
            assert (int(r.bell_23), int(r.bell_14), r.povm_index) == (
                batch.bell_23[t],
                batch.bell_14[t],
                batch.povm_index[t],
            )

    def test_run_statistics(self, rng):
        inp = InputState.random(rng)
        stats = run_teleportation(inp, GENERIC, "auto", 20_000, 1)
        assert stats.x_used == min_x(GENERIC)
        p = stats.exact_success_probability
        assert abs(stats.conclusive_rate - p) <= 4 * math.sqrt(p * (1 - p) / 20_000)
        assert abs(stats.mean_conclusive_fidelity - 1) < 1e-10

    def test_resolve_x(self):
        assert resolve_x(GENERIC, "auto") == min_x(GENERIC)
        assert resolve_x(GENERIC, 2) == 2.0
        with pytest.raises(ValueError):
            resolve_x(GENERIC, "max")

    def test_x_below_min_rejected(self, rng):
        with pytest.raises(PositivityError):
            run_teleportation(InputState.random(rng), GENERIC, 1.0, 10, 0)
        with pytest.raises(ValueError):
            run_trials(InputState.random(rng), GENERIC, 2.0, 0, 0)


@given(seed=seeds)
def test_bell_regrouping_reconstructs_world(seed):
    # sum over both Bell pairs of |B23>|B14> (x) branch gives back the product state
    rng = np.random.default_rng(seed)
    inp, ch = InputState.random(rng), ChannelParams.random(rng)
    w = prepare_world(inp, ch).amplitudes
    total = np.zeros((2,) * 6, dtype=complex)
    for k23 in oracles.BELL_ORDER:
        for k14 in oracles.BELL_ORDER:
            branch = oracles.bob_branch(w, k23, k14).reshape(2, 2)
            total += np.einsum("bc,ad,ef->abcdef", oracles.BELL[k23].reshape(2, 2), oracles.BELL[k14].reshape(2, 2), branch)
    np.testing.assert_allclose(total.reshape(-1), w, atol=1e-14)
