import math

import numpy as np
import pytest
from scipy.stats import chisquare

from modules.errors import InvalidSerialError, TransformDomainError, UnknownVariantError
from modules.group_action import ActionState, action_unitary, fourier_state, hartley_state, twist_unitary
from modules.quantum_money import (
    Banknote,
    VerdictTrace,
    acceptance_probability,
    check_support,
    cmp_index,
    cmp_index_inverse,
    distinguish_sign,
    distinguisher_circuit,
    gen_fourier,
    gen_hartley,
    is_valid_serial,
    joint_state_rows,
    note_fidelity,
    sample_ver_new,
    sign_shift,
    tamper,
    ver_fourier,
    ver_new,
)
from modules.statevector import StateVector, apply_gate, register_distribution, run_circuit


def index_distribution(ga, joint):
    n = ga.n_qubits
    return register_distribution(joint, list(range(n, 2 * n)))


def mixture(ga, weights):
    """Normalized sum of weight * hartley_state(h) for h -> weight."""
    amps = sum(w * hartley_state(ga, h).amplitudes for h, w in weights.items())
    return ActionState.from_amplitudes(ga, amps)


# ==================== GENERATION ====================

@pytest.mark.parametrize('flavor, builder', [('fourier', fourier_state), ('hartley', hartley_state)])
def test_joint_state_rows(toy_action, flavor, builder):
    ga = toy_action(16)
    rows = joint_state_rows(ga, flavor)
    for h in range(16):
        np.testing.assert_allclose(rows[h], builder(ga, h).amplitudes / 4, atol=1e-10)


def test_gen_fourier_returns_matching_note(toy_action):
    ga = toy_action(16)
    for seed in range(5):
        banknote = gen_fourier(ga, seed)
        assert banknote.flavor == 'fourier'
        np.testing.assert_allclose(banknote.note.amplitudes, fourier_state(ga, banknote.serial).amplitudes,
                                   atol=1e-10)


def test_gen_hartley_returns_odd_serial(toy_action):
    ga = toy_action(32)
    for seed in range(10):
        banknote = gen_hartley(ga, seed)
        assert is_valid_serial(32, banknote.serial)
        np.testing.assert_allclose(banknote.note.amplitudes, hartley_state(ga, banknote.serial).amplitudes,
                                   atol=1e-10)


def test_generation_is_seeded(toy_action):
    ga = toy_action(64)
    assert gen_hartley(ga, 21).serial == gen_hartley(ga, 21).serial


@pytest.mark.slow
def test_fourier_serials_uniform(toy_action):
    ga = toy_action(8)
    trials = 10_000
    counts = np.bincount([gen_fourier(ga, seed).serial for seed in range(trials)], minlength=8)
    sigma = math.sqrt(trials * (1 / 8) * (7 / 8))
    assert np.all(np.abs(counts - trials / 8) <= 5 * sigma)


@pytest.mark.slow
def test_hartley_serials_uniform_over_odd_values(toy_action):
    ga = toy_action(16)
    counts = np.bincount([gen_hartley(ga, seed).serial for seed in range(4000)], minlength=16)
    assert counts[::2].sum() == 0
    _, p_value = chisquare(counts[1::2])
    assert p_value > 1e-3


def test_money_needs_eight_labels(toy_action):
    with pytest.raises(TransformDomainError):
        gen_fourier(toy_action(4), 0)


# ==================== cmpIndex ====================

@pytest.mark.parametrize('h', [0, 3, 10])
def test_fourier_cmp_index_reads_serial(toy_action, h):
    ga = toy_action(16)
    joint = cmp_index(ga, fourier_state(ga, h), 'fourier')
    probs = index_distribution(ga, joint)
    assert probs[h] == pytest.approx(1, abs=1e-10)
    np.testing.assert_allclose(joint.amplitudes[h * 16:(h + 1) * 16], fourier_state(ga, h).amplitudes,
                               atol=1e-10)


@pytest.mark.parametrize('h', [1, 5, 7])
def test_hartley_cmp_index_splits_between_signs(toy_action, h):
    ga = toy_action(16)
    probs = index_distribution(ga, cmp_index(ga, hartley_state(ga, h), 'hartley'))
    assert probs[h] == pytest.approx(0.5, abs=1e-10)
    assert probs[16 - h] == pytest.approx(0.5, abs=1e-10)


def test_cmp_index_inverse_restores_note(toy_action, random_state):
    ga = toy_action(8)
    psi = random_state(3, seed=4)
    for flavor in ('fourier', 'hartley'):
        back = cmp_index_inverse(ga, cmp_index(ga, psi, flavor), flavor)
        np.testing.assert_allclose(back.amplitudes[:8], psi.amplitudes, atol=1e-10)
        assert np.max(np.abs(back.amplitudes[8:])) <= 1e-10


def test_unknown_flavor_rejected(toy_action):
    ga = toy_action(8)
    with pytest.raises(UnknownVariantError):
        cmp_index(ga, hartley_state(ga, 1), 'walsh')


# ==================== SIGN DISTINGUISHER ====================

def test_sign_shift_value():
    assert sign_shift(16, 3) == 6
    assert (sign_shift(64, 5) * 5) % 64 == 8


@pytest.mark.parametrize('N', [8, 16, 64])
def test_distinguisher_is_deterministic(toy_action, N):
    ga = toy_action(N)
    for h in range(1, N, 2):
        bit, post = distinguish_sign(ga, hartley_state(ga, h), h, rng_seed=h)
        assert bit == 0
        assert note_fidelity(post, hartley_state(ga, h)) == pytest.approx(1, abs=1e-9)
        bit, _ = distinguish_sign(ga, hartley_state(ga, -h), h, rng_seed=h)
        assert bit == 1


def flag_distribution(ga, state, h):
    amps = np.zeros(2 * ga.N, dtype=np.complex128)
    amps[:ga.N] = state.amplitudes
    out, _ = run_circuit(StateVector(amps), distinguisher_circuit(ga, h))
    return register_distribution(out, [ga.n_qubits])


@pytest.mark.parametrize('N', [16, 64])
def test_distinguisher_flag_is_certain(toy_action, N):
    ga = toy_action(N)
    for h in range(1, N, 2):
        assert flag_distribution(ga, hartley_state(ga, h), h)[0] == pytest.approx(1, abs=1e-12)
        assert flag_distribution(ga, hartley_state(ga, -h), h)[1] == pytest.approx(1, abs=1e-12)


@pytest.mark.parametrize('h', [1, 3, 5])
def test_shift_turns_notes_into_cosine_and_sine_states(toy_action, h):
    ga = toy_action(16)
    shift = action_unitary(ga, -sign_shift(16, h))
    plus = fourier_state(ga, h).amplitudes
    minus = fourier_state(ga, -h).amplitudes
    cosine = apply_gate(hartley_state(ga, h).state, shift)
    sine = apply_gate(hartley_state(ga, -h).state, shift)
    np.testing.assert_allclose(cosine.amplitudes, (plus + minus) / math.sqrt(2), atol=1e-12)
    np.testing.assert_allclose(sine.amplitudes, 1j * (plus - minus) / math.sqrt(2), atol=1e-12)
    twist = twist_unitary(ga)
    np.testing.assert_allclose(apply_gate(cosine, twist).amplitudes, cosine.amplitudes, atol=1e-12)
    np.testing.assert_allclose(apply_gate(sine, twist).amplitudes, -sine.amplitudes, atol=1e-12)


def test_distinguisher_superposition_probabilities(toy_action):
    ga = toy_action(16)
    h = 5
    alpha, beta = 0.6, 0.8j
    state = mixture(ga, {h: alpha, -h: beta})
    amps = np.zeros(32, dtype=np.complex128)
    amps[:16] = state.amplitudes
    out, _ = run_circuit(StateVector(amps), distinguisher_circuit(ga, h))
    probs = register_distribution(out, [4])
    assert probs[0] == pytest.approx(0.36, abs=1e-10)
    assert probs[1] == pytest.approx(0.64, abs=1e-10)


def test_distinguisher_circuit_inverse(toy_action, random_state):
    ga = toy_action(16)
    circuit = distinguisher_circuit(ga, 3)
    psi = random_state(5, seed=2)
    out, _ = run_circuit(psi, circuit + circuit.inverse())
    np.testing.assert_allclose(out.amplitudes, psi.amplitudes, atol=1e-12)


# ==================== VERIFICATION ====================

@pytest.mark.parametrize('h', [1, 3, 13])
def test_genuine_note_accepted(toy_action, h):
    ga = toy_action(16)
    note = hartley_state(ga, h)
    verdict = ver_new(ga, h, note, rng_seed=0)
    assert verdict.accepted
    assert verdict.acceptance_probability == pytest.approx(1, abs=1e-9)
    assert note_fidelity(verdict.post_state, note) == pytest.approx(1, abs=1e-9)
    assert [entry['step'] for entry in verdict.step_log] == [1, 2, 3, 5, 6]


def test_other_serial_rejected(toy_action):
    ga = toy_action(16)
    note = hartley_state(ga, 3)
    for claimed in (1, 5, 7, 9, 11, 15):
        assert acceptance_probability(ga, claimed, note) == pytest.approx(0, abs=1e-12)
        assert not ver_new(ga, claimed, note, rng_seed=claimed).accepted


def test_opposite_sign_rejected(toy_action):
    ga = toy_action(16)
    note = hartley_state(ga, -3)
    assert acceptance_probability(ga, 3, note) == pytest.approx(0, abs=1e-12)
    verdict = ver_new(ga, 3, note, rng_seed=1)
    assert not verdict.accepted
    assert verdict.step_log[-1]['name'] == 'distinguish_sign'


def test_mixture_accepted_with_weight_of_serial(toy_action):
    ga = toy_action(16)
    state = mixture(ga, {3: 0.5, -3: 0.5, 6: math.sqrt(0.5)})
    assert acceptance_probability(ga, 3, state) == pytest.approx(0.25, abs=1e-9)


def test_acceptance_equals_overlap_for_random_states(toy_action, random_state):
    ga = toy_action(64)
    worst = 0.0
    for seed in range(50):
        psi = random_state(6, seed=seed)
        h = 2 * (seed % 32) + 1
        expected = note_fidelity(psi, hartley_state(ga, h))
        worst = max(worst, abs(acceptance_probability(ga, h, psi) - expected))
    assert worst <= 1e-9


@pytest.mark.slow
def test_sign_mixture_accept_rate_within_five_sigma(toy_action):
    ga = toy_action(16)
    state = mixture(ga, {5: 0.6, -5: 0.8})
    shots = 10_000
    accepted, posts = sample_ver_new(ga, 5, state, shots, rng_seed=4)
    sigma = math.sqrt(shots * 0.36 * 0.64)
    assert abs(accepted - 0.36 * shots) <= 5 * sigma
    assert min(note_fidelity(post, hartley_state(ga, 5)) for post in posts) >= 1 - 1e-9


@pytest.mark.slow
def test_sampled_acceptance_within_five_sigma(toy_action, random_state):
    ga = toy_action(16)
    shots = 2000
    for seed in range(4):
        psi = random_state(4, seed=1000 + seed)
        h = 2 * seed + 1
        expected = note_fidelity(psi, hartley_state(ga, h))
        accepted, _ = sample_ver_new(ga, h, psi, shots, rng_seed=seed)
        sigma = math.sqrt(shots * expected * (1 - expected)) + 1
        assert abs(accepted - shots * expected) <= 5 * sigma


def test_accepted_runs_end_in_note(toy_action, random_state):
    ga = toy_action(16)
    accepted = 0
    for seed in range(40):
        h = 2 * (seed % 8) + 1
        noise = random_state(4, seed=seed).amplitudes
        psi = StateVector.from_amplitudes(noise + 2 * hartley_state(ga, h).amplitudes)
        verdict = ver_new(ga, h, psi, rng_seed=seed)
        if verdict.accepted:
            accepted += 1
            assert note_fidelity(verdict.post_state, hartley_state(ga, h)) >= 1 - 1e-9
    assert accepted >= 10


def test_tampered_note_rejected(toy_action):
    ga = toy_action(32)
    banknote = gen_hartley(ga, 3)
    forged = tamper(banknote.note, rng_seed=8)
    assert note_fidelity(forged, banknote.note) == pytest.approx(0, abs=1e-12)
    assert not ver_new(ga, banknote.serial, forged, rng_seed=0).accepted


def test_even_serial_rejected(toy_action):
    ga = toy_action(16)
    with pytest.raises(InvalidSerialError):
        ver_new(ga, 4, hartley_state(ga, 4), rng_seed=0)
    with pytest.raises(InvalidSerialError):
        sign_shift(16, 2)


def test_fourier_verifier(toy_action):
    ga = toy_action(16)
    banknote = gen_fourier(ga, 5)
    verdict = ver_fourier(ga, banknote.serial, banknote.note, rng_seed=0)
    assert verdict.accepted
    assert note_fidelity(verdict.post_state, banknote.note) == pytest.approx(1, abs=1e-9)
    wrong = (banknote.serial + 1) % 16
    assert not ver_fourier(ga, wrong, banknote.note, rng_seed=0).accepted


def test_support_check(toy_action):
    ga = toy_action(8)
    inside = StateVector.from_amplitudes(np.r_[hartley_state(ga, 1).amplitudes, np.zeros(8)])
    passed, post, prob = check_support(ga, inside, rng_seed=0)
    assert passed and prob == pytest.approx(1)
    assert note_fidelity(post, hartley_state(ga, 1)) == pytest.approx(1)

    outside = StateVector.basis(4, 12)
    passed, post, prob = check_support(ga, outside, rng_seed=0)
    assert not passed and post is None and prob == pytest.approx(0)

    half = StateVector.from_amplitudes([1] + [0] * 7 + [1] + [0] * 7)
    assert check_support(ga, half, rng_seed=0)[2] == pytest.approx(0.5)


# ==================== SERIALIZATION ====================

def test_banknote_json_round_trip(toy_action):
    ga = toy_action(16)
    banknote = gen_hartley(ga, 2)
    restored = Banknote.from_json(banknote.to_json(), ga)
    assert restored.serial == banknote.serial
    assert restored.flavor == 'hartley'
    np.testing.assert_allclose(restored.note.amplitudes, banknote.note.amplitudes)


def test_banknote_json_checks_order(toy_action):
    banknote = gen_hartley(toy_action(16), 2)
    with pytest.raises(TransformDomainError):
        Banknote.from_json(banknote.to_json(), toy_action(32))


def test_verdict_json_round_trip(toy_action):
    ga = toy_action(16)
    verdict = ver_new(ga, 5, hartley_state(ga, 5), rng_seed=0)
    restored = VerdictTrace.from_json(verdict.to_json(), ga)
    assert restored.accepted == verdict.accepted
    assert restored.acceptance_probability == verdict.acceptance_probability
    assert restored.step_log == verdict.step_log
    np.testing.assert_allclose(restored.post_state.amplitudes, verdict.post_state.amplitudes)
