"""
Quantum Money Module
Banknote generation and verification over a toy group action: the Fourier
scheme, the Hartley scheme, the sign distinguisher and the new verifier.

Register layout for generation and cmpIndex (2n + 1 qubits, N = 2^n):
    X register      qubits 0 .. n-1
    index register  qubits n .. 2n-1   (basis label u*N + y)
    QHT ancilla     qubit 2n
"""

import json
import logging
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from modules.errors import (
    InvalidSerialError,
    TransformDomainError,
    UnknownVariantError,
    UnreachableBranchError,
)
from modules.group_action import (
    ActionState,
    action_unitary,
    as_state,
    conditional_action,
    hartley_state,
    twist_unitary,
)
from modules import gates
from modules.statevector import (
    Circuit,
    Observable2,
    StateVector,
    fidelity,
    make_rng,
    measure_observable,
    measure_register,
    project_observable,
    register_distribution,
    run_circuit,
)
from modules.transforms_quantum import build_qft, build_qht_recursive

# Import configuration
try:
    from config import EPS_STATE, EPS_IMPOSSIBLE_BRANCH, MAX_MONEY_N
except ImportError:
    EPS_STATE = 1e-9
    EPS_IMPOSSIBLE_BRANCH = 1e-14
    MAX_MONEY_N = 256

logger = logging.getLogger(__name__)

FLAVORS = ('fourier', 'hartley')


# ==================== DATA TYPES ====================

@dataclass(frozen=True, eq=False)
class Banknote:
    """A serial number and its money state."""

    serial: int
    note: ActionState
    flavor: str

    def __post_init__(self):
        if self.flavor not in FLAVORS:
            raise UnknownVariantError(f"unknown banknote flavor: {self.flavor}")
        if not 0 <= self.serial < self.note.action.N:
            raise InvalidSerialError(f"serial {self.serial} outside Z_{self.note.action.N}")

    def to_dict(self):
        return {
            'N': self.note.action.N,
            'serial': self.serial,
            'flavor': self.flavor,
            'amplitudes': [[float(a.real), float(a.imag)] for a in self.note.amplitudes],
        }

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_json(cls, document, ga):
        data = json.loads(document) if isinstance(document, str) else document
        if data['N'] != ga.N:
            raise TransformDomainError(f"banknote for N={data['N']} used with an action of order {ga.N}")
        amps = np.array([complex(re, im) for re, im in data['amplitudes']])
        return cls(data['serial'], ActionState(ga, StateVector(amps)), data['flavor'])


@dataclass(frozen=True, eq=False)
class VerdictTrace:
    """Outcome of one verification run and the steps it took."""

    accepted: bool
    acceptance_probability: float
    post_state: ActionState = None
    step_log: list = field(default_factory=list)

    def __post_init__(self):
        if not -EPS_STATE <= self.acceptance_probability <= 1 + EPS_STATE:
            raise ValueError(f"acceptance probability {self.acceptance_probability} outside [0, 1]")
        object.__setattr__(self, 'acceptance_probability',
                           min(1.0, max(0.0, float(self.acceptance_probability))))

    def to_dict(self):
        post = None
        if self.post_state is not None:
            post = [[float(a.real), float(a.imag)] for a in self.post_state.amplitudes]
        return {
            'accepted': bool(self.accepted),
            'acceptance_probability': self.acceptance_probability,
            'post_state': post,
            'step_log': list(self.step_log),
        }

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_json(cls, document, ga):
        data = json.loads(document) if isinstance(document, str) else document
        post = None
        if data['post_state'] is not None:
            amps = np.array([complex(re, im) for re, im in data['post_state']])
            post = ActionState(ga, StateVector(amps))
        return cls(data['accepted'], data['acceptance_probability'], post, list(data['step_log']))


# ==================== SERIAL VALIDITY ====================

def is_valid_serial(N, h):
    """Odd serials admit an exact u with u*h = N/8 (mod N)."""
    return N >= 8 and 0 < h < N and h % 2 == 1


def sign_shift(N, h):
    """The u with u*h = N/8 (mod N) used by the sign distinguisher."""
    if not is_valid_serial(N, h):
        raise InvalidSerialError(f"serial {h} has no u with u*h = N/8 mod {N}")
    return (N // 8) * pow(h, -1, N) % N


def _check_action(ga):
    if ga.N < 8:
        raise TransformDomainError(f"the money scheme needs N >= 8, got {ga.N}")
    if ga.N > MAX_MONEY_N:
        raise TransformDomainError(f"N={ga.N} exceeds the money budget {MAX_MONEY_N}")


def _check_flavor(flavor):
    if flavor not in FLAVORS:
        raise UnknownVariantError(f"unknown flavor: {flavor}")


# ==================== CIRCUITS ====================

def _registers(ga):
    n = ga.n_qubits
    return tuple(range(n)), tuple(range(n, 2 * n)), 2 * n


def _index_transform(ga, flavor, inverse=False):
    """QFT (or QFT^-1) / QHT on the index register of the 2n+1 qubit layout."""
    x_qubits, idx_qubits, anc = _registers(ga)
    total = 2 * ga.n_qubits + 1
    if flavor == 'fourier':
        circuit = build_qft(ga.n_qubits).circuit
        if inverse:
            circuit = circuit.inverse()
        return circuit.embed(idx_qubits, total)
    # QHT is an involution
    return build_qht_recursive(ga.n_qubits).circuit.embed(idx_qubits + (anc,), total)


def _single_gate(total, gate):
    return Circuit(total, (gate,))


@lru_cache(maxsize=32)
def gen_circuit(ga, flavor):
    """Transform the index register, apply the conditional action, transform again."""
    _check_action(ga)
    _check_flavor(flavor)
    x_qubits, idx_qubits, _ = _registers(ga)
    total = 2 * ga.n_qubits + 1
    action = _single_gate(total, conditional_action(ga, 1, x_qubits, idx_qubits))
    return _index_transform(ga, flavor) + action + _index_transform(ga, flavor)


@lru_cache(maxsize=32)
def cmp_index_circuit(ga, flavor):
    """Phase kickback: transform, conditional action by -k, inverse transform."""
    _check_action(ga)
    _check_flavor(flavor)
    x_qubits, idx_qubits, _ = _registers(ga)
    total = 2 * ga.n_qubits + 1
    action = _single_gate(total, conditional_action(ga, -1, x_qubits, idx_qubits))
    return _index_transform(ga, flavor) + action + _index_transform(ga, flavor, inverse=True)


def _initial_joint(ga, note_amplitudes):
    amps = np.zeros(2 ** (2 * ga.n_qubits + 1), dtype=np.complex128)
    amps[:ga.N] = note_amplitudes
    return StateVector(amps)


def _drop_ancilla(ga, state):
    """Restrict a 2n+1 qubit state to its clean-ancilla half (N*N amplitudes)."""
    size = ga.N * ga.N
    residual = np.max(np.abs(state.amplitudes[size:]), initial=0.0)
    if residual > EPS_STATE:
        raise UnreachableBranchError(f"QHT ancilla left dirty (residual {residual:.3e})")
    return StateVector(state.amplitudes[:size])


@lru_cache(maxsize=32)
def prepare_joint_state(ga, flavor):
    """Pre-measurement Gen state (1/sqrt(N)) sum_h |h> (x) note(h) on 2n+1 qubits."""
    start = StateVector.basis(2 * ga.n_qubits + 1, ga.base_point)
    joint, tally = run_circuit(start, gen_circuit(ga, flavor))
    logger.debug("prepared %s joint state for N=%d (tally %d)", flavor, ga.N, tally.total)
    return joint


def joint_state_rows(ga, flavor):
    """Rows h of the (N, N) matrix whose row h is note(h)/sqrt(N)."""
    return _drop_ancilla(ga, prepare_joint_state(ga, flavor)).amplitudes.reshape(ga.N, ga.N)


# ==================== GENERATION ====================

def _generate(ga, flavor, rng_seed):
    rng = make_rng(rng_seed)
    joint = prepare_joint_state(ga, flavor)
    _, idx_qubits, _ = _registers(ga)
    attempts = 0
    while True:
        attempts += 1
        h, post, _ = measure_register(joint, list(idx_qubits), rng)
        if flavor == 'fourier' or is_valid_serial(ga.N, h):
            break
        logger.debug("discarding serial %d (no sign shift), resampling", h)
    row = post.amplitudes[h * ga.N:(h + 1) * ga.N]
    note = ActionState(ga, StateVector.from_amplitudes(row))
    logger.info("generated %s banknote with serial %d after %d attempt(s)", flavor, h, attempts)
    return Banknote(h, note, flavor)


def gen_fourier(ga, rng_seed):
    """Measure the index register of the Fourier joint state; returns (h, fourier_state(h))."""
    _check_action(ga)
    return _generate(ga, 'fourier', rng_seed)


def gen_hartley(ga, rng_seed):
    """Hartley generation; resamples until the serial is odd."""
    _check_action(ga)
    return _generate(ga, 'hartley', rng_seed)


# ==================== cmpIndex ====================

def cmp_index(ga, state, flavor):
    """
    Run cmpIndex on a note. Returns the 2n-qubit state over index (x) X with the
    index register as the high half (basis label k*N + y).
    """
    _check_action(ga)
    _check_flavor(flavor)
    note = as_state(ga, state)
    joint, _ = run_circuit(_initial_joint(ga, note.amplitudes), cmp_index_circuit(ga, flavor))
    return _drop_ancilla(ga, joint)


def cmp_index_inverse(ga, joint, flavor):
    """Undo cmp_index on a 2n-qubit index (x) X state."""
    _check_action(ga)
    full = np.zeros(2 ** (2 * ga.n_qubits + 1), dtype=np.complex128)
    full[:ga.N * ga.N] = joint.amplitudes
    out, _ = run_circuit(StateVector(full), cmp_index_circuit(ga, flavor).inverse())
    return _drop_ancilla(ga, out)


def _index_observable(ga, values):
    n = ga.n_qubits
    return Observable2.on_register(2 * n, list(range(n, 2 * n)), values)


# ==================== SIGN DISTINGUISHER ====================

@lru_cache(maxsize=64)
def distinguisher_circuit(ga, h):
    """
    Flag qubit n above the X register, with u = sign_shift(N, h):
    action by -u, H on the flag, TWIST controlled on the flag, H, action by +u.
    Acting by -u turns note(h) into the cosine state (TWIST eigenvalue +1) and
    note(-h) into the sine state (eigenvalue -1) up to phase. Leaves |0>|note(h)> alone and sends |0>|note(-h)> to |1>|note(-h)>.
    """
    _check_action(ga)
    u = sign_shift(ga.N, h)
    n = ga.n_qubits
    x_qubits = tuple(range(n))
    flag = n
    sequence = (
        action_unitary(ga, -u, x_qubits),
        gates.hadamard(flag),
        twist_unitary(ga, x_qubits, controls=((flag, 1),)),
        gates.hadamard(flag),
        action_unitary(ga, u, x_qubits),
    )
    return Circuit(n + 1, sequence)


def _distinguisher_output(ga, state, h):
    note = as_state(ga, state)
    amps = np.zeros(2 * ga.N, dtype=np.complex128)
    amps[:ga.N] = note.amplitudes
    out, _ = run_circuit(StateVector(amps), distinguisher_circuit(ga, h))
    return out


def distinguish_sign(ga, state, h, rng_seed=0):
    """
    Measure the distinguisher's flag. Returns (bit, post_state): bit 0 for
    note(h), bit 1 for note(-h); the note register is returned undisturbed.
    """
    out = _distinguisher_output(ga, state, h)
    bit, post, _ = measure_register(out, [ga.n_qubits], rng_seed)
    amps = post.amplitudes[bit * ga.N:(bit + 1) * ga.N]
    logger.debug("sign distinguisher for h=%d read bit %d", h, bit)
    return bit, ActionState(ga, StateVector.from_amplitudes(amps))


def _flag_probability_zero(ga, state, h):
    out = _distinguisher_output(ga, state, h)
    return float(register_distribution(out, [ga.n_qubits])[0])


# ==================== VERIFICATION ====================

def check_support(ga, ambient_state, rng_seed):
    """
    Support test over an ambient label space of size 2N (labels >= N lie outside X):
    a flag qubit is set when the label's top bit is 1 and then measured.

    Returns:
        tuple: (passed, post_state restricted to X or None, pass probability)
    """
    n = ga.n_qubits
    if ambient_state.n_qubits != n + 1:
        raise TransformDomainError(f"ambient state must have {n + 1} qubits, got {ambient_state.n_qubits}")
    amps = np.zeros(2 ** (n + 2), dtype=np.complex128)
    amps[:2 * ga.N] = ambient_state.amplitudes
    flagged, _ = run_circuit(StateVector(amps), Circuit(n + 2, (gates.pauli_x(n + 1, controls=((n, 1),)),)))
    bit, post, probs = measure_register(flagged, [n + 1], rng_seed)
    if bit:
        return False, None, float(probs[0])
    return True, ActionState(ga, StateVector.from_amplitudes(post.amplitudes[:ga.N])), float(probs[0])


def _ver_new_branches(ga, h, state):
    """
    Deterministic part of the new verifier.

    Returns:
        tuple: (p0, joint state after Step 2, repaired state after Step 5 or None, P(bit 0))
    """
    N = ga.N
    joint = cmp_index(ga, state, 'hartley')
    obs = _index_observable(ga, {h, N - h})
    p0 = float(np.sum(joint.probabilities()[obs.mask(joint.dim)]))
    if p0 < EPS_IMPOSSIBLE_BRANCH:
        return p0, joint, None, 0.0
    _, projected = project_observable(joint, obs, 0)
    repaired = _uncompute_index(ga, h, projected)
    return p0, joint, repaired, _flag_probability_zero(ga, repaired, h)


def _uncompute_index(ga, h, projected):
    """Step 5: undo cmpIndex and check the index register is back in |0>."""
    N = ga.N
    back = cmp_index_inverse(ga, projected, 'hartley')
    rows = back.amplitudes.reshape(N, N)
    residual = np.max(np.abs(rows[1:]), initial=0.0)
    if residual > EPS_STATE:
        raise UnreachableBranchError(f"index register not cleared after uncompute (residual {residual:.3e})")
    repaired = StateVector.from_amplitudes(rows[0])
    span = np.column_stack([hartley_state(ga, h).amplitudes, hartley_state(ga, -h).amplitudes])
    leak = np.linalg.norm(repaired.amplitudes - span @ (span.conj().T @ repaired.amplitudes))
    if leak > EPS_STATE:
        raise UnreachableBranchError(f"state left span{{note(h), note(-h)}} (leak {leak:.3e})")
    return ActionState(ga, repaired)


def ver_new(ga, h, state, rng_seed):
    """
    Verify a Hartley banknote without the Fourier readout

    Args:
        ga: the group action
        h: claimed serial (must be odd)
        state: the note (ActionState or StateVector of dimension N)
        rng_seed: seed or Generator for both measurements

    Returns:
        VerdictTrace: accepted with probability |<state|note(h)>|^2; accepted
        runs end in note(h)
    """
    _check_action(ga)
    if not is_valid_serial(ga.N, h):
        raise InvalidSerialError(f"serial {h} is not a valid Hartley serial for N={ga.N}")
    rng = make_rng(rng_seed)
    log = [{'step': 1, 'name': 'support', 'result': 'pass'}]

    p0, joint, repaired, p_bit0 = _ver_new_branches(ga, h, state)
    acceptance = p0 * p_bit0
    log.append({'step': 2, 'name': 'cmp_index', 'result': 'applied'})

    outcome, _, _ = measure_observable(joint, _index_observable(ga, {h, ga.N - h}), rng)
    log.append({'step': 3, 'name': 'measure_index_pair', 'outcome': outcome, 'prob0': p0})
    if outcome == 1:
        log.append({'step': 4, 'name': 'reject', 'reason': 'index outside {h, -h}'})
        logger.info("ver_new rejected serial %d at the index measurement", h)
        return VerdictTrace(False, acceptance, None, log)

    log.append({'step': 5, 'name': 'uncompute', 'result': 'index cleared'})
    bit, post = distinguish_sign(ga, repaired, h, rng)
    log.append({'step': 6, 'name': 'distinguish_sign', 'bit': bit, 'prob0': p_bit0})
    if bit == 1:
        logger.info("ver_new rejected serial %d at the sign check", h)
        return VerdictTrace(False, acceptance, None, log)
    logger.info("ver_new accepted serial %d", h)
    return VerdictTrace(True, acceptance, post, log)


def acceptance_probability(ga, h, state):
    """Exact acceptance probability of ver_new, computed through the circuits."""
    _check_action(ga)
    if not is_valid_serial(ga.N, h):
        raise InvalidSerialError(f"serial {h} is not a valid Hartley serial for N={ga.N}")
    p0, _, _, p_bit0 = _ver_new_branches(ga, h, state)
    return p0 * p_bit0


def sample_ver_new(ga, h, state, shots, rng_seed):
    """
    Run ver_new on `shots` fresh copies of the same state, one generator shared
    across the runs.

    Returns:
        tuple: (accepted count, post-states of the accepted runs)
    """
    rng = make_rng(rng_seed)
    accepted = []
    for _ in range(shots):
        verdict = ver_new(ga, h, state, rng)
        if verdict.accepted:
            accepted.append(verdict.post_state)
    logger.info("ver_new accepted %d of %d copies for serial %d", len(accepted), shots, h)
    return len(accepted), accepted


def ver_fourier(ga, h, state, rng_seed):
    """Fourier verifier: read the serial out with cmpIndex and compare."""
    _check_action(ga)
    if not 0 <= h < ga.N:
        raise InvalidSerialError(f"serial {h} outside Z_{ga.N}")
    joint = cmp_index(ga, state, 'fourier')
    n = ga.n_qubits
    measured, post, probs = measure_register(joint, list(range(n, 2 * n)), rng_seed)
    log = [
        {'step': 1, 'name': 'cmp_index', 'result': 'applied'},
        {'step': 2, 'name': 'measure_index', 'outcome': measured},
    ]
    accepted = measured == h
    note = None
    if accepted:
        row = post.amplitudes[h * ga.N:(h + 1) * ga.N]
        note = ActionState(ga, StateVector.from_amplitudes(row))
    logger.info("ver_fourier %s serial %d", 'accepted' if accepted else 'rejected', h)
    return VerdictTrace(accepted, float(probs[h]), note, log)


def tamper(note, rng_seed):
    """A random real state orthogonal to the note (a forgery the verifier must reject)."""
    rng = make_rng(rng_seed)
    noise = rng.standard_normal(note.action.N).astype(np.complex128)
    noise -= np.vdot(note.amplitudes, noise) * note.amplitudes
    return ActionState.from_amplitudes(note.action, noise)


def note_fidelity(a, b):
    return fidelity(a.state if isinstance(a, ActionState) else a, b.state if isinstance(b, ActionState) else b)
