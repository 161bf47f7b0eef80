"""
Quantum Walk Serial Recovery
Cayley-graph walks over the group action, the discrete-time walk isometry,
phase estimation on the walk, and recovery of a banknote's serial number.
"""

import json
import logging
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.linalg import expm

from modules import gates
from modules.errors import (
    AmbiguousSerialError,
    InvalidSerialError,
    InvalidWalkSpecError,
    MemoryBudgetError,
    UnreachableBranchError,
)
from modules.group_action import action_adjacency_matrix, as_state, ActionState, fourier_basis
from modules.quantum_money import distinguish_sign, is_valid_serial
from modules.statevector import (
    Circuit,
    StateVector,
    ensure_budget,
    make_rng,
    register_distribution,
    run_circuit,
)
from modules.transforms_quantum import build_qft

# Import configuration
try:
    from config import EPS_STATE, MAX_DENSE_DIM, MAX_GENERATORS, MAX_PE_BITS
except ImportError:
    EPS_STATE = 1e-9
    MAX_DENSE_DIM = 4096
    MAX_GENERATORS = 16
    MAX_PE_BITS = 12

logger = logging.getLogger(__name__)

DEFAULT_TIME = math.pi / 2


# ==================== WALK PARAMETERS ====================

@dataclass(frozen=True)
class WalkSpec:
    """Symmetric generating set Q of Z_N, evolution time t and exponent sign (+1: e^{iAt})."""

    N: int
    generators: tuple
    t: float = DEFAULT_TIME
    sign: int = 1

    def __post_init__(self):
        N = int(self.N)
        generators = tuple(sorted({int(q) % N for q in self.generators}))
        if not generators:
            raise InvalidWalkSpecError("generating set must not be empty")
        if len(generators) > MAX_GENERATORS:
            raise InvalidWalkSpecError(f"|Q| = {len(generators)} exceeds {MAX_GENERATORS}")
        missing = [q for q in generators if (-q) % N not in generators]
        if missing:
            raise InvalidWalkSpecError(f"generating set is not symmetric: -q missing for {missing}")
        if self.sign not in (1, -1):
            raise InvalidWalkSpecError(f"sign must be +1 or -1, got {self.sign}")
        object.__setattr__(self, 'N', N)
        object.__setattr__(self, 'generators', generators)
        object.__setattr__(self, 't', float(self.t))

    @classmethod
    def for_step(cls, N, u, t=DEFAULT_TIME):
        """Q = {u, -u}"""
        return cls(N, (u, -u), t)

    def with_time(self, t):
        return WalkSpec(self.N, self.generators, t, self.sign)


def adjacency_spectrum(spec):
    """
    Closed-form Cayley-graph eigenvalues

    Returns:
        list: (h, lambda_h) with lambda_h = sum_q cos(2 pi h q / N)
    """
    return list(enumerate(_eigenvalues(spec).tolist()))


def _eigenvalues(spec):
    h = np.arange(spec.N)
    total = np.zeros(spec.N)
    for q in spec.generators:
        total += np.cos(2 * np.pi * ((h * q) % spec.N) / spec.N)
    return total


def eigenphase(spec, h):
    """Phase sign * lambda_h * t / (2 pi), reduced to [0, 1)."""
    return float(np.mod(spec.sign * _eigenvalues(spec)[h % spec.N] * spec.t / (2 * np.pi), 1.0))


def adjacency_matrix(ga, spec):
    """Edge-enumeration adjacency matrix; never touches the Fourier basis."""
    _check_spec(ga, spec)
    return action_adjacency_matrix(ga, spec.generators)


def _check_spec(ga, spec):
    if spec.N != ga.N:
        raise InvalidWalkSpecError(f"walk over Z_{spec.N} used with an action of order {ga.N}")
    if ga.N > MAX_DENSE_DIM:
        raise MemoryBudgetError(f"N={ga.N} exceeds the dense budget {MAX_DENSE_DIM}")


# ==================== CONTINUOUS-TIME WALK ====================

@dataclass(frozen=True, eq=False)
class WalkOperator:
    """A realized walk: the dense unitary plus its eigenbasis when known."""

    spec: WalkSpec
    mode: str
    matrix: np.ndarray
    eigenbasis: np.ndarray = None
    eigenvalues: np.ndarray = None

    def power(self, k):
        """W^k, by scaling the eigenphases when the spectral form is available."""
        if self.eigenbasis is None:
            return np.linalg.matrix_power(self.matrix, k)
        phases = np.exp(1j * self.spec.sign * self.spec.t * k * self.eigenvalues)
        return (self.eigenbasis * phases) @ self.eigenbasis.conj().T

    def unitarity_error(self):
        dim = self.matrix.shape[0]
        return float(np.max(np.abs(self.matrix.conj().T @ self.matrix - np.eye(dim))))


@lru_cache(maxsize=128)
def exact_ctqw(ga, spec):
    """e^{sign i A t} from the spectral sum over the action's Fourier states."""
    _check_spec(ga, spec)
    basis = fourier_basis(ga)
    eigenvalues = _eigenvalues(spec)
    phases = np.exp(1j * spec.sign * spec.t * eigenvalues)
    matrix = (basis * phases) @ basis.conj().T
    matrix.setflags(write=False)
    logger.debug("built exact walk for N=%d, Q=%s, t=%.4f", ga.N, spec.generators, spec.t)
    return WalkOperator(spec, 'exact_ctqw', matrix, basis, eigenvalues)


def brute_force_ctqw(ga, spec):
    """Matrix exponential of the enumerated adjacency matrix (independent oracle)."""
    return expm(1j * spec.sign * spec.t * adjacency_matrix(ga, spec))


# ==================== DISCRETE-TIME ISOMETRY ====================

@dataclass(frozen=True, eq=False)
class WalkIsometry:
    """
    Circuits for the discrete-time walk.

    Layout: (y, b) on qubits 0..n, (y', b') on n+1..2n+1, the q register above.
    """

    spec: WalkSpec
    n: int
    q_width: int
    prepare: Circuit
    reflection: Circuit
    step: Circuit

    @property
    def n_qubits(self):
        return 2 * self.n + 2 + self.q_width

    @property
    def y_qubits(self):
        return tuple(range(self.n))

    @property
    def b_qubit(self):
        return self.n

    @property
    def y2_qubits(self):
        return tuple(range(self.n + 1, 2 * self.n + 1))

    @property
    def b2_qubit(self):
        return 2 * self.n + 1

    @property
    def q_qubits(self):
        return tuple(range(2 * self.n + 2, 2 * self.n + 2 + self.q_width))


def _uniform_preparation(size, width):
    """Householder reflection on `width` qubits sending |0> to the uniform state over 0..size-1."""
    dim = 2 ** width
    target = np.zeros(dim)
    target[:size] = 1 / math.sqrt(size)
    v = target.copy()
    v[0] -= 1.0
    norm = np.linalg.norm(v)
    if norm < 1e-15:
        return np.eye(dim)
    v /= norm
    return np.eye(dim) - 2 * np.outer(v, v)


def build_walk_isometry(ga, spec):
    """
    Build U_T, the reflection U_T R0 U_T^dagger and the walk step i S (2TT^dagger - 1).

    Returns:
        WalkIsometry: the three circuits and the register layout
    """
    _check_spec(ga, spec)
    Q = spec.generators
    n = ga.n_qubits
    N = ga.N
    q_width = max(1, math.ceil(math.log2(len(Q))))
    total = 2 * n + 2 + q_width
    ensure_budget(total)

    y = tuple(range(n))
    b = n
    y2 = tuple(range(n + 1, 2 * n + 1))
    b2 = 2 * n + 1
    q = tuple(range(2 * n + 2, total))
    when_b0 = ((b, 0),)

    act_tables = [ga.act_table(gen) for gen in Q]

    # V_1: y' ^= Q[i] * y
    size_y = N
    size_q = 2 ** q_width
    v1 = np.arange(size_y * size_y * size_q, dtype=np.int64)
    y_val = v1 % size_y
    y2_val = (v1 // size_y) % size_y
    q_val = v1 // (size_y * size_y)
    moved = y2_val.copy()
    for index, table in enumerate(act_tables):
        mask = q_val == index
        moved[mask] = y2_val[mask] ^ table[y_val[mask]]
    v1_table = y_val + size_y * moved + size_y * size_y * q_val

    # V_2: q ^= the index i with Q[i] * y = y'
    recovered = np.zeros((size_y, size_y), dtype=np.int64)
    hits = np.zeros((size_y, size_y), dtype=np.int64)
    labels = np.arange(size_y)
    for index, table in enumerate(act_tables):
        recovered[labels, table] = index
        hits[labels, table] += 1
    if np.any(hits > 1):
        raise UnreachableBranchError("two generators map the same label to the same neighbour")
    v2_table = y_val + size_y * y2_val + size_y * size_y * (q_val ^ recovered[y_val, y2_val])

    prep_gates = (
        gates.register_unitary('V_Q', q, _uniform_preparation(len(Q), q_width), controls=when_b0),
        gates.permutation('V_1', y + y2 + q, v1_table, controls=when_b0),
        gates.permutation('V_2', y + y2 + q, v2_table, controls=when_b0),
        gates.pauli_x(b2, controls=((b, 1),)),
    )
    prepare = Circuit(total, prep_gates)

    # R0 = 2|0><0|_q (x) 1 (x) |00><00|_{y'b'} - 1
    reflect_targets = y2 + (b2,) + q
    phases = -np.ones(2 ** len(reflect_targets))
    phases[0] = 1.0
    r0 = Circuit(total, (gates.register_diagonal('REFLECT', reflect_targets, phases),))
    reflection = prepare.inverse() + r0 + prepare

    swaps = tuple(gates.swap(a, c) for a, c in zip(y + (b,), y2 + (b2,)))
    step = reflection + Circuit(total, swaps + (gates.global_phase(1j),))

    logger.debug("built walk isometry for N=%d, |Q|=%d on %d qubits", N, len(Q), total)
    return WalkIsometry(spec, n, q_width, prepare, reflection, step)


def walk_isometry_matrix(ga, spec):
    """
    Dense T: C^{2N} -> C^{2N} (x) C^{2N}, T|y,b> = |y,b>|phi_yb>.
    Row label (y'b')*2N + (y b) with b the top bit of each half.
    """
    _check_spec(ga, spec)
    N = ga.N
    half = 2 * N
    T = np.zeros((half * half, half))
    weight = 1 / math.sqrt(len(spec.generators))
    for yv in range(N):
        for gen in spec.generators:
            neighbour = int(ga.act_table(gen)[yv])
            T[neighbour * half + yv, yv] = weight
        T[N * half + (N + yv), N + yv] = 1.0
    return T


# ==================== PHASE ESTIMATION ====================

@dataclass(frozen=True, eq=False)
class PhaseEstimate:
    theta: float
    outcome: int
    distribution: np.ndarray
    post_state: StateVector


def phase_estimation_circuit(walk, n, precision_bits):
    """Controls on qubits n..n+p-1: H, controlled W^(2^k), inverse QFT."""
    controls = list(range(n, n + precision_bits))
    total = n + precision_bits
    system = tuple(range(n))
    sequence = [gates.hadamard(c) for c in controls]
    for k, control in enumerate(controls):
        sequence.append(gates.register_unitary('CW', system, walk.power(2 ** k), controls=((control, 1),)))
    circuit = Circuit(total, tuple(sequence))
    return circuit + build_qft(precision_bits).circuit.inverse().embed(controls, total)


def phase_estimation_run(ga, spec, state, precision_bits, rng_seed):
    """
    Phase estimation of the walk e^{sign i A t} on `state`

    Returns:
        PhaseEstimate: measured theta = m / 2^p, the outcome distribution and
        the post-measurement system state
    """
    if precision_bits < 1:
        raise InvalidWalkSpecError(f"phase estimation needs at least one precision bit, got {precision_bits}")
    if precision_bits > MAX_PE_BITS:
        raise MemoryBudgetError(f"{precision_bits} precision bits exceed the budget of {MAX_PE_BITS}")
    system = as_state(ga, state)
    n = ga.n_qubits
    ensure_budget(n + precision_bits)
    walk = exact_ctqw(ga, spec)

    amps = np.zeros(2 ** (n + precision_bits), dtype=np.complex128)
    amps[:ga.N] = system.amplitudes
    out, _ = run_circuit(StateVector(amps), phase_estimation_circuit(walk, n, precision_bits))

    controls = list(range(n, n + precision_bits))
    distribution = register_distribution(out, controls)
    rng = make_rng(rng_seed)
    outcome = int(rng.choice(distribution.size, p=distribution / distribution.sum()))
    row = out.amplitudes.reshape(2 ** precision_bits, ga.N)[outcome]
    post = StateVector.from_amplitudes(row)
    theta = outcome / 2 ** precision_bits
    logger.debug("phase estimation (Q=%s, p=%d) read theta=%.6f", spec.generators, precision_bits, theta)
    return PhaseEstimate(theta, outcome, distribution, post)


def phase_estimate(ga, spec, state, precision_bits, rng_seed):
    """Measured p-bit phase in [0, 1)."""
    return phase_estimation_run(ga, spec, state, precision_bits, rng_seed).theta


# ==================== SERIAL RECOVERY ====================

@dataclass(frozen=True, eq=False)
class SerialEstimate:
    estimates: list
    recovered_h: int
    sign_resolved: bool
    candidates: tuple = ()
    scores: dict = field(default_factory=dict)
    post_state: ActionState = None

    def to_dict(self):
        return {
            'estimates': [[int(u), float(theta)] for u, theta in self.estimates],
            'recovered_h': int(self.recovered_h),
            'sign_resolved': bool(self.sign_resolved),
            'candidates': [int(c) for c in self.candidates],
        }


def default_schedule(N):
    """u = 1, 2, 4, ..., N/2"""
    return [2 ** j for j in range(N.bit_length() - 1)]


def _circular_distance(a, b):
    d = np.abs(np.mod(a - b, 1.0))
    return np.minimum(d, 1.0 - d)


def score_candidates(N, estimates, t=DEFAULT_TIME):
    """Sum over the schedule of squared circular phase errors, for every h' in Z_N."""
    scores = np.zeros(N)
    for u, theta in estimates:
        spec = WalkSpec.for_step(N, u, t)
        predicted = np.mod(_eigenvalues(spec) * spec.t / (2 * np.pi), 1.0)
        scores += _circular_distance(predicted, theta) ** 2
    return scores


def recover_serial(ga, note, rng_seed, precision_bits=9, t=DEFAULT_TIME, schedule=None):
    """
    Recover the serial of a Hartley banknote

    Args:
        ga: the group action
        note: hartley_state(h) for some odd h
        rng_seed: seed or Generator shared by all measurements
        precision_bits: phase-estimation control qubits p
        t: walk time; pi/2 keeps every eigenphase cos(.)/2 inside one period
        schedule: the u values (default 1, 2, 4, ..., N/2)

    Returns:
        SerialEstimate: per-u phases, the recovered serial and the untouched note
    """
    N = ga.N
    rng = make_rng(rng_seed)
    schedule = default_schedule(N) if schedule is None else list(schedule)
    current = as_state(ga, note)

    estimates = []
    for u in schedule:
        spec = WalkSpec.for_step(N, u, t)
        result = phase_estimation_run(ga, spec, current, precision_bits, rng)
        estimates.append((u, result.theta))
        current = result.post_state

    scores = score_candidates(N, estimates, t)
    # h' and -h' always tie, so rank the classes {h', -h'}
    classes = {}
    for h in range(N):
        key = min(h, (-h) % N)
        classes[key] = min(classes.get(key, np.inf), scores[h])
    ranked = sorted(classes.items(), key=lambda item: (item[1], item[0]))
    best, best_score = ranked[0]
    if len(ranked) > 1:
        gap = ranked[1][1] - best_score
        if gap < 2.0 ** (-2 * precision_bits):
            raise AmbiguousSerialError(
                f"serial classes {best} and {ranked[1][0]} score within {gap:.3e}; "
                f"retry with more than {precision_bits} precision bits"
            )
    if not is_valid_serial(N, best):
        raise InvalidSerialError(f"best serial class {{{best}, {(-best) % N}}} is not a valid serial")

    bit, post = distinguish_sign(ga, current, best, rng)
    recovered = best if bit == 0 else (-best) % N
    logger.info("recovered serial %d (candidates %d/%d, sign bit %d)", recovered, best, (-best) % N, bit)
    return SerialEstimate(
        estimates=estimates,
        recovered_h=recovered,
        sign_resolved=True,
        candidates=tuple(sorted({best, (-best) % N})),
        scores={int(k): float(v) for k, v in ranked[:4]},
        post_state=post,
    )


def experiment_manifest(N, seed, precision_bits, t, generated_h, estimate, fidelity):
    """JSON-ready record of one recovery experiment."""
    return {
        'N': N,
        'seed': seed,
        'u_schedule': [int(u) for u, _ in estimate.estimates],
        'p': precision_bits,
        't': t,
        'theta': [float(theta) for _, theta in estimate.estimates],
        'generated_h': int(generated_h),
        'recovered_h': int(estimate.recovered_h),
        'candidates': [int(c) for c in estimate.candidates],
        'fidelity': float(fidelity),
    }


# ==================== COST MODEL ====================

@dataclass(frozen=True)
class SimulationCost:
    """Query and gate counts (constants dropped) for d-sparse Hamiltonian simulation."""

    tau: float
    queries: float
    gates: float

    def to_dict(self):
        return {'tau': self.tau, 'queries': self.queries, 'gates': self.gates}


def sparse_simulation_cost(d, h_max, t, eps, n):
    """
    tau = d * ||H||_max * t; queries ~ tau L / log L and
    gates ~ tau (n + L^{5/2}) L / log L with L = log(tau / eps).
    """
    if d < 1 or h_max <= 0 or t <= 0 or not 0 < eps < 1:
        raise InvalidWalkSpecError("cost model needs d >= 1, ||H||_max > 0, t > 0 and 0 < eps < 1")
    tau = d * h_max * t
    L = math.log(tau / eps)
    # the double log is clamped at 1 where log(tau/eps) <= e
    LL = math.log(L) if L > math.e else 1.0
    queries = tau * L / LL
    gate_count = tau * (n + L ** 2.5) * L / LL
    return SimulationCost(tau, queries, gate_count)


def manifest_json(manifest):
    return json.dumps(manifest, sort_keys=True)
