"""
State-Vector Engine
Dense complex amplitudes, gate application, projective measurement and gate tallies.

Qubit ordering: qubit 0 is the least significant bit of the basis-state label.
"""

import logging
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from modules.errors import (
    DimensionMismatchError,
    ImpossibleBranchError,
    InvalidPermutationError,
    MemoryBudgetError,
    NormalizationError,
    NonUnitaryGateError,
    QubitIndexError,
    UnreachableBranchError,
)

# Import configuration
try:
    from config import EPS_UNITARY, EPS_STATE, EPS_PROB, EPS_IMPOSSIBLE_BRANCH, MAX_QUBITS
except ImportError:
    # Default values if config not found
    EPS_UNITARY = 1e-12
    EPS_STATE = 1e-9
    EPS_PROB = 1e-10
    EPS_IMPOSSIBLE_BRANCH = 1e-14
    MAX_QUBITS = 22

logger = logging.getLogger(__name__)


# ==================== RANDOMNESS ====================

def make_rng(seed):
    """Return a numpy Generator; an existing Generator is passed through unchanged."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def split_rng(seed, count):
    """Derive `count` independent generators from one seed (or generator)."""
    if isinstance(seed, np.random.Generator):
        children = seed.integers(0, 2 ** 63 - 1, size=count)
        return [np.random.default_rng(int(child)) for child in children]
    return [np.random.default_rng(child) for child in np.random.SeedSequence(seed).spawn(count)]


def ensure_budget(n_qubits):
    if n_qubits > MAX_QUBITS:
        raise MemoryBudgetError(
            f"{n_qubits} qubits exceed the simulation budget of {MAX_QUBITS} "
            f"(set QHT_MAX_QUBITS to raise it)"
        )


# ==================== STATES ====================

@dataclass(frozen=True, eq=False)
class StateVector:
    """Unit-norm amplitude vector over n qubits. The amplitude array is read-only."""

    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=np.complex128)
        if amps.ndim != 1:
            raise DimensionMismatchError(f"amplitudes must be one-dimensional, got shape {amps.shape}")
        size = amps.size
        if size < 2 or size & (size - 1):
            raise DimensionMismatchError(f"amplitude count must be 2^n with n >= 1, got {size}")
        ensure_budget(size.bit_length() - 1)
        amps.setflags(write=False)
        object.__setattr__(self, 'amplitudes', amps)

    @classmethod
    def _adopt(cls, amps):
        # Takes ownership of a freshly computed array without another copy.
        state = cls.__new__(cls)
        amps.setflags(write=False)
        object.__setattr__(state, 'amplitudes', amps)
        return state

    @classmethod
    def basis(cls, n_qubits, index):
        if not 0 <= index < 2 ** n_qubits:
            raise QubitIndexError(f"basis index {index} outside [0, {2 ** n_qubits})")
        ensure_budget(n_qubits)
        amps = np.zeros(2 ** n_qubits, dtype=np.complex128)
        amps[index] = 1.0
        return cls._adopt(amps)

    @classmethod
    def from_amplitudes(cls, amplitudes, normalize=True):
        amps = np.array(amplitudes, dtype=np.complex128)
        if normalize:
            norm = np.linalg.norm(amps)
            if norm == 0:
                raise ImpossibleBranchError("cannot normalize the zero vector")
            amps = amps / norm
        return cls(amps)

    @property
    def n_qubits(self):
        return self.amplitudes.size.bit_length() - 1

    @property
    def dim(self):
        return self.amplitudes.size

    def norm(self):
        return float(np.linalg.norm(self.amplitudes))

    def probabilities(self):
        return np.abs(self.amplitudes) ** 2

    def __len__(self):
        return self.dim


def inner_product(a, b):
    """Return <a|b> (conjugate-linear in a)."""
    if a.dim != b.dim:
        raise DimensionMismatchError(f"inner product of dimensions {a.dim} and {b.dim}")
    return complex(np.vdot(a.amplitudes, b.amplitudes))


def fidelity(a, b):
    return abs(inner_product(a, b)) ** 2


def with_ancillas(state, count=1):
    """Append `count` ancilla qubits in |0> as the most significant qubits."""
    ensure_budget(state.n_qubits + count)
    amps = np.zeros(state.dim << count, dtype=np.complex128)
    amps[:state.dim] = state.amplitudes
    return StateVector._adopt(amps)


def discard_ancillas(state, count=1, tolerance=EPS_STATE):
    """Drop the `count` most significant qubits after checking they are back in |0>."""
    keep = state.dim >> count
    residual = np.max(np.abs(state.amplitudes[keep:]), initial=0.0)
    if residual > tolerance:
        raise UnreachableBranchError(f"ancilla register not clean (residual {residual:.3e})")
    return StateVector._adopt(state.amplitudes[:keep].copy())


# ==================== GATES ====================

@dataclass(frozen=True, eq=False)
class Gate:
    """
    One gate of a circuit.

    Exactly one of `matrix` (dense unitary on the target register), `table`
    (basis permutation, |r> -> |table[r]>) or `diagonal` (phases) is set.
    `targets` lists the register qubits least significant first; `controls`
    holds (qubit, required value) pairs. `cost` is the elementary-gate count
    the gate contributes to a tally.
    """

    family: str
    targets: tuple
    matrix: np.ndarray = None
    table: np.ndarray = None
    diagonal: np.ndarray = None
    controls: tuple = ()
    cost: int = 1

    def __post_init__(self):
        targets = tuple(int(q) for q in self.targets)
        controls = tuple((int(q), int(v)) for q, v in self.controls)
        object.__setattr__(self, 'targets', targets)
        object.__setattr__(self, 'controls', controls)
        qubits = list(targets) + [q for q, _ in controls]
        if not targets:
            raise QubitIndexError(f"gate {self.family} has no targets")
        if min(qubits) < 0:
            raise QubitIndexError(f"negative qubit index in gate {self.family}")
        if len(set(qubits)) != len(qubits):
            raise QubitIndexError(f"gate {self.family} repeats a qubit: {qubits}")
        if any(v not in (0, 1) for _, v in controls):
            raise QubitIndexError(f"control values must be 0 or 1 in gate {self.family}")
        if self.cost < 0:
            raise ValueError("gate cost must be non-negative")

        dim = 2 ** len(targets)
        kinds = [part is not None for part in (self.matrix, self.table, self.diagonal)]
        if sum(kinds) != 1:
            raise ValueError(f"gate {self.family} needs exactly one of matrix/table/diagonal")

        if self.matrix is not None:
            matrix = np.array(self.matrix, dtype=np.complex128)
            if matrix.shape != (dim, dim):
                raise DimensionMismatchError(
                    f"gate {self.family} matrix shape {matrix.shape} does not fit {len(targets)} targets"
                )
            deviation = np.max(np.abs(matrix.conj().T @ matrix - np.eye(dim)))
            if deviation > EPS_UNITARY:
                raise NonUnitaryGateError(f"gate {self.family} is not unitary (deviation {deviation:.3e})")
            matrix.setflags(write=False)
            object.__setattr__(self, 'matrix', matrix)
        elif self.table is not None:
            table = np.array(self.table, dtype=np.int64)
            if table.shape != (dim,) or not np.array_equal(np.sort(table), np.arange(dim)):
                raise InvalidPermutationError(f"gate {self.family} index map is not a bijection on {dim} values")
            table.setflags(write=False)
            object.__setattr__(self, 'table', table)
        else:
            diagonal = np.array(self.diagonal, dtype=np.complex128)
            if diagonal.shape != (dim,) or np.max(np.abs(np.abs(diagonal) - 1)) > EPS_UNITARY:
                raise NonUnitaryGateError(f"gate {self.family} diagonal must hold {dim} unit phases")
            diagonal.setflags(write=False)
            object.__setattr__(self, 'diagonal', diagonal)

    @property
    def kind(self):
        if self.matrix is not None:
            return 'unitary'
        if self.table is not None:
            return 'permutation'
        return 'diagonal'

    @property
    def qubits(self):
        return self.targets + tuple(q for q, _ in self.controls)

    def inverse(self):
        if self.matrix is not None:
            return Gate(self.family, self.targets, matrix=self.matrix.conj().T,
                        controls=self.controls, cost=self.cost)
        if self.table is not None:
            return Gate(self.family, self.targets, table=np.argsort(self.table),
                        controls=self.controls, cost=self.cost)
        return Gate(self.family, self.targets, diagonal=self.diagonal.conj(),
                    controls=self.controls, cost=self.cost)

    def remap(self, mapping):
        """Rename qubits through `mapping` (sequence or dict: old index -> new index)."""
        return Gate(
            self.family,
            tuple(mapping[q] for q in self.targets),
            matrix=self.matrix,
            table=self.table,
            diagonal=self.diagonal,
            controls=tuple((mapping[q], v) for q, v in self.controls),
            cost=self.cost,
        )


def _apply_inplace(amps, n_qubits, gate):
    # amps has shape (2**n,) or (2**n, batch); it must be C-contiguous so that
    # every reshape/index below is a view and the final assignment writes through.
    trailing = amps.shape[1:]
    tensor_view = amps.reshape((2,) * n_qubits + trailing)
    index = [slice(None)] * n_qubits
    for qubit, value in gate.controls:
        index[n_qubits - 1 - qubit] = value
    view = tensor_view[tuple(index)]

    control_qubits = [q for q, _ in gate.controls]

    def position(qubit):
        return (n_qubits - 1 - qubit) - sum(1 for c in control_qubits if c > qubit)

    axes = [position(q) for q in reversed(gate.targets)]
    width = len(axes)
    moved = np.moveaxis(view, axes, list(range(width)))
    block = moved.reshape((2 ** width, -1))
    if gate.matrix is not None:
        result = gate.matrix @ block
    elif gate.table is not None:
        result = np.empty_like(block)
        result[gate.table] = block
    else:
        result = gate.diagonal[:, None] * block
    moved[...] = result.reshape(moved.shape)


def _check_gate_fits(gate, n_qubits):
    if max(gate.qubits) >= n_qubits:
        raise QubitIndexError(
            f"gate {gate.family} touches qubit {max(gate.qubits)} but the register has {n_qubits} qubits"
        )


def apply_gate(state, gate):
    """Return U|psi> for the gate's unitary U."""
    _check_gate_fits(gate, state.n_qubits)
    amps = state.amplitudes.copy()
    _apply_inplace(amps, state.n_qubits, gate)
    return StateVector._adopt(amps)


# ==================== CIRCUITS ====================

@dataclass(frozen=True)
class GateTally:
    """Elementary-gate counts per family."""

    counts: dict = field(default_factory=dict)

    @property
    def total(self):
        return sum(self.counts.values())

    @classmethod
    def of(cls, gates):
        counts = Counter()
        for gate in gates:
            counts[gate.family] += gate.cost
        return cls(dict(counts))

    def __add__(self, other):
        merged = Counter(self.counts)
        merged.update(other.counts)
        return GateTally(dict(merged))

    def get(self, family):
        return self.counts.get(family, 0)


@dataclass(frozen=True, eq=False)
class Circuit:
    """
    Ordered gate list followed by a zero-cost qubit relabel.

    After the gates run, bit j of the output label is taken from bit
    final_relabel[j] of the register (identity by default).
    """

    n_qubits: int
    gates: tuple = ()
    final_relabel: tuple = None

    def __post_init__(self):
        gates = tuple(self.gates)
        for gate in gates:
            _check_gate_fits(gate, self.n_qubits)
        relabel = tuple(range(self.n_qubits)) if self.final_relabel is None else tuple(self.final_relabel)
        if sorted(relabel) != list(range(self.n_qubits)):
            raise InvalidPermutationError(f"final relabel {relabel} is not a permutation of the qubits")
        object.__setattr__(self, 'gates', gates)
        object.__setattr__(self, 'final_relabel', relabel)

    @property
    def has_relabel(self):
        return self.final_relabel != tuple(range(self.n_qubits))

    def tally(self):
        return GateTally.of(self.gates)

    def inverse(self):
        # (P G_k ... G_1)^-1 = P^-1 (P G_1^-1 P^-1) ... (P G_k^-1 P^-1)
        inverse_relabel = [0] * self.n_qubits
        for logical, physical in enumerate(self.final_relabel):
            inverse_relabel[physical] = logical
        gates = tuple(gate.inverse().remap(inverse_relabel) for gate in reversed(self.gates))
        return Circuit(self.n_qubits, gates, tuple(inverse_relabel))

    def compose(self, other):
        """This circuit followed by `other`."""
        if other.n_qubits != self.n_qubits:
            raise DimensionMismatchError(
                f"cannot compose circuits on {self.n_qubits} and {other.n_qubits} qubits"
            )
        shifted = tuple(gate.remap(self.final_relabel) for gate in other.gates)
        relabel = tuple(self.final_relabel[j] for j in other.final_relabel)
        return Circuit(self.n_qubits, self.gates + shifted, relabel)

    def __add__(self, other):
        return self.compose(other)

    def embed(self, qubit_map, n_total):
        """Place this circuit on qubits `qubit_map` of an `n_total`-qubit register."""
        qubit_map = tuple(qubit_map)
        if len(qubit_map) != self.n_qubits:
            raise DimensionMismatchError(
                f"qubit map of length {len(qubit_map)} for a {self.n_qubits}-qubit circuit"
            )
        relabel = list(range(n_total))
        for logical, source in enumerate(self.final_relabel):
            relabel[qubit_map[logical]] = qubit_map[source]
        gates = tuple(gate.remap(qubit_map) for gate in self.gates)
        return Circuit(n_total, gates, tuple(relabel))


def _apply_relabel(amps, n_qubits, relabel):
    trailing = amps.shape[1:]
    tensor_view = amps.reshape((2,) * n_qubits + trailing)
    axes = [0] * n_qubits
    for logical, physical in enumerate(relabel):
        axes[n_qubits - 1 - logical] = n_qubits - 1 - physical
    axes += list(range(n_qubits, n_qubits + len(trailing)))
    return np.ascontiguousarray(np.transpose(tensor_view, axes)).reshape(amps.shape)


def run_circuit_batch(columns, circuit):
    """Apply a circuit to every column of a (2^n, batch) array."""
    columns = np.array(columns, dtype=np.complex128, order='C')
    if columns.shape[0] != 2 ** circuit.n_qubits:
        raise DimensionMismatchError(
            f"{columns.shape[0]} amplitudes for a {circuit.n_qubits}-qubit circuit"
        )
    ensure_budget(circuit.n_qubits)
    for gate in circuit.gates:
        _apply_inplace(columns, circuit.n_qubits, gate)
    if circuit.has_relabel:
        columns = _apply_relabel(columns, circuit.n_qubits, circuit.final_relabel)
    return columns


def run_circuit(state, circuit):
    """Apply the gates in order, then the relabel. Returns (state, tally)."""
    if state.n_qubits != circuit.n_qubits:
        raise DimensionMismatchError(
            f"state has {state.n_qubits} qubits, circuit expects {circuit.n_qubits}"
        )
    amps = run_circuit_batch(state.amplitudes, circuit)
    tally = circuit.tally()
    logger.debug("ran %d gates on %d qubits (tally %d)", len(circuit.gates), circuit.n_qubits, tally.total)
    return StateVector._adopt(amps), tally


# ==================== MEASUREMENT ====================

def register_values(n_qubits, qubits):
    """Value of the register `qubits` (least significant first) for every basis label."""
    labels = np.arange(2 ** n_qubits, dtype=np.int64)
    values = np.zeros_like(labels)
    for position, qubit in enumerate(qubits):
        values |= ((labels >> qubit) & 1) << position
    return values


@dataclass(frozen=True)
class Observable2:
    """Two-outcome projective measurement; M0 projects onto `projector_indices`."""

    projector_indices: frozenset

    def __post_init__(self):
        object.__setattr__(self, 'projector_indices', frozenset(int(i) for i in self.projector_indices))

    @classmethod
    def on_register(cls, n_qubits, qubits, values):
        """M0 = projector onto the register `qubits` holding any of `values`."""
        register = register_values(n_qubits, qubits)
        selected = np.flatnonzero(np.isin(register, list(values)))
        return cls(frozenset(selected.tolist()))

    def mask(self, dim):
        mask = np.zeros(dim, dtype=bool)
        indices = [i for i in self.projector_indices if i < dim]
        if len(indices) != len(self.projector_indices):
            raise DimensionMismatchError("observable indexes basis states outside the register")
        mask[indices] = True
        return mask


def project_observable(state, obs, outcome):
    """Deterministic branch: returns (probability, renormalized post-state) for `outcome`."""
    mask = obs.mask(state.dim)
    if outcome == 1:
        mask = ~mask
    probs = state.probabilities()
    prob = float(np.sum(probs[mask]))
    if prob < EPS_IMPOSSIBLE_BRANCH:
        raise ImpossibleBranchError(f"outcome {outcome} has probability {prob:.3e}")
    amps = np.where(mask, state.amplitudes, 0.0) / np.sqrt(prob)
    return prob, StateVector._adopt(amps)


def _require_unit_norm(state):
    drift = abs(state.norm() ** 2 - 1.0)
    if drift > EPS_PROB:
        raise NormalizationError(f"cannot measure a state whose squared norm is off by {drift:.3e}")


def measure_observable(state, obs, rng_seed):
    """Measure {M0, M1}. Returns (outcome, post_state, prob0)."""
    _require_unit_norm(state)
    rng = make_rng(rng_seed)
    mask = obs.mask(state.dim)
    prob0 = float(np.sum(state.probabilities()[mask]))
    outcome = 0 if rng.random() < prob0 else 1
    _, post = project_observable(state, obs, outcome)
    logger.debug("two-outcome measurement: outcome %d (prob0 %.6f)", outcome, prob0)
    return outcome, post, prob0


def register_distribution(state, qubits):
    values = register_values(state.n_qubits, qubits)
    return np.bincount(values, weights=state.probabilities(), minlength=2 ** len(qubits))


def measure_register(state, qubits, rng_seed):
    """Computational-basis measurement of a register. Returns (value, post_state, probabilities)."""
    if qubits and max(qubits) >= state.n_qubits:
        raise QubitIndexError(f"register {qubits} exceeds {state.n_qubits} qubits")
    _require_unit_norm(state)
    rng = make_rng(rng_seed)
    probs = register_distribution(state, qubits)
    value = int(rng.choice(probs.size, p=probs / probs.sum()))
    values = register_values(state.n_qubits, qubits)
    kept = values == value
    weight = float(probs[value])
    if weight < EPS_IMPOSSIBLE_BRANCH:
        raise ImpossibleBranchError(f"register value {value} has probability {weight:.3e}")
    amps = np.where(kept, state.amplitudes, 0.0) / np.sqrt(weight)
    return value, StateVector._adopt(amps), probs
