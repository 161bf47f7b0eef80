"""
Toy Group Action Module
Regular action of Z_N on an opaque label set X, twists, and orbit-state preparation.

Labels are scrambled by a seeded secret bijection phi: Z_N -> X. Outside this
module the bijection is reached only through act() and the twist.
"""

import json
import logging
import math
from dataclasses import dataclass

import numpy as np

from modules import gates
from modules.errors import InvalidLabelError, MemoryBudgetError, TransformDomainError
from modules.statevector import StateVector

# Import configuration
try:
    from config import MAX_DENSE_DIM
except ImportError:
    MAX_DENSE_DIM = 4096

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ToyGroupAction:
    """Regular action g * y = phi(g + phi^-1(y)) of Z_N on X = {0..N-1}."""

    N: int
    secret_bijection: tuple
    seed: int = None

    def __post_init__(self):
        N = int(self.N)
        if N < 2 or N & (N - 1):
            raise TransformDomainError(f"group order must be a power of two >= 2, got {N}")
        if N > MAX_DENSE_DIM:
            raise MemoryBudgetError(f"group order {N} exceeds the dense budget {MAX_DENSE_DIM}")
        bijection = tuple(int(v) for v in self.secret_bijection)
        if sorted(bijection) != list(range(N)):
            raise InvalidLabelError("secret bijection is not a permutation of the label set")
        object.__setattr__(self, 'N', N)
        object.__setattr__(self, 'secret_bijection', bijection)

    # ---------- constructors ----------

    @classmethod
    def from_seed(cls, N, seed):
        rng = np.random.default_rng(seed)
        return cls(N, tuple(rng.permutation(N).tolist()), seed)

    @classmethod
    def identity(cls, N):
        """Labels equal group elements (phi = identity)."""
        return cls(N, tuple(range(N)))

    def to_json(self):
        return json.dumps({'N': self.N, 'permutation': list(self.secret_bijection), 'seed': self.seed},
                          sort_keys=True)

    @classmethod
    def from_json(cls, document):
        data = json.loads(document) if isinstance(document, str) else document
        return cls(data['N'], tuple(data['permutation']), data.get('seed'))

    # ---------- structure ----------

    @property
    def n_qubits(self):
        return self.N.bit_length() - 1

    @property
    def base_point(self):
        return self.secret_bijection[0]

    def _phi(self):
        return np.asarray(self.secret_bijection, dtype=np.int64)

    def _phi_inverse(self):
        return np.argsort(self._phi())

    def orbit_labels(self):
        """Label g * x0 for every g in Z_N, as an array indexed by g."""
        return self._phi()

    def act_table(self, g):
        """Array t with t[y] = g * y for every label y."""
        phi = self._phi()
        return phi[(g + self._phi_inverse()) % self.N]

    def twist_table(self):
        phi = self._phi()
        return phi[(-self._phi_inverse()) % self.N]


# ==================== ACTION MAP ====================

def act(ga, g, y):
    """
    Compute g * y

    Args:
        ga: the group action
        g: group element (reduced mod N)
        y: label in X

    Returns:
        int: the label g * y
    """
    if not 0 <= y < ga.N:
        raise InvalidLabelError(f"label {y} is outside X = [0, {ga.N})")
    inverse = ga.secret_bijection.index(y)
    return ga.secret_bijection[(g + inverse) % ga.N]


def twist(ga, y):
    """g * x0 -> (-g) * x0"""
    if not 0 <= y < ga.N:
        raise InvalidLabelError(f"label {y} is outside X = [0, {ga.N})")
    inverse = ga.secret_bijection.index(y)
    return ga.secret_bijection[(-inverse) % ga.N]


def _register(ga, qubits):
    return tuple(range(ga.n_qubits)) if qubits is None else tuple(qubits)


def action_unitary(ga, k, qubits=None, controls=None):
    """U_k: |y> -> |k * y> as a permutation gate on the X register."""
    table = ga.act_table(k % ga.N)
    return gates.permutation('ACT', _register(ga, qubits), table, controls=controls)


def conditional_action(ga, sign, x_qubits=None, k_qubits=None):
    """
    |y>|k> -> |(sign k) * y>|k> on the X register (low) and the Z_N register (high).
    """
    if sign not in (1, -1):
        raise ValueError(f"sign must be +1 or -1, got {sign}")
    N = ga.N
    x_qubits = _register(ga, x_qubits)
    k_qubits = tuple(range(ga.n_qubits, 2 * ga.n_qubits)) if k_qubits is None else tuple(k_qubits)
    labels = np.arange(N)
    table = np.empty(N * N, dtype=np.int64)
    for k in range(N):
        table[k * N + labels] = k * N + ga.act_table((sign * k) % N)
    return gates.permutation('CACT', x_qubits + k_qubits, table)


def twist_unitary(ga, qubits=None, controls=None):
    return gates.permutation('TWIST', _register(ga, qubits), ga.twist_table(), controls=controls)


def action_adjacency_matrix(ga, generators):
    """Cayley-graph adjacency A[q * y, y] = 1 built by enumerating edges."""
    A = np.zeros((ga.N, ga.N))
    labels = np.arange(ga.N)
    for q in generators:
        A[ga.act_table(q % ga.N), labels] += 1
    return A


# ==================== ORBIT STATES ====================

@dataclass(frozen=True, eq=False)
class ActionState:
    """A state over C^X tagged with the action that owns the labels."""

    action: ToyGroupAction
    state: StateVector

    def __post_init__(self):
        if self.state.dim != self.action.N:
            raise TransformDomainError(
                f"state dimension {self.state.dim} does not match |X| = {self.action.N}"
            )

    @property
    def amplitudes(self):
        return self.state.amplitudes

    @classmethod
    def from_amplitudes(cls, ga, amplitudes, normalize=True):
        return cls(ga, StateVector.from_amplitudes(amplitudes, normalize=normalize))


def as_state(ga, state):
    """Accept an ActionState or a plain StateVector of dimension N."""
    if isinstance(state, ActionState):
        return state.state
    if state.dim != ga.N:
        raise TransformDomainError(f"state dimension {state.dim} does not match |X| = {ga.N}")
    return state


def _orbit_state(ga, weights):
    amps = np.zeros(ga.N, dtype=np.complex128)
    amps[ga.orbit_labels()] = weights / math.sqrt(ga.N)
    return ActionState(ga, StateVector(amps))


def fourier_state(ga, h):
    """Amplitude exp(2 pi i g h / N) / sqrt(N) on label g * x0."""
    g = np.arange(ga.N)
    turns = (g * (h % ga.N)) % ga.N
    return _orbit_state(ga, np.exp(2j * np.pi * turns / ga.N))


def hartley_state(ga, h):
    """Amplitude cas(2 pi g h / N) / sqrt(N) on label g * x0; real."""
    g = np.arange(ga.N)
    angle = 2 * np.pi * ((g * (h % ga.N)) % ga.N) / ga.N
    return _orbit_state(ga, np.cos(angle) + np.sin(angle))


def hartley_basis(ga):
    """Columns are hartley_state(h) for h = 0..N-1."""
    return np.column_stack([hartley_state(ga, h).amplitudes for h in range(ga.N)])


def fourier_basis(ga):
    return np.column_stack([fourier_state(ga, h).amplitudes for h in range(ga.N)])
