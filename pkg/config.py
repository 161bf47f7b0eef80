"""
Configuration file for the QHT Money simulator
Tolerances, qubit budgets and CLI exit codes live here
"""

import os

# Numerical tolerances
EPS_UNITARY = 1e-12          # ||U^dagger U - I||_max for every gate block
EPS_STATE = 1e-9             # max-norm agreement between states
EPS_PROB = 1e-10             # normalization drift allowed before a measurement
EPS_MATRIX = 1e-10           # classical reference matrices
EPS_IMPOSSIBLE_BRANCH = 1e-14  # projecting onto less than this is an error

# Memory budget (dense simulation doubles memory per qubit)
MAX_QUBITS = int(os.environ.get('QHT_MAX_QUBITS', 22))
MAX_DENSE_DIM = 4096         # largest N for dense matrices / walk operators

# Per-command budgets
MAX_TRANSFORM_CHECK_N = 10
MAX_CIRCUIT_N = 12
MAX_QST_N = 11
MAX_GATE_BENCH_N = 12
MAX_MONEY_N = 256
MAX_WALK_N = 256
MAX_WALK_BITS = 10
MAX_PE_BITS = 12
MAX_GENERATORS = 16          # |Q| for Cayley graphs at desk scale

# Output
SCHEMA_VERSION = 1

# Exit codes
EXIT_OK = 0
EXIT_MISMATCH = 1
EXIT_PRECONDITION = 3
EXIT_BUDGET = 4
EXIT_AMBIGUOUS = 5
