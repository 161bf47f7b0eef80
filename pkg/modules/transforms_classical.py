"""
Classical Transform Matrices
Dense reference matrices (DFT, Hartley, sine/cosine families) that every quantum circuit is checked against
"""

import logging
import math
from dataclasses import dataclass

import numpy as np

from modules.errors import TransformDomainError, UnknownVariantError

# Import configuration
try:
    from config import EPS_MATRIX, MAX_DENSE_DIM
except ImportError:
    EPS_MATRIX = 1e-10
    MAX_DENSE_DIM = 4096

logger = logging.getLogger(__name__)

SINE_COSINE_LABELS = ('S_I', 'S_II', 'S_III', 'S_IV', 'C_I', 'C_II', 'C_III', 'C_IV')
TRANSFORM_LABELS = ('DFT', 'DHT_add', 'DHT_mult') + SINE_COSINE_LABELS


@dataclass(frozen=True, eq=False)
class TransformMatrix:
    """A labelled dense transform matrix (read-only entries)."""

    label: str
    entries: np.ndarray

    def __post_init__(self):
        if self.label not in TRANSFORM_LABELS:
            raise UnknownVariantError(f"unknown transform label: {self.label}")
        entries = np.array(self.entries)
        entries.setflags(write=False)
        object.__setattr__(self, 'entries', entries)

    @property
    def dim(self):
        return self.entries.shape[0]

    def unitarity_error(self):
        entries = self.entries
        return float(np.max(np.abs(entries.conj().T @ entries - np.eye(self.dim))))

    def is_unitary(self, tolerance=EPS_MATRIX):
        return self.unitarity_error() <= tolerance

    def involution_error(self):
        return float(np.max(np.abs(self.entries @ self.entries - np.eye(self.dim))))


# ==================== HELPERS ====================

def cas(x):
    """Hartley kernel cos(x) + sin(x)."""
    return np.cos(x) + np.sin(x)


def _turns(a, y, modulus):
    # 2*pi*a*y/modulus reduced mod 2*pi, evaluated from the exact integer residue
    return 2 * np.pi * (np.multiply.outer(a, y) % modulus) / modulus


def _check_size(N):
    if N < 1:
        raise TransformDomainError(f"transform size must be at least 1, got {N}")
    if N > MAX_DENSE_DIM:
        raise TransformDomainError(f"transform size {N} exceeds the dense budget {MAX_DENSE_DIM}")


def _check_factors(factors):
    factors = [int(f) for f in factors]
    if not factors:
        raise TransformDomainError("factor list must not be empty")
    if any(f < 1 for f in factors):
        raise TransformDomainError(f"all factors must be at least 1, got {factors}")
    _check_size(math.prod(factors))
    return factors


# ==================== FOURIER AND HARTLEY ====================

def dft_matrix(N):
    """entries[a][y] = exp(2*pi*i*a*y/N) / sqrt(N)"""
    _check_size(N)
    idx = np.arange(N)
    return TransformMatrix('DFT', np.exp(1j * _turns(idx, idx, N)) / math.sqrt(N))


def dht_matrix(N):
    """entries[a][y] = cas(2*pi*a*y/N) / sqrt(N)"""
    _check_size(N)
    idx = np.arange(N)
    return TransformMatrix('DHT_add', cas(_turns(idx, idx, N)) / math.sqrt(N))


def dht_matrix_additive(factors):
    """
    Hartley transform over Z_N1 x ... x Z_Nk with the additive kernel
    cas(sum_i 2*pi*a_i*y_i/N_i). Mixed-radix labels, leftmost factor most significant.
    """
    factors = _check_factors(factors)
    dim = math.prod(factors)
    digits = np.unravel_index(np.arange(dim), factors)
    turns = np.zeros((dim, dim))
    for digit, modulus in zip(digits, factors):
        turns += (np.multiply.outer(digit, digit) % modulus) / modulus
    angle = 2 * np.pi * np.mod(turns, 1.0)
    return TransformMatrix('DHT_add', cas(angle) / math.sqrt(dim))


def dht_matrix_multiplicative(factors, method='kron'):
    """
    Hartley transform over a product group with the product kernel
    prod_i cas(2*pi*a_i*y_i/N_i); equals the Kronecker product of the factors' DHTs.

    Args:
        method: 'kron' (tensor product) or 'direct' (entrywise product of cas terms)
    """
    factors = _check_factors(factors)
    if method == 'kron':
        entries = np.ones((1, 1))
        for modulus in factors:
            entries = np.kron(entries, dht_matrix(modulus).entries)
    elif method == 'direct':
        dim = math.prod(factors)
        digits = np.unravel_index(np.arange(dim), factors)
        entries = np.ones((dim, dim))
        for digit, modulus in zip(digits, factors):
            entries = entries * cas(_turns(digit, digit, modulus))
        entries /= math.sqrt(dim)
    else:
        raise UnknownVariantError(f"unknown construction method: {method}")
    return TransformMatrix('DHT_mult', entries)


def hartley_from_fourier(N):
    """(1-i)/2 F + (1+i)/2 F^dagger; real up to rounding."""
    F = dft_matrix(N).entries
    return (1 - 1j) / 2 * F + (1 + 1j) / 2 * F.conj().T


# ==================== SINE AND COSINE ====================

def _k_weights(indices, edges):
    weights = np.ones(len(indices))
    weights[np.isin(indices, edges)] = 1 / math.sqrt(2)
    return weights


def dst_dct_matrix(label, N):
    """
    Orthogonal sine/cosine transform matrices with their standard index ranges:
    S_I is (N-1)x(N-1) on indices 1..N-1, C_I is (N+1)x(N+1) on 0..N, the rest N x N.
    """
    if label not in SINE_COSINE_LABELS:
        raise UnknownVariantError(f"unknown sine/cosine transform: {label}")
    if N < 2:
        raise TransformDomainError(f"sine/cosine transforms need N >= 2, got {N}")
    _check_size(N)

    scale = math.sqrt(2 / N)
    half = 0.5
    if label == 'S_I':
        m = np.arange(1, N)
        entries = np.sin(np.pi * np.multiply.outer(m, m) / N)
    elif label == 'S_II':
        m = np.arange(1, N + 1)
        entries = _k_weights(m, [N])[:, None] * np.sin(np.pi * np.multiply.outer(m, m - half) / N)
    elif label == 'S_III':
        m = np.arange(1, N + 1)
        entries = np.sin(np.pi * np.multiply.outer(m - half, m) / N) * _k_weights(m, [N])[None, :]
    elif label == 'S_IV':
        m = np.arange(N) + half
        entries = np.sin(np.pi * np.multiply.outer(m, m) / N)
    elif label == 'C_I':
        m = np.arange(N + 1)
        k = _k_weights(m, [0, N])
        entries = np.outer(k, k) * np.cos(np.pi * np.multiply.outer(m, m) / N)
    elif label == 'C_II':
        m = np.arange(N)
        entries = _k_weights(m, [0])[:, None] * np.cos(np.pi * np.multiply.outer(m, m + half) / N)
    elif label == 'C_III':
        m = np.arange(N)
        entries = np.cos(np.pi * np.multiply.outer(m + half, m) / N) * _k_weights(m, [0])[None, :]
    else:
        m = np.arange(N) + half
        entries = np.cos(np.pi * np.multiply.outer(m, m) / N)

    logger.debug("built %s matrix for N=%d", label, N)
    return TransformMatrix(label, scale * entries)


def max_norm_error(a, b):
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise TransformDomainError(f"shape mismatch {a.shape} vs {b.shape}")
    return float(np.max(np.abs(a - b), initial=0.0))
