"""Counter-based pseudo-randomness: keyed mixing, seed derivation, edge states.

Everything random in this package flows from a stateless keyed construction:
instead of advancing a shared generator, each consumer hashes its own
coordinates (a seed, a trial index, an edge) through a strong 64-bit mixer.
Configurations therefore occupy no memory, repeated queries are idempotent,
and parallel workers need no coordination beyond disjoint key ranges.

The mixer is the SplitMix64 finalizer, a bijection on 64-bit words with full
avalanche.  Sequences of words are absorbed Merkle-Damgard style:

    state <- mix64(state + GOLDEN + word)    for each word

which keeps the state a bijective image of the previous state for every fixed
word, so distinct fixed-length inputs cannot collide "for free".
"""

from __future__ import annotations

import numpy as np
from numba import njit

_MASK64 = (1 << 64) - 1

GOLDEN = 0x9E3779B97F4A7C15
_MIX_A = 0xBF58476D1CE4E5B9
_MIX_B = 0x94D049BB133111EB

# domain-separation constants (arbitrary words, pinned forever)
EDGE_DOMAIN = 0xE5C01A771CE5EED5
SEED_DOMAIN = 0x5EED57AEA1157A1E
WALK_DOMAIN = 0x3A1CCA11B0B57E01

# coordinate offset so lattice coordinates absorb as nonnegative words
COORD_OFFSET = 1 << 32

_U = np.uint64
_G_U = _U(GOLDEN)
_A_U = _U(_MIX_A)
_B_U = _U(_MIX_B)
_S30 = _U(30)
_S27 = _U(27)
_S31 = _U(31)
_S11 = _U(11)
_INV53 = 1.0 / float(1 << 53)


def mix64(x: int) -> int:
    """SplitMix64 finalizer on a 64-bit word (pure Python reference)."""
    x &= _MASK64
    x = ((x ^ (x >> 30)) * _MIX_A) & _MASK64
    x = ((x ^ (x >> 27)) * _MIX_B) & _MASK64
    return x ^ (x >> 31)


def absorb(state: int, word: int) -> int:
    """Absorb one 64-bit word into the running state."""
    return mix64((state + GOLDEN + word) & _MASK64)


def hash_words(seed: int, words) -> int:
    """Hash a sequence of integer words under a seed; order-sensitive."""
    state = mix64((seed + GOLDEN) & _MASK64)
    for w in words:
        state = absorb(state, w & _MASK64)
    return state


def uniform_from_state(state: int) -> float:
    """Map a 64-bit state to a uniform float in [0, 1) with 53-bit resolution."""
    return (state >> 11) * _INV53


def derive_seed(master_seed: int, trial_index: int) -> int:
    """Derive the per-trial seed for a trial index under a master seed.

    Injective in ``trial_index`` for a fixed master (the index enters through
    multiplication by an odd constant followed by bijective mixing), and
    bijective in ``master_seed`` at any fixed index.
    """
    if trial_index < 0:
        raise ValueError("trial_index must be nonnegative")
    base = mix64((master_seed ^ SEED_DOMAIN) & _MASK64)
    return mix64((base + (trial_index * GOLDEN)) & _MASK64)


@njit(cache=True, inline="always")
def _mix64_nb(x):
    x = (x ^ (x >> _S30)) * _A_U
    x = (x ^ (x >> _S27)) * _B_U
    return x ^ (x >> _S31)


@njit(cache=True, inline="always")
def _absorb_nb(state, word):
    return _mix64_nb(state + _G_U + word)


@njit(cache=True, inline="always")
def _uniform_nb(state):
    return (state >> _S11) * _INV53


@njit(cache=True, inline="always")
def _next_state_nb(state):
    # stateful stream for walk simulation: splitmix64 counter advance
    state = state + _G_U
    return state, _mix64_nb(state)


@njit(cache=True)
def _mix64_arr(x):
    out = np.empty_like(x)
    for i in range(x.size):
        out[i] = _mix64_nb(x[i])
    return out


def mix64_bulk(values: np.ndarray) -> np.ndarray:
    """Vectorized mix64 over a uint64 array (collision scans, tests)."""
    return _mix64_arr(np.ascontiguousarray(values, dtype=np.uint64))


def derive_seeds(master_seed: int, n: int) -> np.ndarray:
    """Vector of derive_seed(master_seed, i) for i in range(n)."""
    base = mix64((master_seed ^ SEED_DOMAIN) & _MASK64)
    idx = np.arange(n, dtype=np.uint64)
    pre = _U(base) + idx * _G_U
    return mix64_bulk(pre)
