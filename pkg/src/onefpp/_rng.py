"""Counter-based hashing used for order-independent randomness.

Every random quantity is a function of (seed, salt, ids), so results do not
depend on the order in which pairs or vertices are visited.
"""

import numpy as np
from numba import njit

SALT_WEIGHT = np.uint64(0x57E1)
SALT_EDGE = np.uint64(0xED6E)
SALT_L = np.uint64(0x1A7E)
SALT_STREAM = np.uint64(0x5EA3)

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)
_INV53 = 1.0 / 9007199254740992.0


@njit(inline="always")
def mix64(z):
    z = z + _GOLDEN
    z = (z ^ (z >> _S30)) * _M1
    z = (z ^ (z >> _S27)) * _M2
    return z ^ (z >> _S31)


@njit(inline="always")
def to_unit(h):
    return np.float64(h >> _S11) * _INV53


@njit(inline="always")
def key1(seed, salt, a):
    h = mix64(np.uint64(seed) ^ salt)
    return mix64(h ^ np.uint64(a))


@njit(inline="always")
def key2(seed, salt, a, b):
    h = mix64(np.uint64(seed) ^ salt)
    h = mix64(h ^ np.uint64(a))
    return mix64(h ^ np.uint64(b))


@njit(inline="always")
def pair_uniform(seed, salt, a, b):
    """Uniform in [0, 1) for the unordered pair {a, b}."""
    if a < b:
        return to_unit(key2(seed, salt, a, b))
    return to_unit(key2(seed, salt, b, a))


@njit(inline="always")
def stream_next(state):
    state = state + _GOLDEN
    return state, to_unit(mix64(state))


@njit(cache=True, nogil=True)
def vertex_uniforms(seed, salt, ids):
    out = np.empty(ids.shape[0], dtype=np.float64)
    for i in range(ids.shape[0]):
        out[i] = to_unit(key1(seed, salt, ids[i]))
    return out


@njit(cache=True, nogil=True)
def pair_uniforms(seed, salt, a, b):
    out = np.empty(a.shape[0], dtype=np.float64)
    for i in range(a.shape[0]):
        out[i] = pair_uniform(seed, salt, a[i], b[i])
    return out
