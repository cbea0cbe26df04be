"""Counter-based random streams for reproducible parallel Monte Carlo.

Every walk owns a stream keyed by (base_seed, walk_index); the k-th step reads
the counter value mix(state0 + k*GOLD) and rejection retries remix with a salt.
Results therefore never depend on scheduling or thread count.  The same scheme
is inlined in the compiled walk kernels; this module is the numpy reference
used by tests and by the slow-path samplers.
"""

import numpy as np

GOLD = np.uint64(0x9E3779B97F4A7C15)
SALT = np.uint64(0xD1342543DE82EF95)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_MASK26 = np.uint64(0x3FFFFFF)
_INV26 = 1.0 / 67108864.0  # 2^-26

_ERRSTATE = {"over": "ignore"}


def mix64(z):
    """SplitMix64 finalizer; accepts scalars or uint64 arrays."""
    z = np.asarray(z, dtype=np.uint64)
    with np.errstate(**_ERRSTATE):
        z = (z ^ (z >> np.uint64(30))) * _M1
        z = (z ^ (z >> np.uint64(27))) * _M2
        return z ^ (z >> np.uint64(31))


def walk_state(seed, walk_index):
    """Initial counter for a walk's stream."""
    seed = np.uint64(seed)
    w = np.asarray(walk_index, dtype=np.uint64)
    with np.errstate(**_ERRSTATE):
        return mix64(seed + GOLD * (w + np.uint64(1))) + GOLD


def step_word(seed, walk_index, step_index):
    """64-bit word for a given (seed, walk, step) counter triple."""
    w = walk_state(seed, walk_index)
    k = np.asarray(step_index, dtype=np.uint64)
    with np.errstate(**_ERRSTATE):
        return mix64(w + GOLD * k)


def retry_word(word):
    """Next word in the rejection chain of one step."""
    return mix64(np.asarray(word, dtype=np.uint64) ^ SALT)


def word_to_candidates(word):
    """Two uniforms in [-1, 1) from the disjoint 26-bit fields of a word."""
    word = np.asarray(word, dtype=np.uint64)
    a = ((word >> np.uint64(6)) & _MASK26).astype(np.float64) * _INV26 * 2.0 - 1.0
    b = ((word >> np.uint64(32)) & _MASK26).astype(np.float64) * _INV26 * 2.0 - 1.0
    return a, b


def unit_vector_2d(seed, walk_index, step_index):
    """Uniform unit 2-vector via disk rejection on the step's retry chain.

    The accepted disk point is squared as a complex number (angle doubling
    keeps the law uniform and needs no square root).
    """
    word = step_word(seed, walk_index, step_index)
    a, b = word_to_candidates(word)
    s = a * a + b * b
    while not (1e-10 < s < 1.0):
        word = retry_word(word)
        a, b = word_to_candidates(word)
        s = a * a + b * b
    inv = 1.0 / s
    return np.array([(a * a - b * b) * inv, 2.0 * a * b * inv])


def unit_vector_nd(seed, walk_index, step_index, n):
    """Uniform unit n-vector from Gaussian pairs (Marsaglia polar method)."""
    word = step_word(seed, walk_index, step_index)
    while True:
        v = np.empty(n)
        i = 0
        while i < n:
            a, b = word_to_candidates(word)
            word = retry_word(word)
            s = a * a + b * b
            if not (1e-10 < s < 1.0):
                continue
            fac = np.sqrt(-2.0 * np.log(s) / s)
            v[i] = a * fac
            i += 1
            if i < n:
                v[i] = b * fac
                i += 1
        norm = np.linalg.norm(v)
        if norm > 1e-8:
            return v / norm


def uniform_stream(seed, channel, count):
    """Vector of `count` uniforms in [0, 1) on an auxiliary channel.

    Used for seeded sampling in experiments (points, directions), not walks.
    """
    base = walk_state(seed, np.uint64(channel) ^ np.uint64(0xA5A5A5A5))
    with np.errstate(**_ERRSTATE):
        words = mix64(base + GOLD * np.arange(count, dtype=np.uint64))
    return (words >> np.uint64(11)).astype(np.float64) * 1.1102230246251565e-16
