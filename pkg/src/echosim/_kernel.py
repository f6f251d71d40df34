"""Compiled inner loop of the step engine.

One call advances the dynamics by `n_iters` iterations on dense state:
a uint8 adjacency matrix (mutated in place when rewiring is on), a degree
vector, and the opinion vector.  The RNG is xoshiro256++ carried in a
4-word uint64 array so that chunked calls continue one uninterrupted
stream, bit-identical to the pure-Python mirror in `echosim.rng`.

Draw order per iteration is fixed: poster, post value, transmission, one
reception draw per neighbor in ascending id, one attraction draw per
receiver in ascending id, then per repulsed receiver (ascending id) the
rewire draw followed by target draws.  Skipped stages consume nothing.
The kernel releases the GIL, so runs with different state can execute on
concurrent threads.
"""

import numpy as np
from numba import njit

_U = np.uint64
_INV_2POW53 = 1.1102230246251565e-16  # 2**-53
_HALF_PI = np.pi * 0.5


@njit(cache=True, nogil=True, inline="always")
def _next_u64(s):
    tmp = s[0] + s[3]
    r = ((tmp << _U(23)) | (tmp >> _U(41))) + s[0]
    t = s[1] << _U(17)
    s[2] ^= s[0]
    s[3] ^= s[1]
    s[1] ^= s[2]
    s[0] ^= s[3]
    s[2] ^= t
    s[3] = (s[3] << _U(45)) | (s[3] >> _U(19))
    return r


@njit(cache=True, nogil=True, inline="always")
def _uniform(s):
    return (_next_u64(s) >> _U(11)) * _INV_2POW53


@njit(cache=True, nogil=True, inline="always")
def _randint(s, n):
    un = _U(n)
    threshold = (_U(0) - un) % un  # == 2**64 mod n
    while True:
        r = _next_u64(s)
        if r >= threshold:
            return np.int64(r % un)


@njit(cache=True, nogil=True)
def run_chunk(adj, deg, opinions, behavior, dist_kind, phase, delta, rewiring,
              n_iters, rng_state, receivers, repulsed):
    n = opinions.shape[0]
    for _ in range(n_iters):
        i = _randint(rng_state, n)
        theta = 2.0 * _uniform(rng_state) - 1.0
        bi = opinions[i]
        x = abs(theta - bi)
        kind = behavior[i]
        if kind == 0:  # posts what it loves and what it hates
            pt = np.cos(x * _HALF_PI) ** 2
        elif kind == 1:  # never posts contrarian content
            pt = np.cos(x * _HALF_PI) ** 2 if x <= 1.0 else 0.0
        else:  # posts everything
            pt = 1.0
        if _uniform(rng_state) >= pt:
            continue

        # Reception pass over the poster's neighbors.  The adjacency row and
        # all opinions are untouched so far this iteration, so the row scan
        # is the snapshot.
        nrec = 0
        for j in range(n):
            if adj[i, j]:
                xd = abs(bi - opinions[j])
                if dist_kind == 0:
                    pd = np.cos(xd * _HALF_PI + phase) ** 2
                elif dist_kind == 1:
                    pd = np.cos(xd * 0.5 * _HALF_PI + phase) ** 2
                else:
                    pd = 1.0
                if _uniform(rng_state) < pd:
                    receivers[nrec] = j
                    nrec += 1

        # Attraction / repulsion.  Updates read each receiver's own pre-step
        # opinion, which nothing else this iteration has modified.
        nrep = 0
        for r in range(nrec):
            j = receivers[r]
            bj = opinions[j]
            attracted = _uniform(rng_state) < 1.0 - abs(theta - bj) * 0.5
            d = -delta if theta < bj else delta
            nb = bj + d if attracted else bj - d
            if nb > 1.0:
                nb = 1.0
            elif nb < -1.0:
                nb = -1.0
            opinions[j] = nb
            if not attracted:
                repulsed[nrep] = j
                nrep += 1

        if rewiring:
            for r in range(nrep):
                j = repulsed[r]
                xr = abs(bi - opinions[j])
                pr = np.cos(xr * _HALF_PI) ** 2 if xr > 1.0 else 0.0
                if _uniform(rng_state) < pr:
                    if deg[j] >= n - 1:
                        continue  # no node outside {j} and its neighbors
                    while True:
                        t = _randint(rng_state, n)
                        if t != j and adj[j, t] == 0:
                            break
                    adj[j, i] = 0
                    adj[i, j] = 0
                    adj[j, t] = 1
                    adj[t, j] = 1
                    deg[i] -= 1
                    deg[t] += 1


@njit(cache=True, nogil=True)
def rng_selftest(seed_words, count):
    """Drain `count` uint64s for stream-equality tests against the Python RNG."""
    out = np.empty(count, dtype=np.uint64)
    s = seed_words.copy()
    for k in range(count):
        out[k] = _next_u64(s)
    return out
