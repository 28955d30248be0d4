"""Waiting-time Monte Carlo kernels.

Both kernels consume the same counter-based uniforms in the same order:
counter 0 picks the initial vector, then each jump uses one draw for the
waiting time and one for the channel.

The waiting time solves ``p(s) = u`` for the survival probability
``p(s) = |e^{-sK} psi|^2``, which is non-increasing with
``p'(s) = -<phi(s)|(K + K^dagger)|phi(s)>``. Newton steps are kept inside a
bisection bracket and iteration stops once ``|p(s) - u| <= PROB_TOL``.

Status codes: 0 ok, 2 event cap reached, 3 norm underflow at a jump.
"""
from __future__ import annotations

import math
import os

import numba
import numpy as np
from numba import njit, prange

from .rng import GAMMA, INV53, S11, mix_jit, stream_keys, uniforms

if "NUMBA_THREADING_LAYER" not in os.environ:
    # the system TBB is too old for numba and only produces a warning
    numba.config.THREADING_LAYER_PRIORITY = ["omp", "workqueue", "tbb"]

MAX_EVENTS = 1_000_000
PROB_TOL = 1e-10
MAX_ITER = 200
UNDERFLOW = 1e-300
OK, CAPPED, UNDERFLOWED = 0, 2, 3


def disabled() -> bool:
    return os.environ.get("QDSFLUCT_DISABLE_NUMBA", "").strip().lower() not in ("", "0", "false", "no")


# --- compiled kernel -------------------------------------------------------------


@njit(cache=True)
def _phi(lam, V, c, s, out, tmp):
    """``out = e^{-sK} psi`` given ``c = V^{-1} psi``; returns ``|out|^2``."""
    d = lam.shape[0]
    for b in range(d):
        tmp[b] = np.exp(-s * lam[b]) * c[b]
    n = 0.0
    for a in range(d):
        acc = 0j
        for b in range(d):
            acc += V[a, b] * tmp[b]
        out[a] = acc
        n += acc.real ** 2 + acc.imag ** 2
    return n


@njit(cache=True)
def _slope(G, phi):
    d = phi.shape[0]
    acc = 0.0
    for a in range(d):
        row = 0j
        for b in range(d):
            row += G[a, b] * phi[b]
        acc += (phi[a].conjugate() * row).real
    return -acc


@njit(cache=True)
def _wait(lam, V, G, c, u, rem, buf, tmp):
    """Root of ``p(s) = u`` on ``[0, rem]`` given ``p(0) = 1 > u >= p(rem)``."""
    lo = 0.0
    hi = rem
    s = 0.0
    p = 1.0
    dp = _slope(G, buf)  # buf holds phi(0) on entry
    for _ in range(MAX_ITER):
        if dp < 0.0:
            nxt = s - (p - u) / dp
        else:
            nxt = -1.0
        if not (lo < nxt < hi):
            nxt = 0.5 * (lo + hi)
        s = nxt
        p = _phi(lam, V, c, s, buf, tmp)
        if abs(p - u) <= PROB_TOL or hi - lo <= 1e-15 * rem:
            break
        if p > u:
            lo = s
        else:
            hi = s
        dp = _slope(G, buf)
    return s, p


@njit(parallel=True, cache=True)
def _rates_numba(lam, V, Vinv, G, W, res, quanta, M, init_vecs, init_cum, t, key0, max_events):
    N = key0.shape[0]
    d = lam.shape[0]
    C = W.shape[0]
    rates = np.zeros((N, M))
    counts = np.zeros(N, dtype=np.int64)
    status = np.zeros(N, dtype=np.int64)
    for n in prange(N):
        key = key0[n]
        ctr = 0
        u = np.float64(mix_jit(key + np.uint64(ctr) * GAMMA) >> S11) * INV53
        ctr += 1
        i0 = 0
        while i0 < init_cum.shape[0] - 1 and init_cum[i0] <= u:
            i0 += 1
        psi = init_vecs[i0].copy()
        c = np.zeros(d, dtype=np.complex128)
        buf = np.zeros(d, dtype=np.complex128)
        phi = np.zeros(d, dtype=np.complex128)
        tmp = np.zeros(d, dtype=np.complex128)
        wts = np.zeros(C)
        now = 0.0
        while True:
            for a in range(d):
                acc = 0j
                for b in range(d):
                    acc += Vinv[a, b] * psi[b]
                c[a] = acc
            u = np.float64(mix_jit(key + np.uint64(ctr) * GAMMA) >> S11) * INV53
            ctr += 1
            rem = t - now
            if _phi(lam, V, c, rem, buf, tmp) > u:
                break
            for a in range(d):
                buf[a] = psi[a]
            s, p = _wait(lam, V, G, c, u, rem, buf, tmp)
            now += s
            scale = 1.0 / math.sqrt(p)
            for a in range(d):
                buf[a] *= scale
            u = np.float64(mix_jit(key + np.uint64(ctr) * GAMMA) >> S11) * INV53
            ctr += 1
            total = 0.0
            for k in range(C):
                w = 0.0
                for a in range(d):
                    acc = 0j
                    for b in range(d):
                        acc += W[k, a, b] * buf[b]
                    w += acc.real ** 2 + acc.imag ** 2
                wts[k] = w
                total += w
            if total <= UNDERFLOW:
                status[n] = UNDERFLOWED
                break
            target = u * total
            k = 0
            cum = wts[0]
            while k < C - 1 and cum <= target:
                k += 1
                cum += wts[k]
            for a in range(d):
                acc = 0j
                for b in range(d):
                    acc += W[k, a, b] * buf[b]
                phi[a] = acc
            scale = 1.0 / math.sqrt(wts[k])
            for a in range(d):
                psi[a] = phi[a] * scale
            rates[n, res[k]] += quanta[k]
            counts[n] += 1
            if counts[n] >= max_events:
                status[n] = CAPPED
                break
        for j in range(M):
            rates[n, j] /= t
    return rates, counts, status


# --- vectorized numpy kernel ------------------------------------------------------


def _phi_np(prop, c, s):
    amp = (c * np.exp(-s[:, None] * prop.lam[None, :])) @ prop.V.T
    return amp, np.einsum("na,na->n", amp.real, amp.real) + np.einsum("na,na->n", amp.imag, amp.imag)


def _slope_np(G, phi):
    return -np.einsum("na,na->n", phi.conj(), phi @ G.T).real


def _wait_np(prop, G, c, psi, u, rem):
    n = u.size
    lo = np.zeros(n)
    hi = rem.copy()
    s = np.zeros(n)
    p = np.ones(n)
    dp = _slope_np(G, psi)
    amp = psi.copy()
    todo = np.arange(n)
    for _ in range(MAX_ITER):
        if not todo.size:
            break
        sl, pl, dl, lol, hil = s[todo], p[todo], dp[todo], lo[todo], hi[todo]
        with np.errstate(divide="ignore", invalid="ignore"):
            nxt = np.where(dl < 0, sl - (pl - u[todo]) / dl, -1.0)
        bad = ~((lol < nxt) & (nxt < hil))
        nxt = np.where(bad, 0.5 * (lol + hil), nxt)
        a, pn = _phi_np(prop, c[todo], nxt)
        s[todo] = nxt
        p[todo] = pn
        amp[todo] = a
        done = (np.abs(pn - u[todo]) <= PROB_TOL) | (hil - lol <= 1e-15 * rem[todo])
        up = pn > u[todo]
        lo[todo] = np.where(up, nxt, lol)
        hi[todo] = np.where(up, hil, nxt)
        keep = ~done
        todo = todo[keep]
        dp[todo] = _slope_np(G, a[keep])
    return s, p, amp


def run_numpy(prop, chans, init_vecs, init_cum, t, keys, max_events=MAX_EVENTS, record=False):
    N = keys.shape[0]
    M = chans.n_reservoirs
    W = chans.ops
    G = chans.K + chans.K.conj().T
    res = chans.reservoirs
    quanta = chans.quanta
    rates = np.zeros((N, M))
    counts = np.zeros(N, dtype=np.int64)
    status = np.zeros(N, dtype=np.int64)
    ctr = np.zeros(N, dtype=np.int64)
    events = [] if record else None

    u = uniforms(keys, ctr)
    ctr += 1
    i0 = np.minimum(np.searchsorted(init_cum, u, side="right"), len(init_cum) - 1)
    psi = init_vecs[i0].astype(complex)
    now = np.zeros(N)
    active = np.arange(N)
    while active.size:
        c = psi[active] @ prop.Vinv.T
        u = uniforms(keys[active], ctr[active])
        ctr[active] += 1
        rem = t - now[active]
        _, p_end = _phi_np(prop, c, rem)
        jump = ~(p_end > u)
        active, c, u, rem = active[jump], c[jump], u[jump], rem[jump]
        if not active.size:
            break
        s, p, amp = _wait_np(prop, G, c, psi[active], u, rem)
        now[active] += s
        amp = amp / np.sqrt(p)[:, None]
        u = uniforms(keys[active], ctr[active])
        ctr[active] += 1
        if W.shape[0] == 0:
            status[active] = UNDERFLOWED
            break
        out = np.einsum("kab,nb->nka", W, amp)
        wts = np.einsum("nka,nka->nk", out.real, out.real) + np.einsum("nka,nka->nk", out.imag, out.imag)
        total = wts.sum(axis=1)
        dead = total <= UNDERFLOW
        status[active[dead]] = UNDERFLOWED
        cum = np.cumsum(wts, axis=1)
        k = np.minimum((cum <= (u * total)[:, None]).sum(axis=1), W.shape[0] - 1)
        rows = np.arange(active.size)
        new = out[rows, k] / np.sqrt(np.where(dead, 1.0, wts[rows, k]))[:, None]
        live = ~dead
        a_live = active[live]
        psi[a_live] = new[live]
        np.add.at(rates, (a_live, res[k[live]]), quanta[k[live]])
        counts[a_live] += 1
        if record:
            events.append(np.column_stack([a_live, res[k[live]], quanta[k[live]], now[a_live]]))
        capped = counts[a_live] >= max_events
        status[a_live[capped]] = CAPPED
        active = a_live[~capped]
    rates /= t
    return rates, counts, status, events


def run_numba(prop, chans, init_vecs, init_cum, t, keys, max_events=MAX_EVENTS):
    W = chans.ops
    if W.shape[0] == 0:
        W = np.zeros((1,) + prop.V.shape, dtype=complex)
        res = np.zeros(1, dtype=np.int64)
        quanta = np.zeros(1)
    else:
        res, quanta = chans.reservoirs, chans.quanta
    G = np.ascontiguousarray(chans.K + chans.K.conj().T, dtype=complex)
    return _rates_numba(prop.lam, prop.V, prop.Vinv, G, W, res, quanta, chans.n_reservoirs,
                        np.ascontiguousarray(init_vecs, dtype=complex), np.asarray(init_cum, float),
                        float(t), np.asarray(keys, dtype=np.uint64), int(max_events))


def keys_for(seed: int, first: int, N: int) -> np.ndarray:
    return stream_keys(seed, np.arange(first, first + N, dtype=np.uint64))
