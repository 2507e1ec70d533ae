"""Hot numeric kernels, each in a numba (``_nb``) and a NumPy (``_np``) flavour.

The public names at the bottom of this module are bound to one flavour at
import time (see :mod:`lscd._accel`). The two flavours agree up to floating
point summation order; nothing in the package depends on which one is active
beyond speed. ``benchmarks/bench_kernels.py`` times both.

Conventions shared by both flavours:

- embedding matrices are float64, C-contiguous, one row per item;
- bitwise-identical rows have cosine distance exactly 0.0 (cheap early-exit
  equality scan), so self-comparisons cannot leak rounding noise into
  downstream averages;
- graphs arrive as CSR-style arrays (``indptr``, ``indices``) with per-slot
  within/across disagreement costs already evaluated against the threshold.
"""

from __future__ import annotations

import numpy as np

from ._accel import NUMBA_ENABLED, njit

# ---------------------------------------------------------------------------
# pairwise distance matrices
# ---------------------------------------------------------------------------


def _cosine_matrix_np(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    na = np.sqrt(np.einsum("ij,ij->i", a, a))
    nb = np.sqrt(np.einsum("ij,ij->i", b, b))
    cos = (a @ b.T) / np.outer(na, nb)
    np.clip(cos, -1.0, 1.0, out=cos)
    d = 1.0 - cos
    # bitwise-equal rows must come out exactly 0, not 1ulp noise
    cand_i, cand_j = np.nonzero(d < 1e-9)
    for i, j in zip(cand_i.tolist(), cand_j.tolist()):
        if np.array_equal(a[i], b[j]):
            d[i, j] = 0.0
    return d


@njit(cache=True)
def _cosine_matrix_nb(a, b):  # pragma: no cover - numba path
    n, dim = a.shape
    m = b.shape[0]
    na = np.empty(n)
    for i in range(n):
        s = 0.0
        for t in range(dim):
            s += a[i, t] * a[i, t]
        na[i] = np.sqrt(s)
    nb = np.empty(m)
    for j in range(m):
        s = 0.0
        for t in range(dim):
            s += b[j, t] * b[j, t]
        nb[j] = np.sqrt(s)
    d = np.empty((n, m))
    for i in range(n):
        for j in range(m):
            equal = True
            for t in range(dim):
                if a[i, t] != b[j, t]:
                    equal = False
                    break
            if equal:
                d[i, j] = 0.0
                continue
            dot = 0.0
            for t in range(dim):
                dot += a[i, t] * b[j, t]
            cos = dot / (na[i] * nb[j])
            if cos > 1.0:
                cos = 1.0
            elif cos < -1.0:
                cos = -1.0
            d[i, j] = 1.0 - cos
    return d


def _canberra_matrix_np(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    n, m = a.shape[0], b.shape[0]
    d = np.empty((n, m))
    # chunked to keep the (chunk, m, dim) temporaries small
    chunk = max(1, int(2**22 // max(1, m * a.shape[1])))
    abs_b = np.abs(b)
    for lo in range(0, n, chunk):
        hi = min(n, lo + chunk)
        num = np.abs(a[lo:hi, None, :] - b[None, :, :])
        den = np.abs(a[lo:hi, None, :]) + abs_b[None, :, :]
        with np.errstate(invalid="ignore", divide="ignore"):
            frac = np.where(den > 0.0, num / np.where(den > 0.0, den, 1.0), 0.0)
        d[lo:hi] = frac.sum(axis=2)
    return d


@njit(cache=True)
def _canberra_matrix_nb(a, b):  # pragma: no cover - numba path
    n, dim = a.shape
    m = b.shape[0]
    d = np.empty((n, m))
    for i in range(n):
        for j in range(m):
            s = 0.0
            for t in range(dim):
                den = abs(a[i, t]) + abs(b[j, t])
                if den > 0.0:
                    s += abs(a[i, t] - b[j, t]) / den
            d[i, j] = s
    return d


# ---------------------------------------------------------------------------
# affinity propagation message passing
# ---------------------------------------------------------------------------


def _ap_messages_np(s, damping, max_iter, convergence_iter):
    n = s.shape[0]
    r = np.zeros((n, n))
    a = np.zeros((n, n))
    ind = np.arange(n)
    e_hist = np.zeros((n, convergence_iter), dtype=np.bool_)
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        # responsibilities
        tmp = a + s
        top = np.argmax(tmp, axis=1)
        m1 = tmp[ind, top]
        tmp[ind, top] = -np.inf
        m2 = np.max(tmp, axis=1)
        rn = s - m1[:, None]
        rn[ind, top] = s[ind, top] - m2
        r = damping * r + (1.0 - damping) * rn
        # availabilities
        rp = np.maximum(r, 0.0)
        rp[ind, ind] = r[ind, ind]
        colsum = rp.sum(axis=0)
        an = colsum[None, :] - rp
        da = an[ind, ind].copy()
        an = np.minimum(an, 0.0)
        an[ind, ind] = da
        a = damping * a + (1.0 - damping) * an
        # exemplar decisions
        e = (np.diag(a) + np.diag(r)) > 0.0
        e_hist[:, (it - 1) % convergence_iter] = e
        if it >= convergence_iter:
            counts = e_hist.sum(axis=1)
            stable = np.all((counts == convergence_iter) | (counts == 0))
            if stable and e.any():
                converged = True
                break
    return r, a, it, converged


@njit(cache=True)
def _ap_messages_nb(s, damping, max_iter, convergence_iter):  # pragma: no cover
    n = s.shape[0]
    r = np.zeros((n, n))
    a = np.zeros((n, n))
    e_hist = np.zeros((n, convergence_iter), dtype=np.bool_)
    converged = False
    it = 0
    keep = 1.0 - damping
    for it in range(1, max_iter + 1):
        for i in range(n):
            m1 = -np.inf
            m2 = -np.inf
            k1 = -1
            for k in range(n):
                v = a[i, k] + s[i, k]
                if v > m1:
                    m2 = m1
                    m1 = v
                    k1 = k
                elif v > m2:
                    m2 = v
            for k in range(n):
                if k == k1:
                    rn = s[i, k] - m2
                else:
                    rn = s[i, k] - m1
                r[i, k] = damping * r[i, k] + keep * rn
        for k in range(n):
            colsum = 0.0
            for i in range(n):
                v = r[i, k]
                if i != k and v < 0.0:
                    v = 0.0
                colsum += v
            for i in range(n):
                rp = r[i, k]
                if i != k and rp < 0.0:
                    rp = 0.0
                an = colsum - rp
                if i != k and an > 0.0:
                    an = 0.0
                a[i, k] = damping * a[i, k] + keep * an
        any_on = False
        for i in range(n):
            e = (a[i, i] + r[i, i]) > 0.0
            e_hist[i, (it - 1) % convergence_iter] = e
            if e:
                any_on = True
        if it >= convergence_iter:
            stable = True
            for i in range(n):
                c = 0
                for t in range(convergence_iter):
                    if e_hist[i, t]:
                        c += 1
                if c != 0 and c != convergence_iter:
                    stable = False
                    break
            if stable and any_on:
                converged = True
                break
    return r, a, it, converged


# ---------------------------------------------------------------------------
# correlation clustering: loss, greedy descent, exact enumeration
# ---------------------------------------------------------------------------


def _corr_loss_np(labels, ei, ej, w, tau):
    same = labels[ei] == labels[ej]
    within = np.maximum(0.0, tau - w[same])
    across = np.maximum(0.0, w[~same] - tau)
    # fsum-equivalent: stable summation of few terms; plain sum is fine here
    return float(within.sum() + across.sum())


@njit(cache=True)
def _corr_loss_nb(labels, ei, ej, w, tau):  # pragma: no cover - numba path
    loss = 0.0
    for t in range(ei.shape[0]):
        if labels[ei[t]] == labels[ej[t]]:
            v = tau - w[t]
        else:
            v = w[t] - tau
        if v > 0.0:
            loss += v
    return loss


def _greedy_descent_np(labels, indptr, indices, slot_cw, slot_ca, max_moves):
    n = labels.shape[0]
    sizes = np.bincount(labels, minlength=n)
    moves = 0
    while moves < max_moves:
        best_delta = -1e-12
        best_u = -1
        best_b = -1
        for u in range(n):
            lo, hi = indptr[u], indptr[u + 1]
            if lo == hi:
                continue
            nbr = indices[lo:hi]
            base = slot_ca[lo:hi].sum()
            adj = np.zeros(n)
            np.add.at(adj, labels[nbr], slot_cw[lo:hi] - slot_ca[lo:hi])
            cur = base + adj[labels[u]]
            empty = -1
            for b in range(n):
                if sizes[b] == 0:
                    empty = b
                    break
            for b in range(n):
                if b == labels[u]:
                    continue
                if sizes[b] == 0 and b != empty:
                    continue
                delta = (base + adj[b]) - cur
                if delta < best_delta:
                    best_delta = delta
                    best_u = u
                    best_b = b
        if best_u < 0:
            break
        sizes[labels[best_u]] -= 1
        labels[best_u] = best_b
        sizes[best_b] += 1
        moves += 1
    return moves


@njit(cache=True)
def _greedy_descent_nb(labels, indptr, indices, slot_cw, slot_ca, max_moves):  # pragma: no cover
    n = labels.shape[0]
    sizes = np.zeros(n, dtype=np.int64)
    for u in range(n):
        sizes[labels[u]] += 1
    adj = np.zeros(n)
    moves = 0
    while moves < max_moves:
        best_delta = -1e-12
        best_u = -1
        best_b = -1
        for u in range(n):
            lo = indptr[u]
            hi = indptr[u + 1]
            if lo == hi:
                continue
            base = 0.0
            for t in range(lo, hi):
                base += slot_ca[t]
                adj[labels[indices[t]]] += slot_cw[t] - slot_ca[t]
            cur = base + adj[labels[u]]
            empty = -1
            for b in range(n):
                if sizes[b] == 0:
                    empty = b
                    break
            for b in range(n):
                if b == labels[u]:
                    continue
                if sizes[b] == 0 and b != empty:
                    continue
                delta = (base + adj[b]) - cur
                if delta < best_delta:
                    best_delta = delta
                    best_u = u
                    best_b = b
            for t in range(lo, hi):
                adj[labels[indices[t]]] = 0.0
        if best_u < 0:
            break
        sizes[labels[best_u]] -= 1
        labels[best_u] = best_b
        sizes[best_b] += 1
        moves += 1
    return moves


def _brute_force_rgs_np(n, ei, ej, cw, ca):
    rgs = np.zeros(n, dtype=np.int64)
    bmax = np.zeros(n, dtype=np.int64)
    best_loss = np.inf
    best_k = n + 1
    best = rgs.copy()
    while True:
        loss = 0.0
        for t in range(ei.shape[0]):
            loss += cw[t] if rgs[ei[t]] == rgs[ej[t]] else ca[t]
        k = int(bmax[n - 1]) + 1
        if loss < best_loss - 1e-12 or (loss <= best_loss + 1e-12 and k < best_k):
            best_loss = loss
            best_k = k
            best = rgs.copy()
        i = n - 1
        while i > 0 and rgs[i] > bmax[i - 1]:
            i -= 1
        if i == 0:
            break
        rgs[i] += 1
        bmax[i] = max(bmax[i - 1], rgs[i])
        for j in range(i + 1, n):
            rgs[j] = 0
            bmax[j] = bmax[i]
    return best, best_loss


@njit(cache=True)
def _brute_force_rgs_nb(n, ei, ej, cw, ca):  # pragma: no cover - numba path
    rgs = np.zeros(n, dtype=np.int64)
    bmax = np.zeros(n, dtype=np.int64)
    best = np.zeros(n, dtype=np.int64)
    best_loss = np.inf
    best_k = n + 1
    while True:
        loss = 0.0
        for t in range(ei.shape[0]):
            if rgs[ei[t]] == rgs[ej[t]]:
                loss += cw[t]
            else:
                loss += ca[t]
        k = bmax[n - 1] + 1
        if loss < best_loss - 1e-12 or (loss <= best_loss + 1e-12 and k < best_k):
            best_loss = loss
            best_k = k
            for j in range(n):
                best[j] = rgs[j]
        i = n - 1
        while i > 0 and rgs[i] > bmax[i - 1]:
            i -= 1
        if i == 0:
            break
        rgs[i] += 1
        if rgs[i] > bmax[i - 1]:
            bmax[i] = rgs[i]
        else:
            bmax[i] = bmax[i - 1]
        for j in range(i + 1, n):
            rgs[j] = 0
            bmax[j] = bmax[i]
    return best, best_loss


# The cosine matrix is a matmul: BLAS through NumPy beats the explicit loop
# by ~10x at realistic sizes (see benchmarks/bench_kernels.py), so both paths
# share the NumPy implementation. The loop-shaped kernels go to numba.
cosine_distance_matrix = _cosine_matrix_np

if NUMBA_ENABLED:
    canberra_distance_matrix = _canberra_matrix_nb
    ap_message_passing = _ap_messages_nb
    correlation_loss_edges = _corr_loss_nb
    greedy_descent = _greedy_descent_nb
    brute_force_rgs = _brute_force_rgs_nb
else:
    canberra_distance_matrix = _canberra_matrix_np
    ap_message_passing = _ap_messages_np
    correlation_loss_edges = _corr_loss_np
    greedy_descent = _greedy_descent_np
    brute_force_rgs = _brute_force_rgs_np


def warmup() -> None:
    """Trigger JIT compilation of every kernel on tiny inputs."""
    a = np.array([[1.0, 0.0], [0.0, 1.0]])
    cosine_distance_matrix(a, a)
    canberra_distance_matrix(a, a)
    ap_message_passing(np.zeros((2, 2)), 0.9, 2, 2)
    labels = np.zeros(2, dtype=np.int64)
    ei = np.array([0], dtype=np.int64)
    ej = np.array([1], dtype=np.int64)
    w = np.array([4.0])
    correlation_loss_edges(labels, ei, ej, w, 2.5)
    indptr = np.array([0, 1, 2], dtype=np.int64)
    indices = np.array([1, 0], dtype=np.int64)
    slot = np.array([0.0, 0.0])
    greedy_descent(labels.copy(), indptr, indices, slot, slot, 4)
    brute_force_rgs(2, ei, ej, np.array([0.0]), np.array([1.5]))
