"""Hot numeric kernels on flat amplitude vectors.

Every kernel exists twice: a loop version compiled by numba (``*_nb``) and a
vectorized numpy version (``*_np``). The unsuffixed names are bound to one of
them at import time according to :data:`qteleport._accel.USE_NUMBA`.

Conventions shared by all kernels: a state on ``n`` qubits is a complex128
vector of length ``2**n``; qubit position 0 is the most significant bit of the
amplitude index. ``targets`` is an int64 array of positions, the first target
being the most significant bit of the operator's own index.
"""
from __future__ import annotations

import math

import numpy as np

from ._accel import USE_NUMBA, njit

# ---------------------------------------------------------------------------
# shared-source kernels (identical code on both paths)


def _jacobi_eigh_py(h, tol=1e-15, max_sweeps=64):
    n = h.shape[0]
    a = np.empty((n, n), dtype=np.complex128)
    for i in range(n):
        for j in range(n):
            a[i, j] = h[i, j]
    v = np.zeros((n, n), dtype=np.complex128)
    for i in range(n):
        v[i, i] = 1.0

    total = 0.0
    for i in range(n):
        for j in range(n):
            total += abs(a[i, j]) ** 2
    for _ in range(max_sweeps):
        off = 0.0
        for p in range(n):
            for q in range(p + 1, n):
                off += abs(a[p, q]) ** 2
        if off <= tol * tol * total or off == 0.0:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                mag = abs(a[p, q])
                if mag == 0.0:
                    continue
                ph = a[p, q] / mag
                theta = 0.5 * math.atan2(2.0 * mag, a[q, q].real - a[p, p].real)
                c = math.cos(theta)
                s = math.sin(theta)
                phc = ph.conjugate()
                # A <- A J with J = diag(1, conj(ph)) @ [[c, s], [-s, c]] on (p, q)
                for i in range(n):
                    aip = a[i, p]
                    aiq = a[i, q]
                    a[i, p] = c * aip - s * phc * aiq
                    a[i, q] = s * aip + c * phc * aiq
                    vip = v[i, p]
                    viq = v[i, q]
                    v[i, p] = c * vip - s * phc * viq
                    v[i, q] = s * vip + c * phc * viq
                # A <- J^dagger A
                for j in range(n):
                    apj = a[p, j]
                    aqj = a[q, j]
                    a[p, j] = c * apj - s * ph * aqj
                    a[q, j] = s * apj + c * ph * aqj
                a[p, q] = 0.0
                a[q, p] = 0.0
                a[p, p] = a[p, p].real
                a[q, q] = a[q, q].real

    w = np.empty(n, dtype=np.float64)
    for i in range(n):
        w[i] = a[i, i].real
    order = np.argsort(w)
    w_sorted = np.empty(n, dtype=np.float64)
    v_sorted = np.empty((n, n), dtype=np.complex128)
    for k in range(n):
        w_sorted[k] = w[order[k]]
        for i in range(n):
            v_sorted[i, k] = v[i, order[k]]
    return w_sorted, v_sorted


def _sample_index_py(probs, u):
    # first index whose running total exceeds u * total; never a zero-weight index
    total = 0.0
    for k in range(probs.shape[0]):
        total += probs[k]
    target = u * total
    acc = 0.0
    last = -1
    for k in range(probs.shape[0]):
        if probs[k] > 0.0:
            last = k
        acc += probs[k]
        if target < acc and probs[k] > 0.0:
            return k
    return last


jacobi_eigh_nb = njit(_jacobi_eigh_py)
sample_index_nb = njit(_sample_index_py)


def jacobi_eigh_np(h, tol=1e-15, max_sweeps=64):
    return _jacobi_eigh_py(np.asarray(h, dtype=np.complex128), tol, max_sweeps)


def sample_index_np(probs, u):
    return _sample_index_py(np.asarray(probs, dtype=np.float64), float(u))


# ---------------------------------------------------------------------------
# numba loop kernels


def _offsets(n, targets):
    # amplitude-index offset of each target sub-index; offsets[-1] is the target mask
    k = targets.shape[0]
    dim = 1 << k
    offs = np.zeros(dim, dtype=np.int64)
    for col in range(dim):
        o = 0
        for t in range(k):
            if (col >> (k - 1 - t)) & 1:
                o |= 1 << (n - 1 - targets[t])
        offs[col] = o
    return offs


def _apply_into(amps, offs, mat, out, buf):
    dim = offs.shape[0]
    mask = offs[dim - 1]
    for i in range(amps.shape[0]):
        if i & mask:
            continue
        for col in range(dim):
            buf[col] = amps[i + offs[col]]
        for r in range(dim):
            acc = 0j
            for col in range(dim):
                acc += mat[r, col] * buf[col]
            out[i + offs[r]] = acc


def _contract_into(amps, offs, bra, out):
    dim = offs.shape[0]
    mask = offs[dim - 1]
    # bases with all target bits clear enumerate the remaining qubits in order
    j = 0
    for i in range(amps.shape[0]):
        if i & mask:
            continue
        acc = 0j
        for col in range(dim):
            acc += bra[col].conjugate() * amps[i + offs[col]]
        out[j] = acc
        j += 1


_offsets_nb = njit(_offsets)
_apply_into_nb = njit(_apply_into)
_contract_into_nb = njit(_contract_into)


def _apply_matrix_py(amps, n, mat, targets):
    offs = _offsets_nb(n, targets)
    out = np.empty(amps.shape[0], dtype=np.complex128)
    _apply_into_nb(amps, offs, mat, out, np.empty(offs.shape[0], dtype=np.complex128))
    return out


def _contract_py(amps, n, targets, bra):
    offs = _offsets_nb(n, targets)
    out = np.empty(amps.shape[0] // offs.shape[0], dtype=np.complex128)
    _contract_into_nb(amps, offs, bra, out)
    return out


apply_matrix_nb = njit(_apply_matrix_py)
contract_nb = njit(_contract_py)


def _norm2_py(v):
    s = 0.0
    for i in range(v.shape[0]):
        s += v[i].real * v[i].real + v[i].imag * v[i].imag
    return s


_norm2_nb = njit(_norm2_py)


def _simulate_trials_py(world, bell, sqrt_povm, outcome_vecs, recovery, target, uniforms):
    trials = uniforms.shape[0]
    bell_23 = np.empty(trials, dtype=np.int64)
    bell_14 = np.empty(trials, dtype=np.int64)
    index = np.empty(trials, dtype=np.int64)
    fid = np.full(trials, np.nan)
    branch_prob = np.empty(trials, dtype=np.float64)

    offs23 = _offsets_nb(6, np.array([1, 2], dtype=np.int64))
    offs14 = _offsets_nb(4, np.array([0, 1], dtype=np.int64))
    offs_anc = _offsets_nb(4, np.array([2, 3], dtype=np.int64))
    offs5a = _offsets_nb(4, np.array([0, 2], dtype=np.int64))
    offs6b = _offsets_nb(4, np.array([1, 3], dtype=np.int64))
    cnot = np.zeros((4, 4), dtype=np.complex128)
    cnot[0, 0] = 1.0
    cnot[1, 1] = 1.0
    cnot[2, 3] = 1.0
    cnot[3, 2] = 1.0
    n_out = sqrt_povm.shape[0]

    p1 = np.empty(4)
    p2 = np.empty(4)
    pm = np.empty(n_out)
    br1 = np.empty((4, 16), dtype=np.complex128)
    br2 = np.empty((4, 4), dtype=np.complex128)
    phis = np.empty((n_out, 16), dtype=np.complex128)
    full = np.empty(16, dtype=np.complex128)
    tmp = np.empty(16, dtype=np.complex128)
    s1 = np.empty(16, dtype=np.complex128)
    r = np.empty(4, dtype=np.complex128)
    buf = np.empty(4, dtype=np.complex128)
    for t in range(trials):
        for k in range(4):
            _contract_into_nb(world, offs23, bell[k], br1[k])
            p1[k] = _norm2_nb(br1[k])
        k1 = sample_index_nb(p1, uniforms[t, 0])
        scale = 1.0 / math.sqrt(p1[k1])
        for j in range(16):
            s1[j] = br1[k1, j] * scale

        for k in range(4):
            _contract_into_nb(s1, offs14, bell[k], br2[k])
            p2[k] = _norm2_nb(br2[k])
        k2 = sample_index_nb(p2, uniforms[t, 1])
        scale = 1.0 / math.sqrt(p2[k2])

        full[:] = 0.0
        for j in range(4):
            full[j * 4] = br2[k2, j] * scale
        _apply_into_nb(full, offs5a, cnot, tmp, buf)
        _apply_into_nb(tmp, offs6b, cnot, full, buf)

        for m in range(n_out):
            _apply_into_nb(full, offs_anc, sqrt_povm[m], phis[m], buf)
            pm[m] = _norm2_nb(phis[m])
        m_hat = sample_index_nb(pm, uniforms[t, 2])

        bell_23[t] = k1
        bell_14[t] = k2
        index[t] = m_hat
        branch_prob[t] = p1[k1] * p2[k2]
        if m_hat < outcome_vecs.shape[0]:
            # projecting onto the outcome vector factors Bob's pair out; normalize once at the end
            _contract_into_nb(phis[m_hat], offs_anc, outcome_vecs[m_hat], r)
            rn = math.sqrt(_norm2_nb(r))
            op = recovery[k1 * 4 + k2, m_hat]
            ov = 0j
            for i in range(4):
                rec_i = 0j
                for j in range(4):
                    rec_i += op[i, j] * r[j]
                ov += target[i].conjugate() * rec_i
            ov /= rn
            fid[t] = ov.real * ov.real + ov.imag * ov.imag
    return bell_23, bell_14, index, fid, branch_prob


simulate_trials_nb = njit(_simulate_trials_py)


# ---------------------------------------------------------------------------
# vectorized numpy kernels


def _apply_tensor(psi, lead, n, mat, targets):
    """Apply ``mat`` to a tensor with ``lead`` batch axes followed by ``n`` qubit axes."""
    k = len(targets)
    m = mat.reshape((2,) * (2 * k))
    axes = [lead + int(t) for t in targets]
    res = np.tensordot(psi, m, axes=(axes, list(range(k, 2 * k))))
    # tensordot appends the new target axes at the end
    return np.moveaxis(res, list(range(res.ndim - k, res.ndim)), axes)


def apply_matrix_np(amps, n, mat, targets):
    psi = np.asarray(amps, dtype=np.complex128).reshape((2,) * n)
    return _apply_tensor(psi, 0, n, np.asarray(mat, dtype=np.complex128), targets).reshape(-1)


def contract_np(amps, n, targets, bra):
    k = len(targets)
    psi = np.asarray(amps, dtype=np.complex128).reshape((2,) * n)
    b = np.conj(np.asarray(bra, dtype=np.complex128)).reshape((2,) * k)
    res = np.tensordot(psi, b, axes=([int(t) for t in targets], list(range(k))))
    return np.ascontiguousarray(res).reshape(-1)


def apply_matrix_batch_np(states, n, mat, targets):
    batch = states.shape[0]
    psi = states.reshape((batch,) + (2,) * n)
    return _apply_tensor(psi, 1, n, mat, targets).reshape(batch, -1)


def contract_batch_np(states, n, targets, bra):
    batch = states.shape[0]
    k = len(targets)
    psi = states.reshape((batch,) + (2,) * n)
    b = np.conj(bra).reshape((2,) * k)
    res = np.tensordot(psi, b, axes=([1 + int(t) for t in targets], list(range(k))))
    return np.ascontiguousarray(res).reshape(batch, -1)


def sample_index_batch_np(probs, u):
    """Row-wise :func:`sample_index` for a (trials, outcomes) probability table."""
    cum = np.cumsum(probs, axis=1)
    target = u * cum[:, -1]
    idx = np.sum(cum <= target[:, None], axis=1)
    overflow = idx >= probs.shape[1]
    if np.any(overflow):
        positive = probs[overflow] > 0.0
        last = probs.shape[1] - 1 - np.argmax(positive[:, ::-1], axis=1)
        idx[overflow] = last
    return idx


def _branch_table(states, n, targets, bell):
    """All four Bell projections of a batch: returns (trials, 4, 2**(n-2)) and probabilities."""
    br = np.stack([contract_batch_np(states, n, targets, bell[k]) for k in range(4)], axis=1)
    return br, np.sum(np.abs(br) ** 2, axis=2)


def simulate_trials_np(world, bell, sqrt_povm, outcome_vecs, recovery, target, uniforms):
    trials = uniforms.shape[0]
    rows = np.arange(trials)
    states = np.broadcast_to(np.asarray(world, dtype=np.complex128), (trials, world.shape[0]))

    br1, p1 = _branch_table(states, 6, [1, 2], bell)
    k1 = sample_index_batch_np(p1, uniforms[:, 0])
    s1 = br1[rows, k1] / np.sqrt(p1[rows, k1])[:, None]

    br2, p2 = _branch_table(s1, 4, [0, 1], bell)
    k2 = sample_index_batch_np(p2, uniforms[:, 1])
    bob = br2[rows, k2] / np.sqrt(p2[rows, k2])[:, None]

    full = np.zeros((trials, 16), dtype=np.complex128)
    full[:, ::4] = bob
    cnot = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=np.complex128)
    full = apply_matrix_batch_np(full, 4, cnot, [0, 2])
    full = apply_matrix_batch_np(full, 4, cnot, [1, 3])

    phis = np.stack([apply_matrix_batch_np(full, 4, sqrt_povm[m], [2, 3]) for m in range(sqrt_povm.shape[0])], axis=1)
    pm = np.sum(np.abs(phis) ** 2, axis=2)
    m_hat = sample_index_batch_np(pm, uniforms[:, 2])

    fid = np.full(trials, np.nan)
    hit = m_hat < outcome_vecs.shape[0]
    if np.any(hit):
        rh = rows[hit]
        mh = m_hat[hit]
        post = phis[rh, mh] / np.sqrt(pm[rh, mh])[:, None]
        # project the ancilla pair onto each trial's own outcome vector
        psi = post.reshape(-1, 4, 4)
        r = np.einsum("tuv,tv->tu", psi, np.conj(outcome_vecs[mh]))
        r /= np.linalg.norm(r, axis=1)[:, None]
        ops = recovery[k1[hit] * 4 + k2[hit], mh]
        rec = np.einsum("tij,tj->ti", ops, r)
        fid[hit] = np.abs(rec @ np.conj(target)) ** 2
    branch_prob = p1[rows, k1] * p2[rows, k2]
    return k1.astype(np.int64), k2.astype(np.int64), m_hat.astype(np.int64), fid, branch_prob


# ---------------------------------------------------------------------------
# exported names

if USE_NUMBA:
    apply_matrix = apply_matrix_nb
    contract = contract_nb
    jacobi_eigh = jacobi_eigh_nb
    sample_index = sample_index_nb
    simulate_trials = simulate_trials_nb
else:
    apply_matrix = apply_matrix_np
    contract = contract_np
    jacobi_eigh = jacobi_eigh_np
    sample_index = sample_index_np
    simulate_trials = simulate_trials_np

__all__ = [
    "apply_matrix",
    "contract",
    "jacobi_eigh",
    "sample_index",
    "simulate_trials",
]
