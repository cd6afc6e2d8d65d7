"""Hot loops of the Metropolis sampler.

State layout: ``H[i, x]`` is the height at which path ``i`` leaves column ``x``
(``H[i, 0] = i``) and ``D[i, x]`` is 1 when that exit is a diagonal step.
The arrival height at column ``x`` is 0 when ``x == a_i`` and
``H[i, x+1] + D[i, x+1]`` otherwise.

Random draws are made by the caller so that the compiled and interpreted
kernels consume identical streams and produce identical states.
"""
import math

import numpy as np

from ._accel import USE_NUMBA, jit

# move table: required current diag flag, height change, new diag flag
MOVE_NEED_D = np.array([0, 0, 1, 0, 1, 0], dtype=np.int64)
MOVE_DH = np.array([1, -1, 1, -1, 0, 0], dtype=np.int64)
MOVE_ND = np.array([0, 0, 0, 1, 0, 1], dtype=np.int64)


def mcmc_kernel_py(H, D, starts, site_i, site_x, picks, moves, uniforms,
                   log_g, log_q, gamma_zero, stats, codes, record_every, code_base):
    n = H.shape[0] - 1
    nsites = site_i.shape[0]
    rec = 0
    for s in range(picks.shape[0]):
        k = picks[s]
        i = site_i[k]
        x = site_x[k]
        mv = moves[s]
        d = D[i, x]
        if d == MOVE_NEED_D[mv]:
            h = H[i, x]
            nh = h + MOVE_DH[mv]
            nd = MOVE_ND[mv]
            ok = True
            if x == starts[i]:
                lo = 0
            else:
                lo = H[i, x + 1] + D[i, x + 1]
            if nh < lo or nh + nd > H[i, x - 1]:
                ok = False
            elif i < n and nh >= H[i + 1, x + 1] + D[i + 1, x + 1]:
                ok = False
            elif x - 1 <= starts[i - 1] and H[i - 1, x - 1] >= nh + nd:
                ok = False
            if ok:
                dk = nd - d
                da = 2 * (nh - h) + dk
                accept = True
                if gamma_zero:
                    if dk > 0:
                        accept = False
                    elif dk == 0:
                        lw = da * log_q
                        if lw < 0.0 and uniforms[s] >= math.exp(lw):
                            accept = False
                else:
                    lw = da * log_q + dk * log_g
                    if lw < 0.0 and uniforms[s] >= math.exp(lw):
                        accept = False
                if accept:
                    H[i, x] = nh
                    D[i, x] = nd
                    stats[0] += da
                    stats[1] += dk
                    stats[2] += 1
        if record_every > 0 and (s + 1) % record_every == 0:
            code = 0
            for j in range(nsites - 1, -1, -1):
                code = code * code_base + 2 * H[site_i[j], site_x[j]] + D[site_i[j], site_x[j]]
            codes[rec] = code
            rec += 1
    return rec


def accumulate_vertices_py(H, D, starts, up, left, diag):
    n = H.shape[0] - 1
    for i in range(1, n + 1):
        a = starts[i]
        for x in range(a, -1, -1):
            if x == a:
                e = 0
            else:
                e = H[i, x + 1] + D[i, x + 1]
            h = H[i, x]
            for y in range(e, h):
                up[x, y] += 1
            if x >= 1:
                if D[i, x] == 1:
                    diag[x, h] += 1
                else:
                    left[x, h] += 1


def accumulate_vertices_np(H, D, starts, up, left, diag):
    """Vectorised fallback of ``accumulate_vertices`` using difference arrays."""
    n = H.shape[0] - 1
    cols = np.arange(H.shape[1])
    ii, xx = np.nonzero((cols[None, :] <= starts[:, None]) & (np.arange(n + 1)[:, None] >= 1))
    if ii.size == 0:
        return
    nxt = np.minimum(xx + 1, H.shape[1] - 1)
    e = np.where(xx == starts[ii], 0, H[ii, nxt] + D[ii, nxt])
    h = H[ii, xx]
    diff = np.zeros((up.shape[0], up.shape[1] + 1), dtype=np.int64)
    np.add.at(diff, (xx, e), 1)
    np.add.at(diff, (xx, h), -1)
    up += np.cumsum(diff, axis=1)[:, :-1]
    step = xx >= 1
    dflag = D[ii, xx] == 1
    np.add.at(diag, (xx[step & dflag], h[step & dflag]), 1)
    np.add.at(left, (xx[step & ~dflag], h[step & ~dflag]), 1)


mcmc_kernel = jit(mcmc_kernel_py)
if USE_NUMBA:
    accumulate_vertices = jit(accumulate_vertices_py)
else:
    accumulate_vertices = accumulate_vertices_np
