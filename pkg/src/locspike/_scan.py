"""Causal scan kernels: forward step/sequence and the reverse surrogate pass.

Two implementations share one arithmetic contract:

* ``*_nb``: explicit loops compiled by numba (``nogil`` so threads overlap).
* ``*_np``: per-step numpy, vectorised over neurons.

Within a backend, the whole-sequence forward is a loop over the single-step
routine used by streaming sessions, so both are bit-identical. The two
backends agree to rounding only.

Ring-buffer layout: ``xbuf`` is (in, L), ``sbuf`` is (out, L); the column for
step ``k`` is ``k % L``. ``sbuf`` holds emitted spikes (0/1) or, in relaxed
mode, the smooth spike value.
"""
import math

import numpy as np

from ._accel import HAVE_NUMBA, njit

# ---------------------------------------------------------------- numpy path


def _relaxed_np(u, theta, alpha, beta):
    d = u - theta
    return np.where(d < 0, (alpha / beta) * np.exp(beta * np.minimum(d, 0.0)),
                    (alpha / beta) * (2.0 - np.exp(-beta * np.maximum(d, 0.0))))


def step_np(W, eps, eta, theta, alpha, beta, relaxed, xbuf, sbuf, k, x_col,
            psp_out, syn_out, u_out, s_out):
    L = eps.shape[0]
    head = k % L
    xbuf[:, head] = x_col
    idx = (head - np.arange(L)) % L
    psp = xbuf[:, idx] @ eps
    syn = W @ psp
    if L > 1:
        u = syn + sbuf[:, idx[1:]] @ eta[1:]
    else:
        u = syn + 0.0
    if relaxed:
        s = _relaxed_np(u, theta, alpha, beta)
    else:
        s = (u > theta).astype(np.float64)
    sbuf[:, head] = s
    psp_out[:] = psp
    syn_out[:] = syn
    u_out[:] = u
    s_out[:] = s


def forward_np(W, eps, eta, theta, alpha, beta, relaxed, x):
    n_out, n_in = W.shape
    S = x.shape[1]
    L = eps.shape[0]
    xbuf = np.zeros((n_in, L))
    sbuf = np.zeros((n_out, L))
    psp = np.zeros((n_in, S))
    syn = np.zeros((n_out, S))
    u = np.zeros((n_out, S))
    s = np.zeros((n_out, S))
    for k in range(S):
        step_np(W, eps, eta, theta, alpha, beta, relaxed, xbuf, sbuf, k, x[:, k],
                psp[:, k], syn[:, k], u[:, k], s[:, k])
    return psp, syn, u, s


def backward_np(u, g, eta, theta, alpha, beta):
    n_out, S = u.shape
    L = eta.shape[0]
    sig = alpha * np.exp(-beta * np.abs(u - theta))
    delta = np.zeros((n_out, S))
    for k in range(S - 1, -1, -1):
        acc = g[:, k].copy()
        for m in range(1, min(L, S - k)):
            acc += eta[m] * delta[:, k + m]
        delta[:, k] = sig[:, k] * acc
    return delta


# ---------------------------------------------------------------- numba path


@njit(cache=True, nogil=True)
def step_nb(W, eps, eta, theta, alpha, beta, relaxed, xbuf, sbuf, k, x_col,
            psp_out, syn_out, u_out, s_out):
    n_out, n_in = W.shape
    L = eps.shape[0]
    head = k % L
    for j in range(n_in):
        xbuf[j, head] = x_col[j]
    for j in range(n_in):
        acc = 0.0
        for m in range(L):
            acc += eps[m] * xbuf[j, (head - m) % L]
        psp_out[j] = acc
    for i in range(n_out):
        acc = 0.0
        for j in range(n_in):
            acc += W[i, j] * psp_out[j]
        syn_out[i] = acc
        ref = 0.0
        for m in range(1, L):
            ref += eta[m] * sbuf[i, (head - m) % L]
        ui = acc + ref
        u_out[i] = ui
        if relaxed:
            d = ui - theta
            if d < 0:
                si = (alpha / beta) * math.exp(beta * d)
            else:
                si = (alpha / beta) * (2.0 - math.exp(-beta * d))
        else:
            si = 1.0 if ui > theta else 0.0
        s_out[i] = si
        sbuf[i, head] = si


@njit(cache=True, nogil=True)
def forward_nb(W, eps, eta, theta, alpha, beta, relaxed, x):
    n_out, n_in = W.shape
    S = x.shape[1]
    L = eps.shape[0]
    xbuf = np.zeros((n_in, L))
    sbuf = np.zeros((n_out, L))
    psp = np.zeros((n_in, S))
    syn = np.zeros((n_out, S))
    u = np.zeros((n_out, S))
    s = np.zeros((n_out, S))
    x_col = np.zeros(n_in)
    pc = np.zeros(n_in)
    yc = np.zeros(n_out)
    uc = np.zeros(n_out)
    sc = np.zeros(n_out)
    for k in range(S):
        for j in range(n_in):
            x_col[j] = x[j, k]
        step_nb(W, eps, eta, theta, alpha, beta, relaxed, xbuf, sbuf, k, x_col,
                pc, yc, uc, sc)
        for j in range(n_in):
            psp[j, k] = pc[j]
        for i in range(n_out):
            syn[i, k] = yc[i]
            u[i, k] = uc[i]
            s[i, k] = sc[i]
    return psp, syn, u, s


@njit(cache=True, nogil=True)
def backward_nb(u, g, eta, theta, alpha, beta):
    n_out, S = u.shape
    L = eta.shape[0]
    delta = np.zeros((n_out, S))
    for i in range(n_out):
        for k in range(S - 1, -1, -1):
            acc = g[i, k]
            for m in range(1, L):
                if k + m >= S:
                    break
                acc += eta[m] * delta[i, k + m]
            delta[i, k] = alpha * math.exp(-beta * abs(u[i, k] - theta)) * acc
    return delta


# ---------------------------------------------------------------- dispatch

if HAVE_NUMBA:
    step, forward, backward = step_nb, forward_nb, backward_nb
else:
    step, forward, backward = step_np, forward_np, backward_np
