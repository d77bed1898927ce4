"""Compiled SMO inner loop for the binary soft-margin SVM dual."""

import numpy as np
from numba import njit

_TAU = 1e-12
_SNAP = 1e-12


@njit(cache=True, nogil=True)
def smo_solve(K, y, C, tol, max_iter, max_stall):
    """Minimize 0.5 a'Qa - sum(a), Q_ij = y_i y_j K_ij, s.t. 0 <= a <= C, y'a = 0.

    Working pair: i = argmin E over I_up, j = argmax E over I_low (the
    maximal KKT-violating pair, i.e. the pair with largest |E_i - E_j|);
    index order breaks ties. Stops when E_j - E_i < tol, after ``max_stall``
    consecutive steps that leave alpha unchanged, or after ``max_iter`` steps.

    Returns (alpha, bias, n_iter, gap).
    """
    n = y.shape[0]
    alpha = np.zeros(n)
    # E_t = sum_s a_s y_s K_st - y_t  (bias-free output error)
    E = -y.astype(np.float64)
    it = 0
    stall = 0
    gap = np.inf
    while it < max_iter:
        i = -1
        j = -1
        e_i = np.inf
        e_j = -np.inf
        for t in range(n):
            up = (y[t] > 0 and alpha[t] < C) or (y[t] < 0 and alpha[t] > 0)
            low = (y[t] > 0 and alpha[t] > 0) or (y[t] < 0 and alpha[t] < C)
            if up and E[t] < e_i:
                e_i = E[t]
                i = t
            if low and E[t] > e_j:
                e_j = E[t]
                j = t
        if i < 0 or j < 0:
            gap = 0.0
            break
        gap = e_j - e_i
        if gap < tol:
            break

        yi = y[i]
        yj = y[j]
        ai = alpha[i]
        aj = alpha[j]
        if yi != yj:
            lo = max(0.0, aj - ai)
            hi = min(C, C + aj - ai)
        else:
            lo = max(0.0, ai + aj - C)
            hi = min(C, ai + aj)
        eta = K[i, i] + K[j, j] - 2.0 * K[i, j]
        if eta <= 0:
            eta = _TAU
        aj_new = aj + yj * (E[i] - E[j]) / eta
        if aj_new > hi:
            aj_new = hi
        elif aj_new < lo:
            aj_new = lo
        ai_new = ai + yi * yj * (aj - aj_new)
        # snap round-off at the box edges, otherwise a multiplier a hair
        # inside the box keeps getting selected with a zero-length step
        eps = _SNAP * C
        if ai_new < eps:
            ai_new = 0.0
        elif ai_new > C - eps:
            ai_new = C
        if aj_new < eps:
            aj_new = 0.0
        elif aj_new > C - eps:
            aj_new = C

        di = (ai_new - ai) * yi
        dj = (aj_new - aj) * yj
        if di == 0.0 and dj == 0.0:
            stall += 1
            if stall >= max_stall:
                break
        else:
            stall = 0
        alpha[i] = ai_new
        alpha[j] = aj_new
        for t in range(n):
            E[t] += di * K[i, t] + dj * K[j, t]
        it += 1

    # bias: average over free vectors, else midpoint of the feasible interval
    s = 0.0
    n_free = 0
    lb = -np.inf
    ub = np.inf
    for t in range(n):
        f = -E[t]
        if 0.0 < alpha[t] < C:
            s += f
            n_free += 1
        elif (y[t] > 0 and alpha[t] <= 0.0) or (y[t] < 0 and alpha[t] >= C):
            if f > lb:
                lb = f
        else:
            if f < ub:
                ub = f
    if n_free > 0:
        b = s / n_free
    elif np.isfinite(lb) and np.isfinite(ub):
        b = 0.5 * (lb + ub)
    elif np.isfinite(lb):
        b = lb
    elif np.isfinite(ub):
        b = ub
    else:
        b = 0.0
    return alpha, b, it, gap
