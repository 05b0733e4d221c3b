"""Hot kernels: estimation objectives and the Nelder-Mead minimiser.

Every objective takes unconstrained parameters ``t`` and ``logx``, the logs of
the observations sorted ascending. Two implementations exist side by side:
scalar loops compiled by numba (``*_nb``) and vectorised numpy (``*_np``).
``objective`` / ``minimize`` point at whichever backend is active; the
benchmark imports both explicitly.

Parameter transforms
    RBTLL   (gamma, log upsilon, logit p)
    LL      (log scale, log shape)
    Weibull (log shape, log scale)
    TW      (log shape, log scale, atanh lambda)
"""
import math
import types

import numpy as np

from ._backend import USE_NUMBA, njit

MLE, LSE, WLSE, ADE, CVME, MPSE, RTADE = range(7)
LL_NLL, W_NLL, TW_NLL = 7, 8, 9
N_PARAMS = (3, 3, 3, 3, 3, 3, 3, 2, 2, 3)

F_MIN = 1e-300
F_MAX = 1.0 - 1e-16
SPACING_MIN = 1e-300
BIG = 1e300


@njit
def _softplus(s):
    if s > 0.0:
        return s + math.log1p(math.exp(-s))
    return math.log1p(math.exp(s))


def _decode(code, t):
    """Map unconstrained ``t`` to natural parameters."""
    out = np.empty(t.shape[0])
    if code <= RTADE:
        out[0] = t[0]
        out[1] = np.exp(t[1])
        out[2] = 1.0 / (1.0 + np.exp(-t[2]))
    elif code == TW_NLL:
        out[0] = np.exp(t[0])
        out[1] = np.exp(t[1])
        out[2] = math.tanh(t[2])
    else:
        out[0] = np.exp(t[0])
        out[1] = np.exp(t[1])
    return out


decode = njit(_decode)


@njit
def _rbtll_cdf_loop(gamma, upsilon, p, logx):
    n = logx.shape[0]
    F = np.empty(n)
    for i in range(n):
        L = _softplus(gamma + upsilon * logx[i])
        v = -math.expm1(-L) - p * L * math.exp(-L)
        F[i] = min(max(v, F_MIN), F_MAX)
    return F


@njit
def _objective_nb(code, t, logx):
    n = logx.shape[0]
    th = decode(code, t)
    for k in range(th.shape[0]):
        if not math.isfinite(th[k]):
            return np.inf
    if code <= RTADE and (th[1] <= 0.0 or th[2] <= 0.0 or th[2] >= 1.0):
        return np.inf
    total = 0.0
    if code == MLE:
        gamma, upsilon, p = th[0], th[1], th[2]
        lu = math.log(upsilon)
        for i in range(n):
            s = gamma + upsilon * logx[i]
            L = _softplus(s)
            b = 1.0 - p + p * L
            if b <= 0.0:
                return np.inf
            total -= s + lu - logx[i] - 2.0 * L + math.log(b)
    elif code == LL_NLL:
        la, beta = t[0], th[1]
        lb = math.log(beta)
        for i in range(n):
            u = beta * (logx[i] - la)
            total -= lb - logx[i] + u - 2.0 * _softplus(u)
    elif code == W_NLL or code == TW_NLL:
        c = th[0]
        ls = t[1]
        lc = math.log(c)
        lam = th[2] if code == TW_NLL else 0.0
        for i in range(n):
            y = c * (logx[i] - ls)
            w = math.exp(y)
            total -= lc - logx[i] + y - w
            if code == TW_NLL:
                G = -math.expm1(-w)
                b = 1.0 + lam - 2.0 * lam * G
                if b <= 0.0:
                    return np.inf
                total -= math.log(b)
    else:
        F = _rbtll_cdf_loop(th[0], th[1], th[2], logx)
        nf = float(n)
        if code == LSE:
            for i in range(n):
                r = F[i] - (i + 1) / (nf + 1.0)
                total += r * r
        elif code == WLSE:
            for i in range(n):
                r = F[i] - (i + 1) / (nf + 1.0)
                total += (nf + 1.0) ** 2 * (nf + 2.0) / ((i + 1) * (nf - i)) * r * r
        elif code == ADE:
            acc = 0.0
            for i in range(n):
                acc += (2.0 * i + 1.0) * (math.log(F[i]) + math.log1p(-F[n - 1 - i]))
            total = -nf - acc / nf
        elif code == CVME:
            total = 1.0 / (12.0 * nf)
            for i in range(n):
                r = F[i] - (2.0 * i + 1.0) / (2.0 * nf)
                total += r * r
        elif code == MPSE:
            prev = 0.0
            for i in range(n + 1):
                cur = F[i] if i < n else 1.0
                d = cur - prev
                if d < SPACING_MIN:
                    d = SPACING_MIN
                total -= math.log(d)
                prev = cur
            total /= nf + 1.0
        else:
            sF = 0.0
            acc = 0.0
            for i in range(n):
                sF += F[i]
                acc += (2.0 * i + 1.0) * math.log1p(-F[n - 1 - i])
            total = nf / 2.0 - 2.0 * sF - acc / nf
    if math.isnan(total):
        return np.inf
    return total


def _objective_np(code, t, logx):
    n = logx.shape[0]
    with np.errstate(all="ignore"):
        th = _decode(code, np.asarray(t, dtype=float))
        if not np.all(np.isfinite(th)):
            return np.inf
        if code <= RTADE and (th[1] <= 0.0 or th[2] <= 0.0 or th[2] >= 1.0):
            return np.inf
        i = np.arange(1, n + 1, dtype=float)
        if code == MLE:
            gamma, upsilon, p = th
            s = gamma + upsilon * logx
            L = np.logaddexp(0.0, s)
            total = -np.sum(s + math.log(upsilon) - logx - 2.0 * L + np.log(1.0 - p + p * L))
        elif code == LL_NLL:
            beta = th[1]
            u = beta * (logx - t[0])
            total = -np.sum(math.log(beta) - logx + u - 2.0 * np.logaddexp(0.0, u))
        elif code in (W_NLL, TW_NLL):
            c = th[0]
            y = c * (logx - t[1])
            w = np.exp(y)
            total = -np.sum(math.log(c) - logx + y - w)
            if code == TW_NLL:
                lam = th[2]
                total -= np.sum(np.log(1.0 + lam - 2.0 * lam * -np.expm1(-w)))
        else:
            gamma, upsilon, p = th
            L = np.logaddexp(0.0, gamma + upsilon * logx)
            F = np.clip(-np.expm1(-L) - p * L * np.exp(-L), F_MIN, F_MAX)
            nf = float(n)
            if code == LSE:
                total = np.sum((F - i / (nf + 1.0)) ** 2)
            elif code == WLSE:
                wts = (nf + 1.0) ** 2 * (nf + 2.0) / (i * (nf - i + 1.0))
                total = np.sum(wts * (F - i / (nf + 1.0)) ** 2)
            elif code == ADE:
                total = -nf - np.sum((2.0 * i - 1.0) * (np.log(F) + np.log1p(-F[::-1]))) / nf
            elif code == CVME:
                total = 1.0 / (12.0 * nf) + np.sum((F - (2.0 * i - 1.0) / (2.0 * nf)) ** 2)
            elif code == MPSE:
                d = np.diff(np.concatenate(([0.0], F, [1.0])))
                total = -np.mean(np.log(np.maximum(d, SPACING_MIN)))
            else:
                total = nf / 2.0 - 2.0 * np.sum(F) - np.sum((2.0 * i - 1.0) * np.log1p(-F[::-1])) / nf
    total = float(total)
    return np.inf if math.isnan(total) else total


def _nelder_mead(code, t0, step, logx, xatol, fatol, maxfev):
    m = t0.shape[0]
    sim = np.empty((m + 1, m))
    fs = np.empty(m + 1)
    for j in range(m + 1):
        for k in range(m):
            sim[j, k] = t0[k]
        if j > 0:
            sim[j, j - 1] += step[j - 1]
        fs[j] = _objective_impl(code, sim[j], logx)
    nfev = m + 1
    nit = 0
    converged = False
    xr = np.empty(m)
    xe = np.empty(m)
    xc = np.empty(m)
    cen = np.empty(m)
    while True:
        order = np.argsort(fs)
        sim = sim[order]
        fs = fs[order]
        spread_x = 0.0
        spread_f = 0.0
        for j in range(1, m + 1):
            spread_f = max(spread_f, abs(fs[j] - fs[0]))
            for k in range(m):
                spread_x = max(spread_x, abs(sim[j, k] - sim[0, k]))
        if spread_x <= xatol and spread_f <= fatol and math.isfinite(fs[0]):
            converged = True
            break
        if nfev >= maxfev:
            break
        nit += 1
        for k in range(m):
            acc = 0.0
            for j in range(m):
                acc += sim[j, k]
            cen[k] = acc / m
        for k in range(m):
            xr[k] = 2.0 * cen[k] - sim[m, k]
        fr = _objective_impl(code, xr, logx)
        nfev += 1
        shrink = False
        if fr < fs[0]:
            for k in range(m):
                xe[k] = 3.0 * cen[k] - 2.0 * sim[m, k]
            fe = _objective_impl(code, xe, logx)
            nfev += 1
            if fe < fr:
                sim[m] = xe
                fs[m] = fe
            else:
                sim[m] = xr
                fs[m] = fr
        elif fr < fs[m - 1]:
            sim[m] = xr
            fs[m] = fr
        else:
            if fr < fs[m]:
                for k in range(m):
                    xc[k] = 0.5 * (cen[k] + xr[k])
                fc = _objective_impl(code, xc, logx)
                nfev += 1
                if fc <= fr:
                    sim[m] = xc
                    fs[m] = fc
                else:
                    shrink = True
            else:
                for k in range(m):
                    xc[k] = 0.5 * (cen[k] + sim[m, k])
                fc = _objective_impl(code, xc, logx)
                nfev += 1
                if fc < fs[m]:
                    sim[m] = xc
                    fs[m] = fc
                else:
                    shrink = True
        if shrink:
            for j in range(1, m + 1):
                for k in range(m):
                    sim[j, k] = sim[0, k] + 0.5 * (sim[j, k] - sim[0, k])
                fs[j] = _objective_impl(code, sim[j], logx)
                nfev += 1
    best = np.argmin(fs)
    return sim[best].copy(), fs[best], nit, nfev, converged


def _minimize(code, t0, step, logx, xatol, fatol, maxfev):
    """Nelder-Mead, restarted from the best vertex until a restart stops improving.

    Returns ``(t, fun, nit, nfev, converged)``.
    """
    x, f, nit, nfev, conv = _nelder_mead_impl(code, t0, step, logx, xatol, fatol, maxfev)
    small = np.empty(t0.shape[0])
    for k in range(t0.shape[0]):
        small[k] = 0.1 * step[k]
    for _ in range(5):
        if not conv or nfev >= maxfev:
            break
        x2, f2, nit2, nfev2, conv2 = _nelder_mead_impl(code, x, small, logx, xatol, fatol, maxfev - nfev)
        nit += nit2
        nfev += nfev2
        improved = f2 < f - fatol
        if f2 <= f:
            x, f = x2, f2
        conv = conv2
        if not improved:
            break
    return x, f, nit, nfev, conv


def _rebind(fn, **names):
    """Copy of ``fn`` whose module globals are overridden by ``names``.

    The optimiser is written once against the global names ``_objective_impl``
    and ``_nelder_mead_impl``. Rebinding instead of closing over them keeps the
    compiled version cacheable across processes.
    """
    g = dict(fn.__globals__)
    g.update(names)
    return types.FunctionType(fn.__code__, g, fn.__name__, fn.__defaults__)


_nelder_mead_np = _rebind(_nelder_mead, _objective_impl=_objective_np)
minimize_np = _rebind(_minimize, _nelder_mead_impl=_nelder_mead_np)
_nelder_mead_nb = njit(_rebind(_nelder_mead, _objective_impl=_objective_nb))
minimize_nb = njit(_rebind(_minimize, _nelder_mead_impl=_nelder_mead_nb))

objective = _objective_nb if USE_NUMBA else _objective_np
minimize = minimize_nb if USE_NUMBA else minimize_np
