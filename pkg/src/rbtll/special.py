"""Real branches of the Lambert W function.

``W0`` is the principal branch on ``[-1/e, inf)`` with ``W0 >= -1``;
``Wm1`` is the secondary real branch on ``[-1/e, 0)`` with ``Wm1 <= -1``.
Both are computed by Halley iteration from the usual branch-point series /
logarithmic asymptotic seeds (Corless et al., 1996).
"""
from enum import Enum

import numpy as np

from ._backend import USE_NUMBA, njit

INV_E = np.exp(-1.0)
_E = np.e
_TOL = 1e-14
_MAXITER = 100


class WBranch(Enum):
    PRINCIPAL = 0
    SECONDARY_REAL = -1


class LambertWError(ValueError):
    """Argument outside the domain of the requested branch, or no convergence."""


@njit
def _seed(z, branch):
    q = 2.0 * (1.0 + _E * z)
    if q < 0.0:
        q = 0.0
    r = np.sqrt(q)
    if branch == 0:
        if z < -0.25:
            return -1.0 + r - r * r / 3.0 + 11.0 / 72.0 * r * r * r
        if z < 3.0:
            return np.log1p(z)
        l1 = np.log(z)
        l2 = np.log(l1)
        return l1 - l2 + l2 / l1
    if z < -0.25:
        return -1.0 - r - r * r / 3.0 - 11.0 / 72.0 * r * r * r
    l1 = np.log(-z)
    l2 = np.log(-l1)
    return l1 - l2 + l2 / l1


@njit
def _halley(z, branch):
    """Returns (w, status); status 0 ok, 1 no convergence."""
    if z == 0.0 and branch == 0:
        return 0.0, 0
    if 1.0 + _E * z <= 1e-15:
        return -1.0, 0
    w = _seed(z, branch)
    for _ in range(_MAXITER):
        ew = np.exp(w)
        f = w * ew - z
        wp1 = w + 1.0
        if wp1 == 0.0:
            return w, 0
        denom = ew * wp1 - (w + 2.0) * f / (2.0 * wp1)
        if denom == 0.0:
            return w, 0
        dw = f / denom
        w_new = w - dw
        # keep the iterate on its branch
        if branch == 0 and w_new < -1.0:
            w_new = 0.5 * (w - 1.0)
        elif branch == -1 and w_new > -1.0:
            w_new = 0.5 * (w - 1.0)
        if abs(w_new - w) <= _TOL * (1.0 + abs(w_new)):
            return w_new, 0
        w = w_new
    if abs(w * np.exp(w) - z) <= 1e-12 * max(1.0, abs(z)):
        return w, 0
    return w, 1


@njit
def _lambertw_loop(z, branch):
    out = np.empty(z.shape[0])
    status = 0
    for i in range(z.shape[0]):
        w, s = _halley(z[i], branch)
        out[i] = w
        if s != 0:
            status = s
    return out, status


def _lambertw_vec(z, branch):
    """Vectorised numpy Halley iteration (fallback backend)."""
    z = np.asarray(z, dtype=float)
    r = np.sqrt(np.maximum(2.0 * (1.0 + _E * z), 0.0))
    near = z < -0.25
    with np.errstate(all="ignore"):
        if branch == 0:
            l1 = np.log(np.where(z >= 3.0, z, 3.0))
            l2 = np.log(l1)
            w = np.where(
                near,
                -1.0 + r - r**2 / 3.0 + 11.0 / 72.0 * r**3,
                np.where(z < 3.0, np.log1p(np.maximum(z, -0.25)), l1 - l2 + l2 / l1),
            )
        else:
            l1 = np.log(-np.where(near, -0.1, np.minimum(z, -1e-300)))
            l2 = np.log(-l1)
            w = np.where(near, -1.0 - r - r**2 / 3.0 - 11.0 / 72.0 * r**3, l1 - l2 + l2 / l1)
        at_bp = 1.0 + _E * z <= 1e-15
        done = at_bp | ((z == 0.0) & (branch == 0))
        w = np.where(at_bp, -1.0, np.where(done, 0.0, w))
        for _ in range(_MAXITER):
            if done.all():
                break
            ew = np.exp(w)
            f = w * ew - z
            wp1 = w + 1.0
            dw = f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1))
            dw = np.where(done | ~np.isfinite(dw), 0.0, dw)
            w_new = w - dw
            if branch == 0:
                w_new = np.where(w_new < -1.0, 0.5 * (w - 1.0), w_new)
            else:
                w_new = np.where(w_new > -1.0, 0.5 * (w - 1.0), w_new)
            done |= np.abs(w_new - w) <= _TOL * (1.0 + np.abs(w_new))
            w = w_new
    resid_ok = np.abs(w * np.exp(w) - z) <= 1e-12 * np.maximum(1.0, np.abs(z))
    return w, int(not (done | resid_ok).all())


def lambert_w(z, branch=WBranch.PRINCIPAL):
    """Real Lambert W: the ``w`` on ``branch`` with ``w * exp(w) == z``.

    Accepts scalars or arrays. Raises :class:`LambertWError` when any ``z``
    lies outside the branch's domain.
    """
    branch = WBranch(branch)
    arr = np.asarray(z, dtype=float)
    flat = np.ravel(arr)
    # one ulp of slack at the branch point
    lo = -INV_E * (1.0 + 4e-16)
    bad = ~np.isfinite(flat) | (flat < lo)
    if branch is WBranch.SECONDARY_REAL:
        bad |= flat >= 0.0
    if bad.any():
        raise LambertWError(f"z={flat[bad][0]!r} outside the domain of branch {branch.name}")
    flat = np.maximum(flat, -INV_E)
    if USE_NUMBA:
        w, status = _lambertw_loop(np.ascontiguousarray(flat), branch.value)
    else:
        w, status = _lambertw_vec(flat, branch.value)
    if status:
        raise LambertWError("Halley iteration did not converge")
    w = w.reshape(arr.shape)
    return float(w) if w.ndim == 0 else w


def wm1_from_log(log_neg_z):
    """``W_{-1}(z)`` given ``log(-z)``, for arguments too small to represent.

    Solves ``w + log(-w) = log(-z)`` by Newton's method; valid for
    ``log(-z) <= -1``, well conditioned away from the branch point.
    """
    a = np.asarray(log_neg_z, dtype=float)
    if np.any(a > -1.0):
        raise LambertWError("log(-z) must be <= -1 on the secondary branch")
    w = a - np.log(-a)
    for _ in range(_MAXITER):
        dw = (w + np.log(-w) - a) * w / (w + 1.0)
        w = w - dw
        if np.all(np.abs(dw) <= _TOL * (1.0 + np.abs(w))):
            break
    return float(w) if w.ndim == 0 else w
