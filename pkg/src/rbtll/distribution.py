"""The record-based transmuted log-logistic (RBTLL) distribution.

Base log-logistic cdf ``G(x) = z / (1 + z)`` with ``z = exp(gamma) * x**upsilon``;
the record-based transmutation gives

    F(x) = G + p (1 - G) log(1 - G).

Everything is evaluated through ``L = -log(1 - G) = log1p(z)`` so that the
upper tail keeps full relative precision:

    S(x) = exp(-L) (1 + p L)
    f(x) = g(x) (1 - p + p L)
"""
from dataclasses import dataclass
from enum import Enum
import math

import numpy as np
from scipy import integrate
from scipy.special import gammaln

from .special import WBranch, lambert_w, wm1_from_log


class DomainError(ValueError):
    """Argument outside the support or parameter space."""


class MomentNotFiniteError(ValueError):
    """E[X^r] diverges (r >= upsilon)."""


class QuadratureError(RuntimeError):
    pass


@dataclass(frozen=True)
class RbtllParams:
    gamma: float
    upsilon: float
    p: float

    def __post_init__(self):
        g, u, p = float(self.gamma), float(self.upsilon), float(self.p)
        if not math.isfinite(g):
            raise DomainError(f"gamma must be finite, got {self.gamma!r}")
        if not (u > 0 and math.isfinite(u)):
            raise DomainError(f"upsilon must be positive, got {self.upsilon!r}")
        if not 0.0 < p < 1.0:
            raise DomainError(f"p must lie in (0, 1), got {self.p!r}")
        object.__setattr__(self, "gamma", g)
        object.__setattr__(self, "upsilon", u)
        object.__setattr__(self, "p", p)

    def as_tuple(self):
        return (self.gamma, self.upsilon, self.p)

    @property
    def ll_scale(self):
        """Scale ``alpha`` of the base log-logistic in scale-shape form."""
        return math.exp(-self.gamma / self.upsilon)


class HazardShape(Enum):
    DECREASING = "decreasing"
    INCREASING = "increasing"
    NON_MONOTONE = "non-monotone"


def _params(theta):
    if isinstance(theta, RbtllParams):
        return theta
    return RbtllParams(*theta)


def _support(x):
    x = np.asarray(x, dtype=float)
    if np.any(~(x > 0)):
        raise DomainError("x must be > 0")
    return x


def _out(v):
    return float(v) if np.ndim(v) == 0 else v


def _logit_base(x, th):
    """``log z = gamma + upsilon log x``; +inf at x = inf."""
    with np.errstate(divide="ignore"):
        return th.gamma + th.upsilon * np.log(x)


def _softplus(s):
    return np.logaddexp(0.0, s)


def logpdf(x, theta):
    th = _params(theta)
    x = _support(x)
    s = _logit_base(x, th)
    L = _softplus(s)
    with np.errstate(invalid="ignore"):
        v = s + math.log(th.upsilon) - np.log(x) - 2.0 * L + np.log1p(th.p * (L - 1.0))
    return _out(np.where(np.isinf(x), -np.inf, v))


def pdf(x, theta):
    """Density ``g(x) [1 - p (log(1 - G(x)) + 1)]``."""
    return _out(np.exp(logpdf(x, theta)))


def cdf(x, theta):
    th = _params(theta)
    x = _support(x)
    L = _softplus(_logit_base(x, th))
    with np.errstate(invalid="ignore"):
        v = -np.expm1(-L) - th.p * L * np.exp(-L)
    return _out(np.clip(np.where(np.isinf(L), 1.0, v), 0.0, 1.0))


def logsf(x, theta):
    th = _params(theta)
    x = _support(x)
    L = _softplus(_logit_base(x, th))
    with np.errstate(invalid="ignore"):
        return _out(np.where(np.isinf(L), -np.inf, -L + np.log1p(th.p * L)))


def survival(x, theta):
    """``1 - F(x)`` in the factored form ``(1 - G)(1 + p log(1 + z))``."""
    return _out(np.exp(logsf(x, theta)))


def hazard(x, theta):
    th = _params(theta)
    x = _support(x)
    s = _logit_base(x, th)
    L = _softplus(s)
    p = th.p
    with np.errstate(invalid="ignore"):
        logh = s + math.log(th.upsilon) - np.log(x) - L + np.log1p(p * (L - 1.0)) - np.log1p(p * L)
    return _out(np.exp(logh))


def _x_psi(s, upsilon, p):
    """``x * psi(x)`` as a function of ``s = log z``; its sign is the sign of psi."""
    L = _softplus(s)
    G = np.exp(s - L)
    bracket = 1.0 + p / (1.0 + p * L) - p / (1.0 - p + p * L)
    return (upsilon - 1.0) - upsilon * G * bracket


def psi(x, theta):
    """Logarithmic derivative of the hazard, ``d/dx log h(x)``.

    ``psi(x) = (upsilon - 1)/x - z'/(1+z) [1 + p/(1+pL) - p/(1+pL-p)]``.
    """
    th = _params(theta)
    x = _support(x)
    return _out(_x_psi(_logit_base(x, th), th.upsilon, th.p) / x)


_SHAPE_GRID = np.linspace(-60.0, 60.0, 24001)


def hazard_turning_points(theta):
    """x-locations where psi changes sign, located on a dense grid in log z."""
    th = _params(theta)
    v = _x_psi(_SHAPE_GRID, th.upsilon, th.p)
    idx = np.nonzero(np.diff(np.sign(v)) != 0)[0]
    s = 0.5 * (_SHAPE_GRID[idx] + _SHAPE_GRID[idx + 1])
    return np.exp((s - th.gamma) / th.upsilon)


def classify_hazard_shape(theta, tol=1e-12):
    """Monotonicity class of the hazard from the sign pattern of psi.

    The sign of ``x psi(x)`` depends on x only through ``z``, so one scan in
    ``log z`` (plus the two limits) covers the whole support for any gamma.
    """
    th = _params(theta)
    v = _x_psi(_SHAPE_GRID, th.upsilon, th.p)
    u, p = th.upsilon, th.p
    # z -> 0: x psi -> (u - 1) - u z (1 - p^2/(1-p)); z -> inf: x psi -> -1
    if abs(u - 1.0) > tol:
        left = u - 1.0
    else:
        left = -(1.0 - p * p / (1.0 - p))
    pos = bool((v > tol).any()) or left > tol
    # the right limit is always -1, so psi is eventually negative
    neg = True
    if pos and neg:
        return HazardShape.NON_MONOTONE
    if pos:
        return HazardShape.INCREASING
    return HazardShape.DECREASING


def _log_expm1(L):
    L = np.asarray(L, dtype=float)
    with np.errstate(divide="ignore"):
        big = L > 30.0
        return np.where(big, L + np.log1p(-np.exp(-np.where(big, L, 30.0))), np.log(np.expm1(np.where(big, 1.0, L))))


def _quantile_L(u, p):
    """Solve ``(1 + pL) exp(-L) = 1 - u`` for ``L = -log(1 - G)``."""
    log1mu = np.log1p(-u)
    la = log1mu - math.log(p) - 1.0 / p
    if np.all(la > -700.0):
        w = lambert_w(-np.exp(la), WBranch.SECONDARY_REAL)
    else:
        hi = la > -700.0
        w = np.empty_like(la)
        if hi.any():
            w[hi] = lambert_w(-np.exp(la[hi]), WBranch.SECONDARY_REAL)
        if (~hi).any():
            w[~hi] = wm1_from_log(la[~hi])
    L = np.maximum(-w - 1.0 / p, 0.0)
    # Newton polish on g(L) = log1p(pL) - L - log(1-u); g' <= -(1-p) < 0
    for _ in range(3):
        g = np.log1p(p * L) - L - log1mu
        dg = p / (1.0 + p * L) - 1.0
        L = np.maximum(L - g / dg, 0.5 * L)
    return L


def _bisect_quantile(u, th, iters=200):
    lo, hi = -700.0, 700.0
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if cdf(math.exp(mid), th) < u:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-15 * max(1.0, abs(mid)):
            break
    return math.exp(0.5 * (lo + hi))


def quantile(u, theta):
    """Inverse cdf through the secondary real branch of Lambert W.

    With ``w = W_{-1}(-(1-u) exp(-1/p) / p)`` one has ``-log(1 - G) = -w - 1/p``.
    Falls back to bisection wherever the round trip misses by more than 1e-10.
    """
    th = _params(theta)
    uu = np.asarray(u, dtype=float)
    if np.any(~((uu > 0) & (uu < 1))):
        raise DomainError("u must lie in (0, 1)")
    flat = np.atleast_1d(uu).ravel()
    L = _quantile_L(flat, th.p)
    x = np.exp((_log_expm1(L) - th.gamma) / th.upsilon)
    with np.errstate(invalid="ignore"):
        bad = ~(np.abs(cdf(np.maximum(x, 1e-300), th) - flat) <= 1e-10) | ~(x > 0) | ~np.isfinite(x)
    for i in np.nonzero(bad)[0]:
        x[i] = _bisect_quantile(flat[i], th)
    return _out(x.reshape(uu.shape))


def raw_moment(r, theta, tol=1e-9):
    """``E[X^r]`` by adaptive quadrature; finite only for ``r < upsilon``.

    Integrates in ``s = log z``, where the integrand is
    ``exp((r/upsilon + 1) s) / (1 + e^s)^2 (1 - p + p softplus(s))``.
    """
    th = _params(theta)
    if int(r) != r or r < 0:
        raise DomainError("r must be a non-negative integer")
    if not r < th.upsilon:
        raise MomentNotFiniteError(f"E[X^{r}] is infinite for upsilon={th.upsilon}")
    a = r / th.upsilon
    p = th.p

    def integrand(s):
        L = np.logaddexp(0.0, s)
        return math.exp((a + 1.0) * s - 2.0 * L) * (1.0 - p + p * L)

    total, err = 0.0, 0.0
    for lo, hi in ((-np.inf, 0.0), (0.0, np.inf)):
        val, e, info = integrate.quad(integrand, lo, hi, epsabs=tol, epsrel=tol, limit=500, full_output=1)[:3]
        total += val
        err += e
    if not err <= tol * max(1.0, abs(total)):
        raise QuadratureError(f"quadrature error estimate {err:.3g} exceeds tolerance {tol:g}")
    return math.exp(-r * th.gamma / th.upsilon) * total


def order_statistic_pdf(x, r, n, theta):
    """Density of the r-th smallest of n iid RBTLL draws."""
    th = _params(theta)
    if not (int(r) == r and int(n) == n and 1 <= r <= n):
        raise DomainError("need integers 1 <= r <= n")
    x = _support(x)
    with np.errstate(divide="ignore"):
        logF = np.log(cdf(x, th))
    logS = logsf(x, th)
    lc = gammaln(n + 1) - gammaln(r) - gammaln(n - r + 1)
    with np.errstate(invalid="ignore"):
        v = lc + (r - 1) * logF + (n - r) * logS + logpdf(x, th)
    return _out(np.exp(np.where(np.isnan(v), -np.inf, v)))


def lr_ratio(x, theta1, theta2):
    """Density ratio ``f(x; theta1) / f(x; theta2)`` for a shared (gamma, upsilon).

    Reduces to ``(1 - p1 + p1 L) / (1 - p2 + p2 L)``, decreasing in x when p1 < p2.
    """
    t1, t2 = _params(theta1), _params(theta2)
    if t1.gamma != t2.gamma or t1.upsilon != t2.upsilon:
        raise DomainError("likelihood-ratio comparison needs equal gamma and upsilon")
    x = _support(x)
    L = _softplus(_logit_base(x, t1))
    return _out((1.0 - t1.p + t1.p * L) / (1.0 - t2.p + t2.p * L))
