"""Competitor lifetime models: log-logistic, Weibull and transmuted Weibull.

LL is in scale-shape form ``G(x) = 1 / (1 + (x/scale)**-shape)``; it coincides
with the RBTLL base at ``scale = exp(-gamma/upsilon)``, ``shape = upsilon``.
Weibull is ``1 - exp(-(x/scale)**shape)``, and the transmuted Weibull applies
``F = (1 + lam) G - lam G**2`` to it.
"""
from dataclasses import dataclass
from enum import Enum
import math

import numpy as np

from .distribution import DomainError


class RivalModel(Enum):
    LL = "ll"
    WEIBULL = "w"
    TW = "tw"


@dataclass(frozen=True)
class RivalParams:
    model: RivalModel
    scale: float
    shape: float
    lam: float = None

    def __post_init__(self):
        model = RivalModel(self.model)
        object.__setattr__(self, "model", model)
        if not (self.scale > 0 and math.isfinite(self.scale)):
            raise DomainError("scale must be > 0")
        if not (self.shape > 0 and math.isfinite(self.shape)):
            raise DomainError("shape must be > 0")
        if model is RivalModel.TW:
            if self.lam is None or not -1.0 <= self.lam <= 1.0:
                raise DomainError("transmuted Weibull needs lam in [-1, 1]")
        elif self.lam is not None:
            raise DomainError(f"{model.name} takes no lam")

    def as_dict(self):
        d = {"scale": self.scale, "shape": self.shape}
        if self.lam is not None:
            d["lam"] = self.lam
        return d


def ll_from_rbtll(gamma, upsilon):
    """(gamma, upsilon) of the base log-logistic -> (scale, shape)."""
    return math.exp(-gamma / upsilon), upsilon


def rbtll_from_ll(scale, shape):
    return -shape * math.log(scale), shape


def _x(x):
    x = np.asarray(x, dtype=float)
    if np.any(~(x > 0)):
        raise DomainError("x must be > 0")
    return x


def _out(v):
    return float(v) if np.ndim(v) == 0 else v


def _base(x, phi):
    """(log g, G) of the LL or Weibull base."""
    logx = np.log(x)
    a, b = phi.scale, phi.shape
    y = b * (logx - math.log(a))
    if phi.model is RivalModel.LL:
        logg = math.log(b) - logx + y - 2.0 * np.logaddexp(0.0, y)
        G = np.exp(y - np.logaddexp(0.0, y))
    else:
        w = np.exp(y)
        logg = math.log(b) - logx + y - w
        G = -np.expm1(-w)
    return logg, G


def rival_logpdf(x, phi):
    x = _x(x)
    with np.errstate(over="ignore", divide="ignore"):
        logg, G = _base(x, phi)
        if phi.model is RivalModel.TW:
            logg = logg + np.log(1.0 + phi.lam - 2.0 * phi.lam * G)
    return _out(logg)


def rival_pdf(x, phi):
    return _out(np.exp(rival_logpdf(x, phi)))


def rival_cdf(x, phi):
    x = _x(x)
    with np.errstate(over="ignore", divide="ignore"):
        _, G = _base(x, phi)
    if phi.model is RivalModel.TW:
        G = (1.0 + phi.lam) * G - phi.lam * G * G
    return _out(np.clip(G, 0.0, 1.0))


def rival_quantile(u, phi):
    u = np.asarray(u, dtype=float)
    if np.any(~((u > 0) & (u < 1))):
        raise DomainError("u must lie in (0, 1)")
    if phi.model is RivalModel.TW and phi.lam != 0.0:
        lam = phi.lam
        # root of lam G^2 - (1 + lam) G + u = 0 inside [0, 1]
        G = 2.0 * u / ((1.0 + lam) + np.sqrt((1.0 + lam) ** 2 - 4.0 * lam * u))
    else:
        G = u
    if phi.model is RivalModel.LL:
        y = np.log(G) - np.log1p(-G)
    else:
        y = np.log(-np.log1p(-G))
    return _out(phi.scale * np.exp(y / phi.shape))


def rival_sample(phi, n, rng):
    """Inverse-transform draws (used for parametric bootstrap)."""
    u = rng.random(n)
    u = np.where(u == 0.0, np.finfo(float).tiny, u)
    return np.atleast_1d(rival_quantile(u, phi))
