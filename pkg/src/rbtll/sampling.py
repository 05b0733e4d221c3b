"""Acceptance-rejection sampling of RBTLL variates.

A Weibull proposal is tried first. Its tail is exponential while the RBTLL tail
is polynomial, so ``f/g`` always grows without bound and the tail audit rejects
it. The working proposal is therefore a log-logistic with the target's median
and a slightly smaller shape, ``beta = c * upsilon`` with ``c < 1``. That makes
``f/g`` vanish at both ends of the support. (``c = 1`` is not enough: the ratio
then equals ``1 - p + p log(1 + z)``.)
"""
from dataclasses import dataclass
import math

import numpy as np

from . import distribution as dist
from .data import Sample

K_SAFETY = 1.01
AUDIT_POINTS = 1000
SEARCH_POINTS = 4000
LL_SHAPE_FACTORS = (0.95, 0.9, 0.85, 0.8, 0.7, 0.6)
MIN_ACCEPT_RATE = 1e-3
CAP_PROPOSALS = 1_000_000


class EnvelopeError(RuntimeError):
    """The proposal does not dominate the target density."""


class SamplingError(RuntimeError):
    pass


@dataclass(frozen=True)
class RngStream:
    """Seeded substream: equal ``(seed, stream_id)`` pairs replay identical draws."""

    seed: int
    stream_id: int = 0

    def __post_init__(self):
        if self.stream_id < 0:
            raise ValueError("stream_id must be non-negative")

    def generator(self):
        ss = np.random.SeedSequence(int(self.seed) & (2**64 - 1), spawn_key=(int(self.stream_id),))
        return np.random.Generator(np.random.PCG64(ss))


@dataclass(frozen=True)
class ArEnvelope:
    """Proposal family and constant ``k`` with ``k g >= f`` on the support.

    For ``family == "weibull"``, ``scale`` and ``shape`` are the rate and shape
    in ``g(x) = scale * shape * x**(shape-1) * exp(-scale * x**shape)``.
    For ``family == "loglogistic"`` they are the scale-shape LL parameters.
    ``k`` already includes ``k_safety``.
    """

    family: str
    scale: float
    shape: float
    k: float
    k_safety: float
    rejected: tuple = ()

    def logpdf(self, x):
        logx = np.log(x)
        if self.family == "weibull":
            return (math.log(self.scale * self.shape) + (self.shape - 1.0) * logx
                    - self.scale * np.exp(self.shape * logx))
        y = self.shape * (logx - math.log(self.scale))
        return math.log(self.shape) - logx + y - 2.0 * np.logaddexp(0.0, y)

    def draw(self, u):
        """Inverse-transform proposals from uniforms in (0, 1)."""
        if self.family == "weibull":
            return (-np.log1p(-u) / self.scale) ** (1.0 / self.shape)
        return self.scale * np.exp((np.log(u) - np.log1p(-u)) / self.shape)


def _log_ratio(logx, th, env_family, scale, shape):
    x = np.exp(logx)
    probe = ArEnvelope(env_family, scale, shape, 1.0, 1.0)
    with np.errstate(all="ignore"):
        return dist.logpdf(x, th) - probe.logpdf(x)


def _golden_max(fn, a, b, tol=1e-8):
    g = (math.sqrt(5.0) - 1.0) / 2.0
    c, d = b - g * (b - a), a + g * (b - a)
    fc, fd = fn(c), fn(d)
    while b - a > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - g * (b - a)
            fc = fn(c)
        else:
            a, c, fc = c, d, fd
            d = a + g * (b - a)
            fd = fn(d)
    x = 0.5 * (a + b)
    return x, fn(x)


def _support_range(th, lo_u=1e-10, hi_u=1e-12):
    return math.log(dist.quantile(lo_u, th)), math.log(dist.quantile(1.0 - hi_u, th))


def _sup_log_ratio(th, family, scale, shape):
    """Sup of ``log f/g`` or ``None`` when the ratio still rises at a grid edge."""
    lo, hi = _support_range(th)
    # pad the grid well past both tails
    span = hi - lo
    grid = np.linspace(lo - 0.25 * span, hi + 0.25 * span, SEARCH_POINTS)
    r = _log_ratio(grid, th, family, scale, shape)
    if not np.all(np.isfinite(r)):
        finite = np.isfinite(r)
        if np.any(np.isposinf(r)) or not finite.any():
            return None
    i = int(np.nanargmax(r))
    if i == 0 or i == grid.size - 1:
        return None
    fn = lambda t: float(_log_ratio(np.array([t]), th, family, scale, shape)[0])
    _, best = _golden_max(fn, grid[i - 1], grid[i + 1])
    return max(best, float(r[i]))


def _audit(th, env):
    lo, hi = _support_range(th, 1e-12, 1e-14)
    grid = np.exp(np.linspace(lo, hi, AUDIT_POINTS))
    lf = dist.logpdf(grid, th)
    lg = env.logpdf(grid) + math.log(env.k)
    return bool(np.all(lg >= lf))


def build_envelope(theta, k_safety=K_SAFETY):
    """Choose a proposal and the bound ``k = k_safety * sup f/g``."""
    th = dist._params(theta)
    median = dist.quantile(0.5, th)
    rejected = []

    shape_w = th.upsilon if th.upsilon > 1.0 else 1.0
    rate_w = math.log(2.0) / median**shape_w
    sup = _sup_log_ratio(th, "weibull", rate_w, shape_w)
    if sup is not None:
        env = ArEnvelope("weibull", rate_w, shape_w, k_safety * math.exp(sup), k_safety)
        if _audit(th, env):
            return env
    rejected.append(("weibull", rate_w, shape_w))

    best = None
    for c in LL_SHAPE_FACTORS:
        shape = c * th.upsilon
        sup = _sup_log_ratio(th, "loglogistic", median, shape)
        if sup is None:
            rejected.append(("loglogistic", median, shape))
            continue
        if best is None or sup < best[0]:
            best = (sup, shape)
    if best is None:
        raise EnvelopeError(f"no bounded proposal found for {th}")
    env = ArEnvelope("loglogistic", median, best[1], k_safety * math.exp(best[0]), k_safety, tuple(rejected))
    if not _audit(th, env):
        raise EnvelopeError(f"envelope fails the dominance audit for {th}")
    return env


def draw(theta, n, stream, envelope=None):
    """``n`` accepted draws and the number of proposals consumed to get them."""
    th = dist._params(theta)
    if n < 1:
        raise ValueError("n must be >= 1")
    env = envelope if envelope is not None else build_envelope(th)
    rng = stream.generator() if isinstance(stream, RngStream) else stream
    logk = math.log(env.k)
    out = np.empty(n)
    have = 0
    proposals = 0
    while have < n:
        need = n - have
        batch = int(math.ceil(need * env.k * 1.1)) + 16
        # uniforms on the open interval (0, 1)
        u = rng.random(batch) + 2.0**-54
        v = rng.random(batch)
        y = env.draw(u)
        with np.errstate(all="ignore"):
            accept = np.log(v) < dist.logpdf(y, th) - env.logpdf(y) - logk
        idx = np.nonzero(accept)[0]
        if idx.size >= need:
            out[have:] = y[idx[:need]]
            proposals += int(idx[need - 1]) + 1
            have = n
        else:
            out[have:have + idx.size] = y[idx]
            have += idx.size
            proposals += batch
        if proposals >= CAP_PROPOSALS and have < MIN_ACCEPT_RATE * proposals:
            raise SamplingError(f"acceptance rate {have / proposals:.2e} below {MIN_ACCEPT_RATE}")
    return out, proposals


def sample(theta, n, stream, envelope=None):
    """Draw ``n`` RBTLL variates by acceptance-rejection."""
    values, _ = draw(theta, n, stream, envelope)
    return Sample(values, name="rbtll-draws", source="sampler")
