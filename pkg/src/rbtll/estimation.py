"""Point estimation: seven RBTLL estimators plus MLE for the rival models.

All criteria are oriented so that smaller is better (log-likelihood and the
mean log spacing are negated) and minimised by the shared Nelder-Mead kernel
in ``(gamma, log upsilon, logit p)``.
"""
from dataclasses import dataclass, field
from enum import Enum
import math

import numpy as np

from . import distribution as dist
from . import kernels
from .data import Sample
from .distribution import RbtllParams
from .rivals import RivalModel, RivalParams, rival_logpdf

EULER_GAMMA = 0.5772156649015329


class Method(Enum):
    MLE = kernels.MLE
    LSE = kernels.LSE
    WLSE = kernels.WLSE
    ADE = kernels.ADE
    CVME = kernels.CVME
    MPSE = kernels.MPSE
    RTADE = kernels.RTADE

    @classmethod
    def parse(cls, name):
        if isinstance(name, cls):
            return name
        key = str(name).upper().replace("-", "")
        aliases = {"CVM": "CVME", "MPS": "MPSE", "TADE": "RTADE", "ML": "MLE"}
        return cls[aliases.get(key, key)]


@dataclass
class FitOptions:
    restarts: int = 4
    seed: int = 0
    xatol: float = 1e-8
    fatol: float = 1e-10
    maxfev: int = 5000
    std_errors: bool = True


@dataclass
class FitResult:
    params: RbtllParams
    objective: float
    method: Method
    converged: bool
    iterations: int
    start: RbtllParams
    nfev: int = 0
    std_errors: tuple = None
    minus2loglik: float = field(default=math.nan)

    def to_dict(self):
        th = self.params
        d = {
            "model": "rbtll",
            "method": self.method.name,
            "params": {"gamma": th.gamma, "upsilon": th.upsilon, "p": th.p},
            "objective": self.objective,
            "minus2loglik": self.minus2loglik,
            "converged": self.converged,
            "iterations": self.iterations,
            "nfev": self.nfev,
            "start": {"gamma": self.start.gamma, "upsilon": self.start.upsilon, "p": self.start.p},
            "std_errors": None,
        }
        if self.std_errors is not None:
            d["std_errors"] = dict(zip(("gamma", "upsilon", "p"), self.std_errors))
        return d


@dataclass
class RivalFit:
    params: RivalParams
    objective: float
    converged: bool
    iterations: int
    nfev: int = 0
    std_errors: dict = None

    @property
    def model(self):
        return self.params.model

    @property
    def minus2loglik(self):
        return 2.0 * self.objective

    def to_dict(self):
        return {
            "model": self.model.value,
            "method": "MLE",
            "params": self.params.as_dict(),
            "objective": self.objective,
            "minus2loglik": self.minus2loglik,
            "converged": self.converged,
            "iterations": self.iterations,
            "nfev": self.nfev,
            "std_errors": self.std_errors,
        }


class FitError(ValueError):
    pass


def _as_sample(data):
    return data if isinstance(data, Sample) else Sample(data)


def encode(theta):
    th = dist._params(theta)
    return np.array([th.gamma, math.log(th.upsilon), math.log(th.p) - math.log1p(-th.p)])


def decode(t):
    g, u, p = kernels._decode(kernels.MLE, np.asarray(t, dtype=float))
    return RbtllParams(g, u, p)


def neg_log_likelihood(data, theta):
    """``-l(gamma, upsilon, p)`` summed over the sample."""
    s = _as_sample(data)
    return float(kernels.objective(kernels.MLE, encode(theta), np.ascontiguousarray(s.log_sorted)))


def objective(method, data, theta):
    """Value of the estimation criterion (smaller is better)."""
    m = Method.parse(method)
    s = _as_sample(data)
    return float(kernels.objective(m.value, encode(theta), np.ascontiguousarray(s.log_sorted)))


def default_start(data):
    """Log-logistic moment heuristic with p = 1/2."""
    s = _as_sample(data)
    sd = float(np.std(s.log_sorted, ddof=1)) if len(s) > 1 else 1.0
    beta = math.pi / (math.sqrt(3.0) * max(sd, 1e-6))
    alpha = float(np.median(s.values))
    return RbtllParams(-beta * math.log(alpha), beta, 0.5)


def _starts(t0, restarts, seed):
    rng = np.random.default_rng(seed)
    out = [np.array(t0, dtype=float)]
    for _ in range(restarts):
        out.append(t0 + rng.uniform(-0.5, 0.5, t0.size) * np.maximum(1.0, np.abs(t0)))
    return out


def _step(t0):
    return 0.25 * np.maximum(1.0, np.abs(t0))


def _run(code, starts, logx, opts):
    runs = []
    for t0 in starts:
        x, f, nit, nfev, conv = kernels.minimize(code, t0, _step(t0), logx, opts.xatol, opts.fatol, opts.maxfev)
        runs.append((np.asarray(x), float(f), int(nit), int(nfev), bool(conv)))
    return runs


def hessian(fun, x, steps):
    """Central-difference Hessian of ``fun`` at ``x``."""
    x = np.asarray(x, dtype=float)
    m = x.size
    H = np.empty((m, m))
    f0 = fun(x)
    E = np.diag(steps)
    for i in range(m):
        H[i, i] = (fun(x + E[i]) - 2.0 * f0 + fun(x - E[i])) / steps[i] ** 2
        for j in range(i + 1, m):
            v = (fun(x + E[i] + E[j]) - fun(x + E[i] - E[j]) - fun(x - E[i] + E[j]) + fun(x - E[i] - E[j]))
            H[i, j] = H[j, i] = v / (4.0 * steps[i] * steps[j])
    return H


def _std_errors(H):
    if not np.all(np.isfinite(H)):
        return None
    try:
        cov = np.linalg.inv(H)
    except np.linalg.LinAlgError:
        return None
    d = np.diag(cov)
    if np.any(d <= 0) or not np.all(np.isfinite(d)):
        return None
    return tuple(float(v) for v in np.sqrt(d))


def _rbtll_std_errors(sample, th):
    x = np.array(th.as_tuple())
    steps = 1e-4 * np.maximum(1.0, np.abs(x))
    steps[2] = min(1e-4, 0.5 * min(th.p, 1.0 - th.p))

    def nll(v):
        if v[1] <= 0 or not 0 < v[2] < 1:
            return np.inf
        return -float(np.sum(dist.logpdf(sample.sorted, tuple(v))))

    return _std_errors(hessian(nll, x, steps))


def fit(method, data, start=None, opts=None, **kw):
    """Minimise one estimation criterion over (gamma, upsilon, p).

    ``opts`` (or keyword overrides of :class:`FitOptions`) control the
    multistart: the start point plus ``restarts`` jittered copies. The best
    converged run wins, with near-ties going to the smaller p.
    """
    m = Method.parse(method)
    opts = opts or FitOptions()
    if kw:
        opts = FitOptions(**{**opts.__dict__, **kw})
    s = _as_sample(data)
    if len(s) < 4:
        raise FitError("need at least 4 observations")
    start = dist._params(start) if start is not None else default_start(s)
    logx = np.ascontiguousarray(s.log_sorted)
    runs = _run(m.value, _starts(encode(start), opts.restarts, opts.seed), logx, opts)

    pool = [r for r in runs if r[4] and math.isfinite(r[1])] or runs
    fbest = min(r[1] for r in pool)
    near = [r for r in pool if r[1] <= fbest + 1e-10]
    best = min(near, key=lambda r: (decode(r[0]).p, r[1]))
    th = decode(best[0])
    res = FitResult(
        params=th,
        objective=best[1],
        method=m,
        converged=best[4],
        iterations=best[2],
        nfev=sum(r[3] for r in runs),
        start=start,
    )
    res.minus2loglik = 2.0 * neg_log_likelihood(s, th)
    if m is Method.MLE and opts.std_errors:
        res.std_errors = _rbtll_std_errors(s, th)
    return res


# ---- rival models -------------------------------------------------------

_RIVAL_CODE = {RivalModel.LL: kernels.LL_NLL, RivalModel.WEIBULL: kernels.W_NLL, RivalModel.TW: kernels.TW_NLL}


def _rival_from_t(model, t):
    v = kernels._decode(_RIVAL_CODE[model], np.asarray(t, dtype=float))
    if model is RivalModel.LL:
        return RivalParams(model, scale=float(v[0]), shape=float(v[1]))
    lam = float(v[2]) if model is RivalModel.TW else None
    return RivalParams(model, scale=float(v[1]), shape=float(v[0]), lam=lam)


def _rival_starts(model, s):
    lx = s.log_sorted
    sd = max(float(np.std(lx, ddof=1)), 1e-6)
    if model is RivalModel.LL:
        beta = math.pi / (math.sqrt(3.0) * sd)
        return [np.array([math.log(float(np.median(s.values))), math.log(beta)])]
    c = math.pi / (math.sqrt(6.0) * sd)
    scale = math.exp(float(np.mean(lx)) + EULER_GAMMA / c)
    t = np.array([math.log(c), math.log(scale)])
    if model is RivalModel.WEIBULL:
        return [t]
    return [np.append(t, a) for a in (0.0, 0.5, -0.5)]


def _rival_std_errors(model, s, params):
    names = ["scale", "shape"] + (["lam"] if model is RivalModel.TW else [])
    x = np.array([getattr(params, k) for k in names])
    steps = 1e-4 * np.maximum(1.0, np.abs(x))
    if model is RivalModel.TW:
        room = 1.0 - abs(params.lam)
        if room < 2e-4:
            return None
        steps[2] = min(steps[2], 0.5 * room)

    def nll(v):
        try:
            phi = RivalParams(model, *v)
        except ValueError:
            return np.inf
        return -float(np.sum(rival_logpdf(s.sorted, phi)))

    se = _std_errors(hessian(nll, x, steps))
    return None if se is None else dict(zip(names, se))


def fit_rival(model, data, opts=None, **kw):
    """Maximum likelihood for LL, Weibull or transmuted Weibull."""
    model = RivalModel(model) if not isinstance(model, RivalModel) else model
    opts = opts or FitOptions()
    if kw:
        opts = FitOptions(**{**opts.__dict__, **kw})
    s = _as_sample(data)
    if len(s) < 4:
        raise FitError("need at least 4 observations")
    code = _RIVAL_CODE[model]
    starts = []
    for t0 in _rival_starts(model, s):
        starts.extend(_starts(t0, opts.restarts, opts.seed))
    runs = _run(code, starts, np.ascontiguousarray(s.log_sorted), opts)
    pool = [r for r in runs if r[4] and math.isfinite(r[1])] or runs
    best = min(pool, key=lambda r: r[1])
    params = _rival_from_t(model, best[0])
    res = RivalFit(params, best[1], best[4], best[2], sum(r[3] for r in runs))
    if opts.std_errors:
        res.std_errors = _rival_std_errors(model, s, params)
    return res
