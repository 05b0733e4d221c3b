"""Goodness-of-fit statistics and the fitted-model comparison report."""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
import math

import numpy as np
from scipy.special import gammaln, kv
from scipy.stats import kstwo

from . import distribution as dist
from . import estimation, sampling
from .data import Sample
from .rivals import RivalModel, rival_cdf, rival_sample

F_MIN = 1e-300
F_MAX = 1.0 - 1e-16

MODEL_NAMES = ("rbtll", "ll", "tw", "w")
PVALUE_MODES = ("asymptotic", "exact", "bootstrap")


@dataclass
class GofReport:
    model: str
    n: int
    minus2loglik: float = math.nan
    ks: float = math.nan
    ad: float = math.nan
    cvm: float = math.nan
    p_ks: float = math.nan
    p_ad: float = math.nan
    p_cvm: float = math.nan
    params: dict = None
    std_errors: dict = None
    converged: bool = False
    pvalue_mode: str = "asymptotic"
    bootstrap_failures: int = 0
    error: str = None

    def to_dict(self):
        return asdict(self)


def _fvals(data, cdf):
    s = data if isinstance(data, Sample) else Sample(data)
    return s.sorted, np.asarray(cdf(s.sorted), dtype=float)


def ks_statistic(data, cdf):
    x, F = _fvals(data, cdf)
    n = x.size
    i = np.arange(1, n + 1)
    return float(max(np.max(i / n - F), np.max(F - (i - 1) / n)))


def ad_statistic(data, cdf):
    x, F = _fvals(data, cdf)
    F = np.clip(F, F_MIN, F_MAX)
    n = x.size
    i = np.arange(1, n + 1)
    return float(-n - np.sum((2 * i - 1) * (np.log(F) + np.log1p(-F[::-1]))) / n)


def cvm_statistic(data, cdf):
    x, F = _fvals(data, cdf)
    n = x.size
    i = np.arange(1, n + 1)
    return float(1.0 / (12 * n) + np.sum((F - (2 * i - 1) / (2.0 * n)) ** 2))


def kolmogorov_sf(lam, terms=100):
    """``P(K > lam)`` for the Kolmogorov limit distribution."""
    if lam <= 0:
        return 1.0
    if lam < 1.0:
        # small-argument form of the cdf converges much faster there
        k = np.arange(1, terms + 1)
        cdf = math.sqrt(2 * math.pi) / lam * np.sum(np.exp(-((2 * k - 1) ** 2) * math.pi**2 / (8 * lam**2)))
        return float(min(1.0, max(0.0, 1.0 - cdf)))
    k = np.arange(1, terms + 1)
    return float(min(1.0, max(0.0, 2.0 * np.sum((-1.0) ** (k - 1) * np.exp(-2.0 * k**2 * lam**2)))))


def ad_sf(a):
    """Asymptotic upper tail of the AD statistic (Marsaglia & Marsaglia, 2004)."""
    if a <= 0:
        return 1.0
    if a < 2.0:
        cdf = math.exp(-1.2337141 / a) / math.sqrt(a) * (
            2.00012 + (0.247105 - (0.0649821 - (0.0347962 - (0.011672 - 0.00168691 * a) * a) * a) * a) * a
        )
    else:
        cdf = math.exp(-math.exp(1.0776 - (2.30695 - (0.43424 - (0.082433 - (0.008056 - 0.0003146 * a) * a) * a) * a) * a))
    return float(min(1.0, max(0.0, 1.0 - cdf)))


def cvm_sf(w, tol=1e-12):
    """Asymptotic upper tail of the CvM statistic (Anderson & Darling, 1952 series)."""
    if w <= 0:
        return 1.0
    total = 0.0
    for k in range(200):
        y = 4 * k + 1
        q = y * y / (16.0 * w)
        term = math.exp(gammaln(k + 0.5) - gammaln(k + 1)) / (math.pi**1.5 * math.sqrt(w)) * math.sqrt(y) * math.exp(-q) * kv(0.25, q)
        total += term
        if abs(term) < tol:
            break
    return float(min(1.0, max(0.0, 1.0 - total)))


def gof_pvalues(stats, n, mode="asymptotic"):
    """p-values for ``(ks, ad, cvm)`` from a sample of size ``n``.

    ``mode="exact"`` swaps in the finite-n KS distribution; AD and CvM stay
    asymptotic in both modes. Parametric bootstrap lives in :func:`bootstrap_pvalues`.
    """
    ks, ad, cvm = stats
    if mode == "exact":
        p_ks = float(kstwo.sf(ks, n))
    elif mode == "asymptotic":
        p_ks = kolmogorov_sf(math.sqrt(n) * ks)
    else:
        raise ValueError(f"unknown p-value mode {mode!r}")
    return p_ks, ad_sf(ad), cvm_sf(cvm)


def gof_statistics(data, cdf):
    return ks_statistic(data, cdf), ad_statistic(data, cdf), cvm_statistic(data, cdf)


# ---- model fitting glue ---------------------------------------------------

def _fit(model, sample, opts):
    """Fitted (cdf, params dict, std errors, -2 log l, converged, params object)."""
    if model == "rbtll":
        r = estimation.fit("MLE", sample, opts=opts)
        th = r.params
        se = None if r.std_errors is None else dict(zip(("gamma", "upsilon", "p"), r.std_errors))
        return (lambda x: dist.cdf(x, th)), {"gamma": th.gamma, "upsilon": th.upsilon, "p": th.p}, se, r.minus2loglik, r.converged, th
    r = estimation.fit_rival(RivalModel(model), sample, opts=opts)
    phi = r.params
    return (lambda x: rival_cdf(x, phi)), phi.as_dict(), r.std_errors, r.minus2loglik, r.converged, phi


def _simulate(model, params, n, stream):
    if model == "rbtll":
        return sampling.sample(params, n, stream)
    return Sample(rival_sample(params, n, stream.generator()))


def bootstrap_pvalues(model, params, n, observed, B, seed, threads=1):
    """Parametric-bootstrap exceedance fractions; returns ``(p_ks, p_ad, p_cvm, failures)``."""
    opts = estimation.FitOptions(restarts=1, std_errors=False)

    def one(b):
        try:
            s = _simulate(model, params, n, sampling.RngStream(seed, b))
            cdf, *_, conv, _ = _fit(model, s, opts)
            if not conv:
                return None
            return gof_statistics(s, cdf)
        except (ValueError, RuntimeError):
            return None

    with ThreadPoolExecutor(max_workers=max(1, threads)) as ex:
        results = list(ex.map(one, range(B)))
    ok = np.array([r for r in results if r is not None])
    failures = B - len(ok)
    if len(ok) == 0:
        return math.nan, math.nan, math.nan, failures
    ge = (ok >= np.asarray(observed)[None, :]).sum(axis=0)
    p = (ge + 1.0) / (len(ok) + 1.0)
    return float(p[0]), float(p[1]), float(p[2]), failures


def assess(model, data, pvalue_mode="asymptotic", B=200, seed=0, threads=1, opts=None):
    """Fit one model by ML and compute its GofReport."""
    s = data if isinstance(data, Sample) else Sample(data)
    model = model.lower()
    if pvalue_mode not in PVALUE_MODES:
        raise ValueError(f"unknown p-value mode {pvalue_mode!r}; choose from {PVALUE_MODES}")
    if model not in MODEL_NAMES:
        raise ValueError(f"unknown model {model!r}; choose from {MODEL_NAMES}")
    rep = GofReport(model=model, n=len(s), pvalue_mode=pvalue_mode)
    try:
        cdf, params, se, m2ll, conv, pobj = _fit(model, s, opts or estimation.FitOptions())
    except (ValueError, RuntimeError) as exc:
        rep.error = f"{type(exc).__name__}: {exc}"
        return rep
    rep.params, rep.std_errors, rep.minus2loglik, rep.converged = params, se, m2ll, conv
    rep.ks, rep.ad, rep.cvm = gof_statistics(s, cdf)
    if pvalue_mode == "bootstrap":
        rep.p_ks, rep.p_ad, rep.p_cvm, rep.bootstrap_failures = bootstrap_pvalues(
            model, pobj, len(s), (rep.ks, rep.ad, rep.cvm), B, seed, threads)
    else:
        rep.p_ks, rep.p_ad, rep.p_cvm = gof_pvalues((rep.ks, rep.ad, rep.cvm), len(s), pvalue_mode)
    return rep


def compare_models(data, models=MODEL_NAMES, pvalue_mode="asymptotic", B=200, seed=0, threads=1):
    """Fit every model and rank by KS (ties by AD); failed fits sort last."""
    reports = [assess(m, data, pvalue_mode, B, seed, threads) for m in models]

    def key(r):
        if r.error is not None:
            return (1, math.inf, math.inf)
        return (0, r.ks, r.ad)

    return sorted(reports, key=key)


_PARAM_ORDER = ("gamma", "upsilon", "p", "scale", "shape", "lam")


def format_table(reports):
    """Aligned plain-text table in the column order of the comparison tables."""
    head = ["Model", "-2logL", "KS", "AD", "CvM", "p(KS)", "p(AD)", "p(CvM)", "estimates", "SEs"]
    rows = []
    for r in reports:
        if r.error is not None:
            rows.append([r.model.upper(), "failed: " + r.error] + [""] * 8)
            continue
        est = " ".join(f"{k}={r.params[k]:.4f}" for k in _PARAM_ORDER if k in r.params)
        se = "-" if not r.std_errors else " ".join(f"{k}={r.std_errors[k]:.4f}" for k in _PARAM_ORDER if k in r.std_errors)
        rows.append([r.model.upper(), f"{r.minus2loglik:.4f}", f"{r.ks:.4f}", f"{r.ad:.4f}", f"{r.cvm:.4f}",
                     f"{r.p_ks:.4f}", f"{r.p_ad:.4f}", f"{r.p_cvm:.4f}", est, se])
    widths = [max(len(str(row[j])) for row in [head] + rows) for j in range(len(head))]
    lines = ["  ".join(str(c).ljust(w) for c, w in zip(row, widths)).rstrip() for row in [head] + rows]
    return "\n".join(lines)
