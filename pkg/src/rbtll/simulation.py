"""Monte Carlo comparison of the seven estimators (bias, MSE, MRE).

Replication ``r`` at sample size ``n`` draws from its own substream
``RngStream(seed, (n << 32) + r)``. Every estimator is fitted to that same
sample, starting from the true parameters. Tasks run on a thread pool (the
compiled kernels release the GIL). Aggregation walks replications in index
order, so the table does not depend on the worker count.
"""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
import csv
import io
import math
import os

import numpy as np

from . import sampling
from .distribution import RbtllParams
from .estimation import FitOptions, Method, fit

BUILTIN_CASES = {
    "I": (3.0, 1.5, 0.75),
    "II": (2.0, 0.9, 0.5),
    "III": (1.5, 2.0, 0.4),
    "IV": (2.5, 0.6, 0.3),
}
STUDY_SIZES = (50, 100, 200, 500)
FULL_REPS = 5000
DESK_REPS = 500
UNRELIABLE_FAILURE_RATE = 0.02

CSV_COLUMNS = (
    "estimator", "n",
    "bias_gamma", "bias_upsilon", "bias_p",
    "mse_gamma", "mse_upsilon", "mse_p",
    "mre_gamma", "mre_upsilon", "mre_p",
    "failures",
)


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class SimConfig:
    truth: RbtllParams
    sizes: tuple = STUDY_SIZES
    reps: int = DESK_REPS
    seed: int = 0
    estimators: tuple = tuple(Method)
    case_label: str = "custom"

    def __post_init__(self):
        if not isinstance(self.truth, RbtllParams):
            object.__setattr__(self, "truth", RbtllParams(*self.truth))
        if self.reps < 1:
            raise ConfigError("reps must be >= 1")
        if not self.sizes or any(int(n) < 4 for n in self.sizes):
            raise ConfigError("sizes must be a non-empty list of counts >= 4")
        if not self.estimators:
            raise ConfigError("at least one estimator is required")
        object.__setattr__(self, "sizes", tuple(int(n) for n in self.sizes))
        object.__setattr__(self, "estimators", tuple(Method.parse(m) for m in self.estimators))


def builtin_case(label, reps=FULL_REPS, seed=0, estimators=tuple(Method)):
    try:
        truth = BUILTIN_CASES[str(label).upper()]
    except KeyError:
        raise ConfigError(f"unknown case {label!r}; choose from {list(BUILTIN_CASES)}") from None
    return SimConfig(RbtllParams(*truth), STUDY_SIZES, reps, seed, estimators, str(label).upper())


@dataclass
class SimRow:
    estimator: Method
    n: int
    bias: tuple
    mse: tuple
    mre: tuple
    failures: int
    used: int

    @property
    def unreliable(self):
        return self.failures > UNRELIABLE_FAILURE_RATE * (self.failures + self.used)


@dataclass
class SimTable:
    config: SimConfig
    rows: list = field(default_factory=list)

    def row(self, estimator, n):
        m = Method.parse(estimator)
        for r in self.rows:
            if r.estimator is m and r.n == n:
                return r
        raise KeyError((m, n))

    def to_csv(self, fh=None):
        """RFC-4180 CSV, one row per (estimator, n); returns the text when ``fh`` is None."""
        buf = fh if fh is not None else io.StringIO()
        w = csv.writer(buf, lineterminator="\r\n")
        w.writerow(CSV_COLUMNS)
        for r in self.rows:
            w.writerow([r.estimator.name, r.n, *(repr(float(v)) for v in (*r.bias, *r.mse, *r.mre)), r.failures])
        if fh is None:
            return buf.getvalue()
        return None


def default_threads():
    env = os.environ.get("RBTLL_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def stream_id(n, r):
    return (int(n) << 32) + int(r)


def _replicate(cfg, envelope, n, r):
    """Estimates for one replication: array (n_estimators, 3), NaN rows for failures."""
    out = np.full((len(cfg.estimators), 3), np.nan)
    s = sampling.sample(cfg.truth, n, sampling.RngStream(cfg.seed, stream_id(n, r)), envelope)
    opts = FitOptions(restarts=0, std_errors=False)
    for j, m in enumerate(cfg.estimators):
        try:
            res = fit(m, s, start=cfg.truth, opts=opts)
        except (ValueError, RuntimeError):
            continue
        if res.converged and math.isfinite(res.objective):
            out[j] = res.params.as_tuple()
    return out


def aggregate(truth, estimates):
    """Bias, MSE and MRE over the finite rows of ``estimates`` (reps, 3)."""
    est = np.asarray(estimates, dtype=float)
    ok = np.all(np.isfinite(est), axis=1)
    t = np.asarray(truth.as_tuple())
    err = est[ok] - t
    if err.shape[0] == 0:
        nan3 = (math.nan,) * 3
        return nan3, nan3, nan3, int((~ok).sum()), 0
    bias = err.mean(axis=0)
    mse = (err**2).mean(axis=0)
    mre = (np.abs(err) / np.abs(t)).mean(axis=0)
    return tuple(map(float, bias)), tuple(map(float, mse)), tuple(map(float, mre)), int((~ok).sum()), int(ok.sum())


def run_simulation(cfg, threads=None):
    """Run the full (n, replication) grid and return the aggregated table."""
    envelope = sampling.build_envelope(cfg.truth)
    tasks = [(n, r) for n in cfg.sizes for r in range(cfg.reps)]
    threads = threads or default_threads()
    work = lambda nr: _replicate(cfg, envelope, *nr)
    if threads == 1:
        results = [work(t) for t in tasks]
    else:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            results = list(ex.map(work, tasks, chunksize=1))
    by_n = {}
    for (n, _), res in zip(tasks, results):
        by_n.setdefault(n, []).append(res)
    table = SimTable(cfg)
    for j, m in enumerate(cfg.estimators):
        for n in cfg.sizes:
            est = np.array([res[j] for res in by_n[n]])
            bias, mse, mre, failures, used = aggregate(cfg.truth, est)
            table.rows.append(SimRow(m, n, bias, mse, mre, failures, used))
    return table
