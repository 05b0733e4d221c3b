"""Record-based transmuted log-logistic (RBTLL) lifetime distribution.

Density, quantile and moment routines, acceptance-rejection sampling, seven
point estimators, goodness-of-fit comparison against log-logistic, Weibull and
transmuted Weibull rivals, and a Monte Carlo estimator study.

Hot loops are compiled with numba when it is available; set
``RBTLL_DISABLE_NUMBA=1`` to run the pure-numpy code paths instead.
"""
from ._backend import BACKEND
from .data import DataError, Sample, builtin, load
from .distribution import (
    DomainError,
    HazardShape,
    MomentNotFiniteError,
    QuadratureError,
    RbtllParams,
    cdf,
    classify_hazard_shape,
    hazard,
    logpdf,
    lr_ratio,
    order_statistic_pdf,
    pdf,
    psi,
    quantile,
    raw_moment,
    survival,
)
from .estimation import FitOptions, FitResult, Method, fit, fit_rival, neg_log_likelihood, objective
from .gof import GofReport, ad_statistic, assess, compare_models, cvm_statistic, ks_statistic
from .rivals import RivalModel, RivalParams
from .sampling import ArEnvelope, EnvelopeError, RngStream, build_envelope, draw, sample
from .simulation import SimConfig, SimTable, builtin_case, run_simulation
from .special import LambertWError, WBranch, lambert_w

__version__ = "0.1.0"
