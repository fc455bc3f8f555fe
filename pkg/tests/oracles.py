"""Independent reference computations used by several test modules.

Nothing here calls into the package's likelihood code: enumeration uses
scipy.stats directly.
"""

import numpy as np
from scipy import stats
from scipy.special import logsumexp

from fecr.data import make_dataset
from fecr.models import ModelKind, build_model

TAIL = 1e-12


def enumerate_thinned(y_star, f, latent_logpmf, rate_max):
    """log sum_Y Binomial(y*; Y, 1/f) * p(Y), truncated where p has tail mass < TAIL.

    Given y*, Y - y* is at most Poisson(rate_max)-distributed, so the range
    runs from y* to y* plus that tail quantile.
    """
    y_max = int(y_star) + int(stats.poisson.isf(TAIL / 10, rate_max)) + 20
    Y = np.arange(int(y_star), y_max + 1)
    return logsumexp(stats.binom.logpmf(y_star, Y, 1.0 / f) + latent_logpmf(Y))


def poisson_latent(lam):
    return lambda Y: stats.poisson.logpmf(Y, lam)


def zip_latent(lam, phi):
    def f(Y):
        base = np.log1p(-phi) + stats.poisson.logpmf(Y, lam)
        return np.where(Y == 0, np.logaddexp(np.log(phi), base), base)
    return f


def mixture_latent(lam, w, alpha, phi=None):
    def f(Y):
        with np.errstate(divide="ignore"):
            m = np.logaddexp(np.log(w) + stats.poisson.logpmf(Y, lam),
                             np.log1p(-w) + stats.poisson.logpmf(Y, alpha * lam))
        if phi is None:
            return m
        m = np.log1p(-phi) + m
        return np.where(Y == 0, np.logaddexp(np.log(phi), m), m)
    return f


def central_difference(fun, theta, h=1e-5):
    g = np.empty_like(theta)
    for i in range(theta.size):
        e = np.zeros_like(theta)
        e[i] = h
        g[i] = (fun(theta + e) - fun(theta - e)) / (2.0 * h)
    return g


def gradient_rel_error(analytic, numeric):
    """Max elementwise |a - n| / max(|a|, |n|, 1)."""
    scale = np.maximum(np.maximum(np.abs(analytic), np.abs(numeric)), 1.0)
    return float(np.max(np.abs(analytic - numeric) / scale))


def example_model(kind, n=8, seed=0, f=15.0):
    """A model of ``kind`` on a small synthetic dataset with one obvious outlier."""
    kind = ModelKind(kind) if isinstance(kind, str) else kind
    rng = np.random.default_rng(seed)
    pre = rng.poisson(30, n)
    post = rng.poisson(3, n)
    post[1] = 60
    post[2] = 0
    if kind.paired:
        ds = make_dataset(pre, post, f_pre=f)
    else:
        ds = make_dataset(pre, post[: n - 2], f_pre=f, design="unpaired")
    return build_model(kind, ds)
