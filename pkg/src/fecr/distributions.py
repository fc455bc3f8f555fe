"""Log-densities, CDFs, quantiles and seeded random streams.

Incomplete gamma/beta integrals come from :mod:`scipy.special`; the
inverse CDFs are solved here by safeguarded Newton iteration so the same
tolerance contract holds for every family.
"""

import math

import numpy as np
from scipy import special

from .errors import DomainError

__all__ = [
    "RngStream",
    "poisson_log_pmf",
    "zip_log_pmf",
    "neg_binomial_log_pmf",
    "binomial_log_pmf",
    "gamma_log_pdf",
    "beta_log_pdf",
    "normal_log_pdf",
    "trunc_normal_log_pdf",
    "gamma_cdf",
    "gamma_quantile",
    "beta_cdf",
    "beta_quantile",
    "normal_cdf",
    "normal_quantile",
    "student_t_cdf",
    "student_t_quantile",
    "poisson_cdf",
    "poisson_quantile",
]

_QUANTILE_TOL = 1e-10


def _check(cond, msg):
    if not np.all(cond):
        raise DomainError(msg)


def _result(x):
    x = np.asarray(x, dtype=float)
    return float(x) if x.ndim == 0 else x


# --------------------------------------------------------------------------
# discrete mass functions


def poisson_log_pmf(k, lam):
    """log P(K = k) for K ~ Poisson(lam); vectorised over both arguments."""
    k = np.asarray(k, dtype=float)
    lam = np.asarray(lam, dtype=float)
    _check(np.isfinite(lam) & (lam > 0), "Poisson rate must be finite and > 0")
    _check(k >= 0, "Poisson count must be >= 0")
    return _result(special.xlogy(k, lam) - lam - special.gammaln(k + 1.0))


def zip_log_pmf(k, lam, phi):
    """Zero-inflated Poisson: extra mass ``phi`` at zero, Poisson(lam) otherwise."""
    k = np.asarray(k, dtype=float)
    phi = np.asarray(phi, dtype=float)
    _check((phi >= 0) & (phi <= 1), "zero-inflation probability must lie in [0, 1]")
    base = np.asarray(poisson_log_pmf(k, lam))
    with np.errstate(divide="ignore"):
        log_phi = np.log(phi)
        log1m_phi = np.log1p(-phi)
    at_zero = np.logaddexp(log_phi, log1m_phi + base)
    return _result(np.where(k == 0, at_zero, log1m_phi + base))


def neg_binomial_log_pmf(k, mean, size):
    """Gamma-Poisson mixture with the given mean and gamma shape ``size``."""
    k = np.asarray(k, dtype=float)
    mean = np.asarray(mean, dtype=float)
    size = np.asarray(size, dtype=float)
    _check(np.isfinite(mean) & (mean > 0), "negative binomial mean must be > 0")
    _check(np.isfinite(size) & (size > 0), "negative binomial size must be > 0")
    out = (
        special.gammaln(k + size)
        - special.gammaln(size)
        - special.gammaln(k + 1.0)
        + size * (np.log(size) - np.log(size + mean))
        + special.xlogy(k, mean)
        - k * np.log(size + mean)
    )
    return _result(out)


def binomial_log_pmf(k, n, p):
    k = np.asarray(k, dtype=float)
    n = np.asarray(n, dtype=float)
    p = np.asarray(p, dtype=float)
    _check((p >= 0) & (p <= 1), "binomial probability must lie in [0, 1]")
    out = (
        special.gammaln(n + 1.0)
        - special.gammaln(k + 1.0)
        - special.gammaln(np.maximum(n - k, 0.0) + 1.0)
        + special.xlogy(k, p)
        + special.xlog1py(n - k, -p)
    )
    return _result(np.where((k < 0) | (k > n), -np.inf, out))


# --------------------------------------------------------------------------
# continuous densities (outside the support they return -inf)


def gamma_log_pdf(x, shape, rate):
    x = np.asarray(x, dtype=float)
    _check((np.asarray(shape) > 0) & (np.asarray(rate) > 0), "gamma shape and rate must be > 0")
    with np.errstate(divide="ignore", invalid="ignore"):
        out = (
            shape * np.log(rate)
            - special.gammaln(shape)
            + special.xlogy(shape - 1.0, x)
            - rate * x
        )
    return _result(np.where(x > 0, out, -np.inf))


def beta_log_pdf(x, a, b):
    x = np.asarray(x, dtype=float)
    _check((np.asarray(a) > 0) & (np.asarray(b) > 0), "beta shapes must be > 0")
    with np.errstate(divide="ignore", invalid="ignore"):
        out = special.xlogy(a - 1.0, x) + special.xlog1py(b - 1.0, -x) - special.betaln(a, b)
    return _result(np.where((x > 0) & (x < 1), out, -np.inf))


def normal_log_pdf(x, mean, sd):
    _check(np.asarray(sd) > 0, "normal sd must be > 0")
    z = (np.asarray(x, dtype=float) - mean) / sd
    return _result(-0.5 * z * z - np.log(sd) - 0.5 * math.log(2.0 * math.pi))


def trunc_normal_log_pdf(x, mean, sd, lower=-np.inf, upper=np.inf):
    """Normal density restricted to (lower, upper) and renormalised."""
    _check(np.asarray(sd) > 0, "normal sd must be > 0")
    if not lower < upper:
        raise DomainError("truncation bounds must satisfy lower < upper")
    x = np.asarray(x, dtype=float)
    # log of the retained mass, computed on the tail that keeps precision
    log_mass = _log_normal_mass((lower - mean) / sd, (upper - mean) / sd)
    out = np.asarray(normal_log_pdf(x, mean, sd)) - log_mass
    return _result(np.where((x > lower) & (x < upper), out, -np.inf))


def _log_normal_mass(a, b):
    """log(Phi(b) - Phi(a)) for standardised bounds."""
    if b == np.inf:
        return float(special.log_ndtr(-a))
    if a == -np.inf:
        return float(special.log_ndtr(b))
    if a > 0:
        return float(np.log(special.ndtr(-a) - special.ndtr(-b)))
    return float(np.log(special.ndtr(b) - special.ndtr(a)))


# --------------------------------------------------------------------------
# CDFs


def gamma_cdf(x, shape, rate):
    _check((np.asarray(shape) > 0) & (np.asarray(rate) > 0), "gamma shape and rate must be > 0")
    x = np.asarray(x, dtype=float)
    return _result(special.gammainc(shape, np.maximum(x, 0.0) * rate))


def beta_cdf(x, a, b):
    _check((np.asarray(a) > 0) & (np.asarray(b) > 0), "beta shapes must be > 0")
    x = np.clip(np.asarray(x, dtype=float), 0.0, 1.0)
    return _result(special.betainc(a, b, x))


def normal_cdf(x, mean=0.0, sd=1.0):
    return _result(special.ndtr((np.asarray(x, dtype=float) - mean) / sd))


def student_t_cdf(t, df):
    _check(np.asarray(df) > 0, "degrees of freedom must be > 0")
    t = np.asarray(t, dtype=float)
    tail = 0.5 * special.betainc(0.5 * df, 0.5, df / (df + t * t))
    return _result(np.where(t > 0, 1.0 - tail, tail))


def poisson_cdf(k, lam):
    _check(np.asarray(lam) > 0, "Poisson rate must be > 0")
    k = np.floor(np.asarray(k, dtype=float))
    return _result(np.where(k < 0, 0.0, special.gammaincc(np.maximum(k, 0.0) + 1.0, lam)))


# --------------------------------------------------------------------------
# quantiles


def _check_prob(p):
    if not (0.0 < p < 1.0):
        raise DomainError(f"probability must lie in (0, 1), got {p}")


def _invert(cdf, logpdf, p, x0, lo, hi):
    """Solve cdf(x) = p by Newton steps kept inside a shrinking bracket.

    ``hi`` may be ``inf``; it is then found by doubling from ``x0``.
    """
    if hi == np.inf:
        hi = max(x0, 1.0)
        while cdf(hi) < p:
            lo, hi = hi, 2.0 * hi
    x = min(max(x0, lo), hi)
    if not lo < x < hi:
        x = 0.5 * (lo + hi)
    for _ in range(200):
        err = cdf(x) - p
        if abs(err) < _QUANTILE_TOL:
            return x
        if err > 0:
            hi = x
        else:
            lo = x
        dens = math.exp(logpdf(x)) if np.isfinite(logpdf(x)) else 0.0
        step = x - err / dens if dens > 0 else np.nan
        if np.isfinite(step) and lo < step < hi:
            x = step
        else:
            x = 0.5 * (lo + hi)
        if hi - lo <= 4 * np.finfo(float).eps * max(abs(hi), 1e-300):
            return x
    return x


def gamma_quantile(p, shape, rate):
    """Smallest x with gamma_cdf(x) >= p (continuous, so the root)."""
    _check_prob(p)
    if not (shape > 0 and rate > 0):
        raise DomainError("gamma shape and rate must be > 0")
    z = float(special.ndtri(p))
    # Wilson-Hilferty seed on the unit-rate scale
    seed = shape * (1.0 - 1.0 / (9.0 * shape) + z / (3.0 * math.sqrt(shape))) ** 3
    if not seed > 0:
        seed = (p * shape * math.exp(special.gammaln(shape))) ** (1.0 / shape)
    x = _invert(
        lambda v: float(special.gammainc(shape, v)),
        lambda v: float(gamma_log_pdf(v, shape, 1.0)),
        p, seed, 0.0, np.inf,
    )
    return x / rate


def beta_quantile(p, a, b):
    _check_prob(p)
    if not (a > 0 and b > 0):
        raise DomainError("beta shapes must be > 0")
    mean = a / (a + b)
    sd = math.sqrt(a * b / ((a + b) ** 2 * (a + b + 1.0)))
    seed = min(max(mean + sd * float(special.ndtri(p)), 1e-8), 1.0 - 1e-8)
    return _invert(
        lambda v: float(special.betainc(a, b, v)),
        lambda v: float(beta_log_pdf(v, a, b)),
        p, seed, 0.0, 1.0,
    )


def normal_quantile(p, mean=0.0, sd=1.0):
    _check_prob(p)
    return mean + sd * float(special.ndtri(p))


def student_t_quantile(p, df):
    _check_prob(p)
    if not df >= 1:
        raise DomainError("degrees of freedom must be >= 1")
    if p == 0.5:
        return 0.0
    if p < 0.5:
        return -student_t_quantile(1.0 - p, df)
    log_norm = (
        special.gammaln(0.5 * (df + 1.0))
        - special.gammaln(0.5 * df)
        - 0.5 * math.log(df * math.pi)
    )
    return _invert(
        lambda t: float(student_t_cdf(t, df)),
        lambda t: log_norm - 0.5 * (df + 1.0) * math.log1p(t * t / df),
        p, float(special.ndtri(p)), 0.0, np.inf,
    )


def poisson_quantile(p, lam):
    """Smallest integer q with P(K <= q) >= p."""
    _check_prob(p)
    if not (np.isfinite(lam) and lam > 0):
        raise DomainError("Poisson rate must be finite and > 0")
    q = max(0, int(math.floor(lam + math.sqrt(lam) * float(special.ndtri(p)))))
    while q > 0 and poisson_cdf(q - 1, lam) >= p:
        q -= 1
    while poisson_cdf(q, lam) < p:
        q += 1
    return q


# --------------------------------------------------------------------------
# random streams


class RngStream:
    """Reproducible random stream keyed by ``(seed, stream_id)``.

    Streams with different ids are derived through :class:`numpy.random.SeedSequence`
    spawn keys, so they share no state. ``child(i)`` gives a further independent
    sub-stream, e.g. one per bootstrap batch.
    """

    def __init__(self, seed, stream_id=0, _key=None):
        if seed < 0 or stream_id < 0:
            raise DomainError("seed and stream_id must be non-negative")
        self.seed = int(seed)
        self.stream_id = int(stream_id)
        self._key = tuple(_key) if _key is not None else (self.stream_id,)
        ss = np.random.SeedSequence(self.seed, spawn_key=self._key)
        self._gen = np.random.Generator(np.random.PCG64(ss))

    def __repr__(self):
        return f"RngStream(seed={self.seed}, key={self._key})"

    def child(self, index):
        return RngStream(self.seed, self.stream_id, _key=self._key + (int(index),))

    @property
    def generator(self):
        return self._gen

    def uniform(self, low=0.0, high=1.0, size=None):
        if not low < high:
            raise DomainError("uniform bounds must satisfy low < high")
        return self._gen.uniform(low, high, size)

    def normal(self, mean=0.0, sd=1.0, size=None):
        if not np.all(np.asarray(sd) > 0):
            raise DomainError("normal sd must be > 0")
        return self._gen.normal(mean, sd, size)

    def integers(self, low, high, size=None):
        """Integers in the closed range [low, high]."""
        return self._gen.integers(low, high, size=size, endpoint=True)

    def gamma(self, shape, rate, size=None):
        shape = np.asarray(shape, dtype=float)
        rate = np.asarray(rate, dtype=float)
        _check((shape > 0) & (rate > 0), "gamma shape and rate must be > 0")
        return self._gen.gamma(shape, 1.0 / rate, size)

    def poisson(self, lam, size=None):
        lam = np.asarray(lam, dtype=float)
        _check(np.isfinite(lam) & (lam >= 0), "Poisson rate must be finite and >= 0")
        return self._gen.poisson(lam, size)

    def binomial(self, n, p, size=None):
        n = np.asarray(n)
        p = np.asarray(p, dtype=float)
        _check((p >= 0) & (p <= 1), "binomial probability must lie in [0, 1]")
        _check(n >= 0, "binomial trials must be >= 0")
        return self._gen.binomial(n, p, size)

    def beta(self, a, b, size=None):
        _check((np.asarray(a) > 0) & (np.asarray(b) > 0), "beta shapes must be > 0")
        return self._gen.beta(a, b, size)

    def choice_indices(self, n, size):
        """Indices drawn uniformly with replacement from range(n)."""
        return self._gen.integers(0, n, size=size)
