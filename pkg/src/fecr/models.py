"""Hierarchical egg-count models as log-posteriors over unconstrained space.

Every model shares the same three layers: binomial subsampling of the true
count by ``1/f``, a Poisson (or zero-inflated / two-component Poisson) count
given the animal's latent mean, and a gamma layer for between-animal
aggregation. The binomial layer is marginalised analytically: a Poisson(lam)
count thinned with probability ``1/f`` is Poisson(lam / f), and the same
holds component-wise for the zero-inflated and mixture variants. All latent
means are kept as explicit parameters.

Parameters are sampled on an unconstrained scale: ``log`` for positive
values, a scaled logit for values in ``(0, upper)`` and ``log(x - lower)``
for values bounded below. :func:`log_posterior` returns the value including
the log-Jacobian and its exact gradient.
"""

import enum
import math
import re
from dataclasses import dataclass, field

import numpy as np
from scipy import special

from . import distributions as dist
from .errors import IncompatibleModelError

__all__ = [
    "ModelKind",
    "PriorSpec",
    "Model",
    "select_kind",
    "default_priors",
    "build_model",
    "log_posterior",
    "log_density_terms",
    "pointwise_log_lik",
    "transform_to_constrained",
    "transform_to_unconstrained",
    "initial_values",
    "outlier_weights_unpaired",
    "outlier_weights_paired",
]

_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)


class ModelKind(enum.Enum):
    PAIRED_BASELINE = "PairedBaseline"
    UNPAIRED_BASELINE = "UnpairedBaseline"
    PAIRED_ZI = "PairedZI"
    UNPAIRED_ZI = "UnpairedZI"
    PAIRED_INDIVIDUAL = "PairedIndividual"
    PAIRED_SIMPLE = "PairedSimple"
    PAIRED_OUTLIER = "PairedOutlier"
    UNPAIRED_OUTLIER = "UnpairedOutlier"
    PAIRED_ZI_OUTLIER = "PairedZIOutlier"
    UNPAIRED_ZI_OUTLIER = "UnpairedZIOutlier"

    @property
    def paired(self):
        return self.value.startswith("Paired")

    @property
    def zero_inflated(self):
        return "ZI" in self.value

    @property
    def individual(self):
        return self is ModelKind.PAIRED_INDIVIDUAL

    @property
    def simple(self):
        return self is ModelKind.PAIRED_SIMPLE

    @property
    def outlier(self):
        return self.value.endswith("Outlier")

    def describe(self):
        """One-line description used in report headers."""
        if self.simple:
            return "Bayesian model without zero-inflation and without a gamma layer for paired design (small samples)"
        zi = "with" if self.zero_inflated else "without"
        design = "paired" if self.paired else "unpaired"
        text = f"Bayesian model {zi} zero-inflation for {design} design"
        if self.individual:
            text += " allowing individual efficacy"
        if self.outlier:
            text += " with weighted outlier component"
        return text


def select_kind(paired, zero_inflation=False, individual_efficacy=False, simple=False, outlier=False):
    """Map option flags onto a :class:`ModelKind`, rejecting invalid combinations."""
    if individual_efficacy and not paired:
        raise IncompatibleModelError("individual efficacy only applies to the paired design")
    if individual_efficacy and zero_inflation:
        raise IncompatibleModelError("zero inflation and individual efficacy cannot be combined")
    if simple and (not paired or zero_inflation or individual_efficacy or outlier):
        raise IncompatibleModelError("the simple model is only available for paired data without other options")
    if individual_efficacy and outlier:
        raise IncompatibleModelError("outlier weighting is not available with individual efficacy")
    if simple:
        return ModelKind.PAIRED_SIMPLE
    if individual_efficacy:
        return ModelKind.PAIRED_INDIVIDUAL
    name = ("Paired" if paired else "Unpaired") + ("ZI" if zero_inflation else "")
    name += "Outlier" if outlier else ("" if zero_inflation else "Baseline")
    return ModelKind(name)


# ---------------------------------------------------------------------------
# priors

_PRIOR_ARITY = {"gamma": 2, "beta": 2, "normal": 2, "trunc_normal": 3}
_UNIT_PARAMS = {"delta", "phi", "nu"}


@dataclass(frozen=True)
class PriorSpec:
    """Prior on one group-level parameter.

    ``gamma`` takes (shape, rate), ``beta`` (a, b), ``normal`` (mean, sd)
    and ``trunc_normal`` (mean, sd) with ``lower`` as the truncation point.
    A beta prior on ``delta`` is stretched over ``(0, delta_upper)``.
    """

    target: str
    dist: str
    hyperpars: tuple
    lower: float = None

    def __post_init__(self):
        if self.dist not in _PRIOR_ARITY:
            raise ValueError(f"unknown prior family {self.dist!r}; choose from {sorted(_PRIOR_ARITY)}")
        hp = tuple(float(h) for h in self.hyperpars)
        object.__setattr__(self, "hyperpars", hp)
        if len(hp) != 2:
            raise ValueError(f"{self.dist} prior for {self.target} needs 2 hyperparameters, got {len(hp)}")
        if self.dist in ("gamma", "beta") and not (hp[0] > 0 and hp[1] > 0):
            raise ValueError(f"{self.dist} prior for {self.target} needs positive hyperparameters")
        if self.dist in ("normal", "trunc_normal") and not hp[1] > 0:
            raise ValueError(f"{self.dist} prior for {self.target} needs a positive sd")
        if self.dist == "trunc_normal":
            if self.lower is None or not np.isfinite(self.lower):
                raise ValueError(f"trunc_normal prior for {self.target} needs a finite lower bound")
            z = (self.lower - hp[0]) / hp[1]
            object.__setattr__(self, "_log_mass", float(special.log_ndtr(-z)))

    @classmethod
    def parse(cls, text):
        """Parse ``name=family(a,b)`` or ``name=trunc_normal(mean,sd,lower)``."""
        m = re.fullmatch(r"\s*(\w+)\s*=\s*(\w+)\s*\(([^)]*)\)\s*", text)
        if not m:
            raise ValueError(f"cannot parse prior {text!r}; expected name=family(a,b)")
        name, family, args = m.groups()
        try:
            vals = [float(a) for a in args.split(",") if a.strip()]
        except ValueError:
            raise ValueError(f"prior {text!r} has non-numeric hyperparameters") from None
        if family not in _PRIOR_ARITY or len(vals) != _PRIOR_ARITY[family]:
            n = _PRIOR_ARITY.get(family)
            raise ValueError(f"prior {text!r}: family {family!r} expects {n} numbers")
        lower = vals[2] if family == "trunc_normal" else None
        return cls(name, family, tuple(vals[:2]), lower)

    def __str__(self):
        args = list(self.hyperpars) + ([self.lower] if self.dist == "trunc_normal" else [])
        return f"{self.target}={self.dist}({','.join(f'{a:g}' for a in args)})"

    def log_density(self, x, scale=1.0):
        """Log density at ``x`` and its derivative in ``x``."""
        a, b = self.hyperpars
        x = np.float64(x)
        if self.dist == "gamma":
            val = a * math.log(b) - special.gammaln(a) + special.xlogy(a - 1.0, x) - b * x
            return val, (a - 1.0) / x - b
        if self.dist == "beta":
            z = x / scale
            val = special.xlogy(a - 1.0, z) + special.xlog1py(b - 1.0, -z) - special.betaln(a, b) - math.log(scale)
            return val, ((a - 1.0) / z - (b - 1.0) / (1.0 - z)) / scale
        z = (x - a) / b
        val = -0.5 * z * z - math.log(b) - _HALF_LOG_2PI
        if self.dist == "trunc_normal":
            if x <= self.lower:
                return -np.inf, 0.0
            val -= self._log_mass
        return val, -z / b


def default_priors(kind, alpha_mean=1.0):
    """Default priors for every group parameter of ``kind``."""
    p = {"mu": PriorSpec("mu", "gamma", (1.0, 0.001))}
    if kind.simple:
        p["delta"] = PriorSpec("delta", "beta", (1.0, 1.0))
        return p
    p["kappa"] = PriorSpec("kappa", "gamma", (1.0, 0.7))
    if kind.individual:
        p["tau"] = PriorSpec("tau", "trunc_normal", (2.0, 1.0), lower=0.0)
        p["nu"] = PriorSpec("nu", "beta", (1.0, 1.0))
    else:
        p["delta"] = PriorSpec("delta", "beta", (1.0, 1.0))
    if kind.zero_inflated:
        p["phi"] = PriorSpec("phi", "beta", (1.0, 1.0))
    if kind.outlier:
        p["alpha"] = PriorSpec("alpha", "trunc_normal", (alpha_mean, 10.0), lower=1.0)
    return p


# ---------------------------------------------------------------------------
# outlier weights


def outlier_weights_unpaired(post):
    """Weights for after-treatment counts of an unpaired design.

    Counts above Q3 + 1.5 IQR are dropped to get a trimmed mean ``m``; counts
    above the 95% Poisson(m) quantile are outliers. The largest outlier gets
    weight 0.01 and the others ``min(1, 0.01 * y_max / y)``.
    Returns ``(weights, is_outlier)``.
    """
    y = np.asarray(post, dtype=float)
    if y.size < 4:
        raise ValueError(
            f"outlier weighting needs at least 4 after-treatment counts, got {y.size}; "
            "use the model without outlier weighting"
        )
    q1, q3 = np.percentile(y, [25, 75])
    kept = y[y <= q3 + 1.5 * (q3 - q1)]
    m = kept.mean()
    weights = np.ones_like(y)
    if m <= 0:
        flags = y > 0
    else:
        flags = y > dist.poisson_quantile(0.95, m)
    if flags.any():
        y_max = y[flags].max()
        weights[flags] = np.minimum(1.0, 0.01 * y_max / y[flags])
    return weights, flags


def outlier_weights_paired(pre, post):
    """Animals whose count increased get weight pre/post (0.01 when pre is 0)."""
    pre = np.asarray(pre, dtype=float)
    post = np.asarray(post, dtype=float)
    if pre.shape != post.shape:
        raise ValueError("paired outlier weights need equal-length pre and post counts")
    flags = post > pre
    weights = np.ones_like(post)
    weights[flags] = np.where(pre[flags] > 0, pre[flags] / post[flags], 0.01)
    return weights, flags


def _alpha_prior_mean(post, weights, flags):
    # outliers weighted by their membership of the scaled component
    if not flags.any() or post.mean() <= 0:
        return 1.0
    w = 1.0 - weights[flags]
    if w.sum() <= 0:
        return 1.0
    return max(1.0, float(np.sum(w * post[flags]) / w.sum() / post.mean()))


# ---------------------------------------------------------------------------
# model container


@dataclass(frozen=True)
class Block:
    name: str
    size: int
    transform: str  # "log", "logit" (scaled to (0, bound)) or "lower" (bound below)
    bound: float = 0.0


@dataclass(frozen=True, eq=False)
class Model:
    kind: ModelKind
    data: object
    priors: dict
    blocks: tuple
    weights: np.ndarray
    outlier_flags: np.ndarray
    delta_upper: float = 1.0
    warnings: tuple = ()
    _cache: dict = field(default_factory=dict, repr=False)

    @property
    def dim(self):
        return sum(b.size for b in self.blocks)

    @property
    def group_names(self):
        return [b.name for b in self.blocks if b.size == 1 and b.name in self.priors]

    @property
    def param_names(self):
        names = []
        for b in self.blocks:
            if b.name in self.priors:
                names.append(b.name)
            else:
                names.extend(f"{b.name}[{i}]" for i in range(b.size))
        return names

    @property
    def small_sample(self):
        return self.data.sample_size < 10

    def slices(self):
        out, start = {}, 0
        for b in self.blocks:
            out[b.name] = slice(start, start + b.size)
            start += b.size
        return out

    # the sampler's target protocol
    def log_density(self, theta):
        return log_posterior(self, theta)

    def initial_values(self, stream):
        return initial_values(self, stream)

    def constrain(self, theta):
        named = transform_to_constrained(self, theta)
        return np.concatenate([np.atleast_1d(named[b.name]) for b in self.blocks])


def build_model(kind, data, priors=None, delta_upper=1.0):
    """Assemble a model for ``data``.

    ``priors`` is an iterable of :class:`PriorSpec` overriding the defaults.
    ``delta_upper`` > 1 lets the remaining-proportion parameter exceed 1
    when counts increase after treatment.
    """
    if isinstance(kind, str):
        kind = ModelKind(kind)
    if kind.paired != data.paired:
        if kind.individual:
            raise IncompatibleModelError("individual efficacy only applies to the paired design")
        raise IncompatibleModelError(f"{kind.value} needs {'paired' if kind.paired else 'unpaired'} data")
    if not delta_upper > 0:
        raise ValueError("delta_upper must be positive")

    post_epg = data.post_raw * data.f_post
    if kind.outlier:
        if kind.paired:
            weights, flags = outlier_weights_paired(data.pre_raw * data.f_pre, post_epg)
        else:
            weights, flags = outlier_weights_unpaired(data.post_raw)
        alpha_mean = _alpha_prior_mean(post_epg, weights, flags)
    else:
        weights = np.ones(data.n_post)
        flags = np.zeros(data.n_post, dtype=bool)
        alpha_mean = 1.0

    merged = default_priors(kind, alpha_mean)
    for spec in priors or ():
        if spec.target not in merged:
            raise IncompatibleModelError(
                f"{kind.value} has no parameter {spec.target!r}; valid: {', '.join(merged)}"
            )
        if spec.dist == "beta" and spec.target not in _UNIT_PARAMS:
            raise IncompatibleModelError(f"beta prior is only valid for {sorted(_UNIT_PARAMS)}, not {spec.target}")
        merged[spec.target] = spec

    blocks = [Block("mu", 1, "log")]
    if not kind.simple:
        blocks.append(Block("kappa", 1, "log"))
    if kind.individual:
        blocks += [Block("tau", 1, "log"), Block("nu", 1, "logit", 1.0)]
    else:
        blocks.append(Block("delta", 1, "logit", float(delta_upper)))
    if kind.zero_inflated:
        blocks.append(Block("phi", 1, "logit", 1.0))
    if kind.outlier:
        blocks.append(Block("alpha", 1, "lower", 1.0))
    if not kind.simple:
        blocks.append(Block("mu_c", data.n_pre, "log"))
        if not kind.paired:
            blocks.append(Block("mu_t", data.n_post, "log"))
    if kind.individual:
        blocks.append(Block("delta_i", data.n_pre, "log"))

    warns = []
    if data.sample_size < 10:
        hint = "informative priors" if kind.simple or not kind.paired else "informative priors or the simple model"
        warns.append(f"sample size is less than 10 (n = {data.sample_size}); consider {hint}")
    return Model(kind, data, merged, tuple(blocks), weights, flags, float(delta_upper), tuple(warns))


# ---------------------------------------------------------------------------
# transforms


def _forward(block, u):
    """Constrained value, dx/du, log|dx/du| and its derivative for one block."""
    if block.transform == "log":
        x = np.exp(u)
        return x, x, u, np.ones_like(u)
    if block.transform == "lower":
        e = np.exp(u)
        return block.bound + e, e, u, np.ones_like(u)
    s = special.expit(u)
    sc = special.expit(-u)
    up = block.bound
    logj = math.log(up) - np.logaddexp(0.0, -u) - np.logaddexp(0.0, u)
    return up * s, up * s * sc, logj, sc - s


def transform_to_constrained(model, theta):
    """Named constrained values; group parameters come back as floats."""
    theta = np.asarray(theta, dtype=float)
    if theta.shape != (model.dim,):
        raise ValueError(f"expected {model.dim} unconstrained values, got shape {theta.shape}")
    out = {}
    for b, sl in zip(model.blocks, model.slices().values()):
        x = _forward(b, theta[sl])[0]
        out[b.name] = float(x[0]) if b.name in model.priors else x
    return out


def transform_to_unconstrained(model, named):
    parts = []
    for b in model.blocks:
        x = np.atleast_1d(np.asarray(named[b.name], dtype=float))
        if x.size != b.size:
            raise ValueError(f"{b.name} needs {b.size} values, got {x.size}")
        if b.transform == "log":
            parts.append(np.log(x))
        elif b.transform == "lower":
            parts.append(np.log(x - b.bound))
        else:
            z = x / b.bound
            parts.append(np.log(z) - np.log1p(-z))
    return np.concatenate(parts)


# ---------------------------------------------------------------------------
# likelihood pieces


def _count_loglik(y, lam, lgy, phi=None, w=None, alpha=None):
    """Per-observation log pmf with derivatives in lam, phi and alpha.

    Base pmf is Poisson(lam), or the mixture w*Poisson(lam) + (1-w)*Poisson(alpha*lam);
    with ``phi`` it is additionally zero-inflated.
    """
    log_lam = np.log(lam)
    lp1 = y * log_lam - lam - lgy
    if w is None:
        M = lp1
        dM_lam = y / lam - 1.0
        dM_alpha = None
    else:
        lp2 = y * (log_lam + np.log(alpha)) - alpha * lam - lgy
        a = np.log(w) + lp1
        b = np.log1p(-w) + lp2
        M = np.logaddexp(a, b)
        r = np.exp(a - M)
        dM_lam = y / lam - r - (1.0 - r) * alpha
        dM_alpha = (1.0 - r) * (y / alpha - lam)
    if phi is None:
        return M, dM_lam, None, dM_alpha
    zero = y == 0
    log1m_phi = np.log1p(-phi)
    tail = log1m_phi + M
    val = np.where(zero, np.logaddexp(np.log(phi), tail), tail)
    share = np.where(zero, np.exp(tail - val), 1.0)
    d_phi = np.where(zero, (1.0 - np.exp(M)) * np.exp(-val), -1.0 / (1.0 - phi))
    return val, share * dM_lam, d_phi, None if dM_alpha is None else share * dM_alpha


def _gamma_latent(x, log_x, shape, mean):
    """Sum of log Gamma(x; shape, shape/mean) with derivatives in x, shape, mean."""
    n = x.size
    rate = shape / mean
    sum_log = log_x.sum()
    sum_x = x.sum()
    val = n * (shape * np.log(rate) - special.gammaln(shape)) + (shape - 1.0) * sum_log - rate * sum_x
    d_x = (shape - 1.0) / x - rate
    d_shape = n * (np.log(rate) + 1.0 - special.digamma(shape)) + sum_log - sum_x / mean
    d_mean = -n * shape / mean + shape * sum_x / mean**2
    return val, d_x, d_shape, d_mean


def _data_cache(model):
    c = model._cache
    if not c:
        d = model.data
        c["pre"] = d.pre_raw.astype(float)
        c["post"] = d.post_raw.astype(float)
        c["lg_pre"] = special.gammaln(c["pre"] + 1.0)
        c["lg_post"] = special.gammaln(c["post"] + 1.0)
        c["f_pre"] = d.f_pre
        c["f_post"] = d.f_post
    return c


def _evaluate(model, x, log_x):
    """Log-density terms and gradient with respect to constrained values."""
    kind = model.kind
    c = _data_cache(model)
    g = {name: np.zeros(np.shape(v)) if np.ndim(v) else 0.0 for name, v in x.items()}
    terms = {}
    phi = x.get("phi")

    # before-treatment / control counts
    base_pre = np.full(c["pre"].size, x["mu"]) if kind.simple else x["mu_c"]
    v, d_lam, d_phi, _ = _count_loglik(c["pre"], base_pre / c["f_pre"], c["lg_pre"], phi)
    lik = v.sum()
    if kind.simple:
        g["mu"] += (d_lam / c["f_pre"]).sum()
    else:
        g["mu_c"] = g["mu_c"] + d_lam / c["f_pre"]
    if phi is not None:
        g["phi"] += d_phi.sum()

    # after-treatment counts
    if kind.simple:
        base, base_name = x["mu"], "mu"
    elif kind.paired:
        base, base_name = x["mu_c"], "mu_c"
    else:
        base, base_name = x["mu_t"], "mu_t"
    eff, eff_name = (x["delta_i"], "delta_i") if kind.individual else (x["delta"], "delta")
    w = model.weights if kind.outlier else None
    alpha = x.get("alpha")
    lam = eff * base / c["f_post"]
    v, d_lam, d_phi, d_alpha = _count_loglik(c["post"], lam, c["lg_post"], phi, w, alpha)
    lik += v.sum()
    d_lam = d_lam / c["f_post"]
    d_base = d_lam * eff
    d_eff = d_lam * base
    g[base_name] = g[base_name] + (d_base.sum() if np.ndim(g[base_name]) == 0 else d_base)
    g[eff_name] = g[eff_name] + (d_eff.sum() if np.ndim(g[eff_name]) == 0 else d_eff)
    if phi is not None:
        g["phi"] += d_phi.sum()
    if alpha is not None:
        g["alpha"] += d_alpha.sum()
    terms["likelihood"] = lik

    # gamma layers
    latent = 0.0
    if not kind.simple:
        for name in ("mu_c", "mu_t"):
            if name in x:
                v, dx, ds, dm = _gamma_latent(x[name], log_x[name], x["kappa"], x["mu"])
                latent += v
                g[name] = g[name] + dx
                g["kappa"] += ds
                g["mu"] += dm
    if kind.individual:
        v, dx, ds, dm = _gamma_latent(x["delta_i"], log_x["delta_i"], x["tau"], x["nu"])
        latent += v
        g["delta_i"] = g["delta_i"] + dx
        g["tau"] += ds
        g["nu"] += dm
    terms["latent"] = latent

    for name, prior in model.priors.items():
        scale = model.delta_upper if name == "delta" else 1.0
        v, dv = prior.log_density(x[name], scale)
        terms[f"prior:{name}"] = v
        g[name] += dv
    return terms, g


def log_density_terms(model, named):
    """Likelihood, latent and per-prior terms at constrained values (no Jacobian)."""
    x = _named_arrays(model, named)
    log_x = {b.name: np.log(x[b.name]) for b in model.blocks if b.name not in model.priors}
    with np.errstate(divide="ignore", invalid="ignore"):
        terms, _ = _evaluate(model, x, log_x)
    return {k: float(v) for k, v in terms.items()}


def _named_arrays(model, named):
    x = {}
    for b in model.blocks:
        v = named[b.name]
        x[b.name] = np.float64(np.asarray(v).ravel()[0]) if b.name in model.priors else np.asarray(v, dtype=float)
    return x


def pointwise_log_lik(model, named):
    """Per-observation log-likelihood of the raw counts: ``(pre, post)`` arrays."""
    kind = model.kind
    c = _data_cache(model)
    x = _named_arrays(model, named)
    phi = x.get("phi")
    base_pre = np.full(c["pre"].size, x["mu"]) if kind.simple else x["mu_c"]
    with np.errstate(divide="ignore", invalid="ignore"):
        pre, *_ = _count_loglik(c["pre"], base_pre / c["f_pre"], c["lg_pre"], phi)
        base = x["mu"] if kind.simple else (x["mu_c"] if kind.paired else x["mu_t"])
        eff = x["delta_i"] if kind.individual else x["delta"]
        w = model.weights if kind.outlier else None
        post, *_ = _count_loglik(c["post"], eff * base / c["f_post"], c["lg_post"], phi, w, x.get("alpha"))
    return pre, post


def log_posterior(model, theta):
    """Unnormalised log-posterior on the unconstrained scale and its gradient.

    Non-finite input or output gives ``(-inf, zeros)``, which the sampler
    treats as a divergent point.
    """
    theta = np.asarray(theta, dtype=float)
    if theta.shape != (model.dim,):
        raise ValueError(f"expected {model.dim} unconstrained values, got shape {theta.shape}")
    bad = (-np.inf, np.zeros(model.dim))
    if not np.all(np.isfinite(theta)):
        return bad
    with np.errstate(all="ignore"):
        x, dxdu, dlogj, log_x = {}, {}, {}, {}
        logj = 0.0
        slices = model.slices()
        for b in model.blocks:
            u = theta[slices[b.name]]
            xv, dx, lj, dlj = _forward(b, u)
            group = b.name in model.priors
            x[b.name] = xv[0] if group else xv
            log_x[b.name] = u if b.transform == "log" else np.log(xv)
            dxdu[b.name], dlogj[b.name] = dx, dlj
            logj += lj.sum()
        terms, g = _evaluate(model, x, log_x)
        value = sum(terms.values()) + logj
        grad = np.empty(model.dim)
        for b in model.blocks:
            grad[slices[b.name]] = g[b.name] * dxdu[b.name] + dlogj[b.name]
    if not (np.isfinite(value) and np.all(np.isfinite(grad))):
        return bad
    return float(value), grad


def initial_values(model, stream):
    """Starting point: group and per-animal means from the data, the rest jittered.

    ``mu`` starts at the mean before-treatment epg and each ``mu_c[i]`` at the
    animal's epg (both clamped to >= 1); ``mu_t`` starts at the group value.
    All other coordinates are uniform(-1, 1) on the unconstrained scale.
    """
    d = model.data
    pre_epg = d.pre_raw * d.f_pre
    mean_pre = max(float(pre_epg.mean()), 1.0)
    theta = stream.uniform(-1.0, 1.0, size=model.dim)
    sl = model.slices()
    theta[sl["mu"]] = math.log(mean_pre)
    if "mu_c" in sl:
        theta[sl["mu_c"]] = np.log(np.maximum(pre_epg, 1.0))
    if "mu_t" in sl:
        theta[sl["mu_t"]] = math.log(mean_pre)
    return theta
