"""Classical egg count reduction test and bootstrap percentile intervals."""

from dataclasses import asdict, dataclass

import numpy as np

from .distributions import RngStream, student_t_quantile
from .errors import UndefinedReductionError

__all__ = ["FecrtResult", "fecrt_point", "fecrt_asymptotic_ci", "bootstrap_ci"]


@dataclass(frozen=True)
class FecrtResult:
    reduction_pct: float
    ci_lower_pct: float
    ci_upper_pct: float
    method: str
    n_control: int
    n_treatment: int
    level: float = 0.95
    bootstrap_B: int = None
    redraws: int = 0
    seed: int = None

    def to_dict(self):
        d = asdict(self)
        d["ci"] = [self.ci_lower_pct, self.ci_upper_pct]
        return d


def _groups(control, treatment):
    c = np.asarray(control, dtype=float).ravel()
    t = np.asarray(treatment, dtype=float).ravel()
    if c.size == 0 or t.size == 0:
        raise ValueError("both groups need at least one count")
    if np.any(c < 0) or np.any(t < 0) or not (np.all(np.isfinite(c)) and np.all(np.isfinite(t))):
        raise ValueError("counts must be finite and non-negative")
    return c, t


def fecrt_point(control, treatment):
    """Percentage reduction 100 * (1 - mean(treatment) / mean(control))."""
    c, t = _groups(control, treatment)
    mc = c.mean()
    if mc <= 0:
        raise UndefinedReductionError("control mean is zero; the reduction is undefined")
    return 100.0 * (1.0 - t.mean() / mc)


def fecrt_asymptotic_ci(control, treatment, level=0.95):
    """Point reduction with a t interval built on the log ratio of means.

    The variance of log(mean_T / mean_C) is estimated by
    s_T^2 / (n_T mean_T^2) + s_C^2 / (n_C mean_C^2), and the t quantile has
    n_T + n_C - 2 degrees of freedom.
    """
    c, t = _groups(control, treatment)
    if c.size < 2 or t.size < 2:
        raise UndefinedReductionError("each group needs at least 2 counts for a sample variance")
    mc, mt = c.mean(), t.mean()
    if mc <= 0:
        raise UndefinedReductionError("control mean is zero; the reduction is undefined")
    if mt <= 0:
        raise UndefinedReductionError(
            "all after-treatment counts are zero; the asymptotic interval cannot be computed"
        )
    var = t.var(ddof=1) / (t.size * mt**2) + c.var(ddof=1) / (c.size * mc**2)
    q = student_t_quantile(0.5 + level / 2.0, c.size + t.size - 2)
    log_ratio = np.log(mt / mc)
    half = q * np.sqrt(var)
    lo = 100.0 * (1.0 - np.exp(log_ratio + half))
    hi = 100.0 * (1.0 - np.exp(log_ratio - half))
    return FecrtResult(
        reduction_pct=fecrt_point(c, t),
        ci_lower_pct=float(lo),
        ci_upper_pct=float(hi),
        method="asymptotic_t",
        n_control=c.size,
        n_treatment=t.size,
        level=level,
    )


def bootstrap_ci(control, treatment, paired=False, B=2000, level=0.95, stream=None):
    """Percentile bootstrap interval for the percentage reduction.

    Paired data are resampled as animal pairs; otherwise each group is
    resampled on its own. Replicates whose control mean is zero are redrawn,
    up to ``10 * B`` draws in total.
    """
    c, t = _groups(control, treatment)
    if B < 100:
        raise ValueError(f"B must be at least 100, got {B}")
    if paired and c.size != t.size:
        raise ValueError("paired resampling needs groups of equal size")
    point = fecrt_point(c, t)
    stream = stream or RngStream(0)

    reps = np.empty(0)
    attempts = redraws = 0
    while reps.size < B:
        need = B - reps.size
        if attempts + need > 10 * B:
            raise UndefinedReductionError(
                f"gave up after {attempts} bootstrap draws: too many replicates with zero control mean"
            )
        attempts += need
        if paired:
            idx = stream.choice_indices(c.size, (need, c.size))
            mc, mt = c[idx].mean(axis=1), t[idx].mean(axis=1)
        else:
            mc = c[stream.choice_indices(c.size, (need, c.size))].mean(axis=1)
            mt = t[stream.choice_indices(t.size, (need, t.size))].mean(axis=1)
        ok = mc > 0
        redraws += int(np.count_nonzero(~ok))
        reps = np.concatenate([reps, 100.0 * (1.0 - mt[ok] / mc[ok])])

    alpha = (1.0 - level) / 2.0
    lo, hi = np.quantile(reps, [alpha, 1.0 - alpha])
    return FecrtResult(
        reduction_pct=point,
        ci_lower_pct=float(lo),
        ci_upper_pct=float(hi),
        method="bootstrap",
        n_control=c.size,
        n_treatment=t.size,
        level=level,
        bootstrap_B=B,
        redraws=redraws,
        seed=stream.seed,
    )
