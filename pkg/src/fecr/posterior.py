"""Convergence diagnostics, posterior summaries and reduction probabilities."""

import warnings
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "QUANTILES",
    "RHAT_THRESHOLD",
    "FitSummary",
    "split_rhat",
    "empirical_quantiles",
    "derive_fecr",
    "fecr_probs",
    "summarize",
    "render_text",
    "summary_to_json",
    "draws_table",
]

QUANTILES = (0.025, 0.25, 0.5, 0.75, 0.975)
RHAT_THRESHOLD = 1.1
DERIVED = ("FECR", "meanEPG.untreated", "meanEPG.treated")


def split_rhat(chains):
    """Potential scale reduction factor on split chains.

    ``chains`` is ``(nchain, ndraws)``; each chain is cut into two halves
    (dropping the middle draw when odd) and

        R = sqrt(((n - 1) / n * W + B / n) / W)

    with W the mean within-half variance and B/n the variance of half means.
    Returns ``inf`` (with a warning) when every half-chain is constant.
    """
    x = np.asarray(chains, dtype=float)
    if x.ndim == 1:
        x = x[None, :]
    n = x.shape[1] // 2
    if n < 2:
        raise ValueError("split R-hat needs at least 4 draws per chain")
    halves = np.concatenate([x[:, :n], x[:, -n:]], axis=0)
    W = halves.var(axis=1, ddof=1).mean()
    B_over_n = halves.mean(axis=1).var(ddof=1)
    if W <= 0:
        if B_over_n > 0 or not np.all(halves == halves.flat[0]):
            warnings.warn("zero within-chain variance; R-hat is infinite", RuntimeWarning, stacklevel=2)
            return np.inf
        warnings.warn("constant draws; R-hat is undefined and reported as infinite", RuntimeWarning, stacklevel=2)
        return np.inf
    return float(np.sqrt(((n - 1) / n * W + B_over_n) / W))


def empirical_quantiles(x, probs=QUANTILES):
    """Order-statistic interpolation at position p(n-1) (0-based)."""
    s = np.sort(np.asarray(x, dtype=float).ravel())
    pos = np.asarray(probs) * (s.size - 1)
    lo = np.floor(pos).astype(int)
    hi = np.minimum(lo + 1, s.size - 1)
    return s[lo] + (pos - lo) * (s[hi] - s[lo])


def derive_fecr(model, draws):
    """Per-draw reduction and group mean epg, each ``(nchain, ndraws)``.

    With individual efficacy the reduction is one minus the median of the
    animals' remaining proportions in that draw.
    """
    kind = model.kind
    mu = draws["mu"]
    if kind.individual:
        names = draws.names
        cols_d = [i for i, n in enumerate(names) if n.startswith("delta_i[")]
        cols_m = [i for i, n in enumerate(names) if n.startswith("mu_c[")]
        d_i = draws.draws[:, :, cols_d]
        m_i = draws.draws[:, :, cols_m]
        return {
            "FECR": 1.0 - np.median(d_i, axis=2),
            "meanEPG.untreated": m_i.mean(axis=2),
            "meanEPG.treated": (d_i * m_i).mean(axis=2),
        }
    delta = draws["delta"]
    return {"FECR": 1.0 - delta, "meanEPG.untreated": mu, "meanEPG.treated": delta * mu}


def fecr_probs(fecr, threshold=0.95):
    """Percentage of draws whose reduction is below ``threshold``."""
    x = np.asarray(fecr, dtype=float).ravel()
    if x.size == 0:
        raise ValueError("no draws supplied")
    if not 0.0 < threshold <= 1.0:
        raise ValueError(f"threshold must lie in (0, 1], got {threshold}")
    return 100.0 * np.count_nonzero(x < threshold) / x.size


@dataclass
class FitSummary:
    model: str
    description: str
    config: dict
    rows: list
    rhat: dict
    divergences: int
    warnings: list = field(default_factory=list)
    sample_size: int = 0
    fecr: np.ndarray = field(default=None, repr=False)

    def row(self, name):
        for r in self.rows:
            if r["name"] == name:
                return r
        raise KeyError(name)

    @property
    def converged(self):
        return all(v < RHAT_THRESHOLD for v in self.rhat.values())


def _row(name, x, rhat):
    q = empirical_quantiles(x)
    r = {"name": name, "mean": float(np.mean(x)), "sd": float(np.std(x, ddof=1)) if x.size > 1 else 0.0}
    for p, v in zip(QUANTILES, q):
        r[f"{100 * p:g}%"] = float(v)
    r["rhat"] = rhat
    return r


def summarize(model, draws):
    """Summary table, R-hat for every parameter and the warning list."""
    derived = derive_fecr(model, draws)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        rhat = {name: split_rhat(draws.draws[:, :, j]) for j, name in enumerate(draws.names)}
        rhat.update({name: split_rhat(v) for name, v in derived.items()})
    rows = [_row(name, derived[name].ravel(), rhat[name]) for name in DERIVED]
    rows += [_row(name, draws.pooled(name), rhat[name]) for name in model.group_names]

    notes = []
    worst = max(rhat, key=lambda k: rhat[k])
    if rhat[worst] >= RHAT_THRESHOLD:
        notes.append(
            f"there is evidence of non-convergence: {sum(v >= RHAT_THRESHOLD for v in rhat.values())} "
            f"parameter(s) have potential scale reduction factors of at least {RHAT_THRESHOLD} "
            f"(largest {rhat[worst]:.3f} for {worst}); run longer chains"
        )
    n_div = int(np.sum(draws.divergences))
    if n_div > 0:
        notes.append(
            f"{n_div} divergent transition(s) after warmup; the posterior may not be fully explored. "
            f"The tuning parameter adapt_delta (currently {draws.config.adapt_delta:g}) should be increased"
        )
    notes.extend(model.warnings)
    return FitSummary(
        model=model.kind.value,
        description=model.kind.describe(),
        config=draws.config.to_dict(),
        rows=rows,
        rhat=rhat,
        divergences=n_div,
        warnings=notes,
        sample_size=model.data.sample_size,
        fecr=derived["FECR"],
    )


def _fmt(v, width=9):
    return f"{v:{width}.4f}"


def render_text(summary):
    """Plain-text report: header, sampler settings, table and notes."""
    c = summary.config
    lines = [
        f"Model: {summary.description}",
        f" Number of Samples: {c['nsamples']}",
        f" Warm-up samples: {c['nburnin']}",
        f" Thinning: {c['thinning']}",
        f" Number of Chains: {c['nchain']}",
    ]
    heads = ["mean", "sd"] + [f"{100 * p:g}%" for p in QUANTILES]
    lines.append(" " * 18 + "".join(f"{h:>10}" for h in heads))
    for r in summary.rows[: len(DERIVED)]:
        vals = [r["mean"], r["sd"]] + [r[f"{100 * p:g}%"] for p in QUANTILES]
        lines.append(f"{r['name']:<18}" + "".join(" " + _fmt(v) for v in vals))
    lines.append("")
    if summary.converged:
        lines.append(
            "NOTE: There is no evidence of non-convergence since all parameters have "
            f"potential scale reduction factors less than {RHAT_THRESHOLD}."
        )
    for w in summary.warnings:
        lines.append(f"WARNING: {w}.")
    return "\n".join(lines) + "\n"


def summary_to_json(summary, probs=None, threshold=0.95):
    """JSON-ready dict: ``{model, config, summary, warnings, fecr_probs}``."""
    doc = {
        "model": summary.model,
        "description": summary.description,
        "config": summary.config,
        "summary": [{k: (_json_num(v) if k != "name" else v) for k, v in r.items()} for r in summary.rows],
        "rhat_max": _json_num(max(summary.rhat.values())),
        "divergences": summary.divergences,
        "warnings": list(summary.warnings),
        "fecr_probs": None,
    }
    if probs is not None:
        doc["fecr_probs"] = {"threshold": threshold, "percent": float(probs)}
    return doc


def _json_num(v):
    v = float(v)
    return v if np.isfinite(v) else None


def draws_table(model, draws):
    """Header and rows for a flat export: one row per retained draw."""
    derived = derive_fecr(model, draws)
    header = ["chain", "iteration"] + list(draws.names) + list(DERIVED)
    rows = []
    for c in range(draws.nchain):
        for i in range(draws.ndraws):
            rows.append([c, i] + list(draws.draws[c, i]) + [derived[k][c, i] for k in DERIVED])
    return header, rows
