"""Acceptance criteria, one test per criterion.

Each test prints a single ``[PASS]``/``[FAIL]`` line with the measured
quantities, and the lines are repeated in the pytest terminal summary.
Run on its own with ``pytest tests/test_acceptance.py -v`` or
``python tests/test_acceptance.py``.
"""

import dataclasses
import time

import numpy as np
import pytest
from scipy import stats

import oracles
from fecr.classical import bootstrap_ci, fecrt_asymptotic_ci, fecrt_point
from fecr.data import make_dataset
from fecr.distributions import RngStream
from fecr.elicit import beta_from_mode_concentration, solve_from_quantiles
from fecr.errors import UndefinedReductionError
from fecr.hmc import GaussianTarget, SamplerConfig, run_chains
from fecr.models import ModelKind, build_model, initial_values, log_posterior, pointwise_log_lik, transform_to_constrained
from fecr.posterior import derive_fecr, fecr_probs, split_rhat, summarize
from fecr.simulate import SimConfig, simulate

RESULTS = []


def report(number, title, ok, detail):
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {number:>2}: {title} | {detail}"
    RESULTS.append(line)
    print(line)
    assert ok, line


# --- 1 ----------------------------------------------------------------------

MU_GRID = (2.0, 20.0, 150.0, 600.0, 2000.0)
F_GRID = (1.0, 2.0, 5.0, 15.0, 50.0)


def _grid_model(kind, mu, f):
    rng = np.random.default_rng(int(mu * 7 + f))
    n = 6
    pre = rng.poisson(mu / f, n)
    pre[0] = 0
    post = rng.poisson(0.2 * mu / f, n)
    post[1] = 0
    post[2] = max(post[2], int(mu / f)) + 3  # something for the outlier component
    design = "paired" if kind.paired else "unpaired"
    data = make_dataset(pre, post if kind.paired else post[:5], f_pre=f, design=design)
    m = build_model(kind, data)
    return dataclasses.replace(m, weights=np.linspace(0.1, 1.0, m.data.n_post), _cache={})


def _check_enumeration(kind, mu, f):
    m = _grid_model(kind, mu, f)
    named = transform_to_constrained(m, np.random.default_rng(3).normal(0, 0.5, m.dim))
    named["mu"] = mu
    scale = np.linspace(0.5, 1.5, 6)
    if "mu_c" in named:
        named["mu_c"] = mu * scale[: len(named["mu_c"])]
    if "mu_t" in named:
        named["mu_t"] = mu * scale[::-1][: len(named["mu_t"])]
    pre_ll, post_ll = pointwise_log_lik(m, named)
    d, phi, worst = m.data, named.get("phi"), 0.0
    for i in range(d.n_pre):
        lam = named["mu"] if kind.simple else named["mu_c"][i]
        latent = oracles.zip_latent(lam, phi) if phi is not None else oracles.poisson_latent(lam)
        worst = max(worst, abs(pre_ll[i] - oracles.enumerate_thinned(d.pre_raw[i], f, latent, lam)))
    for i in range(d.n_post):
        base = named["mu"] if kind.simple else (named["mu_c"][i] if kind.paired else named["mu_t"][i])
        lam = (named["delta_i"][i] if kind.individual else named["delta"]) * base
        if kind.outlier:
            latent = oracles.mixture_latent(lam, m.weights[i], named["alpha"], phi)
            top = lam * named["alpha"]
        else:
            latent = oracles.zip_latent(lam, phi) if phi is not None else oracles.poisson_latent(lam)
            top = lam
        worst = max(worst, abs(post_ll[i] - oracles.enumerate_thinned(d.post_raw[i], f, latent, top)))
    return worst


def test_criterion_01_marginalisation():
    t0 = time.perf_counter()
    worst = max(_check_enumeration(kind, mu, f) for kind in ModelKind for mu in MU_GRID for f in F_GRID)
    dt = time.perf_counter() - t0
    report(1, "likelihood vs brute-force enumeration", worst < 1e-8 and dt < 10,
           f"10 kinds x 5x5 (mu, f) grid, max |diff| = {worst:.2e} (< 1e-8), {dt:.1f}s (< 10s)")


# --- 2 ----------------------------------------------------------------------

def test_criterion_02_gradients():
    t0 = time.perf_counter()
    worst, bad = 0.0, 0
    for kind in ModelKind:
        m = oracles.example_model(kind)
        rng = np.random.default_rng(100 + list(ModelKind).index(kind))
        base = initial_values(m, RngStream(0))
        for _ in range(100):
            theta = base + rng.normal(0, 0.5, m.dim)
            value, grad = log_posterior(m, theta)
            if not np.isfinite(value):
                bad += 1
                continue
            fd = oracles.central_difference(lambda t: log_posterior(m, t)[0], theta, h=1e-5)
            worst = max(worst, oracles.gradient_rel_error(grad, fd))
    dt = time.perf_counter() - t0
    report(2, "analytic gradient vs central differences", worst < 1e-5 and bad == 0 and dt < 30,
           f"10 kinds x 100 points, max rel err = {worst:.2e} (< 1e-5), non-finite = {bad}, {dt:.1f}s (< 30s)")


# --- 3, 4, 10 share 20 default fits ---------------------------------------

N_REPLICATES = 20


@pytest.fixture(scope="module")
def replicate_fits():
    t0 = time.perf_counter()
    fits = []
    for seed in range(1, N_REPLICATES + 1):
        table = simulate(SimConfig(n=15, pre_mean=500, delta=0.1, kappa=1, f=15, paired=True, seed=seed))
        model = build_model("PairedIndividual", table.to_dataset())
        draws = run_chains(model, SamplerConfig(seed=seed))
        fits.append((model, draws, summarize(model, draws)))
    return fits, time.perf_counter() - t0


def test_criterion_03_posterior_recovery(replicate_fits):
    fits, dt = replicate_fits
    covered = in_range = 0
    means = []
    for _, _, s in fits:
        row = s.row("FECR")
        covered += row["2.5%"] <= 0.90 <= row["97.5%"]
        in_range += 0.80 < row["mean"] < 0.97
        means.append(row["mean"])
    ok = covered >= 17 and in_range >= 19 and dt < 600
    report(3, "FECR recovery in the n=15, 500 epg, 90% regime", ok,
           f"95% CI covers 0.90 in {covered}/20 (>= 17), mean in (0.80, 0.97) in {in_range}/20 (>= 19), "
           f"mean of means {np.mean(means):.4f}, 20 fits in {dt:.0f}s (< 600s)")


def test_criterion_04_convergence(replicate_fits):
    fits, _ = replicate_fits
    clean = sum(all(v < 1.1 for v in s.rhat.values()) for _, _, s in fits)
    worst = max(max(s.rhat.values()) for _, _, s in fits)
    rng = np.random.default_rng(0)
    stuck = split_rhat(rng.normal(size=(2, 1000)) + np.array([[0.0], [10.0]]))
    report(4, "convergence diagnostics", clean >= 18 and stuck > 3,
           f"all R-hat < 1.1 in {clean}/20 fits (>= 18, worst {worst:.3f}); non-mixing chains R-hat = {stuck:.2f} (> 3)")


def test_criterion_10_fecr_probs(replicate_fits):
    fits, _ = replicate_fits
    above = 0
    monotone = True
    thresholds = np.linspace(0.5, 1.0, 51)
    for model, draws, s in fits:
        fecr = derive_fecr(model, draws)["FECR"]
        p = [fecr_probs(fecr, t) for t in thresholds]
        monotone &= bool(np.all(np.diff(p) >= 0))
        above += fecr_probs(fecr, 0.95) > 50
    report(10, "reduction probabilities", monotone and above >= 18,
           f"monotone in threshold on all 20 draw sets: {monotone}; P(FECR < 0.95) > 50% in {above}/20 (>= 18)")


# --- 5 ----------------------------------------------------------------------

def test_criterion_05_fecrt_hand_check():
    t0 = time.perf_counter()
    c, t = [100, 200, 300], [10, 20, 30]
    point = fecrt_point(c, t)
    r = fecrt_asymptotic_ci(c, t)
    half = 2.7764 * np.sqrt(100 / (3 * 400) + 10000 / (3 * 40000))
    lo = 100 * (1 - np.exp(np.log(0.1) + half))
    hi = 100 * (1 - np.exp(np.log(0.1) - half))
    try:
        fecrt_asymptotic_ci(c, [0, 0, 0])
        zero_ok = False
    except UndefinedReductionError:
        zero_ok = True
    dt = time.perf_counter() - t0
    ok = point == 90.0 and abs(r.ci_lower_pct - lo) <= 0.2 and abs(r.ci_upper_pct - hi) <= 0.2 and zero_ok and dt < 1
    report(5, "classical test hand check", ok,
           f"point {point} (90.0), CI ({r.ci_lower_pct:.2f}, {r.ci_upper_pct:.2f}) vs hand ({lo:.2f}, {hi:.2f}) "
           f"+/- 0.2, all-zero treatment raises: {zero_ok}, {dt * 1000:.0f}ms (< 1s)")


# --- 6 ----------------------------------------------------------------------

def test_criterion_06_bootstrap():
    t0 = time.perf_counter()
    c, t = [100, 200, 300], [10, 20, 30]
    a = bootstrap_ci(c, t, B=2000, stream=RngStream(2024))
    b = bootstrap_ci(c, t, B=2000, stream=RngStream(2024))
    pa = bootstrap_ci([40, 80, 120, 160], [4, 8, 12, 16], paired=True, B=2000, stream=RngStream(5))
    pb = bootstrap_ci([40, 80, 120, 160], [4, 8, 12, 16], paired=True, B=2000, stream=RngStream(5))
    const = bootstrap_ci([100] * 10, [10] * 10, B=2000, stream=RngStream(1))
    dt = time.perf_counter() - t0
    same = a == b and pa == pb
    flat = const.ci_lower_pct == const.ci_upper_pct == const.reduction_pct
    report(6, "bootstrap determinism and degeneracy", same and flat and dt < 5,
           f"seeded reruns identical: {same} (CI {a.ci_lower_pct:.2f}, {a.ci_upper_pct:.2f}); constant data CI "
           f"[{const.ci_lower_pct}, {const.ci_upper_pct}] at {const.reduction_pct}; {dt:.2f}s (< 5s)")


# --- 7 ----------------------------------------------------------------------

def test_criterion_07_elicitation():
    t0 = time.perf_counter()
    rng = np.random.default_rng(77)
    worst = 0.0
    for family in ("gamma", "beta"):
        done = 0
        while done < 50:
            t1, t2 = np.exp(rng.uniform(np.log(0.5), np.log(50), 2))
            p1, p2 = np.sort(rng.uniform(0.05, 0.95, 2))
            if p2 - p1 < 0.05:
                continue
            if family == "gamma":
                rate = t2 / 100.0
                q = stats.gamma.ppf([p1, p2], t1, scale=1 / rate)
                truth = (t1, rate)
            else:
                q = stats.beta.ppf([p1, p2], t1, t2)
                truth = (t1, t2)
            est = solve_from_quantiles(family, (p1, q[0]), (p2, q[1]))
            worst = max(worst, max(abs(e / s - 1) for e, s in zip(est, truth)))
            done += 1
    exact = beta_from_mode_concentration(0.5, 4) == (2.0, 2.0) and beta_from_mode_concentration(0.9, 12) == (10.0, 2.0)
    dt = time.perf_counter() - t0
    report(7, "elicitation roundtrips", worst < 1e-4 and exact and dt < 5,
           f"50 gamma + 50 beta planted cases, max rel err {worst:.2e} (< 1e-4); "
           f"mode/concentration (2,2) and (10,2) exact: {exact}; {dt:.2f}s (< 5s)")


# --- 8 ----------------------------------------------------------------------

def test_criterion_08_sampler_calibration():
    t0 = time.perf_counter()
    d = run_chains(GaussianTarget([0.0], [1.0]), SamplerConfig(nsamples=6000, nburnin=1000, seed=1))
    ks = stats.kstest(d.draws.ravel(), "norm").statistic
    accept = []
    for delta in (0.7, 0.8, 0.9, 0.95):
        target = GaussianTarget(np.zeros(10), np.linspace(0.5, 3.0, 10))
        r = run_chains(target, SamplerConfig(nsamples=2500, nburnin=1000, adapt_delta=delta, seed=2))
        accept.append((delta, r.accept_rate))
    acc_ok = all(np.all(np.abs(a - delta) <= 0.1) for delta, a in accept)
    target = GaussianTarget([0.0, 1.0], [1.0, 2.0])
    full = run_chains(target, SamplerConfig(nsamples=800, nburnin=300, seed=9))
    again = run_chains(target, SamplerConfig(nsamples=800, nburnin=300, seed=9))
    thin = run_chains(target, SamplerConfig(nsamples=800, nburnin=300, seed=9, thinning=4))
    thin_ok = np.array_equal(thin.draws, full.draws[:, 3::4])
    seed_ok = np.array_equal(full.draws, again.draws)
    dt = time.perf_counter() - t0
    acc_text = ", ".join(f"{delta}: {np.round(a, 3).tolist()}" for delta, a in accept)
    report(8, "sampler calibration", ks < 0.02 and acc_ok and thin_ok and seed_ok and dt < 30,
           f"KS {ks:.4f} (< 0.02) at {d.draws.size} draws; acceptance by adapt_delta {acc_text} (+/- 0.1); "
           f"thinning = every 4th draw: {thin_ok}; same seed identical: {seed_ok}; {dt:.1f}s (< 30s)")


# --- 9 ----------------------------------------------------------------------

def test_criterion_09_simulator_marginal():
    t0 = time.perf_counter()
    mu, kappa, f = 500.0, 1.0, 15.0
    t = simulate(SimConfig(n=100_000, pre_mean=mu, kappa=kappa, f=f, seed=99))
    x = t.masterPre
    p = kappa / (kappa + mu / f)
    top = int(stats.nbinom.ppf(0.999, kappa, p))
    obs = np.bincount(np.minimum(x, top), minlength=top + 1)
    probs = np.append(stats.nbinom.pmf(np.arange(top), kappa, p), stats.nbinom.sf(top - 1, kappa, p))
    exp = probs * x.size
    keep = exp >= 5
    o, e = obs[keep], exp[keep]
    if not keep.all():
        o, e = np.append(o, obs[~keep].sum()), np.append(e, exp[~keep].sum())
    pval = stats.chi2.sf(((o - e) ** 2 / e).sum(), o.size - 1)
    identity = True
    for seed in range(50):
        s = simulate(SimConfig(n=40, seed=seed, paired=bool(seed % 2), phi=0.2 * (seed % 3 == 0)))
        identity &= bool(np.array_equal(s.obsPre, s.masterPre * s.config.f)
                         and np.array_equal(s.obsPost, s.masterPost * s.config.f))
    dt = time.perf_counter() - t0
    report(9, "simulator marginal and column identity", pval > 0.001 and identity and dt < 10,
           f"chi-square GOF vs NegBinomial(mean {mu / f:.2f}, size {kappa}) p = {pval:.3f} (> 0.001) on 1e5 rows; "
           f"obs = master * f on 50 tables: {identity}; {dt:.1f}s (< 10s)")


if __name__ == "__main__":
    import sys
    sys.exit(pytest.main([__file__, "-q", "-s"]))
