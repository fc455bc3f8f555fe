import dataclasses
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fecr.data import make_dataset
from fecr.distributions import RngStream
from fecr.errors import IncompatibleModelError
from fecr.models import (
    ModelKind,
    PriorSpec,
    build_model,
    initial_values,
    log_density_terms,
    log_posterior,
    outlier_weights_paired,
    outlier_weights_unpaired,
    pointwise_log_lik,
    select_kind,
    transform_to_constrained,
    transform_to_unconstrained,
)

import oracles

ALL_KINDS = list(ModelKind)


def _paired(n=15, seed=3):
    rng = np.random.default_rng(seed)
    return make_dataset(rng.poisson(30, n), rng.poisson(3, n), f_pre=15)


def test_layout_sizes():
    ds = _paired(15)
    assert build_model(ModelKind.PAIRED_BASELINE, ds).dim == 3 + 15
    assert build_model(ModelKind.PAIRED_INDIVIDUAL, ds).dim == 4 + 30
    assert build_model(ModelKind.PAIRED_SIMPLE, ds).dim == 2
    assert build_model(ModelKind.PAIRED_ZI_OUTLIER, ds).dim == 5 + 15
    un = make_dataset([1, 2, 3], [0, 1], design="unpaired")
    assert build_model(ModelKind.UNPAIRED_ZI, un).dim == 4 + 3 + 2
    m = build_model(ModelKind.PAIRED_BASELINE, ds)
    assert m.param_names[:4] == ["mu", "kappa", "delta", "mu_c[0]"]


def test_incompatible_combinations():
    un = make_dataset([1, 2, 3], [0, 1], design="unpaired")
    with pytest.raises(IncompatibleModelError, match="paired design"):
        build_model(ModelKind.PAIRED_INDIVIDUAL, un)
    with pytest.raises(IncompatibleModelError):
        select_kind(paired=False, individual_efficacy=True)
    with pytest.raises(IncompatibleModelError):
        select_kind(paired=True, zero_inflation=True, individual_efficacy=True)
    assert select_kind(True, zero_inflation=True, outlier=True) is ModelKind.PAIRED_ZI_OUTLIER
    assert select_kind(False) is ModelKind.UNPAIRED_BASELINE
    assert select_kind(True, simple=True) is ModelKind.PAIRED_SIMPLE


def test_small_sample_warning():
    assert build_model("PairedBaseline", _paired(5)).warnings
    assert not build_model("PairedBaseline", _paired(12)).warnings


def test_prior_override_and_parse():
    spec = PriorSpec.parse("mu=normal(1000,100)")
    assert spec == PriorSpec("mu", "normal", (1000.0, 100.0))
    m = build_model("PairedBaseline", _paired(), priors=[spec])
    assert m.priors["mu"].dist == "normal"
    assert PriorSpec.parse("tau=trunc_normal(2,1,0)").lower == 0.0
    with pytest.raises(IncompatibleModelError):
        build_model("PairedBaseline", _paired(), priors=[PriorSpec("mu", "beta", (1, 1))])
    with pytest.raises(IncompatibleModelError):
        build_model("PairedBaseline", _paired(), priors=[PriorSpec("phi", "beta", (1, 1))])
    with pytest.raises(ValueError):
        PriorSpec.parse("mu=gamma(1)")


def test_default_priors():
    m = build_model("PairedIndividual", _paired())
    assert str(m.priors["tau"]) == "tau=trunc_normal(2,1,0)"
    assert str(m.priors["nu"]) == "nu=beta(1,1)"
    assert str(m.priors["mu"]) == "mu=gamma(1,0.001)"
    assert str(m.priors["kappa"]) == "kappa=gamma(1,0.7)"


# --- outlier weights -----------------------------------------------------


def test_unpaired_weights_examples():
    w, flags = outlier_weights_unpaired([0, 0, 10, 10, 500])
    assert flags.tolist() == [False, False, True, True, True]
    np.testing.assert_allclose(w, [1, 1, 0.5, 0.5, 0.01])
    w, flags = outlier_weights_unpaired([5, 5, 5, 5])
    assert not flags.any() and np.all(w == 1)
    w, flags = outlier_weights_unpaired([0, 0, 0, 0, 1000])
    np.testing.assert_allclose(w, [1, 1, 1, 1, 0.01])
    with pytest.raises(ValueError, match="at least 4"):
        outlier_weights_unpaired([1, 2, 3])


def test_paired_weights_examples():
    w, _ = outlier_weights_paired([100, 50, 0], [10, 100, 7])
    np.testing.assert_allclose(w, [1.0, 0.5, 0.01])


def test_alpha_prior_centred_on_outlier_ratio():
    m = build_model("UnpairedOutlier", make_dataset([5, 6, 7, 8, 9], [0, 0, 10, 10, 500], design="unpaired"))
    w = np.array([0.5, 0.5, 0.99])
    y = np.array([10, 10, 500.0])
    assert m.priors["alpha"].hyperpars[0] == pytest.approx(np.sum(w * y) / w.sum() / 104.0)


# --- transforms ----------------------------------------------------------


def test_transform_zero_maps_to_centre():
    m = build_model("PairedZI", _paired(4))
    named = transform_to_constrained(m, np.zeros(m.dim))
    assert named["mu"] == 1.0 and named["kappa"] == 1.0
    assert named["delta"] == 0.5 and named["phi"] == 0.5
    m = build_model("PairedBaseline", _paired(4), delta_upper=2.0)
    assert transform_to_constrained(m, np.zeros(m.dim))["delta"] == 1.0


@pytest.mark.parametrize("kind", ALL_KINDS)
def test_transform_roundtrip(kind):
    m = oracles.example_model(kind)
    rng = np.random.default_rng(1)
    for _ in range(20):
        u = rng.normal(0, 3, m.dim)
        back = transform_to_unconstrained(m, transform_to_constrained(m, u))
        np.testing.assert_allclose(back, u, rtol=0, atol=1e-12 * max(1.0, np.abs(u).max()) * 10)


# --- initial values ------------------------------------------------------


def test_initial_values():
    zeros = build_model("PairedBaseline", make_dataset([0, 0, 0], [0, 0, 0]))
    init = transform_to_constrained(zeros, initial_values(zeros, RngStream(1)))
    assert init["mu"] == 1.0
    m = build_model("PairedBaseline", make_dataset([400, 600], [10, 0], f_pre=1.0))
    init = transform_to_constrained(m, initial_values(m, RngStream(1)))
    assert init["mu"] == pytest.approx(500.0)
    a = initial_values(m, RngStream(1, 0))
    b = initial_values(m, RngStream(1, 1))
    assert not np.array_equal(a, b)


# --- likelihood ------------------------------------------------------------


def test_thinning_marginalisation_single_animal():
    m = build_model("PairedBaseline", make_dataset([5], [0], f_pre=15))
    pre, _ = pointwise_log_lik(m, {"mu": 75.0, "kappa": 1.0, "delta": 0.1, "mu_c": [75.0]})
    brute = oracles.enumerate_thinned(5, 15, oracles.poisson_latent(75.0), 75.0)
    assert abs(pre[0] - brute) < 1e-8
    assert pre[0] == pytest.approx(5 * math.log(5) - 5 - math.lgamma(6), abs=1e-12)


def _named_for(m, rng):
    named = transform_to_constrained(m, rng.normal(0, 0.8, m.dim))
    for k in ("mu_c", "mu_t"):
        if k in named:
            named[k] = named[k] * 40
    return named


@pytest.mark.parametrize("kind", ALL_KINDS)
def test_marginalisation_matches_enumeration(kind):
    m = oracles.example_model(kind, n=8, f=5.0)
    m = dataclasses.replace(m, weights=np.linspace(0.2, 1.0, m.data.n_post), _cache={})
    rng = np.random.default_rng(7)
    named = _named_for(m, rng)
    pre_ll, post_ll = pointwise_log_lik(m, named)
    d = m.data
    phi = named.get("phi")
    for i in range(d.n_pre):
        lam = named["mu"] if kind.simple else named["mu_c"][i]
        latent = oracles.zip_latent(lam, phi) if phi is not None else oracles.poisson_latent(lam)
        assert abs(pre_ll[i] - oracles.enumerate_thinned(d.pre_raw[i], d.f_pre[i], latent, lam)) < 1e-8
    for i in range(d.n_post):
        base = named["mu"] if kind.simple else (named["mu_c"][i] if kind.paired else named["mu_t"][i])
        eff = named["delta_i"][i] if kind.individual else named["delta"]
        lam = eff * base
        if kind.outlier:
            latent = oracles.mixture_latent(lam, m.weights[i], named["alpha"], phi)
            top = lam * named["alpha"]
        else:
            latent = oracles.zip_latent(lam, phi) if phi is not None else oracles.poisson_latent(lam)
            top = lam
        assert abs(post_ll[i] - oracles.enumerate_thinned(d.post_raw[i], d.f_post[i], latent, top)) < 1e-8


@pytest.mark.parametrize("kind", ALL_KINDS)
def test_gradient_matches_finite_differences(kind):
    m = oracles.example_model(kind)
    rng = np.random.default_rng(11)
    base = initial_values(m, RngStream(0))
    for _ in range(15):
        theta = base + rng.normal(0, 0.5, m.dim)
        value, grad = log_posterior(m, theta)
        assert np.isfinite(value)
        fd = oracles.central_difference(lambda t: log_posterior(m, t)[0], theta)
        assert oracles.gradient_rel_error(grad, fd) < 1e-5


def test_non_finite_input_is_flagged():
    m = oracles.example_model("PairedBaseline")
    theta = np.zeros(m.dim)
    theta[0] = np.nan
    value, grad = log_posterior(m, theta)
    assert value == -np.inf and np.all(grad == 0)
    with pytest.raises(ValueError):
        log_posterior(m, np.zeros(m.dim + 1))


def test_simple_model_all_zero_prior_limit():
    m = build_model("PairedSimple", make_dataset([0, 0, 0], [0, 0, 0], f_pre=15))
    terms = log_density_terms(m, {"mu": 1e-9, "delta": 0.3})
    assert abs(terms["likelihood"]) < 1e-9


@pytest.mark.parametrize("design", ["paired", "unpaired"])
def test_zero_inflation_at_phi_zero_reduces_to_baseline(design):
    zi = oracles.example_model(("Paired" if design == "paired" else "Unpaired") + "ZI")
    base = build_model(("Paired" if design == "paired" else "Unpaired") + "Baseline", zi.data)
    named = _named_for(base, np.random.default_rng(4))
    t_base = log_density_terms(base, named)
    t_zi = log_density_terms(zi, dict(named, phi=0.0))
    t_zi.pop("prior:phi")
    assert sum(t_zi.values()) == sum(t_base.values())


@pytest.mark.parametrize("kind", ["PairedOutlier", "UnpairedOutlier", "PairedZIOutlier", "UnpairedZIOutlier"])
def test_unit_weights_remove_outlier_component(kind):
    m = oracles.example_model(kind)
    m = dataclasses.replace(m, weights=np.ones(m.data.n_post), _cache={})
    plain = build_model(kind.replace("Outlier", "") or kind, m.data) if "ZI" in kind else \
        build_model(kind.replace("Outlier", "Baseline"), m.data)
    named = _named_for(plain, np.random.default_rng(5))
    t_out = log_density_terms(m, dict(named, alpha=3.7))
    t_out.pop("prior:alpha")
    assert sum(t_out.values()) == pytest.approx(sum(log_density_terms(plain, named).values()), abs=1e-12)


def test_individual_limit_matches_baseline():
    ds = _paired(10)
    ind = build_model("PairedIndividual", ds)
    base = build_model("PairedBaseline", ds)
    mu_c = np.linspace(100, 900, 10)
    nu = 0.12
    t_ind = log_density_terms(ind, {"mu": 500.0, "kappa": 1.0, "tau": 1e8, "nu": nu,
                                    "mu_c": mu_c, "delta_i": np.full(10, nu)})
    t_base = log_density_terms(base, {"mu": 500.0, "kappa": 1.0, "delta": nu, "mu_c": mu_c})
    assert t_ind["likelihood"] == pytest.approx(t_base["likelihood"], abs=1e-4)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 10_000))
def test_permutation_invariance(seed):
    rng = np.random.default_rng(seed)
    ds = _paired(7, seed=seed)
    order = rng.permutation(7)
    for kind in ("PairedBaseline", "PairedIndividual", "PairedZIOutlier"):
        m = build_model(kind, ds)
        mp = build_model(kind, ds.permuted(order))
        theta = initial_values(m, RngStream(seed)) + rng.normal(0, 0.3, m.dim)
        tp = theta.copy()
        for b, sl in m.slices().items():
            if sl.stop - sl.start == 7:
                tp[sl] = theta[sl][order]
        v, _ = log_posterior(m, theta)
        vp, _ = log_posterior(mp, tp)
        assert vp == pytest.approx(v, rel=1e-12, abs=1e-9)


def test_delta_upper_allows_increase():
    ds = make_dataset([10, 10, 10], [15, 12, 20], f_pre=1)
    m = build_model("PairedBaseline", ds, delta_upper=3.0)
    named = transform_to_constrained(m, np.full(m.dim, 2.0))
    assert 1.0 < named["delta"] < 3.0
