# Turning expert statements into priors and passing them to a fit.
from fecr import PriorSpec, beta_from_mode_concentration, solve_from_quantiles
from fecr.distributions import beta_quantile, gamma_quantile
from fecr.elicit import prior_snippet

# "the median farm mean is 300 epg and 9 in 10 farms are below 800"
shape, rate = solve_from_quantiles("gamma", (0.5, 300), (0.9, 800))
print("mu ~ gamma(shape={:.4f}, rate={:.6f})".format(shape, rate))
print("  check: median {:.1f}, 90% quantile {:.1f}".format(gamma_quantile(0.5, shape, rate),
                                                           gamma_quantile(0.9, shape, rate)))

# "the drug most likely leaves 10% of eggs, and I am about as sure as 12 observations"
a, b = beta_from_mode_concentration(0.1, 12)
print("delta ~ beta({:g}, {:g})  mode {:.3f}".format(a, b, (a - 1) / (a + b - 2)))

# the same idea from two quantiles of delta
a2, b2 = solve_from_quantiles("beta", (0.1, 0.03), (0.9, 0.25))
print("delta ~ beta({:.4f}, {:.4f}); 10% and 90% quantiles {:.4f}, {:.4f}".format(
    a2, b2, beta_quantile(0.1, a2, b2), beta_quantile(0.9, a2, b2)))

# snippets go straight to `fecr fit --prior ...` or PriorSpec.parse
for spec in (prior_snippet("gamma", (shape, rate)), prior_snippet("beta", (a, b))):
    print(spec, "->", PriorSpec.parse(spec))
