# Simulate a paired trial and estimate the reduction with the individual-efficacy model.
import numpy as np

from fecr import SamplerConfig, SimConfig, build_model, fecr_probs, render_text, run_chains, simulate, summarize

# 15 animals, 500 epg on average before treatment, 90% true reduction,
# strong aggregation (kappa = 1) and a McMaster slide (one egg = 15 epg)
table = simulate(SimConfig(n=15, pre_mean=500, delta=0.1, kappa=1, f=15, paired=True, seed=1))

print("obsPre  masterPre  truePre  obsPost  masterPost  truePost")
for row in zip(table.obsPre, table.masterPre, table.truePre, table.obsPost, table.masterPost, table.truePost):
    print("{:6.0f} {:10.0f} {:8.0f} {:8.0f} {:11.0f} {:9.0f}".format(*row))

# the raw counts plus f are what the model sees
data = table.to_dataset()
model = build_model("PairedIndividual", data)
print("\nparameters:", model.dim, "(group:", ", ".join(model.group_names) + ")")

draws = run_chains(model, SamplerConfig(seed=1))
print("acceptance per chain:", np.round(draws.accept_rate, 3), " divergences:", draws.divergences.sum())

summary = summarize(model, draws)
print()
print(render_text(summary))

p = fecr_probs(summary.fecr, 0.95)
print(f"The probability that the reduction is less than 0.95 is {p:.2f}%.")

# the naive estimate from the observed means, for comparison
print("observed-means reduction: {:.3f}".format(1 - table.obsPost.mean() / table.obsPre.mean()))
