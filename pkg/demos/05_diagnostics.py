# Convergence checks, warnings and exporting draws for plotting.
import csv

import numpy as np

from fecr import SamplerConfig, build_model, make_dataset, run_chains, split_rhat, summarize
from fecr.posterior import draws_table, empirical_quantiles

rng = np.random.default_rng(0)

# split R-hat on made-up chains
print("iid chains:      R-hat {:.3f}".format(split_rhat(rng.normal(size=(2, 1000)))))
print("separated means: R-hat {:.3f}".format(split_rhat(rng.normal(size=(2, 1000)) + [[0.0], [10.0]])))
trend = np.linspace(0, 3, 1000) + rng.normal(size=(2, 1000))
print("drifting chains: R-hat {:.3f}  (halving each chain catches the trend)".format(split_rhat(trend)))

# quantiles interpolate between order statistics
print("quantiles of 1..11:", empirical_quantiles(np.arange(1.0, 12.0)))

# five animals only: the report carries a small-sample note
data = make_dataset([40, 31, 25, 52, 36], [3, 2, 0, 4, 3], f_pre=15)
model = build_model("PairedSimple", data)
draws = run_chains(model, SamplerConfig(nsamples=1000, nburnin=500, seed=3))
s = summarize(model, draws)
print("\nmax R-hat {:.3f}, divergences {}".format(max(s.rhat.values()), s.divergences))
for w in s.warnings:
    print("warning:", w)

# 40 iterations is far too short: the report says so
small_run = build_model("PairedBaseline", make_dataset(
    [40, 31, 25, 52, 36, 44, 21, 38, 28, 33, 47], [3, 2, 0, 4, 3, 3, 1, 2, 0, 2, 5], f_pre=15))
short = summarize(small_run, run_chains(small_run, SamplerConfig(nsamples=40, nburnin=20, seed=4)))
print("\n40 iterations: max R-hat {:.2f}".format(max(short.rhat.values())))
for w in short.warnings:
    print("warning:", w)

# one CSV row per retained draw, ready for trace or density plots elsewhere
header, rows = draws_table(model, draws)
with open("draws.csv", "w", newline="") as fh:
    w = csv.writer(fh)
    w.writerow(header)
    w.writerows(rows)
print("\nwrote draws.csv with columns:", ", ".join(header))
