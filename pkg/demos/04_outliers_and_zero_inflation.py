# Outlier weighting and zero inflation on awkward data.
import numpy as np

from fecr import SamplerConfig, build_model, make_dataset, run_chains, summarize
from fecr.models import outlier_weights_paired, outlier_weights_unpaired

# one animal's count went up after treatment
pre = np.array([40, 31, 25, 52, 36, 44, 21, 38, 28, 33])
post = np.array([3, 2, 0, 4, 60, 3, 1, 2, 0, 2])
w, flags = outlier_weights_paired(pre * 15, post * 15)
print("paired weights:", np.round(w, 3))

# unpaired: counts far above the trimmed upper fence get small weights
w, flags = outlier_weights_unpaired(np.array([0, 2, 3, 1, 4, 2, 40, 3]))
print("unpaired weights:", np.round(w, 3), "flagged:", np.flatnonzero(flags))

data = make_dataset(pre, post, f_pre=15)
config = SamplerConfig(nsamples=1500, nburnin=750, seed=2)
for kind in ("PairedBaseline", "PairedOutlier"):
    model = build_model(kind, data)
    s = summarize(model, run_chains(model, config))
    r = s.row("FECR")
    print("{:<15} FECR {:.3f}  95% CI ({:.3f}, {:.3f})".format(kind, r["mean"], r["2.5%"], r["97.5%"]))

# a flock where some animals were never exposed: zeros before and after
pre = np.array([0, 0, 0, 35, 50, 0, 27, 61, 44, 0, 38, 29])
post = np.array([0, 0, 0, 4, 5, 0, 2, 6, 5, 0, 3, 3])
data = make_dataset(pre, post, f_pre=15)
for kind in ("PairedBaseline", "PairedZI"):
    model = build_model(kind, data)
    s = summarize(model, run_chains(model, config))
    r = s.row("FECR")
    extra = "  phi {:.2f}".format(s.row("phi")["mean"]) if kind == "PairedZI" else ""
    print("{:<15} FECR {:.3f}  95% CI ({:.3f}, {:.3f}){}".format(kind, r["mean"], r["2.5%"], r["97.5%"], extra))
