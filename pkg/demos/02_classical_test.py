# The classical reduction test, its asymptotic interval and bootstrap intervals.
import numpy as np

from fecr import bootstrap_ci, fecrt_asymptotic_ci, fecrt_point
from fecr.distributions import RngStream
from fecr.errors import UndefinedReductionError

control = np.array([100, 200, 300])
treatment = np.array([10, 20, 30])

# means 200 and 20, so 90% reduction
print("point estimate:", fecrt_point(control, treatment))

r = fecrt_asymptotic_ci(control, treatment)
print("asymptotic 95% CI: ({:.2f}, {:.2f})".format(r.ci_lower_pct, r.ci_upper_pct))

# same numbers by hand: variance of the log ratio is 1/6 and t(0.975, 4) = 2.7764
half = 2.7764 * np.sqrt(1 / 6)
print("by hand:           ({:.2f}, {:.2f})".format(100 * (1 - np.exp(np.log(0.1) + half)),
                                                 100 * (1 - np.exp(np.log(0.1) - half))))

b = bootstrap_ci(control, treatment, B=2000, stream=RngStream(7))
print("bootstrap 95% CI:  ({:.2f}, {:.2f})  B = {}".format(b.ci_lower_pct, b.ci_upper_pct, b.bootstrap_B))

# paired data: resampling whole animals keeps the before/after link
pre = np.array([50, 400, 120, 900, 30, 260])
post = np.array([6, 38, 10, 95, 4, 22])
for paired in (True, False):
    b = bootstrap_ci(pre, post, paired=paired, stream=RngStream(3))
    print("paired" if paired else "unpaired", "resampling: ({:.2f}, {:.2f})".format(b.ci_lower_pct, b.ci_upper_pct))

# when every after-treatment count is zero the asymptotic interval does not exist
try:
    fecrt_asymptotic_ci(control, [0, 0, 0])
except UndefinedReductionError as e:
    print("all-zero treatment:", e)
