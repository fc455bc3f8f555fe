"""Synthetic before/after-treatment egg counts from the gamma-Poisson hierarchy."""

import csv
import json
from dataclasses import asdict, dataclass

import numpy as np

from .data import PAIRED, UNPAIRED, make_dataset
from .distributions import RngStream

COLUMNS = ("obsPre", "masterPre", "truePre", "obsPost", "masterPost", "truePost")


@dataclass(frozen=True)
class SimConfig:
    n: int = 15
    pre_mean: float = 500.0
    delta: float = 0.1
    kappa: float = 1.0
    f: float = 15.0
    paired: bool = True
    phi: float = 0.0
    seed: int = 1

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be a positive integer")
        for name in ("pre_mean", "kappa", "f"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.f < 1:
            raise ValueError("f must be >= 1 so that 1/f is a subsampling probability")
        if not self.delta >= 0:
            raise ValueError("delta must be non-negative")
        if not 0.0 <= self.phi <= 1.0:
            raise ValueError("phi must lie in [0, 1]")


@dataclass(frozen=True, eq=False)
class SimTable:
    """Six columns per animal, mirroring obs = master * f and master <= true."""

    config: SimConfig
    obsPre: np.ndarray
    masterPre: np.ndarray
    truePre: np.ndarray
    obsPost: np.ndarray
    masterPost: np.ndarray
    truePost: np.ndarray

    def column(self, name):
        return getattr(self, name)

    def __eq__(self, other):
        return isinstance(other, SimTable) and all(
            np.array_equal(self.column(c), other.column(c)) for c in COLUMNS
        )

    def to_dataset(self):
        c = self.config
        return make_dataset(self.masterPre, self.masterPost, f_pre=c.f,
                            design=PAIRED if c.paired else UNPAIRED)

    def to_csv(self, path):
        """Write the table with the config as a ``#`` JSON comment line."""
        with open(path, "w", newline="", encoding="utf-8") as fh:
            fh.write("# " + json.dumps(asdict(self.config)) + "\n")
            w = csv.writer(fh)
            w.writerow(COLUMNS)
            for row in zip(*(self.column(c) for c in COLUMNS)):
                w.writerow([_fmt(v) for v in row])


def _fmt(v):
    v = float(v)
    return str(int(v)) if v.is_integer() else repr(v)


def simulate(config, stream=None):
    """Draw one table.

    Each animal is unexposed with probability ``phi`` (true counts 0 before
    and after); otherwise its mean is Gamma(kappa, kappa/pre_mean), the true
    counts are Poisson(mean) and Poisson(delta * mean) (a fresh mean for
    the after-treatment animal when unpaired), and the counted eggs are a
    Binomial(true, 1/f) subsample.
    """
    if stream is None:
        stream = RngStream(config.seed)
    n, rate = config.n, config.kappa / config.pre_mean
    exposed = stream.uniform(size=n) >= config.phi if config.phi > 0 else np.ones(n, dtype=bool)
    mu_pre = stream.gamma(config.kappa, rate, size=n)
    mu_post = mu_pre if config.paired else stream.gamma(config.kappa, rate, size=n)
    if not config.paired and config.phi > 0:
        exposed_post = stream.uniform(size=n) >= config.phi
    else:
        exposed_post = exposed
    true_pre = np.where(exposed, stream.poisson(mu_pre), 0)
    true_post = np.where(exposed_post, stream.poisson(config.delta * mu_post), 0)
    p = 1.0 / config.f
    master_pre = stream.binomial(true_pre, p)
    master_post = stream.binomial(true_post, p)
    return SimTable(
        config,
        obsPre=master_pre * config.f,
        masterPre=master_pre,
        truePre=true_pre,
        obsPost=master_post * config.f,
        masterPost=master_post,
        truePost=true_post,
    )
