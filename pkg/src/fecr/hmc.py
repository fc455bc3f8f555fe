"""Multi-chain Hamiltonian Monte Carlo with warmup adaptation.

Each iteration draws a momentum, integrates a leapfrog trajectory whose
number of steps is uniform on ``[1, L]`` and applies a Metropolis
correction. During warmup the step size is tuned by dual averaging toward
``adapt_delta`` and a diagonal inverse mass matrix is estimated in doubling
windows; ``L`` is chosen so that the mean trajectory length is about 1.6
times the largest posterior scale in mass-normalised coordinates.

A target is any object providing ``dim``, ``param_names``,
``log_density(theta) -> (value, gradient)``, ``initial_values(stream)`` and
``constrain(theta)``; :class:`fecr.models.Model` is one.
"""

import math
from collections import namedtuple
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np

from .distributions import RngStream
from .errors import InitializationError

__all__ = [
    "SamplerConfig",
    "PosteriorDraws",
    "GaussianTarget",
    "Trajectory",
    "run_chains",
    "leapfrog_trajectory",
    "detect_divergence",
    "DualAveraging",
    "warmup_windows",
]

DIVERGENCE_THRESHOLD = 1000.0
TRAJECTORY_SCALE = 1.6
MAX_INIT_ATTEMPTS = 100


@dataclass(frozen=True)
class SamplerConfig:
    """Sampler settings.

    ``nsamples`` counts all iterations per chain including the ``nburnin``
    warmup iterations, so each chain keeps ``(nsamples - nburnin) // thinning``
    draws.
    """

    nsamples: int = 2000
    nburnin: int = 1000
    thinning: int = 1
    nchain: int = 2
    nworkers: int = 1
    adapt_delta: float = 0.8
    max_leapfrog: int = 1024
    seed: int = 1

    def __post_init__(self):
        if self.nsamples < 1 or self.nburnin < 0:
            raise ValueError("nsamples must be >= 1 and nburnin >= 0")
        if not self.nburnin < self.nsamples:
            raise ValueError(f"nburnin ({self.nburnin}) must be smaller than nsamples ({self.nsamples})")
        if self.thinning < 1 or self.nchain < 1 or self.nworkers < 1 or self.max_leapfrog < 1:
            raise ValueError("thinning, nchain, nworkers and max_leapfrog must be positive")
        if not 0.6 < self.adapt_delta < 1.0:
            raise ValueError(f"adapt_delta must lie in (0.6, 1), got {self.adapt_delta}")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")

    @property
    def retained(self):
        return (self.nsamples - self.nburnin) // self.thinning

    def to_dict(self):
        return asdict(self)


@dataclass(eq=False)
class PosteriorDraws:
    """Constrained draws of shape ``(nchain, ndraws, nparams)`` plus chain statistics."""

    names: list
    draws: np.ndarray
    divergences: np.ndarray
    step_size: np.ndarray
    accept_rate: np.ndarray
    mean_leapfrog: np.ndarray
    inv_mass: np.ndarray
    config: SamplerConfig

    @property
    def nchain(self):
        return self.draws.shape[0]

    @property
    def ndraws(self):
        return self.draws.shape[1]

    def __getitem__(self, name):
        """Draws of one parameter as ``(nchain, ndraws)``."""
        return self.draws[:, :, self.names.index(name)]

    def pooled(self, name):
        return self[name].reshape(-1)


Trajectory = namedtuple("Trajectory", "theta momentum log_density grad energy_error divergent n_steps")


class GaussianTarget:
    """Independent normal target with given means and scales (calibration aid)."""

    def __init__(self, mean, sd):
        self.mean = np.atleast_1d(np.asarray(mean, dtype=float))
        self.sd = np.broadcast_to(np.asarray(sd, dtype=float), self.mean.shape).copy()
        self.dim = self.mean.size
        self.param_names = [f"x[{i}]" for i in range(self.dim)]

    def log_density(self, theta):
        z = (theta - self.mean) / self.sd
        return -0.5 * float(z @ z), -z / self.sd

    def initial_values(self, stream):
        return self.mean + stream.uniform(-2.0, 2.0, size=self.dim) * self.sd

    def constrain(self, theta):
        return np.asarray(theta, dtype=float)


# ---------------------------------------------------------------------------
# integrator


def detect_divergence(energy_error):
    return not np.isfinite(energy_error) or energy_error > DIVERGENCE_THRESHOLD


def _kinetic(momentum, inv_mass):
    return 0.5 * float(np.sum(momentum * momentum * inv_mass))


def leapfrog_trajectory(target, theta, momentum, step_size, n_steps, inv_mass=None,
                        log_density=None, grad=None):
    """Integrate ``n_steps`` leapfrog steps from ``(theta, momentum)``.

    ``energy_error`` is H(end) - H(start) with H = -log_density + kinetic
    energy. A non-finite value anywhere stops the trajectory and marks it
    divergent.
    """
    theta = np.array(theta, dtype=float)
    p = np.array(momentum, dtype=float)
    inv_mass = np.ones_like(theta) if inv_mass is None else inv_mass
    if log_density is None or grad is None:
        log_density, grad = target.log_density(theta)
    h0 = -log_density + _kinetic(p, inv_mass)
    for step in range(1, n_steps + 1):
        p = p + 0.5 * step_size * grad
        theta = theta + step_size * inv_mass * p
        log_density, grad = target.log_density(theta)
        if not np.isfinite(log_density):
            return Trajectory(theta, p, log_density, grad, np.inf, True, step)
        p = p + 0.5 * step_size * grad
    energy_error = -log_density + _kinetic(p, inv_mass) - h0
    return Trajectory(theta, p, log_density, grad, energy_error, detect_divergence(energy_error), n_steps)


# ---------------------------------------------------------------------------
# adaptation


class DualAveraging:
    """Nesterov dual averaging of log step size toward a target acceptance."""

    def __init__(self, step_size, target, gamma=0.2, t0=10.0, kappa=0.75):
        self.target = target
        self.gamma, self.t0, self.kappa = gamma, t0, kappa
        self.restart(step_size)

    def restart(self, step_size):
        # shrinkage point a little above the current step; a 10x anchor
        # leaves short terminal windows averaging over far too large steps
        self.mu = math.log(2.0 * step_size)
        self.log_step = math.log(step_size)
        self.log_step_bar = 0.0
        self.h_bar = 0.0
        self.t = 0

    def update(self, accept_prob):
        self.t += 1
        eta = 1.0 / (self.t + self.t0)
        self.h_bar = (1.0 - eta) * self.h_bar + eta * (self.target - accept_prob)
        self.log_step = self.mu - math.sqrt(self.t) / self.gamma * self.h_bar
        w = self.t ** (-self.kappa)
        self.log_step_bar = w * self.log_step + (1.0 - w) * self.log_step_bar
        return math.exp(self.log_step)

    @property
    def final_step_size(self):
        return math.exp(self.log_step_bar)


def warmup_windows(nburnin):
    """Iteration indices (exclusive ends) at which mass-matrix windows close.

    The first 15% of warmup tunes step size only, the last 10% polishes the
    step size under the final metric, and the middle 75% is split into
    windows that double in length, the last one absorbing the remainder.
    """
    init = int(0.15 * nburnin)
    term = int(0.10 * nburnin)
    slow = nburnin - init - term
    if nburnin < 20 or slow < 10:
        return []
    base = max(5, min(25, slow // 15))
    ends, start, size = [], init, base
    end_slow = init + slow
    while start < end_slow:
        end = start + size
        if end + 2 * size > end_slow:
            end = end_slow
        ends.append(end)
        start, size = end, 2 * size
    return ends


def _window_metric(samples):
    n = samples.shape[0]
    var = samples.var(axis=0, ddof=1)
    var = (n / (n + 5.0)) * var + 1e-3 * (5.0 / (n + 5.0))
    # largest posterior scale once coordinates are divided by sqrt(var)
    z = (samples - samples.mean(axis=0)) / np.sqrt(var)
    top = float(np.linalg.eigvalsh(np.atleast_2d(np.cov(z, rowvar=False)))[-1]) if samples.shape[1] > 1 else float(z.var(ddof=1))
    scale = min(max(math.sqrt(max(top, 0.0)), 1.0), 5.0)
    return var, scale


# ---------------------------------------------------------------------------
# chains


def _initialise(target, stream):
    for _ in range(MAX_INIT_ATTEMPTS):
        theta = np.asarray(target.initial_values(stream), dtype=float)
        logp, grad = target.log_density(theta)
        if np.isfinite(logp) and np.all(np.isfinite(grad)):
            return theta, logp, grad
    raise InitializationError(
        f"no finite log density after {MAX_INIT_ATTEMPTS} initialisation attempts"
    )


def _accept_prob(traj):
    if traj.divergent:
        return 0.0
    return 1.0 if traj.energy_error <= 0 else math.exp(-traj.energy_error)


def _find_step_size(target, stream, theta, logp, grad, inv_mass, step_size=1.0):
    """Double or halve the step until one-step acceptance crosses 0.5."""
    def one_step(eps):
        p = stream.normal(size=theta.size) / np.sqrt(inv_mass)
        traj = leapfrog_trajectory(target, theta, p, eps, 1, inv_mass, logp, grad)
        return _accept_prob(traj)

    direction = 1.0 if one_step(step_size) > 0.5 else -1.0
    for _ in range(60):
        nxt = step_size * (2.0 ** direction)
        a = one_step(nxt)
        if (direction > 0 and not a > 0.5) or (direction < 0 and a > 0.5):
            return nxt if direction < 0 else step_size
        step_size = nxt
    return step_size


def _run_chain(target, config, chain):
    stream = RngStream(config.seed, chain)
    theta, logp, grad = _initialise(target, stream)
    dim = theta.size
    inv_mass = np.ones(dim)
    scale = 1.0
    step = _find_step_size(target, stream, theta, logp, grad, inv_mass)
    adapter = DualAveraging(step, config.adapt_delta)
    windows = warmup_windows(config.nburnin)
    window_start = int(0.15 * config.nburnin)
    window_buf = []

    n_keep = config.retained
    out = np.empty((n_keep, len(target.param_names)))
    kept = divergences = 0
    accept_sum = steps_sum = 0.0

    for it in range(config.nsamples):
        warm = it < config.nburnin
        max_steps = min(config.max_leapfrog, max(1, math.ceil(2.0 * TRAJECTORY_SCALE * scale / step)))
        n_steps = int(stream.integers(1, max_steps))
        momentum = stream.normal(size=dim) / np.sqrt(inv_mass)
        traj = leapfrog_trajectory(target, theta, momentum, step, n_steps, inv_mass, logp, grad)
        a = _accept_prob(traj)
        if stream.uniform() < a:
            theta, logp, grad = traj.theta, traj.log_density, traj.grad

        if warm:
            step = adapter.update(a)
            if windows and window_start <= it < windows[-1]:
                window_buf.append(theta)
                if it + 1 in windows:
                    inv_mass, scale = _window_metric(np.array(window_buf))
                    window_buf = []
                    step = _find_step_size(target, stream, theta, logp, grad, inv_mass, step)
                    adapter.restart(step)
            if it + 1 == config.nburnin:
                step = adapter.final_step_size
        else:
            divergences += traj.divergent
            accept_sum += a
            steps_sum += traj.n_steps
            j = it - config.nburnin
            if (j + 1) % config.thinning == 0 and kept < n_keep:
                out[kept] = target.constrain(theta)
                kept += 1

    n_post = config.nsamples - config.nburnin
    return {
        "draws": out,
        "divergences": divergences,
        "step_size": step,
        "accept_rate": accept_sum / n_post,
        "mean_leapfrog": steps_sum / n_post,
        "inv_mass": inv_mass,
    }


def run_chains(target, config=None):
    """Run ``config.nchain`` independent chains and collect constrained draws.

    Chain ``c`` uses the random stream ``(config.seed, c)``, so results do not
    depend on ``nworkers``.
    """
    config = config or SamplerConfig()
    chains = range(config.nchain)
    if config.nworkers > 1 and config.nchain > 1:
        with ProcessPoolExecutor(max_workers=min(config.nworkers, config.nchain)) as pool:
            results = list(pool.map(_run_chain, [target] * config.nchain, [config] * config.nchain, chains))
    else:
        results = [_run_chain(target, config, c) for c in chains]
    return PosteriorDraws(
        names=list(target.param_names),
        draws=np.stack([r["draws"] for r in results]),
        divergences=np.array([r["divergences"] for r in results]),
        step_size=np.array([r["step_size"] for r in results]),
        accept_rate=np.array([r["accept_rate"] for r in results]),
        mean_leapfrog=np.array([r["mean_leapfrog"] for r in results]),
        inv_mass=np.stack([r["inv_mass"] for r in results]),
        config=config,
    )
