"""Prior hyperparameters from expert statements.

Two quantile statements ``P(X <= Q1) = p1`` and ``P(X <= Q2) = p2`` fix a
gamma prior for the pre-treatment mean or a beta prior for the remaining
proportion. A beta prior can also be given by its mode and concentration.
"""

import itertools

import numpy as np

from .distributions import beta_cdf, gamma_cdf
from .errors import DomainError, ElicitationError

FAMILIES = {"gamma": "mu", "beta": "delta"}
GRID = (0.5, 1.0, 2.0, 5.0, 10.0, 50.0)
TOL = 1e-12
ACCEPT = 1e-8


def _check_statements(family, q1, q2):
    if family not in FAMILIES:
        raise ValueError(f"family must be gamma or beta, got {family!r}")
    (p1, Q1), (p2, Q2) = q1, q2
    if not (0.0 < p1 < 1.0 and 0.0 < p2 < 1.0):
        raise ElicitationError(f"probabilities must lie in (0, 1), got {p1} and {p2}")
    if not p1 < p2:
        raise ElicitationError(f"probabilities must increase, got {p1} then {p2}")
    if not Q1 < Q2:
        raise ElicitationError(f"quantiles must increase with probability, got {Q1} then {Q2}")
    if family == "beta" and not (0.0 < Q1 and Q2 < 1.0):
        raise ElicitationError("beta quantiles must lie in (0, 1)")
    if family == "gamma" and not Q1 > 0:
        raise ElicitationError("gamma quantiles must be positive")


def _newton(resid, u, max_iter=100):
    """Damped Newton on r(u) = 0 with a central-difference Jacobian."""
    r = resid(u)
    if not np.all(np.isfinite(r)):
        return u, r
    for _ in range(max_iter):
        if np.max(np.abs(r)) < TOL:
            break
        J = np.empty((2, 2))
        for j in range(2):
            h = 1e-6 * max(1.0, abs(u[j]))
            e = np.zeros(2)
            e[j] = h
            J[:, j] = (resid(u + e) - resid(u - e)) / (2.0 * h)
        try:
            step = np.linalg.solve(J, -r)
        except np.linalg.LinAlgError:
            break
        if not np.all(np.isfinite(step)):
            break
        # keep each move modest in log space, then backtrack on |r|
        step *= min(1.0, 2.0 / np.max(np.abs(step)))
        norm = np.linalg.norm(r)
        t = 1.0
        while t > 1e-6:
            cand = u + t * step
            rc = resid(cand)
            if np.all(np.isfinite(rc)) and np.linalg.norm(rc) < norm:
                u, r = cand, rc
                break
            t *= 0.5
        else:
            break
    return u, r


def solve_from_quantiles(family, q1, q2, all_starts=False):
    """Hyperparameters ``(theta1, theta2)`` matching two quantile statements.

    ``q1`` and ``q2`` are ``(probability, quantile)`` pairs. For ``gamma`` the
    result is ``(shape, rate)``; for ``beta`` it is ``(a, b)``. The solve works
    on ``(log theta1, log theta2)`` with residuals ``F(Q) - p``. Gamma
    quantiles are first divided by ``sqrt(Q1 * Q2)`` so that the start grid
    is on a sensible scale; the rate is rescaled back afterwards.

    With ``all_starts=True`` the list of every converged solution is returned
    instead (used to check uniqueness).
    """
    _check_statements(family, q1, q2)
    (p1, Q1), (p2, Q2) = q1, q2
    p = np.array([p1, p2])
    if family == "gamma":
        scale = np.sqrt(Q1 * Q2)
        Q = np.array([Q1, Q2]) / scale
        cdf = gamma_cdf
    else:
        scale = 1.0
        Q = np.array([Q1, Q2])
        cdf = beta_cdf

    def resid(u):
        if np.any(np.abs(u) > 40):
            return np.full(2, np.nan)
        a, b = np.exp(u)
        return np.asarray(cdf(Q, a, b), dtype=float) - p

    starts = [np.log([a, b]) for a, b in itertools.product(GRID, GRID)]
    # most promising starts first
    order = np.argsort([np.linalg.norm(resid(s)) for s in starts], kind="stable")

    best_err, found = np.inf, []
    for i in order:
        u, r = _newton(resid, starts[i])
        err = float(np.max(np.abs(r))) if np.all(np.isfinite(r)) else np.inf
        best_err = min(best_err, err)
        if err < ACCEPT:
            found.append(_unscale(family, u, scale))
            if not all_starts:
                break
    if best_err >= ACCEPT:
        raise ElicitationError(
            f"no {family} distribution matches P(X <= {Q1:g}) = {p1:g} and P(X <= {Q2:g}) = {p2:g}; "
            f"smallest CDF residual after {len(starts)} starts was {best_err:.3g}"
        )
    return found if all_starts else found[0]


def _unscale(family, u, scale):
    a, b = np.exp(u)
    return (float(a), float(b / scale)) if family == "gamma" else (float(a), float(b))


def beta_from_mode_concentration(omega, k):
    """Beta shapes with mode ``omega`` and concentration ``a + b = k``.

    a = omega (k - 2) + 1 and b = k - a, equivalently (1 - omega)(k - 2) + 1.
    """
    if not 0.0 < omega < 1.0:
        raise DomainError(f"mode must lie strictly inside (0, 1), got {omega}")
    if not k > 2.0:
        raise DomainError(f"concentration must exceed 2, got {k}")
    a = omega * (k - 2.0) + 1.0
    return float(a), float(k - a)


def prior_snippet(family, params):
    """A prior override string accepted by ``fit --prior``."""
    a, b = params
    return f"{FAMILIES[family]}={family}({a!r},{b!r})"
