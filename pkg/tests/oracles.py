"""Brute-force reference computations used to check the closed forms.

Nothing here calls into the closed-form equilibrium code.
"""

from __future__ import annotations

import math

import numpy as np

from trustdyn.model import ModelParams, proposer_payoff, social_cost


def realized_cheating_vec(s: np.ndarray, theta: float, q: float) -> np.ndarray:
    sstar = q * (theta - 1.0) / (1.0 - q)
    f = theta * q / (q + (1.0 - q) * s)
    return np.where(s <= sstar, 0.0, 0.5 - 0.5 * f)


def scan_fixed_points(theta: float, q: float, n: int = 1_000_000) -> tuple[list[float], np.ndarray]:
    """Locate sign changes of ``realized_cheating(s) - s`` on an ``n``-point grid.

    Returns the midpoints of the bracketing cells and the grid itself. Exact
    zeros at grid points (``s = 0`` when ``theta >= 1``) are reported separately
    by the caller, since they are not sign changes.
    """
    grid = np.linspace(0.0, 1.0, n)
    g = realized_cheating_vec(grid, theta, q) - grid
    sign = np.sign(g)
    idx = np.nonzero((sign[:-1] * sign[1:]) < 0)[0]
    return [0.5 * (grid[i] + grid[i + 1]) for i in idx], grid


def grid_best_offer(s: float, params: ModelParams, n: int = 10_000) -> tuple[float, float]:
    """Maximize proposer payoff over ``n`` offers in ``[0, f(s) + 1)``.

    Returns the maximizing offer and the grid spacing.
    """
    upper = social_cost(s, params) + 1.0
    width = upper / n
    best_x, best_v = 0.0, -math.inf
    for i in range(n):
        x = i * width
        v = proposer_payoff(x, s, params)
        if v > best_v:
            best_x, best_v = x, v
    return best_x, width


def halfway_q_closed_form(theta: float) -> float:
    """Smaller root of ``9 theta q^2 - (9 theta - 3) q + 1 = 0``.

    Setting ``s_u = s_b / 2`` in Vieta's relations for the interior quadratic
    gives ``(1 - 3q)^2 = 9 (theta - 1) q (1 - q)``, which rearranges to this.
    """
    b = 9.0 * theta - 3.0
    disc = b * b - 36.0 * theta
    return 2.0 / (b + math.sqrt(disc))


def random_tripartite(rng: np.random.Generator, theta_range=(1.05, 4.0), lo=0.05, hi=0.95):
    """Draw ``(theta, q)`` with ``q`` a random fraction of the threshold."""
    theta = float(rng.uniform(*theta_range))
    threshold = 1.0 / (4.0 * theta - 1.0 + 4.0 * math.sqrt(theta * (theta - 1.0)))
    q = float(rng.uniform(lo, hi)) * threshold
    return theta, q
