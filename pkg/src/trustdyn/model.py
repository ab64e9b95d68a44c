"""Primitive functions of the trust game.

A proposer offers ``x`` to a receiver. A fraction ``q`` of receivers are
scoundrels who always cheat; the rest are responsives, who cheat when their
private cost draw ``z ~ U[0, 1]`` plus the social cost ``f(s)`` is low enough
relative to the offer. The social cost is proportional to the posterior
probability that an observed cheater is a scoundrel, given that a fraction
``s`` of responsives cheat.

Everything here is a pure function of scalar floats.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from trustdyn.errors import DomainError

__all__ = [
    "ModelParams",
    "CostProfile",
    "social_cost",
    "total_cost",
    "cheat_cutoff",
    "s_star",
    "optimal_offer",
    "proposer_payoff",
    "realized_cheating",
]


def _check_unit(name: str, value: float) -> None:
    if not (0.0 <= value <= 1.0):
        raise DomainError(f"{name} must lie in [0, 1], got {value!r}")


@dataclass(frozen=True)
class ModelParams:
    """Primitives of the economy.

    Attributes:
        theta: Weight of the social cost of cheating relative to the private cost.
        q: Proportion of scoundrels among receivers, strictly inside (0, 1).
        delta: Speed at which perceptions adjust toward realized cheating.
    """

    theta: float
    q: float
    delta: float = 1.0

    def __post_init__(self) -> None:
        for name in ("theta", "q", "delta"):
            value = getattr(self, name)
            if not isinstance(value, (int, float)) or not math.isfinite(value):
                raise DomainError(f"{name} must be a finite real, got {value!r}")
        if self.theta <= 0:
            raise DomainError(f"theta must be positive, got {self.theta!r}")
        if not (0.0 < self.q < 1.0):
            raise DomainError(f"q must lie in (0, 1), got {self.q!r}")
        if self.delta <= 0:
            raise DomainError(f"delta must be positive, got {self.delta!r}")

    def with_delta(self, delta: float) -> ModelParams:
        return ModelParams(self.theta, self.q, delta)


@dataclass(frozen=True)
class CostProfile:
    """A responsive's private cost draw ``z`` and the prevailing cheating rate ``s``."""

    z: float
    s: float

    def __post_init__(self) -> None:
        _check_unit("z", self.z)
        _check_unit("s", self.s)


def social_cost(s: float, params: ModelParams) -> float:
    """Social cost of cheating, ``theta * q / (q + (1 - q) s)``."""
    _check_unit("s", s)
    q = params.q
    return params.theta * q / (q + (1.0 - q) * s)


def total_cost(profile: CostProfile, params: ModelParams) -> float:
    return profile.z + social_cost(profile.s, params)


def cheat_cutoff(x: float, s: float, params: ModelParams) -> float:
    """Private-cost cutoff below which a responsive facing offer ``x`` cheats.

    The value is clamped to [0, 1]. The upper clamp never binds in equilibrium
    but does when a generous proposer meets a receiver who expects widespread
    cheating.
    """
    if x < 0:
        raise DomainError(f"offer x must be nonnegative, got {x!r}")
    return min(1.0, max(0.0, x - social_cost(s, params)))


def s_star(params: ModelParams) -> float:
    """Cheating level at which the social cost equals one.

    Below it proposers deter all responsive cheating. Negative when
    ``theta < 1``, in which case proposers always pick the interior offer.
    """
    return params.q * (params.theta - 1.0) / (1.0 - params.q)


def optimal_offer(s_perceived: float, params: ModelParams) -> float:
    """Proposer's best offer given perceived responsive cheating."""
    f = social_cost(s_perceived, params)
    return max(f, 0.5 + 0.5 * f)


def proposer_payoff(x: float, s: float, params: ModelParams) -> float:
    """Expected proposer payoff ``(1 - P[cheat]) * x`` for offer ``x``."""
    zeta = cheat_cutoff(x, s, params)
    return (1.0 - ((1.0 - params.q) * zeta + params.q)) * x


def realized_cheating(s_p: float, params: ModelParams) -> float:
    """Responsive cheating induced when everyone perceives cheating level ``s_p``.

    Proposers best-respond to ``s_p`` and receivers react to the offer under the
    same perception. The result is 0 for ``s_p <= s*`` and ``1/2 - f(s_p)/2``
    otherwise; both branches agree at the seam.
    """
    _check_unit("s_p", s_p)
    if s_p <= s_star(params):
        return 0.0
    # rounding in f just above s* can dip below zero
    return max(0.0, 0.5 - 0.5 * social_cost(s_p, params))
