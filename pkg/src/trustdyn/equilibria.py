"""Closed-form equilibria, the scoundrel threshold and basin boundaries.

With ``theta > 1`` the no-cheating (good) equilibrium ``s_g = 0`` always
exists. Interior equilibria solve ``f(s) = 1 - 2s``, a quadratic in ``s``:

    2(1 - q) s^2 - (1 - 3q) s + q(theta - 1) = 0

Its two roots are the unstable equilibrium ``s_u`` and the bad equilibrium
``s_b``; they exist while ``q`` stays below the threshold ``q_hat(theta)``
and merge at it.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Optional

from trustdyn.errors import DomainError
from trustdyn.model import ModelParams, optimal_offer, s_star

__all__ = [
    "BOUNDARY_TOL",
    "DISCRIMINANT_TOL",
    "Regime",
    "EquilibriumSet",
    "q_hat",
    "interior_roots",
    "unique_interior_root",
    "equilibrium_set",
    "total_cheating",
    "basin_boundary",
    "equilibrium_offers",
]

BOUNDARY_TOL = 1e-12
DISCRIMINANT_TOL = 1e-14


class Regime(str, enum.Enum):
    UNIQUE_INTERIOR = "UniqueInterior"
    GOOD_ONLY = "GoodOnly"
    BOUNDARY = "Boundary"
    TRIPARTITE = "Tripartite"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class EquilibriumSet:
    """All rest points of the common-perception dynamic for one parameter set.

    ``s_g`` is None when ``theta < 1``; ``q_hat`` is None there as well since the
    threshold is only defined for ``theta >= 1``. ``warnings`` carries notes on
    degenerate parameter values (currently only ``theta == 1``).
    """

    regime: Regime
    s_star: float
    q_hat: Optional[float]
    s_g: Optional[float] = None
    s_u: Optional[float] = None
    s_b: Optional[float] = None
    s_interior: Optional[float] = None
    warnings: tuple[str, ...] = field(default=())

    def rest_points(self) -> tuple[float, ...]:
        """Distinct rest points in increasing order."""
        pts = [p for p in (self.s_g, self.s_u, self.s_b, self.s_interior) if p is not None]
        return tuple(sorted(set(pts)))


def q_hat(theta: float) -> float:
    """Largest scoundrel share for which the bad and unstable equilibria exist.

    Evaluated as ``1 / (4 theta - 1 + 4 sqrt(theta (theta - 1)))``, which is the
    smaller root of the discriminant written without cancellation.
    """
    if not theta >= 1.0:
        raise DomainError(f"q_hat requires theta >= 1, got {theta!r}")
    return 1.0 / (4.0 * theta - 1.0 + 4.0 * math.sqrt(theta * (theta - 1.0)))


def _discriminant(theta: float, q: float) -> float:
    return (q + 1.0) ** 2 - 8.0 * theta * q * (1.0 - q)


def interior_roots(params: ModelParams) -> Optional[tuple[float, float]]:
    """Return ``(s_u, s_b)``, or None when ``q`` exceeds ``q_hat(theta)``.

    Within ``BOUNDARY_TOL`` of the threshold the discriminant is taken to be zero
    and the two roots coincide.

    Raises:
        DomainError: if ``theta <= 1``.
    """
    theta, q = params.theta, params.q
    if theta <= 1.0:
        raise DomainError(f"interior_roots requires theta > 1, got {theta!r}")
    threshold = q_hat(theta)
    if q - threshold > BOUNDARY_TOL:
        return None
    b = 1.0 - 3.0 * q
    if abs(q - threshold) <= BOUNDARY_TOL:
        s = b / (4.0 * (1.0 - q))
        return s, s
    disc = _discriminant(theta, q)
    if disc < 0.0:
        if disc < -DISCRIMINANT_TOL:
            return None
        disc = 0.0
    root = math.sqrt(disc)
    s_b = (b + root) / (4.0 * (1.0 - q))
    # product of roots is q(theta-1) / (2(1-q)); avoids cancellation for small q
    s_u = 2.0 * q * (theta - 1.0) / (b + root)
    return s_u, s_b


def unique_interior_root(params: ModelParams) -> float:
    """The single positive equilibrium when ``theta < 1``.

    Raises:
        DomainError: if ``theta >= 1``.
    """
    theta, q = params.theta, params.q
    if theta >= 1.0:
        raise DomainError(f"unique_interior_root requires theta < 1, got {theta!r}")
    a = 2.0 * (1.0 - q)
    b = 1.0 - 3.0 * q
    c = q * (theta - 1.0)  # negative, so the roots straddle zero
    root = math.sqrt(b * b - 4.0 * a * c)
    if b >= 0.0:
        return (b + root) / (2.0 * a)
    return 2.0 * c / (b - root)


def equilibrium_set(params: ModelParams) -> EquilibriumSet:
    theta, q = params.theta, params.q
    sstar = s_star(params)
    if theta < 1.0:
        return EquilibriumSet(
            regime=Regime.UNIQUE_INTERIOR,
            s_star=sstar,
            q_hat=None,
            s_interior=unique_interior_root(params),
        )

    threshold = q_hat(theta)
    warnings: tuple[str, ...] = ()
    if theta == 1.0:
        warnings = ("theta = 1 lies on the border between the unique-equilibrium "
                    "case (theta < 1) and the multiple-equilibria case (theta > 1)",)

    if abs(q - threshold) <= BOUNDARY_TOL:
        s = (1.0 - 3.0 * q) / (4.0 * (1.0 - q))
        return EquilibriumSet(Regime.BOUNDARY, sstar, threshold, s_g=0.0, s_u=s, s_b=s,
                              warnings=warnings)
    if q > threshold:
        return EquilibriumSet(Regime.GOOD_ONLY, sstar, threshold, s_g=0.0, warnings=warnings)

    if theta == 1.0:
        # c = 0: the smaller root collapses onto the good equilibrium
        s_u, s_b = 0.0, (1.0 - 3.0 * q) / (2.0 * (1.0 - q))
        warnings += ("unstable equilibrium coincides with the good equilibrium at theta = 1",)
    else:
        roots = interior_roots(params)
        assert roots is not None
        s_u, s_b = roots
    return EquilibriumSet(Regime.TRIPARTITE, sstar, threshold, s_g=0.0, s_u=s_u, s_b=s_b,
                          warnings=warnings)


def total_cheating(params: ModelParams, s_resp: float) -> float:
    """Overall incidence of cheating, scoundrels included."""
    if not (0.0 <= s_resp <= 1.0):
        raise DomainError(f"s_resp must lie in [0, 1], got {s_resp!r}")
    return params.q + (1.0 - params.q) * s_resp


def basin_boundary(params: ModelParams) -> Optional[float]:
    """Boundary ``s_u`` between the good basin ``[0, s_u)`` and the bad basin ``(s_u, 1]``."""
    eq = equilibrium_set(params)
    if eq.regime in (Regime.TRIPARTITE, Regime.BOUNDARY):
        return eq.s_u
    return None


def equilibrium_offers(eq: EquilibriumSet, params: ModelParams) -> dict[str, float]:
    """Proposer offers at each rest point present in ``eq``, keyed by rest-point name."""
    offers = {}
    for name in ("s_g", "s_u", "s_b", "s_interior"):
        value = getattr(eq, name)
        if value is not None:
            offers[name] = optimal_offer(value, params)
    return offers
