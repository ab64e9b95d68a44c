"""Perception dynamics: common perception and insider/outsider invasion.

A population of insiders (share ``1 - lam``) perceives responsive cheating
``s1``; outsiders (share ``lam``) perceive ``s0``. Proposers offer the best
response to their own perception, receivers react using theirs, and random
matching mixes the four proposer/receiver pairings into realized cheating
``s``. Both perceptions then relax toward ``s``:

    ds1/dt = delta (s - s1),    ds0/dt = delta (s - s0)

The system is integrated with classical fixed-step RK4. The right-hand side
has kinks where the max/min operators switch branch, which rules out
high-order adaptive schemes gaining much here.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import NamedTuple, Optional

from trustdyn.equilibria import EquilibriumSet, Regime, equilibrium_set
from trustdyn.errors import AmbiguousLimitError, DomainError, RegimeError
from trustdyn.model import ModelParams, realized_cheating

__all__ = [
    "LimitLabel",
    "PopulationState",
    "Sample",
    "ClassifiedLimit",
    "IntegratorConfig",
    "Trajectory",
    "realized_mixture",
    "flow",
    "integrate",
    "perception_gap",
    "flow_direction",
    "classify_limit",
    "invasion_state",
    "counter_invasion_state",
]


class LimitLabel(str, enum.Enum):
    GOOD = "Good"
    UNSTABLE = "Unstable"
    BAD = "Bad"
    MAX_TIME_EXCEEDED = "MaxTimeExceeded"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class PopulationState:
    """Insider and outsider perceptions at time ``t``; ``lam`` is the outsider share."""

    t: float
    s1: float
    s0: float
    lam: float

    def __post_init__(self) -> None:
        if not self.t >= 0.0:
            raise DomainError(f"t must be nonnegative, got {self.t!r}")
        for name in ("s1", "s0", "lam"):
            value = getattr(self, name)
            if not (0.0 <= value <= 1.0):
                raise DomainError(f"{name} must lie in [0, 1], got {value!r}")


class Sample(NamedTuple):
    t: float
    s1: float
    s0: float
    s: float


@dataclass(frozen=True)
class ClassifiedLimit:
    label: LimitLabel
    value: float
    residual: float


@dataclass(frozen=True)
class IntegratorConfig:
    """Integration settings.

    ``step`` defaults to ``min(1e-2, 1e-1 / delta)`` and ``t_max`` to
    ``1e3 / delta`` when left as None. Integration stops once
    ``|s - s1| < tol`` and ``|s0 - s1| < tol`` have held for ``n_hold``
    consecutive steps. Every ``stride``-th step is sampled, plus the first and
    last states.
    """

    step: Optional[float] = None
    t_max: Optional[float] = None
    tol: float = 1e-10
    n_hold: int = 10
    stride: int = 10
    classify_tol: float = 1e-6
    flow_tol: float = 1e-10

    def __post_init__(self) -> None:
        if self.step is not None and not self.step > 0:
            raise DomainError(f"step must be positive, got {self.step!r}")
        if self.t_max is not None and not self.t_max > 0:
            raise DomainError(f"t_max must be positive, got {self.t_max!r}")
        if not self.tol > 0:
            raise DomainError(f"tol must be positive, got {self.tol!r}")
        if self.n_hold < 1:
            raise DomainError(f"n_hold must be at least 1, got {self.n_hold!r}")
        if self.stride < 1:
            raise DomainError(f"stride must be at least 1, got {self.stride!r}")

    def resolved_step(self, params: ModelParams) -> float:
        if self.step is not None:
            return self.step
        return min(1e-2, 1e-1 / params.delta)

    def resolved_t_max(self, params: ModelParams) -> float:
        if self.t_max is not None:
            return self.t_max
        return 1e3 / params.delta


@dataclass(frozen=True)
class Trajectory:
    params: ModelParams
    initial: PopulationState
    samples: tuple[Sample, ...]
    terminal: ClassifiedLimit
    converged: bool
    steps: int

    @property
    def final(self) -> Sample:
        return self.samples[-1]


def _mixture(s1: float, s0: float, lam: float, tq: float, q: float, omq: float) -> float:
    # Hot path of the integrator: inputs are trusted, tq = theta*q, omq = 1-q.
    f1 = tq / (q + omq * s1)
    f0 = tq / (q + omq * s0)
    x1 = max(f1, 0.5 + 0.5 * f1)
    x0 = max(f0, 0.5 + 0.5 * f0)
    z11 = min(1.0, max(0.0, x1 - f1))
    z10 = min(1.0, max(0.0, x1 - f0))
    z01 = min(1.0, max(0.0, x0 - f1))
    z00 = min(1.0, max(0.0, x0 - f0))
    mu = 1.0 - lam
    # grouped so that swapping (s1, s0, lam) -> (s0, s1, 1-lam) is bitwise symmetric
    return (mu * mu * z11 + lam * lam * z00) + lam * mu * (z10 + z01)


def realized_mixture(s1: float, s0: float, lam: float, params: ModelParams) -> float:
    """Realized responsive cheating under random matching of insiders and outsiders."""
    for name, value in (("s1", s1), ("s0", s0), ("lam", lam)):
        if not (0.0 <= value <= 1.0):
            raise DomainError(f"{name} must lie in [0, 1], got {value!r}")
    q = params.q
    return _mixture(s1, s0, lam, params.theta * q, q, 1.0 - q)


def flow(state: PopulationState, params: ModelParams) -> tuple[float, float]:
    """Time derivatives ``(ds1/dt, ds0/dt)`` at ``state``."""
    s = realized_mixture(state.s1, state.s0, state.lam, params)
    return params.delta * (s - state.s1), params.delta * (s - state.s0)


def _named_rest_points(eq: EquilibriumSet) -> list[tuple[LimitLabel, float]]:
    # Order matters for coincident points: at the fold s_u == s_b is reported as
    # Bad (stable from above); at theta == 1 s_u == s_g is reported as Good.
    candidates = [
        (LimitLabel.GOOD, eq.s_g),
        (LimitLabel.BAD, eq.s_b),
        (LimitLabel.BAD, eq.s_interior),
        (LimitLabel.UNSTABLE, eq.s_u),
    ]
    named: list[tuple[LimitLabel, float]] = []
    for label, point in candidates:
        if point is not None and all(point != p for _, p in named):
            named.append((label, point))
    return named


def classify_limit(
    terminal: PopulationState,
    params: ModelParams,
    tol: float = 1e-6,
    flow_tol: float = 1e-10,
) -> ClassifiedLimit:
    """Label a (nearly) merged state by its nearest rest point.

    A state farther than ``tol`` from every rest point, or sitting near the
    unstable point while still moving faster than ``flow_tol``, is labeled
    MaxTimeExceeded. With ``theta < 1`` the unique interior equilibrium is
    reported as Bad.

    Raises:
        DomainError: if the perceptions have not merged to within ``tol``.
        AmbiguousLimitError: if two distinct rest points are both within ``tol``.
    """
    s1, s0 = terminal.s1, terminal.s0
    if not abs(s0 - s1) < tol:
        raise DomainError(f"perceptions not merged: |s0 - s1| = {abs(s0 - s1):.3g} >= {tol:g}")
    s = realized_mixture(s1, s0, terminal.lam, params)
    residual = abs(s - s1) + abs(s0 - s1)

    named = _named_rest_points(equilibrium_set(params))
    close = [(label, p) for label, p in named if abs(s1 - p) <= tol]
    if len(close) > 1:
        pts = ", ".join(f"{label}={p:.6g}" for label, p in close)
        raise AmbiguousLimitError(f"s1={s1!r} lies within {tol:g} of several rest points: {pts}")
    if not close:
        return ClassifiedLimit(LimitLabel.MAX_TIME_EXCEEDED, s1, residual)
    label = close[0][0]
    if label is LimitLabel.UNSTABLE and abs(s - s1) >= flow_tol:
        label = LimitLabel.MAX_TIME_EXCEEDED
    return ClassifiedLimit(label, s1, residual)


def integrate(
    initial: PopulationState,
    params: ModelParams,
    config: IntegratorConfig = IntegratorConfig(),
) -> Trajectory:
    """Integrate the invasion system from ``initial`` with fixed-step RK4.

    The terminal classification is MaxTimeExceeded when ``t_max`` is reached
    before the convergence test passes, unless the state is parked on the
    unstable equilibrium with negligible flow.
    """
    h = config.resolved_step(params)
    t_max = config.resolved_t_max(params)
    n_max = max(1, math.ceil(t_max / h - 1e-9))
    tol, n_hold, stride = config.tol, config.n_hold, config.stride

    q = params.q
    tq, omq = params.theta * q, 1.0 - q
    d = params.delta
    lam = initial.lam
    hh = 0.5 * h
    h6 = h / 6.0
    t0 = initial.t

    s1, s0 = initial.s1, initial.s0
    s = _mixture(s1, s0, lam, tq, q, omq)
    samples = [Sample(t0, s1, s0, s)]
    hold = 0
    converged = False
    k = 0
    while k < n_max:
        a1 = d * (s - s1)
        a0 = d * (s - s0)
        u1, u0 = s1 + hh * a1, s0 + hh * a0
        m = _mixture(u1, u0, lam, tq, q, omq)
        b1 = d * (m - u1)
        b0 = d * (m - u0)
        u1, u0 = s1 + hh * b1, s0 + hh * b0
        m = _mixture(u1, u0, lam, tq, q, omq)
        c1 = d * (m - u1)
        c0 = d * (m - u0)
        u1, u0 = s1 + h * c1, s0 + h * c0
        m = _mixture(u1, u0, lam, tq, q, omq)
        e1 = d * (m - u1)
        e0 = d * (m - u0)
        s1 += h6 * (a1 + 2.0 * (b1 + c1) + e1)
        s0 += h6 * (a0 + 2.0 * (b0 + c0) + e0)
        k += 1
        s = _mixture(s1, s0, lam, tq, q, omq)

        if abs(s - s1) < tol and abs(s0 - s1) < tol:
            hold += 1
            if hold >= n_hold:
                converged = True
        else:
            hold = 0
        if converged or k % stride == 0 or k == n_max:
            samples.append(Sample(t0 + k * h, s1, s0, s))
        if converged:
            break

    final = PopulationState(t0 + k * h, _unit(s1), _unit(s0), lam)
    if converged:
        terminal = classify_limit(final, params, config.classify_tol, config.flow_tol)
    elif abs(s0 - s1) < config.classify_tol:
        terminal = classify_limit(final, params, config.classify_tol, config.flow_tol)
        if terminal.label is not LimitLabel.UNSTABLE:
            terminal = ClassifiedLimit(LimitLabel.MAX_TIME_EXCEEDED, terminal.value, terminal.residual)
    else:
        terminal = ClassifiedLimit(LimitLabel.MAX_TIME_EXCEEDED, s1, abs(s - s1) + abs(s0 - s1))
    return Trajectory(params, initial, tuple(samples), terminal, converged, k)


def _unit(x: float) -> float:
    # RK4 roundoff can leave a perception a few ulps outside [0, 1]
    return min(1.0, max(0.0, x))


def perception_gap(trajectory: Trajectory) -> list[tuple[float, float]]:
    """``(t, s0(t) - s1(t))`` for every sample; decays like ``exp(-delta t)``."""
    if not trajectory.samples:
        raise DomainError("trajectory has no samples")
    return [(smp.t, smp.s0 - smp.s1) for smp in trajectory.samples]


def _require_multiple(params: ModelParams) -> EquilibriumSet:
    eq = equilibrium_set(params)
    if eq.regime not in (Regime.TRIPARTITE, Regime.BOUNDARY):
        raise RegimeError(
            f"requires the Tripartite or Boundary regime, got {eq.regime} "
            f"(theta={params.theta!r}, q={params.q!r})"
        )
    return eq


def flow_direction(s_p: float, params: ModelParams) -> int:
    """Sign of the common-perception flow ``realized_cheating(s_p) - s_p``.

    Raises:
        RegimeError: outside the Tripartite and Boundary regimes.
    """
    _require_multiple(params)
    diff = realized_cheating(s_p, params) - s_p
    return (diff > 0) - (diff < 0)


def invasion_state(params: ModelParams, lam: float) -> PopulationState:
    """Insiders at the good equilibrium, a share ``lam`` of outsiders at the bad one."""
    eq = _require_multiple(params)
    return PopulationState(0.0, 0.0, eq.s_b, lam)


def counter_invasion_state(params: ModelParams, lam: float) -> PopulationState:
    """Insiders at the bad equilibrium, a share ``lam`` of outsiders at the good one."""
    eq = _require_multiple(params)
    return PopulationState(0.0, eq.s_b, 0.0, lam)
