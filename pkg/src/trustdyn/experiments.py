"""Numerical experiments on invasion robustness.

* ``lambda_star``: smallest outsider share that tips a good-equilibrium
  population into the bad equilibrium, found by bisection with a simulation
  verdict as the oracle. Verdicts are monotone in the share, so bisection is
  sound.
* ``halfway_q``: the scoundrel share placing the unstable equilibrium midway
  between the good and bad ones.
* Sweeps over ``q`` or ``theta`` producing flat records for CSV/JSON output.
"""

from __future__ import annotations

import dataclasses
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

from trustdyn.dynamics import (
    IntegratorConfig,
    LimitLabel,
    Trajectory,
    integrate,
    invasion_state,
)
from trustdyn.equilibria import (
    Regime,
    equilibrium_set,
    interior_roots,
    q_hat,
    total_cheating,
)
from trustdyn.errors import ConvergenceError, DomainError, RegimeError, TrustDynError
from trustdyn.model import ModelParams

__all__ = [
    "LambdaStarResult",
    "SweepRecord",
    "probe_invasion",
    "lambda_star",
    "counter_invasion_threshold",
    "halfway_q",
    "sweep_total_cheating",
    "sweep_lambda_star",
]

log = logging.getLogger(__name__)

HALFWAY_INSET = 1e-9
RETRY_FACTOR = 10.0


@dataclass(frozen=True)
class LambdaStarResult:
    """Outcome of a ``lambda_star`` search.

    ``lambda_star`` is None when even an invasion of size 1/2 is assimilated.
    ``verdicts`` maps every probed share to its terminal label, in probe order.
    """

    params: ModelParams
    lambda_star: Optional[float]
    bracket: tuple[float, float]
    verdicts: dict[float, LimitLabel]

    def is_monotone(self) -> bool:
        """True when no probed share labeled Good exceeds one labeled Bad."""
        goods = [lam for lam, v in self.verdicts.items() if v is LimitLabel.GOOD]
        bads = [lam for lam, v in self.verdicts.items() if v is LimitLabel.BAD]
        return not goods or not bads or max(goods) < min(bads)


@dataclass(frozen=True)
class SweepRecord:
    theta: float
    q: float
    lam: Optional[float] = None
    outputs: dict[str, Optional[float]] = field(default_factory=dict)
    label: Optional[str] = None
    flag: Optional[str] = None


def probe_invasion(
    params: ModelParams, lam: float, config: IntegratorConfig = IntegratorConfig()
) -> Trajectory:
    """Integrate the canonical invasion, retrying once with a longer horizon.

    Raises:
        ConvergenceError: if the retry also runs out of time.
    """
    trajectory = integrate(invasion_state(params, lam), params, config)
    if trajectory.terminal.label is not LimitLabel.MAX_TIME_EXCEEDED:
        return trajectory
    t_max = config.resolved_t_max(params) * RETRY_FACTOR
    log.info("probe lam=%r hit t_max; retrying with t_max=%g", lam, t_max)
    trajectory = integrate(invasion_state(params, lam), params,
                           dataclasses.replace(config, t_max=t_max))
    if trajectory.terminal.label is LimitLabel.MAX_TIME_EXCEEDED:
        raise ConvergenceError(
            f"invasion probe lam={lam!r} (theta={params.theta!r}, q={params.q!r}) "
            f"did not converge by t={t_max:g}"
        )
    return trajectory


def _require_tripartite(params: ModelParams) -> None:
    regime = equilibrium_set(params).regime
    if regime is not Regime.TRIPARTITE:
        raise RegimeError(
            f"requires the Tripartite regime, got {regime} (theta={params.theta!r}, q={params.q!r})"
        )


def lambda_star(
    params: ModelParams,
    tol: float = 1e-12,
    config: IntegratorConfig = IntegratorConfig(),
) -> LambdaStarResult:
    """Minimum disrupting invasion size on [0, 1/2].

    A probe landing exactly on the unstable equilibrium ends the search at that
    share.

    Raises:
        RegimeError: outside the Tripartite regime.
        ConvergenceError: if a probe fails to converge after its retry.
    """
    if not tol >= 1e-12:
        raise DomainError(f"tol must be at least 1e-12, got {tol!r}")
    _require_tripartite(params)
    verdicts: dict[float, LimitLabel] = {}

    def verdict(lam: float) -> LimitLabel:
        label = probe_invasion(params, lam, config).terminal.label
        verdicts[lam] = label
        return label

    lo, hi = 0.0, 0.5
    top = verdict(hi)
    if top is LimitLabel.GOOD:
        return LambdaStarResult(params, None, (hi, hi), verdicts)
    if top is LimitLabel.UNSTABLE:
        return LambdaStarResult(params, hi, (hi, hi), verdicts)
    if verdict(lo) is not LimitLabel.GOOD:
        raise ConvergenceError(f"zero invasion did not stay at the good equilibrium for {params}")

    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        label = verdict(mid)
        if label is LimitLabel.GOOD:
            lo = mid
        elif label is LimitLabel.BAD:
            hi = mid
        else:
            lo = hi = mid
    return LambdaStarResult(params, 0.5 * (lo + hi), (lo, hi), verdicts)


def counter_invasion_threshold(result: LambdaStarResult) -> Optional[float]:
    """Smallest share of good-accustomed agents that tips the bad equilibrium.

    Relabeling insiders and outsiders maps a counter-invasion of size ``1 - lam``
    onto an invasion of size ``lam``, so the threshold is ``1 - lambda_star``.
    None when ``lambda_star`` itself is absent.
    """
    if result.lambda_star is None:
        return None
    return 1.0 - result.lambda_star


def _halfway_residual(theta: float, q: float) -> float:
    roots = interior_roots(ModelParams(theta, q))
    assert roots is not None
    s_u, s_b = roots
    return s_u - 0.5 * s_b


def halfway_q(theta: float, tol: float = 1e-12) -> float:
    """Scoundrel share at which ``s_u`` is exactly halfway between 0 and ``s_b``.

    Raises:
        DomainError: if ``theta <= 1``.
    """
    if not theta > 1.0:
        raise DomainError(f"halfway_q requires theta > 1, got {theta!r}")
    hi = q_hat(theta) - HALFWAY_INSET
    lo = min(1e-6, 1e-3 * hi)
    g_lo, g_hi = _halfway_residual(theta, lo), _halfway_residual(theta, hi)
    if not (g_lo < 0.0 < g_hi):
        raise DomainError(f"halfway residual not bracketed for theta={theta!r}: {g_lo!r}, {g_hi!r}")
    mid = 0.5 * (lo + hi)
    while True:
        mid = 0.5 * (lo + hi)
        g = _halfway_residual(theta, mid)
        if abs(g) <= tol or mid <= lo or mid >= hi:
            return mid
        if g < 0.0:
            lo = mid
        else:
            hi = mid


def sweep_total_cheating(theta: float, q_grid: Iterable[float]) -> list[SweepRecord]:
    """Total cheating at the worst surviving equilibrium for each ``q``.

    Where the bad equilibrium exists it is used; otherwise the good one, where
    only scoundrels cheat.
    """
    if not theta > 1.0:
        raise DomainError(f"sweep_total_cheating requires theta > 1, got {theta!r}")
    records = []
    for q in q_grid:
        params = ModelParams(theta, q)
        eq = equilibrium_set(params)
        s_resp = eq.s_b if eq.s_b is not None else 0.0
        records.append(SweepRecord(
            theta=theta,
            q=q,
            outputs={
                "s_b": eq.s_b,
                "q_hat": eq.q_hat,
                "total_cheating": total_cheating(params, s_resp),
            },
            label=str(eq.regime),
        ))
    return records


def _lambda_star_record(
    theta: float,
    q: Optional[float],
    tol: float,
    config: IntegratorConfig,
    delta: float,
) -> SweepRecord:
    q_used = q if q is not None else float("nan")
    try:
        if not theta > 1.0:
            return SweepRecord(theta, q_used, flag=f"theta={theta!r} must exceed 1")
        if q is None:
            q_used = halfway_q(theta)
        threshold = q_hat(theta)
        if not q_used < threshold:
            return SweepRecord(theta, q_used, outputs={"q_hat": threshold},
                               flag=f"q={q_used!r} >= q_hat={threshold!r}: no bad equilibrium")
        params = ModelParams(theta, q_used, delta)
        result = lambda_star(params, tol, config)
    except TrustDynError as exc:
        return SweepRecord(theta, q_used, flag=str(exc))
    return SweepRecord(
        theta=theta,
        q=q_used,
        lam=result.lambda_star,
        outputs={
            "lambda_star": result.lambda_star,
            "q_hat": threshold,
            "verdict_count": float(len(result.verdicts)),
        },
        label="Disrupted" if result.lambda_star is not None else "Robust",
    )


def sweep_lambda_star(
    theta_grid: Sequence[float],
    q_mode: str = "halfway",
    q: Optional[float] = None,
    tol: float = 1e-12,
    config: IntegratorConfig = IntegratorConfig(),
    delta: float = 1.0,
    jobs: int = 1,
) -> list[SweepRecord]:
    """``lambda_star`` across ``theta_grid``.

    ``q_mode="fixed"`` uses the given ``q`` for every theta; ``"halfway"``
    recomputes ``halfway_q(theta)`` first. Invalid points come back as records
    with ``flag`` set instead of raising. Records keep input order regardless
    of ``jobs``.
    """
    if q_mode not in ("fixed", "halfway"):
        raise DomainError(f"q_mode must be 'fixed' or 'halfway', got {q_mode!r}")
    if q_mode == "fixed" and q is None:
        raise DomainError("q_mode='fixed' requires q")
    q_arg = q if q_mode == "fixed" else None
    n = len(theta_grid)
    args = ([float(t) for t in theta_grid], [q_arg] * n, [tol] * n, [config] * n, [delta] * n)
    if jobs <= 1 or n <= 1:
        return list(map(_lambda_star_record, *args))
    with ProcessPoolExecutor(max_workers=min(jobs, n)) as pool:
        return list(pool.map(_lambda_star_record, *args))
