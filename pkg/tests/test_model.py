import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from trustdyn.errors import DomainError
from trustdyn.model import (
    CostProfile,
    ModelParams,
    cheat_cutoff,
    optimal_offer,
    proposer_payoff,
    realized_cheating,
    s_star,
    social_cost,
    total_cost,
)
from trustdyn.equilibria import interior_roots

from oracles import grid_best_offer

thetas = st.floats(min_value=0.05, max_value=20.0)
qs = st.floats(min_value=1e-4, max_value=1 - 1e-4)
units = st.floats(min_value=0.0, max_value=1.0)


@pytest.mark.parametrize(
    "theta, q, delta",
    [(0.0, 0.1, 1.0), (-1.0, 0.1, 1.0), (2.0, 0.0, 1.0), (2.0, 1.0, 1.0), (2.0, 0.1, 0.0),
     (float("nan"), 0.1, 1.0), (2.0, 0.1, float("inf"))],
)
def test_params_rejects_invalid(theta, q, delta):
    with pytest.raises(DomainError):
        ModelParams(theta, q, delta)


def test_params_immutable():
    p = ModelParams(2.0, 0.05)
    with pytest.raises(AttributeError):
        p.theta = 3.0  # type: ignore[misc]
    assert p.delta == 1.0


@pytest.mark.parametrize(
    "s, theta, q, expected",
    [(0.0, 2.0, 0.05, 2.0), (1.0, 2.0, 0.05, 0.1), (0.5, 2.0, 0.2, 0.4 / 0.6)],
)
def test_social_cost_examples(s, theta, q, expected):
    assert social_cost(s, ModelParams(theta, q)) == pytest.approx(expected, abs=1e-12)


@pytest.mark.parametrize("s", [-1e-9, 1.0 + 1e-9])
def test_social_cost_domain(s):
    with pytest.raises(DomainError):
        social_cost(s, ModelParams(2.0, 0.05))


@pytest.mark.parametrize(
    "z, s, theta, q, expected",
    [(0.0, 0.0, 2.0, 0.05, 2.0), (1.0, 1.0, 2.0, 0.05, 1.1), (0.3, 0.5, 2.0, 0.2, 0.966667)],
)
def test_total_cost_examples(z, s, theta, q, expected):
    assert total_cost(CostProfile(z, s), ModelParams(theta, q)) == pytest.approx(expected, abs=1e-6)


def test_cost_profile_domain():
    with pytest.raises(DomainError):
        CostProfile(1.5, 0.2)


def test_cheat_cutoff_branches():
    p = ModelParams(2.0, 0.05)
    f = social_cost(0.3, p)
    assert cheat_cutoff(f, 0.3, p) == 0.0
    assert cheat_cutoff(f + 0.4, 0.3, p) == pytest.approx(0.4, abs=1e-12)
    assert cheat_cutoff(f + 2.0, 0.3, p) == 1.0
    with pytest.raises(DomainError):
        cheat_cutoff(-0.1, 0.3, p)


@pytest.mark.parametrize(
    "theta, q, expected",
    [(1.0, 0.3, 0.0), (1.375, 0.1, 0.0416667), (0.9, 0.1, -0.0111111)],
)
def test_s_star_examples(theta, q, expected):
    assert s_star(ModelParams(theta, q)) == pytest.approx(expected, abs=1e-7)


def test_optimal_offer_examples():
    assert optimal_offer(0.0, ModelParams(2.0, 0.05)) == 2.0
    assert optimal_offer(0.5, ModelParams(2.0, 0.05)) == pytest.approx(0.595238, abs=1e-6)
    with pytest.raises(DomainError):
        optimal_offer(1.2, ModelParams(2.0, 0.05))


def test_proposer_payoff_examples():
    p = ModelParams(2.0, 0.05)
    f = social_cost(0.4, p)
    assert proposer_payoff(0.0, 0.4, p) == 0.0
    assert proposer_payoff(f, 0.4, p) == pytest.approx((1 - p.q) * f, abs=1e-15)
    assert proposer_payoff(f + 1.0, 0.4, p) == 0.0


def test_realized_cheating_examples():
    assert realized_cheating(0.0, ModelParams(2.0, 0.05)) == 0.0
    assert realized_cheating(0.5, ModelParams(2.0, 0.05)) == pytest.approx(0.404762, abs=1e-6)
    p = ModelParams(1.375, 0.1)
    s_u, _ = interior_roots(p)
    assert s_u == pytest.approx(0.064155, abs=1e-6)
    assert realized_cheating(s_u, p) == pytest.approx(s_u, abs=1e-12)


@given(thetas, qs, units, units)
def test_social_cost_decreasing_and_convex(theta, q, a, b):
    p = ModelParams(theta, q)
    a, b = min(a, b), max(a, b)
    if b - a < 1e-6:
        return
    fa, fb = social_cost(a, p), social_cost(b, p)
    assert fa > fb
    assert social_cost(0.5 * (a + b), p) < 0.5 * (fa + fb)


@given(thetas, qs, units, units, st.floats(0.0, 5.0), st.floats(0.0, 5.0))
def test_cheat_cutoff_monotone(theta, q, s1, s2, x1, x2):
    p = ModelParams(theta, q)
    x_lo, x_hi = min(x1, x2), max(x1, x2)
    z = cheat_cutoff(x_lo, s1, p)
    assert 0.0 <= z <= 1.0
    assert cheat_cutoff(x_hi, s1, p) >= z
    # larger social cost (smaller s) means a lower cutoff
    s_lo, s_hi = min(s1, s2), max(s1, s2)
    assert cheat_cutoff(x_lo, s_lo, p) <= cheat_cutoff(x_lo, s_hi, p)


@given(st.floats(1.0, 20.0), qs, units)
def test_optimal_offer_deters_iff_below_s_star(theta, q, s):
    p = ModelParams(theta, q)
    f = social_cost(s, p)
    x = optimal_offer(s, p)
    assert x >= f
    if s <= s_star(p):
        assert x == f
    elif f < 1.0:
        assert x > f


@given(thetas, qs, units)
def test_realized_cheating_below_half(theta, q, s):
    value = realized_cheating(s, ModelParams(theta, q))
    assert 0.0 <= value < 0.5


@given(st.floats(1.0, 20.0), qs)
def test_realized_cheating_continuous_at_seam(theta, q):
    p = ModelParams(theta, q)
    sstar = s_star(p)
    if not 0.0 <= sstar < 1.0:
        return
    assert social_cost(sstar, p) == pytest.approx(1.0, abs=1e-12)
    assert realized_cheating(sstar, p) == 0.0
    # just above the seam the interior branch is ~ slope * eps, slope = (1-q) / (2 theta q)
    eps = 1e-9
    slope = (1 - q) / (2 * theta * q)
    assert realized_cheating(min(1.0, sstar + eps), p) <= 1.01 * slope * eps + 1e-15


def test_optimal_offer_matches_grid_oracle():
    rng = np.random.default_rng(7)
    for _ in range(25):
        theta = float(rng.uniform(0.2, 5.0))
        q = float(rng.uniform(0.01, 0.9))
        s = float(rng.uniform(0.0, 1.0))
        p = ModelParams(theta, q)
        best, width = grid_best_offer(s, p)
        assert abs(best - optimal_offer(s, p)) <= width


def test_fixed_points_match_grid_scan():
    # sign changes of r(s) - s on a fine grid land on the closed-form interior roots
    from oracles import scan_fixed_points

    p = ModelParams(1.375, 0.1)
    found, grid = scan_fixed_points(p.theta, p.q)
    s_u, s_b = interior_roots(p)
    cell = grid[1] - grid[0]
    assert len(found) == 2
    assert abs(found[0] - s_u) <= cell and abs(found[1] - s_b) <= cell
    assert realized_cheating(0.0, p) == 0.0
    assert math.isclose(realized_cheating(s_b, p), s_b, abs_tol=1e-12)
