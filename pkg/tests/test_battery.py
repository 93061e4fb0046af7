import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from ehaloha.battery import (
    BatteryChain,
    occupancy_full_duplex_infinite,
    occupancy_half_duplex_finite,
    occupancy_half_duplex_infinite,
    q2_knife_edge,
    steady_state_oracle,
)
from ehaloha.params import HarvestProbs

GRID_Q = (0.1, 0.3, 0.5, 0.7, 0.9)
GRID_P = (0.2, 0.5, 0.8)


def test_infinite_half_duplex_reference_value():
    # (0.4, 0.4, 0.6): 0.24 / (0.4 * 1.24)
    occ = occupancy_half_duplex_infinite(0.4, 0.4, 0.6)
    assert occ == pytest.approx(0.48387, abs=1e-5)
    oracle, _ = steady_state_oracle(BatteryChain.half_duplex(0.4, 0.4, 0.6))
    assert occ == pytest.approx(oracle, abs=1e-9)


def test_infinite_half_duplex_edges():
    assert occupancy_half_duplex_infinite(0.0, 0.5, 0.6) == 0.0
    assert occupancy_half_duplex_infinite(1.0, 0.1, 0.6) == 1.0  # saturation branch
    assert occupancy_half_duplex_infinite(0.5, 0.0, 0.6) == 1.0  # inflow, no drain
    assert occupancy_half_duplex_infinite(0.0, 0.0, 0.6) == 0.0  # absorbed at empty


def test_finite_two_state_hand_solve():
    # M = 1: pi1/pi0 = up_empty/down = 0.24/0.4, occupancy = 0.6/1.6
    assert occupancy_half_duplex_finite(0.4, 0.4, 0.6, 1) == pytest.approx(0.375, abs=1e-12)
    oracle, pi = steady_state_oracle(BatteryChain.half_duplex(0.4, 0.4, 0.6, capacity=1))
    assert oracle == pytest.approx(0.375, abs=1e-12)
    assert pi.sum() == pytest.approx(1.0, abs=1e-12)


def test_finite_converges_to_infinite():
    target = occupancy_half_duplex_infinite(0.4, 0.4, 0.6)
    for capacity, tol in ((10, 1e-4), (50, 1e-12)):
        assert occupancy_half_duplex_finite(0.4, 0.4, 0.6, capacity) == pytest.approx(
            target, abs=tol
        )


def test_finite_knife_edge_value():
    q1, p = 0.4, 0.6
    q2 = q2_knife_edge(q1, p)
    for capacity in (1, 3, 10):
        assert occupancy_half_duplex_finite(q1, q2, p, capacity) == 1.0


def test_finite_validation():
    with pytest.raises(ValueError):
        occupancy_half_duplex_finite(0.4, 0.4, 0.6, 0)


def test_full_duplex_reference_value():
    probs = HarvestProbs(p_h1=0.2, p_h2=0.2, p_h12=0.35)
    occ = occupancy_full_duplex_infinite(0.4, 0.7, probs)
    assert occ == pytest.approx(0.08 / (0.7 * 0.82), abs=1e-12)
    assert occ == pytest.approx(0.13937, abs=1e-5)
    oracle, _ = steady_state_oracle(BatteryChain.full_duplex(0.4, 0.7, probs))
    assert occ == pytest.approx(oracle, abs=1e-9)


def test_full_duplex_degenerates_to_half_duplex():
    probs = HarvestProbs(p_h1=0.6, p_h2=0.0, p_h12=0.0)
    for q1 in GRID_Q:
        for q2 in GRID_Q:
            assert occupancy_full_duplex_infinite(q1, q2, probs) == pytest.approx(
                occupancy_half_duplex_infinite(q1, q2, 0.6), abs=1e-12
            )
    assert occupancy_full_duplex_infinite(0.0, 0.5, probs) == 0.0


def test_oracle_distribution_properties():
    chain = BatteryChain.half_duplex(0.4, 0.4, 0.6)
    occ, pi = steady_state_oracle(chain, truncation=10_000)
    assert pi.sum() == pytest.approx(1.0, abs=1e-12)
    # detailed balance at the empty boundary and every interior level
    assert pi[1] * chain.down_rate == pytest.approx(pi[0] * chain.up_rate, rel=1e-12)
    for k in range(2, 50):
        assert pi[k] * chain.down_rate == pytest.approx(
            pi[k - 1] * chain.up_rate_busy, rel=1e-12
        )


def test_oracle_edge_cases():
    occ, pi = steady_state_oracle(BatteryChain(0.0, 0.0, 0.0))
    assert occ == 0.0 and pi.tolist() == [1.0]
    occ, pi = steady_state_oracle(BatteryChain(0.3, 0.2, 0.0))
    assert occ == 1.0 and pi is None
    # supercritical unlimited chain reports full occupancy
    occ, pi = steady_state_oracle(BatteryChain.half_duplex(0.9, 0.05, 0.9))
    assert occ == 1.0 and pi is None
    with pytest.raises(ValueError):
        steady_state_oracle(BatteryChain(0.3, 0.2, 0.4), truncation=5)


@pytest.mark.parametrize("q1", GRID_Q)
@pytest.mark.parametrize("q2", GRID_Q)
@pytest.mark.parametrize("p_h1", GRID_P)
def test_closed_forms_match_oracle_on_grid(q1, q2, p_h1):
    closed = occupancy_half_duplex_infinite(q1, q2, p_h1)
    oracle, _ = steady_state_oracle(BatteryChain.half_duplex(q1, q2, p_h1))
    assert closed == pytest.approx(oracle, abs=1e-9)
    for capacity in (1, 2, 5, 20):
        closed = occupancy_half_duplex_finite(q1, q2, p_h1, capacity)
        oracle, _ = steady_state_oracle(
            BatteryChain.half_duplex(q1, q2, p_h1, capacity=capacity)
        )
        assert closed == pytest.approx(oracle, abs=1e-9)


@pytest.mark.parametrize("q1", GRID_Q)
@pytest.mark.parametrize("q2", GRID_Q)
def test_full_duplex_matches_oracle_on_grid(q1, q2):
    probs = HarvestProbs(p_h1=0.2, p_h2=0.2, p_h12=0.35)
    closed = occupancy_full_duplex_infinite(q1, q2, probs)
    oracle, _ = steady_state_oracle(BatteryChain.full_duplex(q1, q2, probs))
    assert closed == pytest.approx(oracle, abs=1e-9)


def test_monotonicity_on_grid():
    grid = np.linspace(0.05, 0.95, 8)
    for q2 in (0.3, 0.6, 0.9):
        occ_in_p = [occupancy_half_duplex_infinite(0.5, q2, p) for p in grid]
        assert all(b >= a - 1e-12 for a, b in zip(occ_in_p, occ_in_p[1:]))
        occ_in_q1 = [occupancy_half_duplex_infinite(q1, q2, 0.5) for q1 in grid]
        assert all(b >= a - 1e-12 for a, b in zip(occ_in_q1, occ_in_q1[1:]))
    occ_in_q2 = [occupancy_half_duplex_infinite(0.5, q2, 0.5) for q2 in grid]
    assert all(b <= a + 1e-12 for a, b in zip(occ_in_q2, occ_in_q2[1:]))


def test_finite_below_infinite_and_increasing_in_capacity():
    for q1 in GRID_Q:
        for q2 in GRID_Q:
            for p in GRID_P:
                unlimited = occupancy_half_duplex_infinite(q1, q2, p)
                previous = 0.0
                for capacity in (1, 2, 5, 20):
                    occ = occupancy_half_duplex_finite(q1, q2, p, capacity)
                    assert occ <= unlimited + 1e-12
                    assert occ >= previous - 1e-12
                    previous = occ


def test_full_duplex_dominates_half_duplex():
    probs = HarvestProbs(p_h1=0.3, p_h2=0.25, p_h12=0.4)  # p_h12 >= p_h1
    for q1 in GRID_Q:
        for q2 in GRID_Q:
            fd = occupancy_full_duplex_infinite(q1, q2, probs)
            hd = occupancy_half_duplex_infinite(q1, q2, probs.p_h1)
            assert fd >= hd - 1e-12


@given(
    st.floats(min_value=0.01, max_value=1.0),
    st.floats(min_value=0.05, max_value=1.0),
    st.floats(min_value=0.01, max_value=1.0),
)
def test_closed_form_matches_oracle_random(q1, q2, p_h1):
    chain = BatteryChain.half_duplex(q1, q2, p_h1)
    assume(abs(chain.up_rate_busy / chain.down_rate - 1.0) > 0.01)
    closed = occupancy_half_duplex_infinite(q1, q2, p_h1)
    oracle, _ = steady_state_oracle(chain)
    assert closed == pytest.approx(oracle, abs=1e-9)
