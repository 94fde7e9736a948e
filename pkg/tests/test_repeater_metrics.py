import math

import pytest

from models.errors import ContractError, DomainError
from models.models import LinkBudget, Scenario
from models.repeater_metrics import (
    best_depth, count_sign_changes, crossover_lengths, envelope, multiplexed_time, rate, with_multiplexing,
)


def test_rate_with_certain_events():
    result = rate(LinkBudget(l_total_km=100.0, depth_n=0), [1.0, 1.0], 0.95)
    assert result.rate_hz == pytest.approx(333.33, rel=1e-4)
    assert result.fidelity == 0.95


def test_rate_of_one_swap():
    result = rate(LinkBudget(l_total_km=100.0, depth_n=1), [0.5, 0.5, 0.5], 0.9)
    assert result.rate_hz == pytest.approx(27.78, rel=1e-3)


def test_rate_vanishes_with_any_failed_step():
    assert rate(LinkBudget(depth_n=1), [0.5, 0.0, 0.5], 0.9).rate_hz == 0.0


def test_rate_checks_probability_count():
    with pytest.raises(ContractError):
        rate(LinkBudget(depth_n=2), [0.5, 0.5], 0.9)


def test_rate_checks_probability_range():
    with pytest.raises(DomainError):
        rate(LinkBudget(depth_n=0), [1.5, 0.5], 0.9)


def test_multiplexed_time():
    assert multiplexed_time(1.0, 1000, 32) == pytest.approx(3.125e-5)
    assert multiplexed_time(0.0, 1000, 32) == math.inf
    with pytest.raises(DomainError):
        multiplexed_time(1.0, 0, 32)


def test_with_multiplexing_keeps_the_rate():
    result = with_multiplexing(rate(LinkBudget(), [1.0, 1.0], 0.9), 100, 32)
    assert result.t_total_s == pytest.approx(1.0 / (3200 * result.rate_hz))


def test_envelope_prefers_smaller_depth_on_ties():
    depths, best = envelope({0: [3.0, 1.0, 2.0], 1: [2.0, 2.0, 2.0]})
    assert depths == [0, 1, 0]
    assert list(best) == [3.0, 2.0, 2.0]


def test_crossover_of_straight_lines():
    curves = {0: lambda l_km: 1000.0 - l_km, 1: lambda l_km: 500.0 - 0.5 * l_km}
    (before, after, l_km), = crossover_lengths(curves, 100.0, 2000.0)
    assert (before, after) == (0, 1)
    assert l_km == pytest.approx(1000.0, abs=0.5)


def test_crossover_needs_increasing_range():
    with pytest.raises(DomainError):
        crossover_lengths({0: lambda l_km: 1.0}, 500.0, 100.0)


def test_sign_changes():
    assert count_sign_changes(lambda l_km: l_km - 300.0, lambda l_km: 0.0, 100.0, 500.0) == 1
    assert count_sign_changes(lambda l_km: 1.0, lambda l_km: 0.0) == 0


def test_best_depth_rejects_short_links():
    with pytest.raises(DomainError):
        best_depth(5.0, Scenario.pulsed(kappa_sigma=0.05))


def test_best_depth_at_fixed_width_is_short_chain_for_short_links():
    n, result = best_depth(100.0, Scenario.pulsed(kappa_sigma=0.05), max_depth=2)
    assert n == 0
    assert result.depth_n == 0
    assert result.rate_hz > 0


@pytest.mark.slow
@pytest.mark.parametrize('scenario,l_km,expected', [
    (Scenario.cw(), 500.0, 2),
    (Scenario.pulsed(1.0), 200.0, 1),
    (Scenario.pulsed(math.inf), 1600.0, 4),
])
def test_best_depth_inside_optimal_ranges(scenario, l_km, expected):
    n, _ = best_depth(l_km, scenario, max_depth=4)
    assert n == expected


@pytest.mark.slow
def test_multiplexed_cw_chain_reaches_sub_second_times():
    _, result = best_depth(500.0, Scenario.cw(), max_depth=4)
    assert multiplexed_time(result.rate_hz, 100, 32) < 1.0
