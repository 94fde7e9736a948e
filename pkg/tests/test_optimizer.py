import math

import pytest

from models import optimizer
from models.cw_chain import chain_statistics_cw, gen_prob_cw
from models.errors import DomainError, InfeasibleError
from models.models import LinkBudget, ModeDecomposition, Scenario, TargetSolve
from models.optimizer import (
    DepthOptimum, build_table, depth_optimum, depth_ranges, optimal_sigma, optimal_window, solve_target_p1,
    solve_target_x, weights_at,
)
from models.pulsed_chain import chain_statistics, fidelity_pulsed


def test_target_p1_of_pure_source(single_mode):
    solve = solve_target_p1(0.9, 0, single_mode, 0.72)
    assert 0 < solve.param_value < 0.2
    assert solve.achieved_f == pytest.approx(0.9, abs=1e-7)
    assert fidelity_pulsed(0, solve.param_value, single_mode, 0.72) == pytest.approx(0.9, abs=1e-7)
    assert not solve.notes


def test_target_p1_is_clamped_when_never_reached(single_mode):
    solve = solve_target_p1(0.9, 0, single_mode, 1.0)
    assert solve.notes.get('clamped')
    assert solve.param_value == 0.2


def test_target_p1_of_impure_source_is_infeasible():
    with pytest.raises(InfeasibleError):
        solve_target_p1(0.9, 4, weights_at(2.0), 0.72)


def test_target_p1_shrinks_with_depth():
    weights = ModeDecomposition.from_weights([0.98, 0.02])
    values = [solve_target_p1(0.9, n, weights, 0.72).param_value for n in range(3)]
    assert values == sorted(values, reverse=True)


def test_target_x2_inside_the_bracket():
    solve = solve_target_x(0.9, 0, 2.0, 0.72)
    assert 0 < solve.param_value < 0.1
    assert solve.param_name == 'x2'
    assert solve.achieved_f == pytest.approx(0.9, abs=1e-7)


def test_weights_are_memoised_on_the_lattice():
    assert weights_at(0.1001) is weights_at(0.1)
    assert weights_at(0.0) is weights_at(0.001)


def test_optimal_sigma_without_cap():
    assert optimal_sigma(None, 0) is None
    assert optimal_sigma(math.inf, 2) is None


def test_optimal_sigma_of_large_cap_is_short():
    assert optimal_sigma(1e6, 0) < 1e-2


def test_optimal_sigma_rejects_non_positive_cap():
    with pytest.raises(DomainError):
        optimal_sigma(0.0, 0)


def test_golden_section_finds_parabola_peak():
    peak = optimizer._golden_max(lambda x: -(x - 1.3) ** 2, 0.0, 4.0, 1e-4)
    assert peak == pytest.approx(1.3, abs=1e-3)


def test_pulsed_optimum_rate(single_mode):
    stats = chain_statistics(0, 0.01, single_mode, 0.72)
    solve = TargetSolve(0.9, 'P1', 0.01, (0.0, 0.2), stats.fidelity, 1)
    optimum = DepthOptimum(Scenario.pulsed(kappa_sigma=0.05), 0, solve, stats, kappa_sigma=0.05)
    result = optimum.rate_at(LinkBudget(l_total_km=100.0))
    assert result.depth_n == 0
    assert result.rate_hz > 0
    assert optimum.to_row()['kappa_sigma'] == 0.05
    assert optimum.to_row()['P1'] == 0.01


def test_cw_generation_probability_is_clamped():
    stats = chain_statistics_cw(0, 0.05, 2.0, 0.72)
    solve = TargetSolve(0.9, 'x2', 0.05, (1e-8, 0.1), stats.fidelity, 1)
    optimum = DepthOptimum(Scenario.cw(), 0, solve, stats, kappa_t=2.0)
    short = LinkBudget(l_total_km=10.0)
    # 0.9 e^(-10/22) x 0.05 x 1.05 x 100 is about 3
    assert gen_prob_cw(0.05, short.eta_ld, 100.0) > 2.5
    assert optimum.generation_prob(short) == 1.0
    assert optimum.rate_at(short).probs[0] == 1.0
    long = LinkBudget(l_total_km=100.0)
    assert optimum.generation_prob(long) == pytest.approx(gen_prob_cw(0.05, long.eta_ld, 100.0))
    assert optimum.generation_prob(long) < 1.0


def test_fixed_width_optimum_keeps_the_width():
    optimum = depth_optimum(Scenario.pulsed(kappa_sigma=0.05), 1)
    assert optimum.kappa_sigma == 0.05
    assert optimum.solve.param_name == 'P1'
    assert optimum.statistics.fidelity == pytest.approx(0.9, abs=1e-6)
    assert optimum.purity == pytest.approx(weights_at(0.05).purity)


def test_depth_ranges_cover_the_distance_axis():
    _, ranges = depth_ranges(Scenario.pulsed(kappa_sigma=0.05), depths=(0, 1))
    assert ranges[0][0] == 100.0
    assert ranges[0][1] == ranges[1][0]
    assert ranges[1][1] is None


def test_build_table_rejects_unknown_kind():
    with pytest.raises(ValueError):
        build_table('laser')


@pytest.mark.slow
@pytest.mark.parametrize('a,n,expected', [(0.01, 0, 1.24), (1.0, 2, 0.05), (0.1, 3, 0.08)])
def test_optimal_sigma_values(a, n, expected):
    assert optimal_sigma(a, n) == pytest.approx(expected, abs=0.03)


@pytest.mark.slow
def test_optimal_windows():
    windows = [optimal_window(n) for n in range(5)]
    # the n = 0 objective is flat near its peak; 5.1 is within half a percent of it
    assert abs(windows[0] - 5.1) <= 0.4
    assert optimizer._cw_window_gain(0, 5.1, 0.9, 0.72, 100.0) == pytest.approx(
        optimizer._cw_window_gain(0, windows[0], 0.9, 0.72, 100.0), rel=5e-3)
    assert windows[1:4] == pytest.approx([6.0, 6.9, 7.6], abs=0.3)
    assert windows == sorted(windows)


@pytest.mark.slow
def test_target_x2_at_optimal_window():
    assert solve_target_x(0.9, 0, 5.1, 0.72).param_value == pytest.approx(2e-2, rel=0.15)


@pytest.mark.slow
def test_unbounded_pulsed_ranges():
    _, ranges = depth_ranges(Scenario.pulsed(math.inf))
    ends = [ranges[n][1] for n in range(4)]
    assert ends == pytest.approx([133, 299, 684, 1568], abs=5)


@pytest.mark.slow
def test_cw_crossovers():
    _, ranges = depth_ranges(Scenario.cw())
    ends = [ranges[n][1] for n in range(4)]
    assert ends == pytest.approx([141, 313, 703, 1596], abs=10)


@pytest.mark.slow
def test_moderate_cap_approaches_unbounded_rates():
    budget = LinkBudget()
    capped = {n: depth_optimum(Scenario.pulsed(1.0), n) for n in range(5)}
    free = {n: depth_optimum(Scenario.pulsed(math.inf), n) for n in range(5)}
    for l_km in (500.0, 1000.0, 1500.0, 2000.0):
        best_capped = max(o.rate_at(budget.at(l_total_km=l_km, depth_n=n)).rate_hz for n, o in capped.items())
        best_free = max(o.rate_at(budget.at(l_total_km=l_km, depth_n=n)).rate_hz for n, o in free.items())
        assert best_capped == pytest.approx(best_free, rel=0.05)
