import math

import numpy as np
import pytest

from models.errors import DomainError, InvalidInputError, RepeaterError
from models.models import DriveProfile, LinkBudget, ModeDecomposition, Scenario, ScenarioKind, TimeGrid


def test_link_budget_defaults(budget):
    assert budget.eta2 == pytest.approx(0.72)
    assert budget.at(l_total_km=400, depth_n=2).l0_km == pytest.approx(100.0)


def test_elementary_link_transmission():
    link = LinkBudget(l_total_km=100.0)
    assert link.eta_ld == pytest.approx(0.9 * math.exp(-100.0 / 22.0))


def test_half_link_attenuation():
    link = LinkBudget(l_total_km=100.0, attenuation='half_link')
    assert link.eta_ld == pytest.approx(0.9 * math.exp(-100.0 / 44.0))
    assert link.at(depth_n=1).attenuation == 'half_link'


def test_unknown_attenuation_is_refused():
    with pytest.raises(DomainError):
        LinkBudget(attenuation='quarter')


def test_link_budget_rejects_bad_efficiency():
    with pytest.raises(DomainError):
        LinkBudget(eta_d=1.5)


def test_mode_weights_are_sorted_and_normalised():
    decomposition = ModeDecomposition.from_weights([1.0, 3.0])
    assert decomposition.weights == pytest.approx((0.75, 0.25))
    assert decomposition.purity == pytest.approx(0.625)
    assert decomposition.top(1).weights == (1.0,)


def test_unresolved_weight_is_lumped():
    decomposition = ModeDecomposition.with_remainder([0.9, 0.0999])
    assert decomposition.weights == pytest.approx((0.9, 0.0999, 1e-4))
    assert decomposition.weights[0] == 0.9
    with pytest.raises(InvalidInputError):
        ModeDecomposition.with_remainder([0.9, 0.2])


def test_mode_weights_must_sum_to_one():
    with pytest.raises(InvalidInputError):
        ModeDecomposition((0.5, 0.4), 0.41)


def test_continuous_drive_below_threshold():
    assert DriveProfile.continuous(0.4).chi_over_kappa == pytest.approx(0.2)
    with pytest.raises(DomainError):
        DriveProfile.continuous(1.0)


def test_gauss_legendre_grid_integrates_polynomials():
    grid = TimeGrid.gauss_legendre([-1.0, 0.0, 2.0], 20)
    assert float(np.dot(grid.weights, grid.points ** 2)) == pytest.approx(3.0)
    assert grid.coverage == (-1.0, 2.0)
    assert grid.span[0] > -1.0


def test_grid_bounds_must_enclose_points():
    with pytest.raises(InvalidInputError):
        TimeGrid(np.array([0.0, 1.0]), np.array([0.5, 0.5]), (0.2, 1.0))


def test_scenario_labels():
    assert Scenario.pulsed(math.inf).intensity_cap is None
    assert Scenario.pulsed(math.inf).label == 'pulsed(a=inf)'
    assert Scenario.pulsed(0.1).label == 'pulsed(a=0.1)'
    assert Scenario.cw().kind is ScenarioKind.CW


def test_error_details_are_reported():
    error = DomainError('bad value', x=2)
    assert isinstance(error, ValueError)
    assert isinstance(error, RepeaterError)
    assert str(error) == "bad value (x=2)"
    assert error.exit_code == 2
