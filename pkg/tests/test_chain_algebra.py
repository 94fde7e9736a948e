import pytest

from models.chain_algebra import (
    assemble_fidelity, postselection_probability, readout_populations, require_normalized,
    swap_diagonal, swap_probability,
)
from models.errors import ContractError, UndefinedFidelityError
from models.models import PulsedCoefficients

SHARED_PHOTON = (0.0, 1.0, 0.0, 0.0)
VACUUM = (1.0, 0.0, 0.0, 0.0)


def test_swap_probability_of_shared_photon():
    assert swap_probability(*SHARED_PHOTON, 0.72) == pytest.approx(0.4608)
    assert swap_probability(*SHARED_PHOTON, 1.0) == pytest.approx(0.5)


def test_swap_probability_of_vacuum():
    assert swap_probability(*VACUUM, 0.72) == 0.0


def test_postselection_probability():
    assert postselection_probability(*SHARED_PHOTON, 1.0) == pytest.approx(0.5)
    assert postselection_probability(*VACUUM, 1.0) == 0.0
    assert postselection_probability(*SHARED_PHOTON, 0.0) == 0.0


def test_swap_of_shared_photons_without_loss():
    assert swap_diagonal(*SHARED_PHOTON, 1.0) == pytest.approx((0.0, 0.25, 0.0, 0.0))


def test_swap_trace_is_half_the_swap_probability():
    populations = (0.1, 0.7, 0.05, 0.15)
    eta2 = 0.72
    assert sum(swap_diagonal(*populations, eta2)) == pytest.approx(
        swap_probability(*populations, eta2) / 2.0, rel=0.05)


def test_readout_populations_stay_below_one():
    p00, p10, p11 = readout_populations(0.2, 0.6, 0.1, 0.1, 0.72)
    # p10 is one end only; two photons at one end make up the rest
    assert 0 < p10 < 0.5
    assert p11 == pytest.approx(0.72 ** 2 * 0.1)
    assert p00 + 2 * p10 + p11 <= 1.0 + 1e-12


def test_ideal_bell_pair_fidelity():
    assert assemble_fidelity(0.5, 0.0, 0.0, 0.25) == pytest.approx(1.0)


def test_fidelity_undefined_without_postselection():
    with pytest.raises(UndefinedFidelityError):
        assemble_fidelity(0.0, 0.0, 0.5, 0.0)


def test_probabilities_need_normalised_coefficients():
    raw = PulsedCoefficients(1, 0.1, 0.2, 0.0, 0.0, 0.2, 0.0, 0.0, normalized=False)
    with pytest.raises(ContractError):
        require_normalized(raw)
