import logging
import math

import numpy as np
import pytest

from models import cw_chain
from models.cw_chain import (
    basis_matrices, block_traces, chain_statistics_cw, coefficient_fidelity_cw, cw_chain_coefficients,
    fidelity_cw, first_order_swap_cw, gen_prob_cw, initial_coefficients_cw, swap_step_cw,
)
from models.cw_modes import mode_overlap_table
from models.errors import ContractError, DomainError
from models.models import CwCoefficients


def _coefficients(**values):
    fields = dict(depth_n=0, kappa_t=2.0, c00=0.2, c10=0.7, c11=0.05, c20=0.05,
                  a0=0.7, a1=0.0, a2=0.0, b0=0.0, strength_x2=0.01, normalized=True)
    fields.update(values)
    return CwCoefficients(**fields)


def test_initial_coefficients_without_drive_corrections():
    coeffs = initial_coefficients_cw(0.0, 2.0)
    assert coeffs.c00 == pytest.approx(math.exp(-1.0))
    assert coeffs.c10 == pytest.approx(0.632121, abs=1e-6)
    assert coeffs.a0 == pytest.approx(0.632121, abs=1e-6)
    assert coeffs.c11 == coeffs.c20 == coeffs.b0 == 0.0


def test_vanishing_window_captures_nothing():
    coeffs = initial_coefficients_cw(0.0, 1e-8)
    assert coeffs.c10 < 1e-7
    assert coeffs.c00 == pytest.approx(1.0, abs=1e-7)


def test_pair_population_at_unit_half_window():
    assert initial_coefficients_cw(0.01, 2.0).c11 == pytest.approx(6.3212e-3, rel=1e-4)


@pytest.mark.parametrize('x2', [1e-3, 1e-2, 5e-2])
@pytest.mark.parametrize('kappa_t', [0.5, 2.0, 8.0])
def test_initial_populations_sum_to_one(x2, kappa_t):
    coeffs = initial_coefficients_cw(x2, kappa_t)
    assert coeffs.trace() == pytest.approx(1.0, abs=1e-12)
    assert coeffs.normalized


def test_initial_coefficients_reject_strong_drive():
    with pytest.raises(DomainError):
        initial_coefficients_cw(0.2, 2.0)
    with pytest.raises(DomainError):
        initial_coefficients_cw(0.01, 0.0)


def test_swap_without_corrections_matches_pulsed_form():
    coeffs = _coefficients()
    assert swap_step_cw(coeffs, 0.72).a0 == pytest.approx(0.72 / 4.0 * 0.7 ** 2)


def test_block_traces_of_the_heralded_link():
    coeffs = initial_coefficients_cw(0.01, 3.0)
    a0, a1, a2, b0 = block_traces(coeffs.coherence, coeffs.leak, mode_overlap_table(3.0).gram)
    assert (a0, a1, a2, b0) == pytest.approx((coeffs.a0, coeffs.a1, coeffs.a2, coeffs.b0), abs=1e-9)
    assert coeffs.b0 == coeffs.c20


def test_matrices_from_block_traces_reproduce_them():
    coeffs = _coefficients(a1=0.01, a2=-0.005, b0=0.02)
    coherence, leak = basis_matrices(coeffs)
    traces = block_traces(coherence, leak, mode_overlap_table(2.0).gram)
    assert traces == pytest.approx((0.7, 0.01, -0.005, 0.02), abs=1e-7)


def test_first_order_swap_drops_the_b0_term_without_loss():
    swapped = first_order_swap_cw(_coefficients(a1=0.01, a2=-0.005, b0=0.02), 1.0)
    assert swapped.a0 == pytest.approx(0.25 * 0.7 * (0.7 + 0.01 - 0.005))
    assert swapped.b0 == pytest.approx(0.25 * 0.7 * 0.02)
    assert not swapped.has_kernels


@pytest.mark.parametrize('eta2', [1.0, 0.72])
def test_swap_departs_from_first_order_at_second_order(eta2):
    def defect(scale):
        coeffs = _coefficients(a1=0.01 * scale, a2=-0.005 * scale, b0=0.02 * scale)
        exact, reduced = swap_step_cw(coeffs, eta2), first_order_swap_cw(coeffs, eta2)
        return abs(exact.a0 - reduced.a0) + abs(exact.a1 - reduced.a1) + abs(exact.b0 - reduced.b0)

    assert defect(0.5) / defect(1.0) == pytest.approx(0.25, rel=0.05)
    assert defect(1.0) < 1e-3


def test_swap_keeps_the_coherence_symmetric():
    swapped = swap_step_cw(initial_coefficients_cw(0.01, 4.0), 0.72)
    assert np.allclose(swapped.coherence, swapped.coherence.T)
    assert swapped.has_kernels


def test_swap_of_undriven_links_has_no_pairs():
    swapped = swap_step_cw(initial_coefficients_cw(0.0, 3.0), 0.72)
    assert swapped.c11 == swapped.c20 == swapped.b0 == 0.0
    assert not swapped.normalized


def test_chain_levels_are_normalised():
    levels = cw_chain_coefficients(3, 1e-3, 2.0, 0.72)
    assert [level.depth_n for level in levels] == [0, 1, 2, 3]
    assert all(level.trace() == pytest.approx(1.0) for level in levels)


def test_generation_probability():
    assert gen_prob_cw(0.0, 0.5, 100.0) == 0.0
    assert gen_prob_cw(1e-4, 1.0, 100.0) == pytest.approx(0.010001)


def test_generation_probability_warns_outside_first_order(caplog):
    cw_chain._warn_generation.cache_clear()
    with caplog.at_level(logging.WARNING, logger='models.cw_chain'):
        assert gen_prob_cw(0.02, 1.0, 100.0) == pytest.approx(2.04)
    assert 'first-order' in caplog.text


def test_fidelity_without_drive_is_one():
    for kappa_t in (1.0, 2.0, 6.0):
        assert fidelity_cw(0, 0.0, kappa_t, 0.72) == pytest.approx(1.0, abs=1e-9)


def test_fidelity_falls_with_drive_strength():
    values = [fidelity_cw(0, x2, 2.0, 0.72) for x2 in (1e-4, 1e-3, 1e-2)]
    assert values[0] > values[1] > values[2]


def test_fidelity_needs_the_matching_table():
    coeffs = initial_coefficients_cw(1e-3, 2.0)
    assert coefficient_fidelity_cw(coeffs, 0.72, mode_overlap_table(2.0)) == pytest.approx(
        fidelity_cw(0, 1e-3, 2.0, 0.72))
    with pytest.raises(DomainError):
        coefficient_fidelity_cw(coeffs, 0.72, mode_overlap_table(3.0))


def test_fidelity_refuses_raw_coefficients():
    raw = swap_step_cw(initial_coefficients_cw(1e-3, 2.0), 0.72)
    with pytest.raises(ContractError):
        coefficient_fidelity_cw(raw, 0.72)


def test_chain_statistics():
    stats = chain_statistics_cw(2, 1e-3, 2.0, 0.72)
    assert len(stats.swap_probs) == 2
    assert all(0 < p < 1 for p in stats.swap_probs)
    assert 0 < stats.postselect < 1
    assert stats.fidelity == pytest.approx(fidelity_cw(2, 1e-3, 2.0, 0.72))
