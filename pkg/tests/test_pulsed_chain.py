import pytest

from models.errors import ContractError, DomainError
from models.models import FidelityMode, ModeDecomposition, PulsedCoefficients
from models.pulsed_chain import (
    baseline_fidelity, chain_statistics, closed_form_coefficients, fidelity_pulsed, gen_prob_pulsed,
    initial_coefficients, normalize, postselect_prob, raw_trace_product, swap_chain, swap_prob, swap_step,
)

FIELDS = ('c00', 'c10', 'c11', 'c20', 'a0', 'a1', 'b0')


def _values(coeffs):
    return [getattr(coeffs, name) for name in FIELDS]


def test_initial_coefficients_without_pairs():
    coeffs = initial_coefficients(0.0, 1.0)
    assert _values(coeffs) == pytest.approx([0.0, 1.0, 0.0, 0.0, 1.0, 0.0, 0.0])
    assert coeffs.normalized


def test_initial_coefficients_with_pairs():
    coeffs = initial_coefficients(0.1, 1.0)
    assert coeffs.c10 == pytest.approx(0.75)
    assert coeffs.c11 == pytest.approx(0.083333, abs=1e-6)
    assert coeffs.c20 == pytest.approx(0.166667, abs=1e-6)
    assert coeffs.a0 == pytest.approx(0.75)
    assert coeffs.b0 == pytest.approx(0.083333, abs=1e-6)
    assert coeffs.trace() == pytest.approx(1.0)


def test_initial_coefficients_reject_large_p1():
    with pytest.raises(DomainError):
        initial_coefficients(0.6, 1.0)


def test_swap_of_ideal_links():
    shared = PulsedCoefficients(0, 0.0, 1.0, 0.0, 0.0, 1.0, 0.0, 0.0, normalized=True)
    swapped = swap_step(shared, 1.0)
    assert _values(swapped) == pytest.approx([0.0, 0.25, 0.0, 0.0, 0.25, 0.0, 0.0])
    assert swapped.depth_n == 1
    assert not swapped.normalized


def test_swap_keeps_a1_zero_without_sources():
    coeffs = PulsedCoefficients(0, 0.1, 0.8, 0.05, 0.05, 0.8, 0.0, 0.0, normalized=True)
    assert swap_step(coeffs, 0.72).a1 == 0.0


def test_closed_form_pair_population():
    coeffs = closed_form_coefficients(2, 0.01, 1.0, 0.72)
    assert coeffs.c11 == pytest.approx(4 * 0.18 ** 3 * 0.01)


def _recursion_gap(n, p1, purity, eta2):
    chain, _ = swap_chain(initial_coefficients(p1, purity), eta2, n)
    iterated = normalize(chain[-1])
    closed = normalize(closed_form_coefficients(n, p1, purity, eta2))
    return max(abs(a - b) for a, b in zip(_values(iterated), _values(closed)))


@pytest.mark.parametrize('n', range(5))
@pytest.mark.parametrize('eta2', [0.5, 0.72, 1.0])
def test_closed_form_matches_recursion_to_second_order(n, eta2):
    purity = 0.8
    coarse = _recursion_gap(n, 2e-4, purity, eta2)
    fine = _recursion_gap(n, 1e-4, purity, eta2)
    if coarse < 1e-13:
        return
    assert 3.2 < coarse / fine < 4.8


def test_raw_trace_follows_swap_probabilities_without_pairs():
    chain, probs = swap_chain(initial_coefficients(0.0, 1.0), 0.72, 3)
    assert len(probs) == 3
    assert chain[-1].trace() == pytest.approx(raw_trace_product(probs), rel=1e-12)


def test_generation_probability():
    assert gen_prob_pulsed(0.0, 1.0, 0.5) == 0.0
    assert gen_prob_pulsed(0.01, 1.0, 0.28894) == pytest.approx(5.8944e-3, rel=1e-4)


def test_probabilities_of_ideal_link():
    coeffs = initial_coefficients(0.0, 1.0)
    assert swap_prob(coeffs, 1.0) == pytest.approx(0.5)
    assert postselect_prob(coeffs, 1.0) == pytest.approx(0.5)


def test_probabilities_refuse_raw_coefficients():
    raw = swap_step(initial_coefficients(0.01, 1.0), 0.72)
    with pytest.raises(ContractError):
        swap_prob(raw, 0.72)


def test_baseline_fidelity_examples(single_mode, two_modes):
    for n in range(5):
        assert baseline_fidelity(single_mode, n) == pytest.approx(1.0)
        assert baseline_fidelity(single_mode, n, FidelityMode.APPROXIMATE) == pytest.approx(1.0)
    assert baseline_fidelity(two_modes, 0) == pytest.approx(0.75)
    assert baseline_fidelity(two_modes, 0, FidelityMode.APPROXIMATE) == pytest.approx(0.75)
    assert baseline_fidelity(two_modes, 1) == pytest.approx(0.5625)
    assert baseline_fidelity(two_modes, 1, FidelityMode.APPROXIMATE) == pytest.approx(0.625)


@pytest.mark.parametrize('n', range(5))
def test_fidelity_reduces_to_baseline_without_pairs(n, three_modes):
    for eta2 in (0.5, 0.72, 1.0):
        assert fidelity_pulsed(n, 0.0, three_modes, eta2) == pytest.approx(
            baseline_fidelity(three_modes, n), abs=1e-10)


def test_pure_source_fidelity_tends_to_one(single_mode):
    assert fidelity_pulsed(2, 1e-9, single_mode, 0.72) == pytest.approx(1.0, abs=1e-6)


def test_fidelity_falls_with_pair_probability():
    weights = ModeDecomposition.from_weights([0.9, 0.1])
    assert fidelity_pulsed(1, 1e-3, weights, 0.72) > fidelity_pulsed(1, 1e-2, weights, 0.72)


def test_fidelity_falls_with_depth(three_modes):
    values = [fidelity_pulsed(n, 1e-3, three_modes, 0.72) for n in range(5)]
    assert values == sorted(values, reverse=True)


def test_chain_statistics(three_modes):
    stats = chain_statistics(3, 5e-3, three_modes, 0.72)
    assert len(stats.swap_probs) == 3
    assert all(0 < p < 1 for p in stats.swap_probs)
    assert 0 < stats.postselect < 1
    assert stats.fidelity == pytest.approx(fidelity_pulsed(3, 5e-3, three_modes, 0.72))
    assert stats.product() == pytest.approx(stats.postselect * stats.swap_probs[0] * stats.swap_probs[1]
                                            * stats.swap_probs[2])
