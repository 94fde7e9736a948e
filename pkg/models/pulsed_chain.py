"""
Pulsed Repeater Chain
Density-matrix coefficients of a pulsed DLCZ link, their evolution under entanglement swapping,
the success probabilities and the end-to-end fidelity
"""

from __future__ import annotations

import math

import numpy as np

from models.chain_algebra import (
    assemble_fidelity, postselection_probability, readout_populations, require_normalized,
    swap_diagonal, swap_probability,
)
from models.errors import DomainError
from models.models import ChainStatistics, FidelityMode, ModeDecomposition, PulsedCoefficients

MAX_PAIR_PROBABILITY = 0.5


def _check_inputs(p1, purity):
    if not 0.0 <= p1 <= MAX_PAIR_PROBABILITY:
        raise DomainError('pair probability outside the perturbative range', p1=p1)
    if not 0.0 < purity <= 1.0:
        raise DomainError('purity must lie in (0, 1]', purity=purity)


def _check_eta(eta2):
    if not 0.0 < eta2 <= 1.0:
        raise DomainError('eta2 must lie in (0, 1]', eta2=eta2)


def initial_coefficients(p1, purity):
    """Normalised coefficients right after heralding an elementary link"""
    _check_inputs(p1, purity)
    denominator = 1.0 + p1 * (1.0 + purity)
    c10 = (1.0 - p1) / denominator
    return PulsedCoefficients(
        depth_n=0,
        c00=0.0,
        c10=c10,
        c11=p1 / denominator,
        c20=p1 * (1.0 + purity) / denominator,
        a0=c10,
        a1=0.0,
        b0=p1 * math.sqrt((1.0 + purity) / 2.0) / denominator,
        normalized=True,
    )


def swap_step(coeffs: PulsedCoefficients, eta2) -> PulsedCoefficients:
    """Raw coefficients after swapping two identical links"""
    _check_eta(eta2)
    c00, c10, c11, c20 = swap_diagonal(*coeffs.diagonal, eta2)
    return PulsedCoefficients(
        depth_n=coeffs.depth_n + 1,
        c00=c00, c10=c10, c11=c11, c20=c20,
        a0=eta2 / 4.0 * coeffs.a0 ** 2,
        a1=eta2 / 2.0 * coeffs.a0 * (coeffs.a1 + (1.0 - eta2) * coeffs.b0),
        b0=eta2 / 4.0 * coeffs.a0 * coeffs.b0,
        normalized=False,
    )


def normalize(coeffs):
    """Divide every coefficient by the population trace"""
    trace = coeffs.trace()
    if trace <= 0:
        raise DomainError('coefficient trace must be positive', trace=trace)
    return coeffs.scaled(1.0 / trace, normalized=True)


def closed_form_coefficients(n, p1, purity, eta2) -> PulsedCoefficients:
    """
    First-order solution of the swap recursion at depth n.

    A1 carries the factor 2(2^n - 1) that solving its own recursion gives; the diagonal
    set, A0 and B0 follow the same first-order expansion.
    """
    if n < 0:
        raise DomainError('swap depth must be non-negative', n=n)
    _check_inputs(p1, purity)
    _check_eta(eta2)
    links = 2 ** n
    g = (eta2 / 4.0) ** (links - 1)
    loss = 1.0 - eta2
    w = purity
    pair_amplitude = math.sqrt((1.0 + w) / 2.0)

    c00 = g * loss * (links - 1) * (
        1.0 - p1 * ((1 + w) * loss + links * (4 - 3 * w + 2 * eta2 + 6 * w * eta2) / 3.0
                    - 2 * links ** 2 * loss / 3.0)
    )
    c10 = g * (1.0 - p1 * (2 * (1 + w) * loss + links * (2 - w + 2 * w * eta2) - 2 * links ** 2 * loss))
    return PulsedCoefficients(
        depth_n=n,
        c00=c00,
        c10=c10,
        c11=links * g * p1,
        c20=g * (1 + w) * p1,
        a0=g * (1.0 - links * (2 + w) * p1),
        a1=2.0 * g * (links - 1) * loss * pair_amplitude * p1,
        b0=g * pair_amplitude * p1,
        normalized=False,
    )


def swap_chain(initial: PulsedCoefficients, eta2, n):
    """Raw coefficient sets at depths 0..n and the swap probabilities P_1..P_n"""
    chain = [initial]
    probs = []
    for _ in range(n):
        current = chain[-1]
        probs.append(swap_prob(normalize(current), eta2))
        chain.append(swap_step(current, eta2))
    return chain, probs


def raw_trace_product(swap_probs):
    """Trace of the raw depth-n state from P_1..P_n: product over i of (P_(n-i)/2)^(2^i)"""
    n = len(swap_probs)
    value = 1.0
    for i in range(n):
        value *= (swap_probs[n - 1 - i] / 2.0) ** (2 ** i)
    return value


def gen_prob_pulsed(p1, purity, eta_ld):
    """Heralding probability of an elementary link per attempt"""
    return 2.0 * eta_ld * p1 * (1.0 + p1 * (1.0 + purity))


def swap_prob(coeffs: PulsedCoefficients, eta2):
    require_normalized(coeffs)
    return swap_probability(*coeffs.diagonal, eta2)


def postselect_prob(coeffs: PulsedCoefficients, eta2):
    require_normalized(coeffs)
    return postselection_probability(*coeffs.diagonal, eta2)


def coherence_amplitudes(coeffs: PulsedCoefficients, decomposition: ModeDecomposition, eta2):
    """Per-mode single-photon coherence of one chain after readout"""
    weights = decomposition.array
    lam = math.sqrt(2.0 / (1.0 + decomposition.purity)) * (1.0 + weights)
    shape = weights ** (2 ** coeffs.depth_n)
    return eta2 / 2.0 * shape * (coeffs.a0 + (coeffs.a1 + 2.0 * (1.0 - eta2) * coeffs.b0) * lam)


def coefficient_fidelity(coeffs: PulsedCoefficients, decomposition: ModeDecomposition, eta2):
    """Fidelity of a normalised depth-n coefficient set"""
    require_normalized(coeffs)
    p00, p10, p11 = readout_populations(*coeffs.diagonal, eta2)
    coherence = coherence_amplitudes(coeffs, decomposition, eta2)
    return assemble_fidelity(p10, p11, p00, float(np.dot(coherence, coherence)))


def fidelity_pulsed(n, p1, decomposition: ModeDecomposition, eta2):
    """End-to-end fidelity from the closed-form coefficients at depth n"""
    coeffs = normalize(closed_form_coefficients(n, p1, decomposition.purity, eta2))
    return coefficient_fidelity(coeffs, decomposition, eta2)


def chain_statistics(n, p1, decomposition: ModeDecomposition, eta2) -> ChainStatistics:
    """Swap probabilities, post-selection probability and fidelity of a depth-n chain"""
    levels = [normalize(closed_form_coefficients(k, p1, decomposition.purity, eta2)) for k in range(n + 1)]
    swaps = tuple(swap_prob(level, eta2) for level in levels[:-1])
    return ChainStatistics(
        depth_n=n,
        swap_probs=swaps,
        postselect=postselect_prob(levels[-1], eta2),
        fidelity=coefficient_fidelity(levels[-1], decomposition, eta2),
    )


def baseline_fidelity(decomposition: ModeDecomposition, n, mode=FidelityMode.EXACT):
    """Zeroth-order fidelity limited only by the multimode emission"""
    if n < 0:
        raise DomainError('swap depth must be non-negative', n=n)
    if FidelityMode(mode) is FidelityMode.EXACT:
        return 0.5 * (1.0 + float(np.sum(decomposition.array ** (2 ** (n + 1)))))
    return 0.5 * (1.0 + decomposition.purity ** (2 ** n))
