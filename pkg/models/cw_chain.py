"""
Continuous-Drive Repeater Chain
Window-dependent link coefficients under a constant drive, their swap on the window basis,
the generation probability and the end-to-end fidelity
"""

from __future__ import annotations

import functools
import logging
import math

import numpy as np

from models.chain_algebra import (
    assemble_fidelity, postselection_probability, readout_populations, require_normalized,
    swap_diagonal, swap_probability,
)
from models.cw_modes import g_norm2, g_phi_overlap, g_v_overlap, mode_overlap_table, window_constants
from models.errors import DomainError
from models.models import ChainStatistics, CwCoefficients, ModeFunctionTable
from models.pulsed_chain import normalize

logger = logging.getLogger(__name__)

MAX_STRENGTH_X2 = 0.1
MAX_WINDOW = 50.0
GENERATION_VALIDITY = 0.1

# basis index of g, v and phi
G, V, PHI = 0, 1, 2


def _check_inputs(x2, kappa_t):
    if not 0.0 <= x2 <= MAX_STRENGTH_X2:
        raise DomainError('x^2 outside the perturbative range', x2=x2)
    if not 0.0 < kappa_t <= MAX_WINDOW:
        raise DomainError('acceptance window must lie in (0, 50]', kappa_t=kappa_t)


def _check_eta(eta2):
    if not 0.0 < eta2 <= 1.0:
        raise DomainError('eta2 must lie in (0, 1]', eta2=eta2)


def _table_for(coeffs, table):
    if table is None:
        return mode_overlap_table(coeffs.kappa_t)
    if not math.isclose(table.kappa_t, coeffs.kappa_t):
        raise DomainError('overlap table was built for another window',
                          table_kappa_t=table.kappa_t, kappa_t=coeffs.kappa_t)
    return table


def block_traces(coherence, leak, gram):
    """
    A0, A1, A2 and B0 of a coherence kernel and leak given on the window basis.

    A_k is twice the trace of the part of the coherence that involves g only (A0), v but not
    phi (A1) or phi (A2); B0 is twice the trace of the leak.
    """
    weighted = 2.0 * coherence * gram
    a0 = weighted[G, G]
    a1 = weighted[G, V] + weighted[V, G] + weighted[V, V]
    a2 = float(np.sum(weighted[PHI, :]) + np.sum(weighted[:, PHI]) - weighted[PHI, PHI])
    return float(a0), float(a1), a2, float(2.0 * np.sum(leak * gram))


def initial_coefficients_cw(x2, kappa_t) -> CwCoefficients:
    """
    Coefficients after heralding with the click at the window centre.

    The coherence between the memories is (1/2 - x^2 S) g g + x^2/4 (v g + g v) - x^2/2 (phi g + g phi)
    and the leak of a pair against a single photon is x^2 S/2 g g + x^2/2 phi g, with S the half
    window. The populations sum to one exactly at first order in x^2, so the set is flagged normalised.
    """
    _check_inputs(x2, kappa_t)
    half, e = window_constants(kappa_t)
    q = g_norm2(kappa_t)
    gamma, lam = g_v_overlap(kappa_t), g_phi_overlap(kappa_t)
    mu = x2 * half

    coherence = np.zeros((3, 3))
    coherence[G, G] = 0.5 - mu
    coherence[G, V] = coherence[V, G] = x2 / 4.0
    coherence[G, PHI] = coherence[PHI, G] = -x2 / 2.0
    leak = np.zeros((3, 3))
    leak[G, G] = mu / 2.0
    leak[PHI, G] = x2 / 2.0

    c20 = x2 * (q * half + lam)
    return CwCoefficients(
        depth_n=0,
        kappa_t=float(kappa_t),
        c00=e - x2 * (gamma + 2.0 * half - 2.0 * q * half - lam),
        c10=q + x2 * (gamma + 2.0 * half - 4.0 * q * half - 2.0 * lam),
        c11=x2 * q * half,
        c20=c20,
        a0=q * (1.0 - x2 * kappa_t),
        a1=x2 * gamma,
        a2=-2.0 * x2 * lam,
        b0=c20,
        strength_x2=float(x2),
        normalized=True,
        coherence=coherence,
        leak=leak,
    )


def basis_matrices(coeffs: CwCoefficients):
    """
    Coherence and leak on the window basis.

    Sets carrying only the block traces get the lowest-order kernels with those traces:
    A0 on g g, A1 on (v g + g v), A2 on (phi g + g phi) and B0 on g g.
    """
    if coeffs.has_kernels:
        return coeffs.coherence, coeffs.leak
    q = g_norm2(coeffs.kappa_t)
    coherence = np.zeros((3, 3))
    coherence[G, G] = coeffs.a0 / (2.0 * q)
    coherence[G, V] = coherence[V, G] = coeffs.a1 / (4.0 * g_v_overlap(coeffs.kappa_t))
    coherence[G, PHI] = coherence[PHI, G] = coeffs.a2 / (4.0 * g_phi_overlap(coeffs.kappa_t))
    leak = np.zeros((3, 3))
    leak[G, G] = coeffs.b0 / (2.0 * q)
    return coherence, leak


def swap_step_cw(coeffs: CwCoefficients, eta2, table: ModeFunctionTable = None) -> CwCoefficients:
    """
    Raw coefficients after swapping two identical continuous-drive links.

    The middle memories are read out and one click projects them on their joint single-photon
    state. The outer coherence is the composition of the two link coherences through that
    projection; a pair lost to the readout inefficiency adds its leak to the side it sat on.
    """
    _check_eta(eta2)
    table = _table_for(coeffs, table)
    gram = table.gram
    coherence, leak = basis_matrices(coeffs)
    root = math.sqrt(eta2)
    loss = 1.0 - eta2
    left = root * (coherence + loss * leak.T)
    right = root * (coherence + loss * leak)
    new_coherence = 0.5 * left @ gram @ right
    new_leak = 0.5 * (root * leak) @ gram @ right
    a0, a1, a2, b0 = block_traces(new_coherence, new_leak, gram)
    c00, c10, c11, c20 = swap_diagonal(*coeffs.diagonal, eta2)
    return CwCoefficients(
        depth_n=coeffs.depth_n + 1,
        kappa_t=coeffs.kappa_t,
        c00=c00, c10=c10, c11=c11, c20=c20,
        a0=a0, a1=a1, a2=a2, b0=b0,
        strength_x2=coeffs.strength_x2,
        normalized=False,
        coherence=new_coherence,
        leak=new_leak,
    )


def first_order_swap_cw(coeffs: CwCoefficients, eta2) -> CwCoefficients:
    """
    Swap recursion on the block traces alone, first order in A1, A2 and B0.

    Agrees with swap_step_cw up to products of two of the first-order traces.
    """
    _check_eta(eta2)
    c00, c10, c11, c20 = swap_diagonal(*coeffs.diagonal, eta2)
    factor = eta2 / 4.0 * coeffs.a0
    return CwCoefficients(
        depth_n=coeffs.depth_n + 1,
        kappa_t=coeffs.kappa_t,
        c00=c00, c10=c10, c11=c11, c20=c20,
        a0=factor * (coeffs.a0 + coeffs.a1 + coeffs.a2 + 2.0 * (1.0 - eta2) * coeffs.b0),
        a1=factor * coeffs.a1,
        a2=factor * coeffs.a2,
        b0=factor * coeffs.b0,
        strength_x2=coeffs.strength_x2,
        normalized=False,
    )


def cw_chain_coefficients(n, x2, kappa_t, eta2, table: ModeFunctionTable = None):
    """Normalised coefficient sets at depths 0..n"""
    if n < 0:
        raise DomainError('swap depth must be non-negative', n=n)
    levels = [initial_coefficients_cw(x2, kappa_t)]
    for _ in range(n):
        levels.append(normalize(swap_step_cw(levels[-1], eta2, table)))
    return levels


def gen_prob_cw(x2, eta_ld, kappa_ttot):
    """Heralding probability per repetition window, eta_LD x^2 (1 + x^2) kappa*T_tot"""
    if x2 < 0 or kappa_ttot <= 0:
        raise DomainError('generation needs x^2 >= 0 and a positive repetition window',
                          x2=x2, kappa_ttot=kappa_ttot)
    prob = eta_ld * x2 * (1.0 + x2) * kappa_ttot
    if prob > GENERATION_VALIDITY:
        _warn_generation(round(prob, 2))
    return prob


@functools.lru_cache(maxsize=128)
def _warn_generation(prob):
    # once per rounded value; rate sweeps hit the same drive many times
    logger.warning('CW generation probability %.3g is outside the first-order regime', prob)


def readout_coherence(coeffs: CwCoefficients, eta2):
    """Single-photon coherence kernel of one chain after readout, on the window basis"""
    coherence, leak = basis_matrices(coeffs)
    return eta2 * (coherence + (1.0 - eta2) * (leak + leak.T))


def coherence_norm2_cw(coeffs: CwCoefficients, eta2, table: ModeFunctionTable):
    kernel = readout_coherence(coeffs, eta2)
    gram = table.gram
    return float(np.trace(kernel.T @ gram @ kernel @ gram))


def coefficient_fidelity_cw(coeffs: CwCoefficients, eta2, table: ModeFunctionTable = None):
    require_normalized(coeffs)
    table = _table_for(coeffs, table)
    p00, p10, p11 = readout_populations(*coeffs.diagonal, eta2)
    return assemble_fidelity(p10, p11, p00, coherence_norm2_cw(coeffs, eta2, table))


def fidelity_cw(n, x2, kappa_t, eta2, table: ModeFunctionTable = None):
    """End-to-end fidelity of a depth-n continuous-drive chain"""
    levels = cw_chain_coefficients(n, x2, kappa_t, eta2, table)
    return coefficient_fidelity_cw(levels[-1], eta2, table)


def chain_statistics_cw(n, x2, kappa_t, eta2) -> ChainStatistics:
    levels = cw_chain_coefficients(n, x2, kappa_t, eta2)
    return ChainStatistics(
        depth_n=n,
        swap_probs=tuple(swap_probability(*level.diagonal, eta2) for level in levels[:-1]),
        postselect=postselection_probability(*levels[-1].diagonal, eta2),
        fidelity=coefficient_fidelity_cw(levels[-1], eta2),
    )
