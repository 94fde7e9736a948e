"""
Shared Chain Algebra
Diagonal swap recursion, swap and post-selection probabilities, readout populations and the
fidelity assembly used by both the pulsed and the continuous-drive chains
"""

from models.errors import ContractError, UndefinedFidelityError

NORMALIZATION_TOLERANCE = 1e-9


def require_normalized(coeffs):
    """Probabilities are only defined on normalised coefficient sets"""
    if not coeffs.normalized or abs(coeffs.trace() - 1.0) > NORMALIZATION_TOLERANCE:
        raise ContractError('coefficients must be normalised', trace=coeffs.trace(), depth_n=coeffs.depth_n)


def swap_diagonal(c00, c10, c11, c20, eta2):
    """One entanglement swap applied to the photon-number populations (unnormalised)"""
    loss = 1.0 - eta2
    keep_one = c10 / 2.0 + c20 * loss
    vacuum_side = c00 + c10 * loss / 2.0 + c20 * loss ** 2 / 2.0
    new_c00 = eta2 * keep_one * vacuum_side
    new_c10 = eta2 * (keep_one * (c10 / 2.0 + c11 * loss) + c11 * vacuum_side)
    new_c11 = eta2 * (c10 / 2.0) * c11
    new_c20 = eta2 * (c10 / 2.0) * (c20 / 2.0)
    return new_c00, new_c10, new_c11, new_c20


def swap_probability(c00, c10, c11, c20, eta2):
    """Probability that the middle station sees exactly one photon"""
    one_photon = c10 / 2.0 + c11 + (1.0 - eta2) * c20
    no_photon = 1.0 - eta2 * (c10 / 2.0 + c11 + c20) + eta2 ** 2 * c20 / 2.0
    return 2.0 * eta2 * no_photon * one_photon


def postselection_probability(c00, c10, c11, c20, eta2):
    """Probability of exactly one photon at each end after readout"""
    pairs = c11 + c20
    vacuum_partner = c11 * (1.0 - eta2 * (c10 + (2.0 - eta2) * pairs))
    single = (c10 + 2.0 * (1.0 - eta2) * pairs) / 2.0
    return 2.0 * eta2 ** 2 * (vacuum_partner + single ** 2)


def readout_populations(c00, c10, c11, c20, eta2):
    """
    Photon-number probabilities of one chain after readout loss.

    Returns (p00, p10, p11): no photon at either end, one photon at a given end only,
    one photon at both ends. p01 equals p10 by symmetry of the link.
    """
    loss = 1.0 - eta2
    p10 = eta2 * (c10 / 2.0 + loss * (c11 + c20))
    p11 = eta2 ** 2 * c11
    p00 = c00 + loss * c10 + loss ** 2 * (c11 + c20)
    return p00, p10, p11


def assemble_fidelity(p10, p11, p00, coherence_norm2):
    """
    Fidelity of the post-selected pair of chains with the ideal Bell state.

    Two chains are read out; the kept events carry one photon per end. Projecting on
    (|01> + |10>)/sqrt(2) in every mode pair gives the diagonal part p10^2 and the
    coherence part, the squared norm of the single-photon coherence kernel.
    """
    postselected = 2.0 * p10 * p10 + 2.0 * p11 * p00
    if postselected <= 0.0:
        raise UndefinedFidelityError('post-selection probability vanishes', p10=p10, p11=p11, p00=p00)
    return (p10 * p10 + coherence_norm2) / postselected
