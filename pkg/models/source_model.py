"""
Cavity SPDC Source Model
Joint signal-idler amplitude of a pulsed cavity source, its Schmidt modes and the pair probabilities.
All times are in units of 1/kappa and all drive strengths are relative to the lasing threshold.
"""

from __future__ import annotations

import logging
import math

import numpy as np
from numpy.polynomial import legendre
from scipy import integrate, linalg, special

from models.errors import (
    DomainError, InvalidInputError, NumericalError, UnsupportedProfileError, ZeroAmplitudeError,
)
from models.models import DriveKind, DriveProfile, ModeDecomposition, TimeGrid

logger = logging.getLogger(__name__)

DEFAULT_GRID_POINTS = 400
PULSE_SPAN = 6.0
SIGNAL_TAIL = 20.0  # |psi|^2 falls as e^-t after the pulse
EMISSION_SPAN = 10.0  # chi is negligible beyond ten widths
INNER_EXTRA = 32
TRUNCATION = 1e-9
SINGULAR_FLOOR = 1e-12
NORM_TOLERANCE = 1e-6
LEADING_VALUE_TOLERANCE = 1e-3
EMISSION_NORM_TOLERANCE = 1e-2


def p1_pulsed(x, kappa_sigma):
    """Lowest-order pair probability x^2 e^(ks^2) erfc(ks) of a Gaussian pulse"""
    if x < 0 or kappa_sigma <= 0:
        raise DomainError('pair probability needs x >= 0 and kappa_sigma > 0', x=x, kappa_sigma=kappa_sigma)
    # erfcx keeps e^(z^2) erfc(z) finite for any pulse width
    return float(x * x * special.erfcx(kappa_sigma))


def p1_max(a, kappa_sigma):
    """Largest pair probability when the peak intensity is capped at a times threshold"""
    if a <= 0 or kappa_sigma <= 0:
        raise DomainError('intensity cap and pulse width must be positive', a=a, kappa_sigma=kappa_sigma)
    return float(a * math.pi * kappa_sigma ** 2 / 2.0 * special.erfcx(kappa_sigma))


def peak_intensity_ratio(x, kappa_sigma):
    """Peak drive intensity of a Gaussian pulse relative to threshold"""
    if x < 0 or kappa_sigma <= 0:
        raise DomainError('intensity ratio needs x >= 0 and kappa_sigma > 0', x=x, kappa_sigma=kappa_sigma)
    return 2.0 * x * x / (math.pi * kappa_sigma ** 2)


def intensity_ratio(chi_over_kappa):
    """Continuous drive intensity relative to threshold; below 1 means no lasing"""
    return 4.0 * chi_over_kappa ** 2


def p1_by_quadrature(x, kappa_sigma):
    """Adaptive 2-D quadrature of the pair probability, independent of the erfc formula"""
    if x < 0 or kappa_sigma <= 0:
        raise DomainError('pair probability needs x >= 0 and kappa_sigma > 0', x=x, kappa_sigma=kappa_sigma)
    s = kappa_sigma
    norm = 1.0 / (math.sqrt(2.0 * math.pi) * s)
    lo, hi = -12.0 * s, 12.0 * s

    def integrand(tau, t):
        return norm * norm * math.exp(-(t * t + tau * tau) / (2 * s * s) - (t - tau))

    # symmetric in (t, tau): integrate tau < t and double
    value, _ = integrate.dblquad(integrand, lo, hi, lambda t: lo, lambda t: t, epsabs=0.0, epsrel=1e-11)
    return 2.0 * x * x * value


def kernel_grid(kappa_sigma, n_points=DEFAULT_GRID_POINTS):
    """Time grid for the joint amplitude: the pulse region gets two thirds of the nodes"""
    if kappa_sigma <= 0:
        raise DomainError('pulse width must be positive', kappa_sigma=kappa_sigma)
    width = max(1.0, kappa_sigma)
    pulse = PULSE_SPAN * kappa_sigma
    lo, hi = -PULSE_SPAN * width, PULSE_SPAN * width + SIGNAL_TAIL
    if pulse >= PULSE_SPAN * width:
        inner = TimeGrid.gauss_legendre([lo, pulse], 2 * n_points // 3)
        tail = TimeGrid.gauss_legendre([pulse, hi], n_points - 2 * n_points // 3)
        return _join(inner, tail)
    before = TimeGrid.gauss_legendre([lo, -pulse], n_points // 6)
    inner = TimeGrid.gauss_legendre([-pulse, pulse], n_points // 2)
    tail = TimeGrid.gauss_legendre([pulse, hi], n_points - n_points // 2 - n_points // 6)
    return _join(before, inner, tail)


def emission_grid(kappa_sigma, n_points=DEFAULT_GRID_POINTS):
    """Single Gauss-Legendre panel over the window where the pulse emits"""
    if kappa_sigma <= 0:
        raise DomainError('pulse width must be positive', kappa_sigma=kappa_sigma)
    half = EMISSION_SPAN * kappa_sigma
    return TimeGrid.gauss_legendre([-half, half], n_points)


def _join(*grids):
    return TimeGrid(
        np.concatenate([grid.points for grid in grids]),
        np.concatenate([grid.weights for grid in grids]),
        (grids[0].coverage[0], grids[-1].coverage[1]),
    )


def _require_pulse(drive):
    if drive.kind is not DriveKind.GAUSSIAN_PULSE:
        raise UnsupportedProfileError('joint amplitude is only available for Gaussian pulses', kind=drive.kind.value)
    if drive.strength_x == 0:
        raise ZeroAmplitudeError('zero drive emits no pairs', strength_x=drive.strength_x)


def _normalize(kernel, grid):
    root = np.sqrt(grid.weights)
    norm = np.linalg.norm(root[:, None] * kernel * root[None, :])
    if not np.isfinite(norm) or norm == 0:
        raise ZeroAmplitudeError('joint amplitude vanishes on the grid')
    return kernel / norm


def build_joint_kernel(drive: DriveProfile, grid: TimeGrid, check=True, tolerance=LEADING_VALUE_TOLERANCE):
    """
    Joint amplitude psi(t_s, t_i) of the first-order pair emission.

    Solving the linearised cavity equations with vacuum input gives
    psi = x e^(-(t_s+t_i)/2) G(min(t_s, t_i)) with G(t) = int_{-inf}^t chi(t') e^(t') dt',
    which for a Gaussian pulse is e^(ks^2/2) Phi(t/ks - ks). The kernel is scaled to unit
    weighted Frobenius norm. With check enabled the leading singular value is compared to
    the emission-time representation and a coarse grid is refused.
    """
    _require_pulse(drive)
    s = drive.width_kappa_sigma
    required = PULSE_SPAN * max(1.0, s)
    lo, hi = grid.coverage
    if lo > -required or hi < required:
        raise InvalidInputError('time grid does not cover the pulse', span=(lo, hi), required=required)

    a = grid.points[:, None]
    b = grid.points[None, :]
    log_amplitude = -(a + b) / 2.0 + special.log_ndtr(np.minimum(a, b) / s - s)
    kernel = np.exp(log_amplitude - log_amplitude.max())
    kernel = _normalize(kernel, grid)

    if check:
        leading = leading_singular_value(kernel, grid)
        reference = math.sqrt(emission_weights(s, max(DEFAULT_GRID_POINTS, grid.size))[0])
        if abs(leading - reference) > tolerance:
            raise NumericalError('time grid too coarse for the joint amplitude',
                                 leading=leading, reference=reference, points=grid.size)
    return kernel


def build_emission_operator(drive: DriveProfile, grid: TimeGrid):
    """
    Galerkin matrix of the emission-time operator on orthonormal Legendre polynomials.

    psi factorises through the emission time: psi psi^T has the spectrum of K^2 with
    K(t, t') = sqrt(chi(t) chi(t')) e^(-|t-t'|/2), chi the normalised pulse. K is positive
    definite, so its eigenvalues are the singular values of psi / x. The inner integral is
    split at t' = t so neither rule sees the kink. Degree is half the number of nodes.
    """
    _require_pulse(drive)
    s = drive.width_kappa_sigma
    lo, hi = grid.coverage
    half = 0.5 * (hi - lo)
    centre = 0.5 * (hi + lo)
    degree = max(4, grid.size // 2)
    scale = np.sqrt((2.0 * np.arange(degree) + 1.0) / (2.0 * half))

    def root_chi(t):
        return np.exp(-t * t / (4.0 * s * s)) / math.sqrt(math.sqrt(2.0 * math.pi) * s)

    def basis(t):
        return legendre.legvander((t - centre) / half, degree - 1) * scale

    nodes, node_weights = legendre.leggauss(degree + INNER_EXTRA)
    inner = np.empty((grid.size, degree))
    for row, t in enumerate(grid.points):
        taus, tau_weights = [], []
        for a, b in ((lo, t), (t, hi)):
            taus.append(a + 0.5 * (b - a) * (nodes + 1.0))
            tau_weights.append(0.5 * (b - a) * node_weights)
        tau = np.concatenate(taus)
        factor = np.concatenate(tau_weights) * np.exp(-np.abs(t - tau) / 2.0) * root_chi(tau)
        inner[row] = factor @ basis(tau)

    outer = (grid.weights * root_chi(grid.points))[:, None] * basis(grid.points)
    matrix = outer.T @ inner
    return 0.5 * (matrix + matrix.T)


def emission_weights(kappa_sigma, n_points=DEFAULT_GRID_POINTS):
    """
    Schmidt weights from the emission operator, divided by its exact squared norm erfcx(ks).

    The leading weights converge spectrally; the slowly converging tail is left to the caller.
    """
    drive = DriveProfile.gaussian_pulse(1.0, kappa_sigma)
    values = linalg.eigvalsh(build_emission_operator(drive, emission_grid(kappa_sigma, n_points)))[::-1]
    values = values[values > SINGULAR_FLOOR * values[0]]
    total = float(special.erfcx(kappa_sigma))
    resolved = float(np.sum(values ** 2)) / total
    if abs(resolved - 1.0) > EMISSION_NORM_TOLERANCE:
        raise NumericalError('emission operator misses the pair probability',
                             resolved=resolved, kappa_sigma=kappa_sigma, points=n_points)
    return values ** 2 / total


def leading_singular_value(kernel, grid):
    root = np.sqrt(grid.weights)
    return float(linalg.svdvals(root[:, None] * kernel * root[None, :])[0])


def _truncate(weights):
    cumulative = np.cumsum(weights)
    keep = min(int(np.searchsorted(cumulative, 1.0 - TRUNCATION)) + 1, weights.size)
    return weights[:keep]


def schmidt_decompose(kernel, grid: TimeGrid) -> ModeDecomposition:
    """Squared singular values of the weighted kernel, truncated at 1 - 1e-9 cumulative weight"""
    root = np.sqrt(grid.weights)
    weighted = root[:, None] * np.asarray(kernel, dtype=float) * root[None, :]
    norm = np.linalg.norm(weighted)
    if abs(norm - 1.0) > NORM_TOLERANCE:
        raise InvalidInputError('kernel is not normalised', norm=float(norm))

    singular = linalg.svdvals(weighted)
    singular = singular[singular > SINGULAR_FLOOR * singular[0]]
    weights = singular ** 2
    return ModeDecomposition.from_weights(_truncate(weights / weights.sum()))


def decompose_drive(drive: DriveProfile, n_points=DEFAULT_GRID_POINTS, representation='emission'):
    """Schmidt modes of a pulsed drive"""
    _require_pulse(drive)
    if representation == 'emission':
        # the unresolved tail stays lumped so the leading weights keep their exact normalisation
        decomposition = ModeDecomposition.with_remainder(_truncate(emission_weights(drive.width_kappa_sigma, n_points)))
    elif representation == 'time':
        grid = kernel_grid(drive.width_kappa_sigma, n_points)
        decomposition = schmidt_decompose(build_joint_kernel(drive, grid, check=False), grid)
    else:
        raise InvalidInputError('unknown kernel representation', representation=representation)
    logger.debug('ks=%g: %d modes, purity %.9f', drive.width_kappa_sigma, decomposition.mode_count,
                 decomposition.purity)
    return decomposition


def mode_weights(kappa_sigma, n_points=DEFAULT_GRID_POINTS):
    """Schmidt modes at a pulse width; the drive strength drops out after normalisation"""
    return decompose_drive(DriveProfile.gaussian_pulse(1.0, kappa_sigma), n_points)


def richardson_purity(kappa_sigma, n_points=DEFAULT_GRID_POINTS, representation='time'):
    """Purity extrapolated from grids of n and 2n points assuming second-order convergence"""
    drive = DriveProfile.gaussian_pulse(1.0, kappa_sigma)
    coarse = decompose_drive(drive, n_points, representation).purity
    fine = decompose_drive(drive, 2 * n_points, representation).purity
    return (4.0 * fine - coarse) / 3.0
