"""
Continuous-Drive Mode Functions
Two- and four-time functions of the heralded CW state, the pre-detection correlation functions
they are built from, the window basis (g, v, phi) the coherence kernels live on, and the
traces and Gram matrix of that basis on the acceptance window.
Times are kappa*t, the click sits at t = 0 and the window is [-kappa_T/2, kappa_T/2].
"""

from __future__ import annotations

import functools
import logging
import math

import numpy as np

from models.errors import DomainError, NumericalError
from models.models import ModeFunctionTable

logger = logging.getLogger(__name__)

OVERLAP_TOLERANCE = 1e-7
START_POINTS = 16
MAX_POINTS = 512
INNER_POINTS = 64


def _check_window(kappa_t):
    if not 0.0 < kappa_t <= 50.0:
        raise DomainError('acceptance window must lie in (0, 50]', kappa_t=kappa_t)


def heralded_cross_correlation(t, t_prime, x2):
    """<a_s^+(t) a_i^+><a_s(t') a_i> / <a_i^+ a_i> with the idler taken at t = 0"""
    t, t_prime = np.abs(t), np.abs(t_prime)
    return 0.5 * np.exp(-(t + t_prime) / 2.0) * (
        1.0 + x2 / 2.0 * ((1.0 + t / 2.0) ** 2 + (1.0 + t_prime / 2.0) ** 2)
    )


def signal_autocorrelation(delta, x2):
    """<a_s^+(t) a_s(t + delta)>"""
    delta = np.abs(delta)
    return 0.5 * x2 * np.exp(-delta / 2.0) * (1.0 + delta / 2.0)


def window_constants(kappa_t):
    """Half window S and e^(-S)"""
    half = kappa_t / 2.0
    return half, math.exp(-half)


def a1_bracket(kappa_t, printed=False):
    """
    Normalisation of rho_A1, four times the integral of g^2 (1 + |t|/2)^2.

    printed=True returns 10(1 - e) - kappa_T e (3 - kappa_T), which leaves rho_A1 off unit trace.
    """
    _, e = window_constants(kappa_t)
    if printed:
        return 10.0 * (1.0 - e) - kappa_t * e * (3.0 - kappa_t)
    return 10.0 - e * (10.0 + 3.0 * kappa_t + kappa_t ** 2 / 4.0)


def a2_bracket(kappa_t):
    _, e = window_constants(kappa_t)
    return 5.0 * (1.0 - e) - e * (2.0 + 2.0 * kappa_t + kappa_t ** 2 / 8.0) + e * e * (4.0 + kappa_t) / 2.0


def b0_bracket(kappa_t, printed=False):
    """B0 bracket; printed=True keeps e^(-kappa_T) on the middle term instead of e^(-kappa_T/2)"""
    _, e = window_constants(kappa_t)
    middle = e * e if printed else e
    return ((5.0 + kappa_t) * (1.0 - e) - middle * (2.0 + 2.0 * kappa_t + kappa_t ** 2 / 8.0)
            + e * e * (4.0 + kappa_t) / 2.0)


def c20_bracket(kappa_t):
    _, e = window_constants(kappa_t)
    return (2.0 * (5.0 + kappa_t) - e * (14.0 + 6.0 * kappa_t + kappa_t ** 2 / 4.0)
            + e * e * (4.0 + kappa_t))


def g_norm2(kappa_t):
    """Integral of g^2 over the window, 1 - e^(-kappa_T/2)"""
    _, e = window_constants(kappa_t)
    return 1.0 - e


def g_v_overlap(kappa_t):
    """Integral of g v over the window"""
    return a1_bracket(kappa_t) / 4.0


def g_phi_overlap(kappa_t):
    """Integral of g phi over the window"""
    return a2_bracket(kappa_t) / 2.0


def basis_g(t):
    return np.exp(-np.abs(t) / 2.0) / math.sqrt(2.0)


def basis_v(t):
    return basis_g(t) * (1.0 + np.abs(t) / 2.0) ** 2


def _window_integral(integrand, a, kappa_t, points=INNER_POINTS):
    """int integrand(tau, a) dtau over the window per value of a, with panels split at tau = 0 and tau = a"""
    half, _ = window_constants(kappa_t)
    nodes, weights = np.polynomial.legendre.leggauss(points)
    a = np.asarray(a, dtype=float)
    lo, hi = np.minimum(a, 0.0), np.maximum(a, 0.0)
    total = np.zeros_like(a)
    for left, right in ((np.full_like(a, -half), lo), (lo, hi), (hi, np.full_like(a, half))):
        width = 0.5 * (right - left)
        tau = left[:, None] + width[:, None] * (nodes[None, :] + 1.0)
        total += width * (integrand(tau, a[:, None]) @ weights)
    return total


def basis_phi(t, kappa_t):
    """Signal autocorrelation (per unit x^2) folded with g over the window"""
    t = np.asarray(t, dtype=float)
    flat = t.reshape(-1)

    def integrand(tau, a):
        gap = np.abs(a - tau)
        return np.exp(-(np.abs(tau) + gap) / 2.0) * (1.0 + gap / 2.0)

    return (_window_integral(integrand, flat, kappa_t) / (2.0 * math.sqrt(2.0))).reshape(t.shape)


def basis_functions(points, kappa_t):
    """Rows g, v and phi on the given points"""
    return np.vstack([basis_g(points), basis_v(points), basis_phi(points, kappa_t)])


def rho_a0(t1, t2, kappa_t):
    _, e = window_constants(kappa_t)
    return 0.5 * np.exp(-(np.abs(t1) + np.abs(t2)) / 2.0) / (1.0 - e)


def rho_a1(t1, t2, kappa_t):
    u1, u2 = np.abs(t1), np.abs(t2)
    shape = (1.0 + u1 / 2.0) ** 2 + (1.0 + u2 / 2.0) ** 2
    return np.exp(-(u1 + u2) / 2.0) * shape / a1_bracket(kappa_t)


def rho_a2(t1, t2, kappa_t):
    """(phi(t1) g(t2) + g(t1) phi(t2)) normalised to unit trace"""
    half, e = window_constants(kappa_t)
    u1, u2 = np.abs(t1), np.abs(t2)
    grow1, grow2 = np.exp(u1 - half), np.exp(u2 - half)  # e^(-S) e^|t| without overflow
    body = (6.0 + (3.0 - e) * (u1 + u2) / 2.0 + (u1 ** 2 + u2 ** 2) / 4.0
            - (3.0 + half) * (e + (grow1 + grow2) / 2.0)
            + (u1 * grow1 + u2 * grow2) / 2.0)
    return 0.25 * np.exp(-(u1 + u2) / 2.0) * body / a2_bracket(kappa_t)


def rho_b0(t1, t2, t3, t4, kappa_t):
    """Two photons (t1, t2) against one (t3) in a memory, the partner memory holding t4"""
    gap = np.abs(t2 - t3)
    return (np.exp(-(np.abs(t1) + np.abs(t4) + gap) / 2.0) * (1.0 + gap / 2.0)
            / b0_bracket(kappa_t))


def rho_10_0(t1, t2, kappa_t):
    return rho_a0(t1, t2, kappa_t)


def rho_11(t1, t2, t3, t4, kappa_t):
    _, e = window_constants(kappa_t)
    gap24, gap13 = np.abs(t2 - t4), np.abs(t1 - t3)
    first = np.exp(-(np.abs(t1) + np.abs(t3) + gap24) / 2.0) * (1.0 + gap24 / 2.0)
    second = np.exp(-(np.abs(t2) + np.abs(t4) + gap13) / 2.0) * (1.0 + gap13 / 2.0)
    return (first + second) / (4.0 * kappa_t * (1.0 - e))


def rho_20(t1, t2, t3, t4, kappa_t):
    gap = np.abs(t2 - t4)
    return (4.0 * np.exp(-(np.abs(t1) + np.abs(t3) + gap) / 2.0) * (1.0 + gap / 2.0)
            / c20_bracket(kappa_t))


def _gauss_panels(edges, points_per_panel):
    nodes, weights = np.polynomial.legendre.leggauss(points_per_panel)
    xs, ws = [], []
    for lo, hi in zip(edges[:-1], edges[1:]):
        half = 0.5 * (hi - lo)
        xs.append(lo + half * (nodes + 1.0))
        ws.append(half * weights)
    return np.concatenate(xs), np.concatenate(ws)


def _pair_trace(kernel, points, weights, kappa_t):
    """int int kernel(tau, a) dtau da, the inner integral split at the kinks tau = 0 and tau = a"""
    return float(np.dot(weights, _window_integral(kernel, points, kappa_t)))


def _block_traces(points, weights, kappa_t):
    single = {
        'A0': rho_a0(points, points, kappa_t),
        'A1': rho_a1(points, points, kappa_t),
        'A2': rho_a2(points, points, kappa_t),
        '10_0': rho_10_0(points, points, kappa_t),
    }
    traces = {name: float(np.dot(weights, diagonal)) for name, diagonal in single.items()}
    traces['11'] = _pair_trace(lambda tau, a: rho_11(tau, a, tau, a, kappa_t), points, weights, kappa_t)
    # two photons in one memory: direct plus exchange, each pair counted twice
    traces['20'] = 0.25 * _pair_trace(
        lambda tau, a: rho_20(tau, a, tau, a, kappa_t) + rho_20(tau, a, a, tau, kappa_t),
        points, weights, kappa_t)
    # losing either photon of the pair against the single photon it is correlated with
    traces['B0'] = 0.5 * _pair_trace(
        lambda tau, a: rho_b0(tau, a, tau, a, kappa_t) + rho_b0(a, tau, tau, a, kappa_t),
        points, weights, kappa_t)
    return traces


def _evaluate_table(kappa_t, points_per_panel):
    half, _ = window_constants(kappa_t)
    points, weights = _gauss_panels([-half, 0.0, half], points_per_panel)
    basis = basis_functions(points, kappa_t)
    gram = (basis * weights) @ basis.T
    return gram, _block_traces(points, weights, kappa_t)


def build_overlap_table(kappa_t, tolerance=OVERLAP_TOLERANCE, max_points=MAX_POINTS):
    """Gram matrix of the window basis and traces of the mode functions, refined until successive grids agree"""
    _check_window(kappa_t)
    per_panel = START_POINTS
    gram, traces = _evaluate_table(kappa_t, per_panel)
    while True:
        if per_panel * 2 > max_points:
            raise NumericalError('overlap integrals did not converge', kappa_t=kappa_t, points=per_panel,
                                 tolerance=tolerance)
        per_panel *= 2
        finer_gram, finer_traces = _evaluate_table(kappa_t, per_panel)
        change = max(
            float(np.max(np.abs(finer_gram - gram))),
            max(abs(finer_traces[key] - traces[key]) for key in traces),
        )
        gram, traces = finer_gram, finer_traces
        if change <= tolerance:
            break
    ratio = b0_bracket(kappa_t, printed=True) / b0_bracket(kappa_t)
    logger.debug('overlap table kT=%g converged with %d points per panel', kappa_t, per_panel)
    return ModeFunctionTable(
        kappa_t=float(kappa_t),
        traces=traces,
        gram=gram,
        b0_bracket_ratio=ratio,
        quadrature_points=2 * per_panel,
    )


@functools.lru_cache(maxsize=2048)
def _cached_table(kappa_t):
    return build_overlap_table(kappa_t)


def mode_overlap_table(kappa_t) -> ModeFunctionTable:
    """Cached overlap table; tables are immutable and shared between callers"""
    return _cached_table(float(kappa_t))


