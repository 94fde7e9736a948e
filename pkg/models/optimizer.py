"""
Drive Optimisation
Inverts the fidelity for the drive strength, picks the pulse width and acceptance window that
maximise the rate, and assembles the per-depth optima into the summary tables
"""

from __future__ import annotations

import functools
import logging
import math
import threading
from dataclasses import dataclass, field
from typing import Dict, Optional

import numpy as np

from models import cw_chain, pulsed_chain, repeater_metrics
from models.errors import (
    DomainError, InfeasibleError, NumericalError, RepeaterError, UndefinedFidelityError,
)
from models.models import (
    ChainStatistics, FidelityMode, LinkBudget, ModeDecomposition, RateResult, Scenario, ScenarioKind,
    TargetSolve,
)
from models.source_model import p1_max, mode_weights

logger = logging.getLogger(__name__)

DEFAULT_TARGET = 0.9
TARGET_TOLERANCE = 1e-7
P1_BRACKET = (0.0, 0.2)
X2_BRACKET = (1e-8, 1e-1)
SIGMA_BRACKET = (1e-3, 3.0)
SIGMA_RESOLUTION = 1e-3
WINDOW_BRACKET = (0.5, 20.0)
WINDOW_RESOLUTION = 0.05
WINDOW_SCAN_STEP = 0.1
SCAN_POINTS = 80
MAX_BISECTIONS = 200
CHECK_DISTANCES_KM = (200.0, 800.0)
DEFAULT_CAPS = (0.01, 0.1, 1.0, None)
TABLE_DEPTHS = tuple(range(5))


def _safe_fidelity(fidelity_fn, value):
    """Fidelity at value, or None where the first-order state is no longer physical"""
    try:
        fidelity = fidelity_fn(value)
    except (DomainError, UndefinedFidelityError):
        return None
    return fidelity if math.isfinite(fidelity) else None


def _invert(fidelity_fn, f_target, bracket, param_name, log_scan):
    """
    Largest drive in the bracket whose fidelity still meets the target.

    The bracket is scanned upwards for the first point below the target (or where the
    expansion breaks down) and the crossing is bisected until the fidelity matches.
    """
    lo, hi = bracket
    start = _safe_fidelity(fidelity_fn, lo)
    if start is None or start <= f_target:
        raise InfeasibleError('target fidelity is out of reach at vanishing drive',
                              param=param_name, f_target=f_target, limit=start)
    floor = lo if lo > 0 else hi * 1e-5
    scan = np.geomspace(floor, hi, SCAN_POINTS) if log_scan else np.linspace(lo, hi, SCAN_POINTS)
    below = None
    for value in scan:
        fidelity = _safe_fidelity(fidelity_fn, float(value))
        if fidelity is None or fidelity < f_target:
            below = float(value)
            break
        lo, start = float(value), fidelity
    if below is None:
        logger.debug('%s never drops below F=%g inside the bracket; clamped', param_name, f_target)
        return TargetSolve(f_target, param_name, hi, bracket, start, 0, {'clamped': 1.0})

    for iteration in range(1, MAX_BISECTIONS + 1):
        mid = 0.5 * (lo + below)
        fidelity = _safe_fidelity(fidelity_fn, mid)
        if fidelity is not None and abs(fidelity - f_target) <= TARGET_TOLERANCE:
            return TargetSolve(f_target, param_name, mid, bracket, fidelity, iteration)
        if fidelity is None or fidelity < f_target:
            below = mid
        else:
            lo = mid
    raise NumericalError('fidelity bisection did not converge', param=param_name, lo=lo, hi=below)


def solve_target_p1(f_target, n, weights: ModeDecomposition, eta2) -> TargetSolve:
    """Pair probability at which the depth-n pulsed chain reaches the target fidelity"""
    baseline = pulsed_chain.baseline_fidelity(weights, n, FidelityMode.EXACT)
    if baseline <= f_target:
        raise InfeasibleError('source purity too low for this depth', n=n, baseline=baseline, f_target=f_target)
    return _invert(lambda p1: pulsed_chain.fidelity_pulsed(n, p1, weights, eta2),
                   f_target, P1_BRACKET, 'P1', log_scan=True)


def solve_target_x(f_target, n, kappa_t, eta2) -> TargetSolve:
    """Drive strength x^2 at which the depth-n continuous-drive chain reaches the target fidelity"""
    table = cw_chain.mode_overlap_table(kappa_t)
    return _invert(lambda x2: cw_chain.fidelity_cw(n, x2, kappa_t, eta2, table),
                   f_target, X2_BRACKET, 'x2', log_scan=True)


_decompositions: Dict[int, ModeDecomposition] = {}
_decomposition_lock = threading.Lock()


def weights_at(kappa_sigma) -> ModeDecomposition:
    """Schmidt weights memoised on a 1e-3 lattice of pulse widths"""
    key = max(1, int(round(kappa_sigma / SIGMA_RESOLUTION)))
    with _decomposition_lock:
        cached = _decompositions.get(key)
    if cached is not None:
        return cached
    decomposition = mode_weights(key * SIGMA_RESOLUTION)
    with _decomposition_lock:
        return _decompositions.setdefault(key, decomposition)


def _p1_target_or_zero(f_target, n, kappa_sigma, eta2):
    try:
        return solve_target_p1(f_target, n, weights_at(kappa_sigma), eta2).param_value
    except InfeasibleError:
        return 0.0


def optimal_sigma(a, n, f_target=DEFAULT_TARGET, eta2=0.72):
    """
    Pulse width where the capped pair probability meets the target pair probability.

    Short pulses are capped below the target, long pulses lose purity until the target
    vanishes; the crossing is bisected on the 1e-3 lattice. a=None means no cap, where
    the ideal width tends to zero and None is returned.
    """
    if a is None or math.isinf(a):
        return None
    if a <= 0:
        raise DomainError('intensity cap must be positive', a=a)

    def gap(step):
        sigma = step * SIGMA_RESOLUTION
        return p1_max(a, sigma) - _p1_target_or_zero(f_target, n, sigma, eta2)

    lo = int(round(SIGMA_BRACKET[0] / SIGMA_RESOLUTION))
    hi = int(round(SIGMA_BRACKET[1] / SIGMA_RESOLUTION))
    if gap(lo) >= 0:
        return lo * SIGMA_RESOLUTION
    if gap(hi) < 0:
        raise InfeasibleError('pulse width bracket holds no crossing', a=a, n=n)
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if gap(mid) < 0:
            lo = mid
        else:
            hi = mid
    logger.debug('a=%g n=%d: ks*=%.3f', a, n, hi * SIGMA_RESOLUTION)
    return round(hi * SIGMA_RESOLUTION, 3)


@dataclass(frozen=True)
class DepthOptimum:
    """Drive settings that reach the target at one depth and the chain they produce"""
    scenario: Scenario
    depth_n: int
    solve: TargetSolve
    statistics: ChainStatistics
    purity: float = 1.0
    kappa_sigma: Optional[float] = None
    kappa_t: Optional[float] = None
    notes: Dict[str, float] = field(default_factory=dict)

    def generation_prob(self, link: LinkBudget):
        if self.scenario.kind is ScenarioKind.CW:
            # the first-order proxy can pass 1 on short links
            return min(cw_chain.gen_prob_cw(self.solve.param_value, link.eta_ld, self.scenario.kappa_ttot), 1.0)
        return pulsed_chain.gen_prob_pulsed(self.solve.param_value, self.purity, link.eta_ld)

    def rate_at(self, link: LinkBudget) -> RateResult:
        link = link.at(depth_n=self.depth_n)
        probs = [self.generation_prob(link), *self.statistics.swap_probs, self.statistics.postselect]
        return repeater_metrics.rate(link, probs, self.statistics.fidelity)

    def to_row(self):
        row = {
            'scenario': self.scenario.label,
            'n': self.depth_n,
            self.solve.param_name: self.solve.param_value,
            'F': self.statistics.fidelity,
        }
        if self.kappa_sigma is not None:
            row['kappa_sigma'] = self.kappa_sigma
        if self.kappa_t is not None:
            row['kappa_T'] = self.kappa_t
        return row


def _cw_window_gain(n, kappa_t, f_target, eta2, kappa_ttot):
    """T-dependent rate factor x*^2 (1 + x*^2) P_1..P_n P_PS; zero where the target is unreachable"""
    try:
        solve = solve_target_x(f_target, n, kappa_t, eta2)
        stats = cw_chain.chain_statistics_cw(n, solve.param_value, kappa_t, eta2)
    except RepeaterError:
        return 0.0
    x2 = solve.param_value
    return x2 * (1.0 + x2) * stats.product()


def _cw_window_rate(n, kappa_t, f_target, eta2, kappa_ttot, link: LinkBudget):
    try:
        solve = solve_target_x(f_target, n, kappa_t, eta2)
        stats = cw_chain.chain_statistics_cw(n, solve.param_value, kappa_t, eta2)
    except RepeaterError:
        return 0.0
    optimum = DepthOptimum(Scenario.cw(kappa_ttot), n, solve, stats, kappa_t=kappa_t)
    return optimum.rate_at(link).rate_hz


def _golden_max(fn, lo, hi, resolution):
    ratio = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c, d = b - ratio * (b - a), a + ratio * (b - a)
    fc, fd = fn(c), fn(d)
    while b - a > resolution:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - ratio * (b - a)
            fc = fn(c)
        else:
            a, c, fc = c, d, fd
            d = a + ratio * (b - a)
            fd = fn(d)
    return 0.5 * (a + b)


def _local_maxima(values):
    padded = np.concatenate(([-np.inf], values, [-np.inf]))
    inner = padded[1:-1]
    return int(np.count_nonzero((inner > padded[:-2]) & (inner >= padded[2:]) & (inner > 0)))


def optimal_window(n, f_target=DEFAULT_TARGET, eta2=0.72, kappa_ttot=100.0, budget: LinkBudget = None):
    """
    Acceptance window kappa*T that maximises the depth-n rate.

    Only the x*^2 and chain-probability factors depend on T, so the argmax is the same at
    every distance; this is checked at two distances before returning.
    """
    budget = budget or LinkBudget()

    def gain(kappa_t):
        return _cw_window_gain(n, kappa_t, f_target, eta2, kappa_ttot)

    grid = np.arange(WINDOW_BRACKET[0], WINDOW_BRACKET[1] + WINDOW_SCAN_STEP / 2, WINDOW_SCAN_STEP)
    values = np.array([gain(float(kappa_t)) for kappa_t in grid])
    if not np.any(values > 0):
        raise InfeasibleError('no acceptance window reaches the target fidelity', n=n, f_target=f_target)
    peak = int(np.argmax(values))
    if _local_maxima(values) > 1:
        logger.warning('window objective for n=%d is not unimodal; using the grid maximum', n)
        best = float(grid[peak])
    else:
        lo = float(grid[max(peak - 1, 0)])
        hi = float(grid[min(peak + 1, grid.size - 1)])
        best = _golden_max(gain, lo, hi, WINDOW_RESOLUTION) if hi > lo else float(grid[peak])
        if gain(best) < values[peak]:
            best = float(grid[peak])

    # the argmax must not move with distance
    candidates = sorted({best, float(grid[peak]), max(best - WINDOW_RESOLUTION, WINDOW_BRACKET[0]),
                         min(best + WINDOW_RESOLUTION, WINDOW_BRACKET[1])})
    leaders = set()
    for l_km in CHECK_DISTANCES_KM:
        rates = [_cw_window_rate(n, kappa_t, f_target, eta2, kappa_ttot, budget.at(l_total_km=l_km, depth_n=n))
                 for kappa_t in candidates]
        leaders.add(candidates[int(np.argmax(rates))])
    if len(leaders) > 1:
        raise NumericalError('window optimum depends on distance', n=n, candidates=sorted(leaders))
    return round(best, 2)


@functools.lru_cache(maxsize=256)
def depth_optimum(scenario: Scenario, n, f_target=DEFAULT_TARGET, eta2=0.72) -> DepthOptimum:
    """Optimised drive settings for one depth; distance enters only through the link budget"""
    if scenario.kind is ScenarioKind.CW:
        kappa_t = optimal_window(n, f_target, eta2, scenario.kappa_ttot)
        solve = solve_target_x(f_target, n, kappa_t, eta2)
        stats = cw_chain.chain_statistics_cw(n, solve.param_value, kappa_t, eta2)
        return DepthOptimum(scenario, n, solve, stats, kappa_t=kappa_t)

    if scenario.kappa_sigma is not None:
        kappa_sigma = scenario.kappa_sigma
        weights = weights_at(kappa_sigma)
    else:
        kappa_sigma = optimal_sigma(scenario.intensity_cap, n, f_target, eta2)
        weights = ModeDecomposition.single_mode() if kappa_sigma is None else weights_at(kappa_sigma)
    solve = solve_target_p1(f_target, n, weights, eta2)
    if scenario.intensity_cap is not None and kappa_sigma is not None:
        capped = p1_max(scenario.intensity_cap, kappa_sigma)
        if capped < solve.param_value:
            solve = TargetSolve(f_target, 'P1', capped, solve.bracket,
                                pulsed_chain.fidelity_pulsed(n, capped, weights, eta2), solve.iterations,
                                {'capped': 1.0})
    stats = pulsed_chain.chain_statistics(n, solve.param_value, weights, eta2)
    return DepthOptimum(scenario, n, solve, stats, purity=weights.purity, kappa_sigma=kappa_sigma)


def depth_ranges(scenario: Scenario, f_target=DEFAULT_TARGET, budget: LinkBudget = None,
                 depths=TABLE_DEPTHS, lo=100.0, hi=2000.0):
    """Distance range in which each depth gives the highest rate"""
    budget = budget or LinkBudget()
    optima = {}
    for n in depths:
        try:
            optima[n] = depth_optimum(scenario, n, f_target, budget.eta2)
        except InfeasibleError:
            logger.warning('depth %d cannot reach F=%g for %s', n, f_target, scenario.label)
    if not optima:
        raise InfeasibleError('no depth reaches the target fidelity', scenario=scenario.label)

    def curve(n):
        return lambda l_km: optima[n].rate_at(budget.at(l_total_km=l_km, depth_n=n)).rate_hz

    crossings = repeater_metrics.crossover_lengths({n: curve(n) for n in optima}, lo, hi)
    first = max(optima, key=lambda n: (curve(n)(lo), -n))
    ranges = {n: (None, None) for n in optima}
    current, start = first, lo
    for before, after, l_km in crossings:
        ranges[before] = (start, l_km)
        current, start = after, l_km
    ranges[current] = (start, None)
    return optima, ranges


def build_table(scenario_kind, f_target=DEFAULT_TARGET, budget: LinkBudget = None, caps=DEFAULT_CAPS,
                kappa_ttot=100.0, depths=TABLE_DEPTHS):
    """
    Rows of the pulsed or continuous-drive summary table.

    Pulsed rows carry the intensity cap, the optimal width (absent without a cap), the
    target P1 and the distance range; continuous rows carry the window, x*^2 and the range.
    Infeasible depths are kept as rows with a note.
    """
    budget = budget or LinkBudget()
    kind = ScenarioKind(scenario_kind)
    scenarios = [Scenario.cw(kappa_ttot)] if kind is ScenarioKind.CW else [Scenario.pulsed(a) for a in caps]
    rows = []
    for scenario in scenarios:
        optima, ranges = depth_ranges(scenario, f_target, budget, depths)
        for n in depths:
            row = {'scenario': scenario.label, 'n': n}
            if kind is ScenarioKind.PULSED:
                row['a'] = 'inf' if scenario.intensity_cap is None else scenario.intensity_cap
            optimum = optima.get(n)
            if optimum is None:
                row['note'] = 'infeasible'
                rows.append(row)
                continue
            row.update(optimum.to_row())
            start, end = ranges.get(n, (None, None))
            row['L_from_km'] = None if start is None else round(start)
            row['L_to_km'] = None if end is None else round(end)
            rows.append(row)
    return rows
