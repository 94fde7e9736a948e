"""
Repeater Metrics
End-to-end rate, multiplexed entanglement time, the best swap depth at a distance and the
distances where the best depth changes
"""

from __future__ import annotations

import logging
import math
from dataclasses import replace
from typing import Callable, Dict, List, Sequence, Tuple

import numpy as np

from models.errors import ContractError, DomainError, InfeasibleError
from models.models import LinkBudget, RateResult, Scenario

logger = logging.getLogger(__name__)

MAX_DEPTH = 6
MIN_DISTANCE_KM = 10.0
CROSSOVER_RESOLUTION_KM = 0.5
PARALLEL_FACTOR = 1.5


def rate(link: LinkBudget, probs: Sequence[float], fidelity) -> RateResult:
    """
    Un-multiplexed rate per memory.

    probs is [P0, P1, ..., Pn, P_PS] for a chain of depth n = link.depth_n; the rate is
    (c/L0) 2^-(n+2) (3/2)^-(n+1) times their product.
    """
    n = link.depth_n
    probs = tuple(float(p) for p in probs)
    if len(probs) != n + 2:
        raise ContractError('expected generation, swap and post-selection probabilities',
                            depth_n=n, given=len(probs))
    for prob in probs:
        if not 0.0 <= prob <= 1.0:
            raise DomainError('probabilities must lie in [0, 1]', probs=probs)
    value = (link.fiber_c_km_s / link.l0_km) / 2 ** (n + 2) * math.prod(probs) / PARALLEL_FACTOR ** (n + 1)
    return RateResult(depth_n=n, l_total_km=link.l_total_km, probs=probs, fidelity=float(fidelity), rate_hz=value)


def multiplexed_time(rate_hz, n_mm, n_mem):
    """Mean time to one end-to-end pair with n_mm modes in each of n_mem memories"""
    if n_mm <= 0 or n_mem <= 0:
        raise DomainError('mode and memory counts must be positive', n_mm=n_mm, n_mem=n_mem)
    if rate_hz < 0:
        raise DomainError('rate must be non-negative', rate_hz=rate_hz)
    if rate_hz == 0:
        return math.inf
    return 1.0 / (n_mm * n_mem * rate_hz)


def with_multiplexing(result: RateResult, n_mm, n_mem) -> RateResult:
    return replace(result, t_total_s=multiplexed_time(result.rate_hz, n_mm, n_mem))


def best_depth(l_total_km, scenario: Scenario, f_target=0.9, budget: LinkBudget = None,
               max_depth=MAX_DEPTH) -> Tuple[int, RateResult]:
    """Depth with the highest optimised rate at l_total_km; ties go to the smaller depth"""
    from models.optimizer import depth_optimum

    if l_total_km < MIN_DISTANCE_KM:
        raise DomainError('total distance must be at least 10 km', l_total_km=l_total_km)
    budget = budget or LinkBudget()
    best = None
    for n in range(max_depth + 1):
        try:
            optimum = depth_optimum(scenario, n, f_target, budget.eta2)
        except InfeasibleError as exc:
            logger.debug('depth %d infeasible for %s: %s', n, scenario.label, exc)
            continue
        result = optimum.rate_at(budget.at(l_total_km=l_total_km, depth_n=n))
        if best is None or result.rate_hz > best[1].rate_hz:
            best = (n, result)
    if best is None:
        raise InfeasibleError('no swap depth reaches the target fidelity', scenario=scenario.label,
                              f_target=f_target)
    return best


def envelope(rates_by_depth: Dict[int, Sequence[float]]):
    """Best rate and its depth at every sample; ties go to the smaller depth"""
    depths = sorted(rates_by_depth)
    table = np.array([np.asarray(rates_by_depth[n], dtype=float) for n in depths])
    winner = np.argmax(table, axis=0)
    return [depths[i] for i in winner], table[winner, np.arange(table.shape[1])]


def _leader(rate_fns: Dict[int, Callable], l_km):
    best_n, best_rate = None, -math.inf
    for n in sorted(rate_fns):
        value = rate_fns[n](l_km)
        if value > best_rate:
            best_n, best_rate = n, value
    return best_n


def crossover_lengths(rate_fns: Dict[int, Callable], lo=100.0, hi=2000.0, step=1.0,
                      resolution=CROSSOVER_RESOLUTION_KM) -> List[Tuple[int, int, float]]:
    """
    Distances where the best depth changes.

    The leading depth is tracked on a grid of step km and every change is refined by
    bisection to the given resolution. Returns (old depth, new depth, distance) triples.
    """
    if not lo < hi:
        raise DomainError('distance range must be increasing', lo=lo, hi=hi)
    grid = np.arange(lo, hi + step / 2, step)
    leaders = [_leader(rate_fns, l_km) for l_km in grid]
    crossings = []
    for left, right, before, after in zip(grid[:-1], grid[1:], leaders[:-1], leaders[1:]):
        if before == after:
            continue
        a, b = float(left), float(right)
        while b - a > resolution:
            mid = 0.5 * (a + b)
            if _leader(rate_fns, mid) == before:
                a = mid
            else:
                b = mid
        crossings.append((before, after, 0.5 * (a + b)))
    return crossings


def count_sign_changes(first: Callable, second: Callable, lo=100.0, hi=2000.0, step=1.0):
    """Sign changes of first(L) - second(L) on a grid of step km"""
    grid = np.arange(lo, hi + step / 2, step)
    signs = np.sign([first(l_km) - second(l_km) for l_km in grid])
    signs = signs[signs != 0]
    return int(np.count_nonzero(np.diff(signs)))
