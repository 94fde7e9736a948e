"""
Sweep Commands
Purity, target pair probability, rate-versus-distance and drive-strength sweeps
"""

import functools
import logging

import click
import numpy as np

from commands import common_options, config_option, prepare, reports_errors, scenario_for
from commands.export import render_schema, write_rows
from commands.schemas import DEPTHS, intensity_sweep_row, p1_targets_row, purity_sweep_row, rate_curve_row
from commands.workers import run_map
from models import cw_chain
from models.errors import InfeasibleError, RepeaterError
from models.models import FidelityMode, RateResult
from models.optimizer import depth_optimum, solve_target_p1, weights_at
from models.pulsed_chain import baseline_fidelity
from models.repeater_metrics import crossover_lengths, rate, with_multiplexing
from models.source_model import mode_weights, p1_max

logger = logging.getLogger(__name__)

DEFAULT_WINDOW = 2.0


def _sigma_grid(config):
    return [float(ks) for ks in np.geomspace(config.sigma_min, config.sigma_max, config.sigma_points)]


def _purity_point(kappa_sigma, grid_points):
    decomposition = mode_weights(kappa_sigma, grid_points)
    row = {'kappa_sigma': kappa_sigma, 'purity': decomposition.purity}
    for n in DEPTHS:
        row[f'F_exact_n{n}'] = baseline_fidelity(decomposition, n, FidelityMode.EXACT)
        row[f'F_approx_n{n}'] = baseline_fidelity(decomposition, n, FidelityMode.APPROXIMATE)
    return row


@click.command('purity-sweep')
@config_option('sigma_min', help='shortest pulse width kappa*sigma')
@config_option('sigma_max', help='longest pulse width kappa*sigma')
@config_option('sigma_points', type=int)
@config_option('grid_points', type=int, help='quadrature points of the mode decomposition')
@common_options
@reports_errors
def purity_sweep(config_path, show_schema, **flags):
    """Zeroth-order fidelity of chains of depth 0-4 against pulse width"""
    config = prepare(config_path, flags)
    row_model = purity_sweep_row()
    if show_schema:
        click.echo(render_schema(row_model), nl=False)
        return

    rows = run_map(functools.partial(_purity_point, grid_points=config.grid_points), _sigma_grid(config), config.jobs)
    gap = max(abs(row[f'F_exact_n{n}'] - row[f'F_approx_n{n}']) for row in rows for n in DEPTHS)
    logger.info('largest exact/approximate fidelity gap %.3g', gap)
    write_rows(rows, row_model, 'purity-sweep', config, {'max_exact_approx_gap': gap})


def _p1_target_point(kappa_sigma, caps, f_target, eta2):
    row = {'kappa_sigma': kappa_sigma}
    for cap in caps:
        if np.isfinite(cap):
            row[f'P1max_a{cap:g}'] = p1_max(cap, kappa_sigma)
    weights = weights_at(kappa_sigma)
    for n in DEPTHS:
        try:
            row[f'P1_target_n{n}'] = solve_target_p1(f_target, n, weights, eta2).param_value
        except InfeasibleError:
            row[f'P1_target_n{n}'] = None
    return row


@click.command('p1-targets')
@config_option('sigma_min', help='shortest pulse width kappa*sigma')
@config_option('sigma_max', help='longest pulse width kappa*sigma')
@config_option('sigma_points', type=int)
@config_option('caps', type=str, help='comma-separated intensity caps, e.g. 0.01,0.1,1')
@common_options
@reports_errors
def p1_targets(config_path, show_schema, **flags):
    """Capped and target pair probabilities against pulse width"""
    config = prepare(config_path, flags)
    row_model = p1_targets_row(config.caps)
    if show_schema:
        click.echo(render_schema(row_model), nl=False)
        return

    worker = functools.partial(_p1_target_point, caps=tuple(config.caps), f_target=config.f_target, eta2=config.eta2)
    rows = run_map(worker, _sigma_grid(config), config.jobs)
    write_rows(rows, row_model, 'p1-targets', config)


def _depth_point(n, scenario, f_target, eta2):
    try:
        return depth_optimum(scenario, n, f_target, eta2)
    except InfeasibleError as exc:
        logger.warning('depth %d skipped: %s', n, exc)
        return None


def _curve(optimum, budget, n):
    return lambda l_km: optimum.rate_at(budget.at(l_total_km=l_km, depth_n=n)).rate_hz


def _format_crossings(crossings):
    return ';'.join(f'{before}->{after}@{l_km:.1f}' for before, after, l_km in crossings)


def _rate_row(result: RateResult, scenario_label):
    row = {'scenario': scenario_label, 'n': result.depth_n, 'L_km': result.l_total_km}
    row.update({f'P{i}': prob for i, prob in enumerate(result.probs[:-1])})
    row.update({'P_PS': result.probs[-1], 'F': result.fidelity, 'rate_hz': result.rate_hz,
                't_total_s': result.t_total_s})
    return row


@click.command('rate-curve')
@config_option('scenario', type=click.Choice(['pulsed', 'cw']))
@config_option('a', help='peak intensity cap relative to threshold (pulsed)')
@config_option('kappa_sigma', help='fixed pulse width instead of an intensity cap (pulsed)')
@config_option('kappa_ttot', help='repetition window kappa*T_tot (cw)')
@config_option('max_depth', type=int)
@config_option('l_min_km')
@config_option('l_max_km')
@config_option('l_step_km')
@click.option('--multiplex/--no-multiplex', 'multiplex', default=None, help='add the multiplexed time per pair')
@config_option('n_mm', type=int, help='temporal modes per memory')
@config_option('n_mem', type=int, help='memories per node')
@common_options
@reports_errors
def rate_curve(config_path, show_schema, **flags):
    """Optimised chain of every depth against total distance, one row per distance and depth"""
    config = prepare(config_path, flags)
    depths = list(range(config.max_depth + 1))
    row_model = rate_curve_row(depths)
    if show_schema:
        click.echo(render_schema(row_model), nl=False)
        return

    scenario = scenario_for(config)
    budget = config.budget
    logger.info('rate-curve for %s, depths %s', scenario.label, depths)
    optima = run_map(functools.partial(_depth_point, scenario=scenario, f_target=config.f_target, eta2=config.eta2),
                     depths, config.jobs)
    optima = {n: optimum for n, optimum in zip(depths, optima) if optimum is not None}
    if not optima:
        raise InfeasibleError('no depth reaches the target fidelity', scenario=scenario.label,
                              f_target=config.f_target)

    rows = []
    for l_km in np.arange(config.l_min_km, config.l_max_km + config.l_step_km / 2, config.l_step_km):
        block = []
        for n, optimum in optima.items():
            result = optimum.rate_at(budget.at(l_total_km=float(l_km), depth_n=n))
            if config.multiplex:
                result = with_multiplexing(result, config.n_mm, config.n_mem)
            block.append(_rate_row(result, scenario.label))
        # ties go to the smaller depth
        max(block, key=lambda row: (row['rate_hz'], -row['n']))['best'] = True
        rows.extend(block)

    summary = {'scenario': scenario.label}
    if len(optima) > 1:
        curves = {n: _curve(optimum, budget, n) for n, optimum in optima.items()}
        summary['crossovers'] = _format_crossings(crossover_lengths(curves, config.l_min_km, config.l_max_km))
    write_rows(rows, row_model, 'rate-curve', config, summary)


def _intensity_point(x2, kappa_t, eta2, link, kappa_ttot):
    row = {'x2': x2}
    for n in DEPTHS:
        try:
            stats = cw_chain.chain_statistics_cw(n, x2, kappa_t, eta2)
        except RepeaterError as exc:
            logger.debug('x2=%g n=%d: %s', x2, n, exc)
            row[f'F_n{n}'] = row[f'rate_n{n}'] = None
            continue
        depth_link = link.at(depth_n=n)
        generation = min(cw_chain.gen_prob_cw(x2, depth_link.eta_ld, kappa_ttot), 1.0)
        row[f'F_n{n}'] = stats.fidelity
        row[f'rate_n{n}'] = rate(depth_link, [generation, *stats.swap_probs, stats.postselect], stats.fidelity).rate_hz
    return row


@click.command('intensity-sweep')
@config_option('kappa_t', help='acceptance window kappa*T')
@config_option('kappa_ttot', help='repetition window kappa*T_tot')
@config_option('l_km', help='total distance')
@config_option('x2_min')
@config_option('x2_max')
@config_option('x2_points', type=int)
@common_options
@reports_errors
def intensity_sweep(config_path, show_schema, **flags):
    """Continuous drive: fidelity and rate of depths 0-4 against drive strength x^2"""
    config = prepare(config_path, flags)
    row_model = intensity_sweep_row()
    if show_schema:
        click.echo(render_schema(row_model), nl=False)
        return

    kappa_t = config.kappa_t
    if kappa_t is None:
        kappa_t = DEFAULT_WINDOW
        logger.info('no acceptance window given, using kappa*T=%g', kappa_t)
    # a bad window fails here, before any worker starts
    cw_chain.mode_overlap_table(kappa_t)
    link = config.budget.at(l_total_km=config.l_km)
    worker = functools.partial(_intensity_point, kappa_t=kappa_t, eta2=config.eta2, link=link,
                               kappa_ttot=config.kappa_ttot)
    grid = [float(x2) for x2 in np.geomspace(config.x2_min, config.x2_max, config.x2_points)]
    rows = run_map(worker, grid, config.jobs)
    write_rows(rows, row_model, 'intensity-sweep', config, {'kappa_T': kappa_t})
