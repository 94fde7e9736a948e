"""
Solve Command
One inversion of the end-to-end fidelity for the drive parameter that reaches the target
"""

import logging

import click

from commands import common_options, config_option, prepare, reports_errors, scenario_for
from commands.export import render_schema, write_rows
from commands.schemas import SolveRow
from models.models import ScenarioKind
from models.optimizer import depth_optimum, solve_target_x

logger = logging.getLogger(__name__)


def solve_row(config):
    scenario = scenario_for(config)
    n = config.depth
    row = {'scenario': scenario.label, 'n': n}
    if scenario.kind is ScenarioKind.CW and config.kappa_t is not None:
        solve = solve_target_x(config.f_target, n, config.kappa_t, config.eta2)
        row['kappa_T'] = config.kappa_t
    else:
        optimum = depth_optimum(scenario, n, config.f_target, config.eta2)
        solve = optimum.solve
        row['kappa_sigma'] = optimum.kappa_sigma
        row['kappa_T'] = optimum.kappa_t
        if optimum.kappa_t is None:
            row['purity'] = optimum.purity
    row.update({
        'target_f': solve.target_f,
        'param_name': solve.param_name,
        'param_value': solve.param_value,
        'achieved_f': solve.achieved_f,
        'iterations': solve.iterations,
        'bracket_lo': solve.bracket[0],
        'bracket_hi': solve.bracket[1],
        'clamped': bool(solve.notes.get('clamped')),
    })
    logger.info('%s n=%d: %s', scenario.label, n, solve)
    return row


@click.command('solve')
@config_option('scenario', type=click.Choice(['pulsed', 'cw']))
@config_option('depth', type=int, help='swap depth n')
@config_option('a', help='peak intensity cap relative to threshold (pulsed)')
@config_option('kappa_sigma', help='fixed pulse width (pulsed)')
@config_option('kappa_t', help='fixed acceptance window; optimised when absent (cw)')
@config_option('kappa_ttot', help='repetition window kappa*T_tot (cw)')
@common_options
@reports_errors
def solve(config_path, show_schema, **flags):
    """Drive parameter at which a depth-n chain reaches the target fidelity"""
    config = prepare(config_path, flags)
    if show_schema:
        click.echo(render_schema(SolveRow), nl=False)
        return
    write_rows([solve_row(config)], SolveRow, 'solve', config)
