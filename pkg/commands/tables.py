"""
Table Commands
Optimal pulse widths per intensity cap and optimal acceptance windows, with the distance range of each depth
"""

import functools
import logging

import click

from commands import common_options, config_option, prepare, reports_errors
from commands.export import render_schema, write_rows
from commands.schemas import Table1Row, Table2Row
from commands.workers import run_map
from models.errors import InfeasibleError
from models.optimizer import build_table

logger = logging.getLogger(__name__)


def _pulsed_block(cap, f_target, budget, depths):
    try:
        return build_table('pulsed', f_target, budget, caps=(cap,), depths=depths)
    except InfeasibleError as exc:
        logger.warning('a=%g: %s', cap, exc)
        label = 'inf' if cap == float('inf') else cap
        return [{'scenario': f'pulsed(a={cap:g})', 'n': n, 'a': label, 'note': 'infeasible'} for n in depths]


def _require_feasible(rows):
    if rows and all(row.get('note') == 'infeasible' for row in rows):
        raise InfeasibleError('no row of the table reaches the target fidelity')


@click.command('table1')
@config_option('caps', type=str, help='comma-separated intensity caps; inf means no cap')
@config_option('max_depth', type=int)
@common_options
@reports_errors
def table1(config_path, show_schema, **flags):
    """Optimal pulse width and target pair probability for every cap and depth"""
    config = prepare(config_path, flags)
    if show_schema:
        click.echo(render_schema(Table1Row), nl=False)
        return

    depths = tuple(range(config.max_depth + 1))
    worker = functools.partial(_pulsed_block, f_target=config.f_target, budget=config.budget, depths=depths)
    blocks = run_map(worker, config.caps, config.jobs)
    rows = [row for block in blocks for row in block]
    _require_feasible(rows)
    write_rows(rows, Table1Row, 'table1', config)


@click.command('table2')
@config_option('kappa_ttot', help='repetition window kappa*T_tot')
@config_option('max_depth', type=int)
@common_options
@reports_errors
def table2(config_path, show_schema, **flags):
    """Optimal acceptance window and drive strength for every depth under continuous drive"""
    config = prepare(config_path, flags)
    if show_schema:
        click.echo(render_schema(Table2Row), nl=False)
        return

    depths = tuple(range(config.max_depth + 1))
    rows = build_table('cw', config.f_target, config.budget, kappa_ttot=config.kappa_ttot, depths=depths)
    _require_feasible(rows)
    write_rows(rows, Table2Row, 'table2', config)
