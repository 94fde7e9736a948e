"""
Command Helpers
Shared options, configuration loading and error reporting for every subcommand
"""

import logging
import sys
from functools import wraps

import click

from config import load_config
from models.errors import RepeaterError
from models.models import Scenario

logger = logging.getLogger(__name__)

LOG_LEVELS = ('DEBUG', 'INFO', 'WARNING', 'ERROR')
LOG_FORMAT = '%(levelname)s %(name)s: %(message)s'


def configure_logging(level):
    """One stderr handler on the root logger; stdout is reserved for data"""
    logging.basicConfig(level=getattr(logging, level.upper()), format=LOG_FORMAT, stream=sys.stderr, force=True)


def config_option(name, type=float, help=None, **kwargs):
    """Flag named after a RunConfig field; None means the lower layers decide"""
    return click.option('--' + name.replace('_', '-'), name, type=type, default=None, help=help, **kwargs)


def common_options(fn):
    """Options every subcommand accepts"""
    options = [
        click.option('--config', 'config_path', type=click.Path(exists=True, dir_okay=False), default=None,
                     help='key=value settings file'),
        click.option('--output', '-o', 'output', default=None, help='output file (default stdout)'),
        click.option('--format', 'format', type=click.Choice(['csv', 'json']), default=None),
        click.option('--jobs', '-j', 'jobs', type=int, default=None, help='worker processes'),
        click.option('--schema', 'show_schema', is_flag=True, help='print the row schema and exit'),
        click.option('--log-level', 'log_level', type=click.Choice(LOG_LEVELS, case_sensitive=False), default=None),
        config_option('f_target', help='target end-to-end fidelity'),
        config_option('eta_d', help='detector efficiency'),
        config_option('eta_m', help='memory efficiency'),
        config_option('l_att_km', help='fiber attenuation length'),
        config_option('attenuation', type=click.Choice(['link', 'half_link']),
                      help='fiber loss over the whole elementary link or half of it'),
        config_option('c_km_s', help='signal speed in fiber'),
    ]
    for option in reversed(options):
        fn = option(fn)
    return fn


def prepare(config_path, flags):
    """Resolved configuration for one invocation, with logging set up from it"""
    config = load_config(config_path, flags)
    configure_logging(config.log_level)
    return config


def reports_errors(fn):
    """Model errors become a message on stderr and the error's exit code"""
    @wraps(fn)
    def decorated_function(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except RepeaterError as exc:
            logger.debug('command failed', exc_info=True)
            click.echo(f'Error: {exc}', err=True)
            click.get_current_context().exit(exc.exit_code)
    return decorated_function


def scenario_for(config):
    """Scenario described by the drive settings of a configuration"""
    if config.scenario == 'cw':
        return Scenario.cw(config.kappa_ttot)
    if config.kappa_sigma is not None:
        return Scenario.pulsed(kappa_sigma=config.kappa_sigma)
    return Scenario.pulsed(config.a)


def register_commands(group):
    from commands.solve import solve
    from commands.sweeps import intensity_sweep, p1_targets, purity_sweep, rate_curve
    from commands.tables import table1, table2

    for command in (purity_sweep, p1_targets, rate_curve, intensity_sweep, table1, table2, solve):
        group.add_command(command)
    return group
