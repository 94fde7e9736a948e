"""
Export Helpers
Writes command rows as CSV with a provenance header or as JSON, and prints row schemas
"""

import csv
import json
import logging
import math
import os
from io import StringIO

import click
from jinja2 import Environment, FileSystemLoader, StrictUndefined

from config import TOOL_NAME, TOOL_VERSION

logger = logging.getLogger(__name__)

TEMPLATE_DIR = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), 'templates')


def cell(value):
    """Text form of one value; identical inputs always give identical text"""
    if value is None:
        return ''
    if isinstance(value, bool):
        return 'true' if value else 'false'
    if isinstance(value, float):
        if math.isinf(value):
            return 'inf' if value > 0 else '-inf'
        return format(value, '.10g')
    if isinstance(value, (list, tuple)):
        return ','.join(cell(item) for item in value)
    return str(value)


def _json_value(value):
    if isinstance(value, float) and not math.isfinite(value):
        return cell(value)
    if isinstance(value, (list, tuple)):
        return [_json_value(item) for item in value]
    if isinstance(value, dict):
        return {key: _json_value(item) for key, item in value.items()}
    return value


def _environment():
    env = Environment(loader=FileSystemLoader(TEMPLATE_DIR), undefined=StrictUndefined,
                      trim_blocks=True, keep_trailing_newline=True, autoescape=False)
    env.filters['cell'] = cell
    return env


def provenance_header(command, config, summary=None):
    return _environment().get_template('provenance.txt').render(
        tool=TOOL_NAME, version=TOOL_VERSION, command=command,
        config=list(config.resolved().items()), summary=sorted((summary or {}).items()),
    )


def render_csv(rows, row_model, command, config, summary=None):
    output = StringIO()
    output.write(provenance_header(command, config, summary))
    writer = csv.writer(output, lineterminator='\n')

    # Header
    fields = list(row_model.model_fields)
    writer.writerow(fields)

    # Data
    for row in rows:
        writer.writerow([cell(row.get(name)) for name in fields])
    return output.getvalue()


def render_json(rows, row_model, command, config, summary=None):
    meta = {
        'tool': TOOL_NAME,
        'version': TOOL_VERSION,
        'command': command,
        'config': config.resolved(),
        'summary': dict(sorted((summary or {}).items())),
        'columns': list(row_model.model_fields),
    }
    document = {'meta': _json_value(meta), 'rows': [_json_value(row) for row in rows]}
    return json.dumps(document, indent=2, allow_nan=False) + '\n'


def validate_rows(rows, row_model):
    """Every row through its pydantic model; missing optional cells become None"""
    return [row_model.model_validate(row).model_dump() for row in rows]


def write_rows(rows, row_model, command, config, summary=None):
    rows = validate_rows(rows, row_model)
    if config.format == 'json':
        text = render_json(rows, row_model, command, config, summary)
    else:
        text = render_csv(rows, row_model, command, config, summary)
    target = config.output or '-'
    with click.open_file(target, 'w', atomic=target != '-') as handle:
        handle.write(text)
    logger.info('%s: wrote %d rows to %s', command, len(rows), 'stdout' if target == '-' else target)
    return len(rows)


def render_schema(row_model):
    return _environment().get_template('schema.txt').render(
        name=row_model.__name__,
        description=(row_model.__doc__ or '').strip().splitlines()[0] if row_model.__doc__ else '',
        columns=list(row_model.model_fields),
        schema=json.dumps(row_model.model_json_schema(), indent=2, sort_keys=True),
    )
