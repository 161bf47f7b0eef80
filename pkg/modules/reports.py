"""
Report Rendering
JSON and CSV output for the command-line front end.
"""

import csv
import io
import json
import logging
from pathlib import Path

# Import configuration
try:
    from config import SCHEMA_VERSION
except ImportError:
    SCHEMA_VERSION = 1

logger = logging.getLogger(__name__)


def with_schema(command, body):
    """Wrap a report body with the schema version and command name."""
    return {'schema_version': SCHEMA_VERSION, 'command': command, **body}


def render_json(report):
    return json.dumps(report, sort_keys=True, indent=2) + '\n'


def render_csv(rows, columns):
    """Render a list of dict rows; only `columns` are written, in that order."""
    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=columns, extrasaction='ignore', lineterminator='\n')
    writer.writeheader()
    for row in rows:
        writer.writerow({key: _cell(row.get(key)) for key in columns})
    return buffer.getvalue()


def _cell(value):
    if isinstance(value, float):
        return repr(value)
    return value


def write_output(text, out_path=None):
    """Write to `out_path` if given; returns the text for echoing otherwise."""
    if out_path is None:
        return text
    path = Path(out_path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding='utf-8')
    logger.info("wrote %d bytes to %s", len(text), path)
    return None
