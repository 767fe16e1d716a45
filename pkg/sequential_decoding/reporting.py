"""
CSV result rows, JSON reports and run manifests.

Rows go through ``ResultRowSerializer`` before they are written, so the
column schema is fixed and unknown metric names never reach a file.
"""
import csv
import dataclasses
from importlib import metadata
import logging
from pathlib import Path
import time

import numpy as np
from rest_framework.renderers import JSONRenderer

from .exceptions import ConfigError
from .serializers import RESULT_COLUMNS, ResultRowSerializer

PACKAGES = ('holevo-lab', 'django', 'djangorestframework', 'numpy', 'scipy', 'python-decouple')


class ResultWriter:
    """Append-only CSV writer; the header is written once, before the first row."""

    def __init__(self, stream, experiment=''):
        self.stream = stream
        self.experiment = experiment
        self.rows_written = 0
        self.started = time.perf_counter()
        self._writer = csv.DictWriter(stream, fieldnames=RESULT_COLUMNS, lineterminator='\n')
        self._header_written = False

    def write(self, metric, value, **columns):
        row = {'experiment': self.experiment, 'metric': metric, 'value': value, **columns}
        row.setdefault('wall_time', round(time.perf_counter() - self.started, 6))
        serializer = ResultRowSerializer(data=row)
        if not serializer.is_valid():
            raise ConfigError(f"Rejected result row {row}: {serializer.errors}", code='result_row')
        if not self._header_written:
            self._writer.writeheader()
            self._header_written = True
        self._writer.writerow({key: '' if value is None else value for key, value in serializer.data.items()})
        self.rows_written += 1

    def write_many(self, metric, values, **columns):
        for index, value in enumerate(values):
            self.write(metric, value, index=str(index), **columns)


def _plain(value):
    if dataclasses.is_dataclass(value) and not isinstance(value, type):
        return {key: _plain(item) for key, item in dataclasses.asdict(value).items()}
    if isinstance(value, dict):
        return {str(key): _plain(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(item) for item in value]
    if isinstance(value, np.ndarray):
        return _plain(value.tolist())
    if isinstance(value, complex):
        return [value.real, value.imag]
    if isinstance(value, np.generic):
        return value.item()
    return value


def render_json(data):
    return JSONRenderer().render(_plain(data), renderer_context={'indent': 2})


def write_json(path, data):
    path = Path(path)
    path.write_bytes(render_json(data) + b'\n')
    logging.info(f"Wrote {path}")


def package_versions():
    versions = {}
    for name in PACKAGES:
        try:
            versions[name] = metadata.version(name)
        except metadata.PackageNotFoundError:
            versions[name] = None
    return versions


def manifest_path(out):
    out = Path(out)
    return out.with_name(out.name + '.manifest.json')


def build_manifest(command, config):
    """Everything needed to rerun a command: its name, the validated config and package versions."""
    return {
        'command': command,
        'config': dict(config),
        'seed': config.get('seed'),
        'versions': package_versions(),
        'columns': RESULT_COLUMNS,
    }
