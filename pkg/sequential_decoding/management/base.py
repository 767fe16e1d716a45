"""
Shared plumbing for the simulation commands.

Option values come from three places, highest precedence first: command-line
flags, the ``--config`` file (flat ``key=value`` lines read with
python-decouple, keys are the long flag names with underscores), and the
defaults of ``ExperimentConfigSerializer``.
"""
from contextlib import contextmanager
import json
import logging
from pathlib import Path
import sys
import time

from decouple import Config, Csv, RepositoryEnv
from django.core.management.base import BaseCommand, CommandError

from ..conf import sim_settings
from ..ensembles import preset_ensemble
from ..exceptions import ConfigError, SimulationError
from ..models import RunMode
from ..reporting import ResultWriter, build_manifest, manifest_path, write_json
from ..serializers import CodebookSerializer, EnsembleDocumentSerializer, ExperimentConfigSerializer
from ..signals import stage_finished, stage_started

# config-file keys and how to cast them
CONFIG_KEYS = {
    'experiment': str,
    'ensemble': str,
    'params': Csv(float),
    'theta': float,
    'n': int,
    'n_list': Csv(int),
    'delta': float,
    'N': int,
    'rate': float,
    'codes': int,
    'samples': int,
    'seed': int,
    'mode': str,
    'compare_pgm': bool,
    'bruteforce': bool,
    'zmax': int,
    'epsilon': float,
    'per_code': bool,
    'sent': int,
    'code_file': str,
    'decoder': str,
    'out': str,
    'report': str,
    'tol_psd': float,
}


def read_config_file(path):
    """Only the file counts here; process environment variables never displace its keys."""
    if not Path(path).is_file():
        raise ConfigError(f"Config file {path} does not exist.")
    repository = RepositoryEnv(path)
    config = Config(repository)
    values = {}
    for key, cast in CONFIG_KEYS.items():
        if key not in repository.data:
            continue
        if cast is bool:
            cast = config._cast_boolean
        try:
            values[key] = cast(repository.data[key])
        except ValueError as exc:
            raise ConfigError(f"Bad value for '{key}' in {path}: {exc}")
    return values


def _load_json(path, what):
    try:
        with open(path) as handle:
            return json.load(handle)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"Cannot read {what} file {path}: {exc}")


def load_ensemble(config):
    """A preset name, or the path of an ensemble JSON document."""
    name = config['ensemble']
    if name.endswith('.json'):
        serializer = EnsembleDocumentSerializer(data=_load_json(name, 'ensemble'))
        if not serializer.is_valid():
            raise ConfigError(f"Invalid ensemble document {name}: {serializer.errors}")
        return serializer.save()
    return preset_ensemble(name, config['params'])


def load_codebook(path):
    serializer = CodebookSerializer(data={'entries': _load_json(path, 'codebook')})
    if not serializer.is_valid():
        raise ConfigError(f"Invalid codebook {path}: {serializer.errors}")
    return serializer.save()


class SimulationCommand(BaseCommand):
    """Base for the simulation commands: parses and validates the experiment config,
    opens the result stream and maps simulation errors to exit codes."""

    needs_block_length = True
    needs_code_size = False

    def create_parser(self, prog_name, subcommand, **kwargs):
        parser = super().create_parser(prog_name, subcommand, **kwargs)
        exit_with_usage = parser.error

        def error(message):
            # bad flags are configuration errors, also when the command runs through call_command
            if parser.called_from_command_line:
                exit_with_usage(message)
            raise CommandError(f"Error: {message}", returncode=ConfigError.exit_code)

        parser.error = error
        return parser

    def add_arguments(self, parser):
        parser.add_argument('--config', help='Flat key=value experiment file; flags override it.')
        parser.add_argument('--experiment', help='Experiment id written in every result row.')
        parser.add_argument('--ensemble', help='Preset name or path to an ensemble .json document.')
        parser.add_argument('--theta', type=float, help='Angle parameter of two-pure-theta / depolarized-pair.')
        parser.add_argument('--params', type=Csv(float), help='Comma-separated preset parameters.')
        parser.add_argument('--n', type=int, help='Single block length.')
        parser.add_argument('--n-list', type=Csv(int), help='Comma-separated block lengths.')
        parser.add_argument('--delta', type=float)
        parser.add_argument('--seed', type=int)
        parser.add_argument('--out', help='CSV output path; standard output when omitted.')
        parser.add_argument('--report', help='Also write a JSON report to this path.')
        parser.add_argument('--tol-psd', type=float, help='Override the PSD tolerance.')
        mode = parser.add_mutually_exclusive_group()
        mode.add_argument('--exact', dest='mode', action='store_const', const=RunMode.EXACT)
        mode.add_argument('--mc', dest='mode', action='store_const', const=RunMode.MONTECARLO)
        self.add_command_arguments(parser)

    def add_command_arguments(self, parser):
        pass

    def add_code_size_arguments(self, parser):
        parser.add_argument('--N', type=int, help='Number of codewords.')
        parser.add_argument('--rate', type=float, help='Rate R; N = round(2^{nR}) per block length.')

    def collect_config(self, options):
        data = read_config_file(options['config']) if options.get('config') else {}
        for key in CONFIG_KEYS:
            if options.get(key) is not None:
                data[key] = options[key]
        # a flag also displaces the file value it competes with
        for given, other in (('N', 'rate'), ('rate', 'N'), ('n_list', 'n')):
            if options.get(given) is not None and options.get(other) is None:
                data.pop(other, None)
        if 'n' in data:
            data['n_list'] = [data.pop('n')]
        serializer = ExperimentConfigSerializer(
            data=data,
            context={'needs_block_length': self.needs_block_length, 'needs_code_size': self.needs_code_size},
        )
        if not serializer.is_valid():
            raise ConfigError(f"Invalid experiment configuration: {serializer.errors}")
        return serializer.validated_data

    @contextmanager
    def stage(self, name, **details):
        stage_started.send(sender=self.__class__, stage=name, **details)
        started = time.perf_counter()
        yield
        stage_finished.send(sender=self.__class__, stage=name, elapsed=time.perf_counter() - started)

    def handle(self, *args, **options):
        self.options = options
        try:
            config = self.collect_config(options)
            overrides = {'TOL_PSD': config['tol_psd']} if config.get('tol_psd') is not None else {}
            with sim_settings.override(**overrides):
                self.run_experiment(config)
        except SimulationError as exc:
            logging.error(f"{self.command_name} failed: {exc}")
            raise CommandError(str(exc), returncode=exc.exit_code)

    def run_experiment(self, config):
        ensemble = load_ensemble(config)
        if config['out']:
            Path(config['out']).parent.mkdir(parents=True, exist_ok=True)
            with open(config['out'], 'w', newline='') as stream:
                report = self.simulate(config, ensemble, ResultWriter(stream, config['experiment']))
            write_json(manifest_path(config['out']), build_manifest(self.command_name, config))
        else:
            stream = self.stdout if self.stdout is not None else sys.stdout
            report = self.simulate(config, ensemble, ResultWriter(stream, config['experiment']))
        if config['report']:
            write_json(config['report'], report)

    @property
    def command_name(self):
        return self.__class__.__module__.rsplit('.', 1)[-1]

    def simulate(self, config, ensemble, writer):
        """Write result rows for one run and return a JSON-able report."""
        raise NotImplementedError
