import logging

from ...coding import make_rng
from ...models import Metric, RunMode
from ...typicality import (
    atypical_mass_average,
    atypical_mass_conditional,
    average_typical_projector,
    first_n_below,
    sandwich_check,
)
from ..base import SimulationCommand


class Command(SimulationCommand):
    help = 'Typical projector ranks, atypical masses and sandwich margins over a sweep of block lengths.'

    def add_command_arguments(self, parser):
        parser.add_argument('--samples', type=int, help='Codewords sampled for the conditional mass in --mc mode.')
        parser.add_argument('--epsilon', type=float, help='Report the first n whose masses fall below epsilon.')
        parser.add_argument('--no-sandwich', dest='sandwich', action='store_false', help='Skip the operator check.')

    def simulate(self, config, ensemble, writer):
        delta = config['delta']
        sandwich = self.options.get('sandwich', True)
        average_masses = {}
        conditional_masses = {}
        rows = []
        for n in config['n_list']:
            columns = {'n': n, 'delta': delta, 'chi': ensemble.chi}
            with self.stage('typicality', n=n, delta=delta):
                projector = average_typical_projector(ensemble, n, delta)
                average_masses[n] = atypical_mass_average(ensemble, n, delta)
                conditional = atypical_mass_conditional(
                    ensemble, n, delta,
                    mode=config['mode'],
                    samples=config['samples'],
                    rng=make_rng(config['seed'], task=n),
                )
                conditional_masses[n] = conditional.value
                writer.write(Metric.TYPICAL_RANK, projector.rank, **columns)
                writer.write(Metric.AVG_ATYPICAL_MASS, average_masses[n], **columns)
                writer.write(
                    Metric.COND_ATYPICAL_MASS, conditional.value,
                    stderr=conditional.stderr if config['mode'] == RunMode.MONTECARLO else None,
                    **columns,
                )
                row = {
                    'n': n,
                    'rank': projector.rank,
                    'avg_atypical_mass': average_masses[n],
                    'cond_atypical_mass': conditional.value,
                    'cond_stderr': conditional.stderr,
                }
                if sandwich and not projector.empty:
                    report = sandwich_check(ensemble, n, delta, projector)
                    writer.write(Metric.SANDWICH_LOWER_MARGIN, report.lower_margin, **columns)
                    writer.write(Metric.SANDWICH_UPPER_MARGIN, report.upper_margin, **columns)
                    row['sandwich'] = report
                rows.append(row)

        n0 = None
        if config['epsilon'] is not None:
            worst = {n: max(average_masses[n], conditional_masses[n]) for n in average_masses}
            n0 = first_n_below(worst, config['epsilon'])
            if n0 is None:
                logging.warning(f"No tested n has both atypical masses below epsilon={config['epsilon']}")
            else:
                writer.write(Metric.N0, n0, delta=delta, chi=ensemble.chi, index=repr(config['epsilon']))
        return {'delta': delta, 'rows': rows, 'epsilon': config['epsilon'], 'n0': n0}
