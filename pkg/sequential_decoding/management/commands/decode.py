import logging

from ...analysis import (
    AveragingContext,
    average_error_bruteforce,
    average_error_exact,
    average_error_mc,
    epsilon_report,
    pgm_reference_bound,
    rate_of,
)
from ...coding import make_rng
from ...conf import sim_settings
from ...models import Decoder, Metric, RunMode
from ...serializers import ExperimentConfigSerializer
from ...typicality import TypicalProjectorCache
from ..base import SimulationCommand


class Command(SimulationCommand):
    help = 'Random-code average error of the sequential decoder, exactly or by sampling codes.'
    needs_code_size = True

    def add_command_arguments(self, parser):
        self.add_code_size_arguments(parser)
        parser.add_argument('--codes', type=int, help='Codes sampled in Monte Carlo mode.')
        parser.add_argument('--samples', type=int, help='Codewords sampled for the conditional mass in --mc mode.')
        parser.add_argument('--compare-pgm', action='store_true', default=None,
                            help='Also score the pretty good measurement on the same codes.')
        parser.add_argument('--bruteforce', action='store_true', default=None,
                            help='Also average over every enumerated code (small instances only).')
        parser.add_argument('--per-code', action='store_true', default=None,
                            help='Write the error of every sampled code.')

    def simulate(self, config, ensemble, writer):
        delta = config['delta']
        rows = []
        for n in config['n_list']:
            N = ExperimentConfigSerializer.code_size(config, n)
            columns = {'n': n, 'delta': delta, 'N': N, 'R': rate_of(N, n), 'chi': ensemble.chi}
            row = {'n': n, 'N': N}
            cache = TypicalProjectorCache(ensemble, n, delta)

            if config['mode'] == RunMode.EXACT:
                with self.stage('decode-exact', n=n, N=N):
                    ctx = AveragingContext.build(ensemble, n, delta, exact=True, cache=cache)
                    row['avg_err_exact'] = average_error_exact(ctx, N)
                    writer.write(Metric.AVG_ERR_EXACT, row['avg_err_exact'], **columns)
            else:
                with self.stage('decode-mc', n=n, N=N, codes=config['codes']):
                    estimate = average_error_mc(
                        ensemble, n, delta, N, config['codes'], make_rng(config['seed'], task=n), cache=cache,
                    )
                    row['avg_err_mc'] = estimate
                    writer.write(Metric.AVG_ERR_MC, estimate.mean, stderr=estimate.stderr, **columns)
                    if config['per_code']:
                        writer.write_many(Metric.CODE_ERR, estimate.values, **columns)

            if config['bruteforce']:
                with self.stage('decode-bruteforce', n=n, N=N):
                    row['avg_err_bruteforce'] = average_error_bruteforce(ensemble, n, delta, N, cache=cache)
                    writer.write(Metric.AVG_ERR_BRUTEFORCE, row['avg_err_bruteforce'], **columns)

            if config['compare_pgm']:
                with self.stage('decode-pgm', n=n, N=N, codes=config['codes']):
                    estimate = average_error_mc(
                        ensemble, n, delta, N, config['codes'], make_rng(config['seed'], task=n),
                        decoder=Decoder.PGM, cache=cache,
                    )
                    eps = epsilon_report(
                        ensemble, n, delta,
                        mode=self.mass_mode(ensemble, n, config),
                        samples=config['samples'],
                        rng=make_rng(config['seed'], task=n),
                    ).epsilon
                    reference = pgm_reference_bound(eps, N, n, ensemble.chi - 2 * delta)
                    row['pgm_err_mc'] = estimate
                    row['pgm_reference_bound'] = reference
                    writer.write(Metric.PGM_ERR_MC, estimate.mean, stderr=estimate.stderr, **columns)
                    writer.write(Metric.PGM_REFERENCE_BOUND, reference, **columns)
            rows.append(row)

        if config['per_code'] and config['mode'] == RunMode.EXACT:
            logging.warning("--per-code applies to Monte Carlo runs only")
        return {'delta': delta, 'mode': config['mode'], 'rows': rows}

    @staticmethod
    def mass_mode(ensemble, n, config):
        """Exact conditional mass when the codeword enumeration fits the budget."""
        if config['mode'] == RunMode.EXACT and ensemble.alphabet_size ** n <= sim_settings.ENUMERATION_BUDGET:
            return RunMode.EXACT
        return RunMode.MONTECARLO
