from ...analysis import rate_of
from ...coding import codeword_state, make_rng, sample_code
from ...decoding import build_povm, histogram_z_scores, run_trajectories
from ...exceptions import ConfigError
from ...models import Metric
from ...serializers import ExperimentConfigSerializer
from ...typicality import TypicalProjectorCache
from ..base import SimulationCommand, load_codebook


class Command(SimulationCommand):
    help = 'Collapse-trajectory histograms of the measurement protocol against the exact POVM probabilities.'
    needs_code_size = True

    def add_command_arguments(self, parser):
        self.add_code_size_arguments(parser)
        parser.add_argument('--samples', type=int, help='Trajectories per sent codeword.')
        parser.add_argument('--sent', type=int, help='1-based code position to send; all positions when omitted.')
        parser.add_argument('--code-file', help='JSON array of codewords; sampled from the seed when omitted.')
        parser.add_argument('--decoder', help='sequential (default) or pgm.')

    def handle(self, *args, **options):
        # the code file fixes N, so neither --N nor --rate is needed with it
        if options.get('code_file'):
            self.needs_code_size = False
        return super().handle(*args, **options)

    def simulate(self, config, ensemble, writer):
        delta = config['delta']
        trials = config['samples']
        fixed = load_codebook(config['code_file']) if config['code_file'] else None
        if fixed is not None:
            fixed.check_alphabet(ensemble.alphabet_size)
        histograms = []
        for n in config['n_list']:
            if fixed is not None and fixed.n != n:
                raise ConfigError(f"Codebook has block length {fixed.n}, run asked for n={n}.")
            rng = make_rng(config['seed'], task=n)
            code = fixed or sample_code(ensemble.probs, n, ExperimentConfigSerializer.code_size(config, n), rng)
            N = code.size
            if config['sent'] is not None and config['sent'] > N:
                raise ConfigError(f"--sent {config['sent']} is beyond the {N} codewords.")
            positions = [config['sent']] if config['sent'] is not None else list(range(1, N + 1))

            cache = TypicalProjectorCache(ensemble, n, delta)
            povm = build_povm(ensemble, code, delta, config['decoder'], cache)
            columns = {'n': n, 'delta': delta, 'N': N, 'R': rate_of(N, n), 'chi': ensemble.chi}
            for sent in positions:
                with self.stage('trajectories', n=n, sent=sent, trials=trials):
                    histogram = run_trajectories(
                        ensemble, code, sent, delta, trials, rng, decoder=config['decoder'], cache=cache,
                    )
                exact = povm.probabilities(codeword_state(ensemble, code[sent - 1]))
                z = histogram_z_scores(histogram.counts, exact, trials)
                for outcome in range(N + 1):
                    label = f"{sent}:{outcome}"
                    writer.write(Metric.TRAJECTORY_FREQUENCY, histogram.frequencies[outcome], index=label, **columns)
                    writer.write(Metric.POVM_PROBABILITY, exact[outcome], index=label, **columns)
                    writer.write(Metric.Z_SCORE, z[outcome], index=label, **columns)
                writer.write(Metric.UNDERFLOW_RESAMPLES, histogram.resamples, index=str(sent), **columns)
                histograms.append({
                    'n': n,
                    'code': code.to_list(),
                    'sent': sent,
                    'counts': histogram.counts,
                    'povm_probabilities': exact,
                    'z_scores': z,
                    'resamples': histogram.resamples,
                })
        return {'delta': delta, 'trials': trials, 'decoder': config['decoder'], 'histograms': histograms}
