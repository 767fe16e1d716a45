from ...ensembles import ensemble_to_document
from ...models import Metric
from ..base import SimulationCommand


class Command(SimulationCommand):
    help = 'Holevo information, average-state entropy and per-letter entropies of an ensemble.'
    needs_block_length = False

    def simulate(self, config, ensemble, writer):
        with self.stage('capacity', ensemble=config['ensemble']):
            writer.write(Metric.CHI, ensemble.chi, chi=ensemble.chi)
            writer.write(Metric.ENTROPY, ensemble.entropy, chi=ensemble.chi)
            writer.write_many(Metric.LETTER_ENTROPY, ensemble.letter_entropies, chi=ensemble.chi)
        return {
            'ensemble': config['ensemble'],
            'params': config['params'],
            'chi': ensemble.chi,
            'entropy': ensemble.entropy,
            'letter_entropies': ensemble.letter_entropies,
            'probs': ensemble.probs,
            'document': ensemble_to_document(ensemble),
        }
