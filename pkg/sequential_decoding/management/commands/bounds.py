import logging

from ...analysis import AveragingContext, build_bound_report
from ...models import Metric, RateVerdict
from ...serializers import ExperimentConfigSerializer
from ..base import SimulationCommand


class Command(SimulationCommand):
    help = 'f_z sequence, A and its lower bound, the Y threshold, operator orderings and monotonicity.'
    needs_code_size = True

    def add_command_arguments(self, parser):
        self.add_code_size_arguments(parser)
        parser.add_argument('--zmax', type=int, help='Largest z of f_z to report.')

    def simulate(self, config, ensemble, writer):
        delta = config['delta']
        reports = []
        for n in config['n_list']:
            N = ExperimentConfigSerializer.code_size(config, n)
            with self.stage('bounds', n=n, N=N, delta=delta):
                ctx = AveragingContext.build(ensemble, n, delta, exact=True)
                report = build_bound_report(ctx, N, zmax=config['zmax'])
            if report.vacuous:
                logging.warning(f"Bound vacuous at n={n}: delta={delta} >= chi/2={ensemble.chi / 2:.6f}")

            columns = {'n': n, 'delta': delta, 'N': N, 'R': report.rate, 'chi': ensemble.chi}
            writer.write_many(Metric.F_Z, report.f, **columns)
            writer.write(Metric.A_EXACT, report.A_exact, **columns)
            if report.A_expansion is not None:
                writer.write(Metric.A_EXPANSION, report.A_expansion, **columns)
            writer.write(Metric.A_LOWER, report.A_lower, **columns)
            writer.write(Metric.SUCCESS_LOWER_BOUND, report.success_lower_bound, **columns)
            writer.write(Metric.LOG_Y, report.log_Y, **columns)
            writer.write(
                Metric.RATE_BELOW_THRESHOLD, float(report.verdict == RateVerdict.BELOW),
                index=report.verdict, **columns,
            )
            writer.write(Metric.APPENDIX_B_W0_MARGIN, report.ordering.w0_margin, **columns)
            writer.write(Metric.APPENDIX_B_PW0P_MARGIN, report.ordering.pw0p_margin, **columns)
            writer.write(Metric.APPENDIX_B_Q_MARGIN, report.ordering.q_margin, **columns)
            writer.write_many(Metric.MONOTONICITY, report.monotonicity, **columns)
            writer.write(Metric.AVG_ERR_EXACT, report.avg_err_exact, **columns)
            reports.append(report)
        return {'delta': delta, 'reports': reports}
