"""
Errors raised by the simulation modules.

Every error carries the process exit code the management commands use when it
escapes a run: 2 for configuration problems, 3 for exceeded budgets and 4 for
violated numerical invariants.
"""


class SimulationError(Exception):
    default_detail = 'Simulation failed.'
    default_code = 'error'
    exit_code = 1

    def __init__(self, detail=None, code=None):
        self.detail = detail if detail is not None else self.default_detail
        self.code = code if code is not None else self.default_code
        super().__init__(self.detail)

    def __str__(self):
        return str(self.detail)


class ConfigError(SimulationError):
    default_detail = 'Invalid experiment configuration.'
    default_code = 'config'
    exit_code = 2


class DimensionMismatch(ConfigError):
    default_detail = 'Operator dimensions do not match.'
    default_code = 'dimension_mismatch'


class UnknownPreset(ConfigError):
    default_detail = 'Unknown ensemble preset.'
    default_code = 'unknown_preset'


class ExactModeRequired(ConfigError):
    default_detail = 'This operation needs an exact-mode averaging context.'
    default_code = 'exact_mode_required'


class BudgetExceeded(SimulationError):
    default_detail = 'Enumeration budget exceeded.'
    default_code = 'budget'
    exit_code = 3


class DimensionOverflow(BudgetExceeded):
    default_detail = 'Hilbert space dimension exceeds MAX_DIM.'
    default_code = 'dimension_overflow'


class InvariantViolation(SimulationError):
    default_detail = 'A numerical invariant was violated.'
    default_code = 'invariant'
    exit_code = 4


class NonHermitian(InvariantViolation):
    default_detail = 'Operator is not Hermitian within tolerance.'
    default_code = 'non_hermitian'


class NotPSD(InvariantViolation):
    default_detail = 'Operator is not positive semidefinite within tolerance.'
    default_code = 'not_psd'


class NumericalUnderflow(InvariantViolation):
    default_detail = 'Collapse denominator below the underflow threshold.'
    default_code = 'underflow'
