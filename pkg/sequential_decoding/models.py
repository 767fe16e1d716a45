from django.db import models


class Preset(models.TextChoices):
    TWO_PURE_THETA = 'two-pure-theta', 'Two pure qubit states at angle theta'
    ORTHOGONAL_PAIR = 'orthogonal-pair', 'Orthogonal pure qubit pair'
    UNIFORM_QUBIT_TRINE = 'uniform-qubit-trine', 'Uniform qubit trine'
    DEPOLARIZED_PAIR = 'depolarized-pair', 'Two pure states through a depolarizing channel'
    IDENTICAL_MIXED = 'identical-mixed', 'Two copies of one mixed state'
    DIAGONAL_PAIR = 'diagonal-pair', 'Two commuting diagonal states'


class RunMode(models.TextChoices):
    EXACT = 'exact', 'Exact enumeration'
    MONTECARLO = 'mc', 'Monte Carlo'


class Decoder(models.TextChoices):
    SEQUENTIAL = 'sequential', 'Sequential typical-subspace decoder'
    PGM = 'pgm', 'Pretty good measurement'


class RateVerdict(models.TextChoices):
    BELOW = 'below', 'Rate below chi - 2 delta'
    ABOVE = 'above', 'Rate at or above chi - 2 delta'


class Metric(models.TextChoices):
    CHI = 'chi'
    ENTROPY = 'entropy'
    LETTER_ENTROPY = 'letter_entropy'
    TYPICAL_RANK = 'typical_rank'
    AVG_ATYPICAL_MASS = 'avg_atypical_mass'
    COND_ATYPICAL_MASS = 'cond_atypical_mass'
    SANDWICH_LOWER_MARGIN = 'sandwich_lower_margin'
    SANDWICH_UPPER_MARGIN = 'sandwich_upper_margin'
    N0 = 'n0'
    AVG_ERR_EXACT = 'avg_err_exact'
    AVG_ERR_MC = 'avg_err_mc'
    AVG_ERR_BRUTEFORCE = 'avg_err_bruteforce'
    PGM_ERR_MC = 'pgm_err_mc'
    PGM_REFERENCE_BOUND = 'pgm_reference_bound'
    CODE_ERR = 'code_err'
    F_Z = 'f_z'
    A_EXACT = 'A_exact'
    A_EXPANSION = 'A_expansion'
    A_LOWER = 'A_lower'
    SUCCESS_LOWER_BOUND = 'success_lower_bound'
    LOG_Y = 'log_Y'
    RATE_BELOW_THRESHOLD = 'rate_below_threshold'
    APPENDIX_B_W0_MARGIN = 'appendix_b_w0_margin'
    APPENDIX_B_PW0P_MARGIN = 'appendix_b_pw0p_margin'
    APPENDIX_B_Q_MARGIN = 'appendix_b_q_margin'
    MONOTONICITY = 'monotonicity'
    TRAJECTORY_FREQUENCY = 'trajectory_frequency'
    POVM_PROBABILITY = 'povm_probability'
    Z_SCORE = 'z_score'
    UNDERFLOW_RESAMPLES = 'underflow_resamples'
