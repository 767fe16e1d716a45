"""
Django settings for the holevo_lab project.

The project has no web surface: it hosts the sequential_decoding app, whose
management commands drive the simulations. Values can be overridden from the
environment or a .env file (python-decouple).
"""

from pathlib import Path
from decouple import config

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent

SECRET_KEY = config('SECRET_KEY', default='holevo-lab-local-only')

DEBUG = config('DEBUG', default=False, cast=bool)

ALLOWED_HOSTS = []

INSTALLED_APPS = [
    'rest_framework',
    'sequential_decoding',
]

# Simulations never touch a database.
DATABASES = {}

LANGUAGE_CODE = 'en-us'

TIME_ZONE = 'UTC'

USE_I18N = False

USE_TZ = True

DEFAULT_AUTO_FIELD = 'django.db.models.BigAutoField'

# Numerical tolerances and budgets, read through sequential_decoding.conf.sim_settings
SEQUENTIAL_DECODING = {
    'TOL_HERM': config('SEQDEC_TOL_HERM', default=1e-10, cast=float),
    'TOL_PSD': config('SEQDEC_TOL_PSD', default=1e-9, cast=float),
    'TOL_TRACE': config('SEQDEC_TOL_TRACE', default=1e-9, cast=float),
    'TOL_PROJECTOR': config('SEQDEC_TOL_PROJECTOR', default=1e-8, cast=float),
    'TOL_COMPLETENESS': config('SEQDEC_TOL_COMPLETENESS', default=1e-8, cast=float),
    'PINV_CUTOFF': config('SEQDEC_PINV_CUTOFF', default=1e-10, cast=float),
    'ZERO_EIGENVALUE': config('SEQDEC_ZERO_EIGENVALUE', default=1e-12, cast=float),
    'MAX_DIM': config('SEQDEC_MAX_DIM', default=4096, cast=int),
    'ENUMERATION_BUDGET': config('SEQDEC_ENUMERATION_BUDGET', default=10**6, cast=int),
    'EXACT_MAX_CODEWORDS': config('SEQDEC_EXACT_MAX_CODEWORDS', default=64, cast=int),
    'UNDERFLOW_THRESHOLD': config('SEQDEC_UNDERFLOW_THRESHOLD', default=1e-14, cast=float),
    'EXPANSION_MAX_N': config('SEQDEC_EXPANSION_MAX_N', default=20, cast=int),
    'MONOTONICITY_SLACK': config('SEQDEC_MONOTONICITY_SLACK', default=1e-10, cast=float),
}

# Progress goes to standard error, results only to the output files
LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'progress': {
            'format': '{asctime} {levelname} {name}: {message}',
            'style': '{',
        },
    },
    'handlers': {
        'stderr': {
            'class': 'logging.StreamHandler',
            'stream': 'ext://sys.stderr',
            'formatter': 'progress',
        },
    },
    'root': {
        'handlers': ['stderr'],
        'level': config('LOG_LEVEL', default='INFO'),
    },
}

# REST framework is used only for serializers and JSON rendering; reports may carry inf
REST_FRAMEWORK = {
    'STRICT_JSON': False,
    'COERCE_DECIMAL_TO_STRING': False,
    'DEFAULT_AUTHENTICATION_CLASSES': [],
    'DEFAULT_PERMISSION_CLASSES': [],
    'UNAUTHENTICATED_USER': None,
}
