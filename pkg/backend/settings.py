"""
Django settings for the fidgap project.

The project has no HTTP surface and no database; Django provides the
management-command CLI, the logging configuration and the test runner.
"""

from pathlib import Path
import os

BASE_DIR = Path(__file__).resolve().parent.parent

SECRET_KEY = os.environ.get('SESSION_SECRET', 'django-insecure-dev-key-change-in-production')

DEBUG = False

ALLOWED_HOSTS = []

INSTALLED_APPS = [
    'fidgap',
]

DATABASES = {}

LANGUAGE_CODE = 'en-us'
TIME_ZONE = 'UTC'
USE_I18N = False
USE_TZ = True

# FIDGAP_LOG controls verbosity only; it never changes results.
FIDGAP_LOG_LEVEL = os.environ.get('FIDGAP_LOG', 'WARNING').upper()

LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'plain': {
            'format': '%(levelname)s %(name)s: %(message)s',
        },
    },
    'handlers': {
        'stderr': {
            'class': 'logging.StreamHandler',
            'stream': 'ext://sys.stderr',
            'formatter': 'plain',
        },
    },
    'loggers': {
        'fidgap': {
            'handlers': ['stderr'],
            'level': FIDGAP_LOG_LEVEL,
            'propagate': False,
        },
    },
}

FIDGAP = {
    'DEFAULT_SEED': 1234,
    # Overrides of fidgap.conf.Tolerances, e.g. {'identity': 1e-9}
    'TOLERANCES': {},
}
