import os
from pathlib import Path
import environ

# 1. INFRAESTRUCTURA (CORE)
BASE_DIR = Path(__file__).resolve().parent.parent
env = environ.Env(
    DEBUG=(bool, False),
    CELERY_TASK_ALWAYS_EAGER=(bool, True),
)
environ.Env.read_env(os.path.join(BASE_DIR, '.env'))

# Sin vistas ni sesiones: la clave solo satisface el arranque de Django
SECRET_KEY = env('SECRET_KEY', default='partialk-local-only')
DEBUG = env('DEBUG')

ALLOWED_HOSTS = env.list('ALLOWED_HOSTS', default=["localhost", "127.0.0.1"])

# 2. APLICACIONES
INSTALLED_APPS = [
    'django.contrib.contenttypes',
]

# Aplicaciones locales
LOCAL_APPS = [
    'apps.partialk',
]

INSTALLED_APPS = INSTALLED_APPS + LOCAL_APPS

DATABASES = {
    'default': env.db('DATABASE_URL', default=f'sqlite:///{BASE_DIR}/db.sqlite3')
}

DEFAULT_AUTO_FIELD = 'django.db.models.BigAutoField'

# 3. LOCALIZACIÓN
LANGUAGE_CODE = 'es-ec'
TIME_ZONE = 'America/Guayaquil'
USE_I18N = True
USE_TZ = True

# 4. SERVICIOS (CELERY)
# Por defecto las tareas corren en el mismo proceso; con un broker real
# basta con CELERY_TASK_ALWAYS_EAGER=False y REDIS_URL.
CELERY_BROKER_URL = env('REDIS_URL', default='redis://127.0.0.1:6379/0')
CELERY_RESULT_BACKEND = env('CELERY_RESULT_BACKEND', default='cache+memory://')
CELERY_ACCEPT_CONTENT = ['json']
CELERY_TASK_SERIALIZER = 'json'
CELERY_RESULT_SERIALIZER = 'json'
CELERY_TIMEZONE = TIME_ZONE
CELERY_TASK_ALWAYS_EAGER = env('CELERY_TASK_ALWAYS_EAGER')
CELERY_TASK_EAGER_PROPAGATES = True
CELERY_TASK_TIME_LIMIT = env.int('CELERY_TASK_TIME_LIMIT', default=3600)

# 5. ESTIMACIÓN ESPECTRAL (FUNCIÓN K PARCIAL)
PARTIALK_THREADS = env.int('PARTIALK_THREADS', default=1)
PARTIALK_MAX_GRID_NODES = env.int('PARTIALK_MAX_GRID_NODES', default=4_000_000)
PARTIALK_DFT_CHUNK_SIZE = env.int('PARTIALK_DFT_CHUNK_SIZE', default=2048)
PARTIALK_CONDITION_LIMIT = env.float('PARTIALK_CONDITION_LIMIT', default=1e12)
PARTIALK_IMAG_TOLERANCE = env.float('PARTIALK_IMAG_TOLERANCE', default=1e-6)
PARTIALK_KMAX_THRESHOLD = env.float('PARTIALK_KMAX_THRESHOLD', default=0.05)
PARTIALK_COX_GRID_FACTOR = env.float('PARTIALK_COX_GRID_FACTOR', default=0.25)
PARTIALK_ENVELOPE_BATCH_SIZE = env.int('PARTIALK_ENVELOPE_BATCH_SIZE', default=20)

# LOGGING
LOGS_DIR = BASE_DIR / 'logs'
LOGS_DIR.mkdir(exist_ok=True)
LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'verbose': {'format': '{levelname} {asctime} {module} {process:d} {thread:d} {message}', 'style': '{'},
        'simple': {'format': '{levelname} {message}', 'style': '{'},
    },
    'handlers': {
        'console': {'level': 'INFO', 'class': 'logging.StreamHandler', 'formatter': 'simple'},
        'file_error': {
            'level': 'ERROR',
            'class': 'logging.handlers.RotatingFileHandler',
            'filename': LOGS_DIR / 'errors.log',
            'maxBytes': 5242880,
            'backupCount': 5,
            'formatter': 'verbose',
        },
    },
    'loggers': {
        'django': {'handlers': ['console', 'file_error'], 'level': 'INFO'},
        'apps.partialk': {'handlers': ['console', 'file_error'], 'level': env('PARTIALK_LOG_LEVEL', default='INFO'), 'propagate': False},
    },
}
