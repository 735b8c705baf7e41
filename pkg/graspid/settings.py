"""
Django settings for graspid project.

The project has no web surface: Django provides configuration, logging,
management commands (the command-line tools) and the test runner.

For the full list of settings and their values, see
https://docs.djangoproject.com/en/5.2/ref/settings/
"""

from pathlib import Path
import os
from dotenv import load_dotenv

BASE_DIR = Path(__file__).resolve().parent.parent

load_dotenv(BASE_DIR / '.env')

# Секретный ключ нужен Django, но сессий и подписей здесь нет
SECRET_KEY = os.getenv("SECRET_KEY", "graspid-local-only")

DEBUG = os.getenv("DEBUG", "False") == "True"

ALLOWED_HOSTS = []

# Application definition

INSTALLED_APPS = [
    'rest_framework',
    'mesh_io',
    'grasp_param',
    'sampling',
    'classifiers',
    'recognition.apps.RecognitionConfig',
    'evaluation',
]

# Моделей в БД нет: все артефакты (датасеты, модели, отчёты) живут в файлах
DATABASES = {}

USE_I18N = False
USE_TZ = True
TIME_ZONE = 'UTC'

DEFAULT_AUTO_FIELD = 'django.db.models.BigAutoField'


# Переопределения параметров алгоритмов (значения по умолчанию - graspid.conf.DEFAULTS).
# Читаются через graspid.conf.get_setting.
GRASPID = {
    'WORKERS': int(os.getenv("GRASPID_WORKERS", "1")),
}


LOG_DIR = os.getenv("GRASPID_LOG_DIR", os.path.join(BASE_DIR, 'logs'))
os.makedirs(LOG_DIR, exist_ok=True)
LOG_LEVEL = os.getenv("GRASPID_LOG_LEVEL", "INFO")

LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'verbose': {
            'format': '{asctime} {levelname} {module} {message}',
            'style': '{',
            'datefmt': '%Y-%m-%d %H:%M:%S',
        },
    },
    'handlers': {
        'file': {
            'level': 'DEBUG',
            'class': 'logging.handlers.TimedRotatingFileHandler',
            'filename': os.path.join(LOG_DIR, 'graspid.log'),
            'when': 'midnight',      # ротация в полночь
            'interval': 1,
            'backupCount': 30,       # хранить 30 файлов
            'encoding': 'utf-8',
            'formatter': 'verbose',
        },
        'console': {
            'level': 'WARNING',
            'class': 'logging.StreamHandler',
            'formatter': 'verbose',
        },
    },
    'loggers': {
        'django': {
            'handlers': ['file'],
            'level': 'INFO',
            'propagate': True,
        },
        **{
            name: {
                'handlers': ['file', 'console'],
                'level': LOG_LEVEL,
                'propagate': False,
            }
            for name in (
                'graspid', 'mesh_io', 'grasp_param', 'sampling',
                'classifiers', 'recognition', 'evaluation',
            )
        },
    },
}
