# recognition/apps.py
from django.apps import AppConfig


class RecognitionConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'recognition'
    verbose_name = "Итеративное распознавание"

    def ready(self):
        import recognition.signals  # Подключаем сигналы
