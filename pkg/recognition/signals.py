# recognition/signals.py
import logging

from django.dispatch import Signal, receiver

logger = logging.getLogger('recognition')

# Отправляется после каждого распознавания: sender - имя метода, result - RecognitionResult
recognition_finished = Signal()


@receiver(recognition_finished)
def log_recognition(sender, result, source=None, **kwargs):
    details = f" [{source}]" if source else ""
    if result.converged:
        logger.info(f"Распознавание{details}: {result}")
    else:
        logger.warning(f"Распознавание{details} без сходимости: {result}")
