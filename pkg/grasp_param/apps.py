# grasp_param/apps.py
from django.apps import AppConfig


class GraspParamConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'grasp_param'
    verbose_name = "Параметризация захватов"
