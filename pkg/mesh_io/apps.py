# mesh_io/apps.py
from django.apps import AppConfig


class MeshIoConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'mesh_io'
    verbose_name = "Сетки и контактные кандидаты"
