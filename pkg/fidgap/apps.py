from django.apps import AppConfig


class FidgapConfig(AppConfig):
    name = 'fidgap'
    verbose_name = 'Fidelity decay and spectral gap toolkit'
