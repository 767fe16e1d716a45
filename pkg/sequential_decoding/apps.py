from django.apps import AppConfig


class SequentialDecodingConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'sequential_decoding'
    verbose_name = 'Sequential decoding simulator'

    def ready(self):
        # Import signals to connect the progress receivers
        import sequential_decoding.signals  # noqa: F401
