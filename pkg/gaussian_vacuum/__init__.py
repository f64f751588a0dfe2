VERSION = (1, 0, 0)
__version__ = ".".join(map(str, VERSION))

DEFAULT_SERIALIZERS = {
    "json": "gaussian_vacuum.serializers.json.JSONSerializer",
    "csv": "gaussian_vacuum.serializers.csv.CSVSerializer",
}


def get_serializer(fmt="json", options=None):
    """
    Helper used for obtaining the serializer registered for an output format.
    """

    from django.core.exceptions import ImproperlyConfigured
    from django.utils.module_loading import import_string

    from .util import get_setting

    serializers = get_setting("GAUSSIAN_VACUUM_SERIALIZERS", DEFAULT_SERIALIZERS)
    if fmt not in serializers:
        raise ImproperlyConfigured(f"no serializer registered for format {fmt!r}")

    serializer_class = import_string(serializers[fmt])
    return serializer_class(options or {})
