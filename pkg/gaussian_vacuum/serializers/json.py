import dataclasses
import enum
import json
from fractions import Fraction
from typing import Any, Dict, Optional

import numpy as np
from django.core.exceptions import ImproperlyConfigured
from django.core.serializers.json import DjangoJSONEncoder

from ..util import get_setting
from .base import BaseSerializer


class ReportEncoder(DjangoJSONEncoder):
    """
    Reports are dataclasses with ``to_dict``, enums and numpy values on top of
    what Django already encodes.
    """

    def default(self, o: Any) -> Any:
        if hasattr(o, "to_dict"):
            return o.to_dict()
        if dataclasses.is_dataclass(o) and not isinstance(o, type):
            return dataclasses.asdict(o)
        if isinstance(o, enum.Enum):
            return o.value
        if isinstance(o, np.ndarray):
            return o.tolist()
        if isinstance(o, np.generic):
            return o.item()
        if isinstance(o, Fraction):
            return float(o)
        return super().default(o)


class JSONSerializer(BaseSerializer):
    encoder_class = ReportEncoder

    def __init__(self, options: Optional[Dict[str, Any]] = None) -> None:
        options = options or {}
        self._indent = get_setting("GAUSSIAN_VACUUM_JSON_INDENT", 2)
        self.setup_indent(options)

        super().__init__(options=options)

    def setup_indent(self, options: Dict[str, Any]) -> None:
        if "INDENT" in options:
            try:
                self._indent = int(options["INDENT"])
            except (ValueError, TypeError):
                raise ImproperlyConfigured("INDENT value must be an integer")
            if self._indent < 0:
                raise ImproperlyConfigured("INDENT can't be negative")

    def dumps(self, value: Any) -> bytes:
        text = json.dumps(
            value, cls=self.encoder_class, indent=self._indent, sort_keys=True
        )
        return (text + "\n").encode()

    def loads(self, value: bytes) -> Any:
        return json.loads(value.decode())
