from pathlib import Path
from typing import Union

from asn_rtf.services.storage.config_parser import parse_config, serialize_config


def cmd_config_dump(path: Union[str, Path]) -> str:
    """Canonical text of a config file with every default written out."""
    return serialize_config(parse_config(path))
