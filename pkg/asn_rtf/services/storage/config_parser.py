"""INI-style experiment configuration.

Grammar: `[section]` headers, `key = value` lines, `#` starts a comment,
blank lines are ignored. Lists are comma-separated and an empty value means
"unset". Every key belongs to one of the sections of FIELDS; anything else
is rejected with its line number.
"""

import re
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

from pydantic import ValidationError

from asn_rtf.exceptions import ConfigError
from asn_rtf.models.config import ExperimentConfig
from asn_rtf.models.scene import SceneParams

FIELDS: Dict[str, Dict[str, str]] = {
    "layout": {"node_sizes": "int_list", "ref_index": "int"},
    "stft": {"sample_rate": "int", "frame_len": "int", "hop": "int"},
    "experiment": {"methods": "str_list", "snr_db": "float_list", "trials": "int", "seed": "int",
                   "frames": "int"},
    "ods": {"max_iters": "int", "tol": "float", "starts": "int", "init": "str", "seed": "int",
            "backend": "str", "memory": "int"},
    "spp": {"prior_snr_db": "float", "alpha": "float", "init_frames": "int", "threshold": "float",
            "probe_channels": "int_list"},
    "scene": {name: "int" if field.annotation is int else "float"
              for name, field in SceneParams.model_fields.items()},
    "estimation": {"labels": "str", "covariance": "str", "loading": "float"},
    "input": {"mode": "str", "speech_path": "path", "noise_path": "path", "labels_path": "path"},
    "output": {"dir": "path", "results_csv": "str", "summary_csv": "str"},
}

# keys stored at the top level of ExperimentConfig although they are written in a section
RELOCATED = {("experiment", "methods"): "methods"}

_SECTION = re.compile(r"^\[\s*([A-Za-z_]+)\s*\]$")
_ENTRY = re.compile(r"^([A-Za-z_][A-Za-z0-9_]*)\s*=\s*(.*)$")

_TYPE_NAMES = {"int": "an integer", "float": "a number", "str": "a string", "path": "a path",
               "int_list": "a list of integers", "float_list": "a list of numbers",
               "str_list": "a list of names"}


def _strip_comment(line: str) -> str:
    return line.split("#", 1)[0].strip()


def _convert(raw: str, kind: str, base_dir: Path):
    if raw == "":
        return () if kind.endswith("_list") else None
    if kind == "int":
        return int(raw)
    if kind == "float":
        return float(raw)
    if kind == "str":
        return raw
    if kind == "path":
        path = Path(raw).expanduser()
        return path if path.is_absolute() else base_dir / path
    items = [item.strip() for item in raw.split(",")]
    if any(item == "" for item in items):
        raise ValueError("empty list item")
    if kind == "int_list":
        return tuple(int(item) for item in items)
    if kind == "float_list":
        return tuple(float(item) for item in items)
    return tuple(items)


def _read_entries(text: str) -> Dict[Tuple[str, str], Tuple[str, int]]:
    entries: Dict[Tuple[str, str], Tuple[str, int]] = {}
    section: Optional[str] = None
    for number, line in enumerate(text.splitlines(), start=1):
        content = _strip_comment(line)
        if not content:
            continue
        header = _SECTION.match(content)
        if header:
            section = header.group(1).lower()
            if section not in FIELDS:
                raise ConfigError(f"unknown section [{section}]", number)
            entries.setdefault((section, ""), ("", number))
            continue
        entry = _ENTRY.match(content)
        if entry is None:
            raise ConfigError(f"cannot parse {content!r}, expected 'key = value'", number)
        if section is None:
            raise ConfigError(f"key {entry.group(1)!r} appears before any [section]", number)
        key = entry.group(1).lower()
        if key not in FIELDS[section]:
            raise ConfigError(f"unknown key {key!r} in [{section}]", number)
        if (section, key) in entries:
            raise ConfigError(f"duplicate key {key!r} in [{section}]", number)
        entries[(section, key)] = (entry.group(2).strip(), number)
    return entries


def _locate(loc: Tuple, entries: Dict[Tuple[str, str], Tuple[str, int]]) -> Optional[int]:
    """Best line for a pydantic error location."""
    names = [str(part) for part in loc if not isinstance(part, int)]
    if names[:1] == ["methods"]:
        names = ["experiment", "methods"]
    if len(names) >= 2 and (names[0], names[1]) in entries:
        return entries[(names[0], names[1])][1]
    if names and (names[0], "") in entries:
        section_lines = [line for (section, key), (_, line) in entries.items() if section == names[0] and key]
        return max(section_lines) if section_lines else entries[(names[0], "")][1]
    layout_line = entries.get(("layout", "node_sizes"))
    return layout_line[1] if layout_line else None


def parse_config_text(text: str, base_dir: Union[str, Path] = ".") -> ExperimentConfig:
    base_dir = Path(base_dir)
    entries = _read_entries(text)
    if ("layout", "node_sizes") not in entries:
        raise ConfigError("[layout] node_sizes is required")

    data: Dict[str, dict] = {}
    for (section, key), (raw, line) in entries.items():
        if not key:
            continue
        kind = FIELDS[section][key]
        try:
            value = _convert(raw, kind, base_dir)
        except ValueError:
            raise ConfigError(f"{key} must be {_TYPE_NAMES[kind]}, got {raw!r}", line) from None
        if value is None:
            continue
        if (section, key) in RELOCATED:
            data[RELOCATED[(section, key)]] = value
        else:
            data.setdefault(section, {})[key] = value

    try:
        return ExperimentConfig.model_validate(data)
    except ValidationError as e:
        error = e.errors()[0]
        message = str(error["msg"]).removeprefix("Value error, ")
        field = ".".join(str(part) for part in error["loc"])
        if field and field.split(".")[-1] not in message:
            message = f"{field}: {message}"
        raise ConfigError(message, _locate(error["loc"], entries)) from None


def parse_config(path: Union[str, Path]) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e}") from e
    return parse_config_text(text, path.parent)


def _format(value, kind: str) -> str:
    if value is None:
        return ""
    if kind.endswith("_list"):
        return ", ".join(_format(item, kind[:-5]) for item in value)
    if kind == "float":
        return repr(float(value))
    if hasattr(value, "value"):
        return str(value.value)
    return str(value)


def serialize_config(config: ExperimentConfig) -> str:
    """Canonical text form: every section and key in FIELDS order."""
    dumped = config.model_dump()
    lines: List[str] = []
    for section, keys in FIELDS.items():
        if lines:
            lines.append("")
        lines.append(f"[{section}]")
        for key, kind in keys.items():
            if (section, key) in RELOCATED:
                value = dumped[RELOCATED[(section, key)]]
            else:
                value = dumped[section][key]
            lines.append(f"{key} = {_format(value, kind)}".rstrip())
    return "\n".join(lines) + "\n"
