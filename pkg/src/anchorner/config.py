"""Pipeline configuration.

One flat text file of ``dotted.key = value`` lines captures every choice
a run makes; command-line flags override file values, which override
defaults. The resolved configuration has a stable digest that goes into
the manifest, so a run is reproducible from its outputs.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field, fields
from pathlib import Path

from .balance import SamplingConfig
from .filters import FilterConfig


class ConfigError(ValueError):
    pass


def _parse_scalar(raw: str):
    raw = raw.strip()
    low = raw.lower()
    if low in ("true", "false"):
        return low == "true"
    try:
        return int(raw)
    except ValueError:
        pass
    try:
        return float(raw)
    except ValueError:
        pass
    return raw


def parse_config_file(path: str | Path) -> dict[str, object]:
    """Read ``key = value`` lines into a flat dotted-key dict."""
    values: dict[str, object] = {}
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            if "=" not in stripped:
                raise ConfigError(f"{path}:{lineno}: expected key = value")
            key, raw = stripped.split("=", 1)
            values[key.strip()] = _parse_scalar(raw)
    return values


@dataclass
class ExportConfig:
    split_ratio: float = 0.9
    merge_maps: list[str] = field(default_factory=lambda: ["4types", "212types"])
    fewshot_sizes: list[int] = field(default_factory=list)


@dataclass
class PipelineConfig:
    dump_path: str = ""
    ontology_path: str = ""
    vocabulary_path: str = ""  # empty: bundled vocabulary
    output_dir: str = "out"
    seed: int = 0
    workers: int = 1
    ontology_mode: str = "strict"
    abbreviations_path: str = ""  # empty: built-in abbreviation list
    filter: FilterConfig = field(default_factory=FilterConfig)
    sampling: SamplingConfig = field(default_factory=SamplingConfig)
    export: ExportConfig = field(default_factory=ExportConfig)

    def __post_init__(self) -> None:
        # one run seed drives every stochastic stage
        self.filter.seed = self.seed
        self.sampling.seed = self.seed

    # execution knobs that cannot change output bytes stay out of the digest
    _DIGEST_EXCLUDED = frozenset({"workers", "output_dir"})

    def digest(self) -> str:
        lines = [
            f"{key} = {value}"
            for key, value in sorted(self._flatten().items())
            if key not in self._DIGEST_EXCLUDED
        ]
        return "sha256:" + hashlib.sha256("\n".join(lines).encode("utf-8")).hexdigest()

    def _flatten(self) -> dict[str, object]:
        flat: dict[str, object] = {}
        for f in fields(self):
            value = getattr(self, f.name)
            if isinstance(value, (FilterConfig, SamplingConfig, ExportConfig)):
                for sub in fields(value):
                    subvalue = getattr(value, sub.name)
                    if isinstance(subvalue, list):
                        subvalue = ",".join(str(v) for v in subvalue)
                    flat[f"{f.name}.{sub.name}"] = subvalue
            else:
                flat[f.name] = value
        return flat


_LIST_KEYS = {"export.merge_maps", "export.fewshot_sizes"}


def _coerce_list(key: str, value: object) -> list:
    if isinstance(value, list):
        return value
    if value in ("", None):
        return []
    items = [item.strip() for item in str(value).split(",") if item.strip()]
    if key == "export.fewshot_sizes":
        return [int(item) for item in items]
    return items


def build_config(
    file_values: dict[str, object] | None = None,
    overrides: dict[str, object] | None = None,
) -> PipelineConfig:
    """Resolve a config from file values and CLI overrides."""
    merged: dict[str, object] = {}
    for source in (file_values or {}), (overrides or {}):
        for key, value in source.items():
            if value is not None:
                merged[key] = value

    config = PipelineConfig()
    for key, value in merged.items():
        if key in _LIST_KEYS:
            value = _coerce_list(key, value)
        if "." in key:
            section, name = key.split(".", 1)
            target = getattr(config, section, None)
            if target is None or not hasattr(target, name):
                raise ConfigError(f"unknown config key {key!r}")
            if key == "sampling.target_size" and value == "same-as-input":
                value = None
            setattr(target, name, value)
        else:
            if not hasattr(config, key):
                raise ConfigError(f"unknown config key {key!r}")
            setattr(config, key, value)
    config.__post_init__()  # re-propagate the seed after overrides
    config.filter.__post_init__()
    config.sampling.__post_init__()
    return config
