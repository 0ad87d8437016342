import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

from pydantic import ValidationError

from ..models.job_models import JobConfig
from ..utils.exceptions import ConfigError
from .settings import settings

logger = logging.getLogger(__name__)

SHIPPED_PRESETS = Path(__file__).resolve().parent / "presets"


def _search_path() -> List[Path]:
    directories = []
    if settings.PRESET_DIR:
        directories.append(Path(settings.PRESET_DIR))
    directories.append(SHIPPED_PRESETS)
    return directories


def field_path(error: Dict[str, Any]) -> str:
    return ".".join(str(part) for part in error.get("loc", ())) or "<root>"


def job_from_dict(data: Dict[str, Any], source: str = "<config>") -> JobConfig:
    """Validate a raw mapping into a JobConfig, reporting the first offending field path"""
    try:
        return JobConfig.model_validate(data)
    except ValidationError as e:
        errors = e.errors()
        first = errors[0] if errors else {}
        path = field_path(first)
        logger.error(f"Invalid configuration in {source}: {path}: {first.get('msg', str(e))}")
        raise ConfigError(
            f"{source}: {path}: {first.get('msg', str(e))}",
            field=path,
            details={"problems": [f"{field_path(err)}: {err.get('msg')}" for err in errors]},
        )


def read_config_file(path: Union[str, Path]) -> Dict[str, Any]:
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ConfigError(f"Config file {path} does not exist", field="config")
    except json.JSONDecodeError as e:
        raise ConfigError(f"Config file {path} is not valid JSON: {str(e)}", field="config")
    if not isinstance(data, dict):
        raise ConfigError(f"Config file {path} must hold a JSON object", field="config")
    return data


def load_job(path: Union[str, Path], overrides: Optional[Dict[str, Any]] = None) -> JobConfig:
    data = read_config_file(path)
    data.update(overrides or {})
    return job_from_dict(data, str(path))


def preset_path(name: str) -> Path:
    for directory in _search_path():
        candidate = directory / f"{name}.json"
        if candidate.exists():
            return candidate
    raise ConfigError(
        f"Unknown preset '{name}'",
        field="preset",
        details={"available": [preset for preset, _ in list_presets()]},
    )


def load_preset(name: str, overrides: Optional[Dict[str, Any]] = None) -> JobConfig:
    return load_job(preset_path(name), overrides)


def list_presets() -> List[Tuple[str, str]]:
    """(name, description) for every preset on the search path; earlier directories win"""
    found: Dict[str, str] = {}
    for directory in _search_path():
        if not directory.is_dir():
            continue
        for path in sorted(directory.glob("*.json")):
            if path.stem in found:
                continue
            try:
                found[path.stem] = read_config_file(path).get("description", "")
            except ConfigError as e:
                logger.warning(f"Skipping unreadable preset {path}: {e.message}")
    return sorted(found.items())
