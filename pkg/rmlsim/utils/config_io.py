"""Scenario configuration files.

A config file is INI text with up to three sections::

    [scenario]
    n_blockages = 6
    mode = baseline

    [channel]
    max_retries = 2

    [policy]
    alpha = 0.2

Keys before the first header belong to `[scenario]`. Every key is optional;
missing keys keep their defaults and `RMLSIM_*` environment variables
override the file.
"""

# stdlib
import configparser
from pathlib import Path
from typing import Any, Dict, Set, Tuple, Union

# third party
from pydantic import ValidationError

# rmlsim absolute
import rmlsim.logger as log
from rmlsim.channel.model import ChannelParams
from rmlsim.exceptions import ConfigValidationError, ParseError
from rmlsim.rml.policy import PolicyParams
from rmlsim.simulation.config import ScenarioConfig

NESTED = {"channel": ChannelParams, "policy": PolicyParams}
ROOT_SECTION = "scenario"


def _known_keys(section: str) -> Set[str]:
    if section == ROOT_SECTION:
        return set(ScenarioConfig.__fields__) - set(NESTED)
    return set(NESTED[section].__fields__)


def _key_lines(text: str) -> Dict[Tuple[str, str], int]:
    """Line number of the last assignment of every (section, key)."""
    lines = {}
    section = ROOT_SECTION
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line[0] in "#;":
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip().lower()
            lines[(section, "")] = lineno
            continue
        for sep in ("=", ":"):
            if sep in line:
                lines[(section, line.split(sep, 1)[0].strip().lower())] = lineno
                break
    return lines


def read_config(text: str) -> Dict[str, Any]:
    """Parse config text into keyword values for `ScenarioConfig`."""
    parser = configparser.ConfigParser(strict=False, interpolation=None)
    try:
        parser.read_string(f"[{ROOT_SECTION}]\n" + text)
    except configparser.ParsingError as e:
        lineno, line = e.errors[0]
        raise ParseError(f"cannot parse {line.strip()!r}", line=lineno - 1) from e
    except configparser.Error as e:
        raise ParseError(str(e)) from e

    lines = _key_lines(text)
    data: Dict[str, Any] = {}
    for section in parser.sections():
        name = section.strip().lower()
        if name != ROOT_SECTION and name not in NESTED:
            raise ParseError(
                f"unknown section [{section}], expected one of {[ROOT_SECTION, *NESTED]}",
                line=lines.get((name, ""), 0),
            )
        known = _known_keys(name)
        target = data if name == ROOT_SECTION else data.setdefault(name, {})
        for key, value in parser.items(section):
            if key not in known:
                raise ParseError(
                    f"unknown key in [{name}]", line=lines.get((name, key), 0), key=key
                )
            target[key] = value
    return data


def parse_config(path: Union[str, Path], **overrides: Any) -> ScenarioConfig:
    """Read, merge and validate a config file.

    `overrides` win over the file (command-line options); environment
    variables win over both.
    """
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as e:
        raise ParseError(f"cannot read {path}: {e}") from e

    data = read_config(text)
    lines = _key_lines(text)
    data.update({k: v for k, v in overrides.items() if v is not None})

    try:
        cfg = ScenarioConfig(**data)
    except ValidationError as e:
        first = e.errors()[0]
        loc = [str(p) for p in first["loc"]]
        section, key = (loc[0], loc[1]) if loc[0] in NESTED and len(loc) > 1 else (ROOT_SECTION, loc[0])
        lineno = lines.get((section, key))
        where = f" (line {lineno})" if lineno else ""
        raise ConfigValidationError(".".join(loc), first["msg"] + where) from e

    log.debug(f"loaded config {path}: {len(data)} keys set")
    return cfg


def validate_config(path: Union[str, Path]) -> ScenarioConfig:
    cfg = parse_config(path)
    log.info(f"{path}: valid (seed={cfg.seed}, mode={cfg.mode.value})")
    return cfg
