"""Versioned key=value configuration files and reproducible CSV output.

Config files hold one `key = value` pair per line, `#` comments, and a
mandatory `version` key.  Resolution order for every parameter is
command-line flag > config file > built-in default.  Output CSVs carry a
`#`-prefixed metadata block with the format version, the subcommand, and the
fully resolved parameters, so a file identifies the exact run that made it;
no timestamps or hostnames, keeping reruns bitwise identical.
"""

from __future__ import annotations

import os

CONFIG_VERSION = "freebound-config-v1"
CSV_VERSION = "freebound-csv-v1"


def parse_config_file(path: str) -> dict[str, str]:
    """Read a key=value config file; returns the non-version entries."""
    values: dict[str, str] = {}
    with open(path) as f:
        for lineno, raw in enumerate(f, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key=value, got {raw!r}")
            key, value = (part.strip() for part in line.split("=", 1))
            values[key] = value
    if values.pop("version", None) != CONFIG_VERSION:
        raise ValueError(f"{path}: missing or unsupported version "
                         f"(need version={CONFIG_VERSION})")
    return values


def _coerce(text: str, like):
    """Parse text with the type of the default value it replaces."""
    if isinstance(like, bool):
        lowered = text.lower()
        if lowered in ("true", "1", "yes"):
            return True
        if lowered in ("false", "0", "no"):
            return False
        raise ValueError(f"not a boolean: {text!r}")
    if isinstance(like, int):
        return int(text)
    if isinstance(like, float):
        return float(text)
    if isinstance(like, tuple):
        inner = like[0] if like else 0
        return tuple(_coerce(part, inner) for part in text.split(",") if part)
    return text


def resolve_params(flags: dict, defaults: dict, config_path: str | None) -> dict:
    """Merge flag values over config-file values over defaults.

    `flags` maps parameter names to the parsed command-line value or None
    when the flag was not given.  Unknown config keys raise, so typos in
    config files fail loudly.
    """
    file_values = parse_config_file(config_path) if config_path else {}
    unknown = set(file_values) - set(defaults)
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    out = {}
    for key, default in defaults.items():
        flag = flags.get(key)
        if flag is not None:
            out[key] = flag
        elif key in file_values:
            out[key] = _coerce(file_values[key], default)
        else:
            out[key] = default
    return out


def format_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, tuple):
        return ",".join(format_value(v) for v in value)
    return str(value)


def header_lines(command: str, params: dict) -> list[str]:
    """Metadata block identifying a run: version, command, sorted params."""
    lines = [CSV_VERSION, f"command={command}"]
    lines += [f"{k}={format_value(v)}" for k, v in sorted(params.items())]
    return lines


def resolve_outdir(flag_value: str | None) -> str:
    """Output directory: flag > FREEBOUND_OUTDIR > current directory."""
    outdir = flag_value or os.environ.get("FREEBOUND_OUTDIR") or "."
    os.makedirs(outdir, exist_ok=True)
    return outdir


def write_csv(path: str, command: str, params: dict,
              columns: list[str], rows) -> None:
    """Write rows with a '#' metadata header; floats at full precision."""
    with open(path, "w") as f:
        for line in header_lines(command, params):
            f.write(f"# {line}\n")
        f.write(",".join(columns) + "\n")
        for row in rows:
            f.write(",".join(format(v, ".17g") if isinstance(v, float)
                             else str(v) for v in row) + "\n")


def read_csv(path: str):
    """Read a metadata-headed CSV; returns (meta dict, columns, float rows)."""
    meta: dict[str, str] = {}
    columns: list[str] = []
    rows: list[list[float]] = []
    with open(path) as f:
        for raw in f:
            line = raw.strip()
            if line.startswith("#"):
                body = line.lstrip("# ")
                if "=" in body:
                    key, value = body.split("=", 1)
                    meta[key] = value
                continue
            if not columns:
                columns = line.split(",")
                continue
            if line:
                rows.append([float(v) for v in line.split(",")])
    return meta, columns, rows
