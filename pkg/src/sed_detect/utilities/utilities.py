"""
`utilities.py` module.

Provides utility functions for the `sed_detect` package: packaged data access, JSON and
JSONL persistence, bit-exact array encoding, logging setup and the CLI error boundary.

(c) 2025 Stash AI Inc., All rights reserved.
Licensed under the [Plain Apache License](https://plainlicense.org/licenses/permissive/apache-2-0/).
"""

import functools
import json
import logging

from collections.abc import Callable, Iterable, Iterator
from pathlib import Path
from typing import Any

import numpy as np
import typer

from pydantic import BaseModel, ValidationError
from rich.console import Console
from rich.logging import RichHandler
from typing_extensions import TypeIs

from sed_detect.models import FeatureLayout, LayoutCatalog, RunRecord, get_layout_catalog
from sed_detect.types import ConfigError, FloatArray, IOFailure, SedError


logger = logging.getLogger(__name__)


def data_path() -> Path:
    """Returns the path to the packaged layout catalog."""
    return Path(__file__).parent.parent / "data" / "layouts.json"


def load_file(path: Path) -> bytes:
    """Reads a whole file.

    Raises:
        SedError: With category ``io`` when the file cannot be read.
    """
    try:
        return path.read_bytes()
    except OSError as e:
        raise IOFailure(f"could not read {path}: {e.strerror}") from e


def retrieve_catalog(path: Path | None = None) -> LayoutCatalog:
    """Loads the layout catalog, the packaged one by default."""
    path = path or data_path()
    try:
        return get_layout_catalog(load_file(path))
    except ValidationError as e:
        raise ConfigError(f"invalid layout catalog {path}: {e.error_count()} validation errors") from e


def retrieve_layout(name: str | None = None, catalog_path: Path | None = None) -> FeatureLayout:
    """Returns a named feature layout from the catalog (default layout when unnamed)."""
    return retrieve_catalog(catalog_path).layout(name)


def make_dirs(dirs: Iterable[Path]) -> None:
    """Creates directories if they don't exist."""
    for directory in dirs:
        try:
            directory.mkdir(parents=True, exist_ok=True)
        except OSError as e:
            raise IOFailure(f"could not create directory {directory}") from e


def dumps(record: dict[str, Any]) -> str:
    """Compact, key-order-preserving JSON for one record."""
    return json.dumps(record, separators=(",", ":"), allow_nan=False)


def is_record(value: Any) -> TypeIs[dict[str, Any]]:
    """Checks if a decoded JSON value is an object."""
    return isinstance(value, dict)


def read_jsonl(path: Path) -> Iterator[dict[str, Any]]:
    """Yields the JSON objects of a newline-delimited JSON file, skipping blank lines."""
    try:
        with path.open("r", encoding="utf-8") as handle:
            for line_no, line in enumerate(handle, start=1):
                if not line.strip():
                    continue
                try:
                    record = json.loads(line)
                except json.JSONDecodeError as e:
                    raise ConfigError(f"{path}:{line_no}: invalid JSON ({e.msg})") from e
                if not is_record(record):
                    raise ConfigError(f"{path}:{line_no}: expected a JSON object")
                yield record
    except OSError as e:
        raise IOFailure(f"could not read {path}: {e.strerror}") from e


def write_jsonl(path: Path, records: Iterable[dict[str, Any] | BaseModel]) -> int:
    """Writes records as newline-delimited JSON; returns the number of lines."""
    count = 0
    make_dirs([path.parent])
    try:
        with path.open("w", encoding="utf-8", newline="\n") as handle:
            for record in records:
                if isinstance(record, BaseModel):
                    record = record.model_dump(mode="json", by_alias=True, exclude_none=True)
                handle.write(dumps(record))
                handle.write("\n")
                count += 1
    except OSError as e:
        raise IOFailure(f"could not write {path}: {e.strerror}") from e
    return count


def write_json(path: Path, payload: dict[str, Any] | BaseModel) -> Path:
    """Writes an indented JSON document."""
    if isinstance(payload, BaseModel):
        text = payload.model_dump_json(by_alias=True, indent=2)
    else:
        text = json.dumps(payload, indent=2, allow_nan=False)
    make_dirs([path.parent])
    try:
        path.write_text(text + "\n", encoding="utf-8")
    except OSError as e:
        raise IOFailure(f"could not write {path}: {e.strerror}") from e
    return path


def encode_array(array: FloatArray) -> Any:
    """Encodes an array as nested lists of hex floats; decoding is bit-exact."""
    if array.ndim == 0:
        return float(array).hex()
    return [encode_array(row) for row in array] if array.ndim > 1 else [float(x).hex() for x in array]


def decode_array(nested: Any) -> FloatArray:
    """Inverse of `encode_array`."""

    def convert(node: Any) -> Any:
        if isinstance(node, list):
            return [convert(item) for item in node]  # type: ignore[reportUnknownVariableType]
        return float.fromhex(node) if isinstance(node, str) else float(node)

    return np.asarray(convert(nested), dtype=np.float64)


def package_version() -> str:
    """The installed package version, recorded in model files and run records."""
    from sed_detect import __version__  # noqa: PLC0415

    return __version__


def write_run_record(out_dir: Path, record: RunRecord) -> Path:
    """Writes ``run-<command>.json`` into the output directory."""
    return write_json(out_dir / f"run-{record.command}.json", record)


def load_config[M: BaseModel](model: type[M], path: Path | None, **overrides: Any) -> M:
    """Loads a JSON configuration file (or the defaults) and applies CLI overrides.

    Overrides that are ``None`` keep the file value. The result is re-validated so an
    override is checked against the same constraints as the file.
    """
    base = model.model_validate_json(load_file(path)) if path is not None else model()
    updates = {key: value for key, value in overrides.items() if value is not None}
    if not updates:
        return base
    return model.model_validate(base.model_dump(by_alias=True) | updates)


def configure_logging(*, verbose: bool = False) -> None:
    """Installs a rich log handler on the package logger."""
    package_logger = logging.getLogger("sed_detect")
    if not any(isinstance(h, RichHandler) for h in package_logger.handlers):
        package_logger.addHandler(RichHandler(console=Console(stderr=True), show_path=False, rich_tracebacks=True))
    package_logger.setLevel(logging.DEBUG if verbose else logging.INFO)


def cli_errors[**P, R](func: Callable[P, R]) -> Callable[P, R]:
    """Turns library errors into a one-line ``error[<category>]: <detail>`` and an exit code."""

    @functools.wraps(func)
    def wrapper(*args: P.args, **kwargs: P.kwargs) -> R:
        try:
            return func(*args, **kwargs)
        except typer.Exit:
            raise
        except SedError as e:
            typer.echo(f"error[{e.category}]: {e}", err=True)
            raise typer.Exit(code=2) from e
        except ValidationError as e:
            detail = "; ".join(
                f"{'.'.join(str(p) for p in err['loc'])}: {err['msg']}" for err in e.errors()
            )
            typer.echo(f"error[config]: {detail}", err=True)
            raise typer.Exit(code=2) from e
        except OSError as e:
            typer.echo(f"error[io]: {e}", err=True)
            raise typer.Exit(code=2) from e
        except Exception as e:
            typer.echo(f"error[internal]: {type(e).__name__}: {e}", err=True)
            raise typer.Exit(code=1) from e

    return wrapper


__all__ = [
    "cli_errors",
    "configure_logging",
    "data_path",
    "decode_array",
    "dumps",
    "encode_array",
    "is_record",
    "load_config",
    "load_file",
    "make_dirs",
    "package_version",
    "read_jsonl",
    "retrieve_catalog",
    "retrieve_layout",
    "write_json",
    "write_jsonl",
    "write_run_record",
]
