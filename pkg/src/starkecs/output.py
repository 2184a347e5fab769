"""Output plumbing: atomic file writes and config file loading."""

from __future__ import annotations

import json
import os
import tempfile
from pathlib import Path

import yaml

from .config import ResultRecord, RunConfig

__all__ = ["atomic_write", "write_run_outputs", "load_config_file"]


def atomic_write(path: Path, content: str) -> None:
    """Write via a temp file in the same directory, then rename."""
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(content)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_run_outputs(out_dir: Path, record: ResultRecord, artifacts: dict[str, str]) -> list[Path]:
    """Persist the result record (JSON) and every artifact into out_dir."""
    out_dir = Path(out_dir)
    written = []
    for name, content in sorted(artifacts.items()):
        p = out_dir / name
        atomic_write(p, content)
        written.append(p)
    rec_path = out_dir / "result.json"
    atomic_write(rec_path, json.dumps(record.model_dump(), indent=2, default=str) + "\n")
    written.append(rec_path)
    return written


def load_config_file(path: Path) -> RunConfig:
    """RunConfig from a YAML (or JSON) config file."""
    text = Path(path).read_text()
    data = yaml.safe_load(text)
    if not isinstance(data, dict):
        raise ValueError(f"config file {path} must contain a mapping")
    return RunConfig.model_validate(data)
