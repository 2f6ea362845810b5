"""CSV writing and the run manifest emitted alongside every output."""
import hashlib
import io
import json
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional

import pandas as pd
from pydantic import BaseModel

from transit_ages import __version__
from transit_ages.config.settings import CSV_SCHEMA_VERSION, CSV_SIGNIFICANT_DIGITS

log = logging.getLogger(__name__)

FLOAT_FORMAT = f"%.{CSV_SIGNIFICANT_DIGITS}g"


class RunManifest(BaseModel):
    command: str
    argv: List[str]
    input_path: Optional[str] = None
    config: Dict[str, Any]
    tool_version: str = __version__
    schema_version: str = CSV_SCHEMA_VERSION
    columns: List[str]
    input_hash: str
    output_hash: Optional[str] = None


def frame_to_csv(frame: pd.DataFrame) -> str:
    buf = io.StringIO()
    frame.to_csv(buf, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    return buf.getvalue()


def content_hash(*parts: bytes) -> str:
    h = hashlib.sha256()
    for p in parts:
        h.update(p)
    return h.hexdigest()


def input_hash(input_path: Optional[str], config: Dict[str, Any]) -> str:
    data = Path(input_path).read_bytes() if input_path else b""
    return content_hash(data, json.dumps(config, sort_keys=True, default=str).encode())


def manifest_path(output: Path) -> Path:
    return output.with_name(output.name + ".manifest.json")


def write_output(frame: pd.DataFrame, output: Optional[str], manifest: RunManifest, stream) -> None:
    """Write the CSV to ``output`` with its manifest alongside.

    Without a path the CSV goes to ``stream`` and the manifest to stderr as
    one JSON line.
    """
    text = frame_to_csv(frame)
    manifest = manifest.model_copy(update={"output_hash": content_hash(text.encode())})
    if output is None:
        stream.write(text)
        print(json.dumps(manifest.model_dump(), sort_keys=True), file=sys.stderr)
        return
    path = Path(output)
    with open(path, "w", newline="") as f:
        f.write(text)
    with open(manifest_path(path), "w") as f:
        json.dump(manifest.model_dump(), f, indent=2, sort_keys=True)
        f.write("\n")
    log.info("wrote %d rows to %s", len(frame), path)
