"""File adapter writing JSON reports and CSV tables under the output directory."""
import json
import logging
import math
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Sequence

import numpy as np
import pandas as pd

from src.core.domain.exceptions import StorageError
from src.core.port.storage_port import ResultStoragePort

logger = logging.getLogger(__name__)

JSON_DIGITS = 12
CSV_FORMAT = "%.17g"


def to_json_compatible(value: Any) -> Any:
    """Recursively convert a payload to plain JSON types.

    Floats are rounded to 12 significant digits; non-finite floats become the
    strings "inf", "-inf" and "nan" so the output stays strict JSON.
    """
    if isinstance(value, Mapping):
        return {str(k): to_json_compatible(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_json_compatible(v) for v in value]
    if isinstance(value, np.ndarray):
        return [to_json_compatible(v) for v in value.tolist()]
    if isinstance(value, Enum):
        return to_json_compatible(value.value)
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        x = float(value)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return float(f"{x:.{JSON_DIGITS}g}")
    if isinstance(value, Path):
        return str(value)
    return value


class FileStorageAdapter(ResultStoragePort):
    """Writes experiment outputs into one directory with fixed formatting."""

    def __init__(self, output_dir: Path):
        """Initialize the file adapter.

        Args:
            output_dir: Directory receiving every output file
        """
        self.output_dir = Path(output_dir)
        logger.info(f"FileStorageAdapter initialized at {self.output_dir}")

    def _target(self, name: str) -> Path:
        path = self.output_dir / name
        path.parent.mkdir(parents=True, exist_ok=True)
        return path

    def save_report(self, name: str, payload: Mapping[str, Any]) -> Path:
        """Write a JSON report with sorted keys and a trailing newline."""
        try:
            path = self._target(name)
            text = json.dumps(to_json_compatible(payload), indent=2, sort_keys=True)
            with open(path, "w", encoding="utf-8", newline="\n") as handle:
                handle.write(text + "\n")
            logger.info(f"Wrote report {path}")
            return path
        except (OSError, TypeError, ValueError) as e:
            logger.error(f"Error writing report {name}: {str(e)}")
            raise StorageError(
                f"Could not write report {name}", details={"name": name}, original_error=e
            ) from e

    def save_table(
        self,
        name: str,
        columns: Dict[str, Sequence[float]],
        header: Optional[Mapping[str, Any]] = None,
    ) -> Path:
        """Write a CSV table; the header mapping goes into a leading '#' comment."""
        try:
            path = self._target(name)
            frame = pd.DataFrame({k: np.asarray(v, dtype=float) for k, v in columns.items()})
            with open(path, "w", encoding="utf-8", newline="\n") as handle:
                if header is not None:
                    handle.write(
                        "# " + json.dumps(to_json_compatible(header), sort_keys=True) + "\n"
                    )
                frame.to_csv(handle, index=False, float_format=CSV_FORMAT, lineterminator="\n")
            logger.info(f"Wrote table {path} with {len(frame)} rows")
            return path
        except (OSError, TypeError, ValueError) as e:
            logger.error(f"Error writing table {name}: {str(e)}")
            raise StorageError(
                f"Could not write table {name}", details={"name": name}, original_error=e
            ) from e

    def load_json(self, path: Path) -> Dict[str, Any]:
        try:
            with open(path, "r", encoding="utf-8") as handle:
                data = json.load(handle)
        except (OSError, json.JSONDecodeError) as e:
            logger.error(f"Error reading {path}: {str(e)}")
            raise StorageError(
                f"Could not read JSON document {path}",
                details={"path": str(path)},
                original_error=e,
            ) from e
        if not isinstance(data, dict):
            raise StorageError(f"{path} does not hold a JSON object", details={"path": str(path)})
        return data

    def load_profile_table(self, path: Path) -> Dict[str, List[float]]:
        try:
            frame = pd.read_csv(path, comment="#")
        except (OSError, ValueError) as e:
            logger.error(f"Error reading profile {path}: {str(e)}")
            raise StorageError(
                f"Could not read profile {path}", details={"path": str(path)}, original_error=e
            ) from e
        if "f" not in frame.columns or frame.empty:
            raise StorageError(
                f"Profile {path} has no f column",
                details={"path": str(path), "columns": list(frame.columns)},
            )
        return {
            str(name): [float(x) for x in frame[name].to_numpy(dtype=float)]
            for name in frame.columns
        }
