from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Protocol, Sequence


class ResultStoragePort(Protocol):
    """Protocol for writing experiment outputs."""

    def save_report(self, name: str, payload: Mapping[str, Any]) -> Path:
        """Write a JSON report.

        Args:
            name: File name relative to the output directory
            payload: JSON-compatible mapping; floats are rounded to 12 digits

        Returns:
            Path of the written file

        Raises:
            StorageError: If the file cannot be written
        """
        ...

    def save_table(
        self,
        name: str,
        columns: Dict[str, Sequence[float]],
        header: Optional[Mapping[str, Any]] = None,
    ) -> Path:
        """Write a CSV table with 17 significant digits.

        Args:
            name: File name relative to the output directory
            columns: Ordered column name to values
            header: Optional resolved parameters written as a leading comment line

        Returns:
            Path of the written file

        Raises:
            StorageError: If the file cannot be written
        """
        ...

    def load_json(self, path: Path) -> Dict[str, Any]:
        """Read a JSON document.

        Raises:
            StorageError: If the file is missing or malformed
        """
        ...

    def load_profile_table(self, path: Path) -> Dict[str, List[float]]:
        """Read every column of a profile CSV; the f column is mandatory.

        Raises:
            StorageError: If the file is missing or has no f column
        """
        ...
