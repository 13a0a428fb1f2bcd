"""Model adapters building EXIT pairs for each family.

Importing the package registers every closure the adapters use, so serialized
analytic functions can be loaded back.
"""
from src.adapter.driven.model import (  # noqa: F401
    bec_adapter,
    gallager_adapter,
    gaussian_exit_adapter,
    precision_adapter,
)
