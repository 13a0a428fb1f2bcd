"""Mock implementations of core ports."""
from tests.mocks.mock_generator import (
    create_mock_from_protocol,
    mock_input_port,
    mock_model_port,
    mock_service_port,
    mock_storage_port,
    result_for,
)

__all__ = [
    "create_mock_from_protocol",
    "mock_model_port",
    "mock_storage_port",
    "mock_input_port",
    "mock_service_port",
    "result_for",
]
