"""Global test fixtures and configuration."""
# Standard library imports
from unittest.mock import MagicMock, patch

# Third-party imports
import pytest

# Local imports
from src.adapter.driven.model.factory import ModelFactory
from src.adapter.driven.model.quadrature_resource import QuadratureResource
from src.core.domain.entities.kernel import BoxcarKernel
from src.core.domain.entities.model_spec import BecLdpcSpec, QuadratureConfig
from src.core.service.coupled_service import CoupledService
from src.core.service.kernel_service import KernelService
from src.core.service.potential_service import PotentialService
from src.core.service.threshold_service import ThresholdService
from src.core.service.transform_service import TransformService
from src.core.service.wave_service import WaveService
from tests.mocks import (
    mock_input_port,
    mock_model_port,
    mock_service_port,
    mock_storage_port,
)

# Re-export the mock fixtures
__all__ = [
    "mock_model_port",
    "mock_storage_port",
    "mock_input_port",
    "mock_service_port",
    "potential_service",
    "transform_service",
    "kernel_service",
    "threshold_service",
    "coupled_service",
    "wave_service",
    "quadrature",
    "model_factory",
    "bec_3_6",
    "boxcar",
    "settings",
    "cli_env",
]


@pytest.fixture
def potential_service() -> PotentialService:
    return PotentialService()


@pytest.fixture
def transform_service() -> TransformService:
    return TransformService()


@pytest.fixture
def kernel_service() -> KernelService:
    return KernelService()


@pytest.fixture
def threshold_service(potential_service, transform_service) -> ThresholdService:
    return ThresholdService(potential=potential_service, transform=transform_service)


@pytest.fixture
def coupled_service(kernel_service, potential_service) -> CoupledService:
    return CoupledService(kernels=kernel_service, potential=potential_service)


@pytest.fixture
def wave_service(potential_service, transform_service) -> WaveService:
    return WaveService(potential=potential_service, transform=transform_service)


@pytest.fixture
def quadrature() -> QuadratureResource:
    """Quadrature resource with a reduced Monte Carlo sample."""
    return QuadratureResource(QuadratureConfig(monte_carlo_samples=200_000))


@pytest.fixture
def model_factory(quadrature) -> ModelFactory:
    return ModelFactory(quadrature=quadrature)


@pytest.fixture
def bec_3_6() -> BecLdpcSpec:
    """The (3,6)-regular ensemble on the BEC."""
    return BecLdpcSpec.regular(3, 6)


@pytest.fixture
def boxcar() -> BoxcarKernel:
    """omega(x) = 1/2 on [-1, 1]."""
    return BoxcarKernel(W=1.0)


@pytest.fixture
def settings():
    mock = MagicMock()
    mock.OUTPUT_DIR = "settings-out"
    mock.MONTE_CARLO_SEED = 11
    mock.COUPLED_WAVES_THREADS = None
    mock.LOG_LEVEL = "WARNING"
    mock.LOG_DIR = "logs"
    return mock


@pytest.fixture
def cli_env(tmp_path, monkeypatch, settings):
    """Run the CLI inside tmp_path with fixed settings."""
    monkeypatch.chdir(tmp_path)
    with patch("src.adapter.driving.cli.app.get_settings", return_value=settings), patch(
        "src.config.logging.get_settings", return_value=settings
    ):
        yield tmp_path
