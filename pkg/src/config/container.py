"""Dependency injection container configuration."""
from dependency_injector import containers, providers

from src.adapter.driven.model.factory import ModelFactory
from src.adapter.driven.model.quadrature_resource import QuadratureResource
from src.adapter.driven.storage.file_adapter import FileStorageAdapter
from src.adapter.driving.cli.handler import CliHandler
from src.core.domain.entities.model_spec import QuadratureConfig
from src.core.service.coupled_service import CoupledService
from src.core.service.kernel_service import KernelService
from src.core.service.potential_service import PotentialService
from src.core.service.threshold_service import ThresholdService
from src.core.service.transform_service import TransformService
from src.core.service.wave_service import WaveService

from .settings import get_settings


class Container(containers.DeclarativeContainer):
    """Application container."""

    # Configuration
    config = providers.Singleton(get_settings)

    # Quadrature; a factory so that a command can pass its own Monte Carlo seed
    quadrature_config = providers.Factory(
        QuadratureConfig,
        gauss_hermite_order=config.provided.GAUSS_HERMITE_ORDER,
        adaptive_tolerance=config.provided.QUADRATURE_TOLERANCE,
        monte_carlo_samples=config.provided.MONTE_CARLO_SAMPLES,
        monte_carlo_seed=config.provided.MONTE_CARLO_SEED,
    )
    quadrature = providers.Factory(QuadratureResource, config=quadrature_config)

    # Model adapters (implement ExitModelPort)
    model_factory = providers.Factory(ModelFactory, quadrature=quadrature)

    # Storage Adapter (implements ResultStoragePort)
    storage_adapter = providers.Factory(
        FileStorageAdapter,
        output_dir=config.provided.output_path,
    )

    # Services
    potential_service = providers.Singleton(PotentialService)
    transform_service = providers.Singleton(TransformService)
    kernel_service = providers.Singleton(KernelService)
    threshold_service = providers.Factory(
        ThresholdService,
        potential=potential_service,
        transform=transform_service,
        n_jobs=1,
    )
    coupled_service = providers.Singleton(
        CoupledService,
        kernels=kernel_service,
        potential=potential_service,
    )
    wave_service = providers.Singleton(
        WaveService,
        potential=potential_service,
        transform=transform_service,
    )

    # Input Port Implementation
    input_port = providers.Factory(
        CliHandler,
        factory=model_factory,
        potential=potential_service,
        transform=transform_service,
        kernels=kernel_service,
        thresholds=threshold_service,
        coupled=coupled_service,
        waves=wave_service,
        storage=storage_adapter,
    )


# Create and configure the container
container = Container()
