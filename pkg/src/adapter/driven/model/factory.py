"""Model adapter selection by specification family."""
import logging

from src.adapter.driven.model.bec_adapter import BecLdpcAdapter
from src.adapter.driven.model.gallager_adapter import GallagerAAdapter, GallagerBAdapter
from src.adapter.driven.model.gaussian_exit_adapter import BawgnExitAdapter, MinSumExitAdapter
from src.adapter.driven.model.precision_adapter import CdmaAdapter, CompressedSensingAdapter
from src.adapter.driven.model.quadrature_resource import QuadratureResource
from src.core.domain.entities.model_spec import (
    BawgnExitSpec,
    BecLdpcSpec,
    CdmaSpec,
    CompressedSensingSpec,
    GallagerASpec,
    GallagerBSpec,
    MinSumExitSpec,
    ModelSpecBase,
)
from src.core.domain.exceptions import ConfigurationError
from src.core.port.model_port import ExitModelPort

logger = logging.getLogger(__name__)


class ModelFactory:
    """Builds the ExitModelPort implementation for a model specification."""

    def __init__(self, quadrature: QuadratureResource):
        """Initialize the factory.

        Args:
            quadrature: Shared quadrature resource for the tabulated families
        """
        self.quadrature = quadrature
        logger.info("ModelFactory initialized")

    def create(self, spec: ModelSpecBase) -> ExitModelPort:
        """Create the adapter for a specification.

        Raises:
            ConfigurationError: If the family has no adapter
        """
        if isinstance(spec, BecLdpcSpec):
            return BecLdpcAdapter(spec)
        if isinstance(spec, GallagerASpec):
            return GallagerAAdapter(spec)
        if isinstance(spec, GallagerBSpec):
            return GallagerBAdapter(spec)
        if isinstance(spec, BawgnExitSpec):
            return BawgnExitAdapter(spec, self.quadrature)
        if isinstance(spec, MinSumExitSpec):
            return MinSumExitAdapter(spec, self.quadrature)
        if isinstance(spec, CdmaSpec):
            return CdmaAdapter(spec, self.quadrature)
        if isinstance(spec, CompressedSensingSpec):
            return CompressedSensingAdapter(spec, self.quadrature)
        raise ConfigurationError(
            f"No model adapter for {type(spec).__name__}",
            details={"spec": type(spec).__name__},
        )
