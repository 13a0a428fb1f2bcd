"""Common behaviour of the model adapters implementing ExitModelPort."""
import logging
from collections import OrderedDict
from typing import Optional, Tuple

from src.core.domain.entities.exit_function import ExitFunctionBase
from src.core.domain.entities.model_spec import ModelSpecBase, ParameterRole
from src.core.domain.entities.rescale_map import RescaleMap
from src.core.port.model_port import ExitModelPort

logger = logging.getLogger(__name__)

PAIR_CACHE_SIZE = 64

Pair = Tuple[ExitFunctionBase, ExitFunctionBase]


class ModelAdapterBase(ExitModelPort):
    """Caches pairs per parameter and supplies the defaults most families share."""

    default_bracket: Tuple[float, float] = (0.0, 1.0)

    def __init__(self, spec: ModelSpecBase):
        """Initialize the adapter.

        Args:
            spec: Validated model specification
        """
        self.spec = spec
        self._pairs: "OrderedDict[float, Pair]" = OrderedDict()
        logger.info(f"{type(self).__name__} initialized for {self.family}")

    @property
    def family(self) -> str:
        return str(getattr(self.spec, "family"))

    @property
    def parameter_role(self) -> ParameterRole:
        return getattr(self.spec, "parameter_role")

    def _build_pair(self, parameter: float) -> Pair:
        raise NotImplementedError

    def pair(self, parameter: float) -> Pair:
        key = float(parameter)
        cached = self._pairs.get(key)
        if cached is not None:
            self._pairs.move_to_end(key)
            return cached
        try:
            built = self._build_pair(key)
        except Exception as e:
            logger.error(f"Error building {self.family} pair at {key}: {str(e)}")
            raise
        self._pairs[key] = built
        if len(self._pairs) > PAIR_CACHE_SIZE:
            self._pairs.popitem(last=False)
        return built

    def domain_map(self, parameter: float) -> RescaleMap:
        return RescaleMap()

    def initial_state(self, parameter: float) -> float:
        """f-state after one iteration from the all-unknown state, h_f(1)."""
        hf, _ = self.pair(parameter)
        return float(hf.eval(1.0))

    def parameter_bracket(self) -> Tuple[float, float]:
        if self.spec.bracket is not None:
            return self.spec.bracket
        return self.default_bracket

    def closed_form_uncoupled(self) -> Optional[float]:
        return None

    def closed_form_coupled(self) -> Optional[float]:
        return None
