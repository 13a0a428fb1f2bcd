from typing import Optional, Protocol, Tuple

from src.core.domain.entities.exit_function import ExitFunctionBase
from src.core.domain.entities.model_spec import ParameterRole
from src.core.domain.entities.rescale_map import RescaleMap


class ExitModelPort(Protocol):
    """Protocol defining the interface of a parametrized family of EXIT pairs."""

    @property
    def family(self) -> str:
        """Family tag of the model specification."""
        ...

    @property
    def parameter_role(self) -> ParameterRole:
        """Meaning of the channel parameter."""
        ...

    def pair(self, parameter: float) -> Tuple[ExitFunctionBase, ExitFunctionBase]:
        """Build the (hf, hg) pair in canonical unit-square coordinates.

        Args:
            parameter: Channel parameter (erasure probability, noise variance or entropy)

        Returns:
            The variable-side function hf and the check-side function hg

        Raises:
            QuadratureFailureError: If a tabulated quantity cannot be computed
            DegenerateBoxError: If the canonical box of an unbounded model collapses
        """
        ...

    def domain_map(self, parameter: float) -> RescaleMap:
        """Map from raw model coordinates to the canonical unit square.

        Args:
            parameter: Channel parameter

        Returns:
            The rescale map; identity for models already living on [0, 1]^2
        """
        ...

    def initial_state(self, parameter: float) -> float:
        """Canonical f-side state the uncoupled recursion starts from."""
        ...

    def parameter_bracket(self) -> Tuple[float, float]:
        """Declared parameter range for threshold searches."""
        ...

    def closed_form_uncoupled(self) -> Optional[float]:
        """Uncoupled threshold from a closed-form infimum, when the family has one."""
        ...

    def closed_form_coupled(self) -> Optional[float]:
        """Coupled threshold from a closed-form infimum, when the family has one."""
        ...
