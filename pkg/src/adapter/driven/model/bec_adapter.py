"""LDPC ensembles on the binary erasure channel."""
import logging
from typing import Optional, Tuple

import numpy as np
from numpy.polynomial import polynomial as P
from scipy import optimize

from src.adapter.driven.model.base_adapter import ModelAdapterBase, Pair
from src.core.domain.entities.exit_function import Analytic
from src.core.domain.entities.model_spec import BecLdpcSpec

logger = logging.getLogger(__name__)

FIXED_POINT_GRID = 20_000


def _fixed_point_grid() -> np.ndarray:
    return np.union1d(
        np.geomspace(1e-10, 1.0, FIXED_POINT_GRID),
        np.linspace(0.0, 1.0, FIXED_POINT_GRID + 1)[1:],
    )


class BecLdpcAdapter(ModelAdapterBase):
    """h_f(y) = eps lambda(y) and h_g(x) = 1 - rho(1 - x).

    Coefficient lists are indexed by power, so ``lam[k]`` is the fraction of edges
    on variable nodes of degree k + 1.
    """

    default_bracket = (0.2, 0.7)

    def __init__(self, spec: BecLdpcSpec):
        super().__init__(spec)
        self.lam = np.asarray(spec.lam, dtype=float)
        self.rho = np.asarray(spec.rho, dtype=float)

    def _build_pair(self, parameter: float) -> Pair:
        if not 0.0 <= parameter <= 1.0:
            raise ValueError(f"Erasure probability must lie in [0, 1], got {parameter}")
        hf = Analytic(closure_id="scaled_polynomial", params=(parameter, *self.spec.lam))
        hg = Analytic(closure_id="polynomial.complement", params=tuple(self.spec.rho))
        return hf, hg

    def _parametrized_fixed_points(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Fixed points indexed by the f-state x: (x, y(x), eps(x))."""
        x = _fixed_point_grid()
        y = 1.0 - P.polyval(1.0 - x, self.rho)
        eps = x / np.maximum(P.polyval(y, self.lam), 1e-300)
        return x, y, eps

    def closed_form_uncoupled(self) -> Optional[float]:
        """inf over x in (0, 1] of x / lambda(1 - rho(1 - x))."""
        _, _, eps = self._parametrized_fixed_points()
        return float(eps.min())

    def _fixed_point_potential(self, x: np.ndarray) -> np.ndarray:
        """Potential at the fixed point (y(x), x) of the channel eps(x)."""
        lam_int = P.polyint(self.lam)
        rho_int = P.polyint(self.rho)
        y = 1.0 - P.polyval(1.0 - x, self.rho)
        eps = x / np.maximum(P.polyval(y, self.lam), 1e-300)
        check_area = x - (P.polyval(1.0, rho_int) - P.polyval(1.0 - x, rho_int))
        return y * x - eps * P.polyval(y, lam_int) - check_area

    def closed_form_coupled(self) -> Optional[float]:
        """Smallest eps(x) over fixed points whose potential is not positive."""
        x, _, eps = self._parametrized_fixed_points()
        phi = self._fixed_point_potential(x)
        candidates = list(eps[phi <= 0.0])
        for i in np.flatnonzero(phi[:-1] * phi[1:] < 0.0):
            root = optimize.brentq(
                lambda t: float(self._fixed_point_potential(np.array([t]))[0]),
                x[i],
                x[i + 1],
                xtol=1e-15,
            )
            y = 1.0 - P.polyval(1.0 - root, self.rho)
            candidates.append(root / P.polyval(y, self.lam))
        if not candidates:
            return None
        return float(min(candidates))
