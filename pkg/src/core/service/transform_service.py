"""Coordinate changes and approximations of EXIT functions."""
import logging
from typing import Tuple

import numpy as np

from src.core.domain.entities.exit_function import (
    Affine,
    ExitFunctionBase,
    PiecewiseConstant,
    PiecewiseLinear,
    unit_step,
)
from src.core.domain.entities.rescale_map import RescaleMap
from src.core.domain.exceptions import DegenerateBoxError

logger = logging.getLogger(__name__)

Point = Tuple[float, float]


class TransformService:
    """Rescaling to crossing boxes, tilting and quantization."""

    def __init__(self) -> None:
        """Initialize the transform service."""
        logger.info("TransformService initialized")

    def rescale_to_box(
        self, hf: ExitFunctionBase, hg: ExitFunctionBase, lo: Point, hi: Point
    ) -> Tuple[ExitFunctionBase, ExitFunctionBase, RescaleMap]:
        """Rescale a pair so that the crossings lo and hi become (0,0) and (1,1).

        Args:
            hf: Variable-side function u -> v
            hg: Check-side function v -> u
            lo: Crossing mapped to the origin
            hi: Crossing mapped to (1, 1)

        Returns:
            The rescaled pair and the map from raw to box coordinates

        Raises:
            DegenerateBoxError: If a side is shorter than 1e-12 or the orientations disagree
        """
        box = RescaleMap.between(lo, hi)
        if box.is_identity:
            return hf, hg, box
        if box.inverted:
            raise DegenerateBoxError(
                "Box corners are not component-wise ordered",
                details={"lo": list(lo), "hi": list(hi)},
            )
        hf_box = Affine(
            inner=hf,
            in_shift=box.origin_u,
            in_scale=box.scale_u,
            out_shift=box.origin_v,
            out_scale=box.scale_v,
        )
        hg_box = Affine(
            inner=hg,
            in_shift=box.origin_v,
            in_scale=box.scale_v,
            out_shift=box.origin_u,
            out_scale=box.scale_u,
        )
        logger.debug(f"Rescaled pair to box {lo} -> {hi}")
        return hf_box, hg_box, box

    def tilt(self, h: ExitFunctionBase, t: float) -> ExitFunctionBase:
        """Blend the inverse towards its mean: h^-1(v; t) = (1 - t) B_h + t h^-1(v).

        The integral of the inverse, B_h, is preserved for every t.
        """
        if not 0.0 <= t <= 1.0:
            raise ValueError(f"Tilt parameter must lie in [0, 1], got {t}")
        if t == 1.0:
            return h
        b = h.b_integral()
        if t == 0.0:
            return unit_step(b)
        offset = (1.0 - t) * b
        if isinstance(h, PiecewiseConstant):
            return PiecewiseConstant(
                positions=tuple(float(offset + t * p) for p in h.positions),
                heights=h.heights,
            )
        if isinstance(h, PiecewiseLinear):
            knots_u = [0.0, offset] + [offset + t * u for u in h.knots_u] + [offset + t, 1.0]
            knots_v = [0.0, 0.0] + list(h.knots_v) + [1.0, 1.0]
            return PiecewiseLinear(
                knots_u=tuple(float(np.clip(u, 0.0, 1.0)) for u in knots_u),
                knots_v=tuple(float(v) for v in knots_v),
            )
        return Affine(inner=h, in_shift=-offset / t, in_scale=1.0 / t, out_shift=0.0, out_scale=1.0)

    def quantize(self, h: ExitFunctionBase, n: int) -> PiecewiseConstant:
        """Piecewise-constant approximation with n jumps of height 1/n.

        The j-th jump sits at n times the integral of h^-1 over [(j-1)/n, j/n], so the
        integral of h is preserved and the running integral never exceeds that of h.
        """
        if n < 1:
            raise ValueError(f"Quantization order must be positive, got {n}")
        levels = np.linspace(0.0, 1.0, n + 1)
        running = np.asarray(h.inverse().integral(levels), dtype=float)
        positions = np.clip(n * np.diff(running), 0.0, 1.0)
        positions = np.maximum.accumulate(positions)
        return PiecewiseConstant(
            positions=tuple(float(p) for p in positions),
            heights=tuple([1.0 / n] * n),
        )
