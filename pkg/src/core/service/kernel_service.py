"""Discretization, convolution and continuum smoothing of averaging kernels."""
import logging
import math
from typing import Any, Union

import numpy as np

from src.core.domain.entities.kernel import DiscreteKernel, KernelBase
from src.core.domain.entities.spatial_profile import SpatialProfile
from src.core.domain.exceptions import PitchMismatchError
from src.core.port.service_port import KernelServicePort

logger = logging.getLogger(__name__)

ArrayLike = Union[float, np.ndarray]

TAP_FLOOR = 1e-14
PITCH_TOL = 1e-12
CHUNK = 256


class KernelService(KernelServicePort):
    """Discretization of averaging kernels and convolution of spatial profiles."""

    def __init__(self):
        """Initialize the kernel service."""
        logger.info("KernelService initialized")

    def discretize(self, kernel: KernelBase, delta: float) -> DiscreteKernel:
        """Integrate the kernel over the cells [(i - 1/2) delta, (i + 1/2) delta].

        Args:
            kernel: Averaging kernel
            delta: Grid pitch

        Returns:
            Even taps summing to one; negligible outer taps are dropped

        Raises:
            ValueError: If delta is not positive
        """
        if delta <= 0:
            raise ValueError(f"Grid pitch must be positive, got {delta}")
        try:
            m = max(int(math.ceil(kernel.half_width / delta + 0.5)), 0)
            edges = (np.arange(0, m + 1) + 0.5) * delta
            cdf = np.asarray(kernel.cdf(edges), dtype=float)
            center = 2.0 * cdf[0] - 1.0
            outer = np.diff(cdf)
            # Only the right half is computed; the left half is its mirror image
            keep = np.flatnonzero(outer >= TAP_FLOOR)
            last = int(keep[-1]) + 1 if keep.size else 0
            half = np.concatenate([[center], outer[:last]])
            taps = np.concatenate([half[:0:-1], half])
            taps = taps / taps.sum()
            taps = 0.5 * (taps + taps[::-1])
            discrete = DiscreteKernel(
                pitch=delta,
                taps=tuple(float(t) for t in taps),
                kernel_id=kernel.kernel_id,
            )
            logger.debug(
                f"Discretized {kernel.kernel_id} at pitch {delta:g} into {len(taps)} taps"
            )
            return discrete
        except Exception as e:
            logger.error(f"Error discretizing kernel {kernel.kernel_id}: {str(e)}")
            raise

    def convolve(self, profile: SpatialProfile, kernel: DiscreteKernel) -> SpatialProfile:
        """(f (x) omega)(x_i) on the profile window, padding with the limit values.

        Raises:
            PitchMismatchError: If the profile and kernel pitches differ
        """
        self._check_pitch(profile.pitch, kernel.pitch)
        m = kernel.half_length
        padded = np.concatenate(
            [
                np.full(m, profile.left_limit),
                profile.values,
                np.full(m, profile.right_limit),
            ]
        )
        smoothed = np.convolve(padded, kernel.array, mode="valid")
        return profile.with_values(smoothed)

    def cdf(self, kernel: KernelBase, x: ArrayLike) -> Any:
        """Omega(x), the integral of omega up to x."""
        return kernel.cdf(x)

    def smooth_continuum(
        self, profile: SpatialProfile, kernel: KernelBase, x: ArrayLike
    ) -> Any:
        """Continuous smoothing of the piecewise-constant extension of a grid profile.

        Sample f_i fills the cell [(i - 1/2) pitch, (i + 1/2) pitch); at grid points
        the result equals the discrete convolution with the discretized kernel.
        """
        pts = np.atleast_1d(np.asarray(x, dtype=float))
        lower = (profile.indices - 0.5) * profile.pitch
        upper = (profile.indices + 0.5) * profile.pitch
        first, last = float(lower[0]), float(upper[-1])
        out = np.empty_like(pts)
        for start in range(0, pts.size, CHUNK):
            chunk = pts[start : start + CHUNK]
            weights = np.asarray(kernel.cdf(chunk[:, None] - lower[None, :])) - np.asarray(
                kernel.cdf(chunk[:, None] - upper[None, :])
            )
            left_tail = 1.0 - np.asarray(kernel.cdf(chunk - first))
            right_tail = np.asarray(kernel.cdf(chunk - last))
            out[start : start + CHUNK] = (
                weights @ profile.values
                + profile.left_limit * left_tail
                + profile.right_limit * right_tail
            )
        if np.ndim(x) == 0:
            return float(out[0])
        return out.reshape(np.shape(x))

    @staticmethod
    def _check_pitch(a: float, b: float) -> None:
        if abs(a - b) > PITCH_TOL * max(abs(a), abs(b)):
            raise PitchMismatchError(
                f"Grid pitch {a:g} does not match kernel pitch {b:g}",
                details={"profile_pitch": a, "kernel_pitch": b},
            )
