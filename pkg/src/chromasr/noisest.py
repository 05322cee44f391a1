"""Blind per-channel noise level estimation.

Robust median-absolute-deviation estimate on the response of a 3x3
second-difference mask, which annihilates locally planar intensity.
"""
from dataclasses import dataclass

import numpy as np
from scipy.signal import convolve2d

from .errors import InvalidArgumentError

SIGMA_FLOOR = 0.5
MIN_SIZE = 16
BORDER = 2
MAD_TO_SIGMA = 0.6745

HIGHPASS_MASK = np.array([[1.0, -2.0, 1.0], [-2.0, 4.0, -2.0], [1.0, -2.0, 1.0]])
# std of the mask response to unit white noise
MASK_GAIN = float(np.sqrt(np.sum(HIGHPASS_MASK ** 2)))


@dataclass(frozen=True)
class NoiseProfile:
    sigma_r: float
    sigma_g: float
    sigma_b: float

    def __post_init__(self):
        for name in ("sigma_r", "sigma_g", "sigma_b"):
            v = getattr(self, name)
            if not np.isfinite(v) or v <= 0:
                raise InvalidArgumentError(f"{name} must be finite and > 0, got {v}")

    @property
    def sigmas(self):
        return np.array([self.sigma_r, self.sigma_g, self.sigma_b])

    @property
    def variances(self):
        return self.sigmas ** 2

    @property
    def mean_variance(self):
        return float(np.mean(self.variances))

    def as_dict(self):
        return {"sigma": self.sigmas.tolist(), "variance": self.variances.tolist()}


def estimate_channel_sigma(plane, floor=SIGMA_FLOOR):
    plane = np.asarray(plane, dtype=np.float64)
    if plane.ndim != 2 or min(plane.shape) < MIN_SIZE:
        raise InvalidArgumentError(f"plane must be at least {MIN_SIZE}x{MIN_SIZE}, got {plane.shape}")
    resp = convolve2d(plane, HIGHPASS_MASK, mode="same", boundary="symm")
    resp = resp[BORDER:-BORDER, BORDER:-BORDER]
    sigma = np.median(np.abs(resp)) / (MAD_TO_SIGMA * MASK_GAIN)
    return max(float(sigma), floor)


def estimate_noise_profile(img, floor=SIGMA_FLOOR):
    return NoiseProfile(*(estimate_channel_sigma(p, floor) for p in img.planes))


def report_variances(img, floor=SIGMA_FLOOR):
    return tuple(float(v) for v in estimate_noise_profile(img, floor).variances)
