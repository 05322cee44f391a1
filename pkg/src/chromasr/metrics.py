"""PSNR and SSIM."""
from dataclasses import dataclass
import math

import numpy as np
from scipy.ndimage import correlate1d

from .errors import InvalidArgumentError

PEAK = 255.0
LUMA = np.array([0.299, 0.587, 0.114])
SSIM_WIN = 11
SSIM_SIGMA = 1.5
K1, K2 = 0.01, 0.03


@dataclass(frozen=True)
class EvalReport:
    psnr_db: float
    ssim: float
    per_channel_psnr: tuple

    def as_dict(self):
        return {"psnr": _jsonable(self.psnr_db), "ssim": self.ssim,
                "per_channel_psnr": [_jsonable(v) for v in self.per_channel_psnr]}


def _jsonable(v):
    return "inf" if math.isinf(v) else v


def _pair(a, b, shave=0):
    pa = getattr(a, "planes", a)
    pb = getattr(b, "planes", b)
    pa = np.asarray(pa, dtype=np.float64)
    pb = np.asarray(pb, dtype=np.float64)
    if pa.shape != pb.shape:
        raise InvalidArgumentError(f"shape mismatch: {pa.shape} vs {pb.shape}")
    if shave:
        pa = pa[..., shave:-shave, shave:-shave]
        pb = pb[..., shave:-shave, shave:-shave]
    return pa, pb


def _psnr_from_mse(mse):
    return math.inf if mse == 0 else 10.0 * math.log10(PEAK ** 2 / mse)


def psnr(a, b, shave=0):
    """10 log10(255^2 / MSE) over all channels jointly; +inf when equal."""
    pa, pb = _pair(a, b, shave)
    return _psnr_from_mse(float(np.mean((pa - pb) ** 2)))


def channel_psnr(a, b, shave=0):
    pa, pb = _pair(a, b, shave)
    return tuple(_psnr_from_mse(float(np.mean((x - y) ** 2))) for x, y in zip(pa, pb))


def gaussian_window(size=SSIM_WIN, sigma=SSIM_SIGMA):
    x = np.arange(size) - (size - 1) / 2.0
    g = np.exp(-(x ** 2) / (2.0 * sigma ** 2))
    return g / g.sum()


def _filter_valid(x, g):
    r = len(g) // 2
    y = correlate1d(correlate1d(x, g, axis=0), g, axis=1)
    return y[r:-r, r:-r]


def luminance(planes):
    return np.tensordot(LUMA, planes, axes=1)


def ssim(a, b, shave=0):
    """Single-scale SSIM on the luminance plane, mean over valid windows."""
    pa, pb = _pair(a, b, shave)
    if min(pa.shape[-2:]) < SSIM_WIN:
        raise InvalidArgumentError(f"SSIM needs images at least {SSIM_WIN}px on each side")
    x = luminance(pa)
    y = luminance(pb)
    g = gaussian_window()
    c1 = (K1 * PEAK) ** 2
    c2 = (K2 * PEAK) ** 2
    mx = _filter_valid(x, g)
    my = _filter_valid(y, g)
    sxx = _filter_valid(x * x, g) - mx * mx
    syy = _filter_valid(y * y, g) - my * my
    sxy = _filter_valid(x * y, g) - mx * my
    num = (2.0 * mx * my + c1) * (2.0 * sxy + c2)
    den = (mx * mx + my * my + c1) * (sxx + syy + c2)
    return float(np.mean(num / den))


def evaluate(estimate, reference, shave=0):
    return EvalReport(psnr(estimate, reference, shave), ssim(estimate, reference, shave),
                      channel_psnr(estimate, reference, shave))
