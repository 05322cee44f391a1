"""Super-resolution of noisy color images with channel-adaptive data weights,
weighted nuclear norm minimization over similar-patch groups, and a
multi-scale PCA detail term."""
from .config import RunConfig, load_config
from .errors import (
    AdmmDivergenceError,
    ChromaSRError,
    ConfigError,
    InvalidArgumentError,
    NumericalError,
    StageError,
)
from .imgcore import ColorImage, DegradationModel, PatchIndex
from .kernels import BACKEND
from .noisest import NoiseProfile, estimate_noise_profile
from .recon import run_pipeline

__version__ = "0.1.0"
