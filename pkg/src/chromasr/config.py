"""Run configuration with validation and ``key = value`` file loading."""
from dataclasses import asdict, dataclass, fields, replace
import os

from .errors import ConfigError


@dataclass(frozen=True)
class RunConfig:
    scale_factor: int = 3
    patch_side: int = 6
    search_window: int = 25
    group_size: int = 20
    pyramid_ratio: float = 0.8
    pyramid_levels: int = 6
    per_scale_matches: int = 4
    rho0: float = 1.0
    eta: float = 1.02
    alpha: float = 0.8
    max_admm_iters: int = 360
    admm_tol: float = 1e-4
    # "auto" derives beta from noise and overlap; any float overrides it
    beta: object = "auto"
    beta_gain: float = 100.0
    beta_cap: float = 1e4
    outer_passes: int = 1
    target_stride: int = 3
    seed: int = 0
    shave: int = 0
    workers: int = 0
    uniform_lambda: bool = False
    cg_tol: float = 1e-6
    cg_max_iter: int = 200

    def validate(self):
        bad = []
        for name in ("scale_factor", "patch_side", "search_window", "group_size",
                     "per_scale_matches", "max_admm_iters", "outer_passes",
                     "target_stride", "cg_max_iter"):
            if getattr(self, name) < 1:
                bad.append(name)
        if self.scale_factor < 2 and "scale_factor" not in bad:
            bad.append("scale_factor")
        if self.search_window % 2 == 0 and "search_window" not in bad:
            bad.append("search_window")
        if self.pyramid_levels < 0:
            bad.append("pyramid_levels")
        if not 0.0 < self.pyramid_ratio < 1.0:
            bad.append("pyramid_ratio")
        if not self.eta > 1.0:
            bad.append("eta")
        if not self.rho0 > 0.0:
            bad.append("rho0")
        if not self.alpha >= 0.0:
            bad.append("alpha")
        if not self.admm_tol > 0.0:
            bad.append("admm_tol")
        if not self.cg_tol > 0.0:
            bad.append("cg_tol")
        if not self.beta_gain > 0.0:
            bad.append("beta_gain")
        if not self.beta_cap >= 0.0:
            bad.append("beta_cap")
        if self.beta != "auto":
            try:
                if float(self.beta) < 0.0:
                    bad.append("beta")
            except (TypeError, ValueError):
                bad.append("beta")
        for name in ("shave", "workers", "seed"):
            if getattr(self, name) < 0:
                bad.append(name)
        if bad:
            raise ConfigError("invalid configuration: " + ", ".join(bad), bad)
        return self

    def updated(self, **changes):
        changes = {k: v for k, v in changes.items() if v is not None}
        return replace(self, **changes)

    def as_dict(self):
        return asdict(self)

    def worker_count(self):
        return self.workers or os.cpu_count() or 1


_TYPES = {f.name: f.type for f in fields(RunConfig)}


def _coerce(key, raw):
    default = getattr(RunConfig, key)
    raw = raw.strip()
    if key == "beta":
        return raw if raw == "auto" else float(raw)
    if isinstance(default, bool):
        if raw.lower() in ("1", "true", "yes", "on"):
            return True
        if raw.lower() in ("0", "false", "no", "off"):
            return False
        raise ValueError(raw)
    if isinstance(default, int):
        return int(raw)
    return float(raw)


def parse_config_text(text):
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    values = {}
    bad = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'", [])
        key, raw = (s.strip() for s in line.split("=", 1))
        if key not in _TYPES:
            bad.append(key)
            continue
        try:
            values[key] = _coerce(key, raw)
        except ValueError:
            bad.append(key)
    if bad:
        raise ConfigError("invalid config entries: " + ", ".join(bad), bad)
    return values


def load_config(path=None, **overrides):
    """Defaults < config file < explicit overrides (``None`` means unset)."""
    cfg = RunConfig()
    if path is not None:
        with open(path) as fh:
            cfg = cfg.updated(**parse_config_text(fh.read()))
    return cfg.updated(**overrides).validate()
