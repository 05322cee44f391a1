"""Per-group ADMM solver for the channel-weighted WNNM problem.

For one group with noisy detail matrix ``X`` (3m x s) the solver minimizes

    ||Lambda (X - Z)||_F^2 + ||Z - B S_alpha(B^T X)||_F^2 + sum_k w_k sigma_k(Z)

by splitting Z = F, with augmented Lagrangian
``<Gamma, Z - F> + rho/2 ||Z - F||_F^2`` and a geometrically growing penalty.
"""
from dataclasses import dataclass, field
import json
import math

import numpy as np

from .errors import AdmmDivergenceError, InvalidArgumentError, NumericalError

DIVERGENCE_WINDOW = 20


@dataclass(frozen=True, eq=False)
class ChannelWeight:
    lambda_diag: np.ndarray

    @property
    def squared(self):
        return self.lambda_diag ** 2


def lambda_weights(profile, m):
    """Diagonal of Lambda: 1/sigma_l repeated ``m`` times per channel block."""
    return ChannelWeight(np.repeat(1.0 / profile.sigmas, m))


def uniform_lambda_weights(profile, m):
    sigma_bar = math.sqrt(profile.mean_variance)
    return ChannelWeight(np.full(3 * m, 1.0 / sigma_bar))


def soft_threshold(v, alpha):
    if alpha < 0:
        raise InvalidArgumentError(f"threshold must be >= 0, got {alpha}")
    v = np.asarray(v, dtype=np.float64)
    return np.sign(v) * np.maximum(np.abs(v) - alpha, 0.0)


def sv_weights(sigma_vals, C, eps=1e-16):
    """w_k = C / (sigma_k + eps); non-decreasing for descending input."""
    w = C / (np.asarray(sigma_vals, dtype=np.float64) + eps)
    if np.any(np.diff(w) < 0):
        raise InvalidArgumentError("singular values must be non-increasing")
    return w


def wnnm_constant(s, mean_variance):
    return 2.0 * math.sqrt(2.0 * s) * mean_variance


def _svd(mat):
    try:
        return np.linalg.svd(mat, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        finite = bool(np.all(np.isfinite(mat)))
        fro = float(np.linalg.norm(mat)) if finite else float("nan")
        raise NumericalError(
            f"SVD failed on {mat.shape} matrix (finite={finite}, frobenius={fro:.3e}): {exc}"
        ) from exc


def wnnm_prox(M, w, tau):
    """argmin_Z tau/2 ||Z - M||_F^2 + sum_k w_k sigma_k(Z) for non-decreasing w."""
    U, sig, Vt = _svd(np.asarray(M, dtype=np.float64))
    w = np.broadcast_to(np.asarray(w, dtype=np.float64), sig.shape)
    shrunk = np.maximum(sig - w / tau, 0.0)
    return (U * shrunk) @ Vt


def pca_projection(X_data, B, alpha):
    basis = B.basis if hasattr(B, "basis") else B
    return basis @ soft_threshold(basis.T @ X_data, alpha)


def x_update(X_data, lam, B, alpha, F_var, gamma, rho, P=None):
    """Closed-form Z step (Lambda^T Lambda is diagonal, so row-wise).

    Solves (L^2 + 1 + rho/2) Z = L^2 X + P + (rho/2) F - gamma. Pass a
    precomputed ``P`` to skip the projection.
    """
    if P is None:
        P = pca_projection(X_data, B, alpha)
    l2 = lam.squared[:, None]
    return (l2 * X_data + P + 0.5 * rho * F_var - gamma) / (l2 + 1.0 + 0.5 * rho)


def objective(X_data, Z, lam, P, C, eps=1e-16):
    """Group cost with weights reweighted from the singular values of ``Z``."""
    data = float(np.sum((lam.lambda_diag[:, None] * (X_data - Z)) ** 2))
    pca = float(np.sum((Z - P) ** 2))
    sig = np.linalg.svd(Z, compute_uv=False)
    nuc = float(np.sum(C * sig / (sig + eps)))
    return data + pca + nuc


@dataclass
class AdmmState:
    X_var: np.ndarray
    F_var: np.ndarray
    gamma: np.ndarray
    rho: float
    iter: int = 0
    primal_residual: float = float("inf")
    history: list = field(default_factory=list)


@dataclass(frozen=True)
class AdmmResult:
    F: np.ndarray
    iterations: int
    primal_residual: float
    relative_residual: float
    converged: bool


def admm_solve(group, lam, B, cfg, C, eps=1e-16, trace=None, P=None):
    """Run ADMM on one group and return the low-rank iterate F.

    ``group`` may be a :class:`PatchGroup` or a bare detail matrix. ``trace``
    is an optional writable text stream that receives one JSON line per
    iteration.
    """
    X = group.detail if hasattr(group, "detail") else np.asarray(group, dtype=np.float64)
    if P is None:
        P = pca_projection(X, B, cfg.alpha)
    zero = np.zeros_like(X)
    st = AdmmState(zero, zero.copy(), zero.copy(), float(cfg.rho0))
    rel = float("inf")
    growing = 0
    prev = float("inf")
    first = None

    for k in range(cfg.max_admm_iters):
        rho = st.rho
        # x_update carries the multiplier at half weight: with the rho/2
        # penalty the stationarity condition has -gamma/2 on the right
        Z = x_update(X, lam, B, cfg.alpha, st.F_var, 0.5 * st.gamma, rho, P=P)
        M = Z + st.gamma / rho
        U, sig, Vt = _svd(M)
        w = sv_weights(sig, C, eps)
        F = (U * np.maximum(sig - w / rho, 0.0)) @ Vt
        r = Z - F
        st.gamma = st.gamma + rho * r
        st.X_var, st.F_var = Z, F
        st.rho = rho * cfg.eta
        st.iter = k + 1
        st.primal_residual = float(np.linalg.norm(r))
        rel = st.primal_residual / max(1.0, float(np.linalg.norm(Z)))

        if trace is not None:
            rec = {"iter": st.iter, "rho": rho, "primal_residual": st.primal_residual,
                   "objective": objective(X, F, lam, P, C, eps)}
            trace.write(json.dumps(rec) + "\n")
        st.history.append(st.primal_residual)

        if rel < cfg.admm_tol:
            break
        if first is None:
            first = st.primal_residual
        # reweighting produces slow residual creep on plateaus; only growth
        # past the starting residual counts toward divergence
        worse = st.primal_residual > prev and st.primal_residual > first
        growing = growing + 1 if worse else 0
        prev = st.primal_residual
        if growing >= DIVERGENCE_WINDOW:
            raise AdmmDivergenceError(
                f"primal residual grew for {growing} consecutive iterations "
                f"(iter {st.iter}, rho {rho:.3g}, residual {st.primal_residual:.3e})",
                trace=st.history[-DIVERGENCE_WINDOW - 1:],
            )

    return AdmmResult(st.F_var, st.iter, st.primal_residual, rel, rel < cfg.admm_tol)
