"""Patch aggregation with data continuity, and the end-to-end pipeline."""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
import logging
import math
import time

import numpy as np

from . import grouping, imgcore, kernels, noisest, wnnm
from .errors import ChromaSRError, InvalidArgumentError, StageError
from .imgcore import ColorImage, DegradationModel, PatchIndex

log = logging.getLogger(__name__)

SCHEMA = "chroma-sr/1"


def readd_mean(solution, nlm_mean):
    return solution + np.asarray(nlm_mean)[:, None]


@dataclass(eq=False)
class FusionProblem:
    """Restored groups as ``(rows, cols, matrix)`` triples, matrix (3m, s)
    holding the patch at (rows[j], cols[j]) in column j."""

    restored_groups: list
    lr_image: ColorImage
    degradation: DegradationModel
    beta: float
    hr_shape: tuple
    patch_side: int = 6

    def accumulate(self):
        h, w = self.hr_shape
        canvas, weights = imgcore.new_canvas(h, w)
        for rows, cols, mat in self.restored_groups:
            blocks = imgcore.matrix_to_blocks(mat, self.patch_side)
            kernels.accumulate_patches(canvas, weights, rows, cols, blocks)
        return canvas, weights


@dataclass
class FusionReport:
    cg_iterations: list = field(default_factory=list)
    cg_residuals: list = field(default_factory=list)
    converged: list = field(default_factory=list)
    residual_history: list = field(default_factory=list)

    @property
    def warning(self):
        return not all(self.converged)


def conjugate_residual(apply_a, b, x0, tol=1e-6, max_iter=200):
    """Conjugate-residual Krylov solve for symmetric positive definite
    ``apply_a``. Same cost per step as CG (one operator application) but the
    residual 2-norm is minimized over the Krylov space, so it never increases.
    Stops when ||r|| / ||b|| < tol.

    Returns (x, iterations, relative residual, residual-norm history).
    """
    bnorm = float(np.linalg.norm(b)) or 1.0
    x = x0.copy()
    r = b - apply_a(x)
    ar = apply_a(r)
    p = r.copy()
    ap = ar.copy()
    rar = float(np.vdot(r, ar))
    hist = [float(np.linalg.norm(r))]
    it = 0
    while hist[-1] / bnorm >= tol and it < max_iter:
        apap = float(np.vdot(ap, ap))
        if apap <= 0.0 or rar <= 0.0:
            break
        a = rar / apap
        x += a * p
        r -= a * ap
        ar = apply_a(r)
        rar_new = float(np.vdot(r, ar))
        beta = rar_new / rar
        p = r + beta * p
        ap = ar + beta * ap
        rar = rar_new
        it += 1
        hist.append(float(np.linalg.norm(r)))
    return x, it, hist[-1] / bnorm, hist


def fusion_operator(weights, beta, model, hr_shape):
    def apply(x):
        out = weights * x
        if beta > 0.0:
            out = out + beta * imgcore.degrade_adjoint_planes(
                imgcore.degrade_planes(x, model), model, hr_shape)
        return out
    return apply


def fuse(problem, tol=1e-6, max_iter=200, report=None):
    """Per-channel solve of (sum P^T P + beta H^T D^T D H) x = sum P^T x_hat
    + beta H^T D^T y, started from the plain overlap average."""
    if problem.beta < 0:
        raise InvalidArgumentError(f"beta must be >= 0, got {problem.beta}")
    canvas, weights = problem.accumulate()
    if np.any(weights <= 0):
        raise InvalidArgumentError("restored patches do not cover every HR pixel")
    avg = canvas / weights[None]
    if problem.beta == 0.0:
        return ColorImage(avg)

    hr_shape = problem.hr_shape
    apply_a = fusion_operator(weights, problem.beta, problem.degradation, hr_shape)
    back = imgcore.degrade_adjoint_planes(problem.lr_image.planes, problem.degradation, hr_shape)
    out = np.empty_like(avg)
    for ch in range(3):
        b = canvas[ch] + problem.beta * back[ch]
        x, it, res, hist = conjugate_residual(apply_a, b, avg[ch], tol, max_iter)
        out[ch] = x
        if report is not None:
            report.cg_iterations.append(it)
            report.cg_residuals.append(res)
            report.converged.append(res < tol)
            report.residual_history.append(hist)
    if report is not None and report.warning:
        log.warning("CG did not reach tolerance %g on every channel", tol)
    return ColorImage(out)


def auto_beta(mean_overlap, mean_variance, factor, gain=100.0, cap=1e4):
    """Data-continuity weight.

    H^T D^T D H has gain about 1/factor^2 per HR pixel while the patch term
    counts each pixel ``mean_overlap`` times; ``gain`` is the expected squared
    error of a restored patch pixel, compared against the LR noise variance.
    """
    return min(cap, gain * factor ** 2 * mean_overlap / mean_variance)


# ----------------------------------------------------------------------------
# pipeline


@dataclass
class PipelineResult:
    image: ColorImage
    report: dict


def _solve_group(work, pyramid, target, cfg, h, lam, C):
    m = cfg.patch_side
    grp = grouping.assemble_group(work, target, cfg, h)
    tvec = grp.matrix[:, 0]
    T = grouping.cross_scale_matches(pyramid, tvec, cfg.per_scale_matches, m)
    B = grouping.pca_basis(T)
    res = wnnm.admm_solve(grp, lam, B, cfg, C)
    return grp.rows, grp.cols, readd_mean(res.F, grp.nlm_mean), res.iterations, res.converged


def _stage(name, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except StageError:
        raise
    except ChromaSRError as exc:
        raise StageError(name, exc) from exc


def run_pipeline(lr, cfg, profile=None):
    """Super-resolve ``lr`` by ``cfg.scale_factor``.

    The returned image is clamped to [0, 255]. ``profile`` overrides blind
    noise estimation.
    """
    cfg.validate()
    timings = {}
    t0 = time.perf_counter()
    d = cfg.scale_factor
    m = cfg.patch_side
    model = DegradationModel(d)

    work = _stage("upscale", imgcore.upscale, lr, d)
    hr_shape = (work.height, work.width)
    if min(hr_shape) < max(m, 16):
        raise StageError("upscale", InvalidArgumentError(f"upscaled image {work} too small"))
    timings["upscale"] = time.perf_counter() - t0

    t = time.perf_counter()
    if profile is None:
        profile = _stage("noise", noisest.estimate_noise_profile, lr)
    mean_var = profile.mean_variance
    if cfg.uniform_lambda:
        lam = wnnm.uniform_lambda_weights(profile, m * m)
    else:
        lam = wnnm.lambda_weights(profile, m * m)
    h = grouping.nlm_bandwidth(mean_var, m * m)
    C = wnnm.wnnm_constant(cfg.group_size, mean_var)
    timings["noise"] = time.perf_counter() - t

    rows = imgcore.patch_positions(work.height, m, cfg.target_stride)
    cols = imgcore.patch_positions(work.width, m, cfg.target_stride)
    targets = [PatchIndex(r, c) for r in rows for c in cols]
    workers = cfg.worker_count()

    passes = []
    fusion_report = FusionReport()
    timings["grouping_admm"] = 0.0
    timings["fusion"] = 0.0
    for p in range(cfg.outer_passes):
        t = time.perf_counter()
        pyramid = _stage("pyramid", imgcore.build_pyramid, work, cfg.pyramid_ratio,
                         cfg.pyramid_levels, m)

        def solve(tg, work=work, pyramid=pyramid):
            return _solve_group(work, pyramid, tg, cfg, h, lam, C)

        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                results = _stage("admm", lambda: list(pool.map(solve, targets)))
        else:
            results = _stage("admm", lambda: [solve(tg) for tg in targets])
        timings["grouping_admm"] += time.perf_counter() - t

        t = time.perf_counter()
        groups = [(r, c, mat) for r, c, mat, _, _ in results]
        probe = FusionProblem(groups, lr, model, 0.0, hr_shape, m)
        _, weights = probe.accumulate()
        if cfg.beta == "auto":
            beta = auto_beta(float(weights.mean()), mean_var, d, cfg.beta_gain, cfg.beta_cap)
        else:
            beta = float(cfg.beta)
        problem = FusionProblem(groups, lr, model, beta, hr_shape, m)
        work = _stage("fusion", fuse, problem, cfg.cg_tol, cfg.cg_max_iter, fusion_report)
        timings["fusion"] += time.perf_counter() - t

        iters = np.array([r[3] for r in results])
        passes.append({
            "pass": p,
            "groups": len(results),
            "beta": beta,
            "admm_iterations_mean": float(iters.mean()),
            "admm_iterations_max": int(iters.max()),
            "admm_unconverged": int(sum(not r[4] for r in results)),
        })

    out = ColorImage(np.clip(work.planes, 0.0, 255.0))
    timings["total"] = time.perf_counter() - t0
    warnings = []
    if fusion_report.warning:
        warnings.append("cg_not_converged")
    if any(ps["admm_unconverged"] for ps in passes):
        warnings.append("admm_not_converged")
    report = {
        "schema": SCHEMA,
        "config": cfg.as_dict(),
        "backend": kernels.BACKEND,
        "input_size": [lr.width, lr.height],
        "output_size": [out.width, out.height],
        "noise_profile": profile.as_dict(),
        "passes": passes,
        "cg": {
            "iterations": fusion_report.cg_iterations,
            "relative_residual": fusion_report.cg_residuals,
        },
        "timings_s": timings,
        "warnings": warnings,
    }
    return PipelineResult(out, report)
