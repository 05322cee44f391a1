"""Non-local patch grouping and the cross-scale PCA detail basis."""
from dataclasses import dataclass
import warnings

import numpy as np

from . import kernels
from .errors import InvalidArgumentError
from .imgcore import PatchIndex, block_to_vector, blocks_to_matrix, vector_to_block


class SkippedLevelWarning(UserWarning):
    pass


@dataclass(frozen=True, eq=False)
class PatchGroup:
    target: PatchIndex
    members: tuple
    distances: np.ndarray
    matrix: np.ndarray
    nlm_mean: np.ndarray
    detail: np.ndarray

    @property
    def rows(self):
        return np.array([p.row for p in self.members], dtype=np.int64)

    @property
    def cols(self):
        return np.array([p.col for p in self.members], dtype=np.int64)


@dataclass(frozen=True, eq=False)
class MultiScaleBasis:
    basis: np.ndarray
    eigenvalues: np.ndarray


def _ranked(dist, target_flat):
    """Indices of ``dist`` (flattened row-major) by ascending distance; the
    target goes first, remaining ties keep scan order."""
    flat = dist.ravel()
    is_other = np.ones(flat.size, dtype=np.int8)
    if target_flat is not None:
        is_other[target_flat] = 0
    return np.lexsort((np.arange(flat.size), flat, is_other))


def search_window_bounds(height, width, target, window, m_side):
    half = window // 2
    r0 = max(0, target.row - half)
    r1 = min(height - m_side, target.row + half)
    c0 = max(0, target.col - half)
    c1 = min(width - m_side, target.col + half)
    return r0, r1, c0, c1


def find_similar_patches(img, target, window=25, s=20, m_side=6, return_distances=False):
    """The ``s`` patches closest to ``target`` (stacked-RGB l2) among all
    top-left positions in the ``window`` x ``window`` neighbourhood."""
    if window < 1 or window % 2 == 0:
        raise InvalidArgumentError(f"search window must be odd and positive, got {window}")
    if s < 1:
        raise InvalidArgumentError(f"group size must be >= 1, got {s}")
    h, w = img.height, img.width
    if not (0 <= target.row <= h - m_side and 0 <= target.col <= w - m_side):
        raise InvalidArgumentError(f"target {target} outside {w}x{h} image for {m_side}px patches")

    r0, r1, c0, c1 = search_window_bounds(h, w, target, window, m_side)
    tpatch = img.planes[:, target.row:target.row + m_side, target.col:target.col + m_side]
    dist = kernels.patch_ssd(img.planes, tpatch, r0, r1, c0, c1)
    # the target compares equal to itself exactly, whatever the backend
    nc = c1 - c0 + 1
    tflat = (target.row - r0) * nc + (target.col - c0)
    order = _ranked(dist, tflat)[:s]
    dflat = dist.ravel()
    members = [PatchIndex(r0 + int(k) // nc, c0 + int(k) % nc, target.scale_level) for k in order]
    dists = dflat[order].copy()
    dists[0] = 0.0
    if return_distances:
        return members, dists
    return members


def nlm_weights(group_matrix, h):
    if h <= 0:
        raise InvalidArgumentError(f"NLM bandwidth h must be > 0, got {h}")
    diff = group_matrix - group_matrix[:, :1]
    d2 = np.einsum("ij,ij->j", diff, diff)
    # shift by the minimum for stability; cancels in the normalization
    logits = -(d2 - d2.min()) / h
    w = np.exp(logits)
    return w / w.sum()


def nlm_mean(group_matrix, h):
    """Exponentially distance-weighted mean of the columns; column 0 is the
    reference patch."""
    group_matrix = np.asarray(group_matrix, dtype=np.float64)
    ref = group_matrix[:, 0]
    # summed relative to the reference so identical columns return it exactly
    return ref + (group_matrix - ref[:, None]) @ nlm_weights(group_matrix, h)


def nlm_bandwidth(mean_variance, m_pixels):
    """h = 2 * (3m) * mean noise variance."""
    return 2.0 * 3 * m_pixels * mean_variance


def assemble_group(img, target, cfg, h):
    m = cfg.patch_side
    members, dists = find_similar_patches(
        img, target, cfg.search_window, cfg.group_size, m, return_distances=True
    )
    rows = [p.row for p in members]
    cols = [p.col for p in members]
    matrix = blocks_to_matrix(kernels.extract_patches(img.planes, rows, cols, m))
    mean = nlm_mean(matrix, h)
    detail = matrix - mean[:, None]
    return PatchGroup(target, tuple(members), dists, matrix, mean, detail)


def cross_scale_matches(pyramid, target_vec, per_scale, m_side=6):
    """Pool the ``per_scale`` best l2 matches of ``target_vec`` from every
    pyramid level into a (3m, t) matrix, level 0 first."""
    if not pyramid:
        raise InvalidArgumentError("pyramid is empty")
    if per_scale < 1:
        raise InvalidArgumentError(f"per_scale must be >= 1, got {per_scale}")
    tpatch = np.ascontiguousarray(vector_to_block(target_vec, m_side))
    cols = []
    for level, img in enumerate(pyramid):
        if img.height < m_side or img.width < m_side:
            warnings.warn(
                f"pyramid level {level} ({img.width}x{img.height}) smaller than patch; skipped",
                SkippedLevelWarning,
                stacklevel=2,
            )
            continue
        dist = kernels.patch_ssd(img.planes, tpatch, 0, img.height - m_side, 0, img.width - m_side)
        nc = img.width - m_side + 1
        order = _ranked(dist, None)[:per_scale]
        rows = order // nc
        cc = order % nc
        cols.append(blocks_to_matrix(kernels.extract_patches(img.planes, rows, cc, m_side)))
    if not cols:
        return np.zeros((len(target_vec), 0))
    return np.hstack(cols)


def pca_basis(detail_columns):
    t_mat = np.asarray(detail_columns, dtype=np.float64)
    t = t_mat.shape[1]
    if t < 2:
        raise InvalidArgumentError(f"PCA needs at least 2 columns, got {t}")
    centered = t_mat - t_mat.mean(axis=1, keepdims=True)
    scatter = (centered @ centered.T) / t
    evals, evecs = np.linalg.eigh(scatter)
    evals = evals[::-1]
    evecs = evecs[:, ::-1]
    evals = np.where(evals < 0.0, 0.0, evals)
    # largest-magnitude entry of each eigenvector made non-negative
    lead = evecs[np.argmax(np.abs(evecs), axis=0), np.arange(evecs.shape[1])]
    evecs = evecs * np.where(lead < 0, -1.0, 1.0)
    return MultiScaleBasis(np.ascontiguousarray(evecs), evals)


def target_vector(img, target, m_side):
    block = img.planes[:, target.row:target.row + m_side, target.col:target.col + m_side]
    return block_to_vector(block)
