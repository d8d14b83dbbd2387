"""Robust transform estimation: least squares, RANSAC, warping."""

from __future__ import annotations

import json
from dataclasses import dataclass
from math import ceil, log
from typing import Optional, Tuple

import numpy as np

from .tensor_io import RasterImage


class DegenerateConfigurationError(ValueError):
    pass


class NotEnoughMatchesError(ValueError):
    pass


class NoConsensusError(RuntimeError):
    pass


@dataclass
class TransformModel:
    """3x3 row-major map from query pixel coords to reference pixel coords.

    Affine models keep an exact (0, 0, 1) bottom row; homographies are
    normalized so element (2, 2) is 1.
    """

    kind: str  # "affine" | "homography"
    matrix: np.ndarray

    def __post_init__(self):
        self.matrix = np.asarray(self.matrix, dtype=np.float64)
        if self.matrix.shape != (3, 3):
            raise ValueError(f"matrix must be 3x3, got {self.matrix.shape}")
        if self.kind not in ("affine", "homography"):
            raise ValueError(f"unknown transform kind {self.kind!r}")

    @classmethod
    def identity(cls, kind: str = "affine") -> "TransformModel":
        return cls(kind, np.eye(3))

    def inverse(self) -> "TransformModel":
        inv = np.linalg.inv(self.matrix)
        if self.kind == "homography":
            inv = inv / inv[2, 2]
        return TransformModel(self.kind, inv)


@dataclass
class RansacParams:
    threshold: float = 3.0     # inlier reprojection error, pixels
    confidence: float = 0.995
    max_iters: int = 5000
    seed: int = 0

    def __post_init__(self):
        if self.threshold <= 0:
            raise ValueError("threshold must be > 0")
        if not 0.0 < self.confidence < 1.0:
            raise ValueError("confidence must lie in (0, 1)")


def apply_transform(model: TransformModel, points: np.ndarray) -> np.ndarray:
    """Map (x, y) points through the model; accepts one point or an (n, 2) array."""
    pts = np.asarray(points, dtype=np.float64)
    single = pts.ndim == 1
    pts = np.atleast_2d(pts)
    homo = np.column_stack([pts, np.ones(len(pts))]) @ model.matrix.T
    w = homo[:, 2]
    if np.any(np.abs(w) <= 1e-12):
        raise ValueError("point maps to infinity under this transform")
    out = homo[:, :2] / w[:, None]
    return out[0] if single else out


def _check_noncollinear(pts: np.ndarray) -> bool:
    """False if any 3 of the points are (near-)collinear, by the area test."""
    n = len(pts)
    for i in range(n - 2):
        for j in range(i + 1, n - 1):
            for k in range(j + 1, n):
                a, b, c = pts[i], pts[j], pts[k]
                cross = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
                if abs(cross) < 1e-9:
                    return False
    return True


def estimate_affine_lsq(src: np.ndarray, dst: np.ndarray) -> TransformModel:
    """Least-squares affine minimizing reference-side residuals, >= 3 pairs."""
    src = np.asarray(src, dtype=np.float64)
    dst = np.asarray(dst, dtype=np.float64)
    if len(src) < 3:
        raise NotEnoughMatchesError("affine estimation needs >= 3 correspondences")
    A = np.column_stack([src, np.ones(len(src))])
    if np.linalg.matrix_rank(A, tol=1e-9) < 3:
        raise DegenerateConfigurationError("degenerate configuration: collinear points")
    sol, *_ = np.linalg.lstsq(A, dst, rcond=None)
    M = np.eye(3)
    M[:2, :] = sol.T
    return TransformModel("affine", M)


def _hartley_normalization(pts: np.ndarray) -> np.ndarray:
    """Similarity T with centroid 0 and mean distance sqrt(2)."""
    centroid = pts.mean(axis=0)
    d = np.linalg.norm(pts - centroid, axis=1).mean()
    scale = np.sqrt(2.0) / d if d > 0 else 1.0
    return np.array([[scale, 0, -scale * centroid[0]],
                     [0, scale, -scale * centroid[1]],
                     [0, 0, 1.0]])


def estimate_homography_lsq(src: np.ndarray, dst: np.ndarray) -> TransformModel:
    """Normalized DLT homography from >= 4 correspondences."""
    src = np.asarray(src, dtype=np.float64)
    dst = np.asarray(dst, dtype=np.float64)
    if len(src) < 4:
        raise NotEnoughMatchesError("homography estimation needs >= 4 correspondences")
    if np.linalg.matrix_rank(np.column_stack([src, np.ones(len(src))]),
                             tol=1e-9) < 3:
        raise DegenerateConfigurationError("degenerate configuration: collinear points")
    Ts = _hartley_normalization(src)
    Td = _hartley_normalization(dst)
    s = (np.column_stack([src, np.ones(len(src))]) @ Ts.T)[:, :2]
    d = (np.column_stack([dst, np.ones(len(dst))]) @ Td.T)[:, :2]

    n = len(s)
    A = np.zeros((2 * n, 9))
    A[0::2, 0:2] = s
    A[0::2, 2] = 1.0
    A[0::2, 6:8] = -d[:, 0, None] * s
    A[0::2, 8] = -d[:, 0]
    A[1::2, 3:5] = s
    A[1::2, 5] = 1.0
    A[1::2, 6:8] = -d[:, 1, None] * s
    A[1::2, 8] = -d[:, 1]
    _, _, vt = np.linalg.svd(A)
    H = vt[-1].reshape(3, 3)
    H = np.linalg.inv(Td) @ H @ Ts
    if abs(H[2, 2]) < 1e-12:
        raise DegenerateConfigurationError("degenerate homography (zero scale)")
    return TransformModel("homography", H / H[2, 2])


_MIN_SAMPLE = {"affine": 3, "homography": 4}
_FITTERS = {"affine": estimate_affine_lsq, "homography": estimate_homography_lsq}


def _residuals(model: TransformModel, src: np.ndarray, dst: np.ndarray) -> np.ndarray:
    return np.linalg.norm(apply_transform(model, src) - dst, axis=1)


def ransac_fit(match_set, kind: str = "affine",
               params: Optional[RansacParams] = None
               ) -> Tuple[TransformModel, np.ndarray, int]:
    """RANSAC with adaptive termination and a least-squares refit.

    Each trial draws its minimal sample from a generator seeded with
    seed + trial_index, so a parallel implementation would reproduce the
    sequential result exactly.  Returns (model, inlier flags, trials run);
    inlier flags are recomputed against the refit model.
    """
    if params is None:
        params = RansacParams()
    src = np.asarray(match_set.query_kp, dtype=np.float64)
    dst = np.asarray(match_set.ref_kp, dtype=np.float64)
    n = len(src)
    sample_size = _MIN_SAMPLE[kind]
    fitter = _FITTERS[kind]
    if n < sample_size:
        raise NotEnoughMatchesError(
            f"not enough matches: {n} < minimal sample {sample_size}")

    best_count = 0
    best_inliers = None
    n_required = params.max_iters
    trial = 0
    while trial < min(n_required, params.max_iters):
        rng = np.random.default_rng(params.seed + trial)
        # one redraw on a degenerate sample; the trial still counts once
        for _ in range(2):
            idx = rng.choice(n, size=sample_size, replace=False)
            if _check_noncollinear(src[idx]):
                break
        else:
            trial += 1
            continue
        try:
            model = fitter(src[idx], dst[idx])
        except (DegenerateConfigurationError, np.linalg.LinAlgError):
            trial += 1
            continue
        inliers = _residuals(model, src, dst) < params.threshold
        count = int(inliers.sum())
        if count > best_count:
            best_count = count
            best_inliers = inliers
            w = count / n
            if 0.0 < w < 1.0:
                denom = log(1.0 - w ** sample_size)
                if denom < 0.0:
                    n_required = ceil(log(1.0 - params.confidence) / denom)
            elif w >= 1.0:
                n_required = trial + 1
        trial += 1

    if best_count < sample_size + 1:
        raise NoConsensusError(
            f"no consensus: best support {best_count} of {n} matches")

    refit = fitter(src[best_inliers], dst[best_inliers])
    final_inliers = _residuals(refit, src, dst) < params.threshold
    return refit, final_inliers, trial


def warp_image(img: RasterImage, model: TransformModel,
               out_width: int, out_height: int) -> RasterImage:
    """Inverse-map warp with bilinear sampling; out-of-bounds samples are 0.

    Output pixel centers (x+0.5, y+0.5) are pulled back through the inverse
    transform into the source image, which uses the same center convention.
    """
    inv = model.inverse()
    xs, ys = np.meshgrid(np.arange(out_width) + 0.5, np.arange(out_height) + 0.5)
    pts = np.column_stack([xs.ravel(), ys.ravel()])
    srcpts = apply_transform(inv, pts)
    # continuous position -> index space of pixel centers
    fx = srcpts[:, 0] - 0.5
    fy = srcpts[:, 1] - 0.5
    x0 = np.floor(fx).astype(np.int64)
    y0 = np.floor(fy).astype(np.int64)
    wx = fx - x0
    wy = fy - y0

    src = img.pixels.astype(np.float64)
    if img.channels == 1:
        src = src[:, :, None]

    def sample(xi, yi):
        valid = (xi >= 0) & (xi < img.width) & (yi >= 0) & (yi < img.height)
        out = np.zeros((len(xi), src.shape[2]))
        out[valid] = src[yi[valid], xi[valid]]
        return out

    v = (sample(x0, y0) * ((1 - wx) * (1 - wy))[:, None]
         + sample(x0 + 1, y0) * (wx * (1 - wy))[:, None]
         + sample(x0, y0 + 1) * ((1 - wx) * wy)[:, None]
         + sample(x0 + 1, y0 + 1) * (wx * wy)[:, None])
    out = np.clip(np.floor(v + 0.5), 0, 255).astype(np.uint8)
    out = out.reshape(out_height, out_width, src.shape[2])
    if img.channels == 1:
        out = out[:, :, 0]
    return RasterImage(out_width, out_height, img.channels, out)


def transform_to_text(model: TransformModel, inlier_count: int,
                      match_count: int, seed: int) -> str:
    """Serialize a fit result as a structured text (JSON) document."""
    doc = {
        "kind": model.kind,
        "matrix": [float(x) for x in model.matrix.ravel()],
        "inlier_count": int(inlier_count),
        "match_count": int(match_count),
        "seed": int(seed),
    }
    return json.dumps(doc, indent=2, sort_keys=True)


def transform_from_text(text: str) -> Tuple[TransformModel, dict]:
    doc = json.loads(text)
    model = TransformModel(doc["kind"], np.array(doc["matrix"]).reshape(3, 3))
    return model, doc
