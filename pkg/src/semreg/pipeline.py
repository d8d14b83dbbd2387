"""Estimator-style front end tying feature assembly, matching and robust
fitting together.

Both classes follow the scikit-learn conventions (get_params/set_params,
fitted attributes with trailing underscores) so they compose with the usual
tooling.
"""

from __future__ import annotations

from typing import Optional, Sequence, Tuple, Union

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from . import rf_geom
from .descriptors import NormStats
from .features import FeatureSet, LabelMask, assemble_features, threshold_mask
from .geo_fit import RansacParams, TransformModel, apply_transform, ransac_fit
from .matching import MatchSet, match_all
from .rf_geom import KeypointMode
from .synth import SynthImage

MaskLike = Union[LabelMask, np.ndarray]
ImageInput = Union[SynthImage, Tuple[np.ndarray, MaskLike]]


def as_label_mask(mask: MaskLike, threshold: float = 0.5) -> LabelMask:
    """Accept a LabelMask, an integer label array, or a float probability map."""
    if isinstance(mask, LabelMask):
        return mask
    arr = np.asarray(mask)
    if arr.ndim != 2:
        raise ValueError(f"mask must be 2-D, got shape {arr.shape}")
    if np.issubdtype(arr.dtype, np.floating):
        return threshold_mask(arr, threshold)
    return LabelMask(arr.astype(np.int64))


def as_points(X) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != 2:
        raise ValueError(f"expected an (n, 2) point array, got shape {X.shape}")
    return X


class RansacTransformEstimator(BaseEstimator):
    """Robust 2-D transform regressor: fit(src_points, dst_points).

    After fitting, `transform_` holds the model, `inlier_mask_` the flags,
    and predict() maps points through the recovered transform.
    """

    def __init__(self, model="affine", threshold=3.0, confidence=0.995,
                 max_iters=5000, seed=0):
        self.model = model
        self.threshold = threshold
        self.confidence = confidence
        self.max_iters = max_iters
        self.seed = seed

    def fit(self, X, y):
        X = as_points(X)
        y = as_points(y)
        if len(X) != len(y):
            raise ValueError("src and dst point arrays must have equal length")
        matches = MatchSet(X, y, np.zeros(len(X), dtype=np.int64),
                           np.zeros(len(X)))
        params = RansacParams(threshold=self.threshold,
                              confidence=self.confidence,
                              max_iters=self.max_iters, seed=self.seed)
        self.transform_, self.inlier_mask_, self.n_trials_ = ransac_fit(
            matches, kind=self.model, params=params)
        return self

    def predict(self, X):
        if not hasattr(self, "transform_"):
            raise NotFittedError("call fit first")
        return apply_transform(self.transform_, as_points(X))


class SemanticRegistrator(BaseEstimator):
    """Full registration pipeline over (feature map, mask) image inputs.

    fit(query, ref) assembles semantic features on both sides, matches them
    class by class, and estimates the query-to-reference transform; the
    result lands in `transform_`.  predict() maps query-pixel points into
    the reference frame.
    """

    def __init__(self, layers=rf_geom.RESNET34_STRIDE8_PRESET,
                 keypoint_mode="jump", classes=None, pca_dim=100, ratio=0.7,
                 model="affine", ransac_threshold=3.0, ransac_confidence=0.995,
                 ransac_max_iters=5000, seed=0, mask_threshold=0.5):
        self.layers = layers
        self.keypoint_mode = keypoint_mode
        self.classes = classes
        self.pca_dim = pca_dim
        self.ratio = ratio
        self.model = model
        self.ransac_threshold = ransac_threshold
        self.ransac_confidence = ransac_confidence
        self.ransac_max_iters = ransac_max_iters
        self.seed = seed
        self.mask_threshold = mask_threshold

    def _rf_state(self):
        return rf_geom.chain(rf_geom.resolve_layers(self.layers))

    def _features(self, image: ImageInput) -> FeatureSet:
        if isinstance(image, SynthImage):
            fmap, mask = image.fmap, image.mask
        else:
            fmap, mask = image
        mask = as_label_mask(mask, self.mask_threshold)
        mode = KeypointMode(self.keypoint_mode)
        return assemble_features(np.asarray(fmap), mask, self._rf_state(), mode)

    def fit(self, query: ImageInput, ref: ImageInput):
        self.rf_state_ = self._rf_state()
        self.norm_stats_ = NormStats()
        self.query_features_ = self._features(query)
        self.ref_features_ = self._features(ref)
        self.match_set_ = match_all(
            self.query_features_, self.ref_features_, classes=self.classes,
            ratio=self.ratio, pca_target=self.pca_dim, stats=self.norm_stats_)
        params = RansacParams(threshold=self.ransac_threshold,
                              confidence=self.ransac_confidence,
                              max_iters=self.ransac_max_iters, seed=self.seed)
        self.transform_, self.inlier_mask_, self.n_trials_ = ransac_fit(
            self.match_set_, kind=self.model, params=params)
        return self

    def predict(self, X):
        if not hasattr(self, "transform_"):
            raise NotFittedError("call fit first")
        return apply_transform(self.transform_, as_points(X))
