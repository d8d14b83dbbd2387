"""Semantic feature assembly.

A semantic feature is a (keypoint, descriptor, class label) triple: the
descriptor is one spatial cell of an intermediate feature map, the keypoint
is the center of that cell's receptive field, and the label is read from the
segmentation mask at the keypoint.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .rf_geom import KeypointMode, RFState


@dataclass
class LabelMask:
    """Per-pixel class ids, 0..K-1, at full input resolution."""

    labels: np.ndarray  # (height, width), integer

    @property
    def height(self) -> int:
        return self.labels.shape[0]

    @property
    def width(self) -> int:
        return self.labels.shape[1]


@dataclass
class FeatureSet:
    """Parallel arrays of keypoints, descriptors and class labels."""

    keypoints: np.ndarray    # (n, 2) float64, (x, y) input-pixel coords
    descriptors: np.ndarray  # (n, C) float32
    labels: np.ndarray       # (n,) integer class ids
    width: int
    height: int

    def __len__(self) -> int:
        return len(self.keypoints)


def threshold_mask(prob: np.ndarray, threshold: float = 0.5) -> LabelMask:
    """Binarize a probability mask: label 1 strictly above the threshold."""
    prob = np.asarray(prob)
    if prob.ndim != 2:
        raise ValueError(f"probability mask must be 2-D, got shape {prob.shape}")
    if prob.min() < 0.0 or prob.max() > 1.0:
        raise ValueError("probability values must lie in [0, 1]")
    return LabelMask((prob > threshold).astype(np.uint8))


def assemble_features(fmap: np.ndarray, mask: LabelMask, state: RFState,
                      mode: KeypointMode = KeypointMode.JUMP_CENTER) -> FeatureSet:
    """Build one feature per spatial cell of a (C, h, w) feature map.

    Keypoints come from the receptive-field geometry; each is labelled with
    the mask value under it (nearest pixel via floor, clamped at borders).
    Cells are emitted in row-major order.
    """
    fmap = np.asarray(fmap)
    if fmap.ndim != 3:
        raise ValueError(f"feature map must be (C, h, w), got shape {fmap.shape}")
    c, h, w = fmap.shape
    scale = state.jump if mode is KeypointMode.JUMP_CENTER else state.rf

    cols, rows = np.meshgrid(np.arange(w), np.arange(h))
    xs = cols.ravel() * scale + state.start
    ys = rows.ravel() * scale + state.start
    keypoints = np.column_stack([xs, ys]).astype(np.float64)

    px = np.clip(np.floor(xs).astype(np.int64), 0, mask.width - 1)
    py = np.clip(np.floor(ys).astype(np.int64), 0, mask.height - 1)
    labels = mask.labels[py, px]

    descriptors = fmap.reshape(c, h * w).T.astype(np.float32)
    return FeatureSet(keypoints, descriptors, np.asarray(labels),
                      mask.width, mask.height)


def select_classes(feats: FeatureSet, classes) -> FeatureSet:
    """Keep only features whose label is in `classes`, preserving order."""
    keep = np.isin(feats.labels, np.asarray(list(classes)))
    return FeatureSet(feats.keypoints[keep], feats.descriptors[keep],
                      feats.labels[keep], feats.width, feats.height)
