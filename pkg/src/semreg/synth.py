"""Synthetic image-pair fixtures.

A smooth world descriptor field (random sinusoids over world coordinates)
and a stripe "road" pattern stand in for real aerial pairs: the reference
image samples the world through the identity, the query through the
ground-truth transform, so the true registration is known exactly.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Tuple

import numpy as np

from .features import LabelMask
from .geo_fit import TransformModel, apply_transform
from .tensor_io import RasterImage


@dataclass
class SynthSpec:
    width: int = 256
    height: int = 256
    jump: int = 8          # feature-grid pitch in pixels
    channels: int = 64
    stripe_period: float = 64.0  # world-space road spacing
    stripe_width: float = 12.0
    # descriptor field frequency band; wavelengths well below the grid
    # pitch make the ratio test reject any correspondence that is not
    # sub-pixel accurate, which is what keeps registration sharp
    min_wavelength: float = 4.0
    max_wavelength: float = 12.0
    noise: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.channels < 8:
            raise ValueError("channel count must be >= 8")


@dataclass
class SynthImage:
    fmap: np.ndarray  # (C, h, w) float32
    mask: LabelMask


def _field_params(spec: SynthSpec):
    rng = np.random.default_rng([spec.seed, 0])
    theta = rng.uniform(0.0, 2.0 * np.pi, size=spec.channels)
    wavelength = rng.uniform(spec.min_wavelength, spec.max_wavelength,
                             size=spec.channels)
    k = 2.0 * np.pi / wavelength
    kx = k * np.cos(theta)
    ky = k * np.sin(theta)
    phase = rng.uniform(0.0, 2.0 * np.pi, size=spec.channels)
    return kx, ky, phase


def _sample_field(spec: SynthSpec, pts: np.ndarray) -> np.ndarray:
    """Descriptor field at world points; returns (n, C)."""
    kx, ky, phase = _field_params(spec)
    return np.sin(pts[:, 0, None] * kx[None, :]
                  + pts[:, 1, None] * ky[None, :] + phase[None, :])


def _class_pattern(spec: SynthSpec, pts: np.ndarray) -> np.ndarray:
    """Stripe roads in both world axes: label 1 on a stripe, else 0."""
    u = np.mod(pts[:, 0], spec.stripe_period)
    v = np.mod(pts[:, 1], spec.stripe_period)
    return ((u < spec.stripe_width) | (v < spec.stripe_width)).astype(np.uint8)


def _pixel_centers(width: int, height: int) -> np.ndarray:
    xs, ys = np.meshgrid(np.arange(width) + 0.5, np.arange(height) + 0.5)
    return np.column_stack([xs.ravel(), ys.ravel()])


def _grid_keypoints(spec: SynthSpec) -> Tuple[np.ndarray, int, int]:
    h = spec.height // spec.jump
    w = spec.width // spec.jump
    cols, rows = np.meshgrid(np.arange(w), np.arange(h))
    pts = np.column_stack([cols.ravel() * spec.jump + 0.5,
                           rows.ravel() * spec.jump + 0.5]).astype(np.float64)
    return pts, h, w


def synth_pair(spec: SynthSpec, t_gt: TransformModel
               ) -> Tuple[SynthImage, SynthImage]:
    """Deterministic (query, reference) pair whose true transform is t_gt.

    t_gt maps query pixel coordinates to reference (world) coordinates.
    With t_gt identity and zero noise the two images are identical.
    """
    kp, h, w = _grid_keypoints(spec)

    ref_desc = _sample_field(spec, kp)
    query_desc = _sample_field(spec, apply_transform(t_gt, kp))
    if spec.noise > 0.0:
        ref_desc = ref_desc + np.random.default_rng([spec.seed, 1]).normal(
            0.0, spec.noise, size=ref_desc.shape)
        query_desc = query_desc + np.random.default_rng([spec.seed, 2]).normal(
            0.0, spec.noise, size=query_desc.shape)

    centers = _pixel_centers(spec.width, spec.height)
    ref_mask = _class_pattern(spec, centers).reshape(spec.height, spec.width)
    query_mask = _class_pattern(spec, apply_transform(t_gt, centers)) \
        .reshape(spec.height, spec.width)

    def to_fmap(desc):
        return desc.T.reshape(spec.channels, h, w).astype(np.float32)

    return (SynthImage(to_fmap(query_desc), LabelMask(query_mask)),
            SynthImage(to_fmap(ref_desc), LabelMask(ref_mask)))


def render_image(spec: SynthSpec, transform: TransformModel) -> RasterImage:
    """Grayscale rendering of the world (first field channel + roads) as seen
    through `transform`; handy for checkerboard output."""
    pts = apply_transform(transform, _pixel_centers(spec.width, spec.height))
    shade = _sample_field(spec, pts)[:, 0]
    roads = _class_pattern(spec, pts).astype(np.float64)
    v = 96.0 + 64.0 * shade + 64.0 * roads
    pixels = np.clip(v, 0, 255).astype(np.uint8).reshape(spec.height, spec.width)
    return RasterImage(spec.width, spec.height, 1, pixels)
