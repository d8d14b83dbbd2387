"""Receptive-field arithmetic for a stack of conv/pool layers.

Maps feature-map grid coordinates of a tapped layer back to input-pixel
keypoint coordinates.  Folding a layer stack tracks three quantities: the
jump (effective stride of the feature grid relative to the input), the
receptive-field extent in pixels, and the center coordinate of the first
feature's receptive field.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass
from typing import Iterable, List, Tuple


@dataclass(frozen=True)
class LayerSpec:
    """One square conv/pool layer: kernel k, stride s, padding p."""

    k: int
    s: int
    p: int

    def __post_init__(self):
        if self.k < 1 or self.s < 1 or self.p < 0:
            raise ValueError(f"invalid layer spec k={self.k} s={self.s} p={self.p}")


@dataclass(frozen=True)
class RFState:
    """Cumulative geometry of a layer stack.

    jump: input pixels per feature-grid step.
    rf: receptive-field extent in input pixels.
    start: center coordinate of the first feature's receptive field,
        in input-pixel units (pixel centers at half-integers).
    """

    jump: int = 1
    rf: int = 1
    start: float = 0.5


class KeypointMode(enum.Enum):
    """How a feature-grid coordinate maps to an input-pixel keypoint.

    JUMP_CENTER places keypoints at the receptive-field centers
    (featureLoc * jump + start).  RF_SCALED multiplies by the
    receptive-field size instead of the jump; for deep taps this pushes
    most keypoints outside the image and is kept only as an alternative
    behind a flag.
    """

    JUMP_CENTER = "jump"
    RF_SCALED = "eq4"


IDENTITY_STATE = RFState()


def propagate_layer(state: RFState, layer: LayerSpec) -> RFState:
    """Advance the cumulative geometry across one layer.

    (k-1)/2 is kept exact; even kernels yield half-integer center shifts.
    """
    return RFState(
        jump=state.jump * layer.s,
        rf=state.rf + (layer.k - 1) * state.jump,
        start=state.start + ((layer.k - 1) / 2 - layer.p) * state.jump,
    )


def chain(layers: Iterable[LayerSpec], state: RFState = IDENTITY_STATE) -> RFState:
    """Fold propagate_layer over an ordered layer stack."""
    for layer in layers:
        state = propagate_layer(state, layer)
    return state


def keypoint_location(state: RFState, feature_loc: Tuple[int, int],
                      mode: KeypointMode = KeypointMode.JUMP_CENTER) -> Tuple[float, float]:
    """Input-pixel (x, y) for a feature-grid (col, row) coordinate."""
    col, row = feature_loc
    if col < 0 or row < 0:
        raise ValueError(f"feature coordinates must be >= 0, got {feature_loc}")
    scale = state.jump if mode is KeypointMode.JUMP_CENTER else state.rf
    return (col * scale + state.start, row * scale + state.start)


_LAYER_RE = re.compile(r"^k(\d+)s(\d+)p(\d+)$")


def parse_layer_stack(text: str) -> List[LayerSpec]:
    """Parse a comma-separated stack string like "k7s2p3,k3s2p1"."""
    layers = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        m = _LAYER_RE.match(part)
        if m is None:
            raise ValueError(f"bad layer spec {part!r}, expected e.g. 'k7s2p3'")
        layers.append(LayerSpec(int(m.group(1)), int(m.group(2)), int(m.group(3))))
    return layers


def format_layer_stack(layers: Iterable[LayerSpec]) -> str:
    return ",".join(f"k{l.k}s{l.s}p{l.p}" for l in layers)


# ResNet34-style encoder down to 1/8 resolution (the default feature tap):
# 7x7/2 stem, 3x3/2 max pool, stage of 3x3/1 blocks, then a stride-2 stage.
# Every layer has p = (k-1)/2, so the grid stays centered (start = 0.5).
RESNET34_STRIDE8_PRESET = (
    "k7s2p3,k3s2p1,"
    "k3s1p1,k3s1p1,k3s1p1,k3s1p1,k3s1p1,k3s1p1,"
    "k3s2p1,k3s1p1,k3s1p1,k3s1p1,k3s1p1,k3s1p1,k3s1p1,k3s1p1"
)

PRESETS = {"resnet34-stride8": RESNET34_STRIDE8_PRESET}


def resolve_layers(text: str) -> List[LayerSpec]:
    """Resolve a preset name or a literal stack string."""
    return parse_layer_stack(PRESETS.get(text, text))
