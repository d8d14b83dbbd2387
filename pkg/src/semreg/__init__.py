"""Multitemporal image registration from semantic segmentation features."""

from .descriptors import PCAModel, condition_class, fit_pca, l2_normalize, project
from .eval_bench import (DEFAULT_ANGLES, EvalReport, checkerboard,
                         rotate_about_center, rmse, run_sweep, welch_t)
from .features import FeatureSet, LabelMask, assemble_features, select_classes, \
    threshold_mask
from .geo_fit import (RansacParams, TransformModel, apply_transform,
                      estimate_affine_lsq, estimate_homography_lsq, ransac_fit,
                      warp_image)
from .matching import MatchSet, match_all, match_class
from .pipeline import RansacTransformEstimator, SemanticRegistrator
from .rf_geom import (KeypointMode, LayerSpec, RFState, chain,
                      keypoint_location, parse_layer_stack, propagate_layer)
from .synth import SynthImage, SynthSpec, synth_pair
from .tensor_io import RasterImage, read_image, read_tensor, write_image, \
    write_tensor

__version__ = "0.1.0"
