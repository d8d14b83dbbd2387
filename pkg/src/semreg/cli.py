"""Command-line interface.

Subcommands:
  register      align a query image pair (STF feature maps + masks)
  sweep         rotation-sweep evaluation on synthetic fixtures
  synth         generate a synthetic fixture pair as STF files
  checkerboard  mosaic two registered images
  rfcalc        print the receptive-field table for a layer stack
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import eval_bench, rf_geom, synth, tensor_io
from .geo_fit import (NoConsensusError, NotEnoughMatchesError, TransformModel,
                      transform_from_text, transform_to_text, warp_image)
from .pipeline import SemanticRegistrator
from .tensor_io import TensorIOError


def _add_pipeline_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--layers", default="resnet34-stride8",
                   help="layer stack 'k7s2p3,k3s2p1,...' or a preset name")
    p.add_argument("--keypoint-mode", choices=["jump", "eq4"], default="jump")
    p.add_argument("--classes", default=None,
                   help="comma-separated class ids to match (default: all)")
    p.add_argument("--pca-dim", type=int, default=100)
    p.add_argument("--ratio", type=float, default=0.7)
    p.add_argument("--model", choices=["affine", "homography"], default="affine")
    p.add_argument("--ransac-threshold", type=float, default=3.0)
    p.add_argument("--ransac-confidence", type=float, default=0.995)
    p.add_argument("--ransac-max-iters", type=int, default=5000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--mask-threshold", type=float, default=0.5)


def _registrator(args) -> SemanticRegistrator:
    classes = None
    if args.classes:
        classes = [int(c) for c in args.classes.split(",")]
    return SemanticRegistrator(
        layers=args.layers, keypoint_mode=args.keypoint_mode, classes=classes,
        pca_dim=args.pca_dim, ratio=args.ratio, model=args.model,
        ransac_threshold=args.ransac_threshold,
        ransac_confidence=args.ransac_confidence,
        ransac_max_iters=args.ransac_max_iters, seed=args.seed,
        mask_threshold=args.mask_threshold)


def _load_side(feat_path, mask_path):
    fmap = tensor_io.read_tensor(feat_path)
    mask = tensor_io.read_tensor(mask_path)
    return fmap, mask


def cmd_register(args) -> int:
    try:
        query = _load_side(args.query_features, args.query_mask)
        ref = _load_side(args.ref_features, args.ref_mask)
    except TensorIOError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    reg = _registrator(args)
    try:
        reg.fit(query, ref)
    except (NoConsensusError, NotEnoughMatchesError) as e:
        print(f"registration failed: {e}", file=sys.stderr)
        return 2
    doc = transform_to_text(reg.transform_, int(reg.inlier_mask_.sum()),
                            len(reg.match_set_), args.seed)
    if args.out:
        with open(args.out, "w") as f:
            f.write(doc + "\n")
    else:
        print(doc)
    if args.checkerboard:
        if not (args.query_image and args.ref_image):
            print("error: --checkerboard needs --query-image and --ref-image",
                  file=sys.stderr)
            return 1
        q = tensor_io.read_image(args.query_image)
        r = tensor_io.read_image(args.ref_image)
        warped = warp_image(q, reg.transform_, r.width, r.height)
        tensor_io.write_image(eval_bench.checkerboard(warped, r, args.tile),
                              args.checkerboard)
    return 0


def cmd_sweep(args) -> int:
    angles = [float(a) for a in args.angles.split(",")] if args.angles \
        else list(eval_bench.DEFAULT_ANGLES)
    specs = [
        synth.SynthSpec(width=args.size, height=args.size, jump=args.jump,
                        channels=args.channels, noise=args.noise, seed=s)
        for s in range(args.seed, args.seed + args.num_pairs)
    ]
    report = eval_bench.run_sweep(specs, angles,
                                  registrator=_registrator_for_sweep(args),
                                  grid_stride=args.grid_stride)
    print(report.to_table())
    if args.out:
        with open(args.out, "w") as f:
            f.write(report.to_json() + "\n")
    return 0


def _registrator_for_sweep(args):
    reg = _registrator(args)
    return reg


def cmd_synth(args) -> int:
    spec = synth.SynthSpec(width=args.size, height=args.size, jump=args.jump,
                           channels=args.channels, noise=args.noise,
                           seed=args.seed)
    t_gt = eval_bench.rotate_about_center(args.angle, spec.width, spec.height)
    query, ref = synth.synth_pair(spec, t_gt)
    prefix = args.out_prefix
    tensor_io.write_tensor(query.fmap, f"{prefix}_query_features.stf")
    tensor_io.write_tensor(query.mask.labels, f"{prefix}_query_mask.stf")
    tensor_io.write_tensor(ref.fmap, f"{prefix}_ref_features.stf")
    tensor_io.write_tensor(ref.mask.labels, f"{prefix}_ref_mask.stf")
    if args.images:
        tensor_io.write_image(synth.render_image(spec, t_gt),
                              f"{prefix}_query.pgm")
        tensor_io.write_image(
            synth.render_image(spec, TransformModel.identity()),
            f"{prefix}_ref.pgm")
    print(f"wrote fixture {prefix}_* (angle {args.angle}, seed {args.seed})")
    return 0


def cmd_checkerboard(args) -> int:
    a = tensor_io.read_image(args.image_a)
    b = tensor_io.read_image(args.image_b)
    if args.transform:
        with open(args.transform) as f:
            model, _ = transform_from_text(f.read())
        a = warp_image(a, model, b.width, b.height)
    tensor_io.write_image(eval_bench.checkerboard(a, b, args.tile), args.out)
    return 0


def cmd_rfcalc(args) -> int:
    layers = rf_geom.resolve_layers(args.layers)
    state = rf_geom.RFState()
    print(f"{'layer':<12}{'jump':>8}{'rf':>8}{'start':>10}")
    print(f"{'(input)':<12}{state.jump:>8}{state.rf:>8}{state.start:>10.2f}")
    for i, layer in enumerate(layers):
        state = rf_geom.propagate_layer(state, layer)
        name = f"k{layer.k}s{layer.s}p{layer.p}"
        print(f"{i:>3} {name:<8}{state.jump:>8}{state.rf:>8}{state.start:>10.2f}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="semreg",
                                description="semantic-feature image registration")
    sub = p.add_subparsers(dest="command", required=True)

    reg = sub.add_parser("register", help="register a query/reference pair")
    reg.add_argument("--query-features", required=True)
    reg.add_argument("--query-mask", required=True)
    reg.add_argument("--ref-features", required=True)
    reg.add_argument("--ref-mask", required=True)
    _add_pipeline_flags(reg)
    reg.add_argument("--out", default=None, help="transform document path")
    reg.add_argument("--checkerboard", default=None,
                     help="write a checkerboard mosaic to this path")
    reg.add_argument("--query-image", default=None)
    reg.add_argument("--ref-image", default=None)
    reg.add_argument("--tile", type=int, default=64)
    reg.set_defaults(func=cmd_register)

    sw = sub.add_parser("sweep", help="synthetic rotation-sweep evaluation")
    _add_pipeline_flags(sw)
    sw.add_argument("--angles", default=None,
                    help="comma-separated degrees (default: standard ten)")
    sw.add_argument("--num-pairs", type=int, default=5)
    sw.add_argument("--size", type=int, default=256)
    sw.add_argument("--jump", type=int, default=8)
    sw.add_argument("--channels", type=int, default=64)
    sw.add_argument("--noise", type=float, default=0.01)
    sw.add_argument("--grid-stride", type=int, default=1)
    sw.add_argument("--out", default=None, help="JSON report path")
    sw.set_defaults(func=cmd_sweep)

    sy = sub.add_parser("synth", help="write a synthetic fixture pair")
    sy.add_argument("--out-prefix", required=True)
    sy.add_argument("--angle", type=float, default=5.0)
    sy.add_argument("--size", type=int, default=256)
    sy.add_argument("--jump", type=int, default=8)
    sy.add_argument("--channels", type=int, default=64)
    sy.add_argument("--noise", type=float, default=0.01)
    sy.add_argument("--seed", type=int, default=0)
    sy.add_argument("--images", action="store_true",
                    help="also render PGM views of the pair")
    sy.set_defaults(func=cmd_synth)

    cb = sub.add_parser("checkerboard", help="mosaic two images")
    cb.add_argument("image_a")
    cb.add_argument("image_b")
    cb.add_argument("--transform", default=None,
                    help="warp image_a through this transform document first")
    cb.add_argument("--tile", type=int, default=64)
    cb.add_argument("--out", required=True)
    cb.set_defaults(func=cmd_checkerboard)

    rf = sub.add_parser("rfcalc", help="receptive-field table for a stack")
    rf.add_argument("--layers", required=True)
    rf.set_defaults(func=cmd_rfcalc)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except TensorIOError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
