/**
 * Runs a segmentation model on an image tile, taps an intermediate layer,
 * and writes the feature map and probability mask in the engine's tensor
 * container, plus a manifest tying them together.
 */

import * as fs from 'node:fs'
import * as tf from '@tensorflow/tfjs'
import { chain, outputExtent, parseLayerStack } from './rf'
import { RasterImage, Tensor, writeTensor } from './stf'

export interface ExportManifest {
  /** source image path */
  image: string
  /** feature tensor path, dims [C, h, w] float32 */
  features: string
  /** mask tensor path, dims [H, W] float32 in [0, 1] */
  mask: string
  /** name of the tapped layer */
  tap: string
  /** conv-stack string describing the tap, e.g. "k3s2p1,k3s2p1,k3s2p1" */
  layers: string
}

export interface ExportResult {
  manifest: ExportManifest
  featureDims: number[]
  maskDims: number[]
  /** spatial variance of the feature map, for sanity logging */
  featureVariance: number
}

/** Convert an 8-bit raster to a [1, H, W, 3] float tensor in [0, 1]. */
export function imageToTensor(img: RasterImage): tf.Tensor4D {
  const { width, height, channels, pixels } = img
  const rgb = new Float32Array(width * height * 3)
  for (let i = 0; i < width * height; i++) {
    for (let c = 0; c < 3; c++) {
      const v = channels === 1 ? pixels[i] : pixels[i * 3 + c]
      rgb[i * 3 + c] = v / 255
    }
  }
  return tf.tensor4d(rgb, [1, height, width, 3])
}

/** Center-crop so both extents are divisible by the stack's total stride. */
export function centerCrop(img: RasterImage, stride: number): RasterImage {
  const width = Math.floor(img.width / stride) * stride
  const height = Math.floor(img.height / stride) * stride
  if (width < stride || height < stride) {
    throw new Error(
      `dimension mismatch: ${img.width}x${img.height} smaller than stride ${stride}`,
    )
  }
  if (width === img.width && height === img.height) return img
  const x0 = Math.floor((img.width - width) / 2)
  const y0 = Math.floor((img.height - height) / 2)
  const out = new Uint8Array(width * height * img.channels)
  for (let y = 0; y < height; y++) {
    const src = ((y + y0) * img.width + x0) * img.channels
    out.set(
      img.pixels.subarray(src, src + width * img.channels),
      y * width * img.channels,
    )
  }
  return { width, height, channels: img.channels, pixels: out }
}

export interface ExportOptions {
  model: tf.LayersModel
  image: RasterImage
  imagePath: string
  tap: string
  layers: string
  outPrefix: string
}

export async function exportFeatures(opts: ExportOptions): Promise<ExportResult> {
  const { model, tap, layers, outPrefix } = opts
  const stack = parseLayerStack(layers)
  const state = chain(stack)
  const jump = state.jump

  let tapped: tf.layers.Layer
  try {
    tapped = model.getLayer(tap)
  } catch {
    throw new Error(`missing tap layer ${JSON.stringify(tap)}`)
  }

  const img = centerCrop(opts.image, jump)
  const input = imageToTensor(img)
  const probe = tf.model({
    inputs: model.inputs,
    outputs: [tapped.output as tf.SymbolicTensor, model.outputs[0]],
  })
  const [featRaw, maskRaw] = probe.predict(input) as tf.Tensor[]

  // [1, h, w, C] -> [C, h, w]
  const feat = featRaw.squeeze([0]).transpose([2, 0, 1])
  const mask = maskRaw.reshape([img.height, img.width])
  const [C, h, w] = feat.shape as [number, number, number]

  const expected = [
    outputExtent(stack, img.height),
    outputExtent(stack, img.width),
  ]
  if (h !== expected[0] || w !== expected[1]) {
    throw new Error(
      `dimension mismatch: tap produced ${h}x${w}, stack predicts ` +
        `${expected[0]}x${expected[1]}`,
    )
  }

  const featData = (await feat.data()) as Float32Array
  const maskData = (await mask.data()) as Float32Array
  // spatial variance per channel, averaged over channels, measured on
  // interior cells only: border cells overlap the zero padding and channel
  // offsets must not count
  const trim = Math.max(
    0,
    Math.ceil(((state.rf - 1) / 2 - state.start) / state.jump),
  )
  const interior =
    h > 2 * trim && w > 2 * trim
      ? feat.slice([0, trim, trim], [C, h - 2 * trim, w - 2 * trim])
      : feat.clone()
  const moments = tf.moments(interior, [1, 2])
  const meanVar = moments.variance.mean()
  const featureVariance = (await meanVar.data())[0]
  tf.dispose([
    input, featRaw, maskRaw, feat, mask, interior,
    moments.mean, moments.variance, meanVar,
  ])

  const featTensor: Tensor = {
    dtype: 'float32',
    dims: [C, h, w],
    data: Float32Array.from(featData),
  }
  const maskTensor: Tensor = {
    dtype: 'float32',
    dims: [img.height, img.width],
    data: Float32Array.from(maskData),
  }
  const manifest: ExportManifest = {
    image: opts.imagePath,
    features: `${outPrefix}_features.stf`,
    mask: `${outPrefix}_mask.stf`,
    tap,
    layers,
  }
  writeTensor(featTensor, manifest.features)
  writeTensor(maskTensor, manifest.mask)
  fs.writeFileSync(
    `${outPrefix}_manifest.json`,
    JSON.stringify(manifest, null, 2) + '\n',
  )
  return {
    manifest,
    featureDims: [C, h, w],
    maskDims: [img.height, img.width],
    featureVariance,
  }
}
