import { execFileSync } from 'node:child_process'
import * as fs from 'node:fs'
import * as os from 'node:os'
import * as path from 'node:path'
import * as tf from '@tensorflow/tfjs'
import { afterAll, beforeAll, describe, expect, it } from 'vitest'
import { centerCrop, exportFeatures } from '../src/export'
import { loadModel, saveModel } from '../src/modelio'
import { chain, parseLayerStack } from '../src/rf'
import { RasterImage, readTensor } from '../src/stf'

const STACK = 'k3s2p1,k3s2p1,k3s2p1' // jump 8
const TAP = 'feat'
const CHANNELS = 16

/** Tiny stride-8 segmentation network: tapped trunk + upsampled mask head. */
function buildModel(): tf.LayersModel {
  const input = tf.input({ shape: [null, null, 3] as any })
  let x = tf.layers
    .conv2d({ filters: 8, kernelSize: 3, strides: 2, padding: 'same', activation: 'relu' })
    .apply(input) as tf.SymbolicTensor
  x = tf.layers
    .conv2d({ filters: 12, kernelSize: 3, strides: 2, padding: 'same', activation: 'relu' })
    .apply(x) as tf.SymbolicTensor
  const feat = tf.layers
    .conv2d({
      filters: CHANNELS,
      kernelSize: 3,
      strides: 2,
      padding: 'same',
      activation: 'relu',
      name: TAP,
    })
    .apply(x) as tf.SymbolicTensor
  let m = tf.layers.upSampling2d({ size: [8, 8] }).apply(feat) as tf.SymbolicTensor
  m = tf.layers
    .conv2d({ filters: 1, kernelSize: 1, activation: 'sigmoid', name: 'mask' })
    .apply(m) as tf.SymbolicTensor
  return tf.model({ inputs: input, outputs: m })
}

function syntheticImage(width: number, height: number): RasterImage {
  const pixels = new Uint8Array(width * height)
  for (let y = 0; y < height; y++) {
    for (let x = 0; x < width; x++) {
      pixels[y * width + x] =
        128 + Math.round(100 * Math.sin(x / 5) * Math.cos(y / 7))
    }
  }
  return { width, height, channels: 1, pixels }
}

function constantImage(size: number): RasterImage {
  return {
    width: size,
    height: size,
    channels: 1,
    pixels: new Uint8Array(size * size).fill(150),
  }
}

let tmp: string
let model: tf.LayersModel

beforeAll(async () => {
  tmp = fs.mkdtempSync(path.join(os.tmpdir(), 'export-test-'))
  model = buildModel()
})

afterAll(() => {
  fs.rmSync(tmp, { recursive: true, force: true })
})

async function runExport(image: RasterImage, prefix: string) {
  return exportFeatures({
    model,
    image,
    imagePath: path.join(tmp, `${prefix}.pgm`),
    tap: TAP,
    layers: STACK,
    outPrefix: path.join(tmp, prefix),
  })
}

describe('feature export', () => {
  it('writes feature and mask tensors with consistent extents', async () => {
    const result = await runExport(syntheticImage(64, 64), 'main')
    expect(result.featureDims).toEqual([CHANNELS, 8, 8])
    expect(result.maskDims).toEqual([64, 64])

    const feat = readTensor(result.manifest.features)
    expect(feat.dtype).toBe('float32')
    expect(feat.dims).toEqual([CHANNELS, 8, 8])

    const mask = readTensor(result.manifest.mask)
    expect(mask.dims).toEqual([64, 64])
    for (const v of mask.data as Float32Array) {
      expect(v).toBeGreaterThanOrEqual(0)
      expect(v).toBeLessThanOrEqual(1)
    }

    // manifest's stack implies the observed grid: extent == size / jump
    const jump = chain(parseLayerStack(result.manifest.layers)).jump
    expect(result.featureDims[1]).toBe(result.maskDims[0] / jump)
    expect(result.featureDims[2]).toBe(result.maskDims[1] / jump)

    const manifest = JSON.parse(
      fs.readFileSync(path.join(tmp, 'main_manifest.json'), 'utf8'),
    )
    expect(manifest).toEqual(result.manifest)
  })

  it('exported tensors load in the engine and yield h*w features', async () => {
    const result = await runExport(syntheticImage(64, 64), 'engine')
    const script = [
      'import sys',
      'from semreg import (assemble_features, chain, parse_layer_stack,',
      '                    read_tensor, threshold_mask)',
      'feat = read_tensor(sys.argv[1])',
      'mask = threshold_mask(read_tensor(sys.argv[2]), 0.5)',
      'state = chain(parse_layer_stack(sys.argv[3]))',
      'fs = assemble_features(feat, mask, state)',
      'print(len(fs.keypoints))',
    ].join('\n')
    const out = execFileSync(
      'python3',
      ['-c', script, result.manifest.features, result.manifest.mask, STACK],
      { encoding: 'utf8' },
    )
    expect(Number(out.trim())).toBe(8 * 8)
  })

  it('constant input gives a near-constant feature map', async () => {
    const flat = await runExport(constantImage(64), 'flat')
    const textured = await runExport(syntheticImage(64, 64), 'textured')
    expect(flat.featureVariance).toBeLessThan(textured.featureVariance * 0.1)
  })

  it('center-crops tiles not divisible by the stride', async () => {
    const result = await runExport(syntheticImage(70, 70), 'cropped')
    expect(result.maskDims).toEqual([64, 64])
    expect(result.featureDims).toEqual([CHANNELS, 8, 8])
  })

  it('rejects tiles smaller than the stride', () => {
    expect(() => centerCrop(constantImage(4), 8)).toThrow('dimension mismatch')
  })

  it('reports a missing tap layer', async () => {
    await expect(
      exportFeatures({
        model,
        image: syntheticImage(64, 64),
        imagePath: 'x.pgm',
        tap: 'nonexistent',
        layers: STACK,
        outPrefix: path.join(tmp, 'bad'),
      }),
    ).rejects.toThrow('missing tap layer')
  })

  it('round-trips a model through disk save/load', async () => {
    const dir = path.join(tmp, 'model')
    await saveModel(model, dir)
    const loaded = await loadModel(dir)
    const input = tf.ones([1, 16, 16, 3]) as tf.Tensor4D
    const a = (model.predict(input) as tf.Tensor).dataSync()
    const b = (loaded.predict(input) as tf.Tensor).dataSync()
    expect(Array.from(b)).toEqual(Array.from(a))
  })
})
