/**
 * Minimal filesystem save/load handlers for layers models, so the exporter
 * runs on the pure-JS backend without a native binding.
 *
 * A model directory holds `model.json` (topology + weight manifest) and
 * `weights.bin` (all weights concatenated).
 */

import * as fs from 'node:fs'
import * as path from 'node:path'
import * as tf from '@tensorflow/tfjs'

export function diskSaveHandler(dir: string): tf.io.IOHandler {
  return {
    async save(artifacts: tf.io.ModelArtifacts) {
      fs.mkdirSync(dir, { recursive: true })
      const weightData = artifacts.weightData as ArrayBuffer
      fs.writeFileSync(path.join(dir, 'weights.bin'), Buffer.from(weightData))
      const manifest = [
        { paths: ['weights.bin'], weights: artifacts.weightSpecs },
      ]
      fs.writeFileSync(
        path.join(dir, 'model.json'),
        JSON.stringify({
          modelTopology: artifacts.modelTopology,
          format: artifacts.format,
          generatedBy: artifacts.generatedBy,
          convertedBy: artifacts.convertedBy ?? null,
          weightsManifest: manifest,
        }),
      )
      return {
        modelArtifactsInfo: {
          dateSaved: new Date(),
          modelTopologyType: 'JSON' as const,
        },
      }
    },
  }
}

export function diskLoadHandler(dir: string): tf.io.IOHandler {
  return {
    async load(): Promise<tf.io.ModelArtifacts> {
      const doc = JSON.parse(
        fs.readFileSync(path.join(dir, 'model.json'), 'utf8'),
      )
      const group = doc.weightsManifest[0]
      const weights = fs.readFileSync(path.join(dir, group.paths[0]))
      return {
        modelTopology: doc.modelTopology,
        format: doc.format,
        generatedBy: doc.generatedBy,
        weightSpecs: group.weights,
        weightData: weights.buffer.slice(
          weights.byteOffset,
          weights.byteOffset + weights.byteLength,
        ),
      }
    },
  }
}

export async function saveModel(model: tf.LayersModel, dir: string) {
  await model.save(diskSaveHandler(dir))
}

export async function loadModel(dir: string): Promise<tf.LayersModel> {
  return tf.loadLayersModel(diskLoadHandler(dir))
}
