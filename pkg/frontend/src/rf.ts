/**
 * Receptive-field grid arithmetic for a conv/pool layer stack, used to
 * check that an exported feature extent is consistent with the stack
 * string recorded in the manifest.
 */

export interface LayerSpec {
  kernel: number
  stride: number
  padding: number
}

export interface RFState {
  jump: number
  rf: number
  start: number
}

export const IDENTITY_STATE: RFState = { jump: 1, rf: 1, start: 0.5 }

const LAYER_RE = /^k(\d+)s(\d+)p(\d+)$/

export function parseLayerStack(stack: string): LayerSpec[] {
  return stack.split(',').map(part => {
    const m = LAYER_RE.exec(part.trim())
    if (!m) throw new Error(`bad layer spec ${JSON.stringify(part)}`)
    const [kernel, stride, padding] = m.slice(1).map(Number)
    if (kernel < 1 || stride < 1) {
      throw new Error(`bad layer spec ${JSON.stringify(part)}`)
    }
    return { kernel, stride, padding }
  })
}

export function propagateLayer(state: RFState, layer: LayerSpec): RFState {
  const { kernel: k, stride: s, padding: p } = layer
  return {
    jump: state.jump * s,
    rf: state.rf + (k - 1) * state.jump,
    start: state.start + ((k - 1) / 2 - p) * state.jump,
  }
}

export function chain(layers: LayerSpec[], state = IDENTITY_STATE): RFState {
  return layers.reduce(propagateLayer, state)
}

/** Feature-grid extent of an input extent under the stack's layers. */
export function outputExtent(layers: LayerSpec[], size: number): number {
  return layers.reduce((n, { kernel, stride, padding }) => {
    const out = Math.floor((n + 2 * padding - kernel) / stride) + 1
    if (out < 1) throw new Error('stack shrinks the signal to nothing')
    return out
  }, size)
}
