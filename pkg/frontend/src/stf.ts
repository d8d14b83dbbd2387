/**
 * Reader/writer for the engine's binary tensor container.
 *
 * Layout: magic "STF1", dtype code (u8: 0 = float32, 1 = uint8), rank (u8),
 * then one u64 little-endian extent per dimension, then the payload in
 * row-major order, little-endian.
 */

import * as fs from 'node:fs'

const MAGIC = 'STF1'

export type Dtype = 'float32' | 'uint8'

const DTYPE_CODES: Record<Dtype, number> = { float32: 0, uint8: 1 }

export interface Tensor {
  dtype: Dtype
  dims: number[]
  /** row-major payload */
  data: Float32Array | Uint8Array
}

export function encodeTensor(t: Tensor): Buffer {
  const count = t.dims.reduce((a, b) => a * b, 1)
  if (t.data.length !== count) {
    throw new Error(`size mismatch: payload ${t.data.length}, dims ${count}`)
  }
  const itemSize = t.dtype === 'float32' ? 4 : 1
  const header = 4 + 1 + 1 + 8 * t.dims.length
  const buf = Buffer.alloc(header + count * itemSize)
  buf.write(MAGIC, 0, 'ascii')
  buf.writeUInt8(DTYPE_CODES[t.dtype], 4)
  buf.writeUInt8(t.dims.length, 5)
  t.dims.forEach((d, i) => buf.writeBigUInt64LE(BigInt(d), 6 + 8 * i))
  if (t.dtype === 'float32') {
    for (let i = 0; i < count; i++) {
      buf.writeFloatLE((t.data as Float32Array)[i], header + 4 * i)
    }
  } else {
    buf.set(t.data, header)
  }
  return buf
}

export function decodeTensor(buf: Buffer): Tensor {
  if (buf.length < 6 || buf.toString('ascii', 0, 4) !== MAGIC) {
    throw new Error('not an STF file')
  }
  const code = buf.readUInt8(4)
  const dtype = (Object.keys(DTYPE_CODES) as Dtype[]).find(
    k => DTYPE_CODES[k] === code,
  )
  if (dtype === undefined) throw new Error(`unsupported dtype code ${code}`)
  const ndim = buf.readUInt8(5)
  const dims: number[] = []
  for (let i = 0; i < ndim; i++) {
    dims.push(Number(buf.readBigUInt64LE(6 + 8 * i)))
  }
  const count = dims.reduce((a, b) => a * b, 1)
  const header = 6 + 8 * ndim
  const itemSize = dtype === 'float32' ? 4 : 1
  if (buf.length !== header + count * itemSize) {
    throw new Error(
      `size mismatch: expected ${header + count * itemSize} bytes, got ${buf.length}`,
    )
  }
  if (dtype === 'float32') {
    const data = new Float32Array(count)
    for (let i = 0; i < count; i++) data[i] = buf.readFloatLE(header + 4 * i)
    return { dtype, dims, data }
  }
  return { dtype, dims, data: Uint8Array.from(buf.subarray(header)) }
}

export function writeTensor(t: Tensor, path: string): void {
  fs.writeFileSync(path, encodeTensor(t))
}

export function readTensor(path: string): Tensor {
  return decodeTensor(fs.readFileSync(path))
}

export interface RasterImage {
  width: number
  height: number
  channels: 1 | 3
  /** row-major, interleaved for RGB */
  pixels: Uint8Array
}

/** Parse a binary PGM (P5) or PPM (P6) image with maxval 255. */
export function decodeImage(buf: Buffer): RasterImage {
  const text = buf.toString('latin1')
  const magic = text.slice(0, 2)
  if (magic !== 'P5' && magic !== 'P6') {
    throw new Error(`unsupported image magic ${JSON.stringify(magic)}`)
  }
  // header tokens: magic, width, height, maxval; '#' starts a comment
  const tokens: string[] = []
  let pos = 2
  while (tokens.length < 3 && pos < text.length) {
    const ch = text[pos]
    if (ch === '#') {
      while (pos < text.length && text[pos] !== '\n') pos++
    } else if (/\s/.test(ch)) {
      pos++
    } else {
      let start = pos
      while (pos < text.length && !/\s/.test(text[pos])) pos++
      tokens.push(text.slice(start, pos))
    }
  }
  pos++ // single whitespace after maxval
  const [width, height, maxval] = tokens.map(Number)
  if (maxval !== 255) throw new Error(`unsupported maxval ${maxval}`)
  const channels = magic === 'P5' ? 1 : 3
  const count = width * height * channels
  if (buf.length - pos !== count) {
    throw new Error(`size mismatch: expected ${count} pixel bytes`)
  }
  return {
    width,
    height,
    channels: channels as 1 | 3,
    pixels: Uint8Array.from(buf.subarray(pos, pos + count)),
  }
}

export function readImage(path: string): RasterImage {
  return decodeImage(fs.readFileSync(path))
}
