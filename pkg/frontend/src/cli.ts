import { parseArgs } from 'node:util'
import { exportFeatures } from './export'
import { loadModel } from './modelio'
import { readImage } from './stf'

const USAGE =
  'usage: export --model <dir> --image <pgm/ppm> --tap <layer> ' +
  '--layers <kNsNpN,...> --out-prefix <prefix>'

export async function main(argv: string[]): Promise<number> {
  if (argv[0] !== 'export') {
    console.error(USAGE)
    return 1
  }
  let values: Record<string, string | undefined>
  try {
    values = parseArgs({
      args: argv.slice(1),
      options: {
        model: { type: 'string' },
        image: { type: 'string' },
        tap: { type: 'string' },
        layers: { type: 'string' },
        'out-prefix': { type: 'string' },
      },
    }).values
  } catch (err) {
    console.error(String(err instanceof Error ? err.message : err))
    console.error(USAGE)
    return 1
  }
  for (const key of ['model', 'image', 'tap', 'layers', 'out-prefix']) {
    if (!values[key]) {
      console.error(`missing required option --${key}`)
      console.error(USAGE)
      return 1
    }
  }

  try {
    const model = await loadModel(values.model!)
    const result = await exportFeatures({
      model,
      image: readImage(values.image!),
      imagePath: values.image!,
      tap: values.tap!,
      layers: values.layers!,
      outPrefix: values['out-prefix']!,
    })
    console.log(JSON.stringify(result.manifest, null, 2))
    console.error(
      `features ${result.featureDims.join('x')}, ` +
        `mask ${result.maskDims.join('x')}, ` +
        `interior feature variance ${result.featureVariance.toExponential(3)}`,
    )
    return 0
  } catch (err) {
    console.error(String(err instanceof Error ? err.message : err))
    return 1
  }
}

if (require.main === module) {
  main(process.argv.slice(2)).then(code => {
    process.exitCode = code
  })
}
