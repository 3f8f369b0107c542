#!/usr/bin/env node
/**
 * figures --in results.csv --out DIR [--format svg|pdf]
 */
import { CsvError } from './csv';
import { Format, render } from './figures';

function usage(): never {
  console.error('usage: figures --in results.csv --out DIR [--format svg|pdf]');
  process.exit(1);
}

export function main(argv: string[]): number {
  let input: string | undefined;
  let outDir: string | undefined;
  let format: Format = 'svg';
  for (let i = 0; i < argv.length; i++) {
    switch (argv[i]) {
      case '--in':
        input = argv[++i];
        break;
      case '--out':
        outDir = argv[++i];
        break;
      case '--format': {
        const value = argv[++i];
        if (value !== 'svg' && value !== 'pdf') {
          usage();
        }
        format = value;
        break;
      }
      default:
        usage();
    }
  }
  if (!input || !outDir) {
    usage();
  }
  try {
    const files = render(input, outDir, format);
    for (const file of files) {
      console.log(file);
    }
    return 0;
  } catch (err) {
    if (err instanceof CsvError) {
      console.error(`error: ${err.message}`);
      return 1;
    }
    throw err;
  }
}

if (require.main === module) {
  process.exit(main(process.argv.slice(2)));
}
