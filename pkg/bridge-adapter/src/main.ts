/**
 * CLI entry point: `node dist/main.js --mode echo|template|delegate
 * [--delegate-cmd "<command>"] [--max-new-tokens <cap>]`.
 *
 * Serves the wire protocol on stdin/stdout until the input stream closes.
 */

import { parseArgs } from 'node:util';
import { spawnDelegate } from './delegate.js';
import { serve, type AdapterConfig, type AdapterMode } from './server.js';

const MODES: AdapterMode[] = ['echo', 'template', 'delegate'];

async function main(): Promise<void> {
  const { values } = parseArgs({
    options: {
      mode: { type: 'string', default: 'echo' },
      'delegate-cmd': { type: 'string' },
      'max-new-tokens': { type: 'string' },
    },
  });

  const mode = values.mode as AdapterMode;
  if (!MODES.includes(mode)) {
    throw new Error(`--mode must be one of ${MODES.join(', ')}`);
  }
  const config: AdapterConfig = { mode };
  if (values['max-new-tokens'] !== undefined) {
    const cap = Number(values['max-new-tokens']);
    if (!Number.isInteger(cap) || cap < 1) {
      throw new Error('--max-new-tokens must be a positive integer');
    }
    config.maxNewTokensCap = cap;
  }

  let closeDelegate: (() => void) | undefined;
  if (mode === 'delegate') {
    const command = values['delegate-cmd'];
    if (!command) {
      throw new Error('delegate mode needs --delegate-cmd');
    }
    const delegate = spawnDelegate(command);
    config.delegate = delegate.generate;
    closeDelegate = delegate.close;
  }

  try {
    await serve(process.stdin, process.stdout, config);
  } finally {
    closeDelegate?.();
  }
}

main().catch((err: unknown) => {
  process.stderr.write(`${err instanceof Error ? err.message : String(err)}\n`);
  process.exit(1);
});
