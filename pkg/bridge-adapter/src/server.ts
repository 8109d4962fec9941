/**
 * Line-delimited JSON protocol server over arbitrary byte streams.
 *
 * One response line per request line, ids echoed, order preserved; every
 * emitted line is a single valid protocol object.
 */

import { createInterface } from 'node:readline';
import type { Readable, Writable } from 'node:stream';
import {
  type GenerationRequest,
  type GenerationResponse,
  parseRequest,
  serializeResponse,
} from './protocol.js';
import { echoGenerate, templateGenerate, type GeneratorFn } from './modes.js';

export type AdapterMode = 'echo' | 'template' | 'delegate';

export interface AdapterConfig {
  mode: AdapterMode;
  /** Generator backing delegate mode; required iff mode === 'delegate'. */
  delegate?: GeneratorFn;
  /** Upper bound applied to every request's max_new_tokens. */
  maxNewTokensCap?: number;
}

function resolveGenerator(config: AdapterConfig): GeneratorFn {
  switch (config.mode) {
    case 'echo':
      return echoGenerate;
    case 'template':
      return templateGenerate;
    case 'delegate':
      if (!config.delegate) {
        throw new Error('delegate mode needs a delegate generator');
      }
      return config.delegate;
  }
}

export async function handleLine(line: string, config: AdapterConfig): Promise<GenerationResponse> {
  const outcome = parseRequest(line);
  if (!outcome.ok) {
    return outcome.response;
  }
  const generator = resolveGenerator(config);
  const request: GenerationRequest = config.maxNewTokensCap
    ? { ...outcome.request, max_new_tokens: Math.min(outcome.request.max_new_tokens, config.maxNewTokensCap) }
    : outcome.request;
  try {
    const text = await generator(request);
    return { id: request.id, text };
  } catch (err) {
    return { id: request.id, error: err instanceof Error ? err.message : String(err) };
  }
}

export async function serve(input: Readable, output: Writable, config: AdapterConfig): Promise<void> {
  resolveGenerator(config); // fail fast on an invalid config
  const rl = createInterface({ input });
  for await (const line of rl) {
    if (!line.trim()) {
      continue;
    }
    const response = await handleLine(line, config);
    output.write(serializeResponse(response) + '\n');
  }
}
