/**
 * Child-process delegate: forwards protocol requests to a wrapped generator
 * command that itself speaks the same wire protocol on stdio.
 *
 * This is the integration point for a real LLM inference stack; the adapter
 * then acts as a validating, token-capping proxy in front of it.
 */

import { spawn, type ChildProcessWithoutNullStreams } from 'node:child_process';
import { createInterface } from 'node:readline';
import type { GeneratorFn } from './modes.js';
import type { GenerationRequest } from './protocol.js';

export function spawnDelegate(command: string): { generate: GeneratorFn; close: () => void } {
  const child: ChildProcessWithoutNullStreams = spawn(command, { shell: true });
  const rl = createInterface({ input: child.stdout });
  const pending: Array<{
    resolve: (text: string) => void;
    reject: (err: Error) => void;
  }> = [];

  rl.on('line', (line) => {
    const waiter = pending.shift();
    if (!waiter) {
      return;
    }
    try {
      const obj = JSON.parse(line) as { text?: unknown; error?: unknown };
      if (typeof obj.text === 'string') {
        waiter.resolve(obj.text);
      } else {
        waiter.reject(new Error(`delegate error: ${String(obj.error ?? 'missing text')}`));
      }
    } catch {
      waiter.reject(new Error('delegate emitted a malformed response line'));
    }
  });
  child.on('close', () => {
    while (pending.length > 0) {
      pending.shift()!.reject(new Error('delegate process closed'));
    }
  });

  const generate: GeneratorFn = (request: GenerationRequest) =>
    new Promise<string>((resolve, reject) => {
      pending.push({ resolve, reject });
      child.stdin.write(JSON.stringify(request) + '\n');
    });

  return {
    generate,
    close: () => {
      child.stdin.end();
    },
  };
}
