/**
 * Wire protocol: one JSON object per line in each direction.
 *
 * Request:  {"id": <int>, "prompt": <string>, "max_new_tokens": <int>, "stop": <string|null>}
 * Response: {"id": <int>, "text": <string>}  or  {"id": <int>, "error": <string>}
 *
 * Requests without a parseable integer id are answered with id -1 so every
 * input line still gets a diagnosable response.
 */

export interface GenerationRequest {
  id: number;
  prompt: string;
  max_new_tokens: number;
  stop: string | null;
}

export type GenerationResponse =
  | { id: number; text: string }
  | { id: number; error: string };

export const MALFORMED_ID = -1;

export type ParseOutcome =
  | { ok: true; request: GenerationRequest }
  | { ok: false; response: GenerationResponse };

export function parseRequest(line: string): ParseOutcome {
  let raw: unknown;
  try {
    raw = JSON.parse(line);
  } catch {
    return reject(MALFORMED_ID, 'request line is not valid JSON');
  }
  if (typeof raw !== 'object' || raw === null || Array.isArray(raw)) {
    return reject(MALFORMED_ID, 'request must be a JSON object');
  }
  const obj = raw as Record<string, unknown>;
  const id = obj['id'];
  if (typeof id !== 'number' || !Number.isInteger(id)) {
    return reject(MALFORMED_ID, 'request is missing an integer id');
  }
  if (typeof obj['prompt'] !== 'string') {
    return reject(id, 'prompt must be a string');
  }
  const maxNewTokens = obj['max_new_tokens'];
  if (typeof maxNewTokens !== 'number' || !Number.isInteger(maxNewTokens) || maxNewTokens < 1) {
    return reject(id, 'max_new_tokens must be a positive integer');
  }
  const stop = obj['stop'];
  if (stop !== undefined && stop !== null && typeof stop !== 'string') {
    return reject(id, 'stop must be a string or null');
  }
  return {
    ok: true,
    request: {
      id,
      prompt: obj['prompt'],
      max_new_tokens: maxNewTokens,
      stop: stop === undefined ? null : (stop as string | null),
    },
  };
}

function reject(id: number, error: string): ParseOutcome {
  return { ok: false, response: { id, error } };
}

export function serializeResponse(response: GenerationResponse): string {
  return JSON.stringify(response);
}
