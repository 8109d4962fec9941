/**
 * The three generation modes behind the protocol server.
 *
 * - echo: return the foreign words from the prompt's input section, capped
 *   by the request's token budget.
 * - template: return a fixed category answer for question-answering prompts.
 * - delegate: forward the request to a configured generator.
 */

import type { GenerationRequest } from './protocol.js';

export type GeneratorFn = (request: GenerationRequest) => Promise<string> | string;

const WORD_RE = /###(?:-?\d+\.\d{4}|Nan)###/g;
const INPUT_SECTION = '[INPUT]';
const RESPONSE_SECTION = '[RESPONSE]';

/** k foreign words cost 2k-1 tokens (words plus separating spaces). */
export function wordBudget(maxNewTokens: number): number {
  return Math.floor((maxNewTokens + 1) / 2);
}

export function extractInputWords(prompt: string): string[] {
  const start = prompt.lastIndexOf(INPUT_SECTION);
  if (start < 0) {
    return [];
  }
  let body = prompt.slice(start + INPUT_SECTION.length);
  const end = body.indexOf(RESPONSE_SECTION);
  if (end >= 0) {
    body = body.slice(0, end);
  }
  return body.match(WORD_RE) ?? [];
}

export function echoGenerate(request: GenerationRequest): string {
  const words = extractInputWords(request.prompt);
  return words.slice(0, wordBudget(request.max_new_tokens)).join(' ');
}

/** Fixed answer per feature, keyed by the category names the prompt lists. */
const TEMPLATE_ANSWERS: Array<{ categories: string[]; answer: string }> = [
  { categories: ['upward trend', 'downward trend', 'constant trend'], answer: 'upward trend' },
  {
    categories: ['increased volatility', 'decreased volatility', 'constant volatility'],
    answer: 'increased volatility',
  },
  {
    categories: ['fixed seasonality', 'shifting seasonality', 'no seasonality'],
    answer: 'fixed seasonality',
  },
  { categories: ['sudden spike', 'level shift', 'no outlier'], answer: 'sudden spike' },
];

export function templateGenerate(request: GenerationRequest): string {
  const prompt = request.prompt.toLowerCase();
  for (const { categories, answer } of TEMPLATE_ANSWERS) {
    if (categories.some((category) => prompt.includes(category))) {
      return answer;
    }
  }
  return TEMPLATE_ANSWERS[0].answer;
}
