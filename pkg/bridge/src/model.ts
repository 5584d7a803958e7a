/**
 * Fill-mask model backends.
 *
 * The bridge only needs something that answers "which 5 tokens fit this
 * mask". The default backend is an offline deterministic code prior:
 * it classifies the mask position from the neighbouring tokens and ranks
 * candidates from small built-in frequency tables, preferring identifiers
 * that already appear in the surrounding context. A real pre-trained MLM
 * plugs in by implementing FillMaskModel (e.g. proxying to a transformers
 * inference process) without touching the server.
 */

export interface Prediction {
  token: string;
  score: number;
}

export interface FillMaskModel {
  readonly id: string;
  ready(): boolean;
  load(): Promise<void>;
  fillMask(sequence: string, topK: number): Prediction[];
}

export const MASK = "<mask>";

const TOKEN_RE = /<mask>|[A-Za-z_][A-Za-z0-9_]*|\d+|"(?:\\.|[^"\\])*"|'(?:\\.|[^'\\])*'|<=|>=|==|!=|&&|\|\||\+\+|--|\+=|-=|\*=|\/=|[-+*/%<>!=(){}[\];,.]/g;

export function tokenize(sequence: string): string[] {
  return sequence.match(TOKEN_RE) ?? [];
}

const SCORE_LADDER = [0.31, 0.24, 0.19, 0.15, 0.11];

const BINARY_OPS = ["+", "-", "*", "/", "%"];
const MEMBER_NAMES = ["add", "get", "size", "remove", "push"];
const VALUE_TOKENS = ["0", "1", "b", "2", "10"];
const TYPE_NAMES = ["String", "Object", "Math", "List", "Integer"];
const FALLBACK = ["0", "1", "i", "x", "value"];

const IDENT_RE = /^[A-Za-z_][A-Za-z0-9_]*$/;
const KEYWORDS = new Set([
  "class", "int", "boolean", "char", "string", "void", "if", "else",
  "while", "for", "return", "new", "null", "this", "true", "false",
]);

function isIdentifier(token: string | undefined): boolean {
  return token !== undefined && IDENT_RE.test(token) && !KEYWORDS.has(token);
}

function isValueEnd(token: string | undefined): boolean {
  return (
    token !== undefined &&
    (isIdentifier(token) || /^\d+$/.test(token) || token === ")" || token === "]")
  );
}

/** Identifiers of the surrounding context, most frequent first. */
function contextIdentifiers(tokens: string[]): string[] {
  const counts = new Map<string, number>();
  for (const tok of tokens) {
    if (isIdentifier(tok)) {
      counts.set(tok, (counts.get(tok) ?? 0) + 1);
    }
  }
  return [...counts.entries()]
    .sort((a, b) => b[1] - a[1] || (a[0] < b[0] ? -1 : 1))
    .map(([name]) => name);
}

function candidatePool(tokens: string[], maskAt: number): string[] {
  const prev = tokens[maskAt - 1];
  const next = tokens[maskAt + 1];
  if (prev === ".") {
    return MEMBER_NAMES;
  }
  if (prev === "new") {
    return TYPE_NAMES;
  }
  if (isValueEnd(prev) && (isIdentifier(next) || /^\d+$/.test(next ?? ""))) {
    return BINARY_OPS;
  }
  if (prev !== undefined && ["=", "return", "(", "[", ",", "<", "<=", ">", ">=", "==", "!="].includes(prev)) {
    const locals = contextIdentifiers(tokens).slice(0, 2);
    return [...VALUE_TOKENS.slice(0, 5 - locals.length), ...locals];
  }
  const locals = contextIdentifiers(tokens).slice(0, 3);
  return [...locals, ...FALLBACK];
}

export class HeuristicCodeModel implements FillMaskModel {
  readonly id = "heuristic-code-prior-1";
  private loaded = false;

  ready(): boolean {
    return this.loaded;
  }

  async load(): Promise<void> {
    // The tables are embedded; yielding a tick keeps the not-ready window
    // observable and mirrors how a weight-loading backend behaves.
    await new Promise((resolve) => setImmediate(resolve));
    this.loaded = true;
  }

  fillMask(sequence: string, topK: number): Prediction[] {
    const tokens = tokenize(sequence);
    const maskAt = tokens.indexOf(MASK);
    const pool: string[] = [];
    for (const candidate of candidatePool(tokens, maskAt)) {
      if (!pool.includes(candidate)) {
        pool.push(candidate);
      }
      if (pool.length === topK) {
        break;
      }
    }
    for (const filler of FALLBACK) {
      if (pool.length === topK) {
        break;
      }
      if (!pool.includes(filler)) {
        pool.push(filler);
      }
    }
    return pool.map((token, i) => ({ token, score: SCORE_LADDER[i] ?? 0.01 }));
  }
}
