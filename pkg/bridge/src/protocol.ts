/** Wire protocol: request validation and response shaping. */

import { z } from "zod";
import { MASK, tokenize, type Prediction } from "./model.js";

export const TOP_K = 5;
export const MAX_SEQUENCE_TOKENS = 512;

export const requestSchema = z.object({
  sequence: z.string(),
  top_k: z.number().int().optional(),
});

export type ProtocolError = { status: number; error: string };

export function maskCount(sequence: string): number {
  let count = 0;
  let at = sequence.indexOf(MASK);
  while (at !== -1) {
    count += 1;
    at = sequence.indexOf(MASK, at + MASK.length);
  }
  return count;
}

/**
 * Validate a parsed request body. Malformed shapes are 400; a well-formed
 * request whose sequence has any mask count other than one is 422. Over-long
 * sequences are rejected, not truncated: the client owns windowing.
 */
export function validateRequest(body: unknown): { sequence: string } | ProtocolError {
  const parsed = requestSchema.safeParse(body);
  if (!parsed.success) {
    return { status: 400, error: "body must be {sequence: string, top_k?: 5}" };
  }
  const { sequence, top_k } = parsed.data;
  if (top_k !== undefined && top_k !== TOP_K) {
    return { status: 400, error: `top_k must be ${TOP_K}` };
  }
  if (tokenize(sequence).length > MAX_SEQUENCE_TOKENS) {
    return { status: 400, error: `sequence exceeds ${MAX_SEQUENCE_TOKENS} tokens` };
  }
  const masks = maskCount(sequence);
  if (masks !== 1) {
    return { status: 422, error: `sequence must contain exactly one ${MASK}, found ${masks}` };
  }
  return { sequence };
}

export function isProtocolError(value: unknown): value is ProtocolError {
  return typeof value === "object" && value !== null && "status" in value && "error" in value;
}

export function shapeResponse(modelId: string, predictions: Prediction[]): {
  model: string;
  predictions: Prediction[];
} {
  if (predictions.length !== TOP_K) {
    throw new Error(`model returned ${predictions.length} predictions, need ${TOP_K}`);
  }
  for (let i = 1; i < predictions.length; i += 1) {
    if (predictions[i].score > predictions[i - 1].score) {
      throw new Error("model scores must be non-increasing");
    }
  }
  return { model: modelId, predictions };
}
