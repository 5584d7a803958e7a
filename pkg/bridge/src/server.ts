/** HTTP server exposing POST /v1/fill-mask and GET /healthz. */

import http from "node:http";
import type { FillMaskModel } from "./model.js";
import { TOP_K, isProtocolError, shapeResponse, validateRequest } from "./protocol.js";

function send(res: http.ServerResponse, status: number, body: unknown): void {
  const payload = JSON.stringify(body);
  res.writeHead(status, {
    "Content-Type": "application/json",
    "Content-Length": Buffer.byteLength(payload),
  });
  res.end(payload);
}

async function readBody(req: http.IncomingMessage): Promise<string> {
  const chunks: Buffer[] = [];
  for await (const chunk of req) {
    chunks.push(chunk as Buffer);
  }
  return Buffer.concat(chunks).toString("utf-8");
}

export function createServer(model: FillMaskModel): http.Server {
  return http.createServer(async (req, res) => {
    try {
      if (req.method === "GET" && (req.url === "/healthz" || req.url === "/health")) {
        if (!model.ready()) {
          send(res, 503, { error: "model not loaded" });
          return;
        }
        send(res, 200, { model: model.id, status: "ready" });
        return;
      }
      if (req.method === "POST" && req.url === "/v1/fill-mask") {
        if (!model.ready()) {
          send(res, 503, { error: "model not loaded" });
          return;
        }
        const raw = await readBody(req);
        let body: unknown;
        try {
          body = JSON.parse(raw);
        } catch {
          send(res, 400, { error: "malformed JSON" });
          return;
        }
        const checked = validateRequest(body);
        if (isProtocolError(checked)) {
          send(res, checked.status, { error: checked.error });
          return;
        }
        send(res, 200, shapeResponse(model.id, model.fillMask(checked.sequence, TOP_K)));
        return;
      }
      send(res, 404, { error: "not found" });
    } catch (err) {
      send(res, 500, { error: err instanceof Error ? err.message : String(err) });
    }
  });
}

export function listen(server: http.Server, port: number, host = "127.0.0.1"): Promise<number> {
  return new Promise((resolve, reject) => {
    server.once("error", reject);
    server.listen(port, host, () => {
      const address = server.address();
      if (address && typeof address === "object") {
        resolve(address.port);
      } else {
        reject(new Error("no address"));
      }
    });
  });
}
