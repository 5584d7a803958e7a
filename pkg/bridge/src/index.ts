import { HeuristicCodeModel } from "./model.js";
import { createServer, listen } from "./server.js";

const port = Number(process.env.PORT ?? "8731");
const host = process.env.HOST ?? "127.0.0.1";

const model = new HeuristicCodeModel();
const server = createServer(model);

// Serve immediately (healthz answers 503 until the model is up).
listen(server, port, host)
  .then(async (boundPort) => {
    console.log(`mlm-bridge listening on http://${host}:${boundPort}`);
    await model.load();
    console.log(`model ready: ${model.id}`);
  })
  .catch((err) => {
    console.error(err);
    process.exit(1);
  });
