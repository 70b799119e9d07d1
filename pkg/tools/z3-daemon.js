// Long-lived SMT-LIB2 evaluation daemon backed by the z3 WASM build.
//
// Listens on a per-user unix socket. Each connection carries one script
// (terminated by end-of-stream); the reply is whatever z3 prints for it.
// A fresh solver context is created per request, so requests are isolated.
// The daemon exits after IDLE_MS without traffic.

'use strict';

const net = require('net');
const fs = require('fs');
const os = require('os');
const path = require('path');

const SOCKET = process.env.Z3_WRAPPER_SOCKET ||
  path.join(os.tmpdir(), `z3-wasm-${os.userInfo().uid}.sock`);
const IDLE_MS = 10 * 60 * 1000;

const { init } = require('z3-solver');

async function main() {
  const { Z3 } = await init();

  let idleTimer = null;
  const touch = (server) => {
    if (idleTimer) clearTimeout(idleTimer);
    idleTimer = setTimeout(() => {
      server.close();
      try { fs.unlinkSync(SOCKET); } catch (e) {}
      process.exit(0);
    }, IDLE_MS);
  };

  // z3 WASM is a single instance; serialize requests through a queue.
  let chain = Promise.resolve();

  const server = net.createServer({ allowHalfOpen: true }, (conn) => {
    touch(server);
    const chunks = [];
    conn.on('data', (d) => chunks.push(d));
    conn.on('error', () => {});
    conn.on('end', () => {
      const script = Buffer.concat(chunks).toString('utf8');
      chain = chain.then(async () => {
        let out;
        try {
          const cfg = Z3.mk_config();
          const ctx = Z3.mk_context(cfg);
          Z3.del_config(cfg);
          try {
            out = await Z3.eval_smtlib2_string(ctx, script);
          } finally {
            Z3.del_context(ctx);
          }
        } catch (e) {
          out = `(error "${String(e).replace(/"/g, "'")}")`;
        }
        try { conn.end(out); } catch (e) {}
        touch(server);
      });
    });
  });

  try { fs.unlinkSync(SOCKET); } catch (e) {}
  server.listen(SOCKET);
  touch(server);
}

main().catch((e) => {
  console.error(e);
  process.exit(1);
});
