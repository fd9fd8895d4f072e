/** Fixture-backed fetch stub. Routes are keyed by method and full path;
 * unrouted requests reject like a network failure would. */

import type { FetchLike } from "../src/api.js";

export interface RecordedCall {
  method: string;
  path: string;
  body: unknown;
}

interface Reply {
  status: number;
  body: unknown;
}

type Responder = Reply | ((requestBody: unknown) => Reply);

export class FetchStub {
  readonly calls: RecordedCall[] = [];
  private readonly routes = new Map<string, Responder>();

  on(method: string, path: string, responder: Responder): this {
    this.routes.set(`${method} ${path}`, responder);
    return this;
  }

  off(method: string, path: string): this {
    this.routes.delete(`${method} ${path}`);
    return this;
  }

  /** Calls that hit `path`, oldest first. */
  sent(method: string, path: string): RecordedCall[] {
    return this.calls.filter((c) => c.method === method && c.path === path);
  }

  readonly fetch: FetchLike = (url, init) => {
    const parsed = new URL(url);
    const method = init?.method ?? "GET";
    const path = `${parsed.pathname}${parsed.search}`;
    const body = typeof init?.body === "string" ? JSON.parse(init.body) : null;
    this.calls.push({ method, path, body });

    const responder = this.routes.get(`${method} ${path}`);
    if (responder === undefined) {
      return Promise.reject(new TypeError(`fetch failed: ${method} ${path}`));
    }
    const reply = typeof responder === "function" ? responder(body) : responder;
    return Promise.resolve(
      new Response(JSON.stringify(reply.body), {
        status: reply.status,
        headers: { "Content-Type": "application/json" },
      }),
    );
  };
}

/** Lets queued promise callbacks and chained awaits settle. */
export async function flush(): Promise<void> {
  for (let i = 0; i < 4; i += 1) {
    await new Promise((resolve) => {
      setTimeout(resolve, 0);
    });
  }
}
