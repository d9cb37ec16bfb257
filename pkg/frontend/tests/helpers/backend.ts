// In-memory stand-in for the election service, installed as globalThis.fetch.
// Every request is recorded so tests can assert on traffic (and on what is
// never sent, like secret key material).

export interface Recorded {
  method: string;
  path: string;
  body: string | null;
  headers: Record<string, string>;
}

export interface HandlerRequest {
  method: string;
  path: string;
  json: any;
  headers: Record<string, string>;
}

export type HandlerReply = { status?: number; body: unknown };
export type Handler = (req: HandlerRequest) => HandlerReply;

export class FakeBackend {
  requests: Recorded[] = [];
  private exact = new Map<string, Handler>();
  private patterns: Array<[string, RegExp, Handler]> = [];
  private original: typeof globalThis.fetch | null = null;

  on(method: string, path: string | RegExp, handler: Handler): this {
    if (typeof path === "string") this.exact.set(`${method} ${path}`, handler);
    else this.patterns.push([method, path, handler]);
    return this;
  }

  error(code: string, message: string, status: number): HandlerReply {
    return { status, body: { code, message } };
  }

  install(): void {
    this.original = globalThis.fetch;
    globalThis.fetch = (async (input: any, init?: any) => {
      const url = typeof input === "string" ? input : input.url;
      const path = url.replace(/^https?:\/\/[^/]+/, "");
      const method = (init?.method ?? "GET").toUpperCase();
      const body = init?.body ?? null;
      const headers: Record<string, string> = {};
      for (const [k, v] of Object.entries(init?.headers ?? {})) {
        headers[k.toLowerCase()] = String(v);
      }
      this.requests.push({ method, path, body, headers });

      const bare = path.split("?")[0] ?? path;
      let handler = this.exact.get(`${method} ${path}`) ?? this.exact.get(`${method} ${bare}`);
      if (!handler) {
        for (const [m, re, h] of this.patterns) {
          if (m === method && re.test(path)) {
            handler = h;
            break;
          }
        }
      }
      if (!handler) {
        return jsonResponse(404, { code: "NotFound", message: "no matching record" });
      }
      const reply = handler({
        method,
        path,
        json: body ? JSON.parse(body) : null,
        headers,
      });
      return jsonResponse(reply.status ?? 200, reply.body);
    }) as typeof globalThis.fetch;
  }

  uninstall(): void {
    if (this.original) globalThis.fetch = this.original;
  }

  sent(method: string, pathPrefix: string): Recorded[] {
    return this.requests.filter((r) => r.method === method && r.path.startsWith(pathPrefix));
  }
}

function jsonResponse(status: number, body: unknown): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "Content-Type": "application/json" },
  });
}

export function flush(): Promise<void> {
  // lets queued promise callbacks and microtasks run
  return new Promise((resolve) => setTimeout(resolve, 0));
}
