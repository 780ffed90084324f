// Typed, GET-only access to the service's JSON API.

export const PATH_SEPARATOR = "→";

export interface Triple {
  relation: string;
  value: string;
}

export interface SenseDoc {
  sense_id: string;
  phrases: string[];
  triples: Triple[];
  path_ids: number[];
}

export interface PathDoc {
  path_id: number;
  nodes: string[];
  sense_id: string | null;
  score: number | null;
}

export interface EntityDocument {
  entity: string;
  kind: "entity" | "term";
  generated: boolean;
  senses: SenseDoc[];
  paths: PathDoc[];
}

export interface SchemaNodeDoc {
  term: string;
  entity_count: number;
  children: SchemaNodeDoc[];
}

export interface SchemaDocument {
  roots: SchemaNodeDoc[];
}

export interface PathEntitiesDocument {
  path: string[];
  entities: string[];
}

export type ApiResult<T> =
  | { kind: "ok"; body: T }
  | { kind: "missing"; message: string }
  | { kind: "error"; message: string };

export interface FetchResponse {
  status: number;
  json(): Promise<unknown>;
}

export type FetchLike = (url: string, init: { method: "GET" }) => Promise<FetchResponse>;

export class ApiClient {
  constructor(
    private readonly base: string = "",
    private readonly fetchFn: FetchLike = (url, init) => globalThis.fetch(url, init),
  ) {}

  entity(name: string): Promise<ApiResult<EntityDocument>> {
    return this.get(`/api/entity/${encodeURIComponent(name)}`);
  }

  schema(root: string | null, depth: number): Promise<ApiResult<SchemaDocument>> {
    const params = new URLSearchParams();
    if (root !== null) params.set("root", root);
    params.set("depth", String(depth));
    return this.get(`/api/schema?${params.toString()}`);
  }

  // `chain` runs upward from the most specific term to a root.
  pathEntities(chain: string[]): Promise<ApiResult<PathEntitiesDocument>> {
    return this.get(`/api/path-entities?path=${encodeURIComponent(chain.join(PATH_SEPARATOR))}`);
  }

  private async get<T>(target: string): Promise<ApiResult<T>> {
    let response: FetchResponse;
    let body: unknown;
    try {
      response = await this.fetchFn(this.base + target, { method: "GET" });
      body = await response.json();
    } catch (e) {
      return { kind: "error", message: `network error: ${e instanceof Error ? e.message : String(e)}` };
    }
    const message = (body as { error?: string } | null)?.error ?? `HTTP ${response.status}`;
    if (response.status === 200) return { kind: "ok", body: body as T };
    if (response.status === 404) return { kind: "missing", message };
    return { kind: "error", message: `HTTP ${response.status}: ${message}` };
  }
}
