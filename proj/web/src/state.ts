// View state for the query and browse pages. Reducers are pure; the controllers
// add fetching and drop responses that a newer request has superseded.

import { ApiClient, ApiResult, EntityDocument, PathEntitiesDocument, SchemaDocument, SchemaNodeDoc } from "./api.js";

export interface QueryViewState {
  query: string | null;
  document: EntityDocument | null;
  notFound: boolean;
  error: string | null;
  pending: boolean;
  selectedSense: string | null;
  highlight: number[];
  token: number;
}

export const initialQueryState: QueryViewState = {
  query: null,
  document: null,
  notFound: false,
  error: null,
  pending: false,
  selectedSense: null,
  highlight: [],
  token: 0,
};

export function highlightFor(doc: EntityDocument | null, senseId: string | null): number[] {
  if (!doc || senseId === null) return [];
  return doc.paths
    .filter((p) => p.sense_id === senseId)
    .map((p) => p.path_id)
    .sort((a, b) => a - b);
}

export function beginQuery(state: QueryViewState, name: string): QueryViewState {
  return { ...state, query: name, pending: true, error: null, token: state.token + 1 };
}

export function finishQuery(state: QueryViewState, token: number, result: ApiResult<EntityDocument>): QueryViewState {
  if (token !== state.token) return state;
  switch (result.kind) {
    case "ok":
      return { ...state, document: result.body, notFound: false, error: null, pending: false, selectedSense: null, highlight: [] };
    case "missing":
      return { ...state, document: null, notFound: true, error: null, pending: false, selectedSense: null, highlight: [] };
    case "error":
      // Keep whatever was on screen; the banner offers a retry.
      return { ...state, error: result.message, pending: false };
  }
}

export function selectSense(state: QueryViewState, senseId: string): QueryViewState {
  const doc = state.document;
  if (!doc || !doc.senses.some((s) => s.sense_id === senseId)) {
    console.warn(`ignoring unknown sense ${senseId}`);
    return state;
  }
  return { ...state, selectedSense: senseId, highlight: highlightFor(doc, senseId) };
}

export class QueryController {
  state: QueryViewState = initialQueryState;

  constructor(private readonly api: ApiClient, private readonly onChange: (s: QueryViewState) => void = () => {}) {}

  async search(name: string): Promise<QueryViewState> {
    const trimmed = name.trim();
    if (!trimmed) return this.state;
    this.set(beginQuery(this.state, trimmed));
    const token = this.state.token;
    const result = await this.api.entity(trimmed);
    this.set(finishQuery(this.state, token, result));
    return this.state;
  }

  selectSense(senseId: string): QueryViewState {
    this.set(selectSense(this.state, senseId));
    return this.state;
  }

  private set(next: QueryViewState) {
    if (next === this.state) return;
    this.state = next;
    this.onChange(next);
  }
}

export interface TreeNode {
  term: string;
  entityCount: number;
  expanded: boolean;
  children: TreeNode[] | null;  // null until fetched
}

export interface BrowseViewState {
  roots: TreeNode[] | null;
  cache: Record<string, SchemaNodeDoc[]>;
  selectedPath: string[] | null;  // root first
  entities: string[] | null;
  error: string | null;
  token: number;
}

export const initialBrowseState: BrowseViewState = {
  roots: null,
  cache: {},
  selectedPath: null,
  entities: null,
  error: null,
  token: 0,
};

function leaf(doc: SchemaNodeDoc): TreeNode {
  return { term: doc.term, entityCount: doc.entity_count, expanded: false, children: null };
}

export function withRoots(state: BrowseViewState, result: ApiResult<SchemaDocument>): BrowseViewState {
  if (result.kind !== "ok") return { ...state, error: result.message };
  return { ...state, roots: result.body.roots.map(leaf), error: null };
}

// Replaces the node at `path` (root first) using `update`.
function updateAt(nodes: TreeNode[], path: string[], update: (n: TreeNode) => TreeNode): TreeNode[] {
  const [head, ...rest] = path;
  return nodes.map((n) => {
    if (n.term !== head) return n;
    if (rest.length === 0) return update(n);
    return { ...n, children: n.children ? updateAt(n.children, rest, update) : n.children };
  });
}

export function nodeAt(state: BrowseViewState, path: string[]): TreeNode | null {
  let level = state.roots ?? [];
  let found: TreeNode | null = null;
  for (const term of path) {
    found = level.find((n) => n.term === term) ?? null;
    if (!found) return null;
    level = found.children ?? [];
  }
  return found;
}

export function withChildren(state: BrowseViewState, path: string[], children: SchemaNodeDoc[]): BrowseViewState {
  const term = path[path.length - 1];
  return {
    ...state,
    cache: { ...state.cache, [term]: children },
    roots: updateAt(state.roots ?? [], path, (n) => ({ ...n, expanded: true, children: children.map(leaf) })),
    error: null,
  };
}

export function collapse(state: BrowseViewState, path: string[]): BrowseViewState {
  return { ...state, roots: updateAt(state.roots ?? [], path, (n) => ({ ...n, expanded: false })) };
}

export function beginSelectPath(state: BrowseViewState, path: string[]): BrowseViewState {
  return { ...state, selectedPath: path, token: state.token + 1 };
}

export function finishSelectPath(state: BrowseViewState, token: number, result: ApiResult<PathEntitiesDocument>): BrowseViewState {
  if (token !== state.token) return state;
  if (result.kind !== "ok") return { ...state, error: result.message };
  return { ...state, entities: result.body.entities, error: null };
}

export class BrowseController {
  state: BrowseViewState = initialBrowseState;

  constructor(private readonly api: ApiClient, private readonly onChange: (s: BrowseViewState) => void = () => {}) {}

  async loadRoots(): Promise<BrowseViewState> {
    this.set(withRoots(this.state, await this.api.schema(null, 1)));
    return this.state;
  }

  // Idempotent: a node's children are fetched at most once.
  async expand(path: string[]): Promise<BrowseViewState> {
    const node = nodeAt(this.state, path);
    if (!node) return this.state;
    const term = path[path.length - 1];
    const cached = this.state.cache[term];
    if (cached) {
      this.set(node.expanded ? this.state : withChildren(this.state, path, cached));
      return this.state;
    }
    const result = await this.api.schema(term, 1);
    if (result.kind !== "ok") {
      this.set({ ...this.state, error: result.message });
    } else if (nodeAt(this.state, path)) {
      this.set(withChildren(this.state, path, result.body.roots[0]?.children ?? []));
    }
    return this.state;
  }

  collapse(path: string[]): BrowseViewState {
    this.set(collapse(this.state, path));
    return this.state;
  }

  async selectPath(path: string[]): Promise<BrowseViewState> {
    if (path.length === 0) return this.state;
    this.set(beginSelectPath(this.state, path));
    const token = this.state.token;
    const result = await this.api.pathEntities([...path].reverse());
    this.set(finishSelectPath(this.state, token, result));
    return this.state;
  }

  private set(next: BrowseViewState) {
    if (next === this.state) return;
    this.state = next;
    this.onChange(next);
  }
}
