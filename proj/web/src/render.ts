// Pure HTML rendering of view state. Same state in, same markup out.

import { EntityDocument, PATH_SEPARATOR } from "./api.js";
import { BrowseViewState, QueryViewState, TreeNode } from "./state.js";

export function escapeHtml(text: string): string {
  return text.replace(/[&<>"']/g, (c) => ({ "&": "&amp;", "<": "&lt;", ">": "&gt;", '"': "&quot;", "'": "&#39;" })[c]!);
}

const byCodePoint = (a: string, b: string) => (a < b ? -1 : a > b ? 1 : 0);

export interface GraphLayout {
  levels: Map<string, number>;
  positions: Map<string, { x: number; y: number }>;
  edges: { from: string; to: string; pathIds: number[] }[];
}

// Every path merged into one DAG with shared nodes collapsed. A node's level is its
// longest distance from the entity, so each edge points to a higher level.
export function layoutGraph(doc: EntityDocument): GraphLayout {
  const edgeMap = new Map<string, { from: string; to: string; pathIds: number[] }>();
  const levels = new Map<string, number>([[doc.entity, 0]]);
  for (const p of doc.paths) {
    const chain = [doc.entity, ...p.nodes];
    for (let i = 1; i < chain.length; ++i) {
      const key = chain[i - 1] + "\u0000" + chain[i];
      const e = edgeMap.get(key) ?? { from: chain[i - 1], to: chain[i], pathIds: [] };
      e.pathIds.push(p.path_id);
      edgeMap.set(key, e);
      if (!levels.has(chain[i])) levels.set(chain[i], 0);
    }
  }
  const edges = [...edgeMap.values()];
  for (let round = 0; round < levels.size; ++round) {
    let changed = false;
    for (const e of edges) {
      const want = levels.get(e.from)! + 1;
      if (levels.get(e.to)! < want) {
        levels.set(e.to, want);
        changed = true;
      }
    }
    if (!changed) break;
  }
  const columns = new Map<number, string[]>();
  for (const [node, level] of levels) columns.set(level, [...(columns.get(level) ?? []), node]);
  const positions = new Map<string, { x: number; y: number }>();
  for (const [level, nodes] of columns) {
    nodes.sort(byCodePoint).forEach((node, i) => positions.set(node, { x: 60 + level * 140, y: 40 + i * 60 }));
  }
  return { levels, positions, edges };
}

function renderGraph(doc: EntityDocument, highlight: number[]): string {
  const { positions, edges } = layoutGraph(doc);
  const width = Math.max(...[...positions.values()].map((p) => p.x)) + 80;
  const height = Math.max(...[...positions.values()].map((p) => p.y)) + 40;
  const lit = new Set(highlight);
  const overlays = doc.paths.map((p) => {
    const points = [doc.entity, ...p.nodes].map((n) => positions.get(n)!).map((pt) => `${pt.x},${pt.y}`).join(" ");
    const cls = lit.has(p.path_id) ? "path highlighted" : "path";
    return `<polyline class="${cls}" data-path-id="${p.path_id}" points="${points}"/>`;
  });
  const lines = edges.map((e) => {
    const a = positions.get(e.from)!, b = positions.get(e.to)!;
    return `<line class="edge" data-path-ids="${e.pathIds.join(" ")}" x1="${a.x}" y1="${a.y}" x2="${b.x}" y2="${b.y}"/>`;
  });
  const nodes = [...positions.entries()]
    .sort(([a], [b]) => byCodePoint(a, b))
    .map(([n, pt]) => {
      const cls = n === doc.entity ? "node entity" : "node";
      return `<g class="${cls}" data-term="${escapeHtml(n)}"><circle cx="${pt.x}" cy="${pt.y}" r="6"/>` +
        `<text x="${pt.x}" y="${pt.y - 12}">${escapeHtml(n)}</text></g>`;
    });
  return `<svg class="graph" viewBox="0 0 ${width} ${height}" width="${width}" height="${height}">` +
    `${lines.join("")}${overlays.join("")}${nodes.join("")}</svg>`;
}

export function renderQuery(state: QueryViewState): string {
  const parts: string[] = [];
  if (state.error) {
    parts.push(`<div class="banner error" role="alert">${escapeHtml(state.error)} ` +
      `<button data-action="retry">Retry</button></div>`);
  }
  if (state.pending) parts.push(`<p class="pending">Loading…</p>`);
  if (state.notFound && state.query !== null) {
    parts.push(`<p class="notice not-found">No entry for “${escapeHtml(state.query)}”.</p>`);
  }
  const doc = state.document;
  if (!doc) return parts.join("");

  parts.push(`<h2 class="entity">${escapeHtml(doc.entity)}` +
    (doc.generated ? ` <span class="badge generated">freshly generated</span>` : "") +
    (doc.kind === "term" ? ` <span class="badge term">schema term</span>` : "") + `</h2>`);

  const senses = doc.senses.map((s) => {
    const cls = s.sense_id === state.selectedSense ? "sense selected" : "sense";
    return `<li class="${cls}"><button data-sense="${escapeHtml(s.sense_id)}">${escapeHtml(s.sense_id)}</button>` +
      `<span class="phrases">${s.phrases.map(escapeHtml).join(" · ")}</span></li>`;
  });
  parts.push(`<ul class="senses">${senses.join("")}</ul>`);
  if (doc.paths.length) parts.push(renderGraph(doc, state.highlight));
  else parts.push(`<p class="notice">No hypernym paths.</p>`);

  const selected = doc.senses.find((s) => s.sense_id === state.selectedSense);
  if (selected) {
    const rows = selected.triples.map((t) => `<tr><td>${escapeHtml(t.relation)}</td><td>${escapeHtml(t.value)}</td></tr>`);
    parts.push(`<table class="triples" data-sense="${escapeHtml(selected.sense_id)}">` +
      `<thead><tr><th>relation</th><th>value</th></tr></thead><tbody>${rows.join("")}</tbody></table>`);
  } else if (doc.senses.length) {
    parts.push(`<p class="hint">Select a sense to see its paths and triples.</p>`);
  }
  return parts.join("");
}

function renderNode(node: TreeNode, prefix: string[], selected: string | null): string {
  const path = [...prefix, node.term];
  const key = escapeHtml(path.join(PATH_SEPARATOR));
  const toggle = node.expanded ? "▾" : "▸";
  const cls = key === selected ? "term selected" : "term";
  const children = node.expanded && node.children
    ? `<ul>${node.children.map((c) => renderNode(c, path, selected)).join("")}</ul>`
    : "";
  return `<li><button class="toggle" data-expand="${key}">${toggle}</button>` +
    `<button class="${cls}" data-select="${key}">${escapeHtml(node.term)}</button>` +
    `<span class="count">${node.entityCount}</span>${children}</li>`;
}

export function renderBrowse(state: BrowseViewState): string {
  const parts: string[] = [];
  if (state.error) parts.push(`<div class="banner error" role="alert">${escapeHtml(state.error)}</div>`);
  const selected = state.selectedPath ? escapeHtml(state.selectedPath.join(PATH_SEPARATOR)) : null;
  parts.push(`<div class="tree-panel"><ul class="tree">${(state.roots ?? []).map((r) => renderNode(r, [], selected)).join("")}</ul></div>`);
  let right: string;
  if (!state.selectedPath) right = `<p class="hint">Select a path to list its entities.</p>`;
  else if (state.entities === null) right = `<p class="pending">Loading…</p>`;
  else if (state.entities.length === 0) right = `<p class="notice empty">No entities under this path.</p>`;
  else right = `<ul class="entities">${state.entities.map((e) => `<li><a href="#/query/${encodeURIComponent(e)}">${escapeHtml(e)}</a></li>`).join("")}</ul>`;
  parts.push(`<div class="entity-panel">${right}</div>`);
  return parts.join("");
}
