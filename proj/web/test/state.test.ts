import assert from "node:assert/strict";
import { test } from "node:test";

import { EntityDocument } from "../src/api.js";
import { BrowseController, QueryController, highlightFor, initialQueryState, selectSense } from "../src/state.js";
import { FakeServer, apple } from "./fake.js";

test("selecting a sense highlights exactly its paths", async () => {
  const server = new FakeServer();
  const q = new QueryController(server.client());
  await q.search("苹果");
  assert.deepEqual(q.selectSense("fruit").highlight, [1, 2]);
  assert.deepEqual(q.selectSense("phone").highlight, [0]);
  assert.deepEqual(q.selectSense("spare").highlight, []);
  assert.equal(server.requests.length, 1, "sense selection must not fetch");
});

test("highlight set property over random assignments", () => {
  let seed = 17;
  const rand = () => ((seed = (seed * 1103515245 + 12345) % 2147483648) / 2147483648);
  for (let trial = 0; trial < 500; ++trial) {
    const senses = ["a", "b", "c"].slice(0, 1 + Math.floor(rand() * 3));
    const paths = Array.from({ length: Math.floor(rand() * 8) }, (_, i) => ({
      path_id: i,
      nodes: ["x" + i],
      sense_id: rand() < 0.2 ? null : senses[Math.floor(rand() * senses.length)],
      score: 0.5,
    }));
    const doc: EntityDocument = {
      entity: "e",
      kind: "entity",
      generated: false,
      senses: senses.map((s) => ({ sense_id: s, phrases: [], triples: [], path_ids: [] })),
      paths,
    };
    const state = { ...initialQueryState, document: doc };
    for (const s of senses) {
      const want = paths.filter((p) => p.sense_id === s).map((p) => p.path_id);
      const after = selectSense(state, s);
      assert.deepEqual(after.highlight, want);
      assert.deepEqual(selectSense(after, s), after, "re-selecting is idempotent");
    }
    assert.deepEqual(highlightFor(doc, null), []);
  }
});

test("stale sense ids are ignored", async () => {
  const server = new FakeServer();
  const q = new QueryController(server.client());
  await q.search("苹果");
  const before = q.selectSense("fruit");
  const warn = console.warn;
  let warned = 0;
  console.warn = () => void ++warned;
  try {
    assert.equal(q.selectSense("nope"), before);
  } finally {
    console.warn = warn;
  }
  assert.equal(warned, 1);
});

test("not found, server errors and network errors", async () => {
  const server = new FakeServer();
  const q = new QueryController(server.client());
  await q.search("苹果");
  q.selectSense("fruit");
  const shown = q.state;

  const failed = await q.search("boom");
  assert.match(failed.error!, /500/);
  assert.equal(failed.document, shown.document, "previous view stays intact");
  assert.equal(failed.selectedSense, "fruit");

  server.fail = true;
  const down = await q.search("苹果");
  assert.match(down.error!, /network/);
  assert.equal(down.document, shown.document);

  server.fail = false;
  const missing = await q.search("梨");
  assert.equal(missing.notFound, true);
  assert.equal(missing.document, null);
  assert.equal(missing.error, null);
});

test("a superseded response is dropped", async () => {
  const server = new FakeServer();
  server.entities["香蕉"] = { ...apple, entity: "香蕉" };
  server.hold = true;
  const q = new QueryController(server.client());
  const first = q.search("苹果");
  const second = q.search("香蕉");
  await new Promise((r) => setImmediate(r));
  server.release(1);
  await second;
  server.release(0);
  await first;
  assert.equal(q.state.document!.entity, "香蕉");
});

test("empty input does nothing", async () => {
  const server = new FakeServer();
  const q = new QueryController(server.client());
  await q.search("   ");
  assert.equal(server.requests.length, 0);
});

test("expanding twice fetches once and never duplicates children", async () => {
  const server = new FakeServer();
  const b = new BrowseController(server.client());
  await b.loadRoots();
  assert.deepEqual(b.state.roots!.map((r) => r.term), ["物"]);
  assert.equal(b.state.roots![0].children, null);

  await b.expand(["物"]);
  await b.expand(["物"]);
  assert.equal(server.count("/api/schema?root="), 1);
  assert.deepEqual(b.state.roots![0].children!.map((c) => c.term), ["食品", "生物"]);

  b.collapse(["物"]);
  await b.expand(["物"]);
  assert.equal(server.count("/api/schema?root="), 1, "re-expanding after collapse is a cache hit");
  assert.equal(b.state.roots![0].children!.length, 2);

  await b.expand(["物", "食品"]);
  assert.deepEqual(b.state.roots![0].children![0].children!.map((c) => c.term), ["水果"]);
});

test("selecting a chain lists its entities", async () => {
  const server = new FakeServer();
  const b = new BrowseController(server.client());
  await b.loadRoots();
  await b.expand(["物"]);
  await b.expand(["物", "食品"]);
  const s = await b.selectPath(["物", "食品", "水果"]);
  assert.deepEqual(s.entities, ["苹果", "香蕉"]);
  assert.ok(server.requests.at(-1)!.url.includes(encodeURIComponent("水果→食品→物")));
  assert.deepEqual((await b.selectPath(["物", "生物"])).entities, []);
});

test("browse errors leave the tree unchanged", async () => {
  const server = new FakeServer();
  const b = new BrowseController(server.client());
  await b.loadRoots();
  await b.expand(["物"]);
  const tree = b.state.roots;
  server.fail = true;
  const s = await b.expand(["物", "生物"]);
  assert.match(s.error!, /network/);
  assert.equal(s.roots, tree);
});

test("the client only issues GET requests", async () => {
  const server = new FakeServer();
  const q = new QueryController(server.client());
  const b = new BrowseController(server.client());
  await q.search("苹果");
  await b.loadRoots();
  await b.expand(["物"]);
  await b.selectPath(["物"]);
  assert.ok(server.requests.length >= 4);
  assert.ok(server.requests.every((r) => r.method === "GET"));
});
