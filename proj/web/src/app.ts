// Browser entry point: hash routing (#/query/{name}, #/browse) and event wiring.

import { ApiClient, PATH_SEPARATOR } from "./api.js";
import { renderBrowse, renderQuery } from "./render.js";
import { BrowseController, QueryController, nodeAt } from "./state.js";

const api = new ApiClient();
const main = document.querySelector<HTMLElement>("#main")!;
const form = document.querySelector<HTMLFormElement>("#search")!;
const input = form.querySelector<HTMLInputElement>("input")!;

let page: "query" | "browse" = "query";
const query = new QueryController(api, (s) => page === "query" && (main.innerHTML = renderQuery(s)));
const browse = new BrowseController(api, (s) => page === "browse" && (main.innerHTML = renderBrowse(s)));

async function route() {
  const hash = decodeURIComponent(location.hash.slice(1));
  if (hash.startsWith("/query/")) {
    page = "query";
    const name = hash.slice("/query/".length);
    input.value = name;
    main.innerHTML = renderQuery(query.state);
    if (name && name !== query.state.query) await query.search(name);
  } else if (hash === "/browse") {
    page = "browse";
    main.innerHTML = renderBrowse(browse.state);
    if (browse.state.roots === null) await browse.loadRoots();
  } else {
    page = "query";
    main.innerHTML = renderQuery(query.state);
  }
}

form.addEventListener("submit", (e) => {
  e.preventDefault();
  const name = input.value.trim();
  if (name) location.hash = `#/query/${encodeURIComponent(name)}`;
});

main.addEventListener("click", (e) => {
  const target = (e.target as HTMLElement).closest<HTMLElement>("button");
  if (!target) return;
  if (target.dataset.sense !== undefined) query.selectSense(target.dataset.sense);
  else if (target.dataset.action === "retry" && query.state.query) void query.search(query.state.query);
  else if (target.dataset.expand !== undefined) {
    const path = target.dataset.expand.split(PATH_SEPARATOR);
    if (nodeAt(browse.state, path)?.expanded) browse.collapse(path);
    else void browse.expand(path);
  } else if (target.dataset.select !== undefined) void browse.selectPath(target.dataset.select.split(PATH_SEPARATOR));
});

window.addEventListener("hashchange", () => void route());
void route();
