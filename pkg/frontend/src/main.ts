/** Browser entry point. The API origin defaults to the local service
 * and can be overridden with ?api=http://host:port. */

import { createApp } from "./app.js";
import { RiskscopeApi } from "./api.js";

const DEFAULT_API = "http://127.0.0.1:8080";

function apiBase(): string {
  const fromQuery = new URLSearchParams(window.location.search).get("api");
  return fromQuery ?? DEFAULT_API;
}

const root = document.getElementById("app");
if (root === null) {
  throw new Error("missing #app mount point");
}
createApp(root, new RiskscopeApi(apiBase()));
