// Entry point: reads the service base URL from the page (meta tag, with a
// localhost fallback) and mounts the app.

import { ServiceClient } from "./api.js";
import { App, DEFAULT_CONFIG } from "./app.js";

export function baseUrlFromDocument(doc: Document): string {
  const meta = doc.querySelector('meta[name="service-base"]');
  const content = meta?.getAttribute("content");
  return content && content !== "" ? content : "http://localhost:8000";
}

export function bootstrap(doc: Document): App {
  const root = doc.getElementById("app");
  if (root === null) {
    throw new Error('missing mount point <div id="app">');
  }
  return new App(root, new ServiceClient(baseUrlFromDocument(doc)), DEFAULT_CONFIG);
}

if (typeof document !== "undefined" && document.getElementById("app") !== null) {
  bootstrap(document);
}
