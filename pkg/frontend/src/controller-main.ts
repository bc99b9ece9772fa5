/** Browser entry point for the controller page. */

import { ControllerApp } from "./controller.js";
import type { ManifestJson } from "./manifest.js";
import { PresenterSocket, wsUrl } from "./protocol.js";

async function boot(): Promise<void> {
  const root = document.getElementById("app");
  if (!root) throw new Error("missing #app element");
  const manifest = (await (await fetch("/api/project")).json()) as ManifestJson;
  document.title = `${manifest.project.name} — Controller`;

  let app: ControllerApp;
  const socket = new PresenterSocket({
    url: wsUrl(window.location),
    role: "controller",
    clientName: "touchscreen",
    makeSocket: (url) => new WebSocket(url) as never,
    onSnapshot: (snapshot) => app.onSnapshot(snapshot),
    onRejected: (code, message) => app.onRejected(code, message),
    onStatus: (status) => app.onStatus(status),
  });
  app = new ControllerApp(root, manifest, socket);
  socket.connect();
}

boot().catch((err) => {
  document.body.textContent = `Failed to start controller: ${err}`;
});
