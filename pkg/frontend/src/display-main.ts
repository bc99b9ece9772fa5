/** Browser entry point for the projection page. */

import { DisplayApp, waterEnabled } from "./display.js";
import type { ManifestJson } from "./manifest.js";
import { PresenterSocket, wsUrl } from "./protocol.js";

async function boot(): Promise<void> {
  const root = document.getElementById("app");
  if (!root) throw new Error("missing #app element");
  const manifest = (await (await fetch("/api/project")).json()) as ManifestJson;
  document.title = `${manifest.project.name} — Table`;

  const app = new DisplayApp(root, manifest, {
    water: waterEnabled(window.location.search),
  });
  const socket = new PresenterSocket({
    url: wsUrl(window.location),
    role: "display",
    clientName: "projection",
    makeSocket: (url) => new WebSocket(url) as never,
    onSnapshot: (snapshot) => app.onSnapshot(snapshot),
    onStatus: (status) => app.onStatus(status),
  });
  socket.connect();
}

boot().catch((err) => {
  document.body.textContent = `Failed to start display: ${err}`;
});
