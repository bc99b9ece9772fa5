"""Presenter service.

Loads a validated project folder, owns the authoritative presenter
state, serves the manifest and assets over HTTP, and keeps controller
and display clients synchronized over a WebSocket at /ws.

Protocol (JSON text frames, message kind in "type"):

    client -> server   {"type": "hello", "role": "controller"|"display", "client_name": "..."}
    server -> client   {"type": "welcome", "client_id": "...", "snapshot": {"version": N, "state": {...}}}
    client -> server   {"type": "event", "event": {"type": "set_year", ...}}
    server -> all      {"type": "snapshot", "version": N, "state": {...}}
    server -> sender   {"type": "rejected", "reason_code": "...", "message": "..."}
    either direction   {"type": "ping"} / {"type": "pong"}

Events apply in one total order (a single lock guards apply+broadcast),
so every client observes gapless, strictly increasing versions from the
version it joined at. Display-role clients are read-only.
"""

from __future__ import annotations

import argparse
import json
import logging
import mimetypes
import os
import sys
import urllib.parse
from pathlib import Path

import asyncio

from aiohttp import WSMsgType, web

from . import state as st
from .projectio import (
    SETTINGS_NAME,
    LoadedProject,
    ValidationReport,
    canonical_json_bytes,
    encode_manifest,
    load_project,
)

log = logging.getLogger("makawalu.presenter")

CONTROLLER_PAGE = "index.html"
DISPLAY_PAGE = "display.html"

_FALLBACK_PAGE = """<!doctype html>
<html><head><meta charset="utf-8"><title>Makawalu Presenter</title></head>
<body style="font-family: sans-serif; background:#111; color:#eee">
<h1>Makawalu Presenter</h1>
<p>No {role} UI bundle is installed. Start the service with <code>--ui &lt;dir&gt;</code>
pointing at a built frontend, or use the HTTP API directly:</p>
<ul>
<li><a href="/api/project">/api/project</a> — project manifest</li>
<li><a href="/api/state">/api/state</a> — current snapshot</li>
<li><a href="/healthz">/healthz</a> — liveness</li>
</ul>
</body></html>
"""


def settings_to_dict(state: st.PresenterState) -> dict:
    return {
        "calibration_locked": state.calibration_locked,
        "transforms": {
            element: {"dx": t.dx, "dy": t.dy, "sx": t.sx, "sy": t.sy}
            for element, t in sorted(state.transforms.items())
        },
    }


def load_settings(project_root: Path | str) -> dict | None:
    """Read the presenter settings sidecar; None when absent or unusable."""
    path = Path(project_root) / SETTINGS_NAME
    if not path.is_file():
        return None
    try:
        data = json.loads(path.read_text("utf-8"))
        if not isinstance(data, dict) or not isinstance(data.get("transforms"), dict):
            raise ValueError("settings must be an object with a transforms map")
        return data
    except (OSError, ValueError) as exc:
        log.warning("ignoring unreadable %s: %s", SETTINGS_NAME, exc)
        return None


def apply_settings(state: st.PresenterState, settings: dict | None) -> st.PresenterState:
    """Overlay persisted transforms/lock on a fresh initial state (version kept)."""
    if settings is None:
        return state
    transforms = dict(state.transforms)
    for element, body in settings["transforms"].items():
        if element not in transforms:
            continue  # layer removed since settings were written
        try:
            transforms[element] = st.ElementTransform(
                element,
                dx=float(body["dx"]), dy=float(body["dy"]),
                sx=float(body["sx"]), sy=float(body["sy"]),
            )
        except (KeyError, TypeError, ValueError) as exc:
            log.warning("ignoring bad transform for %s: %s", element, exc)
    locked = bool(settings.get("calibration_locked", False))
    return st.PresenterState(
        version=state.version,
        selected_layer=state.selected_layer,
        runtimes=state.runtimes,
        transforms=transforms,
        calibration_locked=locked,
    )


def persist_settings(state: st.PresenterState, project_root: Path | str) -> None:
    """Write transforms and the calibration lock beside the manifest, atomically."""
    root = Path(project_root)
    path = root / SETTINGS_NAME
    tmp = root / f".{SETTINGS_NAME}.tmp-{os.getpid()}"
    tmp.write_bytes(canonical_json_bytes(settings_to_dict(state)))
    os.replace(tmp, path)


class _Client:
    __slots__ = ("ws", "role", "name", "client_id")

    def __init__(self, ws: web.WebSocketResponse, role: str, name: str, client_id: str):
        self.ws = ws
        self.role = role
        self.name = name
        self.client_id = client_id


class PresenterService:
    """Authoritative state holder plus connection hub."""

    def __init__(self, project: LoadedProject, *, ui_dir: Path | None = None):
        self.project = project
        self.ui_dir = Path(ui_dir) if ui_dir else None
        self.state = apply_settings(st.initial_state(project), load_settings(project.root))
        self._clients: dict[str, _Client] = {}
        self._next_client_id = 0
        self._apply_lock = asyncio.Lock()
        self._manifest_bytes = encode_manifest(project.manifest)

    # -- state -------------------------------------------------------------

    def snapshot_dict(self) -> dict:
        return {"version": self.state.version, "state": st.state_to_dict(self.state, self.project)}

    def _snapshot_message(self) -> str:
        body = {"type": "snapshot"}
        body.update(self.snapshot_dict())
        return json.dumps(body, sort_keys=True, separators=(",", ":"))

    async def _apply_and_broadcast(self, client: _Client, event: st.StateEvent) -> None:
        """Single-writer section: validate, apply, persist, fan out."""
        async with self._apply_lock:
            try:
                if client.role != "controller":
                    raise st.EventRejected(st.READ_ONLY_ROLE, "display clients cannot send events")
                self.state = st.apply_event(self.state, event, self.project)
            except st.EventRejected as rejection:
                await self._send(client, json.dumps({
                    "type": "rejected",
                    "reason_code": rejection.reason_code,
                    "message": rejection.message,
                }, sort_keys=True, separators=(",", ":")))
                return
            if isinstance(event, st.LAYOUT_EVENT_TYPES):
                try:
                    persist_settings(self.state, self.project.root)
                except OSError as exc:
                    log.warning("could not persist settings: %s", exc)
            payload = self._snapshot_message()
            for other in list(self._clients.values()):
                await self._send(other, payload)

    async def _send(self, client: _Client, payload: str) -> None:
        try:
            await client.ws.send_str(payload)
        except (ConnectionError, RuntimeError):
            self._clients.pop(client.client_id, None)

    # -- handlers ------------------------------------------------------------

    async def handle_ws(self, request: web.Request) -> web.WebSocketResponse:
        ws = web.WebSocketResponse(heartbeat=30)
        await ws.prepare(request)

        hello = await ws.receive()
        client = None
        try:
            if hello.type != WSMsgType.TEXT:
                raise ValueError("expected a hello message")
            data = json.loads(hello.data)
            if data.get("type") != "hello" or data.get("role") not in ("controller", "display"):
                raise ValueError("first message must be hello with a valid role")
        except (ValueError, json.JSONDecodeError) as exc:
            log.info("rejecting client: %s", exc)
            await ws.close(code=1002, message=b"protocol error: bad hello")
            return ws

        self._next_client_id += 1
        client = _Client(ws, data["role"], str(data.get("client_name", "")),
                         f"c{self._next_client_id}")
        async with self._apply_lock:
            # Welcome under the lock so no broadcast can slip between the
            # snapshot we send and the client's registration.
            self._clients[client.client_id] = client
            await self._send(client, json.dumps({
                "type": "welcome",
                "client_id": client.client_id,
                "snapshot": self.snapshot_dict(),
            }, sort_keys=True, separators=(",", ":")))
        log.info("client %s joined (%s %s)", client.client_id, client.role, client.name)

        try:
            async for msg in ws:
                if msg.type != WSMsgType.TEXT:
                    continue
                try:
                    data = json.loads(msg.data)
                    kind = data.get("type")
                except (json.JSONDecodeError, AttributeError):
                    await ws.close(code=1002, message=b"protocol error: not JSON")
                    break
                if kind == "ping":
                    await self._send(client, '{"type":"pong"}')
                elif kind == "pong":
                    continue
                elif kind == "event":
                    try:
                        event = st.event_from_dict(data.get("event"))
                    except st.EventRejected as rejection:
                        await self._send(client, json.dumps({
                            "type": "rejected",
                            "reason_code": rejection.reason_code,
                            "message": rejection.message,
                        }, sort_keys=True, separators=(",", ":")))
                        continue
                    await self._apply_and_broadcast(client, event)
                else:
                    await self._send(client, json.dumps({
                        "type": "rejected",
                        "reason_code": st.MALFORMED_EVENT,
                        "message": f"unknown message type {kind!r}",
                    }, sort_keys=True, separators=(",", ":")))
        finally:
            self._clients.pop(client.client_id, None)
            log.info("client %s left", client.client_id)
        return ws

    async def handle_manifest(self, request: web.Request) -> web.Response:
        return web.Response(body=self._manifest_bytes, content_type="application/json")

    async def handle_state(self, request: web.Request) -> web.Response:
        return web.json_response(self.snapshot_dict())

    async def handle_health(self, request: web.Request) -> web.Response:
        return web.json_response({"status": "ok", "version": self.state.version})

    async def handle_asset(self, request: web.Request) -> web.Response:
        relpath = request.match_info["tail"]
        return self._serve_confined(self.project.root / "assets", relpath)

    async def handle_controller_page(self, request: web.Request) -> web.Response:
        return self._page(CONTROLLER_PAGE, "controller")

    async def handle_display_page(self, request: web.Request) -> web.Response:
        return self._page(DISPLAY_PAGE, "display")

    async def handle_ui_file(self, request: web.Request) -> web.Response:
        if self.ui_dir is None:
            raise web.HTTPNotFound()
        return self._serve_confined(self.ui_dir, request.match_info["tail"])

    def _page(self, name: str, role: str) -> web.Response:
        if self.ui_dir is not None:
            page = self.ui_dir / name
            if page.is_file():
                return web.Response(body=page.read_bytes(), content_type="text/html")
        return web.Response(text=_FALLBACK_PAGE.format(role=role), content_type="text/html")

    def _serve_confined(self, base: Path, relpath: str) -> web.Response:
        """Serve base/relpath only if it resolves inside base; 403 otherwise."""
        base_resolved = base.resolve()
        target = (base / relpath).resolve()
        if target != base_resolved and base_resolved not in target.parents:
            raise web.HTTPForbidden(reason="path escapes the served directory")
        if not target.is_file():
            raise web.HTTPNotFound()
        ctype = mimetypes.guess_type(target.name)[0] or "application/octet-stream"
        return web.Response(body=target.read_bytes(), content_type=ctype)

    # -- app ----------------------------------------------------------------

    def make_app(self) -> web.Application:
        app = web.Application(middlewares=[_asset_guard])
        app[SERVICE_KEY] = self
        app.add_routes([
            web.get("/", self.handle_controller_page),
            web.get("/display", self.handle_display_page),
            web.get("/healthz", self.handle_health),
            web.get("/api/project", self.handle_manifest),
            web.get("/api/state", self.handle_state),
            web.get("/assets/{tail:.+}", self.handle_asset),
            web.get("/ui/{tail:.+}", self.handle_ui_file),
            web.get("/ws", self.handle_ws),
        ])
        return app


SERVICE_KEY: web.AppKey["PresenterService"] = web.AppKey("service")


@web.middleware
async def _asset_guard(request: web.Request, handler):
    """Reject asset paths that escape the project before any routing quirks.

    Uses the raw request target so percent-encoded or dot-segment paths
    cannot be normalized into a different route first.
    """
    service = request.app[SERVICE_KEY]
    raw = urllib.parse.unquote(request.raw_path.split("?", 1)[0])
    if raw.startswith("/assets/"):
        base = (service.project.root / "assets").resolve()
        target = (service.project.root / "assets" / raw[len("/assets/"):]).resolve()
        if target != base and base not in target.parents:
            return web.Response(status=403, text="403: path escapes the served directory")
    return await handler(request)


def make_service(project_root: Path | str, *, ui_dir: Path | None = None) -> PresenterService:
    """Load and validate the project; raises SystemExit(1) printing the report if broken."""
    loaded = load_project(project_root)
    if isinstance(loaded, ValidationReport):
        for issue in loaded:
            print(f"{issue.severity.upper()} {issue.code} {issue.path}: {issue.message}",
                  file=sys.stderr)
        raise SystemExit(1)
    return PresenterService(loaded, ui_dir=ui_dir)


def parse_bind(bind: str) -> tuple[str, int]:
    host, sep, port = bind.rpartition(":")
    if not sep or not port.isdigit():
        raise ValueError(f"bind must look like host:port, got {bind!r}")
    return host or "127.0.0.1", int(port)


def serve(project_root: Path | str, bind: str = "127.0.0.1:8080",
          ui_dir: Path | None = None) -> None:
    """Run the presenter service until interrupted."""
    host, port = parse_bind(bind)
    service = make_service(project_root, ui_dir=ui_dir)
    log.info("serving %s on %s:%d", service.project.manifest.project.name, host, port)
    web.run_app(service.make_app(), host=host, port=port, print=None)


def main(argv: list[str] | None = None) -> None:
    parser = argparse.ArgumentParser(prog="makawalu-present", description=serve.__doc__)
    parser.add_argument("--project", required=True, help="project folder to present")
    parser.add_argument("--bind", default="127.0.0.1:8080", help="host:port to listen on")
    parser.add_argument("--ui", default=None, help="directory with built controller/display pages")
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    serve(args.project, args.bind, Path(args.ui) if args.ui else None)


if __name__ == "__main__":
    main()
