"""Authoring operations behind the CLI.

Everything here edits manifests canonically: the same logical result
always produces byte-identical project.json, regardless of the order
edits happened in. Asset files are copied into the fixed folder layout
and named after the key they carry, never after their source file.
"""

from __future__ import annotations

import calendar
import re
from pathlib import Path

from . import pngio
from .model import (
    Basemap,
    DataLayer,
    ProjectInfo,
    ProjectManifest,
    SubLayer,
    TimeFormat,
    TimeKey,
    compare_time_keys,
    validate_manifest,
)
from .projectio import (
    MANIFEST_NAME,
    DestinationNotEmpty,
    decode_manifest,
    encode_manifest,
    save_project,
)


class AuthoringError(ValueError):
    pass


def slugify(name: str) -> str:
    slug = re.sub(r"[^a-z0-9]+", "-", name.lower()).strip("-")
    return slug or "layer"


def unique_slug(name: str, taken: set[str]) -> str:
    base = slugify(name)
    slug = base
    n = 2
    while slug in taken:
        slug = f"{base}-{n}"
        n += 1
    return slug


def normalize_color(color: str) -> str:
    """Canonicalize '#rrggbb' to uppercase; raises AuthoringError if malformed."""
    color = color.strip()
    if not re.fullmatch(r"#[0-9a-fA-F]{6}", color):
        raise AuthoringError(f"color must look like '#RRGGBB', got {color!r}")
    return color.upper()


def month_name(month: int) -> str:
    return calendar.month_name[month]


def default_display_label(key: TimeKey) -> str:
    if key.kind is TimeFormat.NONE:
        return key.label or ""
    if key.kind is TimeFormat.MONTH:
        return month_name(key.month or 1)
    if key.kind is TimeFormat.YEAR:
        return str(key.year)
    return f"{month_name(key.month or 1)} {key.year}"


def key_asset_stem(key: TimeKey) -> str:
    """Stable file stem for a sublayer image, derived from its key."""
    if key.kind is TimeFormat.NONE:
        return slugify(key.label or "")
    if key.kind is TimeFormat.MONTH:
        return f"M{key.month:02d}"
    if key.kind is TimeFormat.YEAR:
        return f"{key.year:04d}"
    return f"{key.year:04d}-{key.month:02d}"


def _read_raster(source: Path, what: str) -> tuple[bytes, str]:
    """Read and sanity-check a source image; returns (bytes, extension)."""
    if not source.is_file():
        raise AuthoringError(f"{what} image does not exist: {source}")
    data = source.read_bytes()
    try:
        pngio.probe_image(data, source=str(source))
    except pngio.UnsupportedImageError as exc:
        raise AuthoringError(str(exc)) from exc
    ext = source.suffix.lower()
    return data, (ext if ext in (".png", ".jpg", ".jpeg") else ".png")


def _load_manifest(root: Path) -> ProjectManifest:
    path = root / MANIFEST_NAME
    if not path.is_file():
        raise AuthoringError(f"no {MANIFEST_NAME} in {root}")
    return decode_manifest(path.read_bytes())


def _write_manifest(root: Path, manifest: ProjectManifest) -> None:
    (root / MANIFEST_NAME).write_bytes(encode_manifest(manifest))


def scaffold_project(dest: Path, name: str, description: str = "") -> Path:
    """Create a valid project with a placeholder basemap and no layers."""
    if not name.strip():
        raise AuthoringError("project name must be non-empty")
    manifest = ProjectManifest(
        project=ProjectInfo(name=name, description=description),
        basemap=Basemap(name="Placeholder basemap",
                        description="Replace with set-basemap.",
                        image="assets/basemap/placeholder.png"),
        layers=(),
    )
    try:
        save_project(manifest, {"assets/basemap/placeholder.png": pngio.placeholder_basemap_png()}, dest)
    except DestinationNotEmpty:
        raise AuthoringError(f"destination exists and is not empty: {dest}") from None
    return dest


def set_basemap(root: Path, name: str, description: str, image: Path) -> ProjectManifest:
    if not name.strip():
        raise AuthoringError("basemap name must be non-empty")
    manifest = _load_manifest(root)
    data, ext = _read_raster(image, "basemap")
    relpath = f"assets/basemap/{slugify(name)}{ext}"
    old = manifest.basemap.image
    manifest = ProjectManifest(
        project=manifest.project,
        basemap=Basemap(name=name, description=description, image=relpath),
        layers=manifest.layers,
        schema_version=manifest.schema_version,
    )
    target = root / relpath
    target.parent.mkdir(parents=True, exist_ok=True)
    target.write_bytes(data)
    _write_manifest(root, manifest)
    if old != relpath:
        stale = root / old
        if stale.is_file():
            stale.unlink()
    return manifest


def add_layer(
    root: Path,
    layer_id: str | None,
    name: str,
    description: str = "",
    credit: str = "",
    icon: Path | None = None,
    color: str = "#FFFFFF",
    time_format: TimeFormat = TimeFormat.NONE,
) -> DataLayer:
    """Append a layer (without sublayers; the project validates once one is added)."""
    manifest = _load_manifest(root)
    if not name.strip():
        raise AuthoringError("layer name must be non-empty")
    taken = set(manifest.layer_ids())
    layer_id = layer_id or unique_slug(name, taken)
    if layer_id in taken:
        raise AuthoringError(f"layer id {layer_id!r} already exists")
    if not re.fullmatch(r"[a-z0-9]+(?:-[a-z0-9]+)*", layer_id):
        raise AuthoringError(f"layer id must be a lowercase slug, got {layer_id!r}")

    if icon is not None:
        data, ext = _read_raster(icon, "icon")
    else:
        data, ext = pngio.default_icon_png(), ".png"
    icon_rel = f"assets/icons/{layer_id}{ext}"

    layer = DataLayer(
        id=layer_id,
        name=name,
        description=description,
        credit=credit,
        icon=icon_rel,
        color=normalize_color(color),
        time_format=time_format,
        sublayers=(),
    )
    target = root / icon_rel
    target.parent.mkdir(parents=True, exist_ok=True)
    target.write_bytes(data)
    _write_manifest(root, ProjectManifest(
        project=manifest.project,
        basemap=manifest.basemap,
        layers=manifest.layers + (layer,),
        schema_version=manifest.schema_version,
    ))
    return layer


def _insert_sorted(layer: DataLayer, sub: SubLayer) -> tuple[SubLayer, ...]:
    if layer.time_format is TimeFormat.NONE:
        return layer.sublayers + (sub,)
    subs = list(layer.sublayers)
    at = len(subs)
    for i, existing in enumerate(subs):
        if compare_time_keys(sub.key, existing.key) < 0:
            at = i
            break
    subs.insert(at, sub)
    return tuple(subs)


def add_sublayer(
    root: Path,
    layer_id: str,
    key: TimeKey,
    image: Path,
    display_label: str | None = None,
) -> SubLayer:
    """Insert one keyed image; refuses duplicates before anything is copied."""
    manifest = _load_manifest(root)
    try:
        layer = manifest.layer(layer_id)
    except KeyError:
        raise AuthoringError(f"no layer with id {layer_id!r}") from None
    if key.kind is not layer.time_format:
        raise AuthoringError(
            f"layer {layer_id!r} is {layer.time_format.value}-keyed; got a {key.kind.value} key")
    for existing in layer.sublayers:
        if existing.key == key:
            raise AuthoringError(f"layer {layer_id!r} already has key {key_asset_stem(key)!r}")

    data, ext = _read_raster(image, "sublayer")
    relpath = f"assets/layers/{layer_id}/{key_asset_stem(key)}{ext}"
    if (root / relpath).exists():
        raise AuthoringError(f"asset already exists: {relpath}")

    sub = SubLayer(key=key, display_label=display_label or default_display_label(key), image=relpath)
    new_layer = DataLayer(
        id=layer.id, name=layer.name, description=layer.description, credit=layer.credit,
        icon=layer.icon, color=layer.color, time_format=layer.time_format,
        sublayers=_insert_sorted(layer, sub),
    )
    layers = tuple(new_layer if l.id == layer_id else l for l in manifest.layers)
    updated = ProjectManifest(project=manifest.project, basemap=manifest.basemap,
                              layers=layers, schema_version=manifest.schema_version)

    report = validate_manifest(updated)
    if not report.ok:
        problems = "; ".join(f"{i.code} at {i.path}" for i in report.errors())
        raise AuthoringError(f"edit would break the manifest: {problems}")

    target = root / relpath
    target.parent.mkdir(parents=True, exist_ok=True)
    target.write_bytes(data)
    _write_manifest(root, updated)
    return sub
