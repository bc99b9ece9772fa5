"""Project folders on disk.

Layout (fixed):

    <root>/project.json              canonical manifest
    <root>/assets/basemap/           basemap raster
    <root>/assets/icons/             layer icons
    <root>/assets/layers/<id>/       keyed sublayer rasters

The manifest encoding is canonical (sorted keys, 2-space indent, UTF-8,
trailing newline) so round trips are byte-exact. Deep validation never
stops at the first problem; it returns the full report in one pass.
"""

from __future__ import annotations

import json
import os
import shutil
import uuid
import zipfile
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Mapping

from . import pngio
from .model import (
    BAD_JSON,
    DANGLING_PATH,
    ERROR,
    MISSING_MANIFEST,
    ORPHAN_ASSET,
    PATH_ESCAPE,
    SCHEMA_VIOLATION,
    UNSUPPORTED_IMAGE,
    WARNING,
    Basemap,
    DataLayer,
    ProjectInfo,
    ProjectManifest,
    SubLayer,
    TimeFormat,
    TimeKey,
    ValidationIssue,
    ValidationReport,
    is_unsafe_relative_path,
    referenced_paths,
    validate_manifest,
)

MANIFEST_NAME = "project.json"
SETTINGS_NAME = "presenter_settings.json"

# Pinned timestamp for zip entries: archives of identical trees are identical.
_ZIP_DATE_TIME = (1980, 1, 1, 0, 0, 0)


class ManifestDecodeError(ValueError):
    """Manifest JSON is well-formed but does not have the expected shape."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path
        self.message = message


class StagedAssetMissing(ValueError):
    """save_project precondition: staged assets must cover the manifest."""

    def __init__(self, path: str):
        super().__init__(f"manifest references {path!r} but it was not staged")
        self.path = path


class DestinationNotEmpty(ValueError):
    pass


class ProjectRefused(ValueError):
    """An operation refused to run because validation failed."""

    def __init__(self, message: str, report: ValidationReport):
        super().__init__(message)
        self.report = report


class UnsafeArchiveError(ValueError):
    """Archive contains entries that would escape the destination."""

    code = PATH_ESCAPE

    def __init__(self, entries: list[str]):
        super().__init__("unsafe archive entries: " + ", ".join(entries))
        self.entries = entries


@dataclass(frozen=True, slots=True)
class AssetInfo:
    size: int
    width: int
    height: int


@dataclass(frozen=True, slots=True)
class LoadedProject:
    root: Path
    manifest: ProjectManifest
    asset_index: dict[str, AssetInfo]

    def asset_path(self, relpath: str) -> Path:
        return self.root / relpath


# ---------------------------------------------------------------------------
# Canonical JSON codec
# ---------------------------------------------------------------------------

def canonical_json_bytes(value: Any) -> bytes:
    """Sorted-key, 2-space indented, UTF-8, newline-terminated JSON."""
    return (json.dumps(value, ensure_ascii=False, indent=2, sort_keys=True) + "\n").encode("utf-8")


def key_to_dict(key: TimeKey) -> dict[str, Any]:
    if key.kind is TimeFormat.NONE:
        return {"label": key.label}
    if key.kind is TimeFormat.MONTH:
        return {"month": key.month}
    if key.kind is TimeFormat.YEAR:
        return {"year": key.year}
    return {"year": key.year, "month": key.month}


def manifest_to_dict(manifest: ProjectManifest) -> dict[str, Any]:
    return {
        "schema_version": manifest.schema_version,
        "project": {
            "name": manifest.project.name,
            "description": manifest.project.description,
        },
        "basemap": {
            "name": manifest.basemap.name,
            "description": manifest.basemap.description,
            "image": manifest.basemap.image,
        },
        "layers": [
            {
                "id": layer.id,
                "name": layer.name,
                "description": layer.description,
                "credit": layer.credit,
                "icon": layer.icon,
                "color": layer.color,
                "time_format": layer.time_format.value,
                "sublayers": [
                    {
                        "key": key_to_dict(sub.key),
                        "display_label": sub.display_label,
                        "image": sub.image,
                    }
                    for sub in layer.sublayers
                ],
            }
            for layer in manifest.layers
        ],
    }


def encode_manifest(manifest: ProjectManifest) -> bytes:
    return canonical_json_bytes(manifest_to_dict(manifest))


def _expect(data: Any, keys: set[str], where: str) -> None:
    if not isinstance(data, dict):
        raise ManifestDecodeError(where, f"expected an object, got {type(data).__name__}")
    missing = keys - set(data)
    extra = set(data) - keys
    if missing:
        raise ManifestDecodeError(where, f"missing fields: {', '.join(sorted(missing))}")
    if extra:
        raise ManifestDecodeError(where, f"unknown fields: {', '.join(sorted(extra))}")


def _string(data: dict, field: str, where: str) -> str:
    value = data[field]
    if not isinstance(value, str):
        raise ManifestDecodeError(f"{where}/{field}", f"expected a string, got {type(value).__name__}")
    return value


def _integer(data: dict, field: str, where: str) -> int:
    value = data[field]
    if isinstance(value, bool) or not isinstance(value, int):
        raise ManifestDecodeError(f"{where}/{field}", f"expected an integer, got {type(value).__name__}")
    return value


def key_from_dict(data: Any, where: str) -> TimeKey:
    if not isinstance(data, dict):
        raise ManifestDecodeError(where, f"expected a key object, got {type(data).__name__}")
    fields = set(data)
    if fields == {"label"}:
        return TimeKey.of_label(_string(data, "label", where))
    if fields == {"month"}:
        return TimeKey.of_month(_integer(data, "month", where))
    if fields == {"year"}:
        return TimeKey.of_year(_integer(data, "year", where))
    if fields == {"year", "month"}:
        return TimeKey.of_year_month(_integer(data, "year", where), _integer(data, "month", where))
    raise ManifestDecodeError(where, f"unrecognized key shape: {{{', '.join(sorted(map(str, fields)))}}}")


def _sublayer_from_dict(data: Any, where: str) -> SubLayer:
    _expect(data, {"key", "display_label", "image"}, where)
    return SubLayer(
        key=key_from_dict(data["key"], f"{where}/key"),
        display_label=_string(data, "display_label", where),
        image=_string(data, "image", where),
    )


def _layer_from_dict(data: Any, where: str) -> DataLayer:
    _expect(data, {"id", "name", "description", "credit", "icon", "color", "time_format", "sublayers"}, where)
    fmt_raw = _string(data, "time_format", where)
    try:
        fmt = TimeFormat(fmt_raw)
    except ValueError:
        raise ManifestDecodeError(f"{where}/time_format", f"unknown time_format {fmt_raw!r}") from None
    subs_raw = data["sublayers"]
    if not isinstance(subs_raw, list):
        raise ManifestDecodeError(f"{where}/sublayers", "expected a list")
    return DataLayer(
        id=_string(data, "id", where),
        name=_string(data, "name", where),
        description=_string(data, "description", where),
        credit=_string(data, "credit", where),
        icon=_string(data, "icon", where),
        color=_string(data, "color", where),
        time_format=fmt,
        sublayers=tuple(
            _sublayer_from_dict(s, f"{where}/sublayers/{j}") for j, s in enumerate(subs_raw)
        ),
    )


def manifest_from_dict(data: Any) -> ProjectManifest:
    """Strict structural decode; field values are checked by validate_manifest."""
    _expect(data, {"schema_version", "project", "basemap", "layers"}, "")
    version = data["schema_version"]
    if isinstance(version, bool) or not isinstance(version, int):
        raise ManifestDecodeError("schema_version", "expected an integer")
    _expect(data["project"], {"name", "description"}, "project")
    _expect(data["basemap"], {"name", "description", "image"}, "basemap")
    layers_raw = data["layers"]
    if not isinstance(layers_raw, list):
        raise ManifestDecodeError("layers", "expected a list")
    return ProjectManifest(
        schema_version=version,
        project=ProjectInfo(
            name=_string(data["project"], "name", "project"),
            description=_string(data["project"], "description", "project"),
        ),
        basemap=Basemap(
            name=_string(data["basemap"], "name", "basemap"),
            description=_string(data["basemap"], "description", "basemap"),
            image=_string(data["basemap"], "image", "basemap"),
        ),
        layers=tuple(_layer_from_dict(l, f"layers/{i}") for i, l in enumerate(layers_raw)),
    )


def decode_manifest(data: bytes) -> ProjectManifest:
    return manifest_from_dict(json.loads(data.decode("utf-8")))


# ---------------------------------------------------------------------------
# Deep validation and loading
# ---------------------------------------------------------------------------

def _resolves_inside(root: Path, relpath: str) -> bool:
    """True if root/relpath resolves (symlinks included) inside root."""
    resolved = (root / relpath).resolve()
    root_resolved = root.resolve()
    return resolved == root_resolved or root_resolved in resolved.parents


def _validate_tree(root: Path) -> tuple[ValidationReport, ProjectManifest | None, dict[str, AssetInfo]]:
    root = Path(root)
    if not root.is_dir():
        raise FileNotFoundError(f"project root is not a readable directory: {root}")

    issues: list[ValidationIssue] = []
    manifest_path = root / MANIFEST_NAME
    if not manifest_path.is_file():
        issues.append(ValidationIssue(ERROR, MISSING_MANIFEST, MANIFEST_NAME,
                                      f"{MANIFEST_NAME} not found in project folder"))
        return ValidationReport(tuple(issues)), None, {}

    raw = manifest_path.read_bytes()
    try:
        data = json.loads(raw.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        issues.append(ValidationIssue(ERROR, BAD_JSON, MANIFEST_NAME, f"manifest is not valid JSON: {exc}"))
        return ValidationReport(tuple(issues)), None, {}

    try:
        manifest = manifest_from_dict(data)
    except ManifestDecodeError as exc:
        issues.append(ValidationIssue(ERROR, SCHEMA_VIOLATION, exc.path or MANIFEST_NAME, exc.message))
        return ValidationReport(tuple(issues)), None, {}

    issues.extend(validate_manifest(manifest).issues)

    asset_index: dict[str, AssetInfo] = {}
    for relpath in referenced_paths(manifest):
        if not relpath or is_unsafe_relative_path(relpath):
            continue  # already reported by validate_manifest
        if not _resolves_inside(root, relpath):
            issues.append(ValidationIssue(ERROR, PATH_ESCAPE, relpath,
                                          "path resolves outside the project folder"))
            continue
        target = root / relpath
        if not target.is_file():
            issues.append(ValidationIssue(ERROR, DANGLING_PATH, relpath, "referenced file does not exist"))
            continue
        data_bytes = target.read_bytes()
        try:
            width, height = pngio.probe_image(data_bytes, source=relpath)
        except pngio.UnsupportedImageError as exc:
            issues.append(ValidationIssue(ERROR, UNSUPPORTED_IMAGE, relpath, str(exc)))
            continue
        asset_index[relpath] = AssetInfo(size=len(data_bytes), width=width, height=height)

    referenced = set(referenced_paths(manifest))
    assets_dir = root / "assets"
    if assets_dir.is_dir():
        found = sorted(
            p.relative_to(root).as_posix()
            for p in assets_dir.rglob("*")
            if p.is_file()
        )
        for relpath in found:
            if relpath not in referenced:
                issues.append(ValidationIssue(WARNING, ORPHAN_ASSET, relpath,
                                              "asset file is not referenced by the manifest"))

    return ValidationReport(tuple(issues)), manifest, asset_index


def deep_validate(root: Path | str) -> ValidationReport:
    """Full one-pass check: manifest presence, JSON, schema, files, images, orphans."""
    report, _manifest, _index = _validate_tree(Path(root))
    return report


def load_project(root: Path | str) -> LoadedProject | ValidationReport:
    """Load a project folder; returns the ValidationReport instead on any error."""
    root = Path(root)
    report, manifest, asset_index = _validate_tree(root)
    if not report.ok or manifest is None:
        return report
    return LoadedProject(root=root, manifest=manifest, asset_index=asset_index)


# ---------------------------------------------------------------------------
# Saving
# ---------------------------------------------------------------------------

def save_project(
    manifest: ProjectManifest,
    staged_assets: Mapping[str, bytes],
    dest: Path | str,
) -> LoadedProject:
    """Write a canonical project folder atomically (temp dir + rename).

    Refuses a non-empty destination and refuses to leave behind a folder
    that fails deep validation.
    """
    dest = Path(dest)
    for relpath in referenced_paths(manifest):
        if relpath not in staged_assets:
            raise StagedAssetMissing(relpath)
    if dest.exists():
        if not dest.is_dir() or any(dest.iterdir()):
            raise DestinationNotEmpty(f"destination exists and is not an empty directory: {dest}")

    dest.parent.mkdir(parents=True, exist_ok=True)
    tmp = dest.parent / f".{dest.name}.tmp-{uuid.uuid4().hex[:8]}"
    tmp.mkdir()
    try:
        (tmp / MANIFEST_NAME).write_bytes(encode_manifest(manifest))
        for relpath, data in staged_assets.items():
            if is_unsafe_relative_path(relpath):
                raise ValueError(f"staged asset path is unsafe: {relpath!r}")
            target = tmp / relpath
            target.parent.mkdir(parents=True, exist_ok=True)
            target.write_bytes(data)
        report = deep_validate(tmp)
        if not report.ok:
            raise ProjectRefused("saved project would not validate", report)
        os.rename(tmp, dest)
    except BaseException:
        shutil.rmtree(tmp, ignore_errors=True)
        raise
    loaded = load_project(dest)
    assert isinstance(loaded, LoadedProject)
    return loaded


# ---------------------------------------------------------------------------
# Zip sharing
# ---------------------------------------------------------------------------

def pack(root: Path | str, out: Path | str) -> Path:
    """Zip a valid project folder; entries are root-relative, forward slashes."""
    root = Path(root)
    out = Path(out)
    report = deep_validate(root)
    if not report.ok:
        raise ProjectRefused("refusing to pack an invalid project", report)
    files = sorted(
        p.relative_to(root).as_posix()
        for p in root.rglob("*")
        if p.is_file()
    )
    out.parent.mkdir(parents=True, exist_ok=True)
    with zipfile.ZipFile(out, "w", compression=zipfile.ZIP_DEFLATED) as zf:
        for relpath in files:
            info = zipfile.ZipInfo(relpath, date_time=_ZIP_DATE_TIME)
            info.compress_type = zipfile.ZIP_DEFLATED
            info.external_attr = 0o644 << 16
            zf.writestr(info, (root / relpath).read_bytes())
    return out


def _unsafe_entry(name: str) -> bool:
    if not name or name.startswith("/") or "\\" in name:
        return True
    if name.startswith(("../",)) or ".." in name.split("/"):
        return True
    # Windows drive prefixes (C:...) never belong in a shared archive.
    return bool(len(name) >= 2 and name[1] == ":")


def unpack(archive: Path | str, dest: Path | str) -> Path:
    """Extract a project archive safely; on any unsafe entry nothing is written."""
    archive = Path(archive)
    dest = Path(dest)
    if dest.exists() and (not dest.is_dir() or any(dest.iterdir())):
        raise DestinationNotEmpty(f"destination exists and is not an empty directory: {dest}")

    with zipfile.ZipFile(archive, "r") as zf:
        names = zf.namelist()
        bad = [n for n in names if _unsafe_entry(n)]
        if bad:
            raise UnsafeArchiveError(bad)
        dest.mkdir(parents=True, exist_ok=True)
        dest_resolved = dest.resolve()
        for info in zf.infolist():
            if info.is_dir():
                continue
            target = dest / info.filename
            if dest_resolved not in target.resolve().parents:
                raise UnsafeArchiveError([info.filename])
            target.parent.mkdir(parents=True, exist_ok=True)
            target.write_bytes(zf.read(info))
    return dest
