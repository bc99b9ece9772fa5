"""Domain model for layer-deck projects.

Pure value types for the project format (project info, basemap, data
layers, keyed sublayers) plus manifest-level validation and a total
order over time keys. No filesystem access happens here; serialization
and folder handling live in :mod:`makawalu.projectio`.

All types are immutable and safe to share across threads.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterator, Sequence

SCHEMA_VERSION = 1

_SLUG_RE = re.compile(r"^[a-z0-9]+(?:-[a-z0-9]+)*$")
_COLOR_RE = re.compile(r"^#[0-9A-F]{6}$")

# Severities for validation issues.
ERROR = "error"
WARNING = "warning"

# Stable issue codes. ORPHAN_ASSET is always a warning; the rest are errors.
MISSING_MANIFEST = "MISSING_MANIFEST"
BAD_JSON = "BAD_JSON"
SCHEMA_VIOLATION = "SCHEMA_VIOLATION"
NO_SUBLAYERS = "NO_SUBLAYERS"
DUPLICATE_TIME_KEY = "DUPLICATE_TIME_KEY"
DANGLING_PATH = "DANGLING_PATH"
PATH_ESCAPE = "PATH_ESCAPE"
UNSUPPORTED_IMAGE = "UNSUPPORTED_IMAGE"
DUPLICATE_LAYER_ID = "DUPLICATE_LAYER_ID"
ORPHAN_ASSET = "ORPHAN_ASSET"

ALL_ISSUE_CODES = frozenset({
    MISSING_MANIFEST,
    BAD_JSON,
    SCHEMA_VIOLATION,
    NO_SUBLAYERS,
    DUPLICATE_TIME_KEY,
    DANGLING_PATH,
    PATH_ESCAPE,
    UNSUPPORTED_IMAGE,
    DUPLICATE_LAYER_ID,
    ORPHAN_ASSET,
})


class TimeFormat(str, Enum):
    """How a layer's sublayers are keyed."""

    NONE = "none"
    MONTH = "month"
    YEAR = "year"
    YEAR_MONTH = "year_month"


@dataclass(frozen=True, slots=True)
class TimeKey:
    """One sublayer key; the populated fields depend on ``kind``.

    none       -> label
    month      -> month (1..12)
    year       -> year (1..9999)
    year_month -> year and month
    """

    kind: TimeFormat
    year: int | None = None
    month: int | None = None
    label: str | None = None

    @classmethod
    def of_label(cls, label: str) -> "TimeKey":
        return cls(TimeFormat.NONE, label=label)

    @classmethod
    def of_month(cls, month: int) -> "TimeKey":
        return cls(TimeFormat.MONTH, month=month)

    @classmethod
    def of_year(cls, year: int) -> "TimeKey":
        return cls(TimeFormat.YEAR, year=year)

    @classmethod
    def of_year_month(cls, year: int, month: int) -> "TimeKey":
        return cls(TimeFormat.YEAR_MONTH, year=year, month=month)


@dataclass(frozen=True, slots=True)
class ProjectInfo:
    name: str
    description: str = ""


@dataclass(frozen=True, slots=True)
class Basemap:
    name: str
    description: str
    image: str


@dataclass(frozen=True, slots=True)
class SubLayer:
    key: TimeKey
    display_label: str
    image: str


@dataclass(frozen=True, slots=True)
class DataLayer:
    id: str
    name: str
    description: str
    credit: str
    icon: str
    color: str
    time_format: TimeFormat
    sublayers: tuple[SubLayer, ...]

    @property
    def labels(self) -> tuple[str, ...]:
        """Declared sublayer labels, in declaration order (none-type layers)."""
        return tuple(s.key.label or "" for s in self.sublayers)


@dataclass(frozen=True, slots=True)
class ProjectManifest:
    project: ProjectInfo
    basemap: Basemap
    layers: tuple[DataLayer, ...]
    schema_version: int = SCHEMA_VERSION

    def layer(self, layer_id: str) -> DataLayer:
        for layer in self.layers:
            if layer.id == layer_id:
                return layer
        raise KeyError(layer_id)

    def layer_ids(self) -> tuple[str, ...]:
        return tuple(layer.id for layer in self.layers)


@dataclass(frozen=True, slots=True)
class ValidationIssue:
    severity: str
    code: str
    path: str
    message: str


@dataclass(frozen=True, slots=True)
class ValidationReport:
    issues: tuple[ValidationIssue, ...] = ()

    @property
    def ok(self) -> bool:
        """True iff no error-severity issues (warnings do not fail)."""
        return not any(i.severity == ERROR for i in self.issues)

    def errors(self) -> tuple[ValidationIssue, ...]:
        return tuple(i for i in self.issues if i.severity == ERROR)

    def warnings(self) -> tuple[ValidationIssue, ...]:
        return tuple(i for i in self.issues if i.severity == WARNING)

    def codes(self) -> tuple[str, ...]:
        return tuple(i.code for i in self.issues)

    def __iter__(self) -> Iterator[ValidationIssue]:
        return iter(self.issues)


def is_unsafe_relative_path(path: str) -> bool:
    """True if a manifest asset path is absolute or can traverse upward.

    Backslashes are rejected outright; manifest paths are forward-slash only.
    """
    if not path:
        return True
    if path.startswith("/") or "\\" in path:
        return True
    if re.match(r"^[A-Za-z]:", path):
        return True
    return ".." in path.split("/")


def compare_time_keys(
    a: TimeKey,
    b: TimeKey,
    label_order: Sequence[str] | None = None,
) -> int:
    """Total order over same-kind keys; returns -1, 0, or 1.

    year: numeric; month: calendar order; year_month: year then month.
    none-kind keys order by position in ``label_order`` (the owning
    layer's declared sublayer labels), so callers must supply it.

    Raises ValueError on mismatched kinds or a none-kind comparison
    without a usable label_order (contract violations).
    """
    if a.kind is not b.kind:
        raise ValueError(f"cannot compare {a.kind.value} key with {b.kind.value} key")
    if a.kind is TimeFormat.NONE:
        if label_order is None:
            raise ValueError("label_order is required to compare none-kind keys")
        try:
            ka: tuple = (list(label_order).index(a.label),)
            kb: tuple = (list(label_order).index(b.label),)
        except ValueError as exc:
            raise ValueError(f"label not in declared order: {exc}") from exc
    elif a.kind is TimeFormat.MONTH:
        ka, kb = (a.month,), (b.month,)
    elif a.kind is TimeFormat.YEAR:
        ka, kb = (a.year,), (b.year,)
    else:
        ka, kb = (a.year, a.month), (b.year, b.month)
    return (ka > kb) - (ka < kb)


def years_of(layer: DataLayer) -> list[int]:
    """Distinct years among the layer's keys, ascending."""
    if layer.time_format not in (TimeFormat.YEAR, TimeFormat.YEAR_MONTH):
        raise ValueError(f"years_of requires a year or year_month layer, got {layer.time_format.value}")
    return sorted({s.key.year for s in layer.sublayers if s.key.year is not None})


def months_of(layer: DataLayer, year: int | None = None) -> list[int]:
    """Distinct months present, ascending.

    For month-format layers ``year`` must be omitted; for year_month
    layers it selects the year whose months are listed (possibly empty).
    """
    if layer.time_format is TimeFormat.MONTH:
        if year is not None:
            raise ValueError("month-format layers take no year argument")
        return sorted({s.key.month for s in layer.sublayers if s.key.month is not None})
    if layer.time_format is TimeFormat.YEAR_MONTH:
        if year is None:
            raise ValueError("year_month layers require a year argument")
        return sorted({
            s.key.month
            for s in layer.sublayers
            if s.key.year == year and s.key.month is not None
        })
    raise ValueError(f"months_of requires a month or year_month layer, got {layer.time_format.value}")


def _key_fields_ok(key: TimeKey) -> str | None:
    """Return a problem description for out-of-range key fields, or None."""
    if key.kind is TimeFormat.NONE:
        if not key.label or not key.label.strip():
            return "label must be non-empty"
    if key.kind in (TimeFormat.MONTH, TimeFormat.YEAR_MONTH):
        if key.month is None or not 1 <= key.month <= 12:
            return "month must be in 1..12"
    if key.kind in (TimeFormat.YEAR, TimeFormat.YEAR_MONTH):
        if key.year is None or not 1 <= key.year <= 9999:
            return "year must be in 1..9999"
    return None


class _Issues:
    """Accumulates issues in deterministic (manifest) order."""

    def __init__(self) -> None:
        self.items: list[ValidationIssue] = []

    def error(self, code: str, path: str, message: str) -> None:
        self.items.append(ValidationIssue(ERROR, code, path, message))

    def warning(self, code: str, path: str, message: str) -> None:
        self.items.append(ValidationIssue(WARNING, code, path, message))

    def report(self) -> ValidationReport:
        return ValidationReport(tuple(self.items))


def _validate_asset_path(out: _Issues, path: str, where: str) -> None:
    if not path or not path.strip():
        out.error(SCHEMA_VIOLATION, where, "image path must be non-empty")
    elif is_unsafe_relative_path(path):
        out.error(PATH_ESCAPE, where, f"path must be relative with no traversal segments: {path!r}")


def _validate_layer(out: _Issues, layer: DataLayer, where: str) -> None:
    if not _SLUG_RE.match(layer.id or ""):
        out.error(SCHEMA_VIOLATION, f"{where}/id",
                  f"id must be a slug of lowercase alphanumerics and hyphens: {layer.id!r}")
    if not layer.name.strip():
        out.error(SCHEMA_VIOLATION, f"{where}/name", "layer name must be non-empty")
    if not _COLOR_RE.match(layer.color):
        out.error(SCHEMA_VIOLATION, f"{where}/color",
                  f"color must be canonical '#RRGGBB' uppercase hex: {layer.color!r}")
    _validate_asset_path(out, layer.icon, f"{where}/icon")

    if not layer.sublayers:
        out.error(NO_SUBLAYERS, f"{where}/sublayers",
                  f"layer {layer.id!r} has no sublayers; at least one is required")
        return

    seen: dict[tuple, int] = {}
    prev: SubLayer | None = None
    for j, sub in enumerate(layer.sublayers):
        sub_where = f"{where}/sublayers/{j}"
        if sub.key.kind is not layer.time_format:
            out.error(SCHEMA_VIOLATION, f"{sub_where}/key",
                      f"key kind {sub.key.kind.value!r} does not match layer time_format "
                      f"{layer.time_format.value!r}")
            prev = None
            continue
        problem = _key_fields_ok(sub.key)
        if problem is not None:
            out.error(SCHEMA_VIOLATION, f"{sub_where}/key", problem)
            prev = None
            continue
        if not sub.display_label.strip():
            out.error(SCHEMA_VIOLATION, f"{sub_where}/display_label", "display_label must be non-empty")
        _validate_asset_path(out, sub.image, f"{sub_where}/image")

        ident = (sub.key.year, sub.key.month, sub.key.label)
        if ident in seen:
            out.error(DUPLICATE_TIME_KEY, f"{sub_where}/key",
                      f"duplicate key (first at sublayer {seen[ident]})")
        else:
            seen[ident] = j
            if prev is not None and layer.time_format is not TimeFormat.NONE:
                if compare_time_keys(prev.key, sub.key) > 0:
                    out.error(SCHEMA_VIOLATION, f"{sub_where}/key",
                              "sublayers must be stored in ascending key order")
        prev = sub


def validate_manifest(manifest: ProjectManifest) -> ValidationReport:
    """Check every structural invariant; violations become report entries.

    Issue order is deterministic and follows manifest order. File-level
    checks (existence, image decodability) are deep validation and live
    in projectio.
    """
    out = _Issues()
    if manifest.schema_version != SCHEMA_VERSION:
        out.error(SCHEMA_VIOLATION, "schema_version",
                  f"schema_version must be {SCHEMA_VERSION}, got {manifest.schema_version}")
    if not manifest.project.name.strip():
        out.error(SCHEMA_VIOLATION, "project/name", "project name must be non-empty")
    if not manifest.basemap.name.strip():
        out.error(SCHEMA_VIOLATION, "basemap/name", "basemap name must be non-empty")
    _validate_asset_path(out, manifest.basemap.image, "basemap/image")

    seen_ids: dict[str, int] = {}
    for i, layer in enumerate(manifest.layers):
        where = f"layers/{i}"
        if layer.id in seen_ids:
            out.error(DUPLICATE_LAYER_ID, f"{where}/id",
                      f"layer id {layer.id!r} already used at layers/{seen_ids[layer.id]}")
        else:
            seen_ids[layer.id] = i
        _validate_layer(out, layer, where)
    return out.report()


def referenced_paths(manifest: ProjectManifest) -> list[str]:
    """Every asset path the manifest references, in manifest order, deduplicated."""
    seen: dict[str, None] = {}
    seen[manifest.basemap.image] = None
    for layer in manifest.layers:
        seen.setdefault(layer.icon, None)
        for sub in layer.sublayers:
            seen.setdefault(sub.image, None)
    return list(seen)
