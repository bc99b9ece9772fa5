"""Presenter runtime state.

Immutable state snapshots, events that transition between them, and the
resolution of a snapshot into the ordered draw list the projection
surface must show. Transitions are pure: the owning service applies
events in a single total order; rejected events change nothing.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, replace
from typing import Any, Mapping, Union

from .model import DataLayer, TimeFormat, months_of, years_of
from .projectio import LoadedProject

BASEMAP_ELEMENT = "basemap"

# Rejection reason codes carried over the wire.
UNKNOWN_LAYER = "unknown_layer"
WRONG_TIME_FORMAT = "wrong_time_format"
INDEX_OUT_OF_RANGE = "index_out_of_range"
UNKNOWN_TIME_KEY = "unknown_time_key"
CALIBRATION_LOCKED = "calibration_locked"
UNKNOWN_ELEMENT = "unknown_element"
INVALID_TRANSFORM = "invalid_transform"
INVALID_VALUE = "invalid_value"
READ_ONLY_ROLE = "read_only_role"
MALFORMED_EVENT = "malformed_event"


class EventRejected(Exception):
    """An event could not be applied; the state is unchanged."""

    def __init__(self, reason_code: str, message: str):
        super().__init__(f"{reason_code}: {message}")
        self.reason_code = reason_code
        self.message = message


@dataclass(frozen=True, slots=True)
class ElementTransform:
    """Move/resize calibration for one projected element.

    dx/dy are fractions of canvas width/height; sx/sy scale about the
    canvas center, so controller and projection surfaces of different
    resolutions agree.
    """

    element_id: str
    dx: float = 0.0
    dy: float = 0.0
    sx: float = 1.0
    sy: float = 1.0

    @property
    def is_identity(self) -> bool:
        return self.dx == 0.0 and self.dy == 0.0 and self.sx == 1.0 and self.sy == 1.0


def identity_transform(element_id: str) -> ElementTransform:
    return ElementTransform(element_id)


def layer_element_id(layer_id: str) -> str:
    return f"layer:{layer_id}"


@dataclass(frozen=True, slots=True)
class LayerRuntime:
    """Per-layer runtime: visibility, opacity, and the mode-specific cursor."""

    visible: bool = False
    opacity: float = 1.0
    year: int | None = None
    month: int | None = None
    active: frozenset[int] = frozenset()


@dataclass(frozen=True, slots=True)
class PresenterState:
    version: int
    selected_layer: str | None
    runtimes: Mapping[str, LayerRuntime]
    transforms: Mapping[str, ElementTransform]
    calibration_locked: bool = False


# Events -------------------------------------------------------------------

@dataclass(frozen=True, slots=True)
class SelectLayer:
    id: str


@dataclass(frozen=True, slots=True)
class SetLayerVisible:
    id: str
    visible: bool


@dataclass(frozen=True, slots=True)
class ToggleSublayer:
    id: str
    index: int


@dataclass(frozen=True, slots=True)
class SetMonth:
    id: str
    month: int


@dataclass(frozen=True, slots=True)
class SetYear:
    id: str
    year: int


@dataclass(frozen=True, slots=True)
class SetOpacity:
    id: str
    value: float


@dataclass(frozen=True, slots=True)
class SetTransform:
    transform: ElementTransform


@dataclass(frozen=True, slots=True)
class ResetLayout:
    pass


@dataclass(frozen=True, slots=True)
class SetCalibrationLocked:
    flag: bool


StateEvent = Union[
    SelectLayer,
    SetLayerVisible,
    ToggleSublayer,
    SetMonth,
    SetYear,
    SetOpacity,
    SetTransform,
    ResetLayout,
    SetCalibrationLocked,
]

# Events that change calibration/layout and therefore trigger settings persistence.
LAYOUT_EVENT_TYPES = (SetTransform, ResetLayout, SetCalibrationLocked)


@dataclass(frozen=True, slots=True)
class DrawEntry:
    image: str
    opacity: float
    transform: ElementTransform


DrawList = list[DrawEntry]


# ---------------------------------------------------------------------------
# State construction and transitions
# ---------------------------------------------------------------------------

def _initial_runtime(layer: DataLayer) -> LayerRuntime:
    if layer.time_format is TimeFormat.MONTH:
        return LayerRuntime(month=months_of(layer)[0])
    if layer.time_format is TimeFormat.YEAR:
        return LayerRuntime(year=years_of(layer)[0])
    if layer.time_format is TimeFormat.YEAR_MONTH:
        first_year = years_of(layer)[0]
        return LayerRuntime(year=first_year, month=months_of(layer, first_year)[0])
    return LayerRuntime()


def _identity_transforms(project: LoadedProject) -> dict[str, ElementTransform]:
    transforms = {BASEMAP_ELEMENT: identity_transform(BASEMAP_ELEMENT)}
    for layer in project.manifest.layers:
        element = layer_element_id(layer.id)
        transforms[element] = identity_transform(element)
    return transforms


def initial_state(project: LoadedProject) -> PresenterState:
    """Version 0: nothing selected or visible, earliest time keys preselected."""
    runtimes = {layer.id: _initial_runtime(layer) for layer in project.manifest.layers}
    return PresenterState(
        version=0,
        selected_layer=None,
        runtimes=runtimes,
        transforms=_identity_transforms(project),
        calibration_locked=False,
    )


def _require_layer(project: LoadedProject, layer_id: str) -> DataLayer:
    try:
        return project.manifest.layer(layer_id)
    except KeyError:
        raise EventRejected(UNKNOWN_LAYER, f"no layer with id {layer_id!r}") from None


def _with_runtime(state: PresenterState, layer_id: str, runtime: LayerRuntime) -> dict[str, LayerRuntime]:
    runtimes = dict(state.runtimes)
    runtimes[layer_id] = runtime
    return runtimes


def apply_event(state: PresenterState, event: StateEvent, project: LoadedProject) -> PresenterState:
    """Apply one event, returning the successor state (version + 1).

    Raises EventRejected for anything inconsistent with the manifest or
    the calibration lock; rejection leaves the input state untouched.
    """
    if isinstance(event, SelectLayer):
        layer = _require_layer(project, event.id)
        runtime = state.runtimes[layer.id]
        if state.selected_layer == event.id:
            # Second tap on the selected layer toggles it off (and back on)
            # while keeping it selected for the info panels.
            runtime = replace(runtime, visible=not runtime.visible)
        else:
            runtime = replace(runtime, visible=True)
        return replace(state, version=state.version + 1, selected_layer=event.id,
                       runtimes=_with_runtime(state, event.id, runtime))

    if isinstance(event, SetLayerVisible):
        layer = _require_layer(project, event.id)
        runtime = replace(state.runtimes[layer.id], visible=bool(event.visible))
        return replace(state, version=state.version + 1,
                       runtimes=_with_runtime(state, event.id, runtime))

    if isinstance(event, ToggleSublayer):
        layer = _require_layer(project, event.id)
        if layer.time_format is not TimeFormat.NONE:
            raise EventRejected(WRONG_TIME_FORMAT,
                                f"toggle_sublayer applies to none-format layers, not {layer.time_format.value}")
        if not 0 <= event.index < len(layer.sublayers):
            raise EventRejected(INDEX_OUT_OF_RANGE,
                                f"sublayer index {event.index} out of range for {layer.id!r}")
        runtime = state.runtimes[layer.id]
        active = set(runtime.active)
        active.symmetric_difference_update({event.index})
        runtime = replace(runtime, active=frozenset(active))
        return replace(state, version=state.version + 1,
                       runtimes=_with_runtime(state, event.id, runtime))

    if isinstance(event, SetMonth):
        layer = _require_layer(project, event.id)
        runtime = state.runtimes[layer.id]
        if layer.time_format is TimeFormat.MONTH:
            if event.month not in months_of(layer):
                raise EventRejected(UNKNOWN_TIME_KEY, f"layer {layer.id!r} has no month {event.month}")
        elif layer.time_format is TimeFormat.YEAR_MONTH:
            if runtime.year is None or event.month not in months_of(layer, runtime.year):
                raise EventRejected(UNKNOWN_TIME_KEY,
                                    f"layer {layer.id!r} has no month {event.month} in year {runtime.year}")
        else:
            raise EventRejected(WRONG_TIME_FORMAT,
                                f"set_month does not apply to a {layer.time_format.value}-format layer")
        runtime = replace(runtime, month=event.month)
        return replace(state, version=state.version + 1,
                       runtimes=_with_runtime(state, event.id, runtime))

    if isinstance(event, SetYear):
        layer = _require_layer(project, event.id)
        runtime = state.runtimes[layer.id]
        if layer.time_format is TimeFormat.YEAR:
            if event.year not in years_of(layer):
                raise EventRejected(UNKNOWN_TIME_KEY, f"layer {layer.id!r} has no year {event.year}")
            runtime = replace(runtime, year=event.year)
        elif layer.time_format is TimeFormat.YEAR_MONTH:
            if event.year not in years_of(layer):
                raise EventRejected(UNKNOWN_TIME_KEY, f"layer {layer.id!r} has no year {event.year}")
            months = months_of(layer, event.year)
            month = runtime.month if runtime.month in months else months[0]
            runtime = replace(runtime, year=event.year, month=month)
        else:
            raise EventRejected(WRONG_TIME_FORMAT,
                                f"set_year does not apply to a {layer.time_format.value}-format layer")
        return replace(state, version=state.version + 1,
                       runtimes=_with_runtime(state, event.id, runtime))

    if isinstance(event, SetOpacity):
        layer = _require_layer(project, event.id)
        value = event.value
        if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
            raise EventRejected(INVALID_VALUE, f"opacity must be a finite number, got {value!r}")
        clamped = min(1.0, max(0.0, float(value)))
        runtime = replace(state.runtimes[layer.id], opacity=clamped)
        return replace(state, version=state.version + 1,
                       runtimes=_with_runtime(state, event.id, runtime))

    if isinstance(event, SetTransform):
        if state.calibration_locked:
            raise EventRejected(CALIBRATION_LOCKED, "calibration is locked; unlock before moving elements")
        t = event.transform
        if t.element_id not in state.transforms:
            raise EventRejected(UNKNOWN_ELEMENT, f"no element {t.element_id!r}")
        values = (t.dx, t.dy, t.sx, t.sy)
        if not all(isinstance(v, (int, float)) and not isinstance(v, bool) and math.isfinite(v)
                   for v in values):
            raise EventRejected(INVALID_TRANSFORM, "transform components must be finite numbers")
        if t.sx <= 0 or t.sy <= 0:
            raise EventRejected(INVALID_TRANSFORM, "scale factors must be positive")
        transforms = dict(state.transforms)
        transforms[t.element_id] = ElementTransform(t.element_id, float(t.dx), float(t.dy),
                                                    float(t.sx), float(t.sy))
        return replace(state, version=state.version + 1, transforms=transforms)

    if isinstance(event, ResetLayout):
        transforms = {element: identity_transform(element) for element in state.transforms}
        return replace(state, version=state.version + 1, transforms=transforms)

    if isinstance(event, SetCalibrationLocked):
        return replace(state, version=state.version + 1, calibration_locked=bool(event.flag))

    raise EventRejected(MALFORMED_EVENT, f"unknown event type {type(event).__name__}")


def _cursor_key_image(layer: DataLayer, runtime: LayerRuntime) -> str | None:
    """Image for the current time cursor, or None when no cursor resolves."""
    if layer.time_format is TimeFormat.MONTH:
        if runtime.month is None:
            return None
        for sub in layer.sublayers:
            if sub.key.month == runtime.month:
                return sub.image
    elif layer.time_format is TimeFormat.YEAR:
        if runtime.year is None:
            return None
        for sub in layer.sublayers:
            if sub.key.year == runtime.year:
                return sub.image
    elif layer.time_format is TimeFormat.YEAR_MONTH:
        if runtime.year is None or runtime.month is None:
            return None
        for sub in layer.sublayers:
            if sub.key.year == runtime.year and sub.key.month == runtime.month:
                return sub.image
    return None


def resolve_draw_list(state: PresenterState, project: LoadedProject) -> DrawList:
    """Deterministic draw order: basemap, then visible layers in manifest order.

    A visible none-type layer contributes its active sublayers in
    declaration order; a time-type layer contributes its cursor image.
    """
    manifest = project.manifest
    basemap_tf = state.transforms.get(BASEMAP_ELEMENT, identity_transform(BASEMAP_ELEMENT))
    entries: DrawList = [DrawEntry(manifest.basemap.image, 1.0, basemap_tf)]
    for layer in manifest.layers:
        runtime = state.runtimes.get(layer.id)
        if runtime is None or not runtime.visible:
            continue
        element = layer_element_id(layer.id)
        transform = state.transforms.get(element, identity_transform(element))
        if layer.time_format is TimeFormat.NONE:
            for index in sorted(runtime.active):
                if 0 <= index < len(layer.sublayers):
                    entries.append(DrawEntry(layer.sublayers[index].image, runtime.opacity, transform))
        else:
            image = _cursor_key_image(layer, runtime)
            if image is not None:
                entries.append(DrawEntry(image, runtime.opacity, transform))
    return entries


# ---------------------------------------------------------------------------
# Wire codecs (shared by the service, settings sidecar, and tests)
# ---------------------------------------------------------------------------

_EVENT_TYPES: dict[str, type] = {
    "select_layer": SelectLayer,
    "set_layer_visible": SetLayerVisible,
    "toggle_sublayer": ToggleSublayer,
    "set_month": SetMonth,
    "set_year": SetYear,
    "set_opacity": SetOpacity,
    "set_transform": SetTransform,
    "reset_layout": ResetLayout,
    "set_calibration_locked": SetCalibrationLocked,
}

_EVENT_NAMES = {cls: name for name, cls in _EVENT_TYPES.items()}


def transform_to_dict(t: ElementTransform) -> dict[str, Any]:
    return {"element_id": t.element_id, "dx": t.dx, "dy": t.dy, "sx": t.sx, "sy": t.sy}


def transform_from_dict(data: Mapping[str, Any]) -> ElementTransform:
    return ElementTransform(
        element_id=str(data["element_id"]),
        dx=float(data["dx"]),
        dy=float(data["dy"]),
        sx=float(data["sx"]),
        sy=float(data["sy"]),
    )


def event_to_dict(event: StateEvent) -> dict[str, Any]:
    name = _EVENT_NAMES[type(event)]
    if isinstance(event, SetTransform):
        body: dict[str, Any] = transform_to_dict(event.transform)
    elif isinstance(event, ResetLayout):
        body = {}
    else:
        body = {f: getattr(event, f) for f in type(event).__dataclass_fields__}
    body["type"] = name
    return body


def event_from_dict(data: Mapping[str, Any]) -> StateEvent:
    """Decode a wire event; raises EventRejected(MALFORMED_EVENT) on bad shape."""
    if not isinstance(data, Mapping) or "type" not in data:
        raise EventRejected(MALFORMED_EVENT, "event must be an object with a 'type' field")
    name = data["type"]
    cls = _EVENT_TYPES.get(name)
    if cls is None:
        raise EventRejected(MALFORMED_EVENT, f"unknown event type {name!r}")
    body = {k: v for k, v in data.items() if k != "type"}
    try:
        if cls is SetTransform:
            return SetTransform(transform_from_dict(body))
        if cls is ResetLayout:
            if body:
                raise TypeError("reset_layout carries no fields")
            return ResetLayout()
        return cls(**body)
    except (TypeError, KeyError, ValueError) as exc:
        raise EventRejected(MALFORMED_EVENT, f"bad {name} event: {exc}") from exc


def _runtime_to_dict(runtime: LayerRuntime, fmt: TimeFormat) -> dict[str, Any]:
    body: dict[str, Any] = {"visible": runtime.visible, "opacity": runtime.opacity}
    if fmt is TimeFormat.NONE:
        body["active"] = sorted(runtime.active)
    if fmt in (TimeFormat.MONTH, TimeFormat.YEAR_MONTH):
        body["month"] = runtime.month
    if fmt in (TimeFormat.YEAR, TimeFormat.YEAR_MONTH):
        body["year"] = runtime.year
    return body


def state_to_dict(state: PresenterState, project: LoadedProject) -> dict[str, Any]:
    formats = {layer.id: layer.time_format for layer in project.manifest.layers}
    return {
        "version": state.version,
        "selected_layer": state.selected_layer,
        "calibration_locked": state.calibration_locked,
        "runtimes": {
            layer_id: _runtime_to_dict(runtime, formats[layer_id])
            for layer_id, runtime in sorted(state.runtimes.items())
        },
        "transforms": {
            element: transform_to_dict(t) for element, t in sorted(state.transforms.items())
        },
    }


def state_from_dict(data: Mapping[str, Any], project: LoadedProject) -> PresenterState:
    runtimes: dict[str, LayerRuntime] = {}
    for layer_id, body in data["runtimes"].items():
        runtimes[layer_id] = LayerRuntime(
            visible=bool(body["visible"]),
            opacity=float(body["opacity"]),
            year=body.get("year"),
            month=body.get("month"),
            active=frozenset(body.get("active", ())),
        )
    transforms = {
        element: transform_from_dict(body)
        for element, body in data["transforms"].items()
    }
    return PresenterState(
        version=int(data["version"]),
        selected_layer=data["selected_layer"],
        runtimes=runtimes,
        transforms=transforms,
        calibration_locked=bool(data["calibration_locked"]),
    )


def encode_state(state: PresenterState, project: LoadedProject) -> str:
    """Canonical single-line encoding; equal states encode to equal bytes."""
    return json.dumps(state_to_dict(state, project), sort_keys=True, separators=(",", ":"))


def state_digest(state: PresenterState, project: LoadedProject) -> str:
    return hashlib.sha256(encode_state(state, project).encode("utf-8")).hexdigest()
