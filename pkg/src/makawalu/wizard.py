"""Interactive authoring wizard.

Walks the four authoring steps in order (project info, basemap, data
layers, save destination), printing a summary block after each step,
and lets the user revise any completed step before saving. Input is
re-prompted on bad values (missing files, malformed colors, duplicate
keys); the wizard never crashes on user input.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, IO

from . import pngio
from .authoring import (
    AuthoringError,
    default_display_label,
    key_asset_stem,
    normalize_color,
    slugify,
    unique_slug,
)
from .model import (
    Basemap,
    DataLayer,
    ProjectInfo,
    ProjectManifest,
    SubLayer,
    TimeFormat,
    TimeKey,
)
from .projectio import DestinationNotEmpty, deep_validate, save_project


class WizardAborted(RuntimeError):
    """Input stream ended before the wizard finished."""


@dataclass
class SublayerDraft:
    key: TimeKey
    display_label: str
    source: Path


@dataclass
class LayerDraft:
    name: str
    description: str = ""
    credit: str = ""
    icon: Path | None = None
    color: str = "#FFFFFF"
    time_format: TimeFormat = TimeFormat.NONE
    sublayers: list[SublayerDraft] = field(default_factory=list)


@dataclass
class AuthoringSession:
    """Draft project under construction; steps may be revisited."""

    project_name: str = ""
    project_description: str = ""
    basemap_name: str = ""
    basemap_description: str = ""
    basemap_source: Path | None = None
    layers: list[LayerDraft] = field(default_factory=list)


class Wizard:
    def __init__(self, input_stream: IO[str] | None = None, output_stream: IO[str] | None = None):
        self._in = input_stream if input_stream is not None else sys.stdin
        self._out = output_stream if output_stream is not None else sys.stdout
        self.session = AuthoringSession()

    # -- plumbing -----------------------------------------------------------

    def say(self, text: str = "") -> None:
        print(text, file=self._out)

    def ask(self, question: str, *, default: str | None = None,
            check: Callable[[str], str | None] = lambda _: None) -> str:
        """Prompt until ``check`` returns no complaint; empty input takes the default."""
        while True:
            suffix = f" [{default}]" if default is not None else ""
            self._out.write(f"{question}{suffix}: ")
            self._out.flush()
            line = self._in.readline()
            if line == "":
                raise WizardAborted("input ended before the wizard finished")
            answer = line.strip()
            if not answer and default is not None:
                answer = default
            complaint = check(answer)
            if complaint is None:
                return answer
            self.say(f"  ! {complaint}")

    def ask_nonempty(self, question: str, *, default: str | None = None) -> str:
        return self.ask(question, default=default,
                        check=lambda a: None if a.strip() else "a value is required")

    def ask_yes_no(self, question: str, default: bool = True) -> bool:
        answer = self.ask(f"{question} (y/n)", default="y" if default else "n",
                          check=lambda a: None if a.lower() in ("y", "n", "yes", "no")
                          else "answer y or n")
        return answer.lower() in ("y", "yes")

    def ask_int(self, question: str, low: int, high: int) -> int:
        def check(a: str) -> str | None:
            if not a.lstrip("-").isdigit():
                return "enter a number"
            if not low <= int(a) <= high:
                return f"must be between {low} and {high}"
            return None
        return int(self.ask(question, check=check))

    def ask_image(self, question: str, *, optional: bool = False) -> Path | None:
        def check(a: str) -> str | None:
            if not a:
                return None if optional else "a file path is required"
            p = Path(a).expanduser()
            if not p.is_file():
                return f"no such file: {p}"
            try:
                pngio.probe_image(p.read_bytes(), source=str(p))
            except pngio.UnsupportedImageError as exc:
                return str(exc)
            return None
        answer = self.ask(question, default="" if optional else None, check=check)
        return Path(answer).expanduser() if answer else None

    def ask_color(self) -> str:
        def check(a: str) -> str | None:
            try:
                normalize_color(a)
            except AuthoringError:
                return "enter a color as '#RRGGBB' hex"
            return None
        return normalize_color(self.ask("Layer color", default="#FFFFFF", check=check))

    # -- steps ---------------------------------------------------------------

    def step_project(self) -> None:
        self.say("== Step 1: Project ==")
        s = self.session
        s.project_name = self.ask_nonempty("Project name", default=s.project_name or None)
        s.project_description = self.ask("Project description", default=s.project_description)
        self._summary_project()

    def step_basemap(self) -> None:
        self.say("== Step 2: Basemap ==")
        s = self.session
        s.basemap_name = self.ask_nonempty("Basemap name", default=s.basemap_name or None)
        s.basemap_description = self.ask("Basemap description", default=s.basemap_description)
        s.basemap_source = self.ask_image("Basemap image path")
        self._summary_basemap()

    def step_layers(self) -> None:
        self.say("== Step 3: Data layers ==")
        while True:
            default_more = not self.session.layers
            if not self.ask_yes_no("Add a data layer?", default=default_more):
                break
            self.session.layers.append(self._enter_layer())
        self._summary_layers()

    def _enter_layer(self) -> LayerDraft:
        draft = LayerDraft(name=self.ask_nonempty("Layer name"))
        draft.description = self.ask("Layer description", default="")
        draft.credit = self.ask("Credit / source", default="")
        draft.icon = self.ask_image("Icon image path (blank for the default icon)", optional=True)
        draft.color = self.ask_color()
        formats = [f.value for f in TimeFormat]
        choice = self.ask(f"Time format ({', '.join(formats)})", default="none",
                          check=lambda a: None if a in formats else f"choose one of: {', '.join(formats)}")
        draft.time_format = TimeFormat(choice)

        while True:
            if draft.sublayers:
                if not self.ask_yes_no("Add another sublayer?", default=False):
                    break
            elif not self.ask_yes_no("Add a sublayer?", default=True):
                self.say("  ! At least one sublayer is required.")
                continue
            sub = self._enter_sublayer(draft)
            if sub is not None:
                draft.sublayers.append(sub)
        return draft

    def _enter_sublayer(self, draft: LayerDraft) -> SublayerDraft | None:
        key = self._enter_key(draft)
        if key is None:
            return None
        label = self.ask("Display label", default=default_display_label(key))
        source = self.ask_image("Sublayer image path")
        assert source is not None
        return SublayerDraft(key=key, display_label=label, source=source)

    def _enter_key(self, draft: LayerDraft) -> TimeKey | None:
        taken = {(s.key.year, s.key.month, s.key.label) for s in draft.sublayers}

        def fresh(key: TimeKey) -> TimeKey | None:
            if (key.year, key.month, key.label) in taken:
                self.say(f"  ! this layer already has key {key_asset_stem(key)!r}")
                return None
            return key

        if draft.time_format is TimeFormat.NONE:
            label = self.ask_nonempty("Sublayer label")
            return fresh(TimeKey.of_label(label))
        if draft.time_format is TimeFormat.MONTH:
            return fresh(TimeKey.of_month(self.ask_int("Month (1-12)", 1, 12)))
        if draft.time_format is TimeFormat.YEAR:
            return fresh(TimeKey.of_year(self.ask_int("Year", 1, 9999)))
        year = self.ask_int("Year", 1, 9999)
        month = self.ask_int("Month (1-12)", 1, 12)
        return fresh(TimeKey.of_year_month(year, month))

    # -- summaries -------------------------------------------------------------

    def _summary_project(self) -> None:
        s = self.session
        self.say("-- Summary: project --")
        self.say(f"  name: {s.project_name}")
        self.say(f"  description: {s.project_description or '(none)'}")

    def _summary_basemap(self) -> None:
        s = self.session
        self.say("-- Summary: basemap --")
        self.say(f"  name: {s.basemap_name}")
        self.say(f"  image: {s.basemap_source}")

    def _summary_layers(self) -> None:
        self.say("-- Summary: layers --")
        if not self.session.layers:
            self.say("  (none)")
        for draft in self.session.layers:
            keys = ", ".join(key_asset_stem(s.key) for s in draft.sublayers)
            self.say(f"  {draft.name} [{draft.color}, {draft.time_format.value}]: {keys}")

    # -- finalize ---------------------------------------------------------------

    def build(self) -> tuple[ProjectManifest, dict[str, bytes]]:
        """Assemble the manifest and staged asset bytes from the session."""
        s = self.session
        assert s.basemap_source is not None
        staged: dict[str, bytes] = {}

        basemap_rel = f"assets/basemap/{slugify(s.basemap_name)}{s.basemap_source.suffix.lower() or '.png'}"
        staged[basemap_rel] = s.basemap_source.read_bytes()

        layers: list[DataLayer] = []
        taken: set[str] = set()
        for draft in s.layers:
            layer_id = unique_slug(draft.name, taken)
            taken.add(layer_id)
            if draft.icon is not None:
                icon_rel = f"assets/icons/{layer_id}{draft.icon.suffix.lower()}"
                staged[icon_rel] = draft.icon.read_bytes()
            else:
                icon_rel = f"assets/icons/{layer_id}.png"
                staged[icon_rel] = pngio.default_icon_png()

            drafts = list(draft.sublayers)
            if draft.time_format is not TimeFormat.NONE:
                drafts.sort(key=lambda d: (d.key.year or 0, d.key.month or 0))
            subs: list[SubLayer] = []
            for sub_draft in drafts:
                rel = f"assets/layers/{layer_id}/{key_asset_stem(sub_draft.key)}{sub_draft.source.suffix.lower()}"
                staged[rel] = sub_draft.source.read_bytes()
                subs.append(SubLayer(key=sub_draft.key, display_label=sub_draft.display_label, image=rel))
            layers.append(DataLayer(
                id=layer_id, name=draft.name, description=draft.description,
                credit=draft.credit, icon=icon_rel, color=draft.color,
                time_format=draft.time_format, sublayers=tuple(subs),
            ))

        manifest = ProjectManifest(
            project=ProjectInfo(name=s.project_name, description=s.project_description),
            basemap=Basemap(name=s.basemap_name, description=s.basemap_description, image=basemap_rel),
            layers=tuple(layers),
        )
        return manifest, staged

    def run(self) -> Path:
        self.say("Makawalu project wizard")
        self.step_project()
        self.step_basemap()
        self.step_layers()

        while True:
            choice = self.ask(
                "Save, or revise a step? (save/project/basemap/layers)", default="save",
                check=lambda a: None if a in ("save", "project", "basemap", "layers")
                else "choose save, project, basemap, or layers")
            if choice == "project":
                self.step_project()
            elif choice == "basemap":
                self.step_basemap()
            elif choice == "layers":
                self.step_layers()
            else:
                break

        manifest, staged = self.build()
        while True:
            dest = Path(self.ask_nonempty("Destination folder")).expanduser()
            try:
                saved = save_project(manifest, staged, dest)
            except DestinationNotEmpty as exc:
                self.say(f"  ! {exc}")
                continue
            break

        report = deep_validate(saved.root)
        self.say(f"Saved {saved.root}")
        for issue in report:
            self.say(f"  {issue.severity.upper()} {issue.code} {issue.path}: {issue.message}")
        self.say("validation: ok" if report.ok else "validation: FAILED")
        return saved.root


def run_wizard(input_stream: IO[str] | None = None, output_stream: IO[str] | None = None) -> Path:
    return Wizard(input_stream, output_stream).run()
