"""Command-line interface.

    makawalu wizard                       interactive authoring
    makawalu new --project DIR --name N   scaffold an empty project
    makawalu set-basemap ...              replace the basemap
    makawalu add-layer ...                append a data layer
    makawalu add-sublayer ...             add one keyed image to a layer
    makawalu validate [DIR] [--json]      deep-validate a project folder
    makawalu pack / unpack                zip sharing
    makawalu render ...                   headless PNG render of a scene
    makawalu present ...                  run the presenter service

Exit codes: 0 ok, 1 validation failure, 2 usage error, 3 I/O error.
"""

from __future__ import annotations

import argparse
import json
import re
import sys
from pathlib import Path

from . import authoring, service, wizard
from .compositor import render_to_file
from .model import TimeFormat, TimeKey, ValidationReport
from .projectio import (
    DestinationNotEmpty,
    LoadedProject,
    ProjectRefused,
    UnsafeArchiveError,
    deep_validate,
    load_project,
    pack,
    unpack,
)
from .state import SelectLayer, SetMonth, SetYear, ToggleSublayer, apply_event, initial_state

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_USAGE = 2
EXIT_IO = 3


class CliError(Exception):
    def __init__(self, message: str, code: int = EXIT_USAGE):
        super().__init__(message)
        self.code = code


def print_report(report: ValidationReport, as_json: bool = False, out=None) -> None:
    out = out or sys.stdout
    if as_json:
        body = {
            "ok": report.ok,
            "issues": [
                {"severity": i.severity, "code": i.code, "path": i.path, "message": i.message}
                for i in report
            ],
        }
        print(json.dumps(body, indent=2, sort_keys=True), file=out)
        return
    for issue in report:
        print(f"{issue.severity.upper()} {issue.code} {issue.path}: {issue.message}", file=out)
    print(f"ok: {'true' if report.ok else 'false'}", file=out)


def _require_project(path: str) -> LoadedProject:
    loaded = load_project(path)
    if isinstance(loaded, ValidationReport):
        print_report(loaded, out=sys.stderr)
        raise CliError(f"project failed validation: {path}", EXIT_VALIDATION)
    return loaded


def parse_time_spec(spec: str) -> TimeKey:
    """'2000' -> year, 'M06' -> month, '2000-06' -> year+month."""
    if re.fullmatch(r"[Mm]\d{1,2}", spec):
        return TimeKey.of_month(int(spec[1:]))
    if re.fullmatch(r"\d{1,4}", spec):
        return TimeKey.of_year(int(spec))
    m = re.fullmatch(r"(\d{1,4})-[Mm]?(\d{1,2})", spec)
    if m:
        return TimeKey.of_year_month(int(m.group(1)), int(m.group(2)))
    raise CliError(f"cannot parse time spec {spec!r}; use '2000', 'M06', or '2000-06'")


# -- subcommands --------------------------------------------------------------

def cmd_wizard(args: argparse.Namespace) -> int:
    try:
        wizard.run_wizard()
    except wizard.WizardAborted as exc:
        print(f"aborted: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_OK


def cmd_new(args: argparse.Namespace) -> int:
    authoring.scaffold_project(Path(args.project), args.name, args.description)
    print(f"created {args.project}")
    return EXIT_OK


def cmd_set_basemap(args: argparse.Namespace) -> int:
    authoring.set_basemap(Path(args.project), args.name, args.description, Path(args.image))
    print(f"basemap set to {args.name!r}")
    return EXIT_OK


def cmd_add_layer(args: argparse.Namespace) -> int:
    layer = authoring.add_layer(
        Path(args.project),
        layer_id=args.id,
        name=args.name,
        description=args.description,
        credit=args.credit,
        icon=Path(args.icon) if args.icon else None,
        color=args.color,
        time_format=TimeFormat(args.time_format),
    )
    print(f"added layer {layer.id!r}")
    if not layer.sublayers:
        print("note: the project will not validate until this layer has a sublayer",
              file=sys.stderr)
    return EXIT_OK


def _sublayer_key(args: argparse.Namespace) -> TimeKey:
    if args.label is not None:
        if args.year is not None or args.month is not None:
            raise CliError("--label cannot be combined with --year/--month")
        return TimeKey.of_label(args.label)
    if args.year is not None and args.month is not None:
        return TimeKey.of_year_month(args.year, args.month)
    if args.year is not None:
        return TimeKey.of_year(args.year)
    if args.month is not None:
        return TimeKey.of_month(args.month)
    raise CliError("provide a key: --label, --month, --year, or --year with --month")


def cmd_add_sublayer(args: argparse.Namespace) -> int:
    sub = authoring.add_sublayer(
        Path(args.project),
        layer_id=args.layer,
        key=_sublayer_key(args),
        image=Path(args.image),
        display_label=args.display_label,
    )
    print(f"added sublayer {sub.display_label!r} -> {sub.image}")
    return EXIT_OK


def cmd_validate(args: argparse.Namespace) -> int:
    target = args.dir or args.project
    if not target:
        raise CliError("give a project folder (positional or --project)")
    report = deep_validate(target)
    print_report(report, as_json=args.json)
    return EXIT_OK if report.ok else EXIT_VALIDATION


def cmd_pack(args: argparse.Namespace) -> int:
    try:
        out = pack(args.project, args.output)
    except ProjectRefused as exc:
        print_report(exc.report, out=sys.stderr)
        raise CliError(str(exc), EXIT_VALIDATION) from exc
    print(f"packed {out}")
    return EXIT_OK


def cmd_unpack(args: argparse.Namespace) -> int:
    try:
        dest = unpack(args.archive, args.dest)
    except UnsafeArchiveError as exc:
        raise CliError(str(exc), EXIT_VALIDATION) from exc
    print(f"unpacked to {dest}")
    return EXIT_OK


def cmd_render(args: argparse.Namespace) -> int:
    project = _require_project(args.project)
    state = initial_state(project)
    if args.layer:
        layer = None
        for candidate in project.manifest.layers:
            if candidate.id == args.layer:
                layer = candidate
        if layer is None:
            raise CliError(f"no layer {args.layer!r} in project")
        state = apply_event(state, SelectLayer(args.layer), project)
        if layer.time_format is TimeFormat.NONE:
            labels = args.label or []
            if not labels:
                raise CliError(f"layer {args.layer!r} is label-keyed; pass --label (repeatable)")
            for label in labels:
                index = next((i for i, s in enumerate(layer.sublayers) if s.key.label == label), None)
                if index is None:
                    raise CliError(f"layer {args.layer!r} has no sublayer labeled {label!r}")
                state = apply_event(state, ToggleSublayer(args.layer, index), project)
        else:
            if not args.time:
                raise CliError(f"layer {args.layer!r} is time-keyed; pass --time")
            key = parse_time_spec(args.time)
            if key.kind is not layer.time_format:
                raise CliError(
                    f"--time {args.time!r} is a {key.kind.value} key but layer "
                    f"{args.layer!r} is {layer.time_format.value}-keyed")
            if key.year is not None:
                state = apply_event(state, SetYear(args.layer, key.year), project)
            if key.month is not None:
                state = apply_event(state, SetMonth(args.layer, key.month), project)

    basemap = project.asset_index[project.manifest.basemap.image]
    width = args.width or basemap.width
    height = args.height or basemap.height
    out = render_to_file(project, state, width, height, Path(args.output))
    print(f"rendered {out}")
    return EXIT_OK


def cmd_present(args: argparse.Namespace) -> int:
    service.serve(args.project, args.bind, Path(args.ui) if args.ui else None)
    return EXIT_OK


# -- parser -------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="makawalu", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    project_opt = argparse.ArgumentParser(add_help=False)
    project_opt.add_argument("--project", required=True, help="project folder")

    p = sub.add_parser("wizard", help="interactive step-by-step authoring")
    p.set_defaults(func=cmd_wizard)

    p = sub.add_parser("new", parents=[project_opt], help="scaffold an empty project")
    p.add_argument("--name", required=True)
    p.add_argument("--description", default="")
    p.set_defaults(func=cmd_new)

    p = sub.add_parser("set-basemap", parents=[project_opt], help="replace the basemap")
    p.add_argument("--name", required=True)
    p.add_argument("--description", default="")
    p.add_argument("--image", required=True)
    p.set_defaults(func=cmd_set_basemap)

    p = sub.add_parser("add-layer", parents=[project_opt], help="append a data layer")
    p.add_argument("--id", default=None, help="slug id (defaults to a slug of the name)")
    p.add_argument("--name", required=True)
    p.add_argument("--description", default="")
    p.add_argument("--credit", default="")
    p.add_argument("--icon", default=None, help="icon image (defaults to the bundled icon)")
    p.add_argument("--color", default="#FFFFFF")
    p.add_argument("--time-format", default="none",
                   choices=[f.value for f in TimeFormat])
    p.set_defaults(func=cmd_add_layer)

    p = sub.add_parser("add-sublayer", parents=[project_opt], help="add one keyed image")
    p.add_argument("--layer", required=True)
    p.add_argument("--label", default=None, help="key for none-format layers")
    p.add_argument("--year", type=int, default=None)
    p.add_argument("--month", type=int, default=None)
    p.add_argument("--image", required=True)
    p.add_argument("--display-label", default=None)
    p.set_defaults(func=cmd_add_sublayer)

    p = sub.add_parser("validate", help="deep-validate a project folder")
    p.add_argument("dir", nargs="?", default=None)
    p.add_argument("--project", default=None)
    p.add_argument("--json", action="store_true", help="emit the report as JSON")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("pack", parents=[project_opt], help="zip a valid project")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_pack)

    p = sub.add_parser("unpack", help="extract a shared project archive")
    p.add_argument("archive")
    p.add_argument("-d", "--dest", required=True)
    p.set_defaults(func=cmd_unpack)

    p = sub.add_parser("render", parents=[project_opt], help="headless scene render")
    p.add_argument("--layer", default=None)
    p.add_argument("--time", default=None, help="'2000', 'M06', or '2000-06'")
    p.add_argument("--label", action="append", default=None,
                   help="sublayer label for none-format layers (repeatable)")
    p.add_argument("--width", type=int, default=None)
    p.add_argument("--height", type=int, default=None)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("present", parents=[project_opt], help="run the presenter service")
    p.add_argument("--bind", default="127.0.0.1:8080")
    p.add_argument("--ui", default=None, help="directory with built controller/display pages")
    p.set_defaults(func=cmd_present)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except (authoring.AuthoringError, DestinationNotEmpty, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
