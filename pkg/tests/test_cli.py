import json
import shutil
import zipfile
from pathlib import Path

import numpy as np
import pytest

from makawalu.cli import EXIT_IO, EXIT_OK, EXIT_USAGE, EXIT_VALIDATION, main, parse_time_spec
from makawalu.model import TimeFormat, TimeKey
from makawalu.pngio import encode_png_rgba
from makawalu.projectio import deep_validate


@pytest.fixture()
def source_images(tmp_path):
    """A pile of valid source rasters to author from."""
    src = tmp_path / "sources"
    src.mkdir()
    for i, name in enumerate(["base.png", "icon.png", "a.png", "b.png", "c.png"]):
        img = np.full((20, 16, 4), (i * 40) % 255, dtype=np.uint8)
        img[..., 3] = 255
        (src / name).write_bytes(encode_png_rgba(img))
    return src


def author_demo(tmp_path, source_images, project="proj"):
    root = tmp_path / project
    assert main(["new", "--project", str(root), "--name", "Demo"]) == EXIT_OK
    assert main(["set-basemap", "--project", str(root), "--name", "Base",
                 "--image", str(source_images / "base.png")]) == EXIT_OK
    assert main(["add-layer", "--project", str(root), "--name", "Wildfire",
                 "--color", "#e2583e", "--time-format", "year",
                 "--icon", str(source_images / "icon.png")]) == EXIT_OK
    assert main(["add-sublayer", "--project", str(root), "--layer", "wildfire",
                 "--year", "2000", "--image", str(source_images / "a.png")]) == EXIT_OK
    assert main(["add-sublayer", "--project", str(root), "--layer", "wildfire",
                 "--year", "1999", "--image", str(source_images / "b.png")]) == EXIT_OK
    return root


class TestTimeSpec:
    def test_year(self):
        assert parse_time_spec("2000") == TimeKey.of_year(2000)

    def test_month(self):
        assert parse_time_spec("M06") == TimeKey.of_month(6)
        assert parse_time_spec("m6") == TimeKey.of_month(6)

    def test_year_month(self):
        assert parse_time_spec("2000-01") == TimeKey.of_year_month(2000, 1)
        assert parse_time_spec("2000-M6") == TimeKey.of_year_month(2000, 6)

    def test_garbage(self):
        from makawalu.cli import CliError
        with pytest.raises(CliError):
            parse_time_spec("June 2000")


class TestAuthoringCommands:
    def test_new_scaffold_validates(self, tmp_path):
        root = tmp_path / "fresh"
        assert main(["new", "--project", str(root), "--name", "Fresh"]) == EXIT_OK
        report = deep_validate(root)
        assert report.ok
        manifest = json.loads((root / "project.json").read_text())
        assert manifest["layers"] == []

    def test_full_flow_validates(self, tmp_path, source_images):
        root = author_demo(tmp_path, source_images)
        assert deep_validate(root).ok
        manifest = json.loads((root / "project.json").read_text())
        years = [s["key"]["year"] for s in manifest["layers"][0]["sublayers"]]
        assert years == [1999, 2000]  # sorted insertion
        assert manifest["layers"][0]["color"] == "#E2583E"  # canonicalized

    def test_edit_order_produces_identical_manifest(self, tmp_path, source_images):
        a = author_demo(tmp_path, source_images, "a")
        # Same logical content, sublayers added in the opposite order.
        root = tmp_path / "b"
        main(["new", "--project", str(root), "--name", "Demo"])
        main(["set-basemap", "--project", str(root), "--name", "Base",
              "--image", str(source_images / "base.png")])
        main(["add-layer", "--project", str(root), "--name", "Wildfire",
              "--color", "#E2583E", "--time-format", "year",
              "--icon", str(source_images / "icon.png")])
        main(["add-sublayer", "--project", str(root), "--layer", "wildfire",
              "--year", "1999", "--image", str(source_images / "b.png")])
        main(["add-sublayer", "--project", str(root), "--layer", "wildfire",
              "--year", "2000", "--image", str(source_images / "a.png")])
        assert (a / "project.json").read_bytes() == (root / "project.json").read_bytes()

    def test_duplicate_key_refused_before_copy(self, tmp_path, source_images, capsys):
        root = author_demo(tmp_path, source_images)
        files_before = sorted(p.as_posix() for p in root.rglob("*"))
        manifest_before = (root / "project.json").read_bytes()
        code = main(["add-sublayer", "--project", str(root), "--layer", "wildfire",
                     "--year", "2000", "--image", str(source_images / "c.png")])
        assert code == EXIT_USAGE
        assert "already has key" in capsys.readouterr().err
        assert sorted(p.as_posix() for p in root.rglob("*")) == files_before
        assert (root / "project.json").read_bytes() == manifest_before

    def test_wrong_key_kind_refused(self, tmp_path, source_images, capsys):
        root = author_demo(tmp_path, source_images)
        code = main(["add-sublayer", "--project", str(root), "--layer", "wildfire",
                     "--month", "6", "--image", str(source_images / "c.png")])
        assert code == EXIT_USAGE

    def test_none_layer_with_labels(self, tmp_path, source_images):
        root = author_demo(tmp_path, source_images)
        main(["add-layer", "--project", str(root), "--name", "Government"])
        assert main(["add-sublayer", "--project", str(root), "--layer", "government",
                     "--label", "State", "--image", str(source_images / "c.png")]) == EXIT_OK
        assert deep_validate(root).ok

    def test_default_icon_used_when_omitted(self, tmp_path, source_images):
        root = author_demo(tmp_path, source_images)
        main(["add-layer", "--project", str(root), "--name", "Plain"])
        assert (root / "assets/icons/plain.png").is_file()


class TestValidateCommand:
    def test_broken_project_nonzero_with_code(self, demo_copy, capsys):
        (demo_copy / "assets/layers/wildfire/2000.png").unlink()
        assert main(["validate", str(demo_copy)]) == EXIT_VALIDATION
        out = capsys.readouterr().out
        assert "DANGLING_PATH" in out
        assert "ok: false" in out

    def test_valid_project_zero(self, demo_root, capsys):
        assert main(["validate", str(demo_root)]) == EXIT_OK
        assert "ok: true" in capsys.readouterr().out

    def test_json_output(self, demo_copy, capsys):
        (demo_copy / "assets/unused.png").write_bytes(b"x")
        assert main(["validate", str(demo_copy), "--json"]) == EXIT_OK
        body = json.loads(capsys.readouterr().out)
        assert body["ok"] is True
        assert body["issues"][0]["code"] == "ORPHAN_ASSET"

    def test_project_flag_form(self, demo_root):
        assert main(["validate", "--project", str(demo_root)]) == EXIT_OK


class TestPackUnpackCommands:
    def test_round_trip(self, demo_root, tmp_path, capsys):
        archive = tmp_path / "demo.zip"
        assert main(["pack", "--project", str(demo_root), "-o", str(archive)]) == EXIT_OK
        assert main(["unpack", str(archive), "-d", str(tmp_path / "out")]) == EXIT_OK
        assert deep_validate(tmp_path / "out").ok

    def test_pack_invalid_refused(self, demo_copy, tmp_path, capsys):
        (demo_copy / "project.json").unlink()
        code = main(["pack", "--project", str(demo_copy), "-o", str(tmp_path / "x.zip")])
        assert code == EXIT_VALIDATION
        assert "MISSING_MANIFEST" in capsys.readouterr().err

    def test_unpack_malicious_refused(self, tmp_path, capsys):
        archive = tmp_path / "evil.zip"
        with zipfile.ZipFile(archive, "w") as zf:
            zf.writestr("../pwn", "x")
        assert main(["unpack", str(archive), "-d", str(tmp_path / "out")]) == EXIT_VALIDATION


class TestRenderCommand:
    def test_render_deterministic(self, demo_root, tmp_path):
        a, b = tmp_path / "a.png", tmp_path / "b.png"
        for out in (a, b):
            assert main(["render", "--project", str(demo_root), "--layer", "solar",
                         "--time", "M06", "-o", str(out)]) == EXIT_OK
        assert a.read_bytes() == b.read_bytes()

    def test_render_year_month(self, demo_root, tmp_path):
        out = tmp_path / "agri.png"
        assert main(["render", "--project", str(demo_root), "--layer", "agriculture",
                     "--time", "2000-01", "-o", str(out)]) == EXIT_OK
        assert out.stat().st_size > 0

    def test_render_labels(self, demo_root, tmp_path):
        out = tmp_path / "gov.png"
        assert main(["render", "--project", str(demo_root), "--layer", "government",
                     "--label", "State", "--label", "Federal", "-o", str(out)]) == EXIT_OK

    def test_render_wrong_time_kind_usage_error(self, demo_root, tmp_path, capsys):
        assert main(["render", "--project", str(demo_root), "--layer", "wildfire",
                     "--time", "M06", "-o", str(tmp_path / "x.png")]) == EXIT_USAGE

    def test_render_unknown_layer(self, demo_root, tmp_path):
        assert main(["render", "--project", str(demo_root), "--layer", "lava",
                     "--time", "2000", "-o", str(tmp_path / "x.png")]) == EXIT_USAGE

    def test_render_broken_project_validation_exit(self, demo_copy, tmp_path, capsys):
        (demo_copy / "assets/basemap/oahu.png").unlink()
        code = main(["render", "--project", str(demo_copy), "--layer", "solar",
                     "--time", "M06", "-o", str(tmp_path / "x.png")])
        assert code == EXIT_VALIDATION


def test_usage_error_exit_code():
    with pytest.raises(SystemExit) as err:
        main(["no-such-command"])
    assert err.value.code == 2
