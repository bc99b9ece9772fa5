import hashlib
import random

import numpy as np
import pytest

from makawalu.compositor import Canvas, CompositeError, composite, render_to_file
from makawalu.pngio import decode_image_rgba, encode_png_rgba
from makawalu.state import (
    DrawEntry,
    ElementTransform,
    SetYear,
    SelectLayer,
    apply_event,
    initial_state,
)

from .oracle import composite_reference


def identity(element="e"):
    return ElementTransform(element)


def solid(width, height, rgba):
    img = np.zeros((height, width, 4), dtype=np.uint8)
    img[:, :] = rgba
    return img


def dict_resolver(images):
    return lambda key: images[key]


def random_image(rng, width, height):
    return np.array(
        [[[rng.randrange(256) for _ in range(4)] for _ in range(width)] for _ in range(height)],
        dtype=np.uint8)


class TestCanvas:
    def test_buffer_length_invariant(self):
        with pytest.raises(ValueError):
            Canvas(2, 2, b"\x00" * 15)
        canvas = Canvas(2, 2, b"\x00" * 16)
        assert canvas.to_array().shape == (2, 2, 4)

    def test_positive_dimensions(self):
        with pytest.raises(ValueError):
            Canvas(0, 1, b"")


class TestTrivialIdentities:
    def test_single_opaque_source_equals_source(self):
        rng = random.Random(7)
        base = random_image(rng, 8, 6)
        base[..., 3] = 255
        out = composite([DrawEntry("base", 1.0, identity())], dict_resolver({"base": base}), 8, 6)
        assert np.array_equal(out.to_array(), base)

    def test_opacity_zero_never_changes_pixels(self):
        base = solid(8, 8, (255, 255, 255, 255))
        red = solid(8, 8, (255, 0, 0, 255))
        entries = [DrawEntry("base", 1.0, identity()), DrawEntry("red", 0.0, identity())]
        out = composite(entries, dict_resolver({"base": base, "red": red}), 8, 8)
        assert np.array_equal(out.to_array(), base)

    def test_half_red_over_white(self):
        base = solid(8, 8, (255, 255, 255, 255))
        red = solid(8, 8, (255, 0, 0, 255))
        entries = [DrawEntry("base", 1.0, identity()), DrawEntry("red", 0.5, identity())]
        out = composite(entries, dict_resolver({"base": base, "red": red}), 8, 8).to_array()
        assert np.array_equal(out[..., :3], np.broadcast_to((255, 128, 128), (8, 8, 3)))
        assert (out[..., 3] == 255).all()

    def test_fully_transparent_entry_is_identity(self):
        rng = random.Random(3)
        base = random_image(rng, 8, 8)
        clear = solid(8, 8, (9, 9, 9, 0))
        with_clear = composite(
            [DrawEntry("base", 1.0, identity()), DrawEntry("clear", 1.0, identity())],
            dict_resolver({"base": base, "clear": clear}), 8, 8)
        without = composite([DrawEntry("base", 1.0, identity())], dict_resolver({"base": base}), 8, 8)
        assert with_clear.pixels == without.pixels


def random_transform(rng):
    return ElementTransform(
        "e",
        dx=rng.uniform(-0.4, 0.4),
        dy=rng.uniform(-0.4, 0.4),
        sx=rng.uniform(0.5, 2.0),
        sy=rng.uniform(0.5, 2.0),
    )


class TestOracleAgreement:
    def test_random_identity_stacks_match_oracle_exactly(self):
        rng = random.Random(20260810)
        for _ in range(30):
            n = rng.randrange(1, 5)
            images = {f"im{i}": random_image(rng, 8, 8) for i in range(n)}
            entries = [DrawEntry(f"im{i}", rng.random(), identity()) for i in range(n)]
            got = composite(entries, dict_resolver(images), 8, 8).to_array()
            want = composite_reference(
                [(e.image, e.opacity, (0.0, 0.0, 1.0, 1.0)) for e in entries], images, 8, 8)
            assert np.array_equal(got, want)

    def test_random_transformed_stacks_match_oracle_exactly(self):
        rng = random.Random(99)
        for _ in range(30):
            n = rng.randrange(1, 4)
            sizes = [(rng.randrange(2, 12), rng.randrange(2, 12)) for _ in range(n)]
            images = {f"im{i}": random_image(rng, w, h) for i, (w, h) in enumerate(sizes)}
            entries = [DrawEntry(f"im{i}", rng.random(), random_transform(rng)) for i in range(n)]
            got = composite(entries, dict_resolver(images), 9, 7).to_array()
            want = composite_reference(
                [(e.image, e.opacity, (e.transform.dx, e.transform.dy, e.transform.sx, e.transform.sy))
                 for e in entries], images, 9, 7)
            assert np.array_equal(got, want)

    def test_offset_transform_clips_uncovered_region(self):
        base = solid(10, 10, (0, 0, 0, 255))
        red = solid(10, 10, (255, 0, 0, 255))
        shift = ElementTransform("e", dx=0.5)  # half a canvas to the right
        out = composite(
            [DrawEntry("base", 1.0, identity()), DrawEntry("red", 1.0, shift)],
            dict_resolver({"base": base, "red": red}), 10, 10).to_array()
        assert (out[:, :5, 0] == 0).all()      # left half untouched
        assert (out[:, 6:, 0] == 255).all()    # right half covered


class TestErrors:
    def test_unresolvable_image_names_entry(self):
        with pytest.raises(CompositeError) as err:
            composite([DrawEntry("missing.png", 1.0, identity())], dict_resolver({}), 4, 4)
        assert err.value.index == 0
        assert "missing.png" in str(err.value)

    def test_bad_dimensions(self):
        with pytest.raises(ValueError):
            composite([], dict_resolver({}), 0, 4)


class TestRenderToFile:
    def test_render_is_byte_deterministic(self, demo_project, tmp_path):
        state = initial_state(demo_project)
        state = apply_event(state, SelectLayer("wildfire"), demo_project)
        state = apply_event(state, SetYear("wildfire", 2000), demo_project)
        a = render_to_file(demo_project, state, 192, 128, tmp_path / "a.png")
        b = render_to_file(demo_project, state, 192, 128, tmp_path / "b.png")
        assert a.read_bytes() == b.read_bytes()
        assert hashlib.sha256(a.read_bytes()).hexdigest() == hashlib.sha256(b.read_bytes()).hexdigest()

    def test_zero_visible_layers_renders_basemap(self, demo_project, tmp_path):
        out = render_to_file(demo_project, initial_state(demo_project), 192, 128, tmp_path / "o.png")
        rendered = decode_image_rgba(out.read_bytes())
        basemap = decode_image_rgba(
            (demo_project.root / "assets/basemap/oahu.png").read_bytes())
        assert np.array_equal(rendered, basemap)

    def test_one_pixel_canvas(self, demo_project, tmp_path):
        out = render_to_file(demo_project, initial_state(demo_project), 1, 1, tmp_path / "px.png")
        assert decode_image_rgba(out.read_bytes()).shape == (1, 1, 4)


class TestPngCodec:
    def test_round_trip(self):
        rng = random.Random(5)
        img = random_image(rng, 5, 3)
        assert np.array_equal(decode_image_rgba(encode_png_rgba(img)), img)

    def test_rejects_wrong_shape(self):
        with pytest.raises(ValueError):
            encode_png_rgba(np.zeros((4, 4, 3), dtype=np.uint8))
