import pytest
from hypothesis import given, strategies as st

from makawalu.model import (
    DUPLICATE_LAYER_ID,
    DUPLICATE_TIME_KEY,
    NO_SUBLAYERS,
    PATH_ESCAPE,
    SCHEMA_VIOLATION,
    Basemap,
    DataLayer,
    ProjectInfo,
    ProjectManifest,
    SubLayer,
    TimeFormat,
    TimeKey,
    compare_time_keys,
    is_unsafe_relative_path,
    months_of,
    referenced_paths,
    validate_manifest,
    years_of,
)


def make_layer(layer_id="government", fmt=TimeFormat.NONE, keys=None, **overrides):
    if keys is None:
        keys = [TimeKey.of_label(l) for l in ("State", "County", "Federal", "Private")]
    subs = tuple(
        SubLayer(key=k, display_label=f"sub{i}", image=f"assets/layers/{layer_id}/{i}.png")
        for i, k in enumerate(keys)
    )
    fields = dict(
        id=layer_id, name=layer_id.title(), description="", credit="",
        icon=f"assets/icons/{layer_id}.png", color="#AABB00",
        time_format=fmt, sublayers=subs,
    )
    fields.update(overrides)
    return DataLayer(**fields)


def make_manifest(*layers):
    return ProjectManifest(
        project=ProjectInfo(name="Demo", description=""),
        basemap=Basemap(name="Base", description="", image="assets/basemap/base.png"),
        layers=tuple(layers),
    )


class TestValidateManifest:
    def test_labeled_layer_is_valid(self):
        report = validate_manifest(make_manifest(make_layer()))
        assert report.ok
        assert report.issues == ()

    def test_zero_sublayers(self):
        report = validate_manifest(make_manifest(make_layer(keys=[])))
        assert report.codes() == (NO_SUBLAYERS,)

    def test_duplicate_time_key(self):
        layer = make_layer("wildfire", TimeFormat.YEAR,
                           [TimeKey.of_year(2000), TimeKey.of_year(2000)])
        report = validate_manifest(make_manifest(layer))
        assert DUPLICATE_TIME_KEY in report.codes()

    def test_duplicate_layer_id(self):
        report = validate_manifest(make_manifest(make_layer("gov"), make_layer("gov")))
        assert DUPLICATE_LAYER_ID in report.codes()
        assert not report.ok

    def test_key_kind_must_match_time_format(self):
        layer = make_layer("solar", TimeFormat.MONTH, [TimeKey.of_year(2000)])
        report = validate_manifest(make_manifest(layer))
        assert SCHEMA_VIOLATION in report.codes()

    def test_traversal_path_flagged(self):
        layer = make_layer(icon="../secret.png")
        report = validate_manifest(make_manifest(layer))
        assert PATH_ESCAPE in report.codes()

    def test_unsorted_time_sublayers_flagged(self):
        layer = make_layer("wildfire", TimeFormat.YEAR,
                           [TimeKey.of_year(2001), TimeKey.of_year(1999)])
        report = validate_manifest(make_manifest(layer))
        assert SCHEMA_VIOLATION in report.codes()

    def test_bad_color_and_empty_name(self):
        layer = make_layer(color="red", name=" ")
        codes = validate_manifest(make_manifest(layer)).codes()
        assert codes.count(SCHEMA_VIOLATION) == 2

    def test_month_out_of_range(self):
        layer = make_layer("solar", TimeFormat.MONTH, [TimeKey.of_month(13)])
        report = validate_manifest(make_manifest(layer))
        assert SCHEMA_VIOLATION in report.codes()

    def test_wrong_schema_version(self):
        manifest = ProjectManifest(
            project=ProjectInfo(name="x"), basemap=Basemap("b", "", "assets/b.png"),
            layers=(), schema_version=2)
        assert not validate_manifest(manifest).ok


class TestPathSafety:
    @pytest.mark.parametrize("path", [
        "../secret.png", "a/../../b.png", "/etc/passwd", "C:evil.png", "a\\b.png", "",
    ])
    def test_unsafe(self, path):
        assert is_unsafe_relative_path(path)

    @pytest.mark.parametrize("path", [
        "assets/basemap/oahu.png", "a/b/c.png", "weird..name.png", "..png",
    ])
    def test_safe(self, path):
        assert not is_unsafe_relative_path(path)


class TestCompareTimeKeys:
    def test_year_month_calendar_order(self):
        assert compare_time_keys(TimeKey.of_year_month(2000, 1), TimeKey.of_year_month(2000, 2)) == -1

    def test_year_numeric(self):
        assert compare_time_keys(TimeKey.of_year(1999), TimeKey.of_year(2000)) == -1

    def test_month_reflexive(self):
        assert compare_time_keys(TimeKey.of_month(6), TimeKey.of_month(6)) == 0

    def test_none_orders_by_declaration(self):
        order = ["Private", "State", "County"]
        a, b = TimeKey.of_label("State"), TimeKey.of_label("Private")
        assert compare_time_keys(a, b, order) == 1
        assert compare_time_keys(b, a, order) == -1

    def test_mismatched_kinds_rejected(self):
        with pytest.raises(ValueError):
            compare_time_keys(TimeKey.of_year(2000), TimeKey.of_month(6))

    def test_none_requires_label_order(self):
        with pytest.raises(ValueError):
            compare_time_keys(TimeKey.of_label("a"), TimeKey.of_label("b"))


def _keys(kind):
    if kind is TimeFormat.MONTH:
        return st.builds(TimeKey.of_month, st.integers(1, 12))
    if kind is TimeFormat.YEAR:
        return st.builds(TimeKey.of_year, st.integers(1, 9999))
    return st.builds(TimeKey.of_year_month, st.integers(1, 9999), st.integers(1, 12))


@given(st.sampled_from([TimeFormat.MONTH, TimeFormat.YEAR, TimeFormat.YEAR_MONTH]).flatmap(
    lambda kind: st.tuples(_keys(kind), _keys(kind), _keys(kind))))
def test_compare_is_total_order(triple):
    a, b, c = triple
    ab, ba = compare_time_keys(a, b), compare_time_keys(b, a)
    assert ab == -ba  # antisymmetry
    assert ab in (-1, 0, 1)  # totality
    if ab == 0:
        assert a == b  # keys carry no hidden state
    if compare_time_keys(a, b) <= 0 and compare_time_keys(b, c) <= 0:
        assert compare_time_keys(a, c) <= 0  # transitivity


class TestTimeQueries:
    def test_years_ascending_unique(self):
        layer = make_layer("wildfire", TimeFormat.YEAR,
                           [TimeKey.of_year(y) for y in (1999, 2000, 2001, 2002)])
        assert years_of(layer) == [1999, 2000, 2001, 2002]

    def test_years_dedup_from_year_month(self):
        layer = make_layer("agri", TimeFormat.YEAR_MONTH,
                           [TimeKey.of_year_month(2000, 1), TimeKey.of_year_month(2000, 3),
                            TimeKey.of_year_month(2001, 1)])
        assert years_of(layer) == [2000, 2001]

    def test_years_singleton(self):
        layer = make_layer("w", TimeFormat.YEAR, [TimeKey.of_year(2045)])
        assert years_of(layer) == [2045]

    def test_months_full_calendar(self):
        layer = make_layer("solar", TimeFormat.MONTH, [TimeKey.of_month(m) for m in range(1, 13)])
        assert months_of(layer) == list(range(1, 13))

    def test_months_for_year(self):
        layer = make_layer("agri", TimeFormat.YEAR_MONTH,
                           [TimeKey.of_year_month(2000, 1), TimeKey.of_year_month(2000, 6),
                            TimeKey.of_year_month(2001, 2)])
        assert months_of(layer, 2000) == [1, 6]

    def test_months_empty_for_absent_year(self):
        layer = make_layer("agri", TimeFormat.YEAR_MONTH, [TimeKey.of_year_month(2000, 1)])
        assert months_of(layer, 1980) == []

    def test_contract_violations(self):
        year_layer = make_layer("w", TimeFormat.YEAR, [TimeKey.of_year(2000)])
        month_layer = make_layer("s", TimeFormat.MONTH, [TimeKey.of_month(2)])
        none_layer = make_layer()
        with pytest.raises(ValueError):
            years_of(month_layer)
        with pytest.raises(ValueError):
            months_of(year_layer)
        with pytest.raises(ValueError):
            months_of(month_layer, year=2000)
        with pytest.raises(ValueError):
            months_of(none_layer)
        ym = make_layer("a", TimeFormat.YEAR_MONTH, [TimeKey.of_year_month(2000, 1)])
        with pytest.raises(ValueError):
            months_of(ym)  # year required


def test_referenced_paths_order_and_dedup():
    layer = make_layer()
    manifest = make_manifest(layer)
    paths = referenced_paths(manifest)
    assert paths[0] == "assets/basemap/base.png"
    assert paths[1] == "assets/icons/government.png"
    assert len(paths) == len(set(paths))
