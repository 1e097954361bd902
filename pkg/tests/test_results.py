"""
Tests for Result Files
========================

LEARNING POINT: tmp_path
---------------------------
pytest's `tmp_path` fixture gives every test its own empty directory, so
file-writing tests never see each other's output and never touch the
working tree.
"""

import hashlib
import json

import numpy as np
import pytest

from gliorad.core.errors import ConfigurationError
from gliorad.core.fields import FieldRole, SpaceTimeField, constant
from gliorad.io.results import (
    MANIFEST_NAME,
    ResultStore,
    RunManifest,
    format_float,
    load_manifest,
    read_field_csv,
    verify_manifest,
)
from tests.conftest import make_grid


# ─── Fixtures ────────────────────────────────────────────────

@pytest.fixture
def store(tmp_path):
    return ResultStore(tmp_path / "out")


# ─── Writers ─────────────────────────────────────────────────

def test_format_float_round_trips_exactly():
    value = 0.1 + 0.2

    assert float(format_float(value)) == value
    assert format_float(1.0) == "1"
    assert format_float(0.5) == "0.5"


def test_write_field_layout_1d(store):
    grid = make_grid(cells=2, steps=2, length=1.0, final_time=1.0)
    field = constant(grid, 0.25, FieldRole.STATE)

    path = store.write_field("state.csv", field)

    lines = path.read_text().splitlines()
    assert lines[0] == "cell,x,t=0,t=0.5,t=1"
    assert lines[1] == "0,0.25,0.25,0.25,0.25"
    assert lines[2] == "1,0.75,0.25,0.25,0.25"


def test_write_field_layout_2d(store, grid_2d):
    path = store.write_field("state.csv", constant(grid_2d, 0.0, FieldRole.STATE))

    lines = path.read_text().splitlines()
    assert lines[0].startswith("cell,x,y,t=0,")
    assert lines[1].startswith("0,0.25,0.25,")
    assert len(lines) == grid_2d.num_cells + 1


def test_field_values_read_back_bit_identical(store, grid_1d, rng):
    field = SpaceTimeField(grid_1d, rng.standard_normal(grid_1d.shape), FieldRole.ADJOINT)

    table = read_field_csv(store.write_field("adjoint.csv", field))

    np.testing.assert_array_equal(table.values, field.values)
    np.testing.assert_array_equal(table.times, grid_1d.times)
    np.testing.assert_array_equal(table.coordinates, grid_1d.centers)
    assert table.num_cells == grid_1d.num_cells


def test_write_json_sorts_keys(store):
    path = store.write_json("summary.json", {"b": 1, "a": [1.5, 2]})

    text = path.read_text()
    assert text.index('"a"') < text.index('"b"')
    assert text.endswith("\n")
    assert json.loads(text) == {"a": [1.5, 2], "b": 1}


def test_write_rows_formats_floats(store):
    path = store.write_rows("history.csv", ["accepted", "value"], [[0, 0.1 + 0.2]])

    assert path.read_text() == "accepted,value\n0,0.30000000000000004\n"


def test_path_traversal_blocked(store):
    with pytest.raises(ConfigurationError) as exc_info:
        store.write_text("../escape.txt", "nope")

    assert exc_info.value.field_path == "output_dir"


def test_nested_relative_paths_are_created(store):
    path = store.write_text("sub/dir/note.txt", "hi")

    assert path.read_text() == "hi"
    assert path.parent.name == "dir"


# ─── Inventory and manifest ──────────────────────────────────

def test_inventory_lists_written_files_sorted(store):
    store.write_text("b.txt", "bee")
    store.write_text("a.txt", "ay")

    records = store.inventory()

    assert [r.path for r in records] == ["a.txt", "b.txt"]
    assert records[0].sha256 == hashlib.sha256(b"ay").hexdigest()
    assert records[1].bytes == 3


def test_manifest_round_trip_and_verification(store):
    store.write_text("a.txt", "ay")
    manifest = RunManifest(version="0.1.0", mode="forward", files=store.inventory())

    store.write_manifest(manifest)
    loaded = load_manifest(store.base_dir / MANIFEST_NAME)

    assert loaded == manifest
    assert loaded.ok
    assert verify_manifest(loaded, store.base_dir) == []
    assert MANIFEST_NAME not in [r.path for r in store.inventory()]


def test_verify_manifest_detects_tampering_and_loss(store):
    store.write_text("a.txt", "ay")
    store.write_text("b.txt", "bee")
    manifest = RunManifest(version="0.1.0", mode="forward", files=store.inventory())

    (store.base_dir / "a.txt").write_text("AY")
    (store.base_dir / "b.txt").unlink()

    assert verify_manifest(manifest, store.base_dir) == [
        "a.txt: checksum mismatch",
        "b.txt: missing",
    ]


def test_failed_manifest_is_not_ok():
    manifest = RunManifest(version="0.1.0", mode="verify", status="failed", error="boom")

    assert not manifest.ok


# ─── Readers ─────────────────────────────────────────────────

def test_read_field_csv_missing_file(tmp_path):
    with pytest.raises(ConfigurationError, match="not found"):
        read_field_csv(tmp_path / "absent.csv")


@pytest.mark.parametrize(
    "content",
    [
        "",
        "index,x,t=0\n0,0.5,1\n",
        "cell,x,t=0\n0,0.5,oops\n",
        "cell,x,t=0,t=1\n0,0.5,1\n",
    ],
)
def test_read_field_csv_rejects_malformed_files(tmp_path, content):
    path = tmp_path / "bad.csv"
    path.write_text(content)

    with pytest.raises(ConfigurationError):
        read_field_csv(path)
