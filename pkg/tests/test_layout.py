"""Library/placement model tests: parsing, flatten, footprints, legality."""

import random

import pytest

from lithocheck.errors import ParseError, ValidationError
from lithocheck.fixtures import (
    ALL_CELLS,
    ROW_HEIGHT,
    fixture_library,
    fixture_library_text,
)
from lithocheck.geometry import Orientation, Rect, RectSet, Transform
from lithocheck.layout import (
    Instance,
    Placement,
    check_placement,
    flatten,
    instance_footprint,
    parse_library,
    parse_placement,
    parse_routed_design,
    serialize_library,
    transform_anchored,
    write_placement,
)

from oracle import rasterize


MINI_LIB = """\
LIBRARY mini ROWHEIGHT 10 SITEWIDTH 2
LAYER M1 metal none
LAYER V1 via none
LAYER M2 metal h
CELL a HEIGHT 1 WIDTH 4 CLASS std
  RECT M1 0 0 4 2
  PIN P signal
    RECT M1 1 4 3 8
END CELL
CELL b HEIGHT 2 WIDTH 6 CLASS std
  PIN Q signal
    RECT M2 1 2 5 6
END CELL
END LIBRARY
"""


def test_parse_empty_library_rejected():
    with pytest.raises(ValidationError, match=">=1 cell"):
        parse_library("LIBRARY x ROWHEIGHT 10 SITEWIDTH 2\nEND LIBRARY\n")


def test_parse_fixture_library_echoes_input():
    lib = fixture_library()
    assert lib.row_height == ROW_HEIGHT
    assert lib.site_width == 200
    assert len(lib.cells) == len(ALL_CELLS)
    assert {c.name for c in lib.cells} == set(ALL_CELLS)
    dff = lib.cell("dff_x2")
    assert dff.height_rows == 2
    assert dff.pr_boundary == Rect(0, 0, 800, 1600)
    assert lib.forbidden_abutments == (("edge_r", "edge_r", "either"),)


def test_pin_outside_boundary_rejected():
    bad = MINI_LIB.replace("RECT M1 1 4 3 8", "RECT M1 1 4 13 8")
    with pytest.raises(ValidationError, match="outside the PR boundary"):
        parse_library(bad)


def test_width_not_site_multiple_rejected():
    bad = MINI_LIB.replace("CELL a HEIGHT 1 WIDTH 4", "CELL a HEIGHT 1 WIDTH 5")
    with pytest.raises(ValidationError, match="site width"):
        parse_library(bad)


def test_syntax_error_reports_line():
    bad = MINI_LIB.replace("PIN P signal", "PIN P wrong")
    with pytest.raises(ParseError) as err:
        parse_library(bad)
    assert err.value.line == 7


def test_non_rectilinear_rect_rejected():
    bad = MINI_LIB.replace("RECT M1 0 0 4 2", "RECT M1 4 0 0 2")
    with pytest.raises(ParseError, match="degenerate or non-rectilinear"):
        parse_library(bad)


def test_serialize_round_trip():
    lib = fixture_library()
    text = serialize_library(lib)
    again = parse_library(text)
    assert serialize_library(again) == text
    assert {c.name for c in again.cells} == {c.name for c in lib.cells}


def test_via_layer_between():
    lib = fixture_library()
    assert lib.via_layer_between("M1", "M2") == "V1"
    assert lib.via_layer_between("M2", "M3") == "V2"


# ---------------------------------------------------------------------------
# footprints and transforms
# ---------------------------------------------------------------------------

def test_instance_footprint_n():
    lib = parse_library(MINI_LIB)
    inst = Instance("i0", "a", Transform(Orientation.N, 0, 0))
    assert instance_footprint(inst, lib) == Rect(0, 0, 4, 10)


def test_instance_footprint_fn_mirrored_same_area():
    lib = parse_library(MINI_LIB)
    inst = Instance("i0", "a", Transform(Orientation.FN, 10, 0))
    fp = instance_footprint(inst, lib)
    assert fp == Rect(6, 0, 10, 10)
    assert fp.area == 40


def test_transform_anchored_places_lower_left():
    lib = parse_library(MINI_LIB)
    pr = lib.cell("a").pr_boundary
    rnd = random.Random(5)
    for _ in range(30):
        o = rnd.choice(list(Orientation))
        x, y = rnd.randrange(-40, 40, 2), rnd.randrange(-40, 40, 10)
        t = transform_anchored(pr, x, y, o)
        fp = t.apply_rect(pr)
        assert (fp.x_lo, fp.y_lo) == (x, y)
        assert fp.area == pr.area


# ---------------------------------------------------------------------------
# flatten
# ---------------------------------------------------------------------------

def _mini_placement(instances, die=Rect(0, 0, 40, 40), rows=None):
    lib = parse_library(MINI_LIB)
    if rows is None:
        rows = tuple((y, Orientation.N) for y in range(0, 40, 10))
    return Placement(lib=lib, instances=tuple(instances), rows=rows, die=die)


def test_flatten_empty_placement():
    p = _mini_placement([])
    assert flatten(p, "M1", Rect(0, 0, 40, 40)).is_empty()


def test_flatten_merges_abutted_geometry():
    # two instances of 'a' abutted: boundary-touching M1 base rects merge
    lib = parse_library(MINI_LIB)
    insts = [Instance("l", "a", Transform(Orientation.N, 0, 0)),
             Instance("r", "a", Transform(Orientation.N, 4, 0))]
    p = _mini_placement(insts)
    merged = flatten(p, "M1", Rect(0, 0, 40, 40))
    assert Rect(0, 0, 8, 2) in merged.rects


def test_flatten_unknown_layer():
    p = _mini_placement([])
    with pytest.raises(KeyError):
        flatten(p, "M9", Rect(0, 0, 40, 40))


def test_flatten_matches_per_instance_rasterization():
    lib = parse_library(MINI_LIB)
    rnd = random.Random(12)
    insts = []
    for i in range(6):
        o = rnd.choice(list(Orientation))
        t = transform_anchored(lib.cell("a").pr_boundary, 2 * rnd.randrange(0, 15),
                               10 * rnd.randrange(0, 3), o)
        insts.append(Instance(f"i{i}", "a", t))
    p = _mini_placement(insts)
    window = Rect(0, 0, 40, 40)
    got = rasterize(flatten(p, "M1", window).rects, window)
    want = rasterize([], window)
    for inst in insts:
        cell = lib.cell(inst.cell)
        rects = [inst.transform.apply_rect(r)
                 for r in cell.shapes.get("M1", RectSet()).rects]
        for pin in cell.pins:
            rects += [inst.transform.apply_rect(r)
                      for r in pin.shapes.get("M1", RectSet()).rects]
        want |= rasterize(rects, window)
    assert (got == want).all()


def test_flatten_additive_over_tiling_windows():
    lib = parse_library(MINI_LIB)
    insts = [Instance("i0", "a", Transform(Orientation.N, 0, 0)),
             Instance("i1", "a", Transform(Orientation.N, 6, 10))]
    p = _mini_placement(insts)
    w1 = Rect(0, 0, 20, 40)
    w2 = Rect(20, 0, 40, 40)
    whole = Rect(0, 0, 40, 40)
    assert (flatten(p, "M1", w1) | flatten(p, "M1", w2)) == flatten(p, "M1", whole)


# ---------------------------------------------------------------------------
# legality
# ---------------------------------------------------------------------------

def test_check_placement_flags_overlap_and_off_grid():
    lib = parse_library(MINI_LIB)
    rows = ((0, Orientation.N),)
    good = Placement(lib=lib, instances=(
        Instance("i0", "a", Transform(Orientation.N, 0, 0)),
        Instance("i1", "a", Transform(Orientation.N, 4, 0))),
        rows=rows, die=Rect(0, 0, 40, 10))
    assert check_placement(good) == []
    overlapping = Placement(lib=lib, instances=(
        Instance("i0", "a", Transform(Orientation.N, 0, 0)),
        Instance("i1", "a", Transform(Orientation.N, 2, 0))),
        rows=rows, die=Rect(0, 0, 40, 10))
    assert any("overlap" in p for p in check_placement(overlapping))
    off_grid = Placement(lib=lib, instances=(
        Instance("i0", "a", Transform(Orientation.N, 1, 0)),),
        rows=rows, die=Rect(0, 0, 40, 10))
    assert any("site grid" in p for p in check_placement(off_grid))


def test_check_placement_row_and_orientation_rules():
    lib = parse_library(MINI_LIB)
    rows = ((0, Orientation.N), (10, Orientation.FS))
    bad_orient = Placement(lib=lib, instances=(
        Instance("i0", "a", transform_anchored(lib.cell("a").pr_boundary,
                                               0, 10, Orientation.N)),),
        rows=rows, die=Rect(0, 0, 40, 20))
    assert any("not allowed" in p for p in check_placement(bad_orient))
    # even-height cell is free to sit on either row parity
    tall_ok = Placement(lib=lib, instances=(
        Instance("i0", "b", transform_anchored(lib.cell("b").pr_boundary,
                                               0, 0, Orientation.FS)),),
        rows=rows, die=Rect(0, 0, 40, 20))
    assert check_placement(tall_ok) == []
    missing_row = Placement(lib=lib, instances=(
        Instance("i0", "b", Transform(Orientation.N, 0, 10)),),
        rows=rows, die=Rect(0, 0, 40, 40))
    assert any("missing" in p for p in check_placement(missing_row))


# ---------------------------------------------------------------------------
# placement / routed design files
# ---------------------------------------------------------------------------

def test_placement_file_round_trip():
    lib = parse_library(MINI_LIB)
    p = _mini_placement([
        Instance("i0", "a", Transform(Orientation.N, 0, 0)),
        Instance("i1", "a", Transform(Orientation.FN, 12, 10)),
    ])
    text = write_placement(p)
    again = parse_placement(text, lib)
    assert write_placement(again) == text
    assert again.die == p.die
    assert again.instances == p.instances


def test_placement_file_rejects_net_lines():
    lib = parse_library(MINI_LIB)
    text = "DIE 0 0 10 10\nNET n i0:P\n"
    with pytest.raises(ParseError, match="NET line in a placement file"):
        parse_placement(text, lib)


def test_routed_design_file_round_trip():
    lib = parse_library(MINI_LIB)
    text = """\
DESIGN k1
DIE 0 0 40 40
ROW 0 N
PLACE i0 a 0 0 N
PLACE i1 a 8 0 N
NET n1 i0:P i1:P
VIA n1 M1/M2 2 5 4 7
WIRE n1 M2 1 4 11 8
"""
    design = parse_routed_design(text, lib)
    assert design.design_id == "k1"
    assert design.nets == (("n1", (("i0", "P"), ("i1", "P"))),)
    from lithocheck.layout import write_routed_design
    out = write_routed_design(design)
    again = parse_routed_design(out, lib)
    assert write_routed_design(again) == out
