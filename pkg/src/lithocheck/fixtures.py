"""Synthetic fixture library, weakpoint deck and route tech for tests/demos.

Geometry is hand-authored so each verification capability has a known
ground truth:

* ``lat_weak`` carries M2 decoration blocks flanking one routing track per
  half-row; a wire routed straight through the gap completes the
  ``m2_pinch`` pattern (router-induced weakpoint).  The unrouted cell only
  matches the partial pattern whose missing strip became a don't-care.
* ``cmp_gap`` has four M2 pins, three matching the ``m2_quad`` pattern
  polygons exactly and a fourth of a different shape inside the fourth
  polygon's bounding box: found by don't-care partial matching, invisible
  to deletion-only partial matching.
* ``abut_a`` / ``abut_b`` each look clean standalone, but abutting them
  completes the three-bar ``m1_trio`` pattern across the shared edge.
* ``fill_x1`` is a filler (excluded from scenarios by default).

Dimensions: 200 nm sites, 800 nm rows, routing tracks at 40 + 80k nm so
every cell placed on the site grid has pin access in both grid parities.
"""

from __future__ import annotations

from .layout import CellLibrary, parse_library
from .pattern import PatternDeck, parse_deck

ROW_HEIGHT = 800
SITE_WIDTH = 200

_HEADER = f"LIBRARY fixture ROWHEIGHT {ROW_HEIGHT} SITEWIDTH {SITE_WIDTH}"

_LAYERS = """\
LAYER M1 metal none
LAYER V1 via none
LAYER M2 metal h
LAYER V2 via none
LAYER M3 metal v
"""


def _rails(width, rows):
    """Ground rail at the bottom of each row boundary, power in between."""
    lines = ["  PIN VSS ground"]
    lines.append(f"    RECT M1 0 0 {width} 80")
    if rows % 2 == 0:
        lines.append(f"    RECT M1 0 {rows * ROW_HEIGHT - 80} {width} {rows * ROW_HEIGHT}")
        vdd = [(ROW_HEIGHT - 40, ROW_HEIGHT + 40)]
    else:
        vdd = [(rows * ROW_HEIGHT - 80, rows * ROW_HEIGHT)]
    lines.append("  PIN VDD power")
    for lo, hi in vdd:
        lines.append(f"    RECT M1 0 {lo} {width} {hi}")
    return lines


def _m1_bar(center_x, y_lo=240, y_hi=560):
    return f"M1 {center_x - 20} {y_lo} {center_x + 20} {y_hi}"


def _simple_cell(name, width, pin_centers, abut_class="std"):
    lines = [f"CELL {name} HEIGHT 1 WIDTH {width} CLASS {abut_class}"]
    lines += _rails(width, 1)
    for pin_name, cx in pin_centers:
        lines.append(f"  PIN {pin_name} signal")
        lines.append(f"    RECT {_m1_bar(cx)}")
    lines.append("END CELL")
    return lines


def _dff_cell():
    lines = ["CELL dff_x2 HEIGHT 2 WIDTH 800 CLASS std"]
    lines += _rails(800, 2)
    lines.append("  PIN D signal")
    lines.append(f"    RECT {_m1_bar(100)}")
    lines.append("  PIN Q signal")
    lines.append("    RECT M1 480 1040 520 1360")
    lines.append("END CELL")
    return lines


def _fill_cell():
    lines = ["CELL fill_x1 HEIGHT 1 WIDTH 200 CLASS filler"]
    lines += _rails(200, 1)
    lines.append("END CELL")
    return lines


def _lat_weak_cell(blocked=False):
    """Routing-prone cell: decoration blocks flank the tracks at y=120/680.

    A through-wire on the flanked track merges to exactly the m2_pinch
    geometry.  With ``blocked`` an M2 routing obstruction covers the gap so
    the router detours and the weakpoint can no longer form.
    """
    lines = ["CELL lat_weak HEIGHT 1 WIDTH 600 CLASS std"]
    lines += _rails(600, 1)
    for y0 in (40, 600):
        lines.append(f"  RECT M2 180 {y0} 420 {y0 + 50}")
        lines.append(f"  RECT M2 180 {y0 + 110} 420 {y0 + 160}")
    lines.append("  PIN A signal")
    lines.append(f"    RECT {_m1_bar(100)}")
    if blocked:
        lines.append("  OBS M2 180 90 420 150")
        lines.append("  OBS M2 180 650 420 710")
    lines.append("END CELL")
    return lines


def _cmp_gap_cell():
    """Four M2 pins; three match m2_quad polygons, the fourth differs in shape."""
    lines = ["CELL cmp_gap HEIGHT 1 WIDTH 600 CLASS std"]
    lines += _rails(600, 1)
    for pin_name, rect in (
            ("A", (140, 240, 280, 380)),
            ("B", (320, 240, 460, 380)),
            ("C", (140, 420, 280, 560)),
            ("D", (340, 440, 440, 540))):
        lines.append(f"  PIN {pin_name} signal")
        x0, y0, x1, y1 = rect
        lines.append(f"    RECT M2 {x0} {y0} {x1} {y1}")
    lines.append("END CELL")
    return lines


def _abut_cells():
    lines = ["CELL abut_a HEIGHT 1 WIDTH 400 CLASS edge_l"]
    lines += _rails(400, 1)
    lines.append("  PIN X1 signal")
    lines.append("    RECT M1 240 280 280 520")
    lines.append("  PIN X2 signal")
    lines.append("    RECT M1 320 280 360 520")
    lines.append("END CELL")
    lines.append("CELL abut_b HEIGHT 1 WIDTH 400 CLASS edge_r")
    lines += _rails(400, 1)
    lines.append("  PIN X signal")
    lines.append("    RECT M1 0 280 40 520")
    lines.append("END CELL")
    return lines


ALL_CELLS = ("inv_x1", "buf_x2", "nand2_x1", "dff_x2", "fill_x1",
             "lat_weak", "cmp_gap", "abut_a", "abut_b")

CLEAN_CELLS = ("inv_x1", "buf_x2", "nand2_x1", "dff_x2", "fill_x1")


def fixture_library_text(include=None, fix_weak=False) -> str:
    """Library file text for the requested cell subset (default: all)."""
    include = set(ALL_CELLS if include is None else include)
    unknown = include - set(ALL_CELLS)
    if unknown:
        raise ValueError(f"unknown fixture cells: {sorted(unknown)}")
    out = [_HEADER]
    out.extend(_LAYERS.strip().splitlines())
    builders = {
        "inv_x1": lambda: _simple_cell("inv_x1", 400, [("A", 100), ("Y", 300)]),
        "buf_x2": lambda: _simple_cell("buf_x2", 600, [("A", 100), ("Y", 500)]),
        "nand2_x1": lambda: _simple_cell(
            "nand2_x1", 600, [("A", 100), ("B", 300), ("Y", 500)]),
        "dff_x2": _dff_cell,
        "fill_x1": _fill_cell,
        "lat_weak": lambda: _lat_weak_cell(blocked=fix_weak),
        "cmp_gap": _cmp_gap_cell,
        "abut_a": _abut_cells,
        "abut_b": None,  # emitted together with abut_a
    }
    for name in ALL_CELLS:
        if name not in include or name == "abut_b":
            continue
        if name == "abut_a":
            block = _abut_cells()
            if "abut_b" not in include:
                end = block.index("CELL abut_b HEIGHT 1 WIDTH 400 CLASS edge_r")
                block = block[:end]
            out.extend(block)
        else:
            out.extend(builders[name]())
    if "abut_b" in include and "abut_a" not in include:
        block = _abut_cells()
        start = block.index("CELL abut_b HEIGHT 1 WIDTH 400 CLASS edge_r")
        out.extend(block[start:])
    if {"abut_a", "abut_b"} & include:
        out.append("FORBID_ABUT edge_r edge_r either")
    out.append("END LIBRARY")
    return "\n".join(out) + "\n"


def fixture_library(include=None, fix_weak=False) -> CellLibrary:
    return parse_library(fixture_library_text(include=include, fix_weak=fix_weak))


FIXTURE_DECK_TEXT = """\
DECK fixture
PATTERN m2_pinch TYPE 1 EXTENT 480 200
  SOLID M2 0 80 480 120
  SOLID M2 120 20 360 70
  SOLID M2 120 130 360 180
  REMOVABLE ALL
END PATTERN
PATTERN m2_quad TYPE 2 EXTENT 400 400
  SOLID M2 40 40 180 180
  SOLID M2 220 40 360 180
  SOLID M2 40 220 180 360
  SOLID M2 220 220 360 360
  REMOVABLE ALL
END PATTERN
PATTERN m1_trio TYPE 3 EXTENT 280 320
  SOLID M1 40 40 80 280
  SOLID M1 120 40 160 280
  SOLID M1 200 40 240 280
  REMOVABLE ALL
END PATTERN
END DECK
"""

# Five removable polygons spread over a via layer and a metal layer.
FIVE_POLY_DECK_TEXT = """\
DECK probe
PATTERN v1m2_probe TYPE 9 EXTENT 400 400
  SOLID M2 40 40 160 100
  SOLID M2 240 40 360 100
  SOLID M2 140 240 260 360
  SOLID V1 60 160 100 200
  SOLID V1 300 160 340 200
  REMOVABLE ALL
END PATTERN
END DECK
"""

FIXTURE_TECH_TEXT = """\
TRACKS M2 PITCH 80 OFFSET 40 DIR h WIDTH 40
TRACKS M3 PITCH 80 OFFSET 40 DIR v WIDTH 40
VIA M1/M2 CUT 40 40 ENC 10 10
VIA M2/M3 CUT 40 40 ENC 10 10
"""


def fixture_deck() -> PatternDeck:
    return parse_deck(FIXTURE_DECK_TEXT)
