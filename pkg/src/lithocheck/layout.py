"""Standard-cell library, placement and routed-design model with text parsers.

File formats are line-oriented structured text with integer nm coordinates;
writers sort statements lexicographically within each section so identical
designs serialize to identical bytes.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple

from .errors import ParseError, ValidationError
from .geometry import Orientation, Rect, RectSet, Transform

__all__ = [
    "Layer", "LayerKind", "RoutingDir", "SignalClass", "Pin", "Cell",
    "CellLibrary", "Instance", "Placement", "Via", "RoutedDesign",
    "parse_library", "serialize_library", "parse_placement", "write_placement",
    "parse_routed_design", "write_routed_design", "flatten",
    "instance_footprint", "transform_anchored", "check_placement",
    "check_connectivity", "check_shorts",
]


class LayerKind(enum.Enum):
    METAL = "metal"
    VIA = "via"


class RoutingDir(enum.Enum):
    HORIZONTAL = "h"
    VERTICAL = "v"
    NONE = "none"


class SignalClass(enum.Enum):
    SIGNAL = "signal"
    POWER = "power"
    GROUND = "ground"


class Layer(NamedTuple):
    name: str
    kind: LayerKind
    direction: RoutingDir


@dataclass(frozen=True)
class Pin:
    name: str
    signal_class: SignalClass
    shapes: dict  # layer name -> RectSet

    def layers(self):
        return sorted(self.shapes)


@dataclass(frozen=True)
class Cell:
    name: str
    pr_boundary: Rect           # anchored at (0, 0)
    height_rows: int
    shapes: dict                # layer name -> RectSet, non-pin geometry
    pins: tuple
    obstructions: dict          # layer name -> RectSet, router-only
    abut_class: str

    @property
    def width(self) -> int:
        return self.pr_boundary.x_hi

    @property
    def height(self) -> int:
        return self.pr_boundary.y_hi

    def pin(self, name: str) -> Pin:
        for p in self.pins:
            if p.name == name:
                return p
        raise KeyError(f"cell {self.name} has no pin {name}")

    def signal_pins(self):
        return [p for p in self.pins if p.signal_class is SignalClass.SIGNAL]


@dataclass(frozen=True)
class CellLibrary:
    name: str
    cells: tuple
    row_height: int
    site_width: int
    layers: tuple
    forbidden_abutments: tuple  # (class_a, class_b, side) with side in left/right/either

    def __post_init__(self):
        object.__setattr__(self, "_by_name", {c.name: c for c in self.cells})
        object.__setattr__(self, "_layer_by_name", {l.name: l for l in self.layers})

    def cell(self, name: str) -> Cell:
        try:
            return self._by_name[name]
        except KeyError:
            raise KeyError(f"unknown cell {name!r}") from None

    def layer(self, name: str) -> Layer:
        try:
            return self._layer_by_name[name]
        except KeyError:
            raise KeyError(f"unknown layer {name!r}") from None

    def layer_names(self):
        return [l.name for l in self.layers]

    def via_layer_between(self, lower: str, upper: str) -> str:
        """Via-kind layer sitting between two metals in declaration order."""
        names = self.layer_names()
        i, j = names.index(lower), names.index(upper)
        if i > j:
            i, j = j, i
        between = [l for l in self.layers[i + 1:j] if l.kind is LayerKind.VIA]
        if len(between) != 1:
            raise ValidationError(
                f"no unique via layer between {lower} and {upper}")
        return between[0].name


@dataclass(frozen=True)
class Instance:
    id: str
    cell: str
    transform: Transform


@dataclass(frozen=True)
class Placement:
    lib: CellLibrary
    instances: tuple
    rows: tuple                 # (y, Orientation) sorted by y
    die: Rect

    def instance(self, inst_id: str) -> Instance:
        for inst in self.instances:
            if inst.id == inst_id:
                return inst
        raise KeyError(f"unknown instance {inst_id!r}")


class Via(NamedTuple):
    lower: str
    upper: str
    cut: Rect
    enclosures: tuple           # ((layer, Rect), ...)


@dataclass(frozen=True)
class RoutedDesign:
    placement: Placement
    nets: tuple                 # (net name, ((inst id, pin name), ...))
    wires: dict                 # net -> layer -> RectSet
    vias: dict                  # net -> (Via, ...)
    design_id: str
    skipped: tuple = ()         # (net name, reason) for unroutable nets

    @property
    def lib(self) -> CellLibrary:
        return self.placement.lib


# ---------------------------------------------------------------------------
# transforms and flattening
# ---------------------------------------------------------------------------

def transform_anchored(pr_boundary: Rect, x: int, y: int,
                       orientation: Orientation) -> Transform:
    """Transform placing a cell so its oriented footprint's lower-left is (x, y)."""
    dx = x - (-pr_boundary.x_hi if orientation.sign_x < 0 else pr_boundary.x_lo)
    dy = y - (-pr_boundary.y_hi if orientation.sign_y < 0 else pr_boundary.y_lo)
    return Transform(orientation, dx, dy)


def instance_footprint(inst: Instance, lib: CellLibrary) -> Rect:
    return inst.transform.apply_rect(lib.cell(inst.cell).pr_boundary)


def _instance_layer_rects(inst: Instance, cell: Cell, layer: str):
    t = inst.transform
    rects = []
    shapes = cell.shapes.get(layer)
    if shapes:
        rects.extend(t.apply_rect(r) for r in shapes.rects)
    for pin in cell.pins:
        ps = pin.shapes.get(layer)
        if ps:
            rects.extend(t.apply_rect(r) for r in ps.rects)
    return rects


def _cell_geometry_bbox(cell: Cell) -> Rect:
    """Bounding box of everything the cell draws (shapes may overhang the PR)."""
    x_lo, y_lo, x_hi, y_hi = cell.pr_boundary
    sources = list(cell.shapes.values())
    for pin in cell.pins:
        sources.extend(pin.shapes.values())
    for rs in sources:
        b = rs.bbox()
        if b is not None:
            x_lo, y_lo = min(x_lo, b.x_lo), min(y_lo, b.y_lo)
            x_hi, y_hi = max(x_hi, b.x_hi), max(y_hi, b.y_hi)
    return Rect(x_lo, y_lo, x_hi, y_hi)


def flatten(design, layer: str, window: Rect) -> RectSet:
    """Merged geometry visible to the matcher on one layer, clipped to window.

    Includes transformed cell shapes and pins, routed wires, via cuts and via
    enclosures.  Cell obstructions are router-only and never appear here.
    """
    placement = design.placement if isinstance(design, RoutedDesign) else design
    placement.lib.layer(layer)  # raises on unknown layer
    bbox_cache = {}
    rects = []
    for inst in placement.instances:
        cell = placement.lib.cell(inst.cell)
        if cell.name not in bbox_cache:
            bbox_cache[cell.name] = _cell_geometry_bbox(cell)
        if not inst.transform.apply_rect(bbox_cache[cell.name]).overlaps(window):
            continue
        rects.extend(_instance_layer_rects(inst, cell, layer))
    if isinstance(design, RoutedDesign):
        for net in sorted(design.wires):
            per_layer = design.wires[net].get(layer)
            if per_layer:
                rects.extend(per_layer.rects)
        for net in sorted(design.vias):
            for via in design.vias[net]:
                cut_layer = placement.lib.via_layer_between(via.lower, via.upper)
                if cut_layer == layer:
                    rects.append(via.cut)
                for enc_layer, enc in via.enclosures:
                    if enc_layer == layer:
                        rects.append(enc)
    clipped = []
    for r in rects:
        c = r.intersection(window)
        if c is not None:
            clipped.append(c)
    return RectSet(clipped)


# ---------------------------------------------------------------------------
# legality / consistency checks
# ---------------------------------------------------------------------------

def _allowed_orientations(height_rows: int, row_orientation: Orientation):
    """Orientations legal for a cell whose base row has the given orientation.

    Even-height cells see both rail polarities, so any orientation works;
    odd-height cells must match the base row's polarity family.
    """
    if height_rows % 2 == 0:
        return set(Orientation)
    if row_orientation is Orientation.N:
        return {Orientation.N, Orientation.FN}
    return {Orientation.FS, Orientation.S}


def check_placement(placement: Placement) -> list:
    """Return a list of human-readable legality violations (empty == legal)."""
    lib = placement.lib
    problems = []
    rows = {y: o for y, o in placement.rows}
    footprints = []
    for inst in placement.instances:
        try:
            cell = lib.cell(inst.cell)
        except KeyError:
            problems.append(f"{inst.id}: unknown cell {inst.cell}")
            continue
        fp = instance_footprint(inst, lib)
        footprints.append(fp)
        if fp.x_lo % lib.site_width != 0:
            problems.append(f"{inst.id}: origin {fp.x_lo} off the site grid")
        if fp.y_lo not in rows:
            problems.append(f"{inst.id}: base y {fp.y_lo} is not a row")
            continue
        for k in range(cell.height_rows):
            ry = fp.y_lo + k * lib.row_height
            if ry not in rows:
                problems.append(f"{inst.id}: row at y={ry} missing")
        allowed = _allowed_orientations(cell.height_rows, rows[fp.y_lo])
        if inst.transform.orientation not in allowed:
            problems.append(
                f"{inst.id}: orientation {inst.transform.orientation} not "
                f"allowed on a {rows[fp.y_lo].value} row")
        if not placement.die.contains(fp):
            problems.append(f"{inst.id}: footprint outside the die")
    union = RectSet(footprints)
    if union.area != sum(f.area for f in footprints):
        problems.append("instance footprints overlap")
    return problems


def _net_geometry(design: RoutedDesign, net_name: str, terminals):
    """Per-layer geometry of a net: pin shapes, wires, via enclosures."""
    lib = design.lib
    per_layer: dict[str, list] = {}
    pin_groups = []  # list of per-layer rect lists, one per terminal
    for inst_id, pin_name in terminals:
        inst = design.placement.instance(inst_id)
        pin = lib.cell(inst.cell).pin(pin_name)
        group = {}
        for layer, shapes in pin.shapes.items():
            rects = [inst.transform.apply_rect(r) for r in shapes.rects]
            group.setdefault(layer, []).extend(rects)
            per_layer.setdefault(layer, []).extend(rects)
        pin_groups.append(group)
    for layer, shapes in design.wires.get(net_name, {}).items():
        per_layer.setdefault(layer, []).extend(shapes.rects)
    cuts = []
    for via in design.vias.get(net_name, ()):
        cut_layer = lib.via_layer_between(via.lower, via.upper)
        per_layer.setdefault(cut_layer, []).append(via.cut)
        cuts.append((via.lower, via.upper, via.cut))
        for enc_layer, enc in via.enclosures:
            per_layer.setdefault(enc_layer, []).append(enc)
    return per_layer, cuts, pin_groups


def check_connectivity(design: RoutedDesign, nets=None) -> list:
    """Nets whose flattened geometry is not a single connected component.

    Same-layer shapes connect on positive area or positive-length edge
    contact; via cuts connect the two metal layers they join.  A pin's own
    shapes count as internally connected (the cell wires them up below the
    modelled layers).
    """
    bad = []
    names = nets if nets is not None else [n for n, _ in design.nets]
    terms = dict(design.nets)
    for net in names:
        per_layer, cuts, pin_groups = _net_geometry(design, net, terms[net])
        comp_ids = {}  # (layer, index) -> node id
        nodes = 0
        comps_by_layer = {}
        for layer, rects in per_layer.items():
            comps = RectSet(rects).components()
            comps_by_layer[layer] = comps
            for i in range(len(comps)):
                comp_ids[(layer, i)] = nodes
                nodes += 1
        parent = list(range(nodes))

        def find(i):
            while parent[i] != i:
                parent[i] = parent[parent[i]]
                i = parent[i]
            return i

        def union(a, b):
            ra, rb = find(a), find(b)
            if ra != rb:
                parent[rb] = ra

        def comp_of(layer, rect):
            for i, comp in enumerate(comps_by_layer.get(layer, ())):
                if comp.overlaps_rect(rect):
                    return comp_ids[(layer, i)]
            return None

        for lower, upper, cut in cuts:
            lo = comp_of(lower, cut)
            hi = comp_of(upper, cut)
            if lo is not None and hi is not None:
                union(lo, hi)
        for group in pin_groups:
            anchor = None
            for layer, rects in group.items():
                for r in rects:
                    c = comp_of(layer, r)
                    if c is None:
                        continue
                    if anchor is None:
                        anchor = c
                    else:
                        union(anchor, c)
        roots = {find(i) for i in range(nodes)}
        if len(roots) > 1:
            bad.append(net)
    return bad


def check_shorts(design: RoutedDesign) -> list:
    """Same-layer violations: inter-net metal overlap or wires on obstructions."""
    problems = []
    terms = dict(design.nets)
    per_layer_rects: dict[str, list] = {}
    per_layer_area: dict[str, int] = {}
    for net in sorted(terms):
        per_layer, _, _ = _net_geometry(design, net, terms[net])
        for layer, rects in per_layer.items():
            merged = RectSet(rects)
            per_layer_rects.setdefault(layer, []).extend(merged.rects)
            per_layer_area[layer] = per_layer_area.get(layer, 0) + merged.area
    for layer in sorted(per_layer_rects):
        union = RectSet(per_layer_rects[layer])
        if union.area != per_layer_area[layer]:
            problems.append(f"inter-net overlap on {layer}")
    # routed metal vs cell obstructions
    obstacles: dict[str, list] = {}
    for inst in design.placement.instances:
        cell = design.lib.cell(inst.cell)
        for layer, obs in cell.obstructions.items():
            obstacles.setdefault(layer, []).extend(
                inst.transform.apply_rect(r) for r in obs.rects)
    for net in sorted(design.wires):
        for layer, shapes in design.wires[net].items():
            obs = obstacles.get(layer)
            if obs and RectSet(obs).overlaps(shapes):
                problems.append(f"net {net} wire over obstruction on {layer}")
    return problems


# ---------------------------------------------------------------------------
# library file format
# ---------------------------------------------------------------------------

def _tokens(text):
    for lineno, raw in enumerate(text.splitlines(), 1):
        body = raw.split("#", 1)[0]
        toks = body.split()
        if toks:
            yield lineno, raw, toks


def _int(tok, lineno, raw, what="coordinate"):
    try:
        return int(tok)
    except ValueError:
        col = raw.find(tok) + 1
        raise ParseError(f"expected integer {what}, got {tok!r}",
                         line=lineno, column=col) from None


def _rect(toks, lineno, raw):
    if len(toks) != 4:
        raise ParseError("RECT needs 4 coordinates", line=lineno)
    x1, y1, x2, y2 = (_int(t, lineno, raw) for t in toks)
    if x1 >= x2 or y1 >= y2:
        raise ParseError(
            f"degenerate or non-rectilinear rect ({x1},{y1},{x2},{y2})",
            line=lineno, column=raw.find(toks[0]) + 1)
    return Rect(x1, y1, x2, y2)


def parse_library(text: str, filename=None) -> CellLibrary:
    """Parse the structured-text library format into a validated CellLibrary."""
    name = None
    row_height = site_width = None
    layers = []
    cells = []
    forbids = []
    cur_cell = None   # dict collecting the open CELL block
    cur_pin = None
    try:
        for lineno, raw, toks in _tokens(text):
            kw = toks[0]
            if kw == "LIBRARY":
                if len(toks) != 6 or toks[2] != "ROWHEIGHT" or toks[4] != "SITEWIDTH":
                    raise ParseError("expected LIBRARY <name> ROWHEIGHT <int> SITEWIDTH <int>",
                                     line=lineno)
                name = toks[1]
                row_height = _int(toks[3], lineno, raw, "row height")
                site_width = _int(toks[5], lineno, raw, "site width")
                if row_height <= 0 or site_width <= 0:
                    raise ParseError("row height and site width must be positive",
                                     line=lineno)
            elif kw == "LAYER":
                if len(toks) != 4:
                    raise ParseError("expected LAYER <name> <metal|via> <h|v|none>",
                                     line=lineno)
                try:
                    layer = Layer(toks[1], LayerKind(toks[2]), RoutingDir(toks[3]))
                except ValueError:
                    raise ParseError(f"bad layer kind/direction {toks[2]!r} {toks[3]!r}",
                                     line=lineno) from None
                if any(l.name == layer.name for l in layers):
                    raise ParseError(f"duplicate layer {layer.name}", line=lineno)
                layers.append(layer)
            elif kw == "CELL":
                if cur_cell is not None:
                    raise ParseError("nested CELL", line=lineno)
                if (len(toks) != 8 or toks[2] != "HEIGHT" or toks[4] != "WIDTH"
                        or toks[6] != "CLASS"):
                    raise ParseError(
                        "expected CELL <name> HEIGHT <rows> WIDTH <int> CLASS <tag>",
                        line=lineno)
                cur_cell = {
                    "name": toks[1],
                    "rows": _int(toks[3], lineno, raw, "height"),
                    "width": _int(toks[5], lineno, raw, "width"),
                    "class": toks[7],
                    "shapes": {},
                    "pins": [],
                    "obs": {},
                    "line": lineno,
                }
                cur_pin = None
            elif kw == "RECT":
                if cur_cell is None:
                    raise ParseError("RECT outside CELL", line=lineno)
                if len(toks) != 6:
                    raise ParseError("expected RECT <layer> <x1> <y1> <x2> <y2>",
                                     line=lineno)
                layer_name = toks[1]
                if not any(l.name == layer_name for l in layers):
                    raise ParseError(f"unknown layer {layer_name}", line=lineno,
                                     column=raw.find(layer_name) + 1)
                r = _rect(toks[2:], lineno, raw)
                target = cur_pin["shapes"] if cur_pin is not None else cur_cell["shapes"]
                target.setdefault(layer_name, []).append(r)
            elif kw == "PIN":
                if cur_cell is None:
                    raise ParseError("PIN outside CELL", line=lineno)
                if len(toks) != 3:
                    raise ParseError("expected PIN <name> <signal|power|ground>",
                                     line=lineno)
                try:
                    sig = SignalClass(toks[2])
                except ValueError:
                    raise ParseError(f"bad signal class {toks[2]!r}",
                                     line=lineno) from None
                cur_pin = {"name": toks[1], "class": sig, "shapes": {}}
                cur_cell["pins"].append(cur_pin)
            elif kw == "OBS":
                if cur_cell is None:
                    raise ParseError("OBS outside CELL", line=lineno)
                if len(toks) != 6:
                    raise ParseError("expected OBS <layer> <x1> <y1> <x2> <y2>",
                                     line=lineno)
                r = _rect(toks[2:], lineno, raw)
                cur_cell["obs"].setdefault(toks[1], []).append(r)
                cur_pin = None
            elif kw == "END" and len(toks) == 2 and toks[1] == "CELL":
                if cur_cell is None:
                    raise ParseError("END CELL without CELL", line=lineno)
                cells.append(_finish_cell(cur_cell, row_height, site_width))
                cur_cell = None
                cur_pin = None
            elif kw == "FORBID_ABUT":
                if len(toks) != 4 or toks[3] not in ("left", "right", "either"):
                    raise ParseError(
                        "expected FORBID_ABUT <classA> <classB> <left|right|either>",
                        line=lineno)
                forbids.append((toks[1], toks[2], toks[3]))
            elif kw == "END" and len(toks) == 2 and toks[1] == "LIBRARY":
                pass
            else:
                raise ParseError(f"unknown statement {kw!r}", line=lineno, column=1)
    except ParseError as exc:
        if filename and not exc.filename:
            raise ParseError(str(exc), filename=filename) from None
        raise
    if name is None:
        raise ParseError("missing LIBRARY header", line=1)
    if cur_cell is not None:
        raise ParseError(f"CELL {cur_cell['name']} not closed", line=cur_cell["line"])
    if not cells:
        raise ValidationError("library must contain >=1 cell")
    seen = set()
    for c in cells:
        if c.name in seen:
            raise ValidationError(f"duplicate cell {c.name}")
        seen.add(c.name)
    classes = {c.abut_class for c in cells}
    for a, b, _side in forbids:
        for tag in (a, b):
            if tag not in classes:
                raise ValidationError(
                    f"FORBID_ABUT references unknown abut class {tag!r}")
    return CellLibrary(name=name, cells=tuple(cells), row_height=row_height,
                       site_width=site_width, layers=tuple(layers),
                       forbidden_abutments=tuple(forbids))


def _finish_cell(spec, row_height, site_width) -> Cell:
    if row_height is None:
        raise ParseError("CELL before LIBRARY header", line=spec["line"])
    name = spec["name"]
    rows = spec["rows"]
    width = spec["width"]
    if rows <= 0:
        raise ValidationError(f"cell {name}: height must be >=1 row")
    if width <= 0 or width % site_width != 0:
        raise ValidationError(
            f"cell {name}: width {width} is not a positive multiple of the "
            f"site width {site_width}")
    pr = Rect(0, 0, width, rows * row_height)
    pins = []
    for p in spec["pins"]:
        if not p["shapes"]:
            raise ValidationError(f"cell {name}: pin {p['name']} has no shapes")
        shapes = {layer: RectSet(rects) for layer, rects in p["shapes"].items()}
        for layer, rs in shapes.items():
            for r in rs.rects:
                if not pr.contains(r):
                    raise ValidationError(
                        f"cell {name}: pin {p['name']} shape on {layer} "
                        f"outside the PR boundary")
        pins.append(Pin(name=p["name"], signal_class=p["class"], shapes=shapes))
    return Cell(
        name=name,
        pr_boundary=pr,
        height_rows=rows,
        shapes={layer: RectSet(rects) for layer, rects in spec["shapes"].items()},
        pins=tuple(pins),
        obstructions={layer: RectSet(rects) for layer, rects in spec["obs"].items()},
        abut_class=spec["class"],
    )


def serialize_library(lib: CellLibrary) -> str:
    out = [f"LIBRARY {lib.name} ROWHEIGHT {lib.row_height} SITEWIDTH {lib.site_width}"]
    for layer in lib.layers:
        out.append(f"LAYER {layer.name} {layer.kind.value} {layer.direction.value}")
    for cell in sorted(lib.cells, key=lambda c: c.name):
        out.append(f"CELL {cell.name} HEIGHT {cell.height_rows} "
                   f"WIDTH {cell.width} CLASS {cell.abut_class}")
        for layer in sorted(cell.shapes):
            for r in cell.shapes[layer].rects:
                out.append(f"  RECT {layer} {r.x_lo} {r.y_lo} {r.x_hi} {r.y_hi}")
        for pin in cell.pins:
            out.append(f"  PIN {pin.name} {pin.signal_class.value}")
            for layer in sorted(pin.shapes):
                for r in pin.shapes[layer].rects:
                    out.append(f"    RECT {layer} {r.x_lo} {r.y_lo} {r.x_hi} {r.y_hi}")
        for layer in sorted(cell.obstructions):
            for r in cell.obstructions[layer].rects:
                out.append(f"  OBS {layer} {r.x_lo} {r.y_lo} {r.x_hi} {r.y_hi}")
        out.append("END CELL")
    for a, b, side in sorted(lib.forbidden_abutments):
        out.append(f"FORBID_ABUT {a} {b} {side}")
    out.append("END LIBRARY")
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------------------
# placement / routed design file format
# ---------------------------------------------------------------------------

def _design_lines(text):
    sections = {"DESIGN": [], "DIE": [], "ROW": [], "PLACE": [], "NET": [],
                "WIRE": [], "VIA": []}
    for lineno, raw, toks in _tokens(text):
        kw = toks[0]
        if kw not in sections:
            raise ParseError(f"unknown statement {kw!r}", line=lineno, column=1)
        sections[kw].append((lineno, raw, toks))
    return sections


def _parse_placement_sections(sections, lib):
    if len(sections["DIE"]) != 1:
        raise ParseError("exactly one DIE line required", line=1)
    lineno, raw, toks = sections["DIE"][0]
    die = _rect(toks[1:], lineno, raw)
    rows = []
    for lineno, raw, toks in sections["ROW"]:
        if len(toks) != 3:
            raise ParseError("expected ROW <y> <N|FS>", line=lineno)
        try:
            o = Orientation(toks[2])
        except ValueError:
            raise ParseError(f"bad row orientation {toks[2]!r}", line=lineno) from None
        if o not in (Orientation.N, Orientation.FS):
            raise ParseError("row orientation must be N or FS", line=lineno)
        rows.append((_int(toks[1], lineno, raw, "row y"), o))
    rows.sort(key=lambda r: r[0])
    instances = []
    seen = set()
    for lineno, raw, toks in sections["PLACE"]:
        if len(toks) != 6:
            raise ParseError("expected PLACE <inst> <cell> <x> <y> <orient>",
                             line=lineno)
        inst_id, cell_name = toks[1], toks[2]
        if inst_id in seen:
            raise ParseError(f"duplicate instance {inst_id}", line=lineno)
        seen.add(inst_id)
        try:
            lib.cell(cell_name)
        except KeyError:
            raise ParseError(f"unknown cell {cell_name}", line=lineno,
                             column=raw.find(cell_name) + 1) from None
        try:
            orientation = Orientation(toks[5])
        except ValueError:
            raise ParseError(f"bad orientation {toks[5]!r}", line=lineno) from None
        x = _int(toks[3], lineno, raw)
        y = _int(toks[4], lineno, raw)
        instances.append(Instance(inst_id, cell_name,
                                  Transform(orientation, x, y)))
    return Placement(lib=lib, instances=tuple(instances), rows=tuple(rows), die=die)


def parse_placement(text: str, lib: CellLibrary) -> Placement:
    sections = _design_lines(text)
    for kw in ("NET", "WIRE", "VIA"):
        if sections[kw]:
            lineno = sections[kw][0][0]
            raise ParseError(f"{kw} line in a placement file", line=lineno)
    return _parse_placement_sections(sections, lib)


def write_placement(placement: Placement, design_id=None) -> str:
    out = []
    if design_id:
        out.append(f"DESIGN {design_id}")
    d = placement.die
    out.append(f"DIE {d.x_lo} {d.y_lo} {d.x_hi} {d.y_hi}")
    out.extend(sorted(f"ROW {y} {o.value}" for y, o in placement.rows))
    out.extend(sorted(
        f"PLACE {i.id} {i.cell} {i.transform.dx} {i.transform.dy} "
        f"{i.transform.orientation.value}" for i in placement.instances))
    return "\n".join(out) + "\n"


def parse_routed_design(text: str, lib: CellLibrary) -> RoutedDesign:
    sections = _design_lines(text)
    placement = _parse_placement_sections(sections, lib)
    design_id = "design"
    if sections["DESIGN"]:
        lineno, _, toks = sections["DESIGN"][0]
        if len(toks) != 2:
            raise ParseError("expected DESIGN <id>", line=lineno)
        design_id = toks[1]
    inst_ids = {i.id for i in placement.instances}
    nets = []
    net_names = set()
    for lineno, raw, toks in sections["NET"]:
        if len(toks) < 4:
            raise ParseError("NET needs a name and >=2 terminals", line=lineno)
        net = toks[1]
        if net in net_names:
            raise ParseError(f"duplicate net {net}", line=lineno)
        net_names.add(net)
        terminals = []
        for term in toks[2:]:
            if ":" not in term:
                raise ParseError(f"bad terminal {term!r}", line=lineno,
                                 column=raw.find(term) + 1)
            inst_id, pin_name = term.split(":", 1)
            if inst_id not in inst_ids:
                raise ParseError(f"terminal references unknown instance {inst_id}",
                                 line=lineno)
            terminals.append((inst_id, pin_name))
        nets.append((net, tuple(terminals)))
    nets.sort(key=lambda n: n[0])
    wires: dict[str, dict[str, list]] = {}
    for lineno, raw, toks in sections["WIRE"]:
        if len(toks) != 7:
            raise ParseError("expected WIRE <net> <layer> <x1> <y1> <x2> <y2>",
                             line=lineno)
        net, layer = toks[1], toks[2]
        if net not in net_names:
            raise ParseError(f"WIRE references unknown net {net}", line=lineno)
        lib.layer(layer)
        wires.setdefault(net, {}).setdefault(layer, []).append(
            _rect(toks[3:], lineno, raw))
    vias: dict[str, list] = {}
    for lineno, raw, toks in sections["VIA"]:
        if len(toks) != 7 or "/" not in toks[2]:
            raise ParseError("expected VIA <net> <lower>/<upper> <x1> <y1> <x2> <y2>",
                             line=lineno)
        net = toks[1]
        if net not in net_names:
            raise ParseError(f"VIA references unknown net {net}", line=lineno)
        lower, upper = toks[2].split("/", 1)
        lib.via_layer_between(lower, upper)
        vias.setdefault(net, []).append(
            Via(lower, upper, _rect(toks[3:], lineno, raw), ()))
    return RoutedDesign(
        placement=placement,
        nets=tuple(nets),
        wires={net: {layer: RectSet(rects) for layer, rects in per.items()}
               for net, per in wires.items()},
        vias={net: tuple(vs) for net, vs in vias.items()},
        design_id=design_id,
    )


def write_routed_design(design: RoutedDesign) -> str:
    """Serialize a routed design.

    Via enclosures are net metal, so they are emitted as WIRE statements;
    VIA lines carry the cuts only (the format does not describe enclosure
    rects).  Re-parsing therefore yields the same flattened geometry and
    connectivity, with enclosure metal folded into the wires map.
    """
    out = [f"DESIGN {design.design_id}"]
    d = design.placement.die
    out.append(f"DIE {d.x_lo} {d.y_lo} {d.x_hi} {d.y_hi}")
    out.extend(sorted(f"ROW {y} {o.value}" for y, o in design.placement.rows))
    out.extend(sorted(
        f"PLACE {i.id} {i.cell} {i.transform.dx} {i.transform.dy} "
        f"{i.transform.orientation.value}" for i in design.placement.instances))
    out.extend(sorted(
        f"NET {name} " + " ".join(f"{i}:{p}" for i, p in terms)
        for name, terms in design.nets))
    wire_lines = []
    for net in sorted(set(design.wires) | set(design.vias)):
        merged: dict[str, list] = {}
        for layer, shapes in design.wires.get(net, {}).items():
            merged.setdefault(layer, []).extend(shapes.rects)
        for via in design.vias.get(net, ()):
            for enc_layer, enc in via.enclosures:
                merged.setdefault(enc_layer, []).append(enc)
        for layer, rects in merged.items():
            for r in RectSet(rects).rects:
                wire_lines.append(
                    f"WIRE {net} {layer} {r.x_lo} {r.y_lo} {r.x_hi} {r.y_hi}")
    out.extend(sorted(wire_lines))
    out.extend(sorted(
        f"VIA {net} {v.lower}/{v.upper} {v.cut.x_lo} {v.cut.y_lo} "
        f"{v.cut.x_hi} {v.cut.y_hi}"
        for net, vs in design.vias.items() for v in vs))
    return "\n".join(out) + "\n"
