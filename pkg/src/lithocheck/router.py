"""Deterministic grid maze router (non-timing flow stand-in).

The routing graph is the lattice of horizontal-layer tracks crossed with
vertical-layer tracks.  Nets route sequentially in ascending (half-perimeter
wirelength, net name) order via A* with lexicographic (layer, y, x)
tie-breaking; committed nets become obstacles for later nets, which makes
the whole run a pure function of its inputs.

Blocking model: an element (node pad, edge segment, via stack) is unusable
when its geometry overlaps any obstacle on the same layer expanded by the
spacing ``s`` (default: the wire width).  Obstacles are cell obstructions,
previously routed nets, and every pin that does not belong to the net being
routed.  Non-pin cell shapes are intentionally NOT obstacles: wires may run
over or against them, which is exactly the cell-plus-router interaction the
matcher is looking for.
"""

from __future__ import annotations

import heapq
from bisect import bisect_left, bisect_right
from dataclasses import dataclass, field

import numpy as np

from .errors import GridError, ParseError, RouteError, ValidationError
from .geometry import Rect, RectSet
from .layout import (
    CellLibrary,
    LayerKind,
    Placement,
    RoutedDesign,
    RoutingDir,
    Via,
)
from .scenarios import GeneratedNetlist

__all__ = ["TrackSpec", "ViaSpec", "RouteTech", "parse_tech", "RoutingGrid",
           "build_grid", "route"]

DEFAULT_VIA_PENALTY = 3
DEFAULT_MAX_SKIP = 0.05


@dataclass(frozen=True)
class TrackSpec:
    layer: str
    pitch: int
    offset: int
    direction: RoutingDir
    width: int


@dataclass(frozen=True)
class ViaSpec:
    lower: str
    upper: str
    cut_w: int
    cut_h: int
    enc_lower: int
    enc_upper: int
    cut_layer: str

    def component_half_extents(self, layer: str):
        """(half width, half height) of this via's geometry on ``layer``."""
        if layer == self.cut_layer:
            return self.cut_w // 2, self.cut_h // 2
        if layer == self.lower:
            return self.cut_w // 2 + self.enc_lower, self.cut_h // 2 + self.enc_lower
        if layer == self.upper:
            return self.cut_w // 2 + self.enc_upper, self.cut_h // 2 + self.enc_upper
        return None

    def geometry_at(self, x: int, y: int):
        cut = Rect(x - self.cut_w // 2, y - self.cut_h // 2,
                   x + self.cut_w // 2, y + self.cut_h // 2)
        return Via(self.lower, self.upper, cut, (
            (self.lower, cut.expanded(self.enc_lower)),
            (self.upper, cut.expanded(self.enc_upper)),
        ))


@dataclass(frozen=True)
class RouteTech:
    tracks: dict               # layer -> TrackSpec
    vias: tuple                # ViaSpec, ...
    via_penalty: int = DEFAULT_VIA_PENALTY

    def spacing(self) -> int:
        return max(t.width for t in self.tracks.values())


def parse_tech(text: str, lib: CellLibrary, filename=None) -> RouteTech:
    tracks = {}
    vias = []
    try:
        for lineno, raw in enumerate(text.splitlines(), 1):
            toks = raw.split("#", 1)[0].split()
            if not toks:
                continue
            if toks[0] == "TRACKS":
                if (len(toks) != 10 or toks[2] != "PITCH" or toks[4] != "OFFSET"
                        or toks[6] != "DIR" or toks[8] != "WIDTH"):
                    raise ParseError(
                        "expected TRACKS <layer> PITCH <int> OFFSET <int> "
                        "DIR <h|v> WIDTH <int>", line=lineno)
                layer = lib.layer(toks[1])
                if layer.kind is not LayerKind.METAL:
                    raise ValidationError(f"TRACKS on non-metal layer {toks[1]}")
                direction = RoutingDir(toks[7])
                pitch, offset, width = int(toks[3]), int(toks[5]), int(toks[9])
                if width <= 0 or width % 2 != 0:
                    raise ValidationError(
                        f"wire width on {toks[1]} must be a positive even number")
                if pitch <= width:
                    raise ValidationError(f"pitch must exceed wire width on {toks[1]}")
                tracks[toks[1]] = TrackSpec(toks[1], pitch, offset, direction, width)
            elif toks[0] == "VIA":
                if len(toks) != 8 or "/" not in toks[1] or toks[2] != "CUT" \
                        or toks[5] != "ENC":
                    raise ParseError(
                        "expected VIA <lower>/<upper> CUT <w> <h> ENC <lo> <hi>",
                        line=lineno)
                lower, upper = toks[1].split("/", 1)
                cut_layer = lib.via_layer_between(lower, upper)
                cut_w, cut_h = int(toks[3]), int(toks[4])
                enc_lo, enc_hi = int(toks[6]), int(toks[7])
                if cut_w <= 0 or cut_h <= 0 or cut_w % 2 or cut_h % 2:
                    raise ValidationError("via cut sides must be positive and even")
                if enc_lo < 0 or enc_hi < 0:
                    raise ValidationError("via enclosures must be >= 0")
                vias.append(ViaSpec(lower, upper, cut_w, cut_h, enc_lo, enc_hi,
                                    cut_layer))
            else:
                raise ParseError(f"unknown statement {toks[0]!r}", line=lineno)
    except (ParseError, ValidationError) as exc:
        if filename and isinstance(exc, ParseError) and not exc.filename:
            raise ParseError(str(exc), filename=filename) from None
        raise
    if not tracks:
        raise ValidationError("tech defines no routing tracks")
    dirs = {t.direction for t in tracks.values()}
    if dirs != {RoutingDir.HORIZONTAL, RoutingDir.VERTICAL}:
        raise ValidationError("need at least one horizontal and one vertical layer")
    return RouteTech(tracks=tracks, vias=tuple(vias))


# ---------------------------------------------------------------------------
# grid
# ---------------------------------------------------------------------------

class RoutingGrid:
    """Track lattice plus occupancy state.

    Node (L, iy, ix) is the point (xs[ix], ys[iy]) on routing layer L.
    Horizontal layers own edges along x, vertical layers along y.  ``block``
    arrays hold obstructions plus committed routing; ``pin_cnt`` arrays count
    pin claims so a net can lift its own pins' blockage while routing.
    """

    def __init__(self, lib, placement, tech, spacing=None):
        self.lib = lib
        self.placement = placement
        self.tech = tech
        self.spacing = tech.spacing() if spacing is None else spacing
        die = placement.die
        self.die = die
        inset = max([t.width // 2 for t in tech.tracks.values()] +
                    [max(v.component_half_extents(l))
                     for v in tech.vias
                     for l in (v.lower, v.upper, v.cut_layer)])
        xs, ys = set(), set()
        for t in tech.tracks.values():
            lo_x, hi_x = die.x_lo + inset, die.x_hi - inset
            lo_y, hi_y = die.y_lo + inset, die.y_hi - inset
            if t.direction is RoutingDir.VERTICAL:
                first = t.offset + -(-(lo_x - t.offset) // t.pitch) * t.pitch
                xs.update(range(first, hi_x + 1, t.pitch))
            else:
                first = t.offset + -(-(lo_y - t.offset) // t.pitch) * t.pitch
                ys.update(range(first, hi_y + 1, t.pitch))
        self.xs = sorted(xs)
        self.ys = sorted(ys)
        if not self.xs or not self.ys:
            raise GridError("die is smaller than one routing track")
        self.nx, self.ny = len(self.xs), len(self.ys)
        self.layers = [name for name in lib.layer_names() if name in tech.tracks]
        self.layer_idx = {name: i for i, name in enumerate(self.layers)}
        self.width = {name: tech.tracks[name].width for name in self.layers}
        self.direction = {name: tech.tracks[name].direction for name in self.layers}
        self.valid = {}
        for name in self.layers:
            t = tech.tracks[name]
            if t.direction is RoutingDir.HORIZONTAL:
                mask = np.array([(y - t.offset) % t.pitch == 0 for y in self.ys])
            else:
                mask = np.array([(x - t.offset) % t.pitch == 0 for x in self.xs])
            self.valid[name] = mask
        shape = (self.ny, self.nx)
        self.node_block = {n: np.zeros(shape, dtype=bool) for n in self.layers}
        self.node_pins = {n: np.zeros(shape, dtype=np.int16) for n in self.layers}
        self.edge_block = {}
        self.edge_pins = {}
        for name in self.layers:
            eshape = ((self.ny, self.nx - 1)
                      if self.direction[name] is RoutingDir.HORIZONTAL
                      else (self.ny - 1, self.nx))
            self.edge_block[name] = np.zeros(eshape, dtype=bool)
            self.edge_pins[name] = np.zeros(eshape, dtype=np.int16)
        self.via_block = [np.zeros(shape, dtype=bool) for _ in tech.vias]
        self.via_pins = [np.zeros(shape, dtype=np.int16) for _ in tech.vias]
        # routing-layer via transitions, lower-layer-first
        self.graph_vias = [
            (i, v) for i, v in enumerate(tech.vias)
            if v.lower in self.layer_idx and v.upper in self.layer_idx]
        self.pin_marks = {}     # (inst id, pin name) -> [(kind, key, slices)]
        self._populate(placement)

    # -- index helpers ------------------------------------------------------

    def _x_range(self, lo: int, hi: int):
        """Indices ix with lo < xs[ix] < hi."""
        return bisect_right(self.xs, lo), bisect_left(self.xs, hi)

    def _y_range(self, lo: int, hi: int):
        return bisect_right(self.ys, lo), bisect_left(self.ys, hi)

    def _node_slices(self, layer: str, rect: Rect, extra: int):
        w2 = self.width[layer] // 2 + extra
        x0, x1 = self._x_range(rect.x_lo - w2, rect.x_hi + w2)
        y0, y1 = self._y_range(rect.y_lo - w2, rect.y_hi + w2)
        return y0, y1, x0, x1

    def _edge_slices(self, layer: str, rect: Rect, extra: int):
        w2 = self.width[layer] // 2 + extra
        if self.direction[layer] is RoutingDir.HORIZONTAL:
            # edge k spans xs[k]-w2 .. xs[k+1]+w2 at ys[iy]+-w2
            y0, y1 = self._y_range(rect.y_lo - w2, rect.y_hi + w2)
            klo = max(0, bisect_right(self.xs, rect.x_lo - w2) - 1)
            khi = min(self.nx - 1, bisect_left(self.xs, rect.x_hi + w2))
            return y0, y1, klo, khi
        y_klo = max(0, bisect_right(self.ys, rect.y_lo - w2) - 1)
        y_khi = min(self.ny - 1, bisect_left(self.ys, rect.y_hi + w2))
        x0, x1 = self._x_range(rect.x_lo - w2, rect.x_hi + w2)
        return y_klo, y_khi, x0, x1

    def _via_slices(self, vspec: ViaSpec, layer: str, rect: Rect, extra: int):
        half = vspec.component_half_extents(layer)
        if half is None:
            return None
        hx, hy = half[0] + extra, half[1] + extra
        x0, x1 = self._x_range(rect.x_lo - hx, rect.x_hi + hx)
        y0, y1 = self._y_range(rect.y_lo - hy, rect.y_hi + hy)
        return y0, y1, x0, x1

    # -- occupancy ----------------------------------------------------------

    def _mark(self, layer: str, rect: Rect, pins_for=None):
        """Mark geometry on ``layer`` as an obstacle (or a pin claim)."""
        s = self.spacing
        marks = []
        if layer in self.layer_idx:
            y0, y1, x0, x1 = self._node_slices(layer, rect, s)
            if y0 < y1 and x0 < x1:
                target = self.node_pins if pins_for else self.node_block
                if pins_for:
                    target[layer][y0:y1, x0:x1] += 1
                    marks.append(("node", layer, (y0, y1, x0, x1)))
                else:
                    target[layer][y0:y1, x0:x1] = True
            ey0, ey1, ex0, ex1 = self._edge_slices(layer, rect, s)
            if ey0 < ey1 and ex0 < ex1:
                if pins_for:
                    self.edge_pins[layer][ey0:ey1, ex0:ex1] += 1
                    marks.append(("edge", layer, (ey0, ey1, ex0, ex1)))
                else:
                    self.edge_block[layer][ey0:ey1, ex0:ex1] = True
        for vi, vspec in enumerate(self.tech.vias):
            slices = self._via_slices(vspec, layer, rect, s)
            if slices is None:
                continue
            y0, y1, x0, x1 = slices
            if y0 < y1 and x0 < x1:
                if pins_for:
                    self.via_pins[vi][y0:y1, x0:x1] += 1
                    marks.append(("via", vi, (y0, y1, x0, x1)))
                else:
                    self.via_block[vi][y0:y1, x0:x1] = True
        if pins_for:
            self.pin_marks.setdefault(pins_for, []).extend(marks)

    def _populate(self, placement):
        for inst in placement.instances:
            cell = self.lib.cell(inst.cell)
            t = inst.transform
            for layer, obs in cell.obstructions.items():
                for r in obs.rects:
                    self._mark(layer, t.apply_rect(r))
            for pin in cell.pins:
                key = (inst.id, pin.name)
                for layer, shapes in pin.shapes.items():
                    for r in shapes.rects:
                        self._mark(layer, t.apply_rect(r), pins_for=key)

    def commit_obstacle(self, layer: str, rect: Rect):
        self._mark(layer, rect)

    def lift_pins(self, keys):
        for key in keys:
            for kind, which, (y0, y1, x0, x1) in self.pin_marks.get(key, ()):
                arr = {"node": self.node_pins, "edge": self.edge_pins,
                       "via": self.via_pins}[kind]
                arr[which][y0:y1, x0:x1] -= 1

    def restore_pins(self, keys):
        for key in keys:
            for kind, which, (y0, y1, x0, x1) in self.pin_marks.get(key, ()):
                arr = {"node": self.node_pins, "edge": self.edge_pins,
                       "via": self.via_pins}[kind]
                arr[which][y0:y1, x0:x1] += 1

    # -- geometry -----------------------------------------------------------

    def pad_rect(self, layer: str, iy: int, ix: int) -> Rect:
        w2 = self.width[layer] // 2
        x, y = self.xs[ix], self.ys[iy]
        return Rect(x - w2, y - w2, x + w2, y + w2)

    def segment_rect(self, layer: str, iy: int, ix: int, jy: int, jx: int) -> Rect:
        w2 = self.width[layer] // 2
        x0, x1 = sorted((self.xs[ix], self.xs[jx]))
        y0, y1 = sorted((self.ys[iy], self.ys[jy]))
        return Rect(x0 - w2, y0 - w2, x1 + w2, y1 + w2)


def build_grid(lib: CellLibrary, placement: Placement, tech: RouteTech,
               spacing=None) -> RoutingGrid:
    return RoutingGrid(lib, placement, tech, spacing=spacing)


# ---------------------------------------------------------------------------
# routing
# ---------------------------------------------------------------------------

@dataclass
class _Tap:
    layer: str
    iy: int
    ix: int
    cost: int
    via_spec_idx: int | None    # via dropped onto the pin, if any

    def node(self):
        return (self.layer, self.iy, self.ix)


def _pin_taps(grid: RoutingGrid, inst, pin):
    """Lattice entry points for one pin, ordered deterministically."""
    taps = []
    t = inst.transform
    for layer, shapes in sorted(pin.shapes.items()):
        rects = [t.apply_rect(r) for r in shapes.rects]
        if layer in grid.layer_idx:
            w2 = grid.width[layer] // 2
            for r in rects:
                x0, x1 = grid._x_range(r.x_lo - w2, r.x_hi + w2)
                y0, y1 = grid._y_range(r.y_lo - w2, r.y_hi + w2)
                for iy in range(y0, y1):
                    for ix in range(x0, x1):
                        if _node_valid(grid, layer, iy, ix):
                            taps.append(_Tap(layer, iy, ix, 0, None))
        else:
            for vi, vspec in enumerate(grid.tech.vias):
                if vspec.lower == layer and vspec.upper in grid.layer_idx:
                    target = vspec.upper
                elif vspec.upper == layer and vspec.lower in grid.layer_idx:
                    target = vspec.lower
                else:
                    continue
                hx, hy = vspec.component_half_extents(layer)
                for r in rects:
                    x0, x1 = grid._x_range(r.x_lo - hx, r.x_hi + hx)
                    y0, y1 = grid._y_range(r.y_lo - hy, r.y_hi + hy)
                    for iy in range(y0, y1):
                        for ix in range(x0, x1):
                            if not _node_valid(grid, target, iy, ix):
                                continue
                            taps.append(_Tap(target, iy, ix,
                                             grid.tech.via_penalty, vi))
    taps.sort(key=lambda tp: (grid.layer_idx[tp.layer], tp.iy, tp.ix,
                              -1 if tp.via_spec_idx is None else tp.via_spec_idx))
    # drop duplicate nodes, keeping the cheapest deterministic entry
    unique = {}
    for tp in taps:
        unique.setdefault(tp.node(), tp)
    return list(unique.values())


def _node_valid(grid, layer, iy, ix):
    if grid.direction[layer] is RoutingDir.HORIZONTAL:
        return bool(grid.valid[layer][iy])
    return bool(grid.valid[layer][ix])


class _NetState:
    """Effective occupancy snapshots for one net (own pins lifted)."""

    def __init__(self, grid: RoutingGrid):
        self.grid = grid
        self.node = {n: (grid.node_block[n] | (grid.node_pins[n] > 0)).tobytes()
                     for n in grid.layers}
        self.edge = {n: (grid.edge_block[n] | (grid.edge_pins[n] > 0)).tobytes()
                     for n in grid.layers}
        self.via = [(grid.via_block[i] | (grid.via_pins[i] > 0)).tobytes()
                    for i in range(len(grid.tech.vias))]

    def node_free(self, layer, iy, ix):
        return not self.node[layer][iy * self.grid.nx + ix]

    def edge_free(self, layer, ey, ex):
        if self.grid.direction[layer] is RoutingDir.HORIZONTAL:
            return not self.edge[layer][ey * (self.grid.nx - 1) + ex]
        return not self.edge[layer][ey * self.grid.nx + ex]

    def via_free(self, vi, iy, ix):
        return not self.via[vi][iy * self.grid.nx + ix]


def _astar(grid: RoutingGrid, state: _NetState, sources, goals):
    """Deterministic A* from source taps to goal nodes.

    sources: list of (_Tap); goals: dict node -> terminal cost.
    Returns (total cost, path nodes, start tap, goal node) or None.
    """
    nx, ny = grid.nx, grid.ny
    dist = {}
    parent = {}
    heap = []
    goal_idx = [(grid.layer_idx[l], iy, ix) for (l, iy, ix) in goals]

    def h(li, iy, ix):
        best = None
        for gl, gy, gx in goal_idx:
            d = abs(gy - iy) + abs(gx - ix)
            if best is None or d < best:
                best = d
        return best or 0

    start_taps = {}
    for tap in sources:
        node = (grid.layer_idx[tap.layer], tap.iy, tap.ix)
        if not state.node_free(tap.layer, tap.iy, tap.ix):
            continue
        if tap.via_spec_idx is not None and \
                not state.via_free(tap.via_spec_idx, tap.iy, tap.ix):
            continue
        if node not in dist or tap.cost < dist[node]:
            dist[node] = tap.cost
            start_taps[node] = tap
            heapq.heappush(heap, (tap.cost + h(*node), node[0], node[1], node[2]))
    best_total = None
    best_goal = None
    settled = set()
    while heap:
        f, li, iy, ix = heapq.heappop(heap)
        if best_total is not None and f >= best_total:
            break
        node = (li, iy, ix)
        if node in settled:
            continue
        settled.add(node)
        g = dist[node]
        layer = grid.layers[li]
        if node in goals:
            total = g + goals[node]
            if best_total is None or total < best_total or \
                    (total == best_total and node < best_goal):
                best_total, best_goal = total, node
        # along the preferred direction
        if grid.direction[layer] is RoutingDir.HORIZONTAL:
            steps = ((0, -1), (0, 1))
        else:
            steps = ((-1, 0), (1, 0))
        for dy, dx in steps:
            jy, jx = iy + dy, ix + dx
            if not (0 <= jy < ny and 0 <= jx < nx):
                continue
            ey, ex = min(iy, jy), min(ix, jx)
            if not state.edge_free(layer, ey, ex):
                continue
            if not state.node_free(layer, jy, jx):
                continue
            nxt = (li, jy, jx)
            ng = g + 1
            if nxt not in dist or ng < dist[nxt]:
                dist[nxt] = ng
                parent[nxt] = node
                heapq.heappush(heap, (ng + h(li, jy, jx), li, jy, jx))
        for vi, vspec in grid.graph_vias:
            if vspec.lower == layer:
                other = vspec.upper
            elif vspec.upper == layer:
                other = vspec.lower
            else:
                continue
            if not _node_valid(grid, other, iy, ix):
                continue
            if not state.via_free(vi, iy, ix):
                continue
            if not state.node_free(other, iy, ix):
                continue
            oli = grid.layer_idx[other]
            nxt = (oli, iy, ix)
            ng = g + grid.tech.via_penalty
            if nxt not in dist or ng < dist[nxt]:
                dist[nxt] = ng
                parent[nxt] = node
                heapq.heappush(heap, (ng + h(oli, iy, ix), oli, iy, ix))
    if best_goal is None:
        return None
    path = [best_goal]
    while path[-1] in parent:
        path.append(parent[path[-1]])
    path.reverse()
    return best_total, path, start_taps.get(path[0]), best_goal


def _path_geometry(grid: RoutingGrid, path):
    """(wires per layer, via records) for a node path."""
    wires = {}
    vias = []
    runs = []
    for node in path:
        if runs and runs[-1][0] == node[0]:
            runs[-1][1].append(node)
        else:
            runs.append([node[0], [node]])
    for li, nodes in runs:
        layer = grid.layers[li]
        first, last = nodes[0], nodes[-1]
        if first == last:
            rect = grid.pad_rect(layer, first[1], first[2])
        else:
            rect = grid.segment_rect(layer, first[1], first[2], last[1], last[2])
        wires.setdefault(layer, []).append(rect)
    for a, b in zip(runs, runs[1:]):
        la, lb = grid.layers[a[0]], grid.layers[b[0]]
        node = b[1][0]
        for vi, vspec in grid.graph_vias:
            if {vspec.lower, vspec.upper} == {la, lb}:
                vias.append(vspec.geometry_at(grid.xs[node[2]], grid.ys[node[1]]))
                break
    return wires, vias


def _net_hpwl(lib, placement, terminals):
    xs, ys = [], []
    inst_by_id = {i.id: i for i in placement.instances}
    for inst_id, pin_name in terminals:
        inst = inst_by_id[inst_id]
        pin = lib.cell(inst.cell).pin(pin_name)
        for shapes in pin.shapes.values():
            for r in shapes.rects:
                rr = inst.transform.apply_rect(r)
                xs.extend((rr.x_lo, rr.x_hi))
                ys.extend((rr.y_lo, rr.y_hi))
    if not xs:
        return 0
    return (max(xs) - min(xs)) + (max(ys) - min(ys))


def route(placement: Placement, netlist: GeneratedNetlist, grid: RoutingGrid,
          design_id: str = "k1", max_skip_fraction: float = DEFAULT_MAX_SKIP,
          ) -> RoutedDesign:
    """Route every net; returns a RoutedDesign with unroutable nets skipped.

    Raises RouteError when more than ``max_skip_fraction`` of the nets could
    not be routed.
    """
    lib = placement.lib
    inst_by_id = {i.id: i for i in placement.instances}
    order = sorted(netlist.nets,
                   key=lambda n: (_net_hpwl(lib, placement, n[1]), n[0]))
    wires = {}
    vias = {}
    skipped = []
    for net_name, terminals in order:
        keys = [(i, p) for i, p in terminals]
        grid.lift_pins(keys)
        state = _NetState(grid)
        taps_per_pin = []
        for inst_id, pin_name in terminals:
            inst = inst_by_id[inst_id]
            pin = lib.cell(inst.cell).pin(pin_name)
            taps = [t for t in _pin_taps(grid, inst, pin)
                    if state.node_free(t.layer, t.iy, t.ix) and
                    (t.via_spec_idx is None or
                     state.via_free(t.via_spec_idx, t.iy, t.ix))]
            taps_per_pin.append(taps)
        if any(not taps for taps in taps_per_pin):
            grid.restore_pins(keys)
            skipped.append((net_name, "no_access"))
            continue
        net_wires = {}
        net_vias = []
        goals = {}
        goal_taps = {}
        for tap in taps_per_pin[0]:
            node = (tap.layer, tap.iy, tap.ix)
            if node not in goals or tap.cost < goals[node]:
                goals[node] = tap.cost
                goal_taps[node] = tap
        failed = False
        for taps in taps_per_pin[1:]:
            result = _astar(grid, state, taps, goals)
            if result is None:
                failed = True
                break
            _, path, start_tap, goal_node = result
            pw, pv = _path_geometry(grid, path)
            for layer, rects in pw.items():
                net_wires.setdefault(layer, []).extend(rects)
            net_vias.extend(pv)
            for tap in (start_tap, goal_taps.get(goal_node)):
                if tap is not None and tap.via_spec_idx is not None:
                    vspec = grid.tech.vias[tap.via_spec_idx]
                    net_vias.append(vspec.geometry_at(grid.xs[tap.ix],
                                                      grid.ys[tap.iy]))
                elif tap is not None:
                    net_wires.setdefault(tap.layer, []).append(
                        grid.pad_rect(tap.layer, tap.iy, tap.ix))
            for node in path:
                goals[node] = 0
                goal_taps.pop(node, None)
        grid.restore_pins(keys)
        if failed:
            skipped.append((net_name, "no_route"))
            continue
        merged = {layer: RectSet(rects) for layer, rects in net_wires.items()}
        wires[net_name] = merged
        vias[net_name] = tuple(net_vias)
        for layer, rs in merged.items():
            for r in rs.rects:
                grid.commit_obstacle(layer, r)
        for via in net_vias:
            grid.commit_obstacle(via.lower, via.enclosures[0][1])
            grid.commit_obstacle(via.upper, via.enclosures[1][1])
            grid.commit_obstacle(
                lib.via_layer_between(via.lower, via.upper), via.cut)
    if len(order) and len(skipped) / len(order) > max_skip_fraction:
        raise RouteError(
            f"{len(skipped)} of {len(order)} nets unroutable "
            f"(limit {max_skip_fraction:.0%}): "
            + ", ".join(f"{n} ({r})" for n, r in skipped[:10]))
    routed_nets = tuple(sorted(netlist.nets, key=lambda n: n[0]))
    return RoutedDesign(placement=placement, nets=routed_nets,
                        wires=wires, vias=vias, design_id=design_id,
                        skipped=tuple(sorted(skipped)))
