"""Exact pattern matching over flattened layouts, with don't-care support.

Match predicate, per layer of the pattern: take the layout clipped to the
candidate window, map it into the pattern frame, XOR it with the pattern
solids; the result must lie inside the pattern's don't-care region.  Layers
the pattern does not mention are ignored.  Candidate windows must lie fully
inside the die bounding box.

Instead of enumerating candidate anchor alignments, the matcher computes
the exact region of valid translations in closed form:

* care region  F = extent \\ dontcare
* required     R = solids & F       (layout must cover this exactly)
* forbidden    X = F \\ solids      (layout must be empty here)

For a translation t the predicate holds iff R+t is contained in the layout
(an erosion of the layout by each rect of R) and X+t misses the layout (the
complement of a Minkowski-style dilation).  Both are exact rectilinear
computations on integer coordinates, so the marker set equals the
exhaustive translation sweep by construction; the randomized oracle tests
check that equivalence end to end.

Work is partitioned by (pattern, layout tile) with a deterministic merge,
so results are independent of tiling and worker count.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterable

from . import layout as layout_mod
from .errors import MatchError
from .geometry import (
    ALL_ORIENTATIONS,
    ORIENT_ORDER,
    Orientation,
    Rect,
    RectSet,
    Transform,
    erode_box,
)
from .parallel import run_tasks
from .pattern import PartialPattern, PatternDeck, WeakpointPattern, generate_partials

__all__ = [
    "Marker", "MatchKind", "FlatLayout", "match_pattern", "match_deck",
    "sweep_match_pattern", "write_markers", "parse_markers", "marker_sort_key",
]

DEFAULT_TILE = 8192


class MatchKind(enum.Enum):
    FULL = "full_match"
    PARTIAL = "partial_match"


@dataclass(frozen=True)
class Marker:
    rect: Rect
    pattern_id: str
    type_id: int
    orientation: Orientation
    kind: MatchKind


def marker_sort_key(m: Marker):
    return (m.rect.x_lo, m.rect.y_lo, ORIENT_ORDER[m.orientation],
            m.pattern_id, m.kind.value, m.rect.x_hi, m.rect.y_hi, m.type_id)


@dataclass(frozen=True)
class FlatLayout:
    """Plain per-layer geometry with an explicit die; matchable directly."""

    layers: dict                # layer name -> RectSet
    die: Rect

    def layer_names(self):
        return set(self.layers)

    def geometry(self, layer: str, window: Rect) -> RectSet:
        return self.layers[layer].clipped(window)


def _layout_view(layout):
    """(layer name set, die, geometry(layer, window) callable) for any input."""
    if isinstance(layout, FlatLayout):
        return layout.layer_names(), layout.die, layout.geometry
    if isinstance(layout, (layout_mod.Placement, layout_mod.RoutedDesign)):
        placement = (layout.placement
                     if isinstance(layout, layout_mod.RoutedDesign) else layout)
        names = set(placement.lib.layer_names())
        return names, placement.die, (
            lambda layer, window: layout_mod.flatten(layout, layer, window))
    raise TypeError(f"cannot match over {type(layout).__name__}")


def _oriented_pattern(p, orientation: Orientation):
    t = Transform(orientation, 0, 0)
    extent = t.apply_rect(p.extent)
    solids = {layer: rs.transformed(t) for layer, rs in p.solids.items()}
    dontcare = {layer: rs.transformed(t) for layer, rs in p.dontcare.items()}
    return extent, solids, dontcare


def _translation_region(extent: Rect, solids: dict, dontcare: dict,
                        geometry: dict, universe: RectSet) -> RectSet:
    """Exact set of translations matching the oriented pattern.

    ``geometry`` maps every pattern layer to layout geometry covering at
    least ``universe + extent``; ``universe`` bounds the translations under
    consideration.
    """
    region = universe
    extent_set = RectSet([extent])
    for layer in sorted(set(solids) | set(dontcare)):
        if region.is_empty():
            break
        solid = solids.get(layer, RectSet())
        care = extent_set - dontcare.get(layer, RectSet())
        required = solid & care
        forbidden = care - solid
        geo = geometry[layer]
        for r in required.rects:
            eroded = erode_box(geo, r.width, r.height)
            region = region & eroded.shifted(-r.x_lo, -r.y_lo)
            if region.is_empty():
                break
        if region.is_empty():
            break
        if forbidden and geo:
            hits = []
            for q in forbidden.rects:
                for l in geo.rects:
                    hits.append(Rect(l.x_lo - q.x_hi + 1, l.y_lo - q.y_hi + 1,
                                     l.x_hi - q.x_lo, l.y_hi - q.y_lo))
            if hits:
                region = region - RectSet(hits)
    return region


def _die_universe(die: Rect, extent: Rect) -> RectSet:
    """Translations keeping the oriented extent fully inside the die."""
    x_lo = die.x_lo - extent.x_lo
    y_lo = die.y_lo - extent.y_lo
    x_hi = die.x_hi - extent.x_hi + 1
    y_hi = die.y_hi - extent.y_hi + 1
    if x_lo >= x_hi or y_lo >= y_hi:
        return RectSet()
    return RectSet([Rect(x_lo, y_lo, x_hi, y_hi)])


def _kind_of(p) -> MatchKind:
    return MatchKind.PARTIAL if isinstance(p, PartialPattern) else MatchKind.FULL


def _pattern_name(p) -> str:
    return p.id


def _check_layers(p, layer_names):
    missing = [l for l in p.layers() if l not in layer_names]
    if missing:
        raise MatchError(
            f"pattern {_pattern_name(p)} references unknown layer(s) "
            f"{', '.join(missing)}")


def _match_one(p, orientations, universe: RectSet, geometry_for) -> list:
    """Markers for one pattern over one translation universe."""
    markers = []
    kind = _kind_of(p)
    for orientation in orientations:
        extent, solids, dontcare = _oriented_pattern(p, orientation)
        uni_box = universe.bbox()
        if uni_box is None:
            continue
        fetch = Rect(uni_box.x_lo + extent.x_lo, uni_box.y_lo + extent.y_lo,
                     uni_box.x_hi - 1 + extent.x_hi, uni_box.y_hi - 1 + extent.y_hi)
        geometry = {layer: geometry_for(layer, fetch) for layer in p.layers()}
        region = _translation_region(extent, solids, dontcare, geometry, universe)
        for r in region.rects:
            for ty in range(r.y_lo, r.y_hi):
                for tx in range(r.x_lo, r.x_hi):
                    markers.append(Marker(
                        rect=extent.translated(tx, ty),
                        pattern_id=_pattern_name(p), type_id=p.type_id,
                        orientation=orientation, kind=kind))
    return markers


def match_pattern(layout, p, orientations: Iterable[Orientation] = ALL_ORIENTATIONS,
                  ) -> list:
    """All markers for one full or partial pattern over the whole die."""
    layer_names, die, geometry_for = _layout_view(layout)
    _check_layers(p, layer_names)
    orientations = tuple(orientations)
    markers = []
    for orientation in orientations:
        extent, _, _ = _oriented_pattern(p, orientation)
        uni = _die_universe(die, extent)
        markers.extend(_match_one(p, (orientation,), uni, geometry_for))
    return _dedupe_sorted(markers)


def _dedupe_sorted(markers):
    markers.sort(key=marker_sort_key)
    out = []
    last = None
    for m in markers:
        key = (m.rect, m.pattern_id, m.type_id, m.orientation, m.kind)
        if key != last:
            out.append(m)
            last = key
    return out


def _match_task(args):
    p, orientations, universe, layers_clip, = args
    flat = FlatLayout(layers=layers_clip["layers"], die=layers_clip["die"])
    return _match_one(p, orientations, universe,
                      lambda layer, window: flat.layers[layer].clipped(window))


def match_deck(layout, deck: PatternDeck, mode: str = "full",
               orientations: Iterable[Orientation] = ALL_ORIENTATIONS,
               margin: int = 0, add_dontcare: bool = True, jobs: int = 1,
               tile: int = DEFAULT_TILE) -> list:
    """Markers for every pattern in the deck (plus partials per ``mode``).

    mode: "full", "partial" or "both".  The marker list is deduplicated and
    sorted, and is identical for any tile size or worker count.
    """
    if mode not in ("full", "partial", "both"):
        raise ValueError(f"bad mode {mode!r}")
    orientations = tuple(orientations)
    layer_names, die, geometry_for = _layout_view(layout)
    variants = []
    if mode in ("full", "both"):
        variants.extend(deck.patterns)
    if mode in ("partial", "both"):
        for p in deck.patterns:
            variants.extend(generate_partials(p, margin=margin,
                                              add_dontcare=add_dontcare))
    for v in variants:
        _check_layers(v, layer_names)
    if not variants:
        return []

    # Disjoint partition of translation space per pattern; layout geometry is
    # pre-clipped per tile so worker tasks are self-contained.
    max_w = max(v.extent.x_hi for v in variants)
    max_h = max(v.extent.y_hi for v in variants)
    tasks = []
    tile = max(tile, max_w, max_h)
    x_cuts = list(range(die.x_lo, die.x_hi, tile)) + [die.x_hi]
    y_cuts = list(range(die.y_lo, die.y_hi, tile)) + [die.y_hi]
    needed_layers = sorted({l for v in variants for l in v.layers()})
    for yi in range(len(y_cuts) - 1):
        for xi in range(len(x_cuts) - 1):
            t_box = Rect(x_cuts[xi], y_cuts[yi], x_cuts[xi + 1], y_cuts[yi + 1])
            fetch = Rect(t_box.x_lo - max_w, t_box.y_lo - max_h,
                         t_box.x_hi + max_w, t_box.y_hi + max_h)
            clipped = {l: geometry_for(l, fetch) for l in needed_layers}
            payload = {"layers": clipped, "die": fetch}
            for v in variants:
                for orientation in orientations:
                    extent, _, _ = _oriented_pattern(v, orientation)
                    uni = _die_universe(die, extent)
                    # translations whose window LL corner falls in this tile
                    local = uni & RectSet([Rect(
                        t_box.x_lo - extent.x_lo, t_box.y_lo - extent.y_lo,
                        t_box.x_hi - extent.x_lo, t_box.y_hi - extent.y_lo)])
                    if local:
                        tasks.append((v, (orientation,), local, payload))
    results = run_tasks(_match_task, tasks, jobs)
    markers = [m for chunk in results for m in chunk]
    return _dedupe_sorted(markers)


def sweep_match_pattern(layout, p,
                        orientations: Iterable[Orientation] = ALL_ORIENTATIONS,
                        stride: int = 1) -> list:
    """Naive translation sweep evaluating the predicate window by window.

    Kept as an in-tree fallback and cross-check for the region matcher; the
    test suite additionally maintains a fully independent bitmap oracle.
    """
    layer_names, die, geometry_for = _layout_view(layout)
    _check_layers(p, layer_names)
    markers = []
    kind = _kind_of(p)
    for orientation in tuple(orientations):
        extent, solids, dontcare = _oriented_pattern(p, orientation)
        care = {}
        for layer in p.layers():
            care[layer] = (RectSet([extent]) -
                           dontcare.get(layer, RectSet()))
        for ty in range(die.y_lo - extent.y_lo,
                        die.y_hi - extent.y_hi + 1, stride):
            for tx in range(die.x_lo - extent.x_lo,
                            die.x_hi - extent.x_hi + 1, stride):
                window = extent.translated(tx, ty)
                ok = True
                for layer in p.layers():
                    geo = geometry_for(layer, window).shifted(-tx, -ty)
                    diff = geo ^ solids.get(layer, RectSet())
                    if not (diff & care[layer]).is_empty():
                        ok = False
                        break
                if ok:
                    markers.append(Marker(rect=window, pattern_id=_pattern_name(p),
                                          type_id=p.type_id,
                                          orientation=orientation, kind=kind))
    return _dedupe_sorted(markers)


# ---------------------------------------------------------------------------
# marker file format
# ---------------------------------------------------------------------------

def write_markers(markers) -> str:
    lines = []
    for m in sorted(markers, key=marker_sort_key):
        r = m.rect
        lines.append(f"MARKER {m.pattern_id} {m.type_id} {m.kind.value} "
                     f"{m.orientation.value} {r.x_lo} {r.y_lo} {r.x_hi} {r.y_hi}")
    return "\n".join(lines) + ("\n" if lines else "")


def parse_markers(text: str) -> list:
    out = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        toks = raw.split()
        if not toks:
            continue
        if toks[0] != "MARKER" or len(toks) != 9:
            raise MatchError(f"line {lineno}: bad marker line")
        out.append(Marker(
            rect=Rect(int(toks[5]), int(toks[6]), int(toks[7]), int(toks[8])),
            pattern_id=toks[1], type_id=int(toks[2]),
            orientation=Orientation(toks[4]), kind=MatchKind(toks[3])))
    return out
