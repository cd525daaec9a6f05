"""Weakpoint-pattern model, rule-deck parsing and partial-pattern generation.

A partial pattern is derived from a full pattern by deleting one maximal
solid polygon (a connected component of the layer geometry) and marking the
polygon's bounding box, optionally expanded by a margin and clipped to the
extent, as don't-care on the same layer.  Removing solid into don't-care
only weakens the match predicate, so every location matched by the full
pattern is matched by all of its partials.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ParseError, ValidationError
from .geometry import Rect, RectSet

__all__ = [
    "WeakpointPattern", "PartialPattern", "PatternDeck",
    "parse_deck", "serialize_deck", "generate_partials",
    "layer_polygons", "serialize_partials",
]


@dataclass(frozen=True)
class WeakpointPattern:
    id: str
    type_id: int
    extent: Rect                # anchored at (0, 0)
    solids: dict                # layer -> RectSet
    dontcare: dict              # layer -> RectSet
    removable: tuple            # ((layer, polygon index), ...)

    def layers(self):
        return sorted(set(self.solids) | set(self.dontcare))


@dataclass(frozen=True)
class PartialPattern:
    parent_id: str
    type_id: int
    extent: Rect
    solids: dict
    dontcare: dict
    removed: tuple              # (layer, bounding box of the removed polygon)

    @property
    def id(self) -> str:
        layer, bbox = self.removed
        return f"{self.parent_id}~{layer}@{bbox.x_lo},{bbox.y_lo}"

    def layers(self):
        return sorted(set(self.solids) | set(self.dontcare))


@dataclass(frozen=True)
class PatternDeck:
    name: str
    patterns: tuple
    process_tag: str = ""

    def pattern(self, pattern_id: str) -> WeakpointPattern:
        for p in self.patterns:
            if p.id == pattern_id:
                return p
        raise KeyError(f"unknown pattern {pattern_id!r}")

    def type_ids(self):
        return sorted({p.type_id for p in self.patterns})

    def max_extent_dim(self) -> int:
        dims = [d for p in self.patterns for d in (p.extent.x_hi, p.extent.y_hi)]
        return max(dims) if dims else 0


def layer_polygons(solids: dict, layer: str):
    """Maximal solid polygons on a layer, in canonical order."""
    rs = solids.get(layer)
    return rs.components() if rs else []


def generate_partials(p: WeakpointPattern, margin: int = 0,
                      add_dontcare: bool = True):
    """One PartialPattern per removable polygon, in deterministic order.

    ``add_dontcare=False`` is the deletion-only variant: the polygon is
    removed without marking its area don't-care.  It exists to demonstrate
    what that weaker relaxation misses and is not used by the normal flow.
    """
    if margin < 0:
        raise ValueError("margin must be non-negative")
    out = []
    for layer, index in p.removable:
        polys = layer_polygons(p.solids, layer)
        if index >= len(polys):
            raise ValidationError(
                f"pattern {p.id}: removable index {index} out of range on {layer}")
        poly = polys[index]
        bbox = poly.bbox()
        solids = dict(p.solids)
        solids[layer] = solids[layer] - poly
        dontcare = dict(p.dontcare)
        if add_dontcare:
            dc_rect = bbox.expanded(margin).intersection(p.extent)
            added = RectSet([dc_rect] if dc_rect else [])
            dontcare[layer] = dontcare.get(layer, RectSet()) | added
        out.append(PartialPattern(
            parent_id=p.id, type_id=p.type_id, extent=p.extent,
            solids=solids, dontcare=dontcare, removed=(layer, bbox)))
    return out


# ---------------------------------------------------------------------------
# deck file format
# ---------------------------------------------------------------------------

def _tokens(text):
    for lineno, raw in enumerate(text.splitlines(), 1):
        body = raw.split("#", 1)[0]
        toks = body.split()
        if toks:
            yield lineno, raw, toks


def _int(tok, lineno, what="value"):
    try:
        return int(tok)
    except ValueError:
        raise ParseError(f"expected integer {what}, got {tok!r}", line=lineno) from None


def parse_deck(text: str, filename=None) -> PatternDeck:
    name = None
    process_tag = ""
    patterns = []
    cur = None
    try:
        for lineno, raw, toks in _tokens(text):
            kw = toks[0]
            if kw == "DECK":
                if len(toks) not in (2, 3):
                    raise ParseError("expected DECK <name> [<process>]", line=lineno)
                name = toks[1]
                process_tag = toks[2] if len(toks) == 3 else ""
            elif kw == "PATTERN":
                if cur is not None:
                    raise ParseError("nested PATTERN", line=lineno)
                if len(toks) != 7 or toks[2] != "TYPE" or toks[4] != "EXTENT":
                    raise ParseError(
                        "expected PATTERN <id> TYPE <j> EXTENT <w> <h>", line=lineno)
                type_id = _int(toks[3], lineno, "type id")
                w = _int(toks[5], lineno, "extent width")
                h = _int(toks[6], lineno, "extent height")
                if type_id <= 0 or w <= 0 or h <= 0:
                    raise ParseError("type id and extent must be positive",
                                     line=lineno)
                cur = {"id": toks[1], "type": type_id, "w": w, "h": h,
                       "solids": {}, "dontcare": {}, "removable": None,
                       "line": lineno}
            elif kw == "SOLID" or kw == "DONTCARE":
                if cur is None:
                    raise ParseError(f"{kw} outside PATTERN", line=lineno)
                if len(toks) != 6:
                    raise ParseError(
                        f"expected {kw} <layer> <x1> <y1> <x2> <y2>", line=lineno)
                x1, y1, x2, y2 = (_int(t, lineno) for t in toks[2:])
                if x1 >= x2 or y1 >= y2:
                    raise ParseError("degenerate rect", line=lineno)
                target = cur["solids"] if kw == "SOLID" else cur["dontcare"]
                target.setdefault(toks[1], []).append(Rect(x1, y1, x2, y2))
            elif kw == "REMOVABLE":
                if cur is None:
                    raise ParseError("REMOVABLE outside PATTERN", line=lineno)
                if len(toks) == 2 and toks[1] == "ALL":
                    if isinstance(cur["removable"], list):
                        raise ParseError("REMOVABLE ALL mixed with explicit entries",
                                         line=lineno)
                    cur["removable"] = "ALL"
                elif len(toks) == 3:
                    if cur["removable"] == "ALL":
                        raise ParseError("REMOVABLE ALL mixed with explicit entries",
                                         line=lineno)
                    if cur["removable"] is None:
                        cur["removable"] = []
                    cur["removable"].append((toks[1], _int(toks[2], lineno, "index")))
                else:
                    raise ParseError("expected REMOVABLE <layer> <index> | REMOVABLE ALL",
                                     line=lineno)
            elif kw == "END" and len(toks) == 2 and toks[1] == "PATTERN":
                if cur is None:
                    raise ParseError("END PATTERN without PATTERN", line=lineno)
                patterns.append(_finish_pattern(cur))
                cur = None
            elif kw == "END" and len(toks) == 2 and toks[1] == "DECK":
                pass
            else:
                raise ParseError(f"unknown statement {kw!r}", line=lineno, column=1)
    except ParseError as exc:
        if filename and not exc.filename:
            raise ParseError(str(exc), filename=filename) from None
        raise
    if name is None:
        raise ParseError("missing DECK header", line=1)
    if cur is not None:
        raise ParseError(f"PATTERN {cur['id']} not closed", line=cur["line"])
    seen = set()
    for p in patterns:
        if p.id in seen:
            raise ValidationError(f"duplicate pattern id {p.id}")
        seen.add(p.id)
    return PatternDeck(name=name, patterns=tuple(patterns), process_tag=process_tag)


def _finish_pattern(spec) -> WeakpointPattern:
    extent = Rect(0, 0, spec["w"], spec["h"])
    solids = {layer: RectSet(rects) for layer, rects in spec["solids"].items()}
    solids = {layer: rs for layer, rs in solids.items() if rs}
    dontcare = {layer: RectSet(rects) for layer, rects in spec["dontcare"].items()}
    if not any(rs for rs in solids.values()):
        raise ValidationError(f"pattern {spec['id']}: needs at least one solid polygon")
    for which, shapes in (("solid", solids), ("dontcare", dontcare)):
        for layer, rs in shapes.items():
            for r in rs.rects:
                if not extent.contains(r):
                    raise ValidationError(
                        f"pattern {spec['id']}: {which} shape on {layer} "
                        f"outside the extent")
    removable_spec = spec["removable"]
    if removable_spec is None or removable_spec == "ALL":
        removable = tuple(
            (layer, i)
            for layer in sorted(solids)
            for i in range(len(solids[layer].components())))
    else:
        removable = tuple(removable_spec)
        for layer, index in removable:
            if layer not in solids:
                raise ValidationError(
                    f"pattern {spec['id']}: removable layer {layer} has no solids")
            if not 0 <= index < len(solids[layer].components()):
                raise ValidationError(
                    f"pattern {spec['id']}: removable index {index} out of range "
                    f"on {layer}")
    return WeakpointPattern(id=spec["id"], type_id=spec["type"], extent=extent,
                            solids=solids, dontcare=dontcare, removable=removable)


def serialize_deck(deck: PatternDeck) -> str:
    out = [f"DECK {deck.name}" + (f" {deck.process_tag}" if deck.process_tag else "")]
    for p in deck.patterns:
        out.append(f"PATTERN {p.id} TYPE {p.type_id} EXTENT {p.extent.x_hi} {p.extent.y_hi}")
        for layer in sorted(p.solids):
            for r in p.solids[layer].rects:
                out.append(f"  SOLID {layer} {r.x_lo} {r.y_lo} {r.x_hi} {r.y_hi}")
        for layer in sorted(p.dontcare):
            for r in p.dontcare[layer].rects:
                out.append(f"  DONTCARE {layer} {r.x_lo} {r.y_lo} {r.x_hi} {r.y_hi}")
        default = tuple(
            (layer, i)
            for layer in sorted(p.solids)
            for i in range(len(p.solids[layer].components())))
        if p.removable == default:
            out.append("  REMOVABLE ALL")
        else:
            for layer, i in p.removable:
                out.append(f"  REMOVABLE {layer} {i}")
        out.append("END PATTERN")
    out.append("END DECK")
    return "\n".join(out) + "\n"


def serialize_partials(partials) -> str:
    """Emit generated partial patterns in deck syntax for inspection."""
    out = ["DECK partials"]
    for p in partials:
        out.append(f"PATTERN {p.id} TYPE {p.type_id} "
                   f"EXTENT {p.extent.x_hi} {p.extent.y_hi}")
        for layer in sorted(p.solids):
            for r in p.solids[layer].rects:
                out.append(f"  SOLID {layer} {r.x_lo} {r.y_lo} {r.x_hi} {r.y_hi}")
        for layer in sorted(p.dontcare):
            for r in p.dontcare[layer].rects:
                out.append(f"  DONTCARE {layer} {r.x_lo} {r.y_lo} {r.x_hi} {r.y_hi}")
        out.append("END PATTERN")
    out.append("END DECK")
    return "\n".join(out) + "\n"
