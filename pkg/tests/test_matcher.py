"""Matcher tests: oracle equivalence, don't-care semantics, determinism."""

import random

import pytest

from lithocheck.geometry import (
    ALL_ORIENTATIONS,
    Orientation,
    Rect,
    RectSet,
    Transform,
)
from lithocheck.matcher import (
    FlatLayout,
    MatchKind,
    match_deck,
    match_pattern,
    marker_sort_key,
    parse_markers,
    sweep_match_pattern,
    write_markers,
)
from lithocheck.errors import MatchError
from lithocheck.pattern import (
    PatternDeck,
    WeakpointPattern,
    generate_partials,
    parse_deck,
)

from oracle import sweep_matches

LAYERS = ("M1", "M2", "M3")


def make_pattern(pid, type_id, extent, solids, dontcare=None, removable=None):
    solids = {l: RectSet(rs) for l, rs in solids.items()}
    solids = {l: rs for l, rs in solids.items() if rs}
    if removable is None:
        removable = tuple((l, i) for l in sorted(solids)
                          for i in range(len(solids[l].components())))
    return WeakpointPattern(
        id=pid, type_id=type_id, extent=extent, solids=solids,
        dontcare={l: RectSet(rs) for l, rs in (dontcare or {}).items()},
        removable=removable)


def random_pattern(rnd, layers):
    ew = rnd.randrange(4, 18)
    eh = rnd.randrange(4, 18)
    extent = Rect(0, 0, ew, eh)
    solids = {}
    n_polys = rnd.randrange(1, 7)
    layer_pool = list(layers[:rnd.randrange(1, len(layers) + 1)])
    for _ in range(n_polys):
        layer = rnd.choice(layer_pool)
        x0 = rnd.randrange(0, ew - 1)
        y0 = rnd.randrange(0, eh - 1)
        w = rnd.randrange(1, min(6, ew - x0) + 1)
        h = rnd.randrange(1, min(6, eh - y0) + 1)
        solids.setdefault(layer, []).append(Rect(x0, y0, x0 + w, y0 + h))
    dontcare = {}
    if rnd.random() < 0.5:
        layer = rnd.choice(layer_pool)
        x0 = rnd.randrange(0, ew - 1)
        y0 = rnd.randrange(0, eh - 1)
        w = rnd.randrange(1, ew - x0 + 1)
        h = rnd.randrange(1, eh - y0 + 1)
        dontcare[layer] = [Rect(x0, y0, x0 + w, y0 + h)]
    if not any(solids.values()):
        solids = {layer_pool[0]: [Rect(0, 0, 1, 1)]}
    return make_pattern(f"rnd", rnd.randrange(1, 5), extent, solids, dontcare)


def random_layout(rnd, layers, span=48):
    die = Rect(0, 0, span, span)
    per_layer = {}
    for layer in layers:
        rects = []
        for _ in range(rnd.randrange(0, 14)):
            x0 = rnd.randrange(0, span - 1)
            y0 = rnd.randrange(0, span - 1)
            w = rnd.randrange(1, min(14, span - x0) + 1)
            h = rnd.randrange(1, min(14, span - y0) + 1)
            rects.append(Rect(x0, y0, x0 + w, y0 + h))
        per_layer[layer] = RectSet(rects)
    return FlatLayout(layers=per_layer, die=die)


def marker_positions(markers):
    return {(m.rect.x_lo, m.rect.y_lo, m.orientation.value) for m in markers}


def oracle_positions(layout, pattern, orientations=ALL_ORIENTATIONS):
    rects = {l: rs.rects for l, rs in layout.layers.items()}
    return sweep_matches(rects, layout.die, pattern, orientations)


def test_empty_layout_no_markers():
    layout = FlatLayout(layers={l: RectSet() for l in LAYERS}, die=Rect(0, 0, 40, 40))
    p = make_pattern("p", 1, Rect(0, 0, 6, 6), {"M1": [Rect(1, 1, 4, 4)]})
    assert match_pattern(layout, p) == []


def test_unknown_layer_rejected():
    layout = FlatLayout(layers={"M1": RectSet()}, die=Rect(0, 0, 40, 40))
    p = make_pattern("p", 1, Rect(0, 0, 6, 6), {"M9": [Rect(1, 1, 4, 4)]})
    with pytest.raises(MatchError):
        match_pattern(layout, p)


def test_exact_match_single_placement():
    # pattern geometry dropped at one spot: exactly one N match (pattern
    # asymmetric so flips cannot alias)
    solid = [Rect(0, 0, 3, 1), Rect(0, 0, 1, 3)]
    p = make_pattern("l_shape", 1, Rect(0, 0, 5, 5), {"M1": solid})
    placed = RectSet([r.translated(10, 20) for r in solid])
    layout = FlatLayout(layers={"M1": placed}, die=Rect(0, 0, 64, 64))
    markers = match_pattern(layout, p, orientations=(Orientation.N,))
    assert len(markers) == 1
    assert markers[0].rect == Rect(10, 20, 15, 25)
    assert markers[0].kind is MatchKind.FULL


def test_sliding_containment_matches_found():
    # solids fill the extent: any window fully inside the blob matches, at
    # translations with no corner alignment at all
    p = make_pattern("full", 1, Rect(0, 0, 4, 4), {"M1": [Rect(0, 0, 4, 4)]})
    layout = FlatLayout(layers={"M1": RectSet([Rect(8, 8, 20, 20)])},
                        die=Rect(0, 0, 32, 32))
    markers = match_pattern(layout, p, orientations=(Orientation.N,))
    assert marker_positions(markers) == oracle_positions(
        layout, p, (Orientation.N,))
    assert (11, 13, "N") in marker_positions(markers)  # interior, unaligned


@pytest.mark.parametrize("seed", range(40))
def test_matcher_equals_oracle_randomized(seed):
    rnd = random.Random(seed * 977 + 11)
    layers = LAYERS[:rnd.randrange(1, 4)]
    layout = random_layout(rnd, layers)
    pattern = random_pattern(rnd, layers)
    got = marker_positions(match_pattern(layout, pattern))
    want = oracle_positions(layout, pattern)
    assert got == want
    for partial in generate_partials(pattern):
        got_p = marker_positions(match_pattern(layout, partial))
        want_p = oracle_positions(layout, partial)
        assert got_p == want_p


@pytest.mark.parametrize("seed", range(10))
def test_sweep_fallback_agrees_with_region_matcher(seed):
    rnd = random.Random(seed + 4242)
    layers = LAYERS[:rnd.randrange(1, 3)]
    layout = random_layout(rnd, layers, span=24)
    pattern = random_pattern(rnd, layers)
    fast = match_pattern(layout, pattern)
    slow = sweep_match_pattern(layout, pattern)
    assert fast == slow


@pytest.mark.parametrize("seed", range(10))
def test_translation_equivariance(seed):
    rnd = random.Random(seed + 31337)
    layout = random_layout(rnd, ("M1",), span=32)
    pattern = random_pattern(rnd, ("M1",))
    dx, dy = rnd.randrange(1, 9), rnd.randrange(1, 9)
    shifted = FlatLayout(
        layers={l: rs.shifted(dx, dy) for l, rs in layout.layers.items()},
        die=layout.die.translated(dx, dy))
    base = match_pattern(layout, pattern)
    moved = match_pattern(shifted, pattern)
    assert [(m.rect.translated(dx, dy), m.orientation) for m in base] == \
           [(m.rect, m.orientation) for m in moved]


@pytest.mark.parametrize("seed", range(10))
def test_orientation_soundness(seed):
    rnd = random.Random(seed + 717)
    layout = random_layout(rnd, ("M1", "M2"), span=32)
    pattern = random_pattern(rnd, ("M1", "M2"))
    for o in ALL_ORIENTATIONS:
        t = Transform(o, 0, 0)
        flipped = FlatLayout(
            layers={l: rs.transformed(t) for l, rs in layout.layers.items()},
            die=t.apply_rect(layout.die))
        base = match_pattern(layout, pattern)
        moved = match_pattern(flipped, pattern)
        expect = {(t.apply_rect(m.rect), o.compose(m.orientation)) for m in base}
        assert {(m.rect, m.orientation) for m in moved} == expect


@pytest.mark.parametrize("seed", range(12))
def test_relaxation_monotonicity(seed):
    rnd = random.Random(seed + 555)
    layout = random_layout(rnd, ("M1", "M2"), span=40)
    pattern = random_pattern(rnd, ("M1", "M2"))
    full = marker_positions(match_pattern(layout, pattern))
    for partial in generate_partials(pattern):
        got = marker_positions(match_pattern(layout, partial))
        assert full <= got


def _seeded_deck_and_layout():
    deck = parse_deck("""\
DECK d
PATTERN quad TYPE 1 EXTENT 10 10
  SOLID M1 1 1 4 4
  SOLID M1 6 1 9 4
  SOLID M1 1 6 4 9
  SOLID M1 6 6 9 9
  REMOVABLE ALL
END PATTERN
END DECK
""")
    full = deck.patterns[0]
    rects = [r.translated(20, 20) for rs in full.solids.values() for r in rs.rects]
    layout = FlatLayout(layers={"M1": RectSet(rects)}, die=Rect(0, 0, 64, 64))
    return deck, layout


def test_match_deck_empty_layout():
    deck, _ = _seeded_deck_and_layout()
    layout = FlatLayout(layers={"M1": RectSet()}, die=Rect(0, 0, 64, 64))
    assert match_deck(layout, deck, mode="both") == []


def test_match_deck_full_occurrence_mode_both():
    deck, layout = _seeded_deck_and_layout()
    markers = match_deck(layout, deck, mode="both")
    full_here = [m for m in markers if m.kind is MatchKind.FULL
                 and m.rect == Rect(20, 20, 30, 30)]
    assert full_here
    partial_ids = {m.pattern_id for m in markers
                   if m.kind is MatchKind.PARTIAL and m.rect == Rect(20, 20, 30, 30)}
    assert len(partial_ids) == len(generate_partials(deck.patterns[0]))


def test_match_deck_deterministic_across_jobs_and_tiles():
    deck, layout = _seeded_deck_and_layout()
    a = write_markers(match_deck(layout, deck, mode="both", jobs=1))
    b = write_markers(match_deck(layout, deck, mode="both", jobs=4))
    c = write_markers(match_deck(layout, deck, mode="both", jobs=1, tile=16))
    assert a == b == c


def test_dontcare_vs_deletion_only_differential():
    # three exact polygons plus different geometry where the fourth was:
    # don't-care PPM matches, deletion-only does not
    deck, _ = _seeded_deck_and_layout()
    full = deck.patterns[0]
    rects = [Rect(21, 21, 24, 24), Rect(26, 21, 29, 24), Rect(21, 26, 24, 29),
             Rect(27, 27, 28, 29)]  # last unlike the 3x3 polygon
    layout = FlatLayout(layers={"M1": RectSet(rects)}, die=Rect(0, 0, 64, 64))
    with_dc = [m for p in generate_partials(full, add_dontcare=True)
               for m in match_pattern(layout, p)]
    without_dc = [m for p in generate_partials(full, add_dontcare=False)
                  for m in match_pattern(layout, p)]
    assert with_dc
    assert not without_dc


def test_marker_file_round_trip():
    deck, layout = _seeded_deck_and_layout()
    markers = match_deck(layout, deck, mode="both")
    text = write_markers(markers)
    back = parse_markers(text)
    assert [(m.rect, m.pattern_id, m.type_id, m.orientation, m.kind)
            for m in back] == \
           [(m.rect, m.pattern_id, m.type_id, m.orientation, m.kind)
            for m in markers]


def test_markers_sorted_and_unique():
    deck, layout = _seeded_deck_and_layout()
    markers = match_deck(layout, deck, mode="both")
    keys = [marker_sort_key(m) for m in markers]
    assert keys == sorted(keys)
    assert len(set(keys)) == len(keys)
