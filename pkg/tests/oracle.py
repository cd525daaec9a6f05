"""Independent bitmap oracles used by the test suite.

Everything here rasterizes plain Rect tuples onto numpy boolean grids and
works cell-by-cell.  It deliberately shares no code with the interval-sweep
kernel or the production matcher so that agreement between the two is
meaningful evidence.
"""

import numpy as np


def rasterize(rects, window):
    """Boolean grid of shape (height, width) for the given window.

    Grid cell [j, i] corresponds to the 1x1 nm cell at
    (window.x_lo + i, window.y_lo + j).
    """
    h = window.y_hi - window.y_lo
    w = window.x_hi - window.x_lo
    grid = np.zeros((h, w), dtype=bool)
    for r in rects:
        x0 = max(r.x_lo, window.x_lo) - window.x_lo
        x1 = min(r.x_hi, window.x_hi) - window.x_lo
        y0 = max(r.y_lo, window.y_lo) - window.y_lo
        y1 = min(r.y_hi, window.y_hi) - window.y_lo
        if x0 < x1 and y0 < y1:
            grid[y0:y1, x0:x1] = True
    return grid


def orient_grid(grid, orientation):
    """Apply an axis-preserving orientation to a bitmap.

    Mirroring cell i to cell -1-i is exactly a numpy flip, so the oriented
    grid of a set equals the grid of the oriented set over the mirrored
    window.
    """
    name = orientation.value if hasattr(orientation, "value") else orientation
    if name in ("FN", "S"):
        grid = grid[:, ::-1]
    if name in ("FS", "S"):
        grid = grid[::-1, :]
    return grid


def sweep_matches(layout_layers, die, pattern, orientations):
    """Exhaustive translation-sweep matcher over a bitmap rasterization.

    layout_layers: dict layer -> iterable of Rect (layout geometry)
    die: Rect; candidate windows must lie fully inside it
    pattern: object with .extent, .solids (dict layer -> RectSet-like with
             .rects), .dontcare
    Returns a set of (x_lo, y_lo, orientation_name) for every matching
    window position and orientation.

    Per layer the predicate is: XOR(window bitmap, solids bitmap) must be
    entirely inside the don't-care bitmap.
    """
    ext = pattern.extent
    ew, eh = ext.x_hi - ext.x_lo, ext.y_hi - ext.y_lo
    die_w, die_h = die.x_hi - die.x_lo, die.y_hi - die.y_lo
    if ew > die_w or eh > die_h:
        return set()

    layer_names = sorted(set(pattern.solids) | set(pattern.dontcare))
    grids = {name: rasterize(layout_layers.get(name, ()), die) for name in layer_names}

    found = set()
    for orientation in orientations:
        oname = orientation.value if hasattr(orientation, "value") else orientation
        per_layer = []
        for name in layer_names:
            s_rects = pattern.solids[name].rects if name in pattern.solids else ()
            d_rects = pattern.dontcare[name].rects if name in pattern.dontcare else ()
            solids = rasterize(s_rects, ext)
            care = ~rasterize(d_rects, ext)
            per_layer.append((name, orient_grid(solids, orientation),
                              orient_grid(care, orientation)))
        n_ty = die_h - eh + 1
        n_tx = die_w - ew + 1
        ok = np.ones((n_ty, n_tx), dtype=bool)
        for name, solids_o, care_o in per_layer:
            windows = np.lib.stride_tricks.sliding_window_view(grids[name], (eh, ew))
            bad = ((windows ^ solids_o) & care_o).any(axis=(2, 3))
            ok &= ~bad
            if not ok.any():
                break
        for ty, tx in zip(*np.nonzero(ok)):
            found.add((die.x_lo + int(tx), die.y_lo + int(ty), oname))
    return found
