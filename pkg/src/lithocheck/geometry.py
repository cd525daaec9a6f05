"""Exact integer rectilinear geometry kernel.

All coordinates are integers in 1 nm database units; there is no floating
point anywhere in this module.  A ``Rect`` covers the half-open region
``[x_lo, x_hi) x [y_lo, y_hi)``, so edge-touching rectangles have zero-area
intersection and the unit cell ``(i, j)`` is the square ``[i, i+1) x [j, j+1)``.

``RectSet`` always stores the canonical decomposition of its point set:
maximal horizontal slabs, sorted by ``(y_lo, x_lo)``.  Two sets cover the
same points iff their ``rects`` tuples are equal, which makes set equality,
hashing and file determinism trivial.

Orientations are restricted to the axis-preserving group {N, FN, FS, S}
(identity, mirror about the vertical axis, mirror about the horizontal
axis, 180-degree rotation).  90-degree rotations are deliberately absent:
standard-cell rows only permit these four, and printability is not
rotation-invariant.
"""

from __future__ import annotations

import enum
import heapq
from typing import Iterable, NamedTuple


class Rect(NamedTuple):
    x_lo: int
    y_lo: int
    x_hi: int
    y_hi: int

    @property
    def width(self) -> int:
        return self.x_hi - self.x_lo

    @property
    def height(self) -> int:
        return self.y_hi - self.y_lo

    @property
    def area(self) -> int:
        return self.width * self.height

    def is_empty(self) -> bool:
        return self.x_lo >= self.x_hi or self.y_lo >= self.y_hi

    def translated(self, dx: int, dy: int) -> "Rect":
        return Rect(self.x_lo + dx, self.y_lo + dy, self.x_hi + dx, self.y_hi + dy)

    def expanded(self, margin: int) -> "Rect":
        return Rect(self.x_lo - margin, self.y_lo - margin,
                    self.x_hi + margin, self.y_hi + margin)

    def intersection(self, other: "Rect") -> "Rect | None":
        x_lo = max(self.x_lo, other.x_lo)
        y_lo = max(self.y_lo, other.y_lo)
        x_hi = min(self.x_hi, other.x_hi)
        y_hi = min(self.y_hi, other.y_hi)
        if x_lo < x_hi and y_lo < y_hi:
            return Rect(x_lo, y_lo, x_hi, y_hi)
        return None

    def overlaps(self, other: "Rect") -> bool:
        """Positive-area overlap; edge touching does not count."""
        return (self.x_lo < other.x_hi and other.x_lo < self.x_hi and
                self.y_lo < other.y_hi and other.y_lo < self.y_hi)

    def contains(self, other: "Rect") -> bool:
        return (self.x_lo <= other.x_lo and other.x_hi <= self.x_hi and
                self.y_lo <= other.y_lo and other.y_hi <= self.y_hi)


class Orientation(enum.Enum):
    """Axis-preserving orientation: sign flips applied to x and y."""

    N = "N"    # identity
    FN = "FN"  # mirror about the vertical axis (x -> -x)
    FS = "FS"  # mirror about the horizontal axis (y -> -y)
    S = "S"    # 180-degree rotation

    @property
    def sign_x(self) -> int:
        return -1 if self in (Orientation.FN, Orientation.S) else 1

    @property
    def sign_y(self) -> int:
        return -1 if self in (Orientation.FS, Orientation.S) else 1

    def compose(self, inner: "Orientation") -> "Orientation":
        """Orientation equal to applying ``inner`` first, then ``self``."""
        return _BY_SIGNS[(self.sign_x * inner.sign_x, self.sign_y * inner.sign_y)]

    def inverse(self) -> "Orientation":
        return self  # every element of the group is its own inverse

    def __str__(self) -> str:
        return self.value


_BY_SIGNS = {
    (1, 1): Orientation.N,
    (-1, 1): Orientation.FN,
    (1, -1): Orientation.FS,
    (-1, -1): Orientation.S,
}

ALL_ORIENTATIONS = (Orientation.N, Orientation.FN, Orientation.FS, Orientation.S)

ORIENT_ORDER = {o: i for i, o in enumerate(ALL_ORIENTATIONS)}


class Transform(NamedTuple):
    """Orientation followed by an integer translation: p -> orient(p) + (dx, dy)."""

    orientation: Orientation
    dx: int
    dy: int

    def apply_rect(self, r: Rect) -> Rect:
        sx, sy = self.orientation.sign_x, self.orientation.sign_y
        xa, xb = sx * r.x_lo, sx * r.x_hi
        ya, yb = sy * r.y_lo, sy * r.y_hi
        return Rect(min(xa, xb) + self.dx, min(ya, yb) + self.dy,
                    max(xa, xb) + self.dx, max(ya, yb) + self.dy)

    def compose(self, inner: "Transform") -> "Transform":
        """Transform equal to applying ``inner`` first, then ``self``."""
        o = self.orientation
        return Transform(o.compose(inner.orientation),
                         o.sign_x * inner.dx + self.dx,
                         o.sign_y * inner.dy + self.dy)

    def inverse(self) -> "Transform":
        o = self.orientation
        return Transform(o, -o.sign_x * self.dx, -o.sign_y * self.dy)


IDENTITY = Transform(Orientation.N, 0, 0)


class BoolOp(enum.Enum):
    AND = "and"
    OR = "or"
    XOR = "xor"
    DIFF = "diff"


def _merge_intervals(pairs):
    """Merge sorted (lo, hi) pairs; touching intervals coalesce."""
    out = []
    for lo, hi in pairs:
        if out and lo <= out[-1][1]:
            if hi > out[-1][1]:
                out[-1][1] = hi
        else:
            out.append([lo, hi])
    return tuple((lo, hi) for lo, hi in out)


def _combine_intervals(ia, ib, op: BoolOp):
    """Pointwise boolean of two sorted disjoint interval tuples."""
    if not ia and not ib:
        return ()
    if op is BoolOp.AND and (not ia or not ib):
        return ()
    if op is BoolOp.DIFF and not ia:
        return ()
    xs = sorted({x for lo, hi in ia for x in (lo, hi)} |
                {x for lo, hi in ib for x in (lo, hi)})
    out = []
    i = j = 0
    for k in range(len(xs) - 1):
        x0, x1 = xs[k], xs[k + 1]
        while i < len(ia) and ia[i][1] <= x0:
            i += 1
        in_a = i < len(ia) and ia[i][0] <= x0
        while j < len(ib) and ib[j][1] <= x0:
            j += 1
        in_b = j < len(ib) and ib[j][0] <= x0
        if op is BoolOp.AND:
            keep = in_a and in_b
        elif op is BoolOp.OR:
            keep = in_a or in_b
        elif op is BoolOp.XOR:
            keep = in_a != in_b
        else:
            keep = in_a and not in_b
        if keep:
            if out and out[-1][1] == x0:
                out[-1][1] = x1
            else:
                out.append([x0, x1])
    return tuple((lo, hi) for lo, hi in out)


def _slab_sweep(groups):
    """Sweep over y yielding (y0, y1, merged x-intervals per group).

    The interval tuples are recomputed only when a group's active set
    changed, so tall rects spanning many slabs are cheap.
    """
    events = set()
    for g in groups:
        for r in g:
            events.add(r.y_lo)
            events.add(r.y_hi)
    ys = sorted(events)
    starts = [sorted(g, key=lambda r: (r.y_lo, r.x_lo, r.x_hi)) for g in groups]
    ptrs = [0] * len(groups)
    heaps = [[] for _ in groups]  # (y_hi, x_lo, x_hi)
    cache = [()] * len(groups)
    for yi in range(len(ys) - 1):
        y0, y1 = ys[yi], ys[yi + 1]
        for gi in range(len(groups)):
            dirty = False
            g = starts[gi]
            h = heaps[gi]
            p = ptrs[gi]
            while p < len(g) and g[p].y_lo <= y0:
                r = g[p]
                p += 1
                if r.y_hi > y0:
                    heapq.heappush(h, (r.y_hi, r.x_lo, r.x_hi))
                    dirty = True
            ptrs[gi] = p
            while h and h[0][0] <= y0:
                heapq.heappop(h)
                dirty = True
            if dirty:
                cache[gi] = _merge_intervals(sorted((e[1], e[2]) for e in h))
        yield y0, y1, cache


def _vmerge(slabs):
    """Merge vertically adjacent slabs with identical interval tuples."""
    rects = []

    def flush(y0, y1, ints):
        for lo, hi in ints:
            rects.append(Rect(lo, y0, hi, y1))

    pend = None
    for y0, y1, ints in slabs:
        if pend is not None and pend[1] == y0 and pend[2] == ints:
            pend = (pend[0], y1, ints)
        else:
            if pend is not None:
                flush(*pend)
            pend = (y0, y1, ints)
    if pend is not None:
        flush(*pend)
    return tuple(rects)


def _canonical_rects(rects: Iterable[Rect]):
    live = [r for r in rects if not r.is_empty()]
    if not live:
        return ()
    slabs = []
    for y0, y1, cache in _slab_sweep([live]):
        if cache[0]:
            slabs.append((y0, y1, cache[0]))
    return _vmerge(slabs)


class RectSet:
    """Immutable union of rectangles, stored in canonical form.

    Canonical form is the maximal horizontal-slab decomposition sorted by
    (y_lo, x_lo): rects are pairwise disjoint, x-intervals are maximal per
    slab, and vertically adjacent slabs with identical interval structure
    are merged.  Degenerate input rects are dropped.
    """

    __slots__ = ("rects",)

    def __init__(self, rects: Iterable[Rect] = (), *, _canonical=False):
        if _canonical:
            object.__setattr__(self, "rects", tuple(rects))
        else:
            object.__setattr__(self, "rects", _canonical_rects(rects))

    def __setattr__(self, name, value):
        raise AttributeError("RectSet is immutable")

    def __getstate__(self):
        return self.rects

    def __setstate__(self, state):
        object.__setattr__(self, "rects", tuple(Rect(*r) for r in state))

    @classmethod
    def of(cls, *rects: Rect) -> "RectSet":
        return cls(rects)

    def __bool__(self) -> bool:
        return bool(self.rects)

    def is_empty(self) -> bool:
        return not self.rects

    def __eq__(self, other) -> bool:
        return isinstance(other, RectSet) and self.rects == other.rects

    def __hash__(self) -> int:
        return hash(self.rects)

    def __repr__(self) -> str:
        return f"RectSet({list(self.rects)!r})"

    @property
    def area(self) -> int:
        return sum(r.area for r in self.rects)

    def bbox(self) -> Rect | None:
        if not self.rects:
            return None
        return Rect(min(r.x_lo for r in self.rects),
                    self.rects[0].y_lo,
                    max(r.x_hi for r in self.rects),
                    max(r.y_hi for r in self.rects))

    # -- boolean algebra ---------------------------------------------------

    def union(self, other: "RectSet") -> "RectSet":
        return boolean(self, other, BoolOp.OR)

    def intersection(self, other: "RectSet") -> "RectSet":
        return boolean(self, other, BoolOp.AND)

    def difference(self, other: "RectSet") -> "RectSet":
        return boolean(self, other, BoolOp.DIFF)

    def sym_difference(self, other: "RectSet") -> "RectSet":
        return boolean(self, other, BoolOp.XOR)

    __or__ = union
    __and__ = intersection
    __sub__ = difference
    __xor__ = sym_difference

    def covers(self, other: "RectSet") -> bool:
        """True iff every point of ``other`` lies in ``self``."""
        return boolean(other, self, BoolOp.DIFF).is_empty()

    def overlaps(self, other: "RectSet") -> bool:
        return not boolean(self, other, BoolOp.AND).is_empty()

    def overlaps_rect(self, r: Rect) -> bool:
        return any(r.overlaps(q) for q in self.rects)

    # -- geometry ----------------------------------------------------------

    def shifted(self, dx: int, dy: int) -> "RectSet":
        return RectSet((r.translated(dx, dy) for r in self.rects), _canonical=True)

    def transformed(self, t: Transform) -> "RectSet":
        if t.orientation is Orientation.N:
            return self.shifted(t.dx, t.dy)
        return RectSet(t.apply_rect(r) for r in self.rects)

    def transposed(self) -> "RectSet":
        """Swap x and y (re-canonicalized into horizontal-slab form)."""
        return RectSet(Rect(r.y_lo, r.x_lo, r.y_hi, r.x_hi) for r in self.rects)

    def clipped(self, window: Rect) -> "RectSet":
        out = []
        for r in self.rects:
            c = r.intersection(window)
            if c is not None:
                out.append(c)
        return RectSet(out)

    def components(self) -> "list[RectSet]":
        """Connected components under edge adjacency.

        Two rects connect iff they share a boundary segment of positive
        length; corner touching does not connect.  Horizontal touching is
        already merged by canonicalization, so only vertical adjacency
        between consecutive slabs needs inspection.
        """
        rs = self.rects
        n = len(rs)
        parent = list(range(n))

        def find(i):
            while parent[i] != i:
                parent[i] = parent[parent[i]]
                i = parent[i]
            return i

        def union(i, j):
            ri, rj = find(i), find(j)
            if ri != rj:
                parent[rj] = ri

        # group indices by slab (y_lo, y_hi); canonical order keeps slabs contiguous
        slabs = []
        for i, r in enumerate(rs):
            if slabs and slabs[-1][0] == (r.y_lo, r.y_hi):
                slabs[-1][1].append(i)
            else:
                slabs.append([(r.y_lo, r.y_hi), [i]])
        for si in range(len(slabs) - 1):
            (y0a, y1a), idx_a = slabs[si]
            (y0b, _), idx_b = slabs[si + 1]
            if y1a != y0b:
                continue
            j = 0
            for ia in idx_a:
                ra = rs[ia]
                while j < len(idx_b) and rs[idx_b[j]].x_hi <= ra.x_lo:
                    j += 1
                k = j
                while k < len(idx_b) and rs[idx_b[k]].x_lo < ra.x_hi:
                    union(ia, idx_b[k])
                    k += 1
        groups: dict[int, list[Rect]] = {}
        for i, r in enumerate(rs):
            groups.setdefault(find(i), []).append(r)
        comps = [RectSet(v) for v in groups.values()]
        comps.sort(key=lambda c: (c.rects[0].y_lo, c.rects[0].x_lo))
        return comps


EMPTY = RectSet()


def canonicalize(s: RectSet) -> RectSet:
    """Canonical form of ``s`` (idempotent; RectSets are always canonical)."""
    return s


def boolean(a: RectSet, b: RectSet, op: BoolOp) -> RectSet:
    """Pointwise boolean combination of two sets, in canonical form."""
    if op is BoolOp.AND and (a.is_empty() or b.is_empty()):
        return EMPTY
    if op is BoolOp.DIFF and a.is_empty():
        return EMPTY
    if (op is BoolOp.OR or op is BoolOp.XOR) and a.is_empty():
        return b
    if op is not BoolOp.AND and b.is_empty():
        return a
    slabs = []
    for y0, y1, cache in _slab_sweep([a.rects, b.rects]):
        ints = _combine_intervals(cache[0], cache[1], op)
        if ints:
            slabs.append((y0, y1, ints))
    return RectSet(_vmerge(slabs), _canonical=True)


def apply_transform(s: RectSet, t: Transform) -> RectSet:
    return s.transformed(t)


def clip(s: RectSet, window: Rect) -> RectSet:
    return s.clipped(window)


def erode_box(s: RectSet, w: int, h: int) -> RectSet:
    """Translations t such that the w x h box anchored at the origin,
    shifted by t, lies entirely inside ``s``.

    Separable morphological erosion: shrink maximal x-runs by w-1, then
    maximal y-runs by h-1 (via transpose).  Requires w, h >= 1.
    """
    if not s.rects or w < 1 or h < 1:
        return EMPTY
    rows = [Rect(r.x_lo, r.y_lo, r.x_hi - w + 1, r.y_hi)
            for r in s.rects if r.x_hi - w + 1 > r.x_lo]
    e1 = RectSet(rows, _canonical=True) if w == 1 else RectSet(rows)
    if h == 1:
        return e1
    t = e1.transposed()
    cols = [Rect(r.x_lo, r.y_lo, r.x_hi - h + 1, r.y_hi)
            for r in t.rects if r.x_hi - h + 1 > r.x_lo]
    return RectSet(cols).transposed()
