"""Generators for the three verification placements.

* standalone: one isolated instance per cell, empty rows between them; used
  for partial-pattern matching without any routing.
* autoplace: a synthesized netlist with n instances per cell, packed into
  rows at a target utilization, ready for routing.
* abutted: every ordered pair of cells in every configured orientation
  pair, each pair isolated from the others; used for full-pattern matching
  of horizontal-abutment effects, again without routing.

All generators are pure functions of (library, config): the same seed gives
byte-identical outputs.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field

from .errors import ScenarioError, ValidationError
from .geometry import Orientation, Rect
from .layout import CellLibrary, Instance, Placement, transform_anchored

__all__ = [
    "ScenarioConfig", "GeneratedNetlist", "PairRecord", "OmitRecord",
    "gen_standalone", "gen_netlist", "gen_autoplace", "gen_abutted",
    "write_netlist", "parse_netlist", "write_omissions",
]

# N-row abutment orientation pairs; FS-row analogues can be added via config
# but add no detections the orientation sweep does not already cover.
DEFAULT_ABUT_ORIENTS = (
    (Orientation.N, Orientation.N),
    (Orientation.N, Orientation.FN),
    (Orientation.FN, Orientation.N),
    (Orientation.FN, Orientation.FN),
)


@dataclass(frozen=True)
class ScenarioConfig:
    instances_per_cell: int = 800
    utilization: float = 0.7
    seed: int = 0
    excluded_cell_classes: tuple = ("filler",)
    abutment_orientations: tuple = DEFAULT_ABUT_ORIENTS
    row_gap: int = 1
    isolation: int = 2048  # min clearance between unrelated geometry, nm

    def __post_init__(self):
        if self.instances_per_cell < 1:
            raise ValidationError("instances_per_cell must be >= 1")
        if not 0 < self.utilization < 1:
            raise ValidationError("utilization must be in (0, 1)")
        if self.row_gap < 1:
            raise ValidationError("row_gap must be >= 1")
        if self.isolation < 0:
            raise ValidationError("isolation must be >= 0")
        for a, b in self.abutment_orientations:
            fam_a = a in (Orientation.N, Orientation.FN)
            fam_b = b in (Orientation.N, Orientation.FN)
            if fam_a != fam_b:
                raise ValidationError(
                    "abutment orientation pairs must stay in one row family")


@dataclass(frozen=True)
class GeneratedNetlist:
    instances: tuple   # (instance id, cell name)
    nets: tuple        # (net name, ((instance id, pin name), ...))


@dataclass(frozen=True)
class PairRecord:
    left_cell: str
    left_orient: Orientation
    right_cell: str
    right_orient: Orientation
    left_inst: str
    right_inst: str
    slot: Rect


@dataclass(frozen=True)
class OmitRecord:
    left_cell: str
    left_orient: Orientation
    right_cell: str
    right_orient: Orientation
    constraint: tuple  # (class_a, class_b, side)


def _included_cells(lib: CellLibrary, cfg: ScenarioConfig):
    excluded = set(cfg.excluded_cell_classes)
    return [c for c in sorted(lib.cells, key=lambda c: c.name)
            if c.abut_class not in excluded]


def _ceil_to(value: int, quantum: int) -> int:
    return -(-value // quantum) * quantum


# ---------------------------------------------------------------------------
# standalone
# ---------------------------------------------------------------------------

def gen_standalone(lib: CellLibrary, cfg: ScenarioConfig) -> Placement:
    """One instance per included cell, each on its own row group.

    All rows are N-oriented and every instance is placed unflipped at a
    common left margin, with at least ``row_gap`` empty rows between
    consecutive instances.  The die gets an ``isolation`` margin so pattern
    windows can reach around every instance.
    """
    cells = _included_cells(lib, cfg)
    if not cells:
        raise ScenarioError("no cells left after exclusions")
    margin = _ceil_to(cfg.isolation, lib.site_width)
    x = margin
    row_idx = max(cfg.row_gap, -(-cfg.isolation // lib.row_height))
    instances = []
    for cell in cells:
        y = row_idx * lib.row_height
        instances.append(Instance(
            id=f"s_{cell.name}", cell=cell.name,
            transform=transform_anchored(cell.pr_boundary, x, y, Orientation.N)))
        row_idx += cell.height_rows + cfg.row_gap
    total_rows = row_idx
    width = max(c.width for c in cells)
    die = Rect(0, 0, x + width + margin,
               total_rows * lib.row_height + cfg.isolation)
    rows = tuple((r * lib.row_height, Orientation.N) for r in range(total_rows))
    return Placement(lib=lib, instances=tuple(instances), rows=rows, die=die)


# ---------------------------------------------------------------------------
# netlist
# ---------------------------------------------------------------------------

def gen_netlist(lib: CellLibrary, cfg: ScenarioConfig) -> GeneratedNetlist:
    """n instances per included cell; signal pins paired into 2-pin nets.

    Pins are matched pseudo-randomly across distinct instances using the
    config seed.  A leftover pin (odd pin count) joins the last net as a
    third terminal so that every signal pin lands in exactly one net.
    """
    cells = _included_cells(lib, cfg)
    for cell in cells:
        if not cell.signal_pins():
            raise ScenarioError(
                f"cell {cell.name} has no signal pins and is not excluded")
    instances = []
    terminals = []
    for cell in cells:
        for i in range(cfg.instances_per_cell):
            inst_id = f"{cell.name}_{i:05d}"
            instances.append((inst_id, cell.name))
            for pin in cell.signal_pins():
                terminals.append((inst_id, pin.name))
    rnd = random.Random(cfg.seed)
    rnd.shuffle(terminals)
    nets = []
    pool = terminals
    while pool:
        a = pool.pop()
        partner_idx = None
        for i in range(len(pool) - 1, -1, -1):
            if pool[i][0] != a[0]:
                partner_idx = i
                break
        if partner_idx is not None:
            b = pool.pop(partner_idx)
            nets.append([a, b])
        elif pool:
            nets.append([a, pool.pop()])  # single-instance remainder
        elif nets:
            nets[-1].append(a)            # odd pin joins the last net
        else:
            raise ScenarioError("cannot build a net from a single signal pin")
    named = tuple((f"n{i:05d}", tuple(term)) for i, term in enumerate(nets))
    return GeneratedNetlist(instances=tuple(instances), nets=named)


# ---------------------------------------------------------------------------
# autoplace
# ---------------------------------------------------------------------------

def gen_autoplace(lib: CellLibrary, netlist: GeneratedNetlist,
                  cfg: ScenarioConfig) -> Placement:
    """Row packer: shuffle instances, fill rows left to right with a uniform
    gap sized for the target utilization; row orientations alternate N/FS.
    """
    order = list(netlist.instances)
    rnd = random.Random(cfg.seed ^ 0x5EED)
    rnd.shuffle(order)
    widths = {inst_id: lib.cell(cell).width for inst_id, cell in order}
    heights = {inst_id: lib.cell(cell).height_rows for inst_id, cell in order}
    total_width = sum(widths.values())
    if not order:
        raise ScenarioError("empty netlist")
    n_rows = max(max(heights.values()),
                 round(math.sqrt(total_width / (cfg.utilization * lib.row_height))))
    row_width = _ceil_to(int(total_width / (cfg.utilization * n_rows)),
                         lib.site_width)
    row_width = max(row_width, max(widths.values()))
    avg_width = total_width // len(order)
    gap = _ceil_to(int(avg_width * (1 - cfg.utilization) / cfg.utilization),
                   lib.site_width)
    margin = _ceil_to(cfg.isolation, lib.site_width)

    cursors = [margin] * n_rows
    instances = []
    for inst_id, cell_name in order:
        w = widths[inst_id]
        h = heights[inst_id]
        placed = False
        for base in range(0, n_rows - h + 1):
            x = max(cursors[base:base + h])
            if x + w <= margin + row_width:
                orientation = (Orientation.N if base % 2 == 0 else
                               (Orientation.FS if h % 2 == 1 else Orientation.N))
                y = cfg.isolation + base * lib.row_height
                instances.append(Instance(
                    id=inst_id, cell=cell_name,
                    transform=transform_anchored(lib.cell(cell_name).pr_boundary,
                                                 x, y, orientation)))
                for r in range(base, base + h):
                    cursors[r] = x + w + gap
                placed = True
                break
        if not placed:
            # overflow: extend the shortest row group beyond the target width
            base = min(range(0, n_rows - h + 1),
                       key=lambda b: (max(cursors[b:b + h]), b))
            x = max(cursors[base:base + h])
            orientation = (Orientation.N if base % 2 == 0 else
                           (Orientation.FS if h % 2 == 1 else Orientation.N))
            y = cfg.isolation + base * lib.row_height
            instances.append(Instance(
                id=inst_id, cell=cell_name,
                transform=transform_anchored(lib.cell(cell_name).pr_boundary,
                                             x, y, orientation)))
            for r in range(base, base + h):
                cursors[r] = x + w + gap
    die_w = max(max(cursors) - gap, margin + row_width) + margin
    die = Rect(0, 0, die_w, n_rows * lib.row_height + 2 * cfg.isolation)
    rows = tuple((cfg.isolation + r * lib.row_height,
                  Orientation.N if r % 2 == 0 else Orientation.FS)
                 for r in range(n_rows))
    return Placement(lib=lib, instances=tuple(instances), rows=rows, die=die)


# ---------------------------------------------------------------------------
# abutted
# ---------------------------------------------------------------------------

def _violated_constraint(lib: CellLibrary, left, right):
    for ca, cb, side in lib.forbidden_abutments:
        if side in ("right", "either") and left.abut_class == ca and \
                right.abut_class == cb:
            return (ca, cb, side)
        if side in ("left", "either") and left.abut_class == cb and \
                right.abut_class == ca:
            return (ca, cb, side)
    return None


def gen_abutted(lib: CellLibrary, cfg: ScenarioConfig):
    """All ordered cell pairs in all configured orientation pairs.

    Left and right instances share their bottom row with the right cell's
    left PR edge on the left cell's right edge.  Pair slots are laid out on
    a grid with at least ``isolation`` clearance both ways so one pattern
    window can never touch two pairs.  Forbidden pairs are omitted and
    returned as OmitRecords.
    """
    cells = _included_cells(lib, cfg)
    if not cells:
        raise ScenarioError("no cells left after exclusions")
    candidates = []
    omitted = []
    for left in cells:
        for right in cells:
            constraint = _violated_constraint(lib, left, right)
            for o_left, o_right in cfg.abutment_orientations:
                if constraint is not None:
                    omitted.append(OmitRecord(left.name, o_left, right.name,
                                              o_right, constraint))
                else:
                    candidates.append((left, o_left, right, o_right))
    max_w = max(c.width for c in cells)
    max_rows = max(c.height_rows for c in cells)
    iso_x = _ceil_to(cfg.isolation, lib.site_width)
    iso_rows = -(-cfg.isolation // lib.row_height)
    pitch_x = 2 * max_w + iso_x
    band_rows = max_rows + iso_rows
    n_cols = max(1, math.isqrt(len(candidates))) if candidates else 1

    # bands never mix row families; N-family pairs first, then FS-family
    def family(pair):
        return 0 if pair[1] in (Orientation.N, Orientation.FN) else 1

    candidates.sort(key=lambda p: family(p))
    instances = []
    pairs = []
    band_orients = []
    band = -1
    col = n_cols  # force a new band on the first pair
    prev_family = None
    for idx, (left, o_left, right, o_right) in enumerate(candidates):
        fam = family((left, o_left, right, o_right))
        if col >= n_cols or fam != prev_family:
            band += 1
            col = 0
            band_orients.append(Orientation.N if fam == 0 else Orientation.FS)
            prev_family = fam
        x0 = iso_x + col * pitch_x
        y0 = (iso_rows + band * band_rows) * lib.row_height
        col += 1
        li = f"p{idx:05d}_l"
        ri = f"p{idx:05d}_r"
        instances.append(Instance(
            id=li, cell=left.name,
            transform=transform_anchored(left.pr_boundary, x0, y0, o_left)))
        instances.append(Instance(
            id=ri, cell=right.name,
            transform=transform_anchored(right.pr_boundary, x0 + left.width,
                                         y0, o_right)))
        pairs.append(PairRecord(
            left_cell=left.name, left_orient=o_left, right_cell=right.name,
            right_orient=o_right, left_inst=li, right_inst=ri,
            slot=Rect(x0, y0, x0 + left.width + right.width,
                      y0 + max(left.height, right.height))))
    n_bands = band + 1 if candidates else 0
    total_rows = iso_rows + n_bands * band_rows + iso_rows
    rows = []
    for r in range(total_rows):
        band_idx, offset = divmod(r - iso_rows, band_rows)
        if 0 <= band_idx < n_bands and offset < max_rows:
            rows.append((r * lib.row_height, band_orients[band_idx]))
        else:
            rows.append((r * lib.row_height, Orientation.N))
    die = Rect(0, 0, iso_x + n_cols * pitch_x + iso_x,
               total_rows * lib.row_height)
    placement = Placement(lib=lib, instances=tuple(instances),
                          rows=tuple(rows), die=die)
    return placement, pairs, omitted


# ---------------------------------------------------------------------------
# netlist / omission files
# ---------------------------------------------------------------------------

def write_netlist(netlist: GeneratedNetlist, name="generated") -> str:
    out = [f"NETLIST {name}"]
    out.extend(sorted(f"INST {i} {c}" for i, c in netlist.instances))
    out.extend(sorted(
        f"NET {n} " + " ".join(f"{i}:{p}" for i, p in terms)
        for n, terms in netlist.nets))
    out.append("END NETLIST")
    return "\n".join(out) + "\n"


def parse_netlist(text: str) -> GeneratedNetlist:
    from .errors import ParseError
    instances = []
    nets = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        toks = raw.split("#", 1)[0].split()
        if not toks:
            continue
        if toks[0] == "NETLIST" or (toks[0] == "END" and toks[-1] == "NETLIST"):
            continue
        if toks[0] == "INST":
            if len(toks) != 3:
                raise ParseError("expected INST <id> <cell>", line=lineno)
            instances.append((toks[1], toks[2]))
        elif toks[0] == "NET":
            if len(toks) < 4:
                raise ParseError("NET needs >=2 terminals", line=lineno)
            terms = []
            for t in toks[2:]:
                if ":" not in t:
                    raise ParseError(f"bad terminal {t!r}", line=lineno)
                inst, pin = t.split(":", 1)
                terms.append((inst, pin))
            nets.append((toks[1], tuple(terms)))
        else:
            raise ParseError(f"unknown statement {toks[0]!r}", line=lineno)
    return GeneratedNetlist(instances=tuple(instances), nets=tuple(nets))


def write_omissions(omitted) -> str:
    lines = sorted(
        f"OMIT {o.left_cell} {o.left_orient.value} {o.right_cell} "
        f"{o.right_orient.value} {o.constraint[0]}:{o.constraint[1]}:{o.constraint[2]}"
        for o in omitted)
    return "\n".join(lines) + ("\n" if lines else "")
