"""Scenario generator tests: legality, counting identities, determinism."""

import pytest

from lithocheck.errors import ScenarioError, ValidationError
from lithocheck.fixtures import fixture_library
from lithocheck.geometry import Orientation, Rect
from lithocheck.layout import check_placement, instance_footprint
from lithocheck.scenarios import (
    DEFAULT_ABUT_ORIENTS,
    ScenarioConfig,
    gen_abutted,
    gen_autoplace,
    gen_netlist,
    gen_standalone,
    parse_netlist,
    write_netlist,
    write_omissions,
)


CFG = ScenarioConfig(instances_per_cell=4, seed=42, isolation=600)


def test_config_validation():
    with pytest.raises(ValidationError):
        ScenarioConfig(utilization=1.2)
    with pytest.raises(ValidationError):
        ScenarioConfig(instances_per_cell=0)
    with pytest.raises(ValidationError):
        ScenarioConfig(abutment_orientations=((Orientation.N, Orientation.FS),))


# ---------------------------------------------------------------------------
# standalone
# ---------------------------------------------------------------------------

def test_standalone_single_cell():
    lib = fixture_library(include=["inv_x1"])
    placement = gen_standalone(lib, CFG)
    assert len(placement.instances) == 1
    assert check_placement(placement) == []
    fp = instance_footprint(placement.instances[0], lib)
    assert fp.x_lo >= CFG.isolation


def test_standalone_three_single_one_double():
    lib = fixture_library(include=["inv_x1", "buf_x2", "nand2_x1", "dff_x2"])
    placement = gen_standalone(lib, CFG)
    assert len(placement.instances) == 4
    assert check_placement(placement) == []
    by_cell = {i.cell: i for i in placement.instances}
    dff_fp = instance_footprint(by_cell["dff_x2"], lib)
    assert dff_fp.height == 2 * lib.row_height


def test_standalone_fixture_gaps_at_least_row_gap():
    lib = fixture_library()
    placement = gen_standalone(lib, CFG)
    # filler excluded by default
    assert len(placement.instances) == len(lib.cells) - 1
    assert check_placement(placement) == []
    spans = sorted(
        (instance_footprint(i, lib).y_lo, instance_footprint(i, lib).y_hi)
        for i in placement.instances)
    for (lo_a, hi_a), (lo_b, _) in zip(spans, spans[1:]):
        assert lo_b - hi_a >= CFG.row_gap * lib.row_height


# ---------------------------------------------------------------------------
# netlist
# ---------------------------------------------------------------------------

def test_netlist_counting_two_pins_two_instances():
    lib = fixture_library(include=["inv_x1"])
    cfg = ScenarioConfig(instances_per_cell=2, seed=1)
    netlist = gen_netlist(lib, cfg)
    assert len(netlist.instances) == 2
    assert len(netlist.nets) == 2
    terminals = [t for _, terms in netlist.nets for t in terms]
    assert len(terminals) == 4


def test_netlist_every_signal_pin_in_exactly_one_net():
    lib = fixture_library()
    cfg = ScenarioConfig(instances_per_cell=100, seed=42)
    netlist = gen_netlist(lib, cfg)
    seen = {}
    for net, terms in netlist.nets:
        assert len(terms) >= 2
        for term in terms:
            assert term not in seen, f"{term} in {net} and {seen[term]}"
            seen[term] = net
    want = set()
    for inst_id, cell_name in netlist.instances:
        for pin in lib.cell(cell_name).signal_pins():
            want.add((inst_id, pin.name))
    assert set(seen) == want


def test_netlist_deterministic_and_serializable():
    lib = fixture_library()
    cfg = ScenarioConfig(instances_per_cell=10, seed=7)
    a = write_netlist(gen_netlist(lib, cfg))
    b = write_netlist(gen_netlist(lib, cfg))
    assert a == b
    parsed = parse_netlist(a)
    assert write_netlist(parsed) == a


def test_netlist_rejects_cell_without_signal_pins():
    lib = fixture_library(include=["inv_x1", "fill_x1"])
    cfg = ScenarioConfig(instances_per_cell=2, seed=1,
                         excluded_cell_classes=())
    with pytest.raises(ScenarioError, match="fill_x1"):
        gen_netlist(lib, cfg)


# ---------------------------------------------------------------------------
# autoplace
# ---------------------------------------------------------------------------

def test_autoplace_single_instance():
    lib = fixture_library(include=["inv_x1"])
    cfg = ScenarioConfig(instances_per_cell=1, seed=3, isolation=600)
    netlist = gen_netlist(lib, cfg)
    placement = gen_autoplace(lib, netlist, cfg)
    assert len(placement.instances) == 1
    assert check_placement(placement) == []


def test_autoplace_utilization_band():
    lib = fixture_library(include=["inv_x1", "buf_x2", "nand2_x1"])
    cfg = ScenarioConfig(instances_per_cell=270, seed=42, isolation=600)
    netlist = gen_netlist(lib, cfg)  # ~800 instances
    placement = gen_autoplace(lib, netlist, cfg)
    assert check_placement(placement) == []
    margin = 600
    n_rows = len(placement.rows)
    row_width = placement.die.width - 2 * margin
    total = sum(instance_footprint(i, lib).width for i in placement.instances)
    util = total / (n_rows * row_width)
    assert 0.65 <= util <= 0.75


def test_autoplace_deterministic():
    lib = fixture_library()
    cfg = ScenarioConfig(instances_per_cell=20, seed=11, isolation=600)
    netlist = gen_netlist(lib, cfg)
    a = gen_autoplace(lib, netlist, cfg)
    b = gen_autoplace(lib, netlist, cfg)
    assert a.instances == b.instances
    assert a.die == b.die


def test_autoplace_legal_with_multi_height():
    lib = fixture_library()
    cfg = ScenarioConfig(instances_per_cell=12, seed=5, isolation=600)
    netlist = gen_netlist(lib, cfg)
    placement = gen_autoplace(lib, netlist, cfg)
    assert check_placement(placement) == []
    assert len(placement.instances) == len(netlist.instances)


# ---------------------------------------------------------------------------
# abutted
# ---------------------------------------------------------------------------

def test_abutted_two_cells_sixteen_candidates():
    lib = fixture_library(include=["inv_x1", "buf_x2"])
    placement, pairs, omitted = gen_abutted(lib, CFG)
    assert len(pairs) == 2 * 2 * 4
    assert not omitted
    assert len(placement.instances) == 2 * len(pairs)
    assert check_placement(placement) == []


def test_abutted_pair_count_identity_with_omissions():
    lib = fixture_library()
    placement, pairs, omitted = gen_abutted(lib, CFG)
    included = len(lib.cells) - 1  # filler excluded
    assert len(pairs) + len(omitted) == included ** 2 * len(DEFAULT_ABUT_ORIENTS)
    # abut_b|abut_b forbidden either side
    assert len(omitted) == len(DEFAULT_ABUT_ORIENTS)
    assert all(o.left_cell == "abut_b" and o.right_cell == "abut_b"
               for o in omitted)
    assert check_placement(placement) == []


def test_abutted_edges_coincide_and_bottoms_align():
    lib = fixture_library(include=["inv_x1", "dff_x2"])
    placement, pairs, _ = gen_abutted(lib, CFG)
    by_id = {i.id: i for i in placement.instances}
    for pair in pairs:
        lf = instance_footprint(by_id[pair.left_inst], lib)
        rf = instance_footprint(by_id[pair.right_inst], lib)
        assert lf.x_hi == rf.x_lo
        assert lf.y_lo == rf.y_lo


def test_abutted_pairs_isolated():
    lib = fixture_library(include=["inv_x1", "buf_x2"])
    placement, pairs, _ = gen_abutted(lib, CFG)
    for a in pairs:
        for b in pairs:
            if a.left_inst == b.left_inst:
                continue
            dx = max(a.slot.x_lo - b.slot.x_hi, b.slot.x_lo - a.slot.x_hi)
            dy = max(a.slot.y_lo - b.slot.y_hi, b.slot.y_lo - a.slot.y_hi)
            assert max(dx, dy) >= CFG.isolation


def test_omission_log_format():
    lib = fixture_library(include=["abut_a", "abut_b"])
    _, _, omitted = gen_abutted(lib, CFG)
    text = write_omissions(omitted)
    lines = text.splitlines()
    assert len(lines) == len(omitted)
    assert all(l.startswith("OMIT abut_b ") for l in lines)
    assert lines == sorted(lines)


def test_abutted_deterministic():
    lib = fixture_library()
    p1, pairs1, om1 = gen_abutted(lib, CFG)
    p2, pairs2, om2 = gen_abutted(lib, CFG)
    assert p1.instances == p2.instances
    assert pairs1 == pairs2
    assert om1 == om2
