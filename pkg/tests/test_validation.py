import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from dumpvuln.raster import Grid, GridHeader
from dumpvuln.scoring import VulnClass, VulnerabilityMap, WeightConfig
from dumpvuln.validation import ObservedSite, ValidationReport, validate_sites

H = GridHeader(4, 3, 1000.0, 2000.0, 100.0)
CLASSES = np.array([
    [1, 2, 3, -9999],
    [4, 5, 6, 7],
    [-9999, 7, 7, 2],
], dtype=np.int32)


def vmap():
    scores = Grid(H, np.where(CLASSES == -9999, -9999.0, CLASSES * 5.0))
    return VulnerabilityMap(H, scores, Grid(H, CLASSES), WeightConfig())


def site(x, y, i=0):
    return ObservedSite(x, y, f"s{i}")


def test_empty_report():
    rep = validate_sites([], vmap())
    assert rep.total == 0 and rep.outside_buffer == 0 and rep.validated == 0
    assert all(v == 0 for v in rep.per_class.values())


def test_tallies():
    sites = [
        site(1050, 2250),  # row 0 col 0 -> very_low
        site(1350, 2250),  # row 0 col 3 -> nodata
        site(1150, 2050),  # row 2 col 1 -> very_high
        site(5000, 5000),  # off grid
        site(1399.9, 2100.0),  # row 1 col 3 -> very_high
    ]
    rep = validate_sites(sites, vmap())
    assert rep.total == 5 and rep.outside_buffer == 2 and rep.validated == 3
    assert rep.per_class[VulnClass.VERY_LOW] == 1 and rep.per_class[VulnClass.VERY_HIGH] == 2


def test_report_dict_shape():
    d = validate_sites([site(1050, 2250)], vmap()).to_dict()
    assert set(d) == {"total", "outside_buffer", "validated", "per_class"}
    assert list(d["per_class"]) == [c.label for c in VulnClass]


def test_published_shaped_report_identity():
    rep = ValidationReport(total=163, outside_buffer=4)
    rep.per_class.update({VulnClass.HIGH: 64, VulnClass.SIGNIFICANT: 45, VulnClass.VERY_HIGH: 25,
                          VulnClass.MODERATE: 22, VulnClass.INSIGNIFICANT: 3})
    assert rep.outside_buffer + sum(rep.per_class.values()) == rep.total
    assert rep.to_dict()["validated"] == 159


coords = st.tuples(st.floats(900, 1500), st.floats(1900, 2400))


@settings(max_examples=60, deadline=None)
@given(st.lists(coords, max_size=25), st.randoms(use_true_random=False))
def test_identity_and_permutation(points, rnd):
    sites = [site(x, y, i) for i, (x, y) in enumerate(points)]
    rep = validate_sites(sites, vmap())
    assert rep.outside_buffer + sum(rep.per_class.values()) == rep.total == len(sites)
    shuffled = list(sites)
    rnd.shuffle(shuffled)
    assert validate_sites(shuffled, vmap()).to_dict() == rep.to_dict()
    if sites:
        dup = validate_sites(sites + [sites[0]], vmap()).to_dict()
        before = rep.to_dict()
        changed = [k for k in before["per_class"] if dup["per_class"][k] != before["per_class"][k]]
        changed += ["outside"] if dup["outside_buffer"] != before["outside_buffer"] else []
        assert len(changed) == 1
        assert dup["total"] == before["total"] + 1
