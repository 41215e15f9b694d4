import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hermite_fk.errors import ConfigurationError, DomainError
from hermite_fk.gauss_geometry import (
    ARTIFICIAL,
    PHYSICAL,
    CorpusEntry,
    Domain2D,
    HalfSpace,
    artificial_perimeter_2d,
    dump_corpus,
    integrate_1d,
    isoperimetric_g,
    load_corpus,
    measure_2d,
    measure_halfspace,
    perimeter_2d,
    phi1,
    symmetrize,
)

SIGMA_SHARP_039347 = -0.27028630556365081995496927683827787707035205878904
G_039347 = 0.38463291129745860142730980333892586306291630829706
DISK1_MEASURE = 0.39346934028736657639620046500881954655808186451281
DISK1_PERIMETER = 0.60653065971263342360379953499118045344191813548719
RADIUS_HALF_MEASURE = 1.1774100225154746910115693264596996377473856893858


def test_measure_halfspace_values():
    assert measure_halfspace(0.0) == 0.5
    assert measure_halfspace(-38.0) < 1e-300
    assert abs(measure_halfspace(symmetrize(0.25)) - 0.25) <= 1e-12
    assert HalfSpace(0.0).measure == 0.5
    assert abs(HalfSpace(0.0).perimeter - 1 / math.sqrt(2 * math.pi)) < 1e-16


def test_measure_halfspace_array_and_monotone():
    s = np.linspace(-8, 8, 401)
    m = measure_halfspace(s)
    assert np.all(np.diff(m) > 0)
    assert abs(m[200] - 0.5) < 1e-16


def test_symmetrize_values():
    assert symmetrize(0.5) == 0.0
    assert abs(symmetrize(0.3) + symmetrize(0.7)) < 1e-15
    s = symmetrize(0.39347)
    assert abs(s - SIGMA_SHARP_039347) <= 1e-13
    assert abs(measure_halfspace(s) - 0.39347) <= 1e-10


@pytest.mark.parametrize("s", [0.0, 1.0, -0.1, 1.2])
def test_symmetrize_rejects_outside_unit_interval(s):
    with pytest.raises(DomainError):
        symmetrize(s)
    with pytest.raises(DomainError):
        isoperimetric_g(s)


@given(st.floats(1e-6, 1 - 1e-6))
@settings(max_examples=300, deadline=None)
def test_symmetrize_inverts_measure(s):
    assert abs(measure_halfspace(symmetrize(s)) - s) <= 1e-12


def test_isoperimetric_g_values():
    assert abs(isoperimetric_g(0.5) - 0.3989422804014327) < 1e-15
    assert abs(isoperimetric_g(0.2) - isoperimetric_g(0.8)) < 1e-15
    assert abs(isoperimetric_g(0.39347) - G_039347) <= 1e-10
    assert abs(isoperimetric_g(0.39347) - phi1(symmetrize(0.39347))) < 1e-15


def test_integrate_1d_polynomial_and_gaussian():
    assert abs(integrate_1d(lambda x: x**3, 0.0, 2.0) - 4.0) < 1e-13
    assert abs(integrate_1d(phi1, -40.0, 0.0, 1e-13) - 0.5) < 1e-13


def test_disk_closed_forms():
    d = Domain2D.disk((0, 0), 1.0)
    assert abs(measure_2d(d) - DISK1_MEASURE) <= 1e-8
    assert abs(perimeter_2d(d) - DISK1_PERIMETER) <= 1e-8
    assert perimeter_2d(d) >= isoperimetric_g(measure_2d(d))
    assert artificial_perimeter_2d(d) == 0.0


def test_disk_radius_of_half_measure():
    d = Domain2D.disk((0, 0), RADIUS_HALF_MEASURE)
    assert abs(measure_2d(d) - 0.5) <= 1e-10


def test_off_center_disk():
    # measure of a shifted disk: polar integral against the full-space density
    d = Domain2D.disk((0.4, -0.3), 0.8)
    from scipy.integrate import dblquad

    ref, _ = dblquad(lambda r, a: r * math.exp(-0.5 * ((0.4 + r * math.cos(a)) ** 2
                                                        + (-0.3 + r * math.sin(a)) ** 2))
                     / (2 * math.pi), 0, 2 * math.pi, 0, 0.8, epsabs=1e-13)
    assert abs(measure_2d(d) - ref) <= 1e-8


def test_half_plane_measure_and_perimeter():
    d = Domain2D.half_plane(0.0, 0.0, 6.0)
    assert abs(measure_2d(d) - 0.5) <= 2e-8
    assert abs(perimeter_2d(d) - isoperimetric_g(0.5)) <= 1e-6
    assert artificial_perimeter_2d(d) > 0
    flags = {s.flag for s in d.boundary_segments}
    assert flags == {PHYSICAL, ARTIFICIAL}


def test_large_rectangle_has_full_measure():
    d = Domain2D.rectangle((-20, 20), (-20, 20))
    assert abs(measure_2d(d) - 1.0) <= 1e-10


def test_rectangle_tensor_product():
    d = Domain2D.rectangle((-0.5, 1.0), (0.2, 0.9))
    ref = (measure_halfspace(1.0) - measure_halfspace(-0.5)) * (
        measure_halfspace(0.9) - measure_halfspace(0.2))
    assert abs(measure_2d(d) - ref) <= 1e-12


def test_polygon_matches_rectangle():
    r = Domain2D.rectangle((-0.5, 1.0), (0.2, 0.9))
    p = Domain2D.polygon([(-0.5, 0.2), (1.0, 0.2), (1.0, 0.9), (-0.5, 0.9)])
    assert abs(measure_2d(p) - measure_2d(r)) <= 1e-10
    assert abs(perimeter_2d(p) - perimeter_2d(r)) <= 1e-10


def test_clockwise_polygon_is_reoriented():
    p = Domain2D.polygon([(0, 0), (0, 1), (1, 1), (1, 0)])
    v = p.polygon_vertices()
    area = 0.5 * np.sum(v[:, 0] * np.roll(v[:, 1], -1) - np.roll(v[:, 0], -1) * v[:, 1])
    assert area > 0


def test_bad_polygons_rejected():
    with pytest.raises(DomainError):
        Domain2D.polygon([(0, 0), (1, 1), (1, 0), (0, 1)])  # bow tie
    with pytest.raises(DomainError):
        Domain2D.polygon([(0, 0), (1, 0), (2, 0)])  # zero area


@pytest.mark.parametrize("deg", [17.0, 90.0, 211.0])
def test_rotation_invariance(deg):
    for d in (Domain2D.rectangle((-0.3, 0.9), (-0.6, 0.4)), Domain2D.disk((0.5, 0.2), 0.7),
              Domain2D.half_plane(0.0, 0.3, 6.0)):
        r = d.rotated(deg)
        assert abs(measure_2d(r) - measure_2d(d)) <= 1e-8
        assert abs(perimeter_2d(r) - perimeter_2d(d)) <= 1e-8


def test_contains():
    d = Domain2D.disk((0, 0), 1.0)
    assert list(d.contains(np.array([[0.0, 0.0], [0.9, 0.5]]))) == [True, False]
    h = Domain2D.half_plane(90.0, 0.5)
    assert list(h.contains(np.array([[0.0, 0.0], [0.0, 0.8]]))) == [True, False]


def test_isoperimetric_margins_on_corpus_shapes():
    for d in (Domain2D.disk((0, 0), 1.0), Domain2D.rectangle((-0.6, 0.6), (-0.6, 0.6)),
              Domain2D.disk((0.3, 0.1), 0.9)):
        g = measure_2d(d)
        assert 0.2 <= g <= 0.8
        assert perimeter_2d(d) - isoperimetric_g(g) > 0.01


def test_corpus_round_trip(tmp_path):
    entries = [
        CorpusEntry("r", Domain2D.rectangle((0, 1), (0, 2)), 1.5),
        CorpusEntry("d", Domain2D.disk((0, 0), 1.0), 1.0),
        CorpusEntry("h", Domain2D.half_plane(30.0, 0.2, 5.0), 2.0),
        CorpusEntry("p", Domain2D.polygon([(0, 0), (1, 0), (0, 1)]), 0.5),
    ]
    path = tmp_path / "c.json"
    dump_corpus(entries, path)
    back = load_corpus(path)
    assert [e.name for e in back] == ["r", "d", "h", "p"]
    for a, b in zip(entries, back):
        assert a.beta == b.beta
        assert abs(measure_2d(a.domain) - measure_2d(b.domain)) < 1e-14


@pytest.mark.parametrize("bad", [
    [{"name": "x", "kind": "disk", "center": [0, 0], "radius": 1, "beta": 0}],
    [{"name": "x", "kind": "disk", "center": [0, 0], "beta": 1}],
    [{"name": "x", "kind": "blob", "beta": 1}],
    [{"name": "x", "kind": "disk", "center": [0, 0], "radius": 1, "beta": 1},
     {"name": "x", "kind": "disk", "center": [0, 0], "radius": 2, "beta": 1}],
    {"name": "not a list"},
])
def test_corpus_rejects_malformed(tmp_path, bad):
    path = tmp_path / "c.json"
    path.write_text(json.dumps(bad))
    with pytest.raises(ConfigurationError):
        load_corpus(path)


def test_corpus_error_names_entry(tmp_path):
    path = tmp_path / "c.json"
    path.write_text(json.dumps([{"name": "bad_one", "kind": "disk", "center": [0, 0],
                                 "radius": 1, "beta": 0.0}]))
    with pytest.raises(ConfigurationError, match="bad_one"):
        load_corpus(path)
