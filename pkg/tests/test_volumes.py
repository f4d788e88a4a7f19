import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from plateau.errors import DomainError, SingularPointError
from plateau.forms import HoloMapJet, euclidean, hopf_metric
from plateau.volumes import (
    DiscFamily,
    NuTable,
    constant_family,
    disc_graph_volume,
    family_volume_scan,
    get_family,
    hopf_inclusion,
    volume_gap_check,
    nu_threshold,
)
from oracles import hopf_inclusion_volume


def test_constant_map_volume():
    for form in (hopf_metric(2), euclidean(2)):
        v, err = disc_graph_volume(constant_family([0.5], form=form), 0.5)
        assert v == pytest.approx(math.pi, rel=1e-14)
        assert err <= 1e-12


@pytest.mark.parametrize("s", [1.0, 0.5, 0.1, 0.01])
def test_hopf_inclusion_closed_form(s):
    v, err = disc_graph_volume(hopf_inclusion([s]), s)
    assert v == pytest.approx(hopf_inclusion_volume(s), rel=1e-4)
    assert err <= 1e-8 * v


def test_hopf_inclusion_named_values():
    assert disc_graph_volume(hopf_inclusion([1]), 1)[0] == pytest.approx(math.pi + math.pi * math.log(2), rel=1e-4)
    assert disc_graph_volume(hopf_inclusion([0.1]), 0.1)[0] == pytest.approx(math.pi + math.pi * math.log(101), rel=1e-4)


def test_rotation_invariance():
    fam = hopf_inclusion([0.3])
    base = disc_graph_volume(fam, 0.3)[0]
    for alpha in (0.4, 2.0, 5.1):
        assert abs(disc_graph_volume(fam, 0.3 * np.exp(1j * alpha))[0] - base) <= 1e-10


def test_additivity_and_monotonicity():
    s = 0.2
    full = disc_graph_volume(hopf_inclusion([s]), s)[0]
    inner = disc_graph_volume(hopf_inclusion([s], radius=0.4), s)[0]
    annulus = disc_graph_volume(hopf_inclusion([s], r_cut=0.4), s)[0]
    assert inner + annulus == pytest.approx(full, rel=1e-12)
    assert inner == pytest.approx(hopf_inclusion_volume(s, 0.4), rel=1e-10)
    half = family_volume_scan(hopf_inclusion([1, 0.5, 0.1], radius=0.5), 100)
    whole = family_volume_scan(hopf_inclusion([1, 0.5, 0.1]), 100)
    assert all(a["volume"] < b["volume"] for a, b in zip(half.rows, whole.rows))


def test_volumes_at_least_area():
    scan = family_volume_scan(hopf_inclusion([2, 1, 0.3], r_cut=0.2), 100)
    assert all(r["volume"] >= scan.area for r in scan.rows)
    assert scan.area == pytest.approx(math.pi * (1 - 0.04))


def test_scan_examples():
    assert family_volume_scan(constant_family([0, 1, 2j]), 4).bounded
    scan = family_volume_scan(hopf_inclusion([0.5, 0.1, 0.01]), 10)
    assert not scan.bounded
    assert scan.slope == pytest.approx(2 * math.pi, rel=0.05)
    d = scan.to_dict()
    assert d["rows"][0]["s"] == [0.5, 0.0]
    with pytest.raises(DomainError):
        family_volume_scan(hopf_inclusion([]), 10)


def test_singular_image_reported():
    with pytest.raises(SingularPointError) as e:
        disc_graph_volume(hopf_inclusion([0.0]), 0.0)
    assert abs(e.value.point) < 1e-6


def test_non_holomorphic_rejected():
    def mapping(s, zeta):
        val = np.stack([zeta.conj(), np.full_like(zeta, s)], axis=-1)
        return HoloMapJet(val, np.broadcast_to(np.array([1.0, 0.0], complex), val.shape))
    with pytest.raises(DomainError, match="holomorphic"):
        DiscFamily([1.0], mapping, hopf_metric(2))


def test_holomorphic_nonlinear_family():
    # f(zeta) = (zeta, s + zeta^2): Cauchy-Riemann holds, volume exceeds the inclusion
    def mapping(s, zeta):
        val = np.stack([zeta, s + zeta**2], axis=-1)
        jac = np.stack([np.ones_like(zeta), 2 * zeta], axis=-1)
        return HoloMapJet(val, jac)
    fam = DiscFamily([2.0], mapping, euclidean(2))
    assert fam.cauchy_riemann_residual() <= 1e-8
    # flat target: density is |f'|^2 = 1 + 4|zeta|^2, integral pi + pi + 2 pi / 3 * ... = pi(1 + 1 + 2)
    v = disc_graph_volume(fam, 2.0)[0]
    assert v == pytest.approx(math.pi + math.pi * (1 + 2), rel=1e-12)


def test_nu_threshold():
    assert nu_threshold(NuTable(((2, 3),))) == 6
    assert nu_threshold(NuTable(((2, 3), (1, 4)))) == 4
    with pytest.raises(DomainError):
        NuTable(())
    with pytest.raises(DomainError):
        NuTable(((1, 0),))


def test_gap_check_examples():
    const = family_volume_scan(constant_family([0, 0.5, 1]), 10)
    assert volume_gap_check(const, 1e-6, 0.5, 1.0).passed
    near0 = family_volume_scan(hopf_inclusion([0.2, 0.1, 0.05, 0.01]), 100)
    g = volume_gap_check(near0, 1.0, 0.0, 0.25)
    assert not g.passed and g.max_gap > 0.5 and g.points == 4
    near1 = family_volume_scan(hopf_inclusion([0.96, 0.98, 1, 1.02, 1.04]), 100)
    g = volume_gap_check(near1, 10.0, 1.0, 0.05)
    assert g.passed and g.max_gap < 5
    expected_gap = hopf_inclusion_volume(0.96) - hopf_inclusion_volume(1.04)
    assert g.max_gap == pytest.approx(expected_gap, rel=1e-6)


def test_gap_check_errors():
    scan = family_volume_scan(constant_family([1.0]), 10)
    with pytest.raises(DomainError, match="no grid points"):
        volume_gap_check(scan, 1.0, 5.0, 0.1)
    with pytest.raises(DomainError):
        volume_gap_check(scan, 0.0, 1.0, 0.1)


def test_registry():
    fam = get_family("hopf-inclusion", [1.0], form="hopf2")
    assert fam.name == "hopf-inclusion"
    with pytest.raises(DomainError, match="unknown family"):
        get_family("nope", [1.0])


def test_singular_image_off_center():
    # (zeta - 0.5, 0) passes through the puncture at zeta = 0.5
    def mapping(s, zeta):
        val = np.stack([zeta - 0.5, np.full_like(zeta, s)], axis=-1)
        return HoloMapJet(val, np.broadcast_to(np.array([1.0, 0.0], complex), val.shape))
    fam = DiscFamily([0.0], mapping, hopf_metric(2))
    with pytest.raises(SingularPointError) as e:
        disc_graph_volume(fam, 0.0)
    assert abs(e.value.point - 0.5) < 1e-9
