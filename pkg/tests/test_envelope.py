import time

import numpy as np
import pytest
from numpy.testing import assert_allclose

from plateau.envelope import (
    Case1Figure,
    HartogsFigureParams,
    TubeTorus,
    boundary_ring_margin,
    case1_contains,
    case1_parts,
    case2_scaling,
    case2_sweep,
    d1plus_margin,
    d_plus_contains,
    in_hartogs_figure,
    sample_quadric_slice,
    slice_residuals,
    sweep_certificate,
    tube_torus_contains,
)
from plateau.errors import DomainError, WrongCaseError
from plateau.morse import MinorantParams, ScalarJet2, minorant_value, normalize_critical_point


def nf_from_a(a):
    n = len(a)
    return normalize_critical_point(ScalarJet2.from_quadratic(np.diag(a).astype(complex), np.eye(n)))


def test_hartogs_examples():
    p = HartogsFigureParams(1, 1, 0.5)
    assert in_hartogs_figure(0.9, 0.9, p)
    assert in_hartogs_figure(0.1, 0.0, p)
    assert not in_hartogs_figure(0.9, 0.0, p)


def test_hartogs_euclidean_annulus():
    p = HartogsFigureParams(1, 2, 0.2)
    # max-norm 0.7 < 1 - r, Euclidean norm 0.99 > 1 - r
    assert in_hartogs_figure(0.9, [0.7, 0.7], p)
    assert not in_hartogs_figure(0.9, [0.5, 0.5], p)


def test_hartogs_errors():
    with pytest.raises(DomainError):
        HartogsFigureParams(1, 1, 1.0)
    with pytest.raises(DomainError, match="polydisk"):
        in_hartogs_figure(1.0, 0.0, HartogsFigureParams(1, 1, 0.5))


def test_case1_examples():
    f = Case1Figure(nf_from_a([0.9, 0.1]), delta=0.3, delta1=0.1, eps=0.1)
    assert case1_contains(f, np.array([0.5, 0.0]))  # phi > 0, psi = 0
    assert not case1_contains(f, np.zeros(2))


def test_case1_wrong_case():
    with pytest.raises(WrongCaseError, match="wrong case"):
        Case1Figure(nf_from_a([0.9, 0.7]), 0.1, 0.1, 0.1)


def test_case1_members_have_positive_minorant():
    nf = nf_from_a([0.9, 0.6, 0.1])
    f = Case1Figure(nf, delta=0.5, delta1=0.1, eps=0.05)
    p = MinorantParams(0.5, 0.1, 1.0)
    rng = np.random.default_rng(3)
    hits = 0
    for _ in range(3000):
        z = rng.standard_normal(3) + 1j * rng.standard_normal(3)
        z *= rng.uniform() ** (1 / 6) * 0.999 / np.linalg.norm(z)
        if case1_contains(f, z):
            hits += 1
            phi, psi = case1_parts(f, z)
            assert minorant_value(nf, p, z) == pytest.approx(phi + psi)
            assert minorant_value(nf, p, z) > -f.eps
    assert hits > 100


def test_d1plus_margin_examples():
    assert d1plus_margin(0.5, np.array([0.6, 0.8])) == pytest.approx(1.0)
    assert d1plus_margin(0.25, np.array([1j, 0])) == pytest.approx(-0.25)
    rng = np.random.default_rng(0)
    z = rng.standard_normal((20, 3)) + 1j * rng.standard_normal((20, 3))
    expected = [sum(v.real**2 for v in p) - 0.3 * sum(v.imag**2 for v in p) for p in z]
    assert_allclose(d1plus_margin(0.3, z), expected, rtol=1e-13)


def test_d1plus_margin_rejects_delta0():
    for bad in (0.0, 1.0, 1.5):
        with pytest.raises(DomainError):
            d1plus_margin(bad, np.zeros(2))


def test_tube_torus_examples():
    t = TubeTorus.for_delta0(0.25)
    assert tube_torus_contains(t, np.array([1.0, 0.0]))
    assert not tube_torus_contains(t, np.array([2.0, 0.0]))
    assert tube_torus_contains(t, np.array([1.0, 1j * t.eta]))
    with pytest.raises(DomainError):
        TubeTorus(1.0)


def test_tube_torus_inside_d1plus():
    for delta0 in (0.1, 0.5, 0.9):
        t = TubeTorus.for_delta0(delta0)
        rng = np.random.default_rng(1)
        x = rng.standard_normal((200, 2))
        x /= np.linalg.norm(x, axis=1, keepdims=True)
        y = rng.standard_normal((200, 2))
        y *= t.eta * rng.uniform(size=(200, 1)) / np.linalg.norm(y, axis=1, keepdims=True)
        z = x + 1j * y
        assert np.all(tube_torus_contains(t, z))
        assert np.all(d1plus_margin(delta0, z) >= 1 - delta0 * t.eta**2 - 1e-12)
        assert 1 - delta0 * t.eta**2 > 0


def test_slice_top_and_bottom():
    R = 2.0
    top = sample_quadric_slice(R * R, R, 50, seed=1)
    assert_allclose(top.points.imag, 0, atol=1e-15)
    assert_allclose(np.linalg.norm(top.points, axis=1), R, rtol=1e-14)
    bottom = sample_quadric_slice(0.0, R, 50, seed=1)
    assert np.linalg.norm(bottom.points[0]) == 0.0


@pytest.mark.parametrize("n", [2, 3, 5])
def test_slice_defining_equations(n):
    R = 3.0
    for t in np.linspace(0, R * R, 7):
        s = sample_quadric_slice(t, R, 200, seed=int(t * 10), n=n)
        eq, dot = slice_residuals(s)
        assert eq <= 1e-10 and dot <= 1e-10
        assert np.all(np.linalg.norm(s.points, axis=1) <= R * (1 + 1e-14))
        assert_allclose(np.linalg.norm(s.ring, axis=1), R, rtol=1e-13)
        z = np.concatenate([s.points, s.ring])
        assert_allclose(np.sum(z.real**2, 1) - np.sum(z.imag**2, 1), t, atol=1e-10)


def test_slice_rejects_t():
    with pytest.raises(DomainError):
        sample_quadric_slice(5.0, 2.0, 10)
    with pytest.raises(DomainError):
        sample_quadric_slice(-0.1, 2.0, 10)


def test_boundary_ring_margin_examples():
    R = np.sqrt(5.0)
    assert boundary_ring_margin(0.0, 0.25, R) == pytest.approx(1.875)
    assert boundary_ring_margin(5.0, 0.25, R) == pytest.approx(5.0)
    ts = np.linspace(0, 5, 50)
    m = np.array([boundary_ring_margin(t, 0.4, R) for t in ts])
    assert np.all(m > 0) and np.all(np.diff(m) > 0)
    d = [boundary_ring_margin(1.0, d0, R) for d0 in (0.1, 0.5, 0.9)]
    assert d[0] > d[1] > d[2]


def test_boundary_ring_margin_matches_samples():
    R = 2.5
    for t in (0.0, 1.0, 6.25):
        s = sample_quadric_slice(t, R, 10, ring_count=100, seed=2)
        assert_allclose(d1plus_margin(0.3, s.ring), boundary_ring_margin(t, 0.3, R), atol=1e-12)


def test_sweep_examples():
    c = sweep_certificate(0.25)
    assert c.verdict
    assert c.R == pytest.approx(np.sqrt(1 + c.eta**2))
    assert c.ring_margin >= 1.875 * (1 - 1e-5)
    assert c.origin_distance == 0.0
    c9 = sweep_certificate(0.9)
    assert c9.verdict and c9.min_margin < c.min_margin
    assert np.all(np.diff(c.t_grid) < 0)


def test_sweep_non_contracting():
    with pytest.raises(DomainError, match="non-contracting"):
        sweep_certificate(1 + 1e-3)


def test_sweep_deterministic():
    a = sweep_certificate(0.5, t_steps=20, samples_per_slice=50, seed=7).to_dict()
    b = sweep_certificate(0.5, t_steps=20, samples_per_slice=50, seed=7).to_dict()
    assert a == b


def test_case2_scaling_and_sweep():
    nf = nf_from_a([0.8, 0.6])
    b, c, delta0 = case2_scaling(nf, 0.1)
    assert_allclose(b, 2 * nf.a - 0.1 + 1)
    assert_allclose(c, 2 * nf.a + 0.1 - 1)
    assert delta0 == pytest.approx(max(c / b))
    assert case2_sweep(nf, 0.1, t_steps=10, samples_per_slice=20).verdict
    with pytest.raises(WrongCaseError):
        case2_scaling(nf_from_a([0.8, 0.2]), 0.1)


def test_rescaled_d1plus_inside_d_plus():
    nf = nf_from_a([0.9, 0.55])
    delta1 = 0.05
    b, _, delta0 = case2_scaling(nf, delta1)
    rng = np.random.default_rng(4)
    w = rng.standard_normal((4000, 2)) + 1j * rng.standard_normal((4000, 2))
    inside = d1plus_margin(delta0, w) > 0
    z = w / np.sqrt(b)
    assert inside.sum() > 500
    assert np.all(d_plus_contains(nf, 0.1, delta1, z[inside]))
