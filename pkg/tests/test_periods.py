import math

import numpy as np
import pytest

from plateau.errors import DomainError
from plateau.forms import euclidean, gauss_weighted, hopf_metric, radial_power
from plateau.periods import (
    SphereCycle,
    Verdict,
    branch_bound,
    hopf_generator_period,
    plateau_obstruction,
    shell_ddc_integral,
    sphere_period,
)
from oracles import ball_volume_c2

FOUR_PI2 = 4 * math.pi**2
SMALL = dict(grid=(24, 24, 24), refined_grid=(32, 32, 32))


def cycle(radius=1.0, **kw):
    return SphereCycle(radius, **{**SMALL, **kw})


def test_euclidean_period_zero():
    for rho in (1.0, 1.7):
        assert abs(sphere_period(euclidean(2), cycle(rho)).value) <= 1e-12


def test_hopf2_period():
    rep = sphere_period(hopf_metric(2), cycle(1.0))
    assert rep.value == pytest.approx(-FOUR_PI2, rel=1e-3)
    assert rep.error >= 0
    assert rep.form == "hopf2"


def test_hopf2_radius_independence():
    p1 = sphere_period(hopf_metric(2), cycle(1.0)).value
    p2 = sphere_period(hopf_metric(2), cycle(2.0)).value
    assert abs(p1 - p2) <= 1e-6 * abs(p1)


@pytest.mark.parametrize("rho", [1.0, 1.3])
def test_stokes_oracle_r2_omega0(rho):
    # d^c(r^2) ^ omega0 over the sphere equals dd^c(r^2) ^ omega0 over the ball, 8 vol(B)
    w = radial_power(2, 2)
    period = sphere_period(w, cycle(rho)).value
    ball = shell_ddc_integral(w, 0.0, rho, grid=(8, 12, 12, 12))
    assert period == pytest.approx(8 * ball_volume_c2(rho), rel=1e-10)
    assert ball == pytest.approx(8 * ball_volume_c2(rho), rel=1e-10)
    assert period == pytest.approx(FOUR_PI2 * rho**4, rel=1e-10)


def test_orientation_flip():
    c = cycle(1.0)
    p = sphere_period(hopf_metric(2), c).value
    assert sphere_period(hopf_metric(2), c.flipped()).value == -p


def test_shell_additivity():
    w = gauss_weighted(2)
    p1 = sphere_period(w, cycle(0.8)).value
    p2 = sphere_period(w, cycle(1.5)).value
    shell = shell_ddc_integral(w, 0.8, 1.5, grid=(24, 16, 16, 16))
    assert p2 - p1 == pytest.approx(shell, rel=1e-8)
    assert abs(shell_ddc_integral(hopf_metric(2), 1.0, 2.0, grid=(8, 8, 8, 8))) <= 1e-6


def test_positive_scaling():
    w = hopf_metric(2)
    c = cycle(1.0)
    p = sphere_period(w, c).value
    assert sphere_period(w.scaled(3.0), c).value == pytest.approx(3 * p, rel=1e-13)
    for tol in (1e-6, 1.0, 50.0):
        v1 = plateau_obstruction(w, c, tol).verdict
        v3 = plateau_obstruction(w.scaled(3.0), c, 3 * tol).verdict
        assert v1 == v3


def test_obstruction_examples():
    v = plateau_obstruction(hopf_metric(2), cycle(1.0))
    assert v.verdict is Verdict.SHELL_OBSTRUCTION
    assert plateau_obstruction(euclidean(2), cycle(1.0)).verdict is Verdict.NO_OBSTRUCTION
    # a sphere away from the puncture bounds a ball where w is smooth
    off = plateau_obstruction(hopf_metric(2), cycle(1.0, center=(3.0, 0.0)))
    assert off.verdict is Verdict.NO_OBSTRUCTION
    assert abs(off.period) <= 1e-10
    assert v.to_dict()["verdict"] == "shell_obstruction"


def test_verdict_matches_tolerance():
    v = plateau_obstruction(hopf_metric(2), cycle(1.0), tol=40.0)
    assert (v.verdict is Verdict.NO_OBSTRUCTION) == (abs(v.period) <= 40.0)


def test_branch_bound_examples():
    assert branch_bound(0.0, FOUR_PI2) == 0
    assert branch_bound(-FOUR_PI2, FOUR_PI2) == 1
    assert branch_bound(3 * 2.5 - 1e-9, 2.5) == 2
    with pytest.raises(DomainError):
        branch_bound(1.0, 0.0)
    with pytest.raises(DomainError):
        branch_bound(1.0, -1.0)


def test_branch_bound_monotone():
    ps = np.linspace(0, 50, 101)
    b = [branch_bound(p, 4.0) for p in ps]
    assert all(x <= y for x, y in zip(b, b[1:]))
    ms = np.linspace(0.5, 20, 40)
    b = [branch_bound(30.0, m) for m in ms]
    assert all(x >= y for x, y in zip(b, b[1:]))


def test_branch_bound_slack():
    p = FOUR_PI2 * (1 - 1e-15)
    assert branch_bound(p, FOUR_PI2) == 0
    assert branch_bound(p, FOUR_PI2, slack=1e-12) == 1


def test_hopf_generator_period():
    rep = hopf_generator_period(grid=(16, 16, 16), refined_grid=(24, 24, 24))
    assert abs(rep.value) == pytest.approx(FOUR_PI2, rel=1e-10)


def test_sphere_cycle_validation():
    with pytest.raises(DomainError):
        SphereCycle(0.0)
    with pytest.raises(DomainError):
        SphereCycle(1.0, orientation="sideways")
    with pytest.raises(DomainError):
        sphere_period(hopf_metric(3), SphereCycle(1.0))
    d = SphereCycle(2.0, center=(1j, 0)).to_dict()
    assert d["center"] == [[0.0, 1.0], [0.0, 0.0]]
