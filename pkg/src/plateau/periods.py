"""Periods of d^c w over 3-spheres in C^2 and the spherical-shell obstruction.

Spheres are parametrized in Hopf coordinates

    z_1 = c_1 + rho cos(theta) e^{i phi_1},  z_2 = c_2 + rho sin(theta) e^{i phi_2},

``theta in [0, pi/2]`` (Gauss-Legendre), ``phi_i in [0, 2 pi)`` (trapezoid).
"""
import math
from dataclasses import asdict, dataclass, field
from enum import Enum

import numpy as np

from .errors import DomainError
from .forms import dc_at, ddc_at, hopf_metric, HopfManifold

DEFAULT_GRID = (64, 64, 64)
REFINED_GRID = (96, 96, 96)


@dataclass(frozen=True)
class SphereCycle:
    radius: float = 1.0
    center: tuple = (0.0, 0.0)
    orientation: str = "outward"
    grid: tuple = DEFAULT_GRID
    refined_grid: tuple = REFINED_GRID

    def __post_init__(self):
        if not self.radius > 1e-9:
            raise DomainError(f"sphere radius must exceed 1e-9, got {self.radius}")
        if self.orientation not in ("outward", "inward"):
            raise DomainError(f"orientation must be 'outward' or 'inward', got {self.orientation!r}")
        if len(self.center) != 2:
            raise DomainError("spheres live in C^2: center needs two coordinates")
        if any(int(g) < 2 for g in tuple(self.grid) + tuple(self.refined_grid)):
            raise DomainError("quadrature grids need at least two nodes per axis")

    def flipped(self):
        o = "inward" if self.orientation == "outward" else "outward"
        return SphereCycle(self.radius, self.center, o, self.grid, self.refined_grid)

    def to_dict(self):
        c = [complex(v) for v in self.center]
        return {
            "radius": self.radius,
            "center": [[v.real, v.imag] for v in c],
            "orientation": self.orientation,
            "grid": list(self.grid),
            "refined_grid": list(self.refined_grid),
        }


@dataclass
class PeriodReport:
    value: float
    error: float
    form: str
    cycle: dict = field(default_factory=dict)

    def to_dict(self):
        return asdict(self)


class Verdict(str, Enum):
    NO_OBSTRUCTION = "no_obstruction"
    SHELL_OBSTRUCTION = "shell_obstruction"


@dataclass
class ObstructionVerdict:
    period: float
    error: float
    tolerance: float
    verdict: Verdict

    def to_dict(self):
        return {"period": self.period, "error": self.error, "tolerance": self.tolerance,
                "verdict": self.verdict.value}


def _hopf_frame(theta, phi1, phi2):
    """Unit normal and coordinate tangent vectors at unit radius."""
    e1, e2 = np.exp(1j * phi1), np.exp(1j * phi2)
    c, s = np.cos(theta), np.sin(theta)
    normal = np.stack([c * e1, s * e2], axis=-1)
    d_theta = np.stack([-s * e1, c * e2], axis=-1)
    d_phi1 = np.stack([1j * c * e1, np.zeros_like(e2)], axis=-1)
    d_phi2 = np.stack([np.zeros_like(e1), 1j * s * e2], axis=-1)
    return normal, d_theta, d_phi1, d_phi2


def _real(v):
    return np.array([v[0].real, v[0].imag, v[1].real, v[1].imag])


def _chart_orientation():
    """Sign of ``det(N, d_theta, d_phi1, d_phi2)`` against ``dx1^dy1^dx2^dy2``.

    Boundary orientation puts the outward normal first, so this is the sign
    relating the coordinate order ``(theta, phi1, phi2)`` to the outward
    orientation of the sphere.
    """
    frame = _hopf_frame(np.pi / 5, 0.3, 1.1)
    return float(np.sign(np.linalg.det(np.array([_real(v) for v in frame]))))


CHART_SIGN = _chart_orientation()


def _sphere_quadrature(w, cycle, grid):
    n_theta, n1, n2 = (int(g) for g in grid)
    x, wx = np.polynomial.legendre.leggauss(n_theta)
    theta = (x + 1) * np.pi / 4
    w_theta = wx * np.pi / 4
    phi1 = 2 * np.pi * np.arange(n1) / n1
    phi2 = 2 * np.pi * np.arange(n2) / n2
    P1, P2 = np.meshgrid(phi1, phi2, indexing="ij")
    P1, P2 = P1.ravel(), P2.ravel()
    rho = float(cycle.radius)
    center = np.asarray(cycle.center, dtype=complex)
    sign = CHART_SIGN * (1.0 if cycle.orientation == "outward" else -1.0)
    cell = (2 * np.pi / n1) * (2 * np.pi / n2)

    totals = []
    for th, wt in zip(theta, w_theta):
        normal, dt, dp1, dp2 = _hopf_frame(np.full_like(P1, th), P1, P2)
        z = center + rho * normal
        form = dc_at(w, z)
        vals = form.evaluate(rho * dt, rho * dp1, rho * dp2)
        totals.append(wt * cell * float(np.sum(vals.real)))
    return sign * math.fsum(totals)


def sphere_period(w, cycle):
    """``int_{S^3} d^c w`` with a refinement-difference error estimate."""
    if w.n != 2:
        raise DomainError("sphere periods are defined for forms on C^2")
    value = _sphere_quadrature(w, cycle, cycle.grid)
    refined = _sphere_quadrature(w, cycle, cycle.refined_grid)
    return PeriodReport(value=refined, error=abs(refined - value), form=w.name, cycle=cycle.to_dict())


def shell_ddc_integral(w, r_inner, r_outer, center=(0.0, 0.0), grid=(16, 32, 32, 32)):
    """``int dd^c w`` over the shell ``r_inner <= |z - center| <= r_outer``.

    By Stokes this equals ``period(r_outer) - period(r_inner)`` for outward
    spheres; ``r_inner = 0`` integrates over the ball.
    """
    if w.n != 2:
        raise DomainError("shell integrals are defined for forms on C^2")
    if not 0 <= r_inner < r_outer:
        raise DomainError("need 0 <= r_inner < r_outer")
    n_r, n_theta, n1, n2 = (int(g) for g in grid)
    xr, wr = np.polynomial.legendre.leggauss(n_r)
    radii = r_inner + (xr + 1) * (r_outer - r_inner) / 2
    w_r = wr * (r_outer - r_inner) / 2
    xt, wt = np.polynomial.legendre.leggauss(n_theta)
    theta = (xt + 1) * np.pi / 4
    w_theta = wt * np.pi / 4
    P1, P2 = np.meshgrid(2 * np.pi * np.arange(n1) / n1, 2 * np.pi * np.arange(n2) / n2, indexing="ij")
    P1, P2 = P1.ravel(), P2.ravel()
    center = np.asarray(center, dtype=complex)
    cell = (2 * np.pi / n1) * (2 * np.pi / n2)

    totals = []
    for r, w_rr in zip(radii, w_r):
        for th, w_tt in zip(theta, w_theta):
            normal, dt, dp1, dp2 = _hopf_frame(np.full_like(P1, th), P1, P2)
            form = ddc_at(w, center + r * normal)
            vals = form.evaluate(normal, r * dt, r * dp1, r * dp2)
            totals.append(w_rr * w_tt * cell * float(np.sum(vals.real)))
    return CHART_SIGN * math.fsum(totals)


def branch_bound(boundary_period, min_cycle_period, slack=0.0):
    """Upper bound on the number of singular branches: ``floor((|P| + slack) / m)``.

    ``slack`` is an upper bound on the error of ``P``; a computed period is
    only known up to it, and adding it keeps the result a valid upper bound.
    """
    if not min_cycle_period > 0:
        raise DomainError(f"min_cycle_period must be positive, got {min_cycle_period}")
    if not slack >= 0:
        raise DomainError(f"slack must be nonnegative, got {slack}")
    return int(math.floor((abs(boundary_period) + slack) / min_cycle_period))


def plateau_obstruction(w, contour, tol=1e-6):
    """Nonzero period of ``d^c w`` over the contour certifies a spherical shell."""
    rep = sphere_period(w, contour)
    verdict = Verdict.SHELL_OBSTRUCTION if abs(rep.value) > tol else Verdict.NO_OBSTRUCTION
    return ObstructionVerdict(period=rep.value, error=rep.error, tolerance=tol, verdict=verdict)


def hopf_generator_period(h=HopfManifold(), grid=DEFAULT_GRID, refined_grid=REFINED_GRID):
    """Period of the Hopf metric over the fundamental sphere ``|z| = 1``."""
    if h.n != 2:
        raise DomainError("generator periods are computed for Hopf surfaces (n = 2)")
    return sphere_period(hopf_metric(2), SphereCycle(1.0, grid=grid, refined_grid=refined_grid))
