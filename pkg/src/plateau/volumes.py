"""Graph volumes of holomorphic disc families.

For a disc ``f_s: Delta -> X`` the graph volume with respect to the product
of the flat disc metric and a Hermitian form ``w`` on ``X`` is

    Vol(Gamma_{f_s}) = area(Delta) + int_Delta f_s^* w,

and ``f_s^* w = 2 (f'^T W conj(f')) dA`` in the coefficient convention of
:mod:`plateau.forms`.
"""
import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Optional

import numpy as np

from .errors import DomainError, SingularPointError
from .forms import SINGULAR_RADIUS, HoloMapJet, get_form, hopf_metric, pullback

CR_TOL = 1e-8


@dataclass(frozen=True)
class DiscQuadrature:
    """Gauss-Legendre panels in the radius, trapezoid in the angle.

    Panels are geometric toward the center: ``[R q^{k+1}, R q^k]`` for
    ``k < levels`` plus one inner panel.
    """

    radial_nodes: int = 16
    angular_nodes: int = 64
    levels: int = 20
    ratio: float = 0.5

    def refined(self):
        return DiscQuadrature(self.radial_nodes + 8, self.angular_nodes + 32, self.levels, self.ratio)


@dataclass
class DiscFamily:
    """Holomorphic discs ``zeta -> mapping(s, zeta)`` into the domain of ``form``.

    ``mapping`` is vectorized in ``zeta`` and returns a :class:`HoloMapJet`
    whose jacobian is the complex derivative ``d f / d zeta`` (shape
    ``(..., N)`` or ``(..., N, 1)``).
    """

    params: list
    mapping: Callable = field(repr=False)
    form: object = field(repr=False)
    r_cut: float = 0.0
    radius: float = 1.0
    name: str = "family"
    validate: bool = True

    def __post_init__(self):
        self.params = [complex(s) for s in self.params]
        if not 0 <= self.r_cut < self.radius:
            raise DomainError("need 0 <= r_cut < radius")
        if self.validate and self.params:
            res = self.cauchy_riemann_residual()
            if res > CR_TOL:
                raise DomainError(f"{self.name}: map is not holomorphic in zeta (residual {res:.3e})")

    def jet(self, s, zeta):
        j = self.mapping(s, np.asarray(zeta, dtype=complex))
        jac = np.asarray(j.jacobian, dtype=complex)
        val = np.asarray(j.value, dtype=complex)
        if jac.ndim == val.ndim:
            jac = jac[..., None]
        return HoloMapJet(val, jac)

    def cauchy_riemann_residual(self, samples=16, seed=0, h=1e-5):
        """Max over samples of ``|df/dx - J| + |df/(i dy) - J|`` (central differences)."""
        rng = np.random.default_rng(seed)
        r = self.r_cut + (self.radius - self.r_cut) * (0.1 + 0.8 * rng.uniform(size=samples))
        zeta = r * np.exp(2j * np.pi * rng.uniform(size=samples))
        worst = 0.0
        for s in self.params[:4]:
            J = self.jet(s, zeta).jacobian[..., 0]
            dx = (self.jet(s, zeta + h).value - self.jet(s, zeta - h).value) / (2 * h)
            dy = (self.jet(s, zeta + 1j * h).value - self.jet(s, zeta - 1j * h).value) / (2j * h)
            scale = 1.0 + np.abs(J)
            worst = max(worst, float(np.max((np.abs(dx - J) + np.abs(dy - J)) / scale)))
        return worst


def _panels(r_cut, R, quad):
    edges = [R * quad.ratio**k for k in range(quad.levels + 1)]
    edges.append(0.0)
    panels = []
    for hi, lo in zip(edges[:-1], edges[1:]):
        if hi <= r_cut:
            break
        panels.append((max(lo, r_cut), hi))
    return panels


def _locate_singular_image(fam, s, zeta0, steps=30):
    """Gauss-Newton on ``|f(zeta)|^2`` from ``zeta0``; the nodes never sit on a
    zero of ``f``, so a crossing of the puncture has to be found between them."""
    zeta = complex(zeta0)
    for _ in range(steps):
        j = fam.jet(s, np.array([zeta]))
        f, J = j.value[0], j.jacobian[0, :, 0]
        g = np.vdot(J, J).real
        if g == 0:
            break
        step = np.vdot(J, f) / g
        zeta -= step
        if abs(zeta) > fam.radius:
            return None
        if abs(step) < 1e-15:
            break
    norm = float(np.linalg.norm(fam.jet(s, np.array([zeta])).value[0]))
    if norm <= SINGULAR_RADIUS and fam.r_cut <= abs(zeta) <= fam.radius:
        return zeta
    return None


def _disc_integral(fam, s, quad):
    x, wx = np.polynomial.legendre.leggauss(quad.radial_nodes)
    phi = 2 * np.pi * np.arange(quad.angular_nodes) / quad.angular_nodes
    dphi = 2 * np.pi / quad.angular_nodes
    totals = []
    closest = (np.inf, 0j)
    for lo, hi in _panels(fam.r_cut, fam.radius, quad):
        r = lo + (x + 1) * (hi - lo) / 2
        wr = wx * (hi - lo) / 2
        zeta = (r[:, None] * np.exp(1j * phi)[None, :]).ravel()
        jet = fam.jet(s, zeta)
        if fam.form.domain != "affine":
            norms = np.linalg.norm(jet.value, axis=-1)
            if np.any(norms <= SINGULAR_RADIUS):
                bad = complex(zeta[int(np.argmin(norms))])
                raise SingularPointError(bad, f"{fam.name}: image of zeta={bad} hits the singular set of {fam.form.name}")
            i = int(np.argmin(norms))
            if norms[i] < closest[0]:
                closest = (float(norms[i]), complex(zeta[i]))
        density = 2 * np.real(pullback(fam.form, jet, zeta)[..., 0, 0])
        integrand = (1.0 + density).reshape(len(r), len(phi))
        totals.append(float(np.sum(wr * r * integrand.sum(axis=1))) * dphi)
    if np.isfinite(closest[0]):
        bad = _locate_singular_image(fam, s, closest[1])
        if bad is not None:
            raise SingularPointError(bad, f"{fam.name}: image of zeta={bad} hits the singular set of {fam.form.name}")
    return math.fsum(totals)


def disc_graph_volume(fam, s, quad=DiscQuadrature()):
    """Graph volume of ``f_s`` and the difference to a refined quadrature."""
    coarse = _disc_integral(fam, complex(s), quad)
    fine = _disc_integral(fam, complex(s), quad.refined())
    return fine, abs(fine - coarse)


@dataclass
class VolumeScan:
    rows: list
    C0: float
    bounded: bool
    slope: Optional[float]
    area: float

    def to_dict(self):
        return {
            "rows": [{"s": [r["s"].real, r["s"].imag], "volume": r["volume"], "error": r["error"]}
                     for r in self.rows],
            "C0": self.C0,
            "bounded": self.bounded,
            "slope": self.slope,
            "area": self.area,
        }


def divergence_slope(rows):
    """Least-squares slope of volume against ``log(1/|s|)`` over grid points with ``0 < |s| < 1``."""
    pts = [(math.log(1 / abs(r["s"])), r["volume"]) for r in rows if 0 < abs(r["s"]) < 1]
    if len(pts) < 2:
        return None
    x, y = np.array(pts).T
    return float(np.polyfit(x, y, 1)[0])


def family_volume_scan(fam, C0, quad=DiscQuadrature()):
    if not fam.params:
        raise DomainError("parameter grid is empty")
    rows = []
    for s in fam.params:
        v, e = disc_graph_volume(fam, s, quad)
        rows.append({"s": s, "volume": v, "error": e})
    area = math.pi * (fam.radius**2 - fam.r_cut**2)
    bounded = all(r["volume"] <= C0 for r in rows)
    return VolumeScan(rows=rows, C0=float(C0), bounded=bounded, slope=divergence_slope(rows), area=area)


@dataclass(frozen=True)
class NuTable:
    """Pairs ``(vol(A_{q-j}), nu_j)``, ``j = 1..q``; all caller-supplied."""

    entries: tuple

    def __post_init__(self):
        if not self.entries:
            raise DomainError("nu table is empty")
        for vol, nu in self.entries:
            if not (vol > 0 and nu > 0):
                raise DomainError(f"nu table entries must be positive, got ({vol}, {nu})")


def nu_threshold(t):
    """``nu = min_j vol(A_{q-j}) * nu_j``."""
    return min(vol * nu for vol, nu in t.entries)


class GapCheck(NamedTuple):
    passed: bool
    max_gap: float
    points: int


def volume_gap_check(scan, nu, s0, radius):
    """Pairwise graph-volume gaps below ``nu / 2`` on the grid points near ``s0``."""
    if not nu > 0:
        raise DomainError("nu must be positive")
    s0 = complex(s0)
    vols = [r["volume"] for r in scan.rows if abs(r["s"] - s0) <= radius]
    if not vols:
        raise DomainError(f"no grid points within {radius} of s0 = {s0}")
    gap = max(vols) - min(vols)
    return GapCheck(gap < nu / 2, float(gap), len(vols))


# ---------------------------------------------------------------------------
# built-in families


def hopf_inclusion(params, form=None, **kwargs):
    """``f_s(zeta) = (zeta, s)`` into ``C^2 minus 0`` with the Hopf metric."""
    def mapping(s, zeta):
        val = np.stack([zeta, np.full_like(zeta, s)], axis=-1)
        jac = np.broadcast_to(np.array([1.0, 0.0], dtype=complex), val.shape)
        return HoloMapJet(val, jac)
    return DiscFamily(params, mapping, form or hopf_metric(2), name="hopf-inclusion", **kwargs)


def constant_family(params, point=(1.0, 0.0), form=None, **kwargs):
    p = np.asarray(point, dtype=complex)

    def mapping(s, zeta):
        val = np.broadcast_to(p, np.shape(zeta) + p.shape)
        return HoloMapJet(val, np.zeros_like(val))
    return DiscFamily(params, mapping, form or hopf_metric(len(p)), name="constant", **kwargs)


FAMILY_REGISTRY = {
    "hopf-inclusion": hopf_inclusion,
    "constant": constant_family,
}


def get_family(name, params, form=None, **kwargs):
    try:
        build = FAMILY_REGISTRY[name]
    except KeyError:
        raise DomainError(f"unknown family {name!r}; known: {sorted(FAMILY_REGISTRY)}") from None
    if isinstance(form, str):
        form = get_form(form)
    return build(params, form=form, **kwargs)

