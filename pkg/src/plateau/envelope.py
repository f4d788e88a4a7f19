"""Hartogs figures and the continuity-principle sweep for the Case 2 domain.

In Case 2 (all ``a_j >= 1/2``) the positivity domain of the minorant, after
the rescaling ``z_j -> sqrt(b_j) z_j``, contains

    D1 = {|x|^2 > delta0 |y|^2},     z = x + i y,

and D1 contains the tube torus ``{|x| = 1, |y| <= eta}``.  The quadrics
``C_t = {z_1^2 + ... + z_n^2 = t}`` cut to the ball of radius
``R = sqrt(1 + eta^2)`` form a continuous family whose boundaries stay in D1
for every ``t in [0, R^2]``, whose top member ``t = R^2`` lies in D1, and
whose bottom member passes through the origin.
"""
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, WrongCaseError
from .morse import Case, classify_case, minorant_value, MinorantParams

ETA_SHRINK = 1e-6
TORUS_TOL = 1e-12
SLICE_TOL = 1e-10
ORIGIN_TOL = 1e-12


@dataclass(frozen=True)
class HartogsFigureParams:
    n: int
    k: int
    r: float

    def __post_init__(self):
        if self.n < 1 or self.k < 1:
            raise DomainError("n and k must be >= 1")
        if not 0 < self.r < 1:
            raise DomainError(f"r must lie in (0, 1), got {self.r}")


def in_hartogs_figure(z_prime, z_dblprime, p):
    """Membership in ``Delta^n x A^k(1-r, 1)  U  Delta^n(r) x Delta^k``.

    Annulus and inner-ball conditions use Euclidean norms; the ambient
    polydisk uses the max-norm.
    """
    zp = np.atleast_1d(np.asarray(z_prime, dtype=complex))
    zpp = np.atleast_1d(np.asarray(z_dblprime, dtype=complex))
    if zp.shape != (p.n,) or zpp.shape != (p.k,):
        raise DomainError(f"expected points of dimension ({p.n}, {p.k})")
    if np.max(np.abs(zp)) >= 1 or np.max(np.abs(zpp)) >= 1:
        raise DomainError("point lies outside the unit polydisk")
    outer = np.linalg.norm(zpp)
    return bool(1 - p.r < outer < 1 or np.linalg.norm(zp) < p.r)


@dataclass(frozen=True)
class Case1Figure:
    nf: object
    delta: float
    delta1: float
    eps: float

    def __post_init__(self):
        if classify_case(self.nf) is not Case.CASE1:
            raise WrongCaseError("wrong case: the Hartogs figure needs q <= n - 1")
        if not 0 < self.eps < 1:
            raise DomainError("eps must lie in (0, 1)")


def case1_parts(f, z):
    """The two coordinates ``(phi, psi)`` that cut out the Case 1 figure."""
    z = np.asarray(z, dtype=complex)
    q = f.nf.q
    a = f.nf.a[:q]
    x, y = z[..., :q].real, z[..., :q].imag
    phi = np.sum((2 * a - f.delta1 + 1) * x**2 - (2 * a + f.delta1 - 1) * y**2, axis=-1)
    psi = f.delta * np.sum(np.abs(z[..., q:]) ** 2, axis=-1)
    return phi, psi


def case1_contains(f, z):
    if not isinstance(f, Case1Figure):
        raise WrongCaseError("wrong case")
    z = np.asarray(z, dtype=complex)
    if np.linalg.norm(z) >= 1:
        raise DomainError("point lies outside the unit ball")
    phi, psi = case1_parts(f, z)
    return bool((phi > 0 and psi < 1) or (phi > -f.eps and psi > f.eps))


def case2_scaling(nf, delta1):
    """Coefficients ``b_j, c_j`` of the Case 2 domain and ``delta0 = max c_j / b_j``.

    In the coordinates ``w_j = sqrt(b_j) z_j`` the domain becomes
    ``sum Re(w_j)^2 > sum (c_j / b_j) Im(w_j)^2``.
    """
    if classify_case(nf) is not Case.CASE2:
        raise WrongCaseError("wrong case: Case 2 needs q = n")
    if not 0 < delta1 < 1:
        raise DomainError("delta1 must lie in (0, 1)")
    b = 2 * nf.a - delta1 + 1
    c = 2 * nf.a + delta1 - 1
    ratios = c / b
    return b, c, float(np.max(ratios))


def _check_delta0(delta0):
    if delta0 >= 1:
        raise DomainError(
            f"Case 2 scaling produced non-contracting delta0 = {delta0} (need b_j > c_j)"
        )
    if delta0 <= 0:
        raise DomainError(f"delta0 must be positive, got {delta0}")


def d1plus_margin(delta0, z):
    """``|x|^2 - delta0 |y|^2``; positive exactly on D1."""
    _check_delta0(delta0)
    z = np.asarray(z, dtype=complex)
    return np.sum(z.real**2, axis=-1) - delta0 * np.sum(z.imag**2, axis=-1)


@dataclass(frozen=True)
class TubeTorus:
    eta: float

    def __post_init__(self):
        if not self.eta > 1:
            raise DomainError(f"eta must exceed 1, got {self.eta}")

    @classmethod
    def for_delta0(cls, delta0):
        """Largest admissible tube (shrunk by 1e-6) strictly inside D1."""
        _check_delta0(delta0)
        return cls((1 - ETA_SHRINK) / np.sqrt(delta0))


def tube_torus_contains(t, z):
    z = np.asarray(z, dtype=complex)
    xn = np.linalg.norm(z.real, axis=-1)
    yn = np.linalg.norm(z.imag, axis=-1)
    out = (np.abs(xn - 1) <= TORUS_TOL) & (yn <= t.eta)
    return bool(out) if out.ndim == 0 else out


@dataclass
class QuadricSlice:
    t: float
    R: float
    points: np.ndarray
    ring: np.ndarray


def _orthonormal_pairs(n, count, rng):
    """Unit vectors ``u, v`` with ``u . v = 0`` in R^n."""
    v = rng.standard_normal((count, n))
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    u = rng.standard_normal((count, n))
    u -= np.sum(u * v, axis=1, keepdims=True) * v
    u /= np.linalg.norm(u, axis=1, keepdims=True)
    # one more projection pass keeps (u, v) at rounding level
    u -= np.sum(u * v, axis=1, keepdims=True) * v
    u /= np.linalg.norm(u, axis=1, keepdims=True)
    return u, v


def sample_quadric_slice(t, R, count, seed=0, n=2, ring_count=None):
    """Sample ``C_t`` cut to the ball of radius ``R``.

    Each point is ``a u + i b v`` with orthonormal real ``u, v``,
    ``b in [0, sqrt((R^2 - t) / 2)]`` and ``a = sqrt(t + b^2)``, so that
    ``|x|^2 - |y|^2 = t`` and ``(x, y) = 0``.  Half of the points are
    rank-one (``b = 0``, purely real) and the first of them is always that
    stratum's representative; the other half draw ``b`` uniformly.
    ``ring`` holds points with ``|z| = R``, i.e. on the boundary of the slice.
    """
    if n < 2:
        raise DomainError("quadric slices need n >= 2")
    R2 = R * R
    if not 0 <= t <= R2:
        raise DomainError(f"t = {t} outside [0, R^2] = [0, {R2}]")
    ring_count = count if ring_count is None else ring_count
    rng = np.random.default_rng(seed)

    b_max = np.sqrt(max(R2 - t, 0.0) / 2)
    u, v = _orthonormal_pairs(n, count, rng)
    b = rng.uniform(0.0, b_max, size=count)
    b[: (count + 1) // 2] = 0.0
    a = np.sqrt(t + b * b)
    points = a[:, None] * u + 1j * b[:, None] * v

    ur, vr = _orthonormal_pairs(n, ring_count, rng)
    ar = np.sqrt(t + b_max * b_max)
    ring = ar * ur + 1j * b_max * vr
    return QuadricSlice(t=float(t), R=float(R), points=points, ring=ring)


def slice_residuals(s):
    """Max ``|sum z_j^2 - t|`` and ``|(x, y)|`` over all points of a slice."""
    z = np.concatenate([s.points, s.ring])
    if not len(z):
        return 0.0, 0.0
    eq = np.abs(np.sum(z * z, axis=-1) - s.t)
    dot = np.abs(np.sum(z.real * z.imag, axis=-1))
    return float(eq.max()), float(dot.max())


def boundary_ring_margin(t, delta0, R):
    """D1-margin on ``C_t  n  {|z| = R}``, where ``|x|^2 = (R^2+t)/2`` and ``|y|^2 = (R^2-t)/2``."""
    _check_delta0(delta0)
    R2 = R * R
    if not 0 <= t <= R2:
        raise DomainError(f"t = {t} outside [0, R^2]")
    return ((1 - delta0) * R2 + (1 + delta0) * t) / 2


@dataclass
class SweepCertificate:
    delta0: float
    eta: float
    R: float
    t_grid: np.ndarray = field(repr=False)
    samples_per_slice: int
    min_margin: float
    top_margin: float
    ring_margin: float
    closed_form_error: float
    max_slice_residual: float
    origin_distance: float
    verdict: bool

    def to_dict(self):
        return {
            "delta0": self.delta0,
            "eta": self.eta,
            "R": self.R,
            "t_steps": int(len(self.t_grid)),
            "samples_per_slice": self.samples_per_slice,
            "min_margin": self.min_margin,
            "top_margin": self.top_margin,
            "ring_margin": self.ring_margin,
            "closed_form_error": self.closed_form_error,
            "max_slice_residual": self.max_slice_residual,
            "origin_distance": self.origin_distance,
            "verdict": self.verdict,
        }


def sweep_certificate(delta0, t_steps=100, samples_per_slice=500, seed=0, n=2):
    """Certify the quadric sweep from the top slice down to the origin.

    Checks that the top slice and every boundary ring lie in D1 (sampled,
    with the ring margin matched against its closed form) and that the
    bottom slice contains the origin.
    """
    _check_delta0(delta0)
    if t_steps < 2 or samples_per_slice < 1:
        raise DomainError("need at least two t-steps and one sample per slice")
    eta = (1 - ETA_SHRINK) / np.sqrt(delta0)
    R = float(np.sqrt(1 + eta * eta))
    R2 = R * R
    t_grid = np.linspace(R2, 0.0, t_steps)
    t_grid[0], t_grid[-1] = R2, 0.0
    seeds = np.random.SeedSequence(seed).spawn(t_steps)

    top_margin = np.inf
    ring_margin = np.inf
    closed_err = 0.0
    residual = 0.0
    origin = np.inf
    for i, t in enumerate(t_grid):
        s = sample_quadric_slice(t, R, samples_per_slice, seed=seeds[i], n=n)
        residual = max(residual, *slice_residuals(s))
        m_ring = d1plus_margin(delta0, s.ring)
        closed = boundary_ring_margin(t, delta0, R)
        closed_err = max(closed_err, float(np.max(np.abs(m_ring - closed))))
        ring_margin = min(ring_margin, float(m_ring.min()))
        if i == 0:
            top_margin = float(d1plus_margin(delta0, s.points).min())
        if i == t_steps - 1:
            origin = float(np.linalg.norm(s.points, axis=-1).min())

    min_margin = min(top_margin, ring_margin)
    verdict = (
        min_margin > 0
        and origin <= ORIGIN_TOL
        and closed_err <= SLICE_TOL
        and residual <= SLICE_TOL
    )
    return SweepCertificate(
        delta0=float(delta0),
        eta=float(eta),
        R=R,
        t_grid=t_grid,
        samples_per_slice=samples_per_slice,
        min_margin=min_margin,
        top_margin=top_margin,
        ring_margin=ring_margin,
        closed_form_error=closed_err,
        max_slice_residual=residual,
        origin_distance=origin,
        verdict=bool(verdict),
    )


def case2_sweep(nf, delta1, **kwargs):
    """Run the sweep for the ``delta0`` produced by a Case 2 normal form."""
    _, _, delta0 = case2_scaling(nf, delta1)
    return sweep_certificate(delta0, **kwargs)


def d_plus_contains(nf, delta, delta1, z):
    """``rho_1 > 0`` in normalized coordinates."""
    return minorant_value(nf, MinorantParams(delta, delta1, np.inf), z, check=False) > 0
