"""Normal forms of strictly plurisubharmonic Morse germs at a critical point.

A germ is given by its second-order Wirtinger jet.  Near a critical point
it reads ``rho = Q(z) + <z, z> + conj(Q(z)) + O(|z|^3)``; a linear change of
the Levi form to the identity followed by a unitary Takagi change brings it
to

    rho = sum_j a_j (z_j^2 + conj(z_j)^2) + |z|^2 + O(|z|^3)
        = sum_j (1 + 2 a_j) x_j^2 + (1 - 2 a_j) y_j^2 + O(|z|^3)

with ``a_1 >= ... >= a_n >= 0``.  The first ``q`` coordinates are those with
``a_j >= 1/2``.
"""
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Optional

import numpy as np

from . import czlinalg
from .errors import DegenerateMorseError, DomainError, MinorantViolation, NotCriticalError

CRITICAL_TOL = 1e-10
DEGENERACY_TOL = 1e-9


@dataclass(frozen=True)
class ScalarJet2:
    """Second-order jet of a real function on C^n at the origin.

    ``dzdz[j, k] = d^2 rho / dz_j dz_k`` and ``dzdzbar[j, k] = d^2 rho / dzbar_j dz_k``,
    so the quadratic Taylor part is ``Re(z^T dzdz z) + z^H dzdzbar z``.
    ``cubic_bound`` is a constant ``M`` with ``|rho - taylor_2| <= M |z|^3``
    on the ball of radius ``r_jet``.  ``evaluator``, when supplied, computes
    the germ itself on arrays of points with shape ``(..., n)``.
    """

    value: float
    dz: np.ndarray
    dzdz: np.ndarray
    dzdzbar: np.ndarray
    cubic_bound: float = 0.0
    r_jet: float = np.inf
    evaluator: Optional[Callable[[np.ndarray], np.ndarray]] = field(default=None, compare=False)

    def __post_init__(self):
        dz = np.atleast_1d(np.asarray(self.dz, dtype=complex))
        object.__setattr__(self, "dz", dz)
        object.__setattr__(self, "dzdz", czlinalg.as_symmetric(self.dzdz))
        object.__setattr__(self, "dzdzbar", czlinalg.as_hermitian(self.dzdzbar))
        object.__setattr__(self, "value", float(self.value))
        n = dz.shape[0]
        if self.dzdz.shape != (n, n) or self.dzdzbar.shape != (n, n):
            raise DomainError("jet blocks have inconsistent dimensions")
        if self.cubic_bound < 0:
            raise DomainError("cubic_bound must be nonnegative")

    @property
    def n(self):
        return self.dz.shape[0]

    @classmethod
    def from_quadratic(cls, Q, H, value=0.0, **kwargs):
        """Jet of ``Q(z) + z^H H z + conj(Q(z))`` with ``Q(z) = z^T Q z``."""
        Q = np.asarray(Q, dtype=complex)
        return cls(value, np.zeros(Q.shape[0], complex), 2 * Q, H, **kwargs)

    def taylor(self, z):
        z = np.asarray(z, dtype=complex)
        lin = 2 * np.real(z @ self.dz)
        holo = np.real(np.einsum("...j,jk,...k->...", z, self.dzdz, z))
        levi = np.real(np.einsum("...j,jk,...k->...", z.conj(), self.dzdzbar, z))
        return self.value + lin + holo + levi

    def evaluate(self, z):
        if self.evaluator is not None:
            return np.asarray(self.evaluator(np.asarray(z, dtype=complex)), dtype=float)
        return self.taylor(z)

    def lower_bound(self, z):
        """Certified lower bound from the Taylor part and the cubic remainder bound."""
        r = np.linalg.norm(np.asarray(z, dtype=complex), axis=-1)
        return self.taylor(z) - self.cubic_bound * r**3


@dataclass(frozen=True)
class NormalForm:
    """Invariants of a Morse critical point.

    ``C_total`` is the composed change of frame ``z = C_total z'`` after which
    the quadratic part is ``sum a_j (z_j'^2 + conj(z_j')^2) + |z'|^2``.
    """

    a: np.ndarray
    q: int
    C_total: np.ndarray
    degenerate: np.ndarray

    @property
    def n(self):
        return len(self.a)

    @property
    def is_degenerate(self):
        return bool(np.any(self.degenerate))


class Case(str, Enum):
    CASE1 = "case1"
    CASE2 = "case2"


@dataclass(frozen=True)
class MinorantParams:
    delta: float
    delta1: float
    radius: float


@dataclass
class MinorantReport:
    min_margin: float
    argmin: np.ndarray
    samples: int
    certified: bool
    gap: float
    remainder_at_radius: float


def extract_quadratic_germ(jet, tol=CRITICAL_TOL):
    """Holomorphic quadratic part ``Q`` and Levi form ``H`` at a critical point."""
    grad = float(np.linalg.norm(jet.dz))
    if grad > tol:
        raise NotCriticalError(grad)
    return jet.dzdz / 2, jet.dzdzbar


def normalize_critical_point(jet):
    Q, H = extract_quadratic_germ(jet)
    levi = czlinalg.levi_normalize(H)
    Q1 = czlinalg.transform_quadratic(Q, levi.C)
    tk = czlinalg.takagi_factorize(Q1)
    # Q1 = U diag(d) U^T, so w = conj(U) v turns w^T Q1 w into sum d_j v_j^2.
    C = levi.C @ tk.U.conj()
    # Descending d already lists a_j >= 1/2 first; the stable sort keeps that
    # explicit should the factorization order ever change.
    order = np.argsort(-tk.d, kind="stable")
    a = tk.d[order]
    C = C[:, order]
    q = int(np.count_nonzero(a >= 0.5 - DEGENERACY_TOL))
    degenerate = np.abs(a - 0.5) <= DEGENERACY_TOL
    return NormalForm(a=a, q=q, C_total=C, degenerate=degenerate)


def normal_form_residual(jet, nf):
    """Max-entry distance of the transformed quadratic part from its normal form."""
    Q, H = extract_quadratic_germ(jet)
    C = nf.C_total
    Qn = czlinalg.transform_quadratic(Q, C)
    Hn = czlinalg.transform_hermitian(H, C)
    return max(
        float(np.max(np.abs(Qn - np.diag(nf.a)))),
        float(np.max(np.abs(Hn - np.eye(nf.n)))),
    )


def real_quadratic_matrix(a):
    """Matrix of the normalized real quadratic form in ``(x_1..x_n, y_1..y_n)``.

    Eigenvalues are exactly ``1 + 2 a_j`` and ``1 - 2 a_j``.
    """
    a = np.asarray(a, dtype=float)
    return np.diag(np.concatenate([1 + 2 * a, 1 - 2 * a]))


def real_hessian_index(nf):
    """Number of negative directions of the real Hessian (the ``y_j`` with ``a_j > 1/2``)."""
    if nf.is_degenerate:
        bad = np.flatnonzero(nf.degenerate).tolist()
        raise DegenerateMorseError(f"degenerate Morse point: |a_j - 1/2| <= {DEGENERACY_TOL} at {bad}")
    return int(np.count_nonzero(nf.a > 0.5))


def classify_case(nf):
    return Case.CASE2 if nf.q == nf.n else Case.CASE1


def check_minorant_params(nf, p):
    if p.delta <= 0 or p.delta1 <= 0 or p.radius <= 0:
        raise DomainError("delta, delta1 and radius must be positive")
    if nf.q < nf.n:
        slack = float(np.min(1 - 2 * nf.a[nf.q:]))
        if not p.delta1 < slack:
            raise DomainError(f"delta1 = {p.delta1} must be < min(1 - 2 a_j) = {slack} over j > q")
        if p.delta > slack - p.delta1:
            raise DomainError(
                f"delta = {p.delta} must be <= min(1 - 2 a_j) - delta1 = {slack - p.delta1}"
            )


def _split(nf, z):
    z = np.asarray(z, dtype=complex)
    if z.shape[-1] != nf.n:
        raise DomainError(f"point has dimension {z.shape[-1]}, normal form has {nf.n}")
    return z


def minorant_value(nf, p, z, check=True):
    """Quadratic minorant in normalized coordinates.

    ``sum_{j<=q} (2a_j - d1 + 1) x_j^2 - (2a_j + d1 - 1) y_j^2 + delta sum_{j>q} |z_j|^2``
    """
    if check:
        check_minorant_params(nf, p)
    z = _split(nf, z)
    q = nf.q
    a = nf.a[:q]
    x, y = z[..., :q].real, z[..., :q].imag
    head = np.sum((2 * a - p.delta1 + 1) * x**2 - (2 * a + p.delta1 - 1) * y**2, axis=-1)
    tail = p.delta * np.sum(np.abs(z[..., q:]) ** 2, axis=-1)
    return head + tail


def sample_ball(n, radius, count, rng, boundary_fraction=0.25):
    """Points in the complex ball of C^n: a uniform bulk plus a share on the sphere."""
    g = rng.standard_normal((count, n)) + 1j * rng.standard_normal((count, n))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    r = radius * rng.uniform(size=count) ** (1.0 / (2 * n))
    r[: int(boundary_fraction * count)] = radius
    return g * r[:, None]


def verify_minorant(jet, nf, p, samples=2000, seed=0):
    """Sample the normalized ball and check ``rho >= rho_1`` pointwise.

    The pointwise gap between the normalized quadratic part and the minorant
    is at least ``delta1 |z'|^2``, so ``delta1 >= M |C|^3 radius`` certifies the
    inequality on the whole ball; ``certified`` records whether it holds.
    Without an exact evaluator the germ is replaced by its certified lower
    bound ``taylor - M |z|^3``.  Raises :class:`MinorantViolation` on the
    first sampled point where the inequality fails.
    """
    check_minorant_params(nf, p)
    C = nf.C_total
    c_norm = float(np.linalg.norm(C, 2))
    gap = p.delta1
    remainder = jet.cubic_bound * c_norm**3 * p.radius
    certified = remainder <= gap and c_norm * p.radius <= jet.r_jet

    rng = np.random.default_rng(seed)
    zn = sample_ball(nf.n, p.radius, samples, rng)
    zn[0] = 0.0
    z = zn @ C.T
    if jet.evaluator is not None:
        rho = jet.evaluate(z)
    else:
        rho = jet.lower_bound(z)
    margin = (rho - jet.value) - minorant_value(nf, p, zn, check=False)
    i = int(np.argmin(margin))
    report = MinorantReport(
        min_margin=float(margin[i]),
        argmin=zn[i],
        samples=samples,
        certified=bool(certified),
        gap=gap,
        remainder_at_radius=remainder,
    )
    scale = 1e-12 * (1.0 + float(np.abs(rho - jet.value).max()))
    if margin[i] < -scale:
        raise MinorantViolation(zn[i], margin[i], report)
    return report
