"""Jet calculus of (1,1)-forms on domains of C^n.

A Hermitian (1,1)-form is written ``w = i sum_{j,k} w_{j kbar} dz_j ^ dzbar_k``,
so the flat Kahler form ``(i/2) sum dz_j ^ dzbar_j`` has coefficients
``delta_jk / 2``.  Convention: ``d^c = i (dbar - d)``, hence ``dd^c = 2i d dbar``.

Pointwise forms of higher degree are stored as dense antisymmetric tensors
over the complex coframe ``(dz_1..dz_n, dzbar_1..dzbar_n)`` with the
normalization ``form = (1/p!) sum T_{a..} theta^a ^ ...``; evaluating on
tangent vectors is then a plain contraction.
"""
from dataclasses import dataclass, field
from itertools import combinations, permutations
from typing import Callable, NamedTuple

import numpy as np

from .errors import DomainError, SingularPointError
from .morse import ScalarJet2

CONVENTION = "dc=i(dbar-d)"
SINGULAR_RADIUS = 1e-9
POSITIVITY_TOL = 1e-12


@dataclass(frozen=True)
class CoefficientJet:
    """Coefficients of a (1,1)-form and their derivatives at a batch of points.

    ``w[..., j, k]`` is ``w_{j kbar}``; ``dw[..., j, k, m]`` its ``d/dz_m``;
    ``dwbar[..., j, k, m]`` its ``d/dzbar_m``; ``ddw[..., j, k, m, l]`` is
    ``d^2 w_{j kbar} / dz_m dzbar_l``.
    """

    w: np.ndarray
    dw: np.ndarray
    dwbar: np.ndarray
    ddw: np.ndarray

    @property
    def n(self):
        return self.w.shape[-1]

    def hermitian_residual(self):
        sw = np.swapaxes
        return max(
            float(np.max(np.abs(self.w - sw(self.w, -1, -2).conj()), initial=0.0)),
            float(np.max(np.abs(self.dwbar - sw(self.dw, -2, -3).conj()), initial=0.0)),
            float(np.max(np.abs(self.ddw - np.swapaxes(sw(self.ddw, -3, -4), -1, -2).conj()), initial=0.0)),
        )

    def __add__(self, other):
        return CoefficientJet(self.w + other.w, self.dw + other.dw, self.dwbar + other.dwbar, self.ddw + other.ddw)

    def scaled(self, c):
        return CoefficientJet(c * self.w, c * self.dw, c * self.dwbar, c * self.ddw)


@dataclass(frozen=True)
class Form11:
    """A (1,1)-form given by a vectorized coefficient oracle.

    ``domain`` is one of ``"affine"`` (all of C^n), ``"punctured_space"``,
    ``"shell"`` (with ``shell = (a, b)``) or ``"hopf_quotient"``; the last
    three exclude a ball of radius ``SINGULAR_RADIUS`` around the origin.
    """

    n: int
    coefficients: Callable[[np.ndarray], CoefficientJet] = field(repr=False)
    name: str = "form"
    domain: str = "punctured_space"
    positive: bool = True
    shell: tuple = None

    def jet(self, z):
        z = np.asarray(z, dtype=complex)
        if z.shape[-1] != self.n:
            raise DomainError(f"point of dimension {z.shape[-1]} for a form on C^{self.n}")
        if self.domain != "affine":
            r = np.linalg.norm(z, axis=-1)
            if np.any(r <= SINGULAR_RADIUS):
                bad = z.reshape(-1, self.n)[int(np.argmin(r.reshape(-1)))]
                raise SingularPointError(bad, f"{self.name}: query within {SINGULAR_RADIUS} of the puncture")
        j = self.coefficients(z)
        if self.positive:
            w = 0.5 * (j.w + np.swapaxes(j.w, -1, -2).conj())
            lam = np.linalg.eigvalsh(w)[..., 0]
            if np.any(lam <= POSITIVITY_TOL):
                raise DomainError(f"{self.name} is flagged positive but has eigenvalue {lam.min():.3e}")
        return j

    def __add__(self, other):
        if other.n != self.n:
            raise DomainError("dimension mismatch")
        f, g = self.coefficients, other.coefficients
        dom = self.domain if self.domain == other.domain else "punctured_space"
        return Form11(self.n, lambda z: f(z) + g(z), f"({self.name}+{other.name})", dom,
                      self.positive and other.positive)

    def scaled(self, c):
        f = self.coefficients
        return Form11(self.n, lambda z: f(z).scaled(c), f"{c}*{self.name}", self.domain,
                      self.positive and c > 0, self.shell)


def radial_form(n, profile, name, domain="punctured_space", positive=True):
    """The form ``f(|z|^2) * (i/2) sum dz_j ^ dzbar_j``.

    ``profile(s)`` returns ``(f, f', f'')`` evaluated at ``s = |z|^2``.
    """

    def coefficients(z):
        s = np.sum(np.abs(z) ** 2, axis=-1)
        f0, f1, f2 = (np.asarray(v, dtype=float) for v in profile(s))
        eye = np.eye(n)
        shape = z.shape[:-1]
        f0 = np.broadcast_to(f0, shape)[..., None, None]
        f1 = np.broadcast_to(f1, shape)
        f2 = np.broadcast_to(f2, shape)
        zb = z.conj()
        w = 0.5 * f0 * eye
        dw = 0.5 * np.einsum("...,jk,...m->...jkm", f1, eye, zb)
        dwbar = 0.5 * np.einsum("...,jk,...m->...jkm", f1, eye, z)
        inner = np.einsum("...,...m,...l->...ml", f2, zb, z) + f1[..., None, None] * eye
        ddw = 0.5 * np.einsum("jk,...ml->...jkml", eye, inner)
        return CoefficientJet(w.astype(complex), dw, dwbar, ddw.astype(complex))

    return Form11(n, coefficients, name, domain, positive)


def euclidean(n=2):
    return radial_form(n, lambda s: (np.ones_like(s), np.zeros_like(s), np.zeros_like(s)),
                       "euclidean", domain="affine")


def hopf_metric(n):
    """``(i/2) sum dz_j ^ dzbar_j / |z|^2``, invariant under ``z -> 2z``."""
    if n < 2:
        raise DomainError("hopf_metric needs n >= 2")
    return radial_form(n, lambda s: (1 / s, -1 / s**2, 2 / s**3), f"hopf{n}")


def gauss_weighted(n=2, sign=-1.0):
    """``exp(sign |z|^2)`` times the flat form."""
    def profile(s):
        e = np.exp(sign * s)
        return e, sign * e, sign * sign * e
    return radial_form(n, profile, "gauss-weighted" if sign < 0 else "gauss-weighted+", domain="affine")


def radial_power(n, power):
    """``|z|^power`` times the flat form."""
    p = power / 2.0

    def profile(s):
        return s**p, p * s ** (p - 1), p * (p - 1) * s ** (p - 2)
    domain = "affine" if power >= 0 and float(power).is_integer() and power % 2 == 0 else "punctured_space"
    return radial_form(n, profile, f"r^{power:g}*euclidean", domain=domain)


FORM_REGISTRY = {
    "euclidean": lambda: euclidean(2),
    "hopf2": lambda: hopf_metric(2),
    "hopf3": lambda: hopf_metric(3),
    "gauss-weighted": lambda: gauss_weighted(2),
}


def get_form(name):
    try:
        return FORM_REGISTRY[name]()
    except KeyError:
        raise DomainError(f"unknown form {name!r}; known: {sorted(FORM_REGISTRY)}") from None


# ---------------------------------------------------------------------------
# pointwise exterior algebra


def _antisymmetrize(A, degree):
    axes = A.ndim - degree
    base = list(range(axes))
    out = np.zeros_like(A)
    for perm in permutations(range(degree)):
        sign = _perm_sign(perm)
        out = out + sign * np.transpose(A, base + [axes + p for p in perm])
    return out


def _perm_sign(perm):
    sign = 1
    perm = list(perm)
    for i in range(len(perm)):
        while perm[i] != i:
            j = perm[i]
            perm[i], perm[j] = perm[j], perm[i]
            sign = -sign
    return sign


def coframe(v):
    """Values ``(dz_1(v)..dz_n(v), dzbar_1(v)..dzbar_n(v))`` on real tangent vectors."""
    v = np.asarray(v, dtype=complex)
    return np.concatenate([v, v.conj()], axis=-1)


class PointForm:
    """A p-form at one point (or a batch of points) of C^n.

    Held as raw wedge coefficients ``terms`` (``form = sum A_{a..} theta^a ^ ...``);
    the antisymmetric ``tensor`` is built on first use.
    """

    def __init__(self, n, degree, terms):
        self.n = n
        self.degree = degree
        self.terms = np.asarray(terms, dtype=complex)
        self._tensor = None

    @property
    def batch_shape(self):
        return self.terms.shape[: self.terms.ndim - self.degree]

    @property
    def tensor(self):
        if self._tensor is None:
            self._tensor = _antisymmetrize(self.terms, self.degree)
        return self._tensor

    def components(self):
        """Canonical components ``{(a_1 < ... < a_p): coefficient}`` at a single point."""
        if self.batch_shape:
            raise DomainError("components() needs a single-point form")
        T = self.tensor
        return {I: complex(T[I]) for I in combinations(range(2 * self.n), self.degree)}

    def max_abs(self):
        """Largest component magnitude at each point."""
        T = self.tensor
        return np.max(np.abs(T.reshape(self.batch_shape + (-1,))), axis=-1)

    def evaluate(self, *vectors):
        """Value on real tangent vectors, ``sum A_{a..} det[theta^a(v_b)]``."""
        if len(vectors) != self.degree:
            raise DomainError(f"a {self.degree}-form takes {self.degree} vectors")
        batch = np.broadcast_shapes(self.batch_shape, *(np.shape(v)[:-1] for v in vectors))
        m = 2 * self.n
        terms = np.broadcast_to(self.terms, batch + (m,) * self.degree).reshape((-1,) + (m,) * self.degree)
        thetas = [np.broadcast_to(coframe(v), batch + (m,)).reshape(-1, m, 1) for v in vectors]
        out = np.zeros(terms.shape[0], dtype=complex)
        for perm in permutations(range(self.degree)):
            val = terms
            for k in reversed(range(self.degree)):
                val = (val.reshape(val.shape[0], -1, m) @ thetas[perm[k]])[..., 0]
            out += _perm_sign(perm) * val.reshape(-1)
        return out.reshape(batch)

    def __add__(self, other):
        return PointForm(self.n, self.degree, self.terms + other.terms)


def coordinate_label(a, n):
    return f"dz{a + 1}" if a < n else f"dzb{a - n + 1}"


def dc_at(w, z):
    """``d^c w = sum d_m w_{jk} dz_m^dz_j^dzbar_k - sum dbar_m w_{jk} dzbar_m^dz_j^dzbar_k``."""
    jet = w.jet(z)
    return dc_from_jet(jet)


def dc_from_jet(jet):
    n = jet.n
    batch = jet.w.shape[:-2]
    A = np.zeros(batch + (2 * n,) * 3, dtype=complex)
    A[..., :n, :n, n:] = np.einsum("...jkm->...mjk", jet.dw)
    A[..., n:, :n, n:] = -np.einsum("...jkm->...mjk", jet.dwbar)
    return PointForm(n, 3, A)


def ddc_at(w, z):
    """``dd^c w = -2 sum d_l dbar_m w_{jk} dz_l ^ dzbar_m ^ dz_j ^ dzbar_k``."""
    return ddc_from_jet(w.jet(z))


def ddc_from_jet(jet):
    n = jet.n
    batch = jet.w.shape[:-2]
    A = np.zeros(batch + (2 * n,) * 4, dtype=complex)
    A[..., :n, n:, :n, n:] = -2 * np.einsum("...jklm->...lmjk", jet.ddw)
    return PointForm(n, 4, A)


def real_frame(n):
    """Oriented real frame ``(d/dx_1, d/dy_1, ..., d/dx_n, d/dy_n)`` as complex vectors."""
    out = []
    for j in range(n):
        e = np.zeros(n, dtype=complex)
        e[j] = 1.0
        out += [e, 1j * e]
    return out


# ---------------------------------------------------------------------------
# checks


@dataclass(frozen=True)
class Sampler:
    """Seeded points with ``inner <= |z - center| <= outer``, uniform in volume."""

    count: int = 100
    seed: int = 0
    inner: float = 1.0
    outer: float = 2.0
    center: tuple = None

    def points(self, n):
        rng = np.random.default_rng(self.seed)
        g = rng.standard_normal((self.count, n)) + 1j * rng.standard_normal((self.count, n))
        g /= np.linalg.norm(g, axis=1, keepdims=True)
        d = 2 * n
        u = rng.uniform(size=self.count)
        r = (self.inner**d + u * (self.outer**d - self.inner**d)) ** (1.0 / d)
        c = np.zeros(n, complex) if self.center is None else np.asarray(self.center, dtype=complex)
        return c + g * r[:, None]


class FormCheck(NamedTuple):
    passed: bool
    residual: float


def is_pluriclosed(w, sampler=Sampler(), tol=1e-8):
    z = sampler.points(w.n)
    res = float(np.max(ddc_at(w, z).max_abs()))
    return FormCheck(res <= tol, res)


def top_coefficient(form, frame=None):
    """Coefficient of a top-degree form against ``dx_1^dy_1^...^dx_n^dy_n``."""
    frame = real_frame(form.n) if frame is None else frame
    return form.evaluate(*frame).real


def _positive_direction_values(phi, u):
    """``(phi ^ i alpha ^ conj(alpha))(frame)`` for a 4-form ``phi`` in C^3 and ``alpha = sum u_j dz_j``."""
    frame = real_frame(3)
    total = np.zeros(u.shape[0])
    alpha = np.array([v @ u.T for v in frame])  # (6, directions)
    for J in combinations(range(6), 2):
        I = tuple(i for i in range(6) if i not in J)
        # sign of the shuffle (I, J) as a permutation of 0..5
        sign = _perm_sign(I + J)
        phi_I = phi.evaluate(*(frame[i] for i in I)).real
        a, b = alpha[J[0]], alpha[J[1]]
        gamma = (1j * (a * b.conj() - b * a.conj())).real
        total += sign * phi_I * gamma
    return total


def is_plurinegative(w, sampler=Sampler(), tol=1e-10, directions=50):
    """Sampled ``dd^c w <= 0``: sign of the top coefficient (n = 2), or of the
    pairing with positive (1,1)-forms ``i u ^ conj(u)`` (n = 3)."""
    if w.n not in (2, 3):
        raise DomainError(f"plurinegativity check supports n in (2, 3), got {w.n}")
    z = sampler.points(w.n)
    worst = -np.inf
    if w.n == 2:
        vals = top_coefficient(ddc_at(w, z))
        worst = float(np.max(vals))
    else:
        rng = np.random.default_rng(sampler.seed + 1)
        for point in z:
            u = rng.standard_normal((directions, 3)) + 1j * rng.standard_normal((directions, 3))
            u /= np.linalg.norm(u, axis=1, keepdims=True)
            vals = _positive_direction_values(ddc_at(w, point), u)
            worst = max(worst, float(np.max(vals)))
    return FormCheck(worst <= tol, worst)


# ---------------------------------------------------------------------------
# maps


class HoloMapJet(NamedTuple):
    value: np.ndarray
    jacobian: np.ndarray


def pullback(w, f, z):
    """Coefficient matrix of ``f^* w`` at ``z``: ``J^T W(f(z)) conj(J)``.

    ``f`` is a holomorphic map given as a callable returning a
    :class:`HoloMapJet` (or a jet already evaluated at ``z``).
    """
    jet = f(np.asarray(z, dtype=complex)) if callable(f) else f
    J = np.asarray(jet.jacobian, dtype=complex)
    W = w.jet(jet.value).w
    return np.einsum("...ja,...jk,...kb->...ab", J, W, J.conj())


def linear_map(A):
    A = np.asarray(A, dtype=complex)
    return lambda z: HoloMapJet(np.asarray(z) @ A.T, np.broadcast_to(A, np.shape(z)[:-1] + A.shape))


@dataclass(frozen=True)
class HopfManifold:
    """``(C^n minus 0) / (z ~ lam z)`` with fundamental annulus ``1 <= |z| < lam``."""

    n: int = 2
    lam: float = 2.0

    def __post_init__(self):
        if not self.lam > 1:
            raise DomainError("contraction factor must exceed 1")

    def normalize(self, z):
        z = np.asarray(z, dtype=complex)
        r = np.linalg.norm(z, axis=-1)
        if np.any(r <= SINGULAR_RADIUS):
            raise SingularPointError(z, "the origin is not a point of the Hopf manifold")
        k = np.floor(np.log(r) / np.log(self.lam))
        out = z * (self.lam ** -k)[..., None]
        rn = np.linalg.norm(out, axis=-1)
        # guard rounding at the edges of the annulus
        out = np.where((rn >= self.lam)[..., None], out / self.lam, out)
        out = np.where((np.linalg.norm(out, axis=-1) < 1)[..., None], out * self.lam, out)
        return out


def descends_to_hopf(w, h=HopfManifold(), sampler=Sampler(), tol=1e-12):
    """Check ``|lam|^2 w(lam z) = w(z)`` (invariance under the deck transformation)."""
    if w.n != h.n:
        raise DomainError("dimension mismatch between form and Hopf manifold")
    z = sampler.points(w.n)
    lam = h.lam
    scaled = pullback(w, linear_map(lam * np.eye(w.n)), z)
    res = float(np.max(np.abs(scaled - w.jet(z).w)))
    return FormCheck(res <= tol, res)


# ---------------------------------------------------------------------------
# finite differences


def _real_derivatives(f, z, h):
    """Central first and second real partials with one Richardson step (O(h^4))."""
    z = np.asarray(z, dtype=complex)
    n = z.shape[0]
    dirs = [np.eye(n, dtype=complex)[j] for j in range(n)] + [1j * np.eye(n, dtype=complex)[j] for j in range(n)]
    f0 = np.asarray(f(z), dtype=complex)

    def first(p, s):
        e = dirs[p] * s
        return (np.asarray(f(z + e)) - np.asarray(f(z - e))) / (2 * s)

    def second(p, q, s):
        if p == q:
            e = dirs[p] * s
            return (np.asarray(f(z + e)) - 2 * f0 + np.asarray(f(z - e))) / (s * s)
        ep, eq = dirs[p] * s, dirs[q] * s
        return (np.asarray(f(z + ep + eq)) - np.asarray(f(z + ep - eq))
                - np.asarray(f(z - ep + eq)) + np.asarray(f(z - ep - eq))) / (4 * s * s)

    def richardson(g, *idx):
        return (4 * g(*idx, h) - g(*idx, 2 * h)) / 3

    m = 2 * n
    grad = np.stack([richardson(first, p) for p in range(m)], axis=-1)
    hess = np.empty(f0.shape + (m, m), dtype=complex)
    for p in range(m):
        for q in range(p, m):
            v = richardson(second, p, q)
            hess[..., p, q] = v
            hess[..., q, p] = v
    return f0, grad, hess


def finite_difference_jet(f, z, h=1e-3):
    """Wirtinger jet of ``f`` at ``z`` from point evaluations.

    A scalar-valued ``f`` yields a :class:`~plateau.morse.ScalarJet2`; an
    ``(n, n)``-valued ``f`` (coefficients ``w_{j kbar}``) yields a
    :class:`CoefficientJet`.  Truncation error is ``O(h^4)`` per component;
    roundoff grows like ``eps |f| / h^2`` in the second derivatives.
    ``f`` is evaluated within distance ``4h`` of ``z``.
    """
    z = np.asarray(z, dtype=complex)
    n = z.shape[0]
    f0, grad, hess = _real_derivatives(f, z, h)
    P = np.hstack([np.eye(n), -1j * np.eye(n)]) / 2  # d/dz
    Pb = np.hstack([np.eye(n), 1j * np.eye(n)]) / 2  # d/dzbar
    d = np.einsum("ip,...p->...i", P, grad)
    dbar = np.einsum("ip,...p->...i", Pb, grad)
    dd = np.einsum("ip,...pq,jq->...ij", P, hess, P)
    ddbar = np.einsum("ip,...pq,jq->...ij", P, hess, Pb)
    if f0.ndim == 0:
        # dzdzbar[j, k] = d^2 / dzbar_j dz_k = ddbar[k, j]
        return ScalarJet2(float(f0.real), d, 0.5 * (dd + dd.T), 0.5 * (ddbar.T + ddbar.conj()))
    if f0.shape != (n, n):
        raise DomainError(f"unsupported evaluator output shape {f0.shape}")
    return CoefficientJet(f0, d, dbar, ddbar)
