"""Free scalar field on the lattice: scaled vs unscaled propagators, hopping
parameter, particle mass, and the Gaussian generating functional.

The unscaled two-point function integrates over the physical Brillouin zone
(-pi/a, pi/a]^d; the scaled one over (-pi, pi]^d; their ratio is the squared
local scaling factor s(a)^2 = a^(d-2) (m_u^2 a^2 + 2 d kappa_u^2).  Massive
integrands are evaluated on tensor Gauss-Legendre grids with one Richardson
refinement for the error estimate; the massless integrand has an integrable
1/q^2 singularity where grids converge too slowly, so it is reduced exactly to
a one-dimensional Laplace transform of a product of scaled Bessel functions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Optional, Sequence

import numpy as np
from scipy import integrate, special

from .group import ValidationError
from .lattice import Lattice

__all__ = [
    "ScalarFieldParams",
    "PropagatorValue",
    "scaled_hopping",
    "scaling_factor",
    "propagator_unscaled",
    "propagator_scaled",
    "propagator_with_error",
    "particle_mass",
    "coincident_bound_constant",
    "gaussian_genfun",
    "finite_lattice_covariance",
]

_BASE_RESOLUTION = {2: 256, 3: 64, 4: 32}


@dataclass(frozen=True)
class ScalarFieldParams:
    """Dimension, spacing, unscaled mass and unscaled hopping parameter."""

    d: int
    a: float
    m_u: float
    kappa_u: float

    def __post_init__(self):
        if self.d not in (2, 3, 4):
            raise ValidationError(f"dimension must be 2, 3 or 4, got {self.d}")
        if not 0.0 < self.a <= 1.0:
            raise ValidationError(f"lattice spacing must be in (0, 1], got {self.a}")
        if self.m_u < 0.0:
            raise ValidationError(f"mass must be nonnegative, got {self.m_u}")
        if self.kappa_u <= 0.0:
            raise ValidationError(f"hopping parameter must be positive, got {self.kappa_u}")

    @property
    def mu2(self) -> float:
        """Dimensionless mass parameter m_u^2 a^2 / (2 kappa_u^2)."""
        return self.m_u**2 * self.a**2 / (2.0 * self.kappa_u**2)


def scaled_hopping(params: ScalarFieldParams) -> float:
    """kappa^2 = 1 / (2d + (m_u a / kappa_u)^2); equals 1/(2d) when massless."""
    return 1.0 / (2.0 * params.d + (params.m_u * params.a / params.kappa_u) ** 2)


def scaling_factor(params: ScalarFieldParams) -> float:
    """s(a) = sqrt(a^(d-2) (m_u^2 a^2 + 2 d kappa_u^2))."""
    return math.sqrt(
        params.a ** (params.d - 2)
        * (params.m_u**2 * params.a**2 + 2.0 * params.d * params.kappa_u**2)
    )


def _integer_separation(params: ScalarFieldParams, sep) -> np.ndarray:
    sep = np.asarray(sep, dtype=float)
    if sep.shape != (params.d,):
        raise ValidationError(f"separation must have {params.d} components, got {sep.shape}")
    n = sep / params.a
    n_int = np.rint(n)
    if np.max(np.abs(n - n_int)) > 1e-9:
        raise ValidationError("separation components must be integer multiples of the spacing")
    return n_int.astype(int)


class PropagatorValue(NamedTuple):
    value: float
    error: float


def _bz_rule(resolution: int, half_width: float):
    """Composite Gauss-Legendre rule with 16-point panels on (-w, w)."""
    n_panels = max(2, resolution // 16)
    base_x, base_w = np.polynomial.legendre.leggauss(16)
    edges = np.linspace(-half_width, half_width, n_panels + 1)
    half = 0.5 * (edges[1:] - edges[:-1])
    mid = 0.5 * (edges[1:] + edges[:-1])
    return (mid[:, None] + half[:, None] * base_x[None, :]).ravel(), (
        half[:, None] * base_w[None, :]
    ).ravel()


def _axis_resolution(base: int, n_mu: int) -> int:
    # oscillatory factors e^{i q n} need panels at the scale of one period
    return max(base, 16 * (2 * abs(n_mu) + 2))


def _bz_sum(params: ScalarFieldParams, n_vec, resolution_scale: int, scaled: bool) -> float:
    """Quadrature sum of cos(momentum . separation) / denominator over the zone.

    scaled=False integrates over p in (-pi/a, pi/a]^d against
    (kappa_u^2/a^2) sum(1 - cos(p a)) + m_u^2/2; scaled=True over q in
    (-pi, pi]^d against 1 - 2 kappa^2 sum(cos q).  No zone-volume prefactor.
    """
    d, a = params.d, params.a
    half_width = math.pi / a if not scaled else math.pi
    kappa2 = scaled_hopping(params)
    exps = []  # per-axis weights folded into oscillatory factors
    cosines = []  # per-axis cosine sums entering the denominator
    for mu in range(d):
        res = _axis_resolution(resolution_scale, int(n_vec[mu]))
        x, w = _bz_rule(res, half_width)
        if not scaled:
            exps.append(w * np.exp(1j * x * (n_vec[mu] * a)))
            cosines.append(np.cos(x * a))
        else:
            exps.append(w * np.exp(1j * x * n_vec[mu]))
            cosines.append(np.cos(x))

    if not scaled:
        const = params.kappa_u**2 / a**2 * d + params.m_u**2 / 2.0
        coeff = params.kappa_u**2 / a**2
    else:
        const = 1.0
        coeff = 2.0 * kappa2

    # denominator = const - coeff * sum_mu cos(...); stream over axis 0
    tail_shape = tuple(c.size for c in cosines[1:])
    tail_cos = np.zeros(tail_shape)
    tail_exp = np.ones(tail_shape, dtype=complex)
    for i, (e, c) in enumerate(zip(exps[1:], cosines[1:])):
        shape = [1] * len(tail_shape)
        shape[i] = -1
        tail_cos = tail_cos + c.reshape(shape)
        tail_exp = tail_exp * e.reshape(shape)
    total = 0.0 + 0.0j
    block = max(1, 4_000_000 // max(1, int(np.prod(tail_shape))))
    e0, c0 = exps[0], cosines[0]
    for i0 in range(0, e0.size, block):
        e_lead = e0[i0 : i0 + block].reshape((-1,) + (1,) * len(tail_shape))
        c_lead = c0[i0 : i0 + block].reshape((-1,) + (1,) * len(tail_shape))
        denom = const - coeff * (c_lead + tail_cos)
        total += np.sum(e_lead * tail_exp / denom)
    return float(np.real(total))


def _laplace_core(n_vec, d: int, t_cut: float = 1.0e4, tail_terms: bool = True) -> float:
    """Massless zone integral (2 pi)^-d Int cos(q.n) / sum_mu (1 - cos q_mu) d^dq
    as Int_0^inf prod_mu e^-t I_{n_mu}(t) dt, for d >= 3.

    The integrand decays like (2 pi t)^(-d/2); the truncated tail is added back
    from the first two terms of that expansion.
    """
    n_abs = [abs(int(v)) for v in n_vec]

    def integrand(t):
        out = np.ones_like(t)
        for n_mu in n_abs:
            out = out * special.ive(n_mu, t)
        return out

    value = 0.0
    edges = [0.0, 30.0, 1000.0, t_cut]
    for lo, hi in zip(edges[:-1], edges[1:]):
        piece, _ = integrate.quad(integrand, lo, hi, limit=400)
        value += piece
    if tail_terms:
        lead = (2.0 * math.pi) ** (-d / 2.0)
        value += lead * t_cut ** (1.0 - d / 2.0) / (d / 2.0 - 1.0)
        corr = sum(4.0 * n_mu**2 - 1.0 for n_mu in n_abs) / 8.0
        value -= lead * corr * t_cut ** (-d / 2.0) / (d / 2.0)
    return value


def _massless_guard(params: ScalarFieldParams) -> None:
    if params.d == 2:
        raise ValidationError(
            "massless two-point function diverges in two dimensions"
        )


def propagator_with_error(
    params: ScalarFieldParams, sep, scaled: bool, resolution: Optional[int] = None
) -> PropagatorValue:
    """Propagator value with a refinement-difference error estimate."""
    n_vec = _integer_separation(params, sep)
    d, a = params.d, params.a
    if params.m_u == 0.0:
        _massless_guard(params)
        core = _laplace_core(n_vec, d)
        err = abs(_laplace_core(n_vec, d, t_cut=4.0e4) - core)
        if scaled:
            return PropagatorValue(core / (2.0 * scaled_hopping(params)), err * d)
        return PropagatorValue(
            core / (2.0 * params.kappa_u**2 * a ** (d - 2)),
            err / (2.0 * params.kappa_u**2 * a ** (d - 2)),
        )
    base = resolution or _BASE_RESOLUTION[d]
    coarse = _bz_sum(params, n_vec, base // 2, scaled)
    fine = _bz_sum(params, n_vec, base, scaled)
    if not scaled:
        prefactor = 1.0 / (2.0 * (2.0 * math.pi) ** d)
    else:
        prefactor = 1.0 / (2.0 * math.pi) ** d
    return PropagatorValue(prefactor * fine, prefactor * abs(fine - coarse))


def propagator_unscaled(params: ScalarFieldParams, sep, resolution: Optional[int] = None) -> float:
    """Thermodynamic-limit two-point function of the physical (unscaled) field
    at physical separation `sep` (components are multiples of the spacing)."""
    return propagator_with_error(params, sep, scaled=False, resolution=resolution).value


def propagator_scaled(params: ScalarFieldParams, sep, resolution: Optional[int] = None) -> float:
    """Two-point function of the locally scaled field; equals s(a)^2 times the
    unscaled propagator and stays bounded at coincident points for d = 3, 4."""
    return propagator_with_error(params, sep, scaled=True, resolution=resolution).value


def particle_mass(params: ScalarFieldParams) -> float:
    """Scalar particle mass (2/a) asinh(m_u a / (2 kappa_u)): the root of the
    time-direction dispersion relation, m = m_u/kappa_u + O(a^2)."""
    if params.m_u <= 0.0:
        raise ValidationError("particle mass is defined for m_u > 0")
    return (2.0 / params.a) * math.asinh(params.m_u * params.a / (2.0 * params.kappa_u))


def coincident_bound_constant(d: int, t_cut: float = 1.0e4) -> float:
    """Massless scaled coincident value C0(d): the uniform-in-a upper bound on
    the scaled propagator, finite for d = 3, 4."""
    if d not in (3, 4):
        raise ValidationError(f"coincident massless value is finite only for d=3,4, got {d}")
    return d * _laplace_core([0] * d, d, t_cut=t_cut)


def gaussian_genfun(covariance: np.ndarray, strengths: Sequence[float]) -> float:
    """Gaussian generating functional exp((K, C K)/2) for source strengths K.

    The covariance must be symmetric positive semidefinite; lattice covariances
    of the scaled massless field obey the uniform bound exp(C0 r sum K_j^2).
    """
    c = np.asarray(covariance, dtype=float)
    k = np.asarray(strengths, dtype=float)
    if c.ndim != 2 or c.shape[0] != c.shape[1] or c.shape[0] != k.size:
        raise ValidationError("covariance must be square and match the strengths")
    if not np.allclose(c, c.T, atol=1e-12):
        raise ValidationError("covariance must be symmetric")
    eigs = np.linalg.eigvalsh(c)
    scale = max(1.0, float(np.max(np.abs(eigs))) if eigs.size else 1.0)
    if eigs.size and eigs.min() < -1e-10 * scale:
        raise ValidationError("covariance must be positive semidefinite")
    return float(np.exp(0.5 * k @ c @ k))


def finite_lattice_covariance(params: ScalarFieldParams, L: int, bc: str = "free"):
    """Finite-lattice two-point function by dense eigendecomposition.

    Returns (lattice, C) with C[i, j] the covariance of the unscaled field
    between sites of linear index i, j.  The on-site term uses the full 2d
    hopping coefficient on every site, so the free-bc matrix is positive
    definite even at m_u = 0; the periodic massless matrix has a zero mode and
    is refused.
    """
    if params.m_u == 0.0 and bc == "periodic":
        raise ValidationError(
            "periodic massless action has a zero mode; use a small m_u proxy"
        )
    lattice = Lattice(d=params.d, L=L, a=params.a, bc=bc)
    n_sites = L**params.d
    hop = params.kappa_u**2 * params.a ** (params.d - 2)
    diag = 0.5 * (params.m_u**2 * params.a**params.d + 2.0 * params.d * hop)
    m = np.zeros((n_sites, n_sites))
    np.fill_diagonal(m, diag)
    for b in lattice.bonds():
        x, y = lattice.bond_endpoints(b)
        i, j = lattice.site_index(x), lattice.site_index(y)
        m[i, j] -= 0.5 * hop
        m[j, i] -= 0.5 * hop
    w, v = np.linalg.eigh(m)
    if w.min() <= 0:
        raise ValidationError("quadratic form is not positive definite")
    c = 0.5 * (v / w) @ v.T
    return lattice, c
