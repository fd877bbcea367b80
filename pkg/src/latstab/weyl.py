"""Class-function integration over U(N) via angular eigenvalues.

The group integral of a conjugation-invariant function reduces to an
N-dimensional integral of f(lambda) against the squared Vandermonde density of
phases, normalized by (2 pi)^N N!.  Tensor-product Gauss-Legendre grids handle
N <= 2 (and small N = 3 grids); plain Monte Carlo with the density as an
importance weight is the default for N = 3.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable, Optional

import numpy as np

from .group import ValidationError

__all__ = [
    "ClassFunction",
    "QuadratureScheme",
    "QuadratureResult",
    "EnsembleConstants",
    "cue_density",
    "vandermonde_sq",
    "ensemble_constants",
    "weyl_integrate",
    "i_beta",
    "INFINITE_CUTOFF",
]

#: Practical infinity for Gaussian-tail cutoffs: exp(-12^2) is far below the
#: double-precision noise floor.
INFINITE_CUTOFF = 12.0

_GL_NODES_PER_PANEL = 16
_MAX_EVALS_PER_BLOCK = 4_000_000


@dataclass(frozen=True)
class ClassFunction:
    """Conjugation-invariant function of a U(n) matrix, given by its value on
    the angular spectrum.  `fn` must be vectorized over stacked phase vectors
    of shape (..., n)."""

    fn: Callable[[np.ndarray], np.ndarray]
    n: int

    def __call__(self, phases: np.ndarray) -> np.ndarray:
        return self.fn(phases)


@dataclass(frozen=True)
class QuadratureScheme:
    """Grid or Monte Carlo evaluation plan.

    resolution: points per axis (grid) or total samples (mc).  Grids are
    refined by doubling the resolution until the relative change drops below
    rel_tol; the last change is reported as the error estimate.
    """

    kind: str = "grid"
    resolution: int = 64
    seed: int = 0
    rel_tol: float = 1e-8
    max_refinements: int = 7

    def __post_init__(self):
        if self.kind not in ("grid", "mc"):
            raise ValidationError(f"scheme kind must be 'grid' or 'mc', got {self.kind!r}")
        if self.kind == "grid" and self.resolution < 16:
            raise ValidationError("grid resolution below 16 points per axis")


@dataclass(frozen=True)
class QuadratureResult:
    value: float
    error: float
    converged: bool
    resolution: int

    def __float__(self) -> float:
        return float(self.value)


@dataclass(frozen=True)
class EnsembleConstants:
    """Normalization constants of the circular/Gaussian unitary and Gaussian
    symplectic ensembles for a given matrix dimension."""

    n: int
    cue: float
    gue: float
    gse: float


def ensemble_constants(n: int) -> EnsembleConstants:
    if n < 1:
        raise ValidationError(f"dimension must be >= 1, got {n}")
    fact = [math.factorial(j) for j in range(1, n + 1)]
    cue = (2.0 * math.pi) ** n * math.factorial(n)
    gue = (2.0 * math.pi) ** (n / 2.0) * 2.0 ** (-(n**2) / 2.0) * math.prod(fact)
    gse = (
        (2.0 * math.pi) ** (n / 2.0)
        * 4.0 ** (-(n**2))
        * math.prod(math.factorial(2 * j) for j in range(1, n + 1))
    )
    return EnsembleConstants(n=n, cue=cue, gue=gue, gse=gse)


def cue_density(phases: np.ndarray) -> np.ndarray:
    """Squared modulus Vandermonde density prod_{j<k} |e^{i l_j} - e^{i l_k}|^2.

    Batched over leading axes; equals 1 for n = 1 (empty product).
    """
    phases = np.asarray(phases)
    n = phases.shape[-1]
    out = np.ones(phases.shape[:-1])
    for j in range(n):
        for k in range(j + 1, n):
            out = out * (2.0 - 2.0 * np.cos(phases[..., j] - phases[..., k]))
    return out


def vandermonde_sq(y: np.ndarray) -> np.ndarray:
    """prod_{j<k} (y_j - y_k)^2, batched over leading axes."""
    y = np.asarray(y)
    n = y.shape[-1]
    out = np.ones(y.shape[:-1])
    for j in range(n):
        for k in range(j + 1, n):
            out = out * (y[..., j] - y[..., k]) ** 2
    return out


def _gl_rule(resolution: int, lo: float, hi: float):
    """Composite Gauss-Legendre rule with 16-point panels, `resolution` total
    points, on (lo, hi).  Panel edges include the midpoint, so kinks at 0 of
    even integrands do not degrade convergence."""
    n_panels = max(1, resolution // _GL_NODES_PER_PANEL)
    base_x, base_w = np.polynomial.legendre.leggauss(_GL_NODES_PER_PANEL)
    edges = np.linspace(lo, hi, n_panels + 1)
    half = 0.5 * (edges[1:] - edges[:-1])
    mid = 0.5 * (edges[1:] + edges[:-1])
    x = (mid[:, None] + half[:, None] * base_x[None, :]).ravel()
    w = (half[:, None] * base_w[None, :]).ravel()
    return x, w


def _tensor_integrate(fn, n: int, resolution: int, lo: float, hi: float) -> float:
    """Tensor-product integral of fn over (lo, hi)^n, block-wise in axis 0."""
    x, w = _gl_rule(resolution, lo, hi)
    r = x.size
    if n == 1:
        return float(np.sum(w * fn(x[:, None])))
    # Grid over the trailing n-1 axes is built once; the leading axis is
    # streamed in blocks to bound peak memory.
    tail = np.stack(np.meshgrid(*([x] * (n - 1)), indexing="ij"), axis=-1)
    tail_w = np.ones(tail.shape[:-1])
    for g in np.meshgrid(*([w] * (n - 1)), indexing="ij"):
        tail_w = tail_w * g
    block = max(1, _MAX_EVALS_PER_BLOCK // tail_w.size)
    total = 0.0
    for i0 in range(0, r, block):
        lead = x[i0 : i0 + block]
        m = lead.size
        phases = np.empty((m,) + tail.shape[:-1] + (n,))
        phases[..., 0] = lead.reshape((m,) + (1,) * (n - 1))
        phases[..., 1:] = tail
        vals = fn(phases)
        lead_w = w[i0 : i0 + block].reshape((m,) + (1,) * (n - 1))
        total += float(np.sum(lead_w * tail_w * vals))
    return total


def _refine(fn, n: int, scheme: QuadratureScheme, lo: float, hi: float) -> QuadratureResult:
    res = scheme.resolution
    prev = _tensor_integrate(fn, n, res, lo, hi)
    err = np.inf
    for _ in range(scheme.max_refinements):
        res *= 2
        cur = _tensor_integrate(fn, n, res, lo, hi)
        err = abs(cur - prev)
        prev = cur
        scale = max(abs(cur), 1e-300)
        if err <= scheme.rel_tol * scale:
            return QuadratureResult(value=cur, error=err, converged=True, resolution=res)
    return QuadratureResult(value=prev, error=err, converged=False, resolution=res)


def weyl_integrate(f: ClassFunction, scheme: Optional[QuadratureScheme] = None) -> QuadratureResult:
    """Haar integral of a class function over U(n).

    Grid schemes integrate f(lambda) * density over (-pi, pi]^n and divide by
    the circular-ensemble normalization; the mc scheme samples phases uniformly
    and importance-weights with the density.
    """
    n = f.n
    if scheme is None:
        scheme = QuadratureScheme(kind="grid" if n <= 2 else "mc")
    norm = ensemble_constants(n).cue

    if scheme.kind == "grid":
        def integrand(phases):
            return np.real(f(phases)) * cue_density(phases)

        out = _refine(integrand, n, scheme, -np.pi, np.pi)
        return replace(out, value=out.value / norm, error=out.error / norm)

    rng = np.random.default_rng(np.random.SeedSequence(scheme.seed))
    m = scheme.resolution
    phases = rng.uniform(-np.pi, np.pi, size=(m, n))
    weights = np.real(f(phases)) * cue_density(phases) * ((2.0 * np.pi) ** n / norm)
    mean = float(np.mean(weights))
    stderr = float(np.std(weights, ddof=1) / np.sqrt(m))
    return QuadratureResult(value=mean, error=stderr, converged=True, resolution=m)


def i_beta(beta: int, u: float, n: int, scheme: Optional[QuadratureScheme] = None) -> QuadratureResult:
    """Truncated Gaussian-ensemble integral over (-u, u)^n.

    The integrand is exp(-beta/2 * sum y_j^2) times the Vandermonde-squared
    density raised to beta/2; beta = 2 and 4 give the unitary and symplectic
    ensembles, whose u -> infinity limits are the closed-form normalization
    constants.  Pass u = math.inf to use the practical cutoff.
    """
    if beta not in (2, 4):
        raise ValidationError(f"ensemble index must be 2 or 4, got {beta}")
    if not u > 0:
        raise ValidationError(f"cutoff must be positive, got {u}")
    u = min(float(u), INFINITE_CUTOFF)
    if scheme is None:
        scheme = QuadratureScheme(kind="grid")

    half = beta // 2

    def integrand(y):
        return np.exp(-0.5 * beta * np.sum(y**2, axis=-1)) * vandermonde_sq(y) ** half

    return _refine(integrand, n, scheme, -u, u)
