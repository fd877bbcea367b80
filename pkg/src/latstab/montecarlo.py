"""Direct Monte Carlo for the lattice partition function and plaquette sources.

The partition function is a normalized Haar expectation of exp(-beta * action),
so plain product-Haar sampling gives an unbiased estimate with honest error
bars; no Markov chain, hence no equilibration or autocorrelation concerns at
desk scale.  Sampling is partitioned across worker substreams and reduced in a
fixed order, so a run is bit-reproducible for a fixed (seed, workers) pair.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .bounds import ModelParams
from .group import RngState, ValidationError, haar_sample
from .lattice import HOLONOMY_SIGNS, Lattice, Plaquette, enhanced_temporal_gauge
from .weyl import ClassFunction, QuadratureResult, QuadratureScheme, ensemble_constants, weyl_integrate

__all__ = [
    "Sampler",
    "MCEstimate",
    "SourceSpec",
    "CauchyReport",
    "ZuJReport",
    "estimate_partition",
    "partition_estimate",
    "plaquette_field_trace",
    "estimate_genfun",
    "genfun_on_circles",
    "z_u_j",
    "c_u_prime",
    "correlation_cauchy",
]

_JACKKNIFE_BLOCKS = 100


@dataclass(frozen=True)
class Sampler:
    """Sample budget, seed and worker layout of one stochastic run."""

    n_samples: int
    rng: RngState
    workers: int = 1
    chunk: int = 50_000

    def __post_init__(self):
        if self.n_samples < 1:
            raise ValidationError("need a positive sample count")
        if self.workers < 1 or self.workers > self.n_samples:
            raise ValidationError("worker count must be in 1..n_samples")

    def worker_share(self, worker: int) -> int:
        base, extra = divmod(self.n_samples, self.workers)
        return base + (1 if worker < extra else 0)


@dataclass(frozen=True)
class MCEstimate:
    """Mean, standard error and provenance of one Monte Carlo estimate."""

    mean: complex
    std_error: float
    n_samples: int
    seed: RngState

    @property
    def real(self) -> float:
        return float(np.real(self.mean))


class _CompiledModel:
    """Array form of the lattice: retained bonds are numbered, every plaquette
    is four (bond slot, adjoint flag) pairs with slot -1 meaning a gauge-fixed
    identity."""

    def __init__(self, lattice: Lattice, gauge_fixed: bool = True):
        self.lattice = lattice
        if gauge_fixed:
            self.bonds = list(enhanced_temporal_gauge(lattice).retained)
        else:
            self.bonds = list(lattice.bonds())
        index = {b: i for i, b in enumerate(self.bonds)}
        self.plaquettes = list(lattice.plaquettes())
        self.plaquette_row = {(p.origin, p.plane): i for i, p in enumerate(self.plaquettes)}
        self.slots = np.full((len(self.plaquettes), 4), -1, dtype=np.int64)
        self.conj = np.zeros((len(self.plaquettes), 4), dtype=bool)
        for ip, p in enumerate(self.plaquettes):
            for j, (b, sign) in enumerate(zip(p.bonds, HOLONOMY_SIGNS)):
                self.slots[ip, j] = index.get(b, -1)
                self.conj[ip, j] = sign < 0

    @property
    def n_bonds(self) -> int:
        return len(self.bonds)

    def holonomy_traces(self, us: np.ndarray, rows: Sequence[int]) -> np.ndarray:
        """Traces of the holonomies of the given plaquette rows.

        us has shape (n_bonds, m, n, n); returns complex (len(rows), m).
        """
        m, n = us.shape[1], us.shape[-1]
        out = np.empty((len(rows), m), dtype=complex)
        eye = np.eye(n, dtype=complex)
        for k, ip in enumerate(rows):
            u = None
            for j in range(4):
                idx = self.slots[ip, j]
                if idx < 0:
                    continue
                factor = us[idx]
                if self.conj[ip, j]:
                    factor = np.swapaxes(factor.conj(), -1, -2)
                u = factor.copy() if u is None else u @ factor
            if u is None:
                out[k] = n  # all four bonds gauge-fixed; holonomy is the identity
            else:
                out[k] = np.einsum("...ii->...", u)
        return out

    def actions(self, us: np.ndarray) -> np.ndarray:
        """Total Wilson action per sample; us has shape (n_bonds, m, n, n)."""
        n = us.shape[-1]
        traces = self.holonomy_traces(us, range(len(self.plaquettes)))
        return np.sum(2.0 * (n - np.real(traces)), axis=0)


def partition_estimate(
    lattice: Lattice,
    n_colors: int,
    beta: float,
    sampler: Sampler,
    gauge_fixed: bool = True,
) -> MCEstimate:
    """Unbiased estimate of the Haar expectation of exp(-beta * action).

    With gauge_fixed=True only the retained bonds of the enhanced temporal
    gauge are sampled (the fixed ones are identities); with False all bonds are
    sampled, which must give the same value within errors.
    """
    if beta < 0:
        raise ValidationError(f"coupling beta must be nonnegative, got {beta}")
    model = _CompiledModel(lattice, gauge_fixed=gauge_fixed)
    sum_w = 0.0
    sum_w2 = 0.0
    total = 0
    for worker in range(sampler.workers):
        gen = sampler.rng.substream(worker)
        remaining = sampler.worker_share(worker)
        while remaining > 0:
            m = min(sampler.chunk, remaining)
            us = haar_sample(n_colors, gen, size=(model.n_bonds, m))
            w = np.exp(-beta * model.actions(us))
            sum_w += float(np.sum(w))
            sum_w2 += float(np.sum(w * w))
            total += m
            remaining -= m
    mean = sum_w / total
    if total > 1:
        var = max(sum_w2 - total * mean * mean, 0.0) / (total - 1)
        std_error = math.sqrt(var / total)
    else:
        std_error = math.inf
    return MCEstimate(mean=mean, std_error=std_error, n_samples=total, seed=sampler.rng)


def estimate_partition(
    lattice: Lattice,
    params: ModelParams,
    sampler: Sampler,
    gauge_fixed: bool = True,
) -> MCEstimate:
    """Monte Carlo partition function estimate for the given model parameters."""
    if sampler.n_samples < 1_000:
        raise ValidationError("fewer than 1000 samples: error bars are meaningless")
    return partition_estimate(lattice, params.n, params.beta, sampler, gauge_fixed)


def plaquette_field_trace(u_p: np.ndarray, params: ModelParams) -> np.ndarray:
    """Gauge-invariant plaquette field: sqrt(beta) * Im Tr(U_p - 1).

    Equals sqrt(beta) * sum_j sin(lambda_j) over the angular eigenvalues, so its
    magnitude never exceeds N * sqrt(beta).  Batched.
    """
    u_p = np.asarray(u_p)
    tr = np.einsum("...ii->...", u_p)
    return math.sqrt(params.beta) * np.imag(tr)


@dataclass(frozen=True)
class SourceSpec:
    """r source plaquettes with complex strengths."""

    plaquettes: tuple
    strengths: tuple

    def __post_init__(self):
        if len(self.plaquettes) < 1:
            raise ValidationError("need at least one source plaquette")
        if len(self.plaquettes) != len(self.strengths):
            raise ValidationError("one strength per source plaquette")
        if not all(np.isfinite(complex(j)) for j in self.strengths):
            raise ValidationError("source strengths must be finite")

    @property
    def r(self) -> int:
        return len(self.plaquettes)


def _require_genfun_lattice(lattice: Lattice) -> None:
    if lattice.bc != "periodic":
        raise ValidationError("generating functional needs periodic boundary conditions")
    if lattice.L % 2 != 0:
        raise ValidationError("generating functional needs an even number of sites per side")


def _source_rows(model: _CompiledModel, plaquettes) -> list:
    rows = []
    for p in plaquettes:
        key = (p.origin, p.plane)
        if key not in model.plaquette_row:
            raise ValidationError(f"source plaquette {key} is not on the lattice")
        rows.append(model.plaquette_row[key])
    return rows


def _genfun_block_sums(lattice, params, plaquettes, j_grid, sampler):
    """Common-random-number numerator/denominator block sums.

    j_grid is an array of source-strength vectors, shape (..., r).  Returns
    (num_blocks, den_blocks) where num_blocks has shape (B,) + j_grid.shape[:-1]
    and den_blocks has shape (B,).  The same samples feed every grid point and
    the denominator, so ratios at J = 0 are exactly 1.
    """
    model = _CompiledModel(lattice, gauge_fixed=True)
    rows = _source_rows(model, plaquettes)
    j_grid = np.asarray(j_grid, dtype=complex)
    grid_shape = j_grid.shape[:-1]
    r = j_grid.shape[-1]
    # The denominator is the numerator at an appended J = 0 grid point, so both
    # share one reduction path and the ratio at J = 0 is exactly 1.
    flat = np.concatenate([j_grid.reshape(-1, r), np.zeros((1, r), dtype=complex)])
    sqrt_beta = math.sqrt(params.beta)
    nblocks = min(_JACKKNIFE_BLOCKS, sampler.n_samples)
    num = np.zeros((nblocks, flat.shape[0]), dtype=complex)
    pos = 0
    for worker in range(sampler.workers):
        gen = sampler.rng.substream(worker)
        remaining = sampler.worker_share(worker)
        while remaining > 0:
            m = min(sampler.chunk, remaining)
            us = haar_sample(params.n, gen, size=(model.n_bonds, m))
            w = np.exp(-params.beta * model.actions(us))
            field = sqrt_beta * np.imag(model.holonomy_traces(us, rows))  # (r, m)
            weighted = np.exp(flat @ field) * w  # (grid+1, m)
            ids = (np.arange(pos, pos + m) * nblocks) // sampler.n_samples
            for b in range(int(ids[0]), int(ids[-1]) + 1):
                lo = int(np.searchsorted(ids, b, "left"))
                hi = int(np.searchsorted(ids, b, "right"))
                num[b] += weighted[:, lo:hi].sum(axis=-1)
            pos += m
            remaining -= m
    den = num[:, -1].copy()  # complex with zero imaginary part, so the total
    # and the numerator totals share one summation path bit for bit
    return num[:, :-1].reshape((nblocks,) + grid_shape), den


def estimate_genfun(
    lattice: Lattice,
    params: ModelParams,
    sources: SourceSpec,
    sampler: Sampler,
) -> MCEstimate:
    """Ratio estimator of the plaquette-field generating functional.

    Numerator and denominator share one sample set (common random numbers) and
    the error is propagated by jackknife over sample blocks.  A denominator
    consistent with zero at three standard errors is refused.
    """
    _require_genfun_lattice(lattice)
    if sampler.n_samples < 1_000:
        raise ValidationError("fewer than 1000 samples: error bars are meaningless")
    j_vec = np.asarray(sources.strengths, dtype=complex)
    num_b, den_b = _genfun_block_sums(lattice, params, sources.plaquettes, j_vec, sampler)
    nblocks = den_b.shape[0]
    den_total = den_b.sum()
    den_se = math.sqrt(max(float(np.var(den_b.real, ddof=1)) * nblocks, 0.0))
    if den_total.real <= 3.0 * den_se:
        raise ValidationError("denominator estimate consistent with zero at 3 sigma")
    num_total = num_b.sum()
    # x / x must be exactly 1, which IEEE complex division does not promise
    g = 1.0 + 0.0j if num_total == den_total else complex(num_total / den_total)
    loo = (num_total - num_b) / (den_total - den_b)
    se = math.sqrt((nblocks - 1) / nblocks * float(np.sum(np.abs(loo - loo.mean()) ** 2)))
    return MCEstimate(mean=g, std_error=se, n_samples=sampler.n_samples, seed=sampler.rng)


def genfun_on_circles(
    lattice: Lattice,
    params: ModelParams,
    plaquettes,
    radius: float,
    n_points: int,
    sampler: Sampler,
) -> np.ndarray:
    """Generating functional sampled on a polydisc grid J_j = radius * e^(i t_k).

    Returns a complex array of shape (n_points,) * r, all entries estimated
    from the same sample set.
    """
    _require_genfun_lattice(lattice)
    if n_points < 8:
        raise ValidationError("need at least 8 points per circle for Cauchy quadrature")
    if radius <= 0:
        raise ValidationError("circle radius must be positive")
    r = len(plaquettes)
    angles = 2.0 * np.pi * np.arange(n_points) / n_points
    ring = radius * np.exp(1j * angles)
    grids = np.meshgrid(*([ring] * r), indexing="ij")
    j_grid = np.stack(grids, axis=-1)  # (n_points,)*r + (r,)
    num_b, den_b = _genfun_block_sums(lattice, params, plaquettes, j_grid, sampler)
    return num_b.sum(axis=0) / den_b.sum()


def c_u_prime(n: int) -> float:
    """log of the a,g-independent constant in the closed bound on the sourced
    one-plaquette partition function."""
    ens = ensemble_constants(n)
    return (n * n + n / 4.0) * math.log(math.pi) + 0.5 * math.log(ens.gse) - math.log(ens.cue)


@dataclass(frozen=True)
class ZuJReport:
    value: QuadratureResult
    closed_bound: float
    c_u_prime: float


def z_u_j(j_strength: complex, params: ModelParams, scheme: Optional[QuadratureScheme] = None) -> ZuJReport:
    """Sourced one-plaquette partition function |z_u(J)| and its closed bound.

    The integrand carries |J| sqrt(beta) sum_j |sin lambda_j| in the exponent on
    top of the plaquette weight; the closed bound is
    beta^(-N^2/2) exp(c_u' + (pi^2/8) N |J|^2).
    """
    n, beta = params.n, params.beta
    jmag = abs(complex(j_strength))
    sqrt_beta = math.sqrt(beta)

    def fn(lam):
        source = jmag * sqrt_beta * np.sum(np.abs(np.sin(lam)), axis=-1)
        return np.exp(source - 2.0 * beta * np.sum(1.0 - np.cos(lam), axis=-1))

    value = weyl_integrate(ClassFunction(fn=fn, n=n), scheme)
    cup = c_u_prime(n)
    bound = beta ** (-n * n / 2.0) * math.exp(cup + (math.pi**2 / 8.0) * n * jmag**2)
    return ZuJReport(value=value, closed_bound=bound, c_u_prime=cup)


@dataclass(frozen=True)
class CauchyReport:
    """Cauchy-estimate summary of r-fold source derivatives at the origin."""

    order: int
    radius: float
    derivative: complex
    cauchy_bound: float
    max_abs_g: float
    physical_bound: Optional[float] = None


def correlation_cauchy(g_values: np.ndarray, radius: float, beta: Optional[float] = None) -> CauchyReport:
    """Mixed first derivative of G at 0 and its Cauchy bound, from values of G
    on the polydisc |J_j| = radius.

    The derivative is the (1,...,1) Fourier coefficient of the circle samples
    divided by radius^r; the bound is r! max|G| / radius^r.  With beta given,
    the bound for the bare (unscaled by sqrt(beta)) plaquette variable is
    attached as physical_bound = bound / beta.
    """
    g = np.asarray(g_values, dtype=complex)
    r = g.ndim
    if r < 1:
        raise ValidationError("need at least one circle of samples")
    if any(s < 8 for s in g.shape):
        raise ValidationError("need at least 8 points per circle for Cauchy quadrature")
    if radius <= 0:
        raise ValidationError("circle radius must be positive")
    coeff = g
    for axis in range(r):
        m = g.shape[axis]
        phase = np.exp(-2j * np.pi * np.arange(m) / m)
        shape = [1] * r
        shape[axis] = m
        coeff = coeff * phase.reshape(shape)
    derivative = complex(coeff.mean() / radius**r)
    max_abs = float(np.max(np.abs(g)))
    bound = math.factorial(r) * max_abs / radius**r
    return CauchyReport(
        order=r,
        radius=radius,
        derivative=derivative,
        cauchy_bound=bound,
        max_abs_g=max_abs,
        physical_bound=None if beta is None else bound / beta,
    )
