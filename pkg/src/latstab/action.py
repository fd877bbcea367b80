"""Plaquette holonomy, Wilson plaquette action, and its global quadratic bound."""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Mapping, NamedTuple, Optional

import numpy as np

from .group import (
    ValidationError,
    angular_eigenvalues,
    assert_hermitian,
    exp_map,
    haar_sample,
    hs_norm_sq,
    principal_log,
)
from .lattice import HOLONOMY_SIGNS, GaugeFixing, Lattice, Plaquette

__all__ = [
    "GaugeConfig",
    "GluonField",
    "DegenerateFieldError",
    "holonomy",
    "plaquette_action",
    "lemma1_bound",
    "lemma1_holonomy",
    "lemma1_violations",
    "total_action",
    "TotalAction",
    "gauge_transform",
    "small_a_consistency",
]


class DegenerateFieldError(ValueError):
    """Field strength vanishes; the small-spacing ratio is undefined."""


@dataclass(frozen=True)
class GaugeConfig:
    """Assignment of a U(N) matrix to every non-fixed bond of a lattice.

    Bonds in `gauge_fixing.fixed` resolve to the identity and need no entry in
    `assignment`.  Immutable by convention: evaluation never mutates it.
    """

    lattice: Lattice
    assignment: Mapping
    gauge_fixing: Optional[GaugeFixing] = None

    @property
    def n(self) -> int:
        for u in self.assignment.values():
            return u.shape[-1]
        return 1

    def validate(self) -> None:
        fixed = self.gauge_fixing.fixed_set if self.gauge_fixing else frozenset()
        n = self.n
        for b in self.lattice.bonds():
            if b in fixed:
                continue
            u = self.assignment.get(b)
            if u is None:
                raise ValidationError(f"missing bond assignment for {b}")
            if u.shape != (n, n):
                raise ValidationError(f"bond {b}: expected {(n, n)} matrix, got {u.shape}")

    def bond_matrix(self, b) -> np.ndarray:
        if self.gauge_fixing is not None and b in self.gauge_fixing.fixed_set:
            return np.eye(self.n, dtype=complex)
        try:
            return self.assignment[b]
        except KeyError:
            raise ValidationError(f"missing bond assignment for {b}") from None

    @classmethod
    def random(cls, lattice: Lattice, n: int, rng, gauge_fixing: Optional[GaugeFixing] = None):
        """Haar-random configuration on all

        non-fixed bonds (handy for sampling checks)."""
        fixed = gauge_fixing.fixed_set if gauge_fixing else frozenset()
        assignment = {
            b: haar_sample(n, rng) for b in lattice.bonds() if b not in fixed
        }
        return cls(lattice=lattice, assignment=assignment, gauge_fixing=gauge_fixing)


def holonomy(config: GaugeConfig, p: Plaquette) -> np.ndarray:
    """Oriented product of the four bond matrices around plaquette p."""
    u = np.eye(config.n, dtype=complex)
    for b, sign in zip(p.bonds, HOLONOMY_SIGNS):
        m = config.bond_matrix(b)
        u = u @ (m if sign > 0 else m.conj().T)
    return u


def plaquette_action(u_p: np.ndarray) -> np.ndarray:
    """Wilson action of one plaquette: squared HS distance of the holonomy to 1.

    Computed as 2 Re Tr(1 - U_p), the cheapest of the equivalent forms (the
    HS-norm and angular-eigenvalue forms are exercised in tests).  Batched.
    """
    u_p = np.asarray(u_p)
    n = u_p.shape[-1]
    tr = np.einsum("...ii->...", u_p)
    return 2.0 * (n - np.real(tr))


def _check_log_spectrum(x: np.ndarray, tol: float = 1e-9) -> None:
    lam = np.linalg.eigvalsh(x)
    if np.any(lam > np.pi + tol) or np.any(lam <= -np.pi - tol):
        raise ValidationError("bond log spectrum must lie in (-pi, pi]")


def lemma1_bound(bond_logs) -> float:
    """Quadratic upper bound k*N*sum_j ||X_j||^2_HS on the plaquette action.

    `bond_logs` are the principal logarithms of the k (1..4) retained bond
    matrices of one plaquette; the prefactor k*N tightens the four-bond
    constant 4N when fewer bonds are retained.
    """
    k = len(bond_logs)
    if not 1 <= k <= 4:
        raise ValidationError(f"a plaquette has 1..4 retained bonds, got {k}")
    n = bond_logs[0].shape[-1]
    total = 0.0
    for x in bond_logs:
        assert_hermitian(x)
        _check_log_spectrum(x)
        total += float(np.real(np.trace(x @ x)))
    return k * n * total


def lemma1_holonomy(bond_logs) -> np.ndarray:
    """Holonomy with the k retained bonds in the leading slots: the remaining
    slots of the (+, +, -, -) traversal pattern are gauge-fixed identities."""
    k = len(bond_logs)
    if not 1 <= k <= 4:
        raise ValidationError(f"a plaquette has 1..4 retained bonds, got {k}")
    n = bond_logs[0].shape[-1]
    u = np.eye(n, dtype=complex)
    for x, sign in zip(bond_logs, HOLONOMY_SIGNS[:k]):
        m = exp_map(x)
        u = u @ (m if sign > 0 else m.conj().T)
    return u


def lemma1_violations(n: int, k: int, n_samples: int, rng, chunk: int = 100_000):
    """Sampling check of the quadratic bound: Haar-random retained bonds.

    Returns (violations, worst_margin) where worst_margin is the minimum of
    bound - action over all samples (non-negative when the bound holds).
    """
    if not 1 <= k <= 4:
        raise ValidationError(f"a plaquette has 1..4 retained bonds, got {k}")
    violations = 0
    worst = np.inf
    remaining = n_samples
    while remaining > 0:
        m = min(chunk, remaining)
        us = haar_sample(n, rng, size=(k, m))
        phases = angular_eigenvalues(us, check=False)  # (k, m, n)
        bound = k * n * np.sum(phases**2, axis=(0, 2))
        u_p = np.broadcast_to(np.eye(n, dtype=complex), (m, n, n))
        for j in range(k):
            factor = us[j] if HOLONOMY_SIGNS[j] > 0 else np.swapaxes(us[j].conj(), -1, -2)
            u_p = u_p @ factor
        margin = bound - plaquette_action(u_p)
        violations += int(np.sum(margin < 0))
        worst = min(worst, float(margin.min()))
        remaining -= m
    return violations, worst


class TotalAction(NamedTuple):
    total: float
    global_bound: float


def total_action(config: GaugeConfig) -> TotalAction:
    """Total Wilson action and its global quadratic upper bound.

    The bound is 2(d-1) * 4N * sum over non-fixed bonds of the squared HS norm
    of the bond's principal logarithm.
    """
    total = 0.0
    for p in config.lattice.plaquettes():
        total += float(plaquette_action(holonomy(config, p)))
    fixed = config.gauge_fixing.fixed_set if config.gauge_fixing else frozenset()
    logs_sq = 0.0
    for b in config.lattice.bonds():
        if b in fixed:
            continue
        logs_sq += float(hs_norm_sq(principal_log(config.bond_matrix(b))))
    d, n = config.lattice.d, config.n
    return TotalAction(total=total, global_bound=2.0 * (d - 1) * 4.0 * n * logs_sq)


def gauge_transform(config: GaugeConfig, site_transform: Mapping) -> GaugeConfig:
    """Apply a local gauge transformation U_b -> V(x) U_b V(x+e_mu)^H.

    Gauge-fixed bonds are materialized into the assignment first, since the
    transformation generally moves them off the identity.
    """
    lattice = config.lattice
    new_assignment = {}
    for b in lattice.bonds():
        x, y = lattice.bond_endpoints(b)
        vx = site_transform.get(x, np.eye(config.n, dtype=complex))
        vy = site_transform.get(y, np.eye(config.n, dtype=complex))
        new_assignment[b] = vx @ config.bond_matrix(b) @ vy.conj().T
    return replace(config, assignment=new_assignment, gauge_fixing=None)


@dataclass(frozen=True)
class GluonField:
    """Per-bond Hermitian gluon values A_b with coupling g and spacing a.

    The bond matrix is exp(i a g A_b); `a` can be varied with the field values
    held fixed, which is exactly what the small-spacing consistency check does.
    """

    assignment: Mapping
    g: float
    a: float

    def bond_matrix(self, b) -> np.ndarray:
        return exp_map(self.a * self.g * self.assignment[b])

    def with_spacing(self, a: float) -> "GluonField":
        return replace(self, a=a)


def small_a_consistency(field: GluonField, p: Plaquette) -> float:
    """Ratio of the plaquette action to its leading small-spacing form.

    The denominator is a^4 g^2 Tr(F^2) with the one-sided finite-difference
    field strength F = d_mu A_nu - d_nu A_mu + i g [A_mu, A_nu] built from the
    four bond values of p.  The ratio tends to 1 as a decreases.
    """
    a, g = field.a, field.g
    b1, b2, b3, b4 = p.bonds
    a_mu_x = field.assignment[b1]
    a_nu_xmu = field.assignment[b2]
    a_mu_xnu = field.assignment[b3]
    a_nu_x = field.assignment[b4]

    d_mu_a_nu = (a_nu_xmu - a_nu_x) / a
    d_nu_a_mu = (a_mu_xnu - a_mu_x) / a
    comm = a_mu_x @ a_nu_x - a_nu_x @ a_mu_x
    f = d_mu_a_nu - d_nu_a_mu + 1j * g * comm

    denom = a**4 * g**2 * float(np.real(np.trace(f @ f)))
    if denom <= 1e-300:
        raise DegenerateFieldError("field strength vanishes on this plaquette")

    u = np.eye(a_mu_x.shape[-1], dtype=complex)
    for a_b, sign in zip((a_mu_x, a_nu_xmu, a_mu_xnu, a_nu_x), HOLONOMY_SIGNS):
        m = exp_map(a * g * a_b)
        u = u @ (m if sign > 0 else m.conj().T)
    return float(plaquette_action(u)) / denom
