"""U(N) numerics: Haar sampling, angular spectra, exp/log maps, Lie-algebra coordinates.

All matrix routines accept stacked inputs of shape ``(..., n, n)`` and are pure
functions; nothing here mutates its arguments.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

__all__ = [
    "ValidationError",
    "RngState",
    "haar_sample",
    "unitarity_defect",
    "hermiticity_defect",
    "assert_unitary",
    "assert_hermitian",
    "angular_eigenvalues",
    "exp_map",
    "principal_log",
    "LieBasis",
    "lie_coords",
    "lie_reconstruct",
    "hs_norm_sq",
]

#: Hilbert-Schmidt unitarity defect allowed for freshly constructed matrices.
CONSTRUCTION_TOL = 1e-12
#: Defect allowed on inputs to spectral routines (covers chains of operations).
INPUT_TOL = 1e-9


class ValidationError(ValueError):
    """An input violates a documented precondition."""


@dataclass(frozen=True)
class RngState:
    """Seed plus stream id; one (seed, stream) pair is one reproducible sequence.

    Parallel samplers derive worker substreams with :meth:`substream`, so a run
    is bit-reproducible for a fixed (seed, number-of-workers) pair.
    """

    seed: int
    stream: int = 0

    def generator(self) -> np.random.Generator:
        return np.random.default_rng(
            np.random.SeedSequence(self.seed, spawn_key=(self.stream,))
        )

    def substream(self, worker: int) -> np.random.Generator:
        return np.random.default_rng(
            np.random.SeedSequence(self.seed, spawn_key=(self.stream, worker))
        )


def _as_generator(rng) -> np.random.Generator:
    if isinstance(rng, RngState):
        return rng.generator()
    if isinstance(rng, np.random.Generator):
        return rng
    raise ValidationError(f"expected RngState or numpy Generator, got {type(rng)!r}")


def haar_sample(n: int, rng, size=None) -> np.ndarray:
    """Draw Haar-distributed U(n) matrices.

    Complex Ginibre matrix -> QR -> multiply each column of Q by the phase of
    the matching diagonal entry of R.  The phase correction makes diag(R) real
    positive, which removes the sign/phase ambiguity of QR and yields exactly
    the Haar distribution (Mezzadri's construction).

    Parameters
    ----------
    n : int
        Group dimension, n >= 1.
    rng : RngState or numpy.random.Generator
    size : int or tuple, optional
        Leading batch shape; a single (n, n) matrix when omitted.
    """
    if n < 1:
        raise ValidationError(f"group dimension must be >= 1, got {n}")
    gen = _as_generator(rng)
    shape = () if size is None else (tuple(size) if np.iterable(size) else (size,))
    z = gen.standard_normal(shape + (n, n)) + 1j * gen.standard_normal(shape + (n, n))
    q, r = np.linalg.qr(z / np.sqrt(2.0))
    d = np.diagonal(r, axis1=-2, axis2=-1)
    q = q * (d / np.abs(d))[..., None, :]
    return q


def unitarity_defect(u: np.ndarray) -> np.ndarray:
    """Hilbert-Schmidt norm of U^H U - I, batched."""
    u = np.asarray(u)
    n = u.shape[-1]
    res = np.swapaxes(u.conj(), -1, -2) @ u - np.eye(n)
    return np.sqrt(np.sum(np.abs(res) ** 2, axis=(-2, -1)))


def hermiticity_defect(x: np.ndarray) -> np.ndarray:
    """Hilbert-Schmidt norm of X - X^H, batched."""
    x = np.asarray(x)
    res = x - np.swapaxes(x.conj(), -1, -2)
    return np.sqrt(np.sum(np.abs(res) ** 2, axis=(-2, -1)))


def assert_unitary(u: np.ndarray, tol: float = INPUT_TOL) -> None:
    worst = float(np.max(unitarity_defect(u)))
    if not worst <= tol:
        raise ValidationError(f"matrix not unitary: defect {worst:.3e} > {tol:.0e}")


def assert_hermitian(x: np.ndarray, tol: float = INPUT_TOL) -> None:
    worst = float(np.max(hermiticity_defect(x)))
    if not worst <= tol:
        raise ValidationError(f"matrix not Hermitian: defect {worst:.3e} > {tol:.0e}")


def angular_eigenvalues(u: np.ndarray, check: bool = True) -> np.ndarray:
    """Eigenvalue phases of a unitary, in (-pi, pi], sorted descending.

    Batched; returns shape ``u.shape[:-2] + (n,)``.
    """
    u = np.asarray(u)
    if check:
        assert_unitary(u)
    phases = np.angle(np.linalg.eigvals(u))
    return -np.sort(-phases, axis=-1)


def _spectral_decomposition(u: np.ndarray):
    """Phases (descending) and a unitary diagonalizer V for one unitary matrix.

    Uses the complex Schur form: for a normal matrix the Schur factor is
    diagonal, and Q is unitary to machine precision, so V diag(e^{i phases}) V^H
    reconstructs U.
    """
    t, v = scipy.linalg.schur(np.asarray(u, dtype=complex), output="complex")
    phases = np.angle(np.diagonal(t))
    order = np.argsort(-phases, kind="stable")
    return phases[order], v[:, order]


def exp_map(x: np.ndarray, check: bool = True) -> np.ndarray:
    """exp(iX) for Hermitian X, via eigendecomposition.  Batched."""
    x = np.asarray(x)
    if check:
        assert_hermitian(x)
    w, v = np.linalg.eigh(x)
    vh = np.swapaxes(v.conj(), -1, -2)
    return (v * np.exp(1j * w)[..., None, :]) @ vh


def principal_log(u: np.ndarray, check: bool = True) -> np.ndarray:
    """Hermitian X with exp(iX) = U and spectrum in (-pi, pi].

    A phase landing exactly on the branch cut is kept at +pi (half-open
    interval); batched input is processed matrix by matrix.
    """
    u = np.asarray(u)
    if check:
        assert_unitary(u)
    if u.ndim == 2:
        phases, v = _spectral_decomposition(u)
        x = (v * phases[None, :]) @ v.conj().T
        return 0.5 * (x + x.conj().T)
    out = np.empty_like(u)
    flat = u.reshape((-1,) + u.shape[-2:])
    oflat = out.reshape((-1,) + u.shape[-2:])
    for k in range(flat.shape[0]):
        oflat[k] = principal_log(flat[k], check=False)
    return out


def hs_norm_sq(m: np.ndarray) -> np.ndarray:
    """Squared Hilbert-Schmidt norm Tr(M^H M), batched."""
    m = np.asarray(m)
    return np.sum(np.abs(m) ** 2, axis=(-2, -1))


class LieBasis:
    """Trace-orthonormal Hermitian basis of u(n): Tr(theta_a theta_b) = delta_ab.

    Elements: the n diagonal unit matrices, then for each pair j < k the
    symmetric combination (E_jk + E_kj)/sqrt(2) and the antisymmetric
    (-i E_jk + i E_kj)/sqrt(2).  Any trace-orthonormal basis would do; all
    downstream quantities are basis independent.
    """

    def __init__(self, n: int):
        if n < 1:
            raise ValidationError(f"group dimension must be >= 1, got {n}")
        self.n = n
        elems = []
        for j in range(n):
            e = np.zeros((n, n), dtype=complex)
            e[j, j] = 1.0
            elems.append(e)
        for j in range(n):
            for k in range(j + 1, n):
                s = np.zeros((n, n), dtype=complex)
                s[j, k] = s[k, j] = 1.0 / np.sqrt(2.0)
                elems.append(s)
                a = np.zeros((n, n), dtype=complex)
                a[j, k] = -1j / np.sqrt(2.0)
                a[k, j] = 1j / np.sqrt(2.0)
                elems.append(a)
        self.elements = np.stack(elems)  # (n^2, n, n)

    def __len__(self) -> int:
        return self.n * self.n


def lie_coords(x: np.ndarray, basis: LieBasis) -> np.ndarray:
    """Coordinates x_a = Tr(X theta_a); real for Hermitian X."""
    x = np.asarray(x)
    if x.shape[-1] != basis.n or x.shape[-2] != basis.n:
        raise ValidationError(
            f"dimension mismatch: X is {x.shape[-2]}x{x.shape[-1]}, basis is U({basis.n})"
        )
    assert_hermitian(x)
    # Tr(X theta) = sum_{ij} X_ij theta_ji
    coords = np.einsum("...ij,aji->...a", x, basis.elements)
    return np.real(coords)


def lie_reconstruct(coords: np.ndarray, basis: LieBasis) -> np.ndarray:
    """Sum_a x_a theta_a."""
    coords = np.asarray(coords)
    if coords.shape[-1] != len(basis):
        raise ValidationError(
            f"expected {len(basis)} coordinates, got {coords.shape[-1]}"
        )
    return np.einsum("...a,aij->...ij", coords, basis.elements)
