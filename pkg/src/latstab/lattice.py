"""Hypercubic lattice geometry: bonds, plaquettes, counting formulas, gauge fixing.

Sites are labeled 1..L per coordinate, coordinate 0 is the time direction.
Enumeration order is deterministic (mixed-radix, time fastest) so downstream
Monte Carlo runs are reproducible.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .group import ValidationError

__all__ = [
    "Lattice",
    "Bond",
    "Plaquette",
    "LatticeCounts",
    "GaugeFixing",
    "HOLONOMY_SIGNS",
    "build_lattice",
    "counts",
    "enhanced_temporal_gauge",
    "lattice_to_text",
    "lattice_from_text",
]

#: Traversal orientation of a plaquette's four constituent bonds: the first two
#: are walked forward, the last two backward (adjoint).
HOLONOMY_SIGNS = (+1, +1, -1, -1)


@dataclass(frozen=True)
class Bond:
    """Lattice bond with initial point `origin` in lattice direction `direction`.

    `wraps` marks the extra bonds of the periodic lattice, whose initial point
    sits at coordinate L and whose terminal point wraps around to coordinate 1.
    Wrap consistency is validated against a lattice in Lattice.contains_bond.
    """

    origin: tuple
    direction: int
    wraps: bool = False


@dataclass(frozen=True)
class Plaquette:
    """Minimal square in the (mu, nu) plane, mu < nu, anchored at `origin`.

    `bonds` lists the four constituent bonds in holonomy order:
    b_mu(x), b_nu(x + e_mu), b_mu(x + e_nu), b_nu(x); the last two are
    traversed in reverse (see HOLONOMY_SIGNS).
    """

    origin: tuple
    plane: tuple
    bonds: tuple = field(compare=False)


@dataclass(frozen=True)
class LatticeCounts:
    """Closed-form lattice cardinalities (free-bc counts unless suffixed)."""

    sites: int
    free_bonds: int
    extra_bonds: int
    periodic_bonds: int
    free_plaquettes: int
    periodic_plaquettes: int
    retained_bonds: int
    gauge_fixed_bonds: int


_RETAINED = {
    2: lambda L: (L - 1) ** 2,
    3: lambda L: (2 * L + 1) * (L - 1) ** 2,
    4: lambda L: (3 * L**3 - L**2 - L - 1) * (L - 1),
}


class Lattice:
    """Finite hypercubic lattice: d in {2,3,4}, L sites per side, spacing a."""

    def __init__(self, d: int, L: int, a: float = 1.0, bc: str = "free"):
        if d not in (2, 3, 4):
            raise ValidationError(f"dimension must be 2, 3 or 4, got {d}")
        if L < 2:
            raise ValidationError(f"need at least 2 sites per side, got L={L}")
        if not 0.0 < a <= 1.0:
            raise ValidationError(f"lattice spacing must be in (0, 1], got {a}")
        if bc not in ("free", "periodic"):
            raise ValidationError(f"boundary condition must be 'free' or 'periodic', got {bc!r}")
        self.d = d
        self.L = L
        self.a = a
        self.bc = bc

    def __repr__(self):
        return f"Lattice(d={self.d}, L={self.L}, a={self.a}, bc={self.bc!r})"

    # -- geometry ---------------------------------------------------------

    def sites(self):
        """All sites, time coordinate varying fastest."""
        rng = range(1, self.L + 1)
        for coords in itertools.product(*[rng] * self.d):
            yield coords[::-1]  # product varies the last factor fastest

    def site_index(self, x) -> int:
        """Mixed-radix linear index, time coordinate fastest."""
        idx = 0
        for mu in reversed(range(self.d)):
            idx = idx * self.L + (x[mu] - 1)
        return idx

    def shift(self, x, mu: int):
        """Site one step in direction mu, wrapping L -> 1."""
        y = list(x)
        y[mu] = y[mu] + 1 if y[mu] < self.L else 1
        return tuple(y)

    def bond_from(self, x, mu: int) -> Bond:
        """The bond with initial point x in direction mu (wrap bond at the edge)."""
        wraps = x[mu] == self.L
        if wraps and self.bc == "free":
            raise ValidationError(f"no bond leaves {x} in direction {mu} under free bc")
        return Bond(tuple(x), mu, wraps)

    def bond_endpoints(self, b: Bond):
        return b.origin, self.shift(b.origin, b.direction)

    def bonds(self):
        """All bonds of the lattice in deterministic order (free first, then wraps)."""
        for x in self.sites():
            for mu in range(self.d):
                if x[mu] < self.L:
                    yield Bond(x, mu, False)
        if self.bc == "periodic":
            for x in self.sites():
                for mu in range(self.d):
                    if x[mu] == self.L:
                        yield Bond(x, mu, True)

    def plaquette_at(self, x, mu: int, nu: int) -> Plaquette:
        if not mu < nu:
            raise ValidationError(f"plaquette plane needs mu < nu, got ({mu}, {nu})")
        xmu = self.shift(x, mu)
        xnu = self.shift(x, nu)
        bonds = (
            self.bond_from(x, mu),
            self.bond_from(xmu, nu),
            self.bond_from(xnu, mu),
            self.bond_from(x, nu),
        )
        return Plaquette(tuple(x), (mu, nu), bonds)

    def plaquettes(self):
        """All plaquettes with the boundary condition of the lattice."""
        for x in self.sites():
            for mu in range(self.d):
                for nu in range(mu + 1, self.d):
                    if self.bc == "free" and (x[mu] == self.L or x[nu] == self.L):
                        continue
                    yield self.plaquette_at(x, mu, nu)

    def contains_bond(self, b: Bond) -> bool:
        if b.direction not in range(self.d) or len(b.origin) != self.d:
            return False
        if any(not 1 <= c <= self.L for c in b.origin):
            return False
        if b.wraps:
            return self.bc == "periodic" and b.origin[b.direction] == self.L
        return b.origin[b.direction] < self.L


def build_lattice(d: int, L: int, a: float = 1.0, bc: str = "free") -> Lattice:
    """Validated Lattice constructor (mirrors the CLI's parameter names)."""
    return Lattice(d=d, L=L, a=a, bc=bc)


def counts(lattice: Lattice) -> LatticeCounts:
    """Closed-form cardinalities for the lattice; enumeration must match these."""
    d, L = lattice.d, lattice.L
    return LatticeCounts(
        sites=L**d,
        free_bonds=d * (L - 1) * L ** (d - 1),
        extra_bonds=d * L ** (d - 1),
        periodic_bonds=d * (L - 1) * L ** (d - 1) + d * L ** (d - 1),
        free_plaquettes=(d * (d - 1) // 2) * (L - 1) ** 2 * L ** (d - 2),
        periodic_plaquettes=(d * (d - 1) // 2) * L**d,
        retained_bonds=_RETAINED[d](L),
        gauge_fixed_bonds=L**d - 1,
    )


@dataclass(frozen=True)
class GaugeFixing:
    """Partition of the bonds into gauge-fixed (set to identity) and retained.

    The fixed bonds form a maximal tree: acyclic, spanning all sites, so fixing
    them leaves the partition function unchanged.  Tuples keep the deterministic
    enumeration order; the frozensets are for membership tests.
    """

    fixed: tuple
    retained: tuple

    @property
    def fixed_set(self) -> frozenset:
        return frozenset(self.fixed)

    @property
    def retained_set(self) -> frozenset:
        return frozenset(self.retained)


def enhanced_temporal_gauge(lattice: Lattice) -> GaugeFixing:
    """Enhanced temporal gauge: all temporal bonds, plus a comb of spatial bonds
    on the initial-time slice.

    Fixed bonds, in every dimension: b_0(x) for all x.  On the x0 = 1 slice,
    additionally b_1(x) for all x; restricted to x1 = 1, additionally b_2(x);
    restricted further to x2 = 1, b_3(x).  The same (free) bonds are fixed for
    both boundary conditions; wrap bonds are never fixed.
    """
    d, L = lattice.d, lattice.L
    fixed = []
    for b in lattice.bonds():
        if b.wraps:
            continue
        x, mu = b.origin, b.direction
        if mu == 0:
            fixed.append(b)
        elif x[0] == 1 and all(x[j] == 1 for j in range(1, mu)):
            fixed.append(b)
    fixed_set = frozenset(fixed)
    retained = tuple(b for b in lattice.bonds() if b not in fixed_set)
    return GaugeFixing(fixed=tuple(fixed), retained=retained)


# -- plain-text serialization (used by the CLI config format) --------------

def lattice_to_text(lattice: Lattice) -> str:
    return (
        f"d = {lattice.d}\n"
        f"L = {lattice.L}\n"
        f"a = {lattice.a!r}\n"
        f"bc = {lattice.bc}\n"
    )


def lattice_from_text(text: str) -> Lattice:
    fields = {}
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, _, value = line.partition("=")
        fields[key.strip()] = value.strip()
    try:
        return Lattice(
            d=int(fields["d"]),
            L=int(fields["L"]),
            a=float(fields.get("a", "1.0")),
            bc=fields.get("bc", "free"),
        )
    except KeyError as exc:
        raise ValidationError(f"lattice description missing key {exc}") from exc
