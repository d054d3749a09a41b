"""Discrete torus lattice and the slow-bond exchange-rate field.

Sites of the d-dimensional discrete torus with N^d points are indexed flat in
C order.  Every undirected nearest-neighbor bond is stored once in canonical
orientation (x, x+e_j); a directed read from either endpoint resolves to the
same stored value, so rate symmetry holds by construction.

A bond whose endpoints classify on opposite sides of the membrane is a slow
bond: its rate is |zeta . e_j| / N, where zeta is the outward unit normal at
the point where the bond crosses the boundary.  Every other bond has rate 1.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .geometry import Membrane, SurfacePoint


class TorusLattice:
    """Discrete torus {0..N-1}^d with flat C-order site indexing."""

    def __init__(self, dim, N):
        if dim not in (1, 2, 3):
            raise ValueError("dimension must be 1, 2 or 3")
        if N < 2:
            raise ValueError("N must be at least 2")
        self.dim = int(dim)
        self.N = int(N)
        self.n_sites = self.N ** self.dim
        self.shape = (self.N,) * self.dim
        grid = np.indices(self.shape).reshape(self.dim, self.n_sites)
        self._coords = grid.T.astype(np.int64)
        idx = np.arange(self.n_sites).reshape(self.shape)
        # neighbor_plus[j][x] = flat id of x + e_j (mod N)
        self.neighbor_plus = [np.roll(idx, -1, axis=j).ravel().astype(np.int64)
                              for j in range(self.dim)]
        self.neighbor_minus = [np.roll(idx, 1, axis=j).ravel().astype(np.int64)
                               for j in range(self.dim)]

    def ravel(self, multi):
        """Flat site id of a multi-index (wraps modulo N)."""
        multi = np.mod(np.asarray(multi, dtype=np.int64), self.N)
        return int(np.ravel_multi_index(tuple(multi), self.shape))

    def unravel(self, flat):
        """Multi-index of a flat site id."""
        return np.array(np.unravel_index(int(flat), self.shape), dtype=np.int64)

    def coords(self):
        """All multi-indices, shape (n_sites, d)."""
        return self._coords

    def points(self):
        """Embedded lattice points x/N in the torus, shape (n_sites, d)."""
        return self._coords / self.N


class SlowBond(NamedTuple):
    site: int            # flat id of the canonical first endpoint x
    axis: int            # bond direction j, i.e. the bond (x, x + e_j)
    crossing: SurfacePoint


@dataclass
class RateField:
    """Per-bond symmetric exchange rates on a torus lattice.

    ``rates[x, j]`` is the rate of the undirected bond (x, x+e_j).
    """

    lattice: TorusLattice
    rates: np.ndarray               # shape (n_sites, d), values in (0, 1]
    slow_bonds: list[SlowBond]
    membrane_label: str = "none"

    def rate(self, site, axis, orientation=+1):
        """Directed read of the rate of the bond from ``site`` along
        ``orientation * e_axis``; resolves to canonical storage."""
        if orientation >= 0:
            return float(self.rates[site, axis])
        return float(self.rates[self.lattice.neighbor_minus[axis][site], axis])

    def bond_endpoints(self):
        """Flat endpoint ids (a, b) of every canonical bond, bond id
        b_id = x * d + j."""
        lat = self.lattice
        a = np.repeat(np.arange(lat.n_sites, dtype=np.int64), lat.dim)
        b = np.stack([lat.neighbor_plus[j] for j in range(lat.dim)],
                     axis=1).ravel()
        return a, b

    def bond_rates(self):
        """Rates in bond-id order (matching ``bond_endpoints``)."""
        return self.rates.ravel()

    def is_slow(self):
        """Boolean mask over bond ids: rate != 1."""
        return self.bond_rates() != 1.0


def homogeneous_rates(lattice):
    """Rate field of the membrane-free process: every bond has rate 1."""
    return RateField(lattice, np.ones((lattice.n_sites, lattice.dim)), [])


def build_rate_field(lattice: TorusLattice, membrane: Membrane) -> RateField:
    """Assign exchange rates from the membrane geometry.

    Bonds with endpoints on opposite sides get rate |zeta . e_j| / N with
    zeta the outward unit normal at the bond's crossing point; all other
    bonds get rate 1.
    """
    if lattice.N < 4:
        raise ValueError("rate construction requires N >= 4")
    if membrane.dim != lattice.dim:
        raise ValueError("membrane and lattice dimensions differ")
    pts = lattice.points()
    inside = np.asarray(membrane.inside(pts)).ravel()
    rates = np.ones((lattice.n_sites, lattice.dim))
    slow_bonds: list[SlowBond] = []
    for j in range(lattice.dim):
        nb = lattice.neighbor_plus[j]
        for x in np.nonzero(inside != inside[nb])[0]:
            sp = membrane.crossing_point(pts[x], pts[nb[x]])
            if sp is None:
                # endpoints classify apart, so a sign change must exist
                raise RuntimeError("classification/crossing mismatch")
            val = abs(float(sp.normal[j])) / lattice.N
            if val == 0.0:
                raise ValueError(
                    f"tangential crossing with zero rate on bond ({x}, +e_{j})")
            rates[x, j] = val
            slow_bonds.append(SlowBond(int(x), j, sp))
    return RateField(lattice, rates, slow_bonds, membrane_label=membrane.label)


def slow_set(rates: RateField) -> np.ndarray:
    """Sites incident to at least one bond with rate != 1, sorted."""
    sites = set()
    for bond in rates.slow_bonds:
        sites.add(bond.site)
        sites.add(int(rates.lattice.neighbor_plus[bond.axis][bond.site]))
    return np.array(sorted(sites), dtype=np.int64)


def write_rates_csv(path, rates: RateField, header_comment=None):
    """Dump the rate field: one row per canonical bond, columns
    x0..x{d-1}, axis, rate, is_slow."""
    lat = rates.lattice
    coords = lat.coords()
    with open(path, "w", newline="") as fh:
        if header_comment:
            fh.write(f"# {header_comment}\n")
        fh.write(f"# d={lat.dim} N={lat.N} membrane={rates.membrane_label}\n")
        writer = csv.writer(fh)
        writer.writerow([f"x{k}" for k in range(lat.dim)]
                        + ["axis", "rate", "is_slow"])
        for x in range(lat.n_sites):
            for j in range(lat.dim):
                r = rates.rates[x, j]
                writer.writerow(list(coords[x])
                                + [j, f"{r:.17g}", int(r != 1.0)])
