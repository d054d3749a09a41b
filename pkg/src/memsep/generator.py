"""Single-particle generator as a sparse symmetric operator.

The operator acts on lattice fields H by

    (L H)(x) = sum_j  xi_{x,x+e_j} [H(x+e_j) - H(x)]
                    + xi_{x,x-e_j} [H(x-e_j) - H(x)],

a weighted graph Laplacian of the bond rates.  All user-facing times are
macroscopic: the diffusively rescaled semigroup exp(t N^2 L) is what
``evolve_density`` computes, matching the N^2-speeded particle dynamics.

Spectral decompositions are dense up to DENSE_CUTOFF sites and use a
shift-inverted Lanczos solver beyond that.  Density evolution uses the exact
eigen-expansion on small lattices and Crank-Nicolson stepping (A-stable, so
no step restriction from the N^2 stiffness) with a step-halving Richardson
acceptance check otherwise.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.linalg import eigh

from .errors import ConvergenceFailure
from .lattice import RateField, TorusLattice

DENSE_CUTOFF = 4096
_RICHARDSON_TOL = 1e-8


@dataclass
class Spectrum:
    """Sorted eigenpairs of -L: eigenvalues[n] = mu_n >= 0, columns of
    ``eigenvectors`` orthonormal."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


class SparseGenerator:
    """Symmetric sparse matrix form of the single-particle generator."""

    def __init__(self, lattice: TorusLattice, matrix: sp.csr_matrix):
        self.lattice = lattice
        self.matrix = matrix
        self.n_sites = lattice.n_sites
        self._dense_eigh = None

    def apply(self, H):
        """Matrix-vector product L @ H."""
        H = np.asarray(H, dtype=float)
        if H.shape != (self.n_sites,):
            raise ValueError(
                f"field has shape {H.shape}, expected ({self.n_sites},)")
        return self.matrix @ H

    def full_eigh(self):
        """Dense eigendecomposition of -L (cached). Only for small lattices."""
        if self.n_sites > DENSE_CUTOFF:
            raise ValueError(
                f"dense decomposition limited to {DENSE_CUTOFF} sites")
        if self._dense_eigh is None:
            w, V = eigh(-self.matrix.toarray())
            self._dense_eigh = (w, _canonical_signs(V))
        return self._dense_eigh


def assemble(rates: RateField) -> SparseGenerator:
    """Build the generator matrix from a rate field.

    Off-diagonal entries are the bond rates, inserted symmetrically for both
    orientations; diagonal entries are minus the sum of incident rates, so
    every row sums to zero and constants are annihilated.
    """
    lat = rates.lattice
    n = lat.n_sites
    rows, cols, vals = [], [], []
    diag = np.zeros(n)
    x = np.arange(n, dtype=np.int64)
    for j in range(lat.dim):
        y = lat.neighbor_plus[j]
        xi = rates.rates[:, j]
        rows.append(x)
        cols.append(y)
        vals.append(xi)
        rows.append(y)
        cols.append(x)
        vals.append(xi)
        np.add.at(diag, x, -xi)
        np.add.at(diag, y, -xi)
    rows.append(x)
    cols.append(x)
    vals.append(diag)
    mat = sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(n, n)).tocsr()
    return SparseGenerator(lat, mat)


def _canonical_signs(V):
    # fix each eigenvector's sign so its largest-magnitude entry is positive
    idx = np.argmax(np.abs(V), axis=0)
    signs = np.sign(V[idx, np.arange(V.shape[1])])
    signs[signs == 0] = 1.0
    return V * signs


def spectrum(gen: SparseGenerator, k=None) -> Spectrum:
    """The k smallest eigenpairs of -L, sorted ascending and orthonormal."""
    n = gen.n_sites
    if k is None:
        k = n
    if k > n:
        raise ValueError("cannot request more eigenpairs than sites")
    if n <= DENSE_CUTOFF:
        w, V = gen.full_eigh()
        return Spectrum(w[:k].copy(), V[:, :k].copy())
    if k >= n - 1:
        raise ValueError("iterative solver needs k < n_sites - 1")
    A = (-gen.matrix).tocsc()
    v0 = np.cos(np.arange(n, dtype=float) * 0.73) + 0.1  # deterministic start
    try:
        w, V = spla.eigsh(A, k=k, sigma=-1e-8, which="LM", v0=v0)
    except spla.ArpackNoConvergence as exc:
        raise ConvergenceFailure("eigensolver did not converge") from exc
    order = np.argsort(w)
    return Spectrum(w[order], _canonical_signs(V[:, order]))


def spectrum_residuals(gen: SparseGenerator, spec: Spectrum) -> np.ndarray:
    """Per-pair residual norms ||(-L) F_n - mu_n F_n||_2."""
    A = -gen.matrix
    R = A @ spec.eigenvectors - spec.eigenvectors * spec.eigenvalues
    return np.linalg.norm(R, axis=0)


def evolve_density(gen: SparseGenerator, e0, t, method="auto"):
    """Expected-density evolution: exp(t N^2 L) e0 at macroscopic time t.

    method='eigen' uses the full dense eigen-expansion; 'crank_nicolson'
    uses implicit stepping with a step-halving Richardson check below
    1e-8 in max norm; 'auto' picks by lattice size.
    """
    if t < 0:
        raise ValueError("time must be nonnegative")
    e0 = np.asarray(e0, dtype=float)
    if e0.shape != (gen.n_sites,):
        raise ValueError("initial density has wrong shape")
    if t == 0.0:
        return e0.copy()
    if method == "auto":
        method = "eigen" if gen.n_sites <= DENSE_CUTOFF else "crank_nicolson"
    if method == "eigen":
        w, V = gen.full_eigh()
        scale = gen.lattice.N ** 2
        return V @ (np.exp(-w * scale * t) * (V.T @ e0))
    if method == "crank_nicolson":
        return _crank_nicolson(gen, e0, t)
    raise ValueError(f"unknown method {method!r}")


def _crank_nicolson(gen, e0, t, tol=_RICHARDSON_TOL, max_steps=1 << 24):
    A = (gen.lattice.N ** 2) * gen.matrix.tocsc()
    ident = sp.identity(gen.n_sites, format="csc")

    def sweep(steps):
        dt = t / steps
        lhs = spla.splu((ident - 0.5 * dt * A).tocsc())
        rhs = ident + 0.5 * dt * A
        e = e0.copy()
        for _ in range(steps):
            e = lhs.solve(rhs @ e)
        return e

    steps = 8
    coarse = sweep(steps)
    while steps <= max_steps:
        fine = sweep(2 * steps)
        if np.max(np.abs(fine - coarse)) < tol:
            return fine
        coarse = fine
        steps *= 2
    raise ConvergenceFailure(
        f"Crank-Nicolson Richardson check did not reach {tol:.0e}")


def spectral_coefficients(spec: Spectrum, e) -> np.ndarray:
    """Coefficients c_n = <e, F_n> of a field in the full eigenbasis."""
    e = np.asarray(e, dtype=float)
    n = spec.eigenvectors.shape[0]
    if spec.eigenvectors.shape[1] != n:
        raise ValueError("spectral_coefficients requires the full spectrum")
    if e.shape != (n,):
        raise ValueError("field has wrong shape")
    return spec.eigenvectors.T @ e


def reconstruct(spec: Spectrum, coefficients) -> np.ndarray:
    """Field with the given eigenbasis coefficients."""
    return spec.eigenvectors @ np.asarray(coefficients, dtype=float)


def check_density_range(values, tol=1e-9):
    """Clamped reporting for physical densities: raise if any entry leaves
    [-tol, 1+tol], otherwise return the values clipped to [0, 1]."""
    values = np.asarray(values, dtype=float)
    if values.min() < -tol or values.max() > 1.0 + tol:
        raise ValueError(
            f"density leaves [0,1] by more than {tol:.0e}: "
            f"range [{values.min():.3e}, {values.max():.3e}]")
    return np.clip(values, 0.0, 1.0)
