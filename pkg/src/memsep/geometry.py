"""Implicit-surface membranes on the flat torus [0,1)^d.

A membrane is a closed region Lambda = {u : phi(u) <= 0} described by a smooth
periodic level-set function phi together with its analytic gradient.  The
boundary dividing Lambda from its complement acts as the interface across
which lattice bonds are slowed.  This module answers the four geometric
queries the rest of the package needs:

* side classification (``inside``),
* outward unit normals on the boundary (``normal_at``),
* the crossing point of a short segment with the boundary (``crossing_point``),
* signed distance to the boundary plus its first two derivatives
  (``signed_distance``, ``distance_gradient``, ``distance_laplacian``).

Conventions: points live in [0,1)^d and every evaluation wraps its argument,
so representatives differing by integer vectors are equivalent.  The boundary
tie rule is phi(u) = 0 counts as inside; normals point from Lambda toward the
complement.  Distances are negative inside and positive outside.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import ConvergenceFailure, NotOnSurface

SURFACE_TOL = 1e-8
_CROSSING_PHI_TOL = 1e-12
_PROJECTION_STALL = 1e-13


def wrap_point(u):
    """Map coordinates to the canonical torus cell [0,1)^d."""
    u = np.asarray(u, dtype=float)
    return u - np.floor(u)


def wrap_displacement(v):
    """Shortest-representative displacement, componentwise in [-1/2, 1/2)."""
    v = np.asarray(v, dtype=float)
    return v - np.round(v)


@dataclass
class SurfacePoint:
    """A point on the membrane boundary with its outward unit normal."""

    point: np.ndarray
    normal: np.ndarray

    def __post_init__(self):
        self.point = np.asarray(self.point, dtype=float)
        self.normal = np.asarray(self.normal, dtype=float)


class Membrane:
    """Region Lambda = {phi <= 0} with smooth periodic boundary.

    Parameters
    ----------
    phi : callable
        Level-set function, vectorized over points of shape (..., d).
    grad_phi : callable
        Analytic gradient of phi, shape (..., d) -> (..., d).
    band_width : float
        Radius of a tubular neighborhood of the boundary inside which phi has
        a nonvanishing gradient and distance projections are well posed.
    dim : int
        Spatial dimension (1, 2 or 3).
    label : str
        Identifier used in exported metadata.
    hess_phi : callable, optional
        Analytic Hessian, shape (..., d) -> (..., d, d).  When omitted, a
        centered finite difference of ``grad_phi`` is used.
    """

    def __init__(self, phi, grad_phi, band_width, dim, label,
                 hess_phi=None, check=True):
        if band_width <= 0:
            raise ValueError("band_width must be positive")
        self._phi = phi
        self._grad_phi = grad_phi
        self.band_width = float(band_width)
        self.dim = int(dim)
        self.label = str(label)
        self._hess_phi = hess_phi
        self.gradient_floor = None
        if check:
            self._validate()

    # -- raw level-set queries ------------------------------------------

    def phi(self, u):
        return self._phi(wrap_point(u))

    def grad_phi(self, u):
        return self._grad_phi(wrap_point(u))

    def hess_phi(self, u):
        if self._hess_phi is not None:
            return self._hess_phi(wrap_point(u))
        return self._fd_hessian(u)

    def _fd_hessian(self, u, step=3e-6):
        u = np.asarray(u, dtype=float)
        H = np.empty((self.dim, self.dim))
        for j in range(self.dim):
            e = np.zeros(self.dim)
            e[j] = step
            H[:, j] = (self.grad_phi(u + e) - self.grad_phi(u - e)) / (2 * step)
        return 0.5 * (H + H.T)

    def _validate(self, samples=4096, floor=1e-8):
        rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(271828)))
        pts = rng.random((samples, self.dim))
        vals = np.asarray(self.phi(pts), dtype=float)
        if not np.all(np.isfinite(vals)):
            raise ValueError("phi produced non-finite values")
        shift = pts + rng.integers(-3, 4, size=pts.shape)
        if np.max(np.abs(np.asarray(self.phi(shift)) - vals)) > 1e-12:
            raise ValueError("phi is not periodic under integer shifts")
        band = np.abs(vals) <= self.band_width
        if np.any(band):
            grads = np.asarray(self.grad_phi(pts[band]), dtype=float)
            norms = np.linalg.norm(np.atleast_2d(grads), axis=-1)
            self.gradient_floor = float(norms.min())
            if self.gradient_floor < floor:
                raise ValueError(
                    f"gradient of phi vanishes inside the band "
                    f"(min |grad phi| = {self.gradient_floor:.3e})")

    # -- classification and normals -------------------------------------

    def inside(self, u):
        """True where phi(u) <= 0 (boundary points count as inside)."""
        return np.asarray(self.phi(u)) <= 0.0

    def normal_at(self, u, surface_tol=SURFACE_TOL):
        """Outward unit normal at a point on the boundary.

        Raises ``NotOnSurface`` if |phi(u)| exceeds ``surface_tol``.
        """
        u = np.asarray(u, dtype=float)
        val = float(self.phi(u))
        if abs(val) > surface_tol:
            raise NotOnSurface(
                f"|phi(u)| = {abs(val):.3e} exceeds surface_tol = {surface_tol:.1e}")
        g = np.asarray(self.grad_phi(u), dtype=float)
        return g / np.linalg.norm(g)

    # -- bond/boundary intersection --------------------------------------

    def crossing_point(self, a, b, scan=8, max_iter=100):
        """Intersection of the segment [a, b] with the boundary.

        ``a`` and ``b`` are the endpoints of a short lattice bond; the segment
        is taken along the shortest torus representative of b - a.  Returns
        None when both endpoints classify on the same side.  With several
        roots on the segment, the one nearest ``a`` is returned.
        """
        a = np.asarray(a, dtype=float)
        disp = wrap_displacement(np.asarray(b, dtype=float) - a)

        def side(t):
            return float(self.phi(a + t * disp)) <= 0.0

        side_a = side(0.0)
        if side(1.0) == side_a:
            return None

        # locate the first sign change at scan resolution, then bisect
        t_lo, t_hi = 0.0, 1.0
        prev = 0.0
        for k in range(1, scan + 1):
            t = k / scan
            if side(t) != side_a:
                t_lo, t_hi = prev, t
                break
            prev = t

        for _ in range(max_iter):
            t_mid = 0.5 * (t_lo + t_hi)
            val = float(self.phi(a + t_mid * disp))
            if abs(val) <= _CROSSING_PHI_TOL:
                root = a + t_mid * disp
                g = np.asarray(self.grad_phi(root), dtype=float)
                return SurfacePoint(wrap_point(root), g / np.linalg.norm(g))
            if (val <= 0.0) == side_a:
                t_lo = t_mid
            else:
                t_hi = t_mid
        raise ConvergenceFailure(
            f"bisection did not reach |phi| <= {_CROSSING_PHI_TOL:.0e} "
            f"in {max_iter} iterations")

    # -- signed distance and its derivatives ------------------------------

    def project_to_surface(self, u, max_iter=50):
        """Closest boundary point to ``u`` (valid inside the band).

        Returns (p, s) with p on the boundary and s the signed distance,
        negative inside.  Uses a gradient-descent warm start followed by a
        damped Newton iteration on the closest-point conditions
        phi(p) = 0 and u - p parallel to grad phi(p).
        """
        u = np.asarray(u, dtype=float)
        d = self.dim
        p = u.copy()
        for _ in range(3):
            g = np.asarray(self.grad_phi(p), dtype=float)
            f = float(self.phi(p))
            step = (f / (g @ g)) * g
            nrm = np.linalg.norm(step)
            if nrm > 0.5 * self.band_width:
                step *= 0.5 * self.band_width / nrm
            p = p - step

        g = np.asarray(self.grad_phi(p), dtype=float)
        t = float((u - p) @ g) / float(g @ g)
        J = np.zeros((d + 1, d + 1))
        F = np.zeros(d + 1)
        for it in range(max_iter):
            g = np.asarray(self.grad_phi(p), dtype=float)
            f = float(self.phi(p))
            H = np.asarray(self.hess_phi(p), dtype=float)
            F[:d] = p + t * g - u
            F[d] = f
            J[:d, :d] = np.eye(d) + t * H
            J[:d, d] = g
            J[d, :d] = g
            J[d, d] = 0.0
            try:
                delta = np.linalg.solve(J, -F)
            except np.linalg.LinAlgError as exc:
                raise ConvergenceFailure("singular closest-point system") from exc
            nrm = np.linalg.norm(delta[:d])
            if nrm > 0.25 * self.band_width:
                delta *= 0.25 * self.band_width / nrm
            p = p + delta[:d]
            t = t + delta[d]
            if np.linalg.norm(delta) < _PROJECTION_STALL:
                break
        else:
            raise ConvergenceFailure(
                f"closest-point projection stalled above {_PROJECTION_STALL:.0e}")
        s = np.linalg.norm(u - p)
        if float(self.phi(u)) <= 0.0:
            s = -s
        return p, s

    def _far_value(self, u):
        # outside the band only sign and magnitude >= band_width matter
        val = float(self.phi(u))
        mag = self.band_width + abs(val)
        return mag if val > 0.0 else -mag

    def _near_band(self, u):
        g = np.asarray(self.grad_phi(u), dtype=float)
        nrm = np.linalg.norm(g)
        if nrm < 1e-12:
            return False
        return abs(float(self.phi(u))) / nrm <= 2.0 * self.band_width

    def signed_distance(self, u):
        """Signed distance to the boundary, negative inside Lambda.

        Exact (to projection tolerance) within the band; outside it a value
        with the correct sign and magnitude >= band_width is returned.
        Accepts a single point (d,) or a batch (m, d).
        """
        u = np.asarray(u, dtype=float)
        if u.ndim == 1:
            if not self._near_band(u):
                return self._far_value(u)
            return self.project_to_surface(u)[1]
        return np.array([self.signed_distance(row) for row in u])

    def distance_gradient(self, u):
        """Gradient of the signed distance: the outward unit normal at the
        projection of ``u``.  Only meaningful inside the band."""
        u = np.asarray(u, dtype=float)
        if u.ndim > 1:
            return np.array([self.distance_gradient(row) for row in u])
        p, _ = self.project_to_surface(u)
        g = np.asarray(self.grad_phi(p), dtype=float)
        return g / np.linalg.norm(g)

    def distance_laplacian(self, u):
        """Laplacian of the signed distance inside the band.

        Equals sum_i k_i / (1 + s k_i) over the principal curvatures k_i of
        the boundary at the projection point (positive for a convex Lambda).
        """
        u = np.asarray(u, dtype=float)
        if u.ndim > 1:
            return np.array([self.distance_laplacian(row) for row in u])
        p, s = self.project_to_surface(u)
        kappas = self._principal_curvatures(p)
        return float(np.sum(kappas / (1.0 + s * kappas)))

    def _principal_curvatures(self, p):
        d = self.dim
        if d == 1:
            return np.zeros(0)
        g = np.asarray(self.grad_phi(p), dtype=float)
        gn = np.linalg.norm(g)
        n = g / gn
        H = np.asarray(self.hess_phi(p), dtype=float)
        # orthonormal tangent frame: eigenvectors of I - n n^T with eigenvalue 1
        w, V = np.linalg.eigh(np.eye(d) - np.outer(n, n))
        Q = V[:, w > 0.5]
        S = Q.T @ H @ Q / gn
        return np.linalg.eigvalsh(0.5 * (S + S.T))


# -- membrane catalogue ---------------------------------------------------


class _BallMembrane(Membrane):
    """Ball of given radius; exact closed-form distance."""

    def __init__(self, center, radius, band_width, label):
        center = np.asarray(center, dtype=float)
        d = center.size
        if not 0 < radius < 0.5:
            raise ValueError("radius must lie in (0, 1/2) to fit the torus")
        self.center = center
        self.radius = float(radius)

        def phi(u):
            w = wrap_displacement(np.asarray(u, dtype=float) - center)
            return np.linalg.norm(np.atleast_2d(w), axis=-1).reshape(
                np.shape(u)[:-1]) - radius

        def grad(u):
            w = wrap_displacement(np.asarray(u, dtype=float) - center)
            r = np.linalg.norm(np.atleast_2d(w), axis=-1).reshape(
                np.shape(u)[:-1] + (1,))
            return w / r

        def hess(u):
            w = wrap_displacement(np.asarray(u, dtype=float) - center)
            r = np.linalg.norm(w)
            n = w / r
            return (np.eye(d) - np.outer(n, n)) / r

        super().__init__(phi, grad, band_width, d, label, hess_phi=hess)

    def signed_distance(self, u):
        u = np.asarray(u, dtype=float)
        w = wrap_displacement(u - self.center)
        return np.linalg.norm(np.atleast_2d(w), axis=-1).reshape(
            u.shape[:-1]) - self.radius

    def distance_gradient(self, u):
        u = np.asarray(u, dtype=float)
        w = wrap_displacement(u - self.center)
        r = np.linalg.norm(np.atleast_2d(w), axis=-1).reshape(u.shape[:-1] + (1,))
        return w / r

    def distance_laplacian(self, u):
        u = np.asarray(u, dtype=float)
        w = wrap_displacement(u - self.center)
        r = np.linalg.norm(np.atleast_2d(w), axis=-1).reshape(u.shape[:-1])
        out = (self.dim - 1) / r
        return float(out) if u.ndim == 1 else out


class _IntervalMembrane(Membrane):
    """One-dimensional arc [left, right]; exact closed-form distance."""

    def __init__(self, left, right, band_width, label):
        if not left < right:
            raise ValueError("interval requires left < right")
        width = right - left
        if not 0 < width < 1:
            raise ValueError("interval width must lie in (0, 1)")
        mid = 0.5 * (left + right)
        half = 0.5 * width
        self.left, self.right = float(left), float(right)

        def phi(u):
            w = wrap_displacement(np.asarray(u, dtype=float) - mid)
            return np.abs(w).reshape(np.shape(u)[:-1]) - half

        def grad(u):
            w = wrap_displacement(np.asarray(u, dtype=float) - mid)
            return np.where(w >= 0.0, 1.0, -1.0)

        def hess(u):
            return np.zeros((1, 1))

        super().__init__(phi, grad, band_width, 1, label, hess_phi=hess)
        self._mid, self._half = mid, half

    def signed_distance(self, u):
        u = np.asarray(u, dtype=float)
        w = wrap_displacement(u - self._mid)
        return np.abs(w).reshape(u.shape[:-1]) - self._half

    def distance_gradient(self, u):
        u = np.asarray(u, dtype=float)
        w = wrap_displacement(u - self._mid)
        return np.where(w >= 0.0, 1.0, -1.0)

    def distance_laplacian(self, u):
        u = np.asarray(u, dtype=float)
        return 0.0 if u.ndim == 1 else np.zeros(u.shape[:-1])


class _EllipsoidMembrane(Membrane):
    """Axis-aligned ellipse/ellipsoid; distances via closest-point projection."""

    def __init__(self, center, semi_axes, band_width, label):
        center = np.asarray(center, dtype=float)
        semi = np.asarray(semi_axes, dtype=float)
        if center.size != semi.size:
            raise ValueError("center and semi_axes must have equal length")
        if np.any(semi <= 0) or np.max(semi) >= 0.5:
            raise ValueError("semi-axes must lie in (0, 1/2)")
        d = center.size
        inv2 = 1.0 / semi**2

        def phi(u):
            w = wrap_displacement(np.asarray(u, dtype=float) - center)
            return np.sum(np.atleast_2d(w)**2 * inv2, axis=-1).reshape(
                np.shape(u)[:-1]) - 1.0

        def grad(u):
            w = wrap_displacement(np.asarray(u, dtype=float) - center)
            return 2.0 * w * inv2

        def hess(u):
            return 2.0 * np.diag(inv2)

        self.center = center
        self.semi_axes = semi
        super().__init__(phi, grad, band_width, d, label, hess_phi=hess)


def ball(center=(0.5, 0.5), radius=0.25, band_width=None):
    """Circle (d=2) or ball (d=3) membrane; also works in d=1."""
    center = np.asarray(center, dtype=float)
    if band_width is None:
        band_width = 0.6 * min(radius, 0.5 - radius)
    label = f"ball(center={tuple(center)},radius={radius})"
    return _BallMembrane(center, radius, band_width, label)


circle = ball


def ellipsoid(center=(0.5, 0.5), semi_axes=(0.3, 0.2), band_width=None):
    """Axis-aligned ellipse (d=2) or ellipsoid (d=3) membrane."""
    center = np.asarray(center, dtype=float)
    semi = np.asarray(semi_axes, dtype=float)
    if band_width is None:
        lo, hi = float(np.min(semi)), float(np.max(semi))
        band_width = 0.6 * min(lo, 0.5 - hi, lo**2 / hi)
    label = f"ellipsoid(center={tuple(center)},semi_axes={tuple(semi)})"
    return _EllipsoidMembrane(center, semi, band_width, label)


ellipse = ellipsoid


def interval(left=0.25, right=0.75, band_width=None):
    """One-dimensional membrane: Lambda = [left, right]."""
    if band_width is None:
        width = right - left
        band_width = 0.6 * 0.5 * min(width, 1.0 - width)
    return _IntervalMembrane(left, right, band_width,
                             f"interval(left={left},right={right})")


def implicit_membrane(phi, grad_phi, band_width, dim, label="custom",
                      hess_phi=None):
    """User-supplied membrane from a periodic level-set function with an
    analytically provided gradient (Hessian optional, finite-differenced
    when absent)."""
    return Membrane(phi, grad_phi, band_width, dim, label, hess_phi=hess_phi)
