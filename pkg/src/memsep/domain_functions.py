"""Test functions with a constant jump across the membrane.

The functions represented here have the form H = h + jump * 1_Lambda with h
twice continuously differentiable on the torus and its gradient matching the
jump on the boundary:

    grad h(u) = -jump * zeta(u)   for u on the boundary,

zeta the outward unit normal.  The limiting operator acts on such H simply as
the Laplacian of the smooth part, so evaluating it costs one call to the
stored closed-form Laplacian of h.

Construction of the smooth part: h(u) = -jump * s(u) * bump(s(u)) where s is
the signed distance to the boundary and ``bump`` is a C^2 quintic-smoothstep
cutoff equal to 1 within eps/2 of the boundary and 0 beyond eps.  Since h
depends on position only through s, the chain rule gives

    grad h = psi'(s) grad s,      lap h = psi''(s) + psi'(s) lap s,

with psi(s) = -jump * s * bump(s) and |grad s| = 1.  On the boundary
psi'(0) = -jump, which is exactly the required gradient condition.

``generator_residual`` measures how far the rescaled lattice operator is from
the limiting operator on such a function:  N^{-d} sum_x |N^2 (L H)(x/N) -
lap h(x/N)|, sampled on the same lattice the simulator uses.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .generator import SparseGenerator
from .geometry import Membrane
from .lattice import RateField, TorusLattice, slow_set


@dataclass
class TestFunction:
    """H = h + jump * indicator(Lambda) with evaluable h, grad h, lap h."""

    kind: str                                # 'smooth' or 'membrane_jump'
    jump: float
    h: Callable
    h_grad: Callable
    h_laplacian: Callable
    membrane: Membrane | None = None
    eps: float | None = None
    modes: list = field(default_factory=list)

    def grad_sup_per_axis(self):
        """Upper bound of sup_u |dH/du_j| per axis (smooth kind only)."""
        if self.kind != "smooth":
            raise ValueError("gradient supremum is defined for smooth "
                             "test functions only")
        d = len(self.modes[0][1])
        sup = np.zeros(d)
        for _, kvec, coef in self.modes:
            sup += np.abs(coef) * 2.0 * np.pi * np.abs(np.asarray(kvec))
        return sup


# -- smooth catalogue: trigonometric polynomials ---------------------------


def make_smooth(modes) -> TestFunction:
    """Trigonometric polynomial h = sum_m c_m trig(2 pi k_m . u).

    ``modes`` is a list of (kind, wavevector, coefficient) with kind 'cos'
    or 'sin' and integer wavevectors; h, grad h and lap h are closed form.
    The jump is zero, so H = h.
    """
    if not modes:
        raise ValueError("at least one mode is required")
    parsed = []
    for kind, kvec, coef in modes:
        if kind not in ("cos", "sin"):
            raise ValueError(f"unknown mode kind {kind!r}")
        parsed.append((kind, np.asarray(kvec, dtype=float), float(coef)))

    def h(u):
        u = np.asarray(u, dtype=float)
        out = np.zeros(u.shape[:-1])
        for kind, kvec, coef in parsed:
            phase = 2.0 * np.pi * (u @ kvec)
            out = out + coef * (np.cos(phase) if kind == "cos" else np.sin(phase))
        return out

    def h_grad(u):
        u = np.asarray(u, dtype=float)
        out = np.zeros(u.shape)
        for kind, kvec, coef in parsed:
            phase = 2.0 * np.pi * (u @ kvec)
            if kind == "cos":
                deriv = -np.sin(phase)
            else:
                deriv = np.cos(phase)
            out = out + coef * 2.0 * np.pi * deriv[..., None] * kvec
        return out

    def h_laplacian(u):
        u = np.asarray(u, dtype=float)
        out = np.zeros(u.shape[:-1])
        for kind, kvec, coef in parsed:
            phase = 2.0 * np.pi * (u @ kvec)
            val = np.cos(phase) if kind == "cos" else np.sin(phase)
            out = out - coef * (2.0 * np.pi) ** 2 * float(kvec @ kvec) * val
        return out

    return TestFunction(kind="smooth", jump=0.0, h=h, h_grad=h_grad,
                        h_laplacian=h_laplacian, modes=parsed)


# -- membrane-jump construction --------------------------------------------


def _bump(s, eps):
    """C^2 cutoff of the distance: 1 on |s| <= eps/2, 0 on |s| >= eps,
    quintic smoothstep in between.  Returns (bump, d/ds, d2/ds2)."""
    s = np.asarray(s, dtype=float)
    beta = 0.5 * eps
    a = np.abs(s)
    t = np.clip((a - beta) / beta, 0.0, 1.0)
    S = t**3 * (10.0 - 15.0 * t + 6.0 * t**2)
    dS = 30.0 * t**2 * (1.0 - t) ** 2
    d2S = 60.0 * t - 180.0 * t**2 + 120.0 * t**3
    inner = a <= beta
    outer = a >= 2.0 * beta
    ramp = ~inner & ~outer
    val = np.where(inner, 1.0, np.where(outer, 0.0, 1.0 - S))
    sgn = np.sign(s)
    d1 = np.where(ramp, -dS / beta * sgn, 0.0)
    d2 = np.where(ramp, -d2S / beta**2, 0.0)
    return val, d1, d2


def _psi(s, jump, eps):
    """psi(s) = -jump * s * bump(s) and its first two s-derivatives."""
    s = np.asarray(s, dtype=float)
    b, db, d2b = _bump(s, eps)
    val = -jump * s * b
    d1 = -jump * (b + s * db)
    d2 = -jump * (2.0 * db + s * d2b)
    return val, d1, d2


def make_membrane_function(membrane: Membrane, jump, eps=None) -> TestFunction:
    """Membrane-jump test function for a given membrane.

    ``eps`` is the full half-width of the band where the smooth part lives;
    it must not exceed the membrane's band_width.  The zero-jump case
    degenerates to H identically 0.
    """
    if eps is None:
        eps = membrane.band_width
    if eps <= 0 or eps > membrane.band_width:
        raise ValueError("eps must lie in (0, band_width]")
    jump = float(jump)

    def h(u):
        u = np.asarray(u, dtype=float)
        s = membrane.signed_distance(u)
        return _psi(s, jump, eps)[0]

    def h_grad(u):
        u = np.asarray(u, dtype=float)
        single = u.ndim == 1
        pts = u[None, :] if single else u
        s = np.atleast_1d(membrane.signed_distance(pts))
        out = np.zeros(pts.shape)
        _, d1, _ = _psi(s, jump, eps)
        live = np.abs(s) < eps
        if np.any(live):
            grads = membrane.distance_gradient(pts[live])
            out[live] = d1[live, None] * np.atleast_2d(grads)
        return out[0] if single else out

    def h_laplacian(u):
        u = np.asarray(u, dtype=float)
        single = u.ndim == 1
        pts = u[None, :] if single else u
        s = np.atleast_1d(membrane.signed_distance(pts))
        _, d1, d2 = _psi(s, jump, eps)
        out = np.where(np.abs(s) < eps, d2, 0.0)
        live = np.abs(s) < eps
        if np.any(live):
            laps = np.atleast_1d(membrane.distance_laplacian(pts[live]))
            out[live] += d1[live] * laps
        return out[0] if single else out

    return TestFunction(kind="membrane_jump", jump=jump, h=h, h_grad=h_grad,
                        h_laplacian=h_laplacian, membrane=membrane, eps=eps)


# -- evaluation -------------------------------------------------------------


def eval_H(tf: TestFunction, u):
    """H(u) = h(u) + jump where u classifies inside, h(u) outside."""
    u = np.asarray(u, dtype=float)
    out = np.asarray(tf.h(u), dtype=float)
    if tf.jump != 0.0 and tf.membrane is not None:
        out = out + tf.jump * np.asarray(tf.membrane.inside(u), dtype=float)
    return out if out.ndim else float(out)


def eval_LLambda(tf: TestFunction, u):
    """Action of the limiting operator: the Laplacian of the smooth part."""
    out = np.asarray(tf.h_laplacian(np.asarray(u, dtype=float)), dtype=float)
    return out if out.ndim else float(out)


def sample_H(tf: TestFunction, lattice: TorusLattice):
    """H evaluated at all lattice points x/N (classification at lattice
    points mirrors the rate field's side assignment)."""
    return np.asarray(eval_H(tf, lattice.points()), dtype=float)


def sample_LLambda(tf: TestFunction, lattice: TorusLattice):
    return np.asarray(eval_LLambda(tf, lattice.points()), dtype=float)


# -- generator-convergence residuals ----------------------------------------


def generator_residual(tf: TestFunction, gen: SparseGenerator) -> float:
    """Mean absolute gap between the rescaled lattice generator and the
    limiting operator on H, over all lattice sites."""
    lat = gen.lattice
    H = sample_H(tf, lat)
    lhs = lat.N ** 2 * gen.apply(H)
    rhs = sample_LLambda(tf, lat)
    return float(np.mean(np.abs(lhs - rhs)))


def residual_profile(tf: TestFunction, gen: SparseGenerator,
                     rates: RateField):
    """Residual split by slow-set membership.

    Returns (total, off_max, on_max): the lattice-mean residual, and the
    maximum per-site residual off and on the slow set.
    """
    lat = gen.lattice
    H = sample_H(tf, lat)
    per_site = np.abs(lat.N ** 2 * gen.apply(H) - sample_LLambda(tf, lat))
    gamma = slow_set(rates)
    mask = np.zeros(lat.n_sites, dtype=bool)
    mask[gamma] = True
    total = float(np.mean(per_site))
    off_max = float(per_site[~mask].max()) if np.any(~mask) else 0.0
    on_max = float(per_site[mask].max()) if np.any(mask) else 0.0
    return total, off_max, on_max


def boundary_term_max(tf: TestFunction, rates: RateField) -> float:
    """Diagnostic for the slow-set part of the convergence argument.

    For each slow-set site x, sums over axes j the magnitude of

        N xi_{x,x+e_j} (H(x+e_j) - H(x)) + N xi_{x,x-e_j} (H(x-e_j) - H(x)),

    which under the gradient boundary condition tends to zero; returns the
    maximum over the slow set.
    """
    lat = rates.lattice
    H = sample_H(tf, lat)
    gamma = slow_set(rates)
    if gamma.size == 0:
        return 0.0
    worst = 0.0
    for x in gamma:
        acc = 0.0
        for j in range(lat.dim):
            xp = lat.neighbor_plus[j][x]
            xm = lat.neighbor_minus[j][x]
            term = (lat.N * rates.rate(x, j, +1) * (H[xp] - H[x])
                    + lat.N * rates.rate(x, j, -1) * (H[xm] - H[x]))
            acc += abs(term)
        worst = max(worst, acc)
    return float(worst)
