"""Experiment orchestration behind the command-line interface.

Each command builds its scan from an ``ExperimentConfig``, runs the relevant
modules, performs the runtime invariant checks it owns, and writes one or
more ``ResultTable`` CSVs.  Commands are pure functions of (config, seed):
re-running with identical inputs reproduces every CSV byte for byte.  For
that reason the wall-clock timestamp kept in table metadata is not written
into the files; seed and a content-derived build id are.
"""

from __future__ import annotations

import hashlib
import time as _time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .config import ExperimentConfig
from .domain_functions import residual_profile, sample_H, sample_LLambda
from .engine import (ReplicaPlan, mc_pairings, qv_bound, qv_estimate, run,
                     sample_initial)
from .errors import ConfigError, InvariantViolation
from .generator import (DENSE_CUTOFF, assemble, evolve_density,
                        spectral_coefficients, spectrum, spectrum_residuals)
from .io import fmt, write_csv
from .lattice import (TorusLattice, build_rate_field, homogeneous_rates,
                      slow_set, write_rates_csv)


@dataclass
class ResultTable:
    """One experiment output table: rows sorted by the key column, every
    metric finite, provenance metadata attached."""

    kind: str
    columns: list[str]
    rows: list[tuple]
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        keys = [row[0] for row in self.rows]
        if keys != sorted(keys):
            self.rows = sorted(self.rows, key=lambda r: r[0])
        for row in self.rows:
            for v in row:
                if isinstance(v, float) and not np.isfinite(v):
                    raise InvariantViolation(
                        f"non-finite metric in {self.kind} table: {row}")

    def write(self, path):
        comments = [f"memsep {self.metadata.get('version', __version__)} "
                    f"experiment={self.kind}",
                    f"seed={self.metadata.get('seed')} "
                    f"build_id={self.metadata.get('build_id')}"]
        write_csv(path, self.columns, self.rows, comments=comments)


def _build_id(config: ExperimentConfig, seed) -> str:
    blob = f"{config.text}\x00{seed}\x00{__version__}".encode()
    return hashlib.sha1(blob).hexdigest()


def _metadata(config, seed):
    return {"seed": int(seed), "build_id": _build_id(config, seed),
            "version": __version__, "timestamp": _time.time()}


def _rates_for(config: ExperimentConfig, membrane, N):
    lat = TorusLattice(config.dimension, N)
    if membrane is None:
        return lat, homogeneous_rates(lat)
    return lat, build_rate_field(lat, membrane)


# -- commands -----------------------------------------------------------------


def cmd_rates(config, seed, outdir, threads=1):
    """Build the rate field per lattice size, verify the rate-rule
    invariants, and optionally dump every bond."""
    membrane = config.membrane()
    meta = _metadata(config, seed)
    rows = []
    ok = True
    notes = []
    for N in config.sizes:
        lat, rf = _rates_for(config, membrane, N)
        flat = rf.bond_rates()
        if flat.min() <= 0.0 or flat.max() > 1.0:
            ok = False
            notes.append(f"N={N}: rate outside (0, 1]")
        for bond in rf.slow_bonds:
            expect = abs(float(bond.crossing.normal[bond.axis])) / N
            if abs(rf.rates[bond.site, bond.axis] - expect) > 1e-12:
                ok = False
                notes.append(f"N={N}: slow-bond rate mismatch at "
                             f"{bond.site}/axis{bond.axis}")
            back = rf.rate(lat.neighbor_plus[bond.axis][bond.site],
                           bond.axis, -1)
            if back != rf.rates[bond.site, bond.axis]:
                ok = False
                notes.append(f"N={N}: directed reads disagree")
        rows.append((N, flat.size, len(rf.slow_bonds),
                     int(slow_set(rf).size),
                     float(flat.min()), float(flat.max())))
        if config.dump_rates:
            write_rates_csv(Path(outdir) / f"rate_field_N{N}.csv", rf,
                            header_comment=f"seed={seed} "
                                           f"build_id={meta['build_id']}")
    table = ResultTable(
        "rates", ["N", "n_bonds", "n_slow_bonds", "slow_set_size",
                  "min_rate", "max_rate"], rows, meta)
    table.write(Path(outdir) / "rates_summary.csv")
    return ok, notes, {"rates_summary": table}


def cmd_spectrum(config, seed, outdir, threads=1):
    """Eigenvalue tables per lattice size; a nonzero ground eigenvalue or a
    negative eigenvalue is an invariant failure."""
    membrane = config.membrane()
    meta = _metadata(config, seed)
    rows = []
    ok = True
    notes = []
    for N in config.sizes:
        lat, rf = _rates_for(config, membrane, N)
        if lat.n_sites > DENSE_CUTOFF and config.spectrum_count == 0:
            raise ConfigError(
                f"full spectrum needs N^d <= {DENSE_CUTOFF}; "
                f"set run.spectrum_count for N={N}")
        gen = assemble(rf)
        k = config.spectrum_count or lat.n_sites
        spec = spectrum(gen, k)
        if abs(spec.eigenvalues[0]) > 1e-10:
            ok = False
            notes.append(f"N={N}: mu_0 = {spec.eigenvalues[0]:.3e} != 0")
        if spec.eigenvalues.min() < -1e-10:
            ok = False
            notes.append(f"N={N}: negative eigenvalue "
                         f"{spec.eigenvalues.min():.3e}")
        if spectrum_residuals(gen, spec).max() > 1e-8:
            ok = False
            notes.append(f"N={N}: eigenpair residual above 1e-8")
        rows.extend((N, n, float(mu)) for n, mu in enumerate(spec.eigenvalues))
    table = ResultTable("spectrum", ["N", "n", "eigenvalue"], rows, meta)
    table.write(Path(outdir) / "spectrum.csv")
    return ok, notes, {"spectrum": table}


def cmd_generator_convergence(config, seed, outdir, threads=1):
    """Residual of the rescaled generator against the limiting operator,
    per lattice size, split off/on the slow set."""
    membrane = config.membrane()
    tf = config.test_function(membrane)
    meta = _metadata(config, seed)
    rows = []
    for N in config.sizes:
        lat, rf = _rates_for(config, membrane, N)
        gen = assemble(rf)
        total, off_max, on_max = residual_profile(tf, gen, rf)
        rows.append((N, total, off_max, on_max))
    table = ResultTable(
        "generator-convergence",
        ["N", "residual_total", "residual_offgamma_max",
         "residual_ongamma_max"], rows, meta)
    table.write(Path(outdir) / "generator_convergence.csv")
    return True, [], {"generator_convergence": table}


def cmd_hydro(config, seed, outdir, threads=1):
    """Monte Carlo pairing at time T versus the exact semigroup pairing,
    per lattice size; the gap must stay within four standard errors."""
    if config.replicas < 2:
        raise ConfigError("hydro requires run.replicas >= 2")
    membrane = config.membrane()
    gamma = config.profile()
    tf = config.test_function(membrane)
    meta = _metadata(config, seed)
    rows = []
    ok = True
    notes = []
    for N in config.sizes:
        lat, rf = _rates_for(config, membrane, N)
        H = sample_H(tf, lat)
        plan = ReplicaPlan(config.replicas, seed)
        vals = mc_pairings(gamma, lat, rf, config.time, plan,
                           {"H": H}, threads=threads)["H"]
        gen = assemble(rf)
        eT = evolve_density(gen, gamma(lat.points()), config.time)
        semigroup = float(H @ eT) / lat.n_sites
        mean = float(vals.mean())
        sd = float(vals.std(ddof=1))
        se = sd / np.sqrt(config.replicas)
        gap = abs(mean - semigroup)
        if gap > 4.0 * se:
            ok = False
            notes.append(f"N={N}: |mean - semigroup| = {gap:.3e} "
                         f"exceeds 4 SE = {4*se:.3e}")
        rows.append((N, config.replicas, mean, semigroup, gap, sd, se))
    table = ResultTable(
        "hydro", ["N", "replicas", "mean_pairing", "semigroup_pairing",
                  "abs_gap", "replica_sd", "standard_error"], rows, meta)
    table.write(Path(outdir) / "hydro.csv")
    return ok, notes, {"hydro": table}


def cmd_qv(config, seed, outdir, threads=1):
    """Per-trajectory quadratic-variation estimates against the analytic
    bound; any estimate above the bound is an invariant failure."""
    if config.trajectories < 1:
        raise ConfigError("qv requires run.trajectories >= 1")
    tf = config.test_function(config.membrane())
    if tf.kind != "smooth":
        raise ConfigError("the qv bound applies to smooth test functions")
    membrane = config.membrane()
    gamma = config.profile()
    sup = tf.grad_sup_per_axis()
    meta = _metadata(config, seed)
    rows = []
    ok = True
    notes = []
    for N in config.sizes:
        lat, rf = _rates_for(config, membrane, N)
        H = sample_H(tf, lat)
        bound = qv_bound(config.time, lat, sup)
        plan = ReplicaPlan(config.trajectories, seed)
        for i in range(config.trajectories):
            rng = plan.generator(i)
            cfg0 = sample_initial(gamma, lat, rng)
            res = run(cfg0, rf, config.time, rng, log_events=True)
            estimate = qv_estimate(res.events, H, rf, config.time)
            if estimate > bound:
                ok = False
                notes.append(f"N={N} trajectory {i}: QV {estimate:.3e} "
                             f"exceeds bound {bound:.3e}")
            rows.append((N, i, estimate, bound))
    table = ResultTable("qv", ["N", "trajectory", "qv_estimate", "bound"],
                        rows, meta)
    table.write(Path(outdir) / "qv.csv")
    return ok, notes, {"qv": table}


def cmd_uniqueness(config, seed, outdir, threads=1):
    """Deterministic solver cross-check on the first lattice size.

    Evolves the configured profile by the two independent methods
    (eigen-expansion and Crank-Nicolson) over a time grid and reports the
    max-norm gap; evolves the zero field, whose norm must stay zero; and
    reports the weighted spectral series

        R(t) = sum_{n>=1} <rho_t, F_n>^2 / (n^2 (1 + mu_n)),

    which must be non-increasing.
    """
    membrane = config.membrane()
    gamma = config.profile()
    N = config.sizes[0]
    lat, rf = _rates_for(config, membrane, N)
    if lat.n_sites > DENSE_CUTOFF:
        raise ConfigError("uniqueness needs the full spectrum "
                          f"(N^d <= {DENSE_CUTOFF})")
    gen = assemble(rf)
    spec = spectrum(gen)
    e0 = gamma(lat.points())
    grid = np.linspace(0.0, config.time, config.grid_points)
    meta = _metadata(config, seed)
    rows = []
    ok = True
    notes = []
    zero = np.zeros(lat.n_sites)
    zero_cn = zero.copy()
    e_cn = e0.copy()
    r_prev = None
    scale2 = lat.N ** 2
    weights = 1.0 / (np.arange(1, lat.n_sites, dtype=float) ** 2
                     * (1.0 + spec.eigenvalues[1:]))
    for g, t in enumerate(grid):
        if g > 0:
            dt = grid[g] - grid[g - 1]
            e_cn = evolve_density(gen, e_cn, dt, method="crank_nicolson")
            zero_cn = evolve_density(gen, zero_cn, dt, method="crank_nicolson")
        e_eig = evolve_density(gen, e0, t, method="eigen")
        gap = float(np.max(np.abs(e_eig - e_cn)))
        znorm = float(np.max(np.abs(zero_cn)))
        coeffs = spectral_coefficients(spec, e_eig)
        r_val = float(np.sum(weights * coeffs[1:] ** 2))
        if znorm > 1e-12:
            ok = False
            notes.append(f"t={t}: zero field grew to {znorm:.3e}")
        if r_prev is not None and r_val > r_prev * (1.0 + 1e-12) + 1e-300:
            ok = False
            notes.append(f"t={t}: R(t) increased")
        r_prev = r_val
        rows.append((float(t), gap, znorm, r_val))
    table = ResultTable(
        "uniqueness", ["time", "method_gap_maxnorm", "zero_field_maxnorm",
                       "r_series"], rows, meta)
    table.write(Path(outdir) / "uniqueness.csv")
    return ok, notes, {"uniqueness": table}


COMMAND_TABLE = {
    "rates": cmd_rates,
    "spectrum": cmd_spectrum,
    "generator-convergence": cmd_generator_convergence,
    "hydro": cmd_hydro,
    "qv": cmd_qv,
    "uniqueness": cmd_uniqueness,
}
