"""Event-driven simulation of the exclusion process with slow bonds.

The process is the continuous-time Markov chain whose clocks sit on bonds:
bond (x, y) rings at rate N^2 xi_{x,y} (times are macroscopic, the N^2
diffusive speedup is applied internally) and each ring exchanges the two
endpoint occupancies.  Exchanges of equal occupancies are executed as
identity events, which leaves the law unchanged and lets a single static
alias table over all bonds drive the whole simulation in O(1) per event.

Randomness comes exclusively from counter-based numpy Philox streams keyed
by (base_seed, replica_index), so replicas are independent, reproducible and
safe to run concurrently; results are merged in replica order.

Between two observation times the chain is advanced in bulk: the event count
over a window of length dt is Poisson(R dt) with R the total rate, the event
bonds are independent alias draws, and (when event times are needed) the
times are sorted uniforms over the window.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ._kernels import apply_events, apply_events_timed, replay_quadratic_variation
from .generator import SparseGenerator
from .lattice import RateField, TorusLattice

_CHUNK = 1 << 22
_RESOLVED_EVENT_CAP = 1 << 26


@dataclass
class Configuration:
    """Occupation field: one bit per site, particle count cached."""

    eta: np.ndarray
    particle_count: int

    @classmethod
    def from_eta(cls, eta):
        eta = np.ascontiguousarray(eta, dtype=np.uint8)
        if not np.all((eta == 0) | (eta == 1)):
            raise ValueError("occupancies must be 0 or 1")
        return cls(eta=eta, particle_count=int(eta.sum()))


@dataclass
class ReplicaPlan:
    """Replica count plus a base seed; per-replica streams are spawned from
    the base seed by a splittable counter scheme, so distinct replicas get
    distinct streams and identical base seeds reproduce identical runs."""

    replica_count: int
    base_seed: int

    def seed_for(self, replica_index):
        return np.random.SeedSequence(entropy=self.base_seed,
                                      spawn_key=(replica_index,))

    def generator(self, replica_index):
        return np.random.Generator(np.random.Philox(self.seed_for(replica_index)))


@dataclass
class ObservableSeries:
    """Sampled pairings <pi_t, H> per tracked field, with optional
    martingale values M_t at the same times."""

    times: np.ndarray
    pairings: dict[str, np.ndarray]
    martingales: dict[str, np.ndarray] | None = None

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        if self.times.size > 1 and not np.all(np.diff(self.times) > 0):
            raise ValueError("sample times must be strictly increasing")


@dataclass
class EventLog:
    """Full trajectory record: initial state plus every event."""

    eta_initial: np.ndarray
    times: np.ndarray
    bonds: np.ndarray


@dataclass
class RunResult:
    config: Configuration
    series: ObservableSeries
    events: EventLog | None = None


# -- alias table over bonds --------------------------------------------------


@dataclass
class _BondTable:
    bond_a: np.ndarray
    bond_b: np.ndarray
    xi: np.ndarray
    prob: np.ndarray
    alias: np.ndarray
    total_rate: float      # N^2 * sum of rates, macroscopic-time units
    n_bonds: int


def _build_alias(weights):
    """Vose alias table for the normalized weights."""
    n = weights.size
    scaled = weights * (n / weights.sum())
    prob = np.ones(n)
    alias = np.arange(n, dtype=np.int64)
    small = [i for i in range(n) if scaled[i] < 1.0]
    large = [i for i in range(n) if scaled[i] >= 1.0]
    while small and large:
        l = small.pop()
        g = large.pop()
        prob[l] = scaled[l]
        alias[l] = g
        scaled[g] -= 1.0 - scaled[l]
        (small if scaled[g] < 1.0 else large).append(g)
    return prob, alias


def bond_table(rates: RateField) -> _BondTable:
    """Static sampling table over all bonds (cached on the rate field)."""
    cached = getattr(rates, "_engine_table", None)
    if cached is not None:
        return cached
    a, b = rates.bond_endpoints()
    xi = rates.bond_rates().astype(float)
    prob, alias = _build_alias(xi.copy())
    table = _BondTable(
        bond_a=np.ascontiguousarray(a, dtype=np.int64),
        bond_b=np.ascontiguousarray(b, dtype=np.int64),
        xi=xi,
        prob=np.ascontiguousarray(prob),
        alias=np.ascontiguousarray(alias),
        total_rate=float(rates.lattice.N ** 2 * xi.sum()),
        n_bonds=xi.size)
    rates._engine_table = table
    return table


def _as_generator(seed):
    if isinstance(seed, np.random.Generator):
        return seed
    if isinstance(seed, np.random.SeedSequence):
        return np.random.Generator(np.random.Philox(seed))
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(int(seed))))


# -- initial states -----------------------------------------------------------


def sample_initial(gamma, lattice: TorusLattice, seed) -> Configuration:
    """Independent Bernoulli occupancies with per-site mean gamma(x/N)."""
    p = gamma(lattice.points()) if callable(gamma) else np.asarray(gamma, dtype=float)
    p = np.broadcast_to(np.asarray(p, dtype=float), (lattice.n_sites,))
    if p.min() < 0.0 or p.max() > 1.0:
        raise ValueError("profile values must lie in [0, 1]")
    rng = _as_generator(seed)
    eta = (rng.random(lattice.n_sites) < p).astype(np.uint8)
    return Configuration.from_eta(eta)


def pair(config, H) -> float:
    """Empirical pairing <pi, H> = N^-d sum_x H(x/N) eta(x)."""
    eta = config.eta if isinstance(config, Configuration) else np.asarray(config)
    H = np.asarray(H, dtype=float)
    if H.shape != eta.shape:
        raise ValueError("field and configuration have different shapes")
    return float(H @ eta) / eta.size


# -- trajectory simulation -----------------------------------------------------


def run(config: Configuration, rates: RateField, T, seed,
        observables=None, sample_times=None,
        generator: SparseGenerator | None = None,
        track_martingale=False, log_events=False) -> RunResult:
    """Simulate one trajectory up to macroscopic time T.

    ``observables`` maps names to lattice fields H whose pairings are sampled
    at ``sample_times`` (default: time 0 and T).  With ``track_martingale``
    (requires ``generator``) the series also carries

        M_t = <pi_t,H> - <pi_0,H> - integral_0^t <pi_s, N^2 L H> ds

    computed exactly along the trajectory.  With ``log_events`` the full
    event log is returned for replay-based estimates.
    """
    if T < 0:
        raise ValueError("time horizon must be nonnegative")
    lat = rates.lattice
    table = bond_table(rates)
    rng = _as_generator(seed)
    eta = np.ascontiguousarray(config.eta, dtype=np.uint8).copy()

    obs_names = list(observables.keys()) if observables else []
    obs_fields = []
    for name in obs_names:
        Hf = np.ascontiguousarray(observables[name], dtype=float)
        if Hf.shape != (lat.n_sites,):
            raise ValueError(f"observable {name!r} has wrong shape")
        obs_fields.append(Hf)

    if sample_times is None:
        sample_times = [0.0, T]
    times_req = np.unique(np.asarray(sample_times, dtype=float))
    if times_req.size and (times_req[0] < 0 or times_req[-1] > T):
        raise ValueError("sample times must lie in [0, T]")

    resolved = bool(track_martingale or log_events)
    if track_martingale:
        if generator is None:
            raise ValueError("martingale tracking needs the generator")
        weights = np.ascontiguousarray(
            np.stack([(lat.N ** 2) * generator.apply(Hf) / lat.n_sites
                      for Hf in obs_fields]))
    else:
        weights = np.zeros((0, lat.n_sites))

    grid = np.unique(np.concatenate([[0.0], times_req, [T]]))
    requested = np.isin(grid, times_req)

    p0 = {name: pair(eta, Hf) for name, Hf in zip(obs_names, obs_fields)}
    pair_rows = {name: [] for name in obs_names}
    mart_rows = {name: [] for name in obs_names} if track_martingale else None
    integrals = np.zeros(weights.shape[0])
    log_times, log_bonds = [], []

    def record(idx):
        for name, Hf in zip(obs_names, obs_fields):
            pair_rows[name].append(pair(eta, Hf))
        if track_martingale:
            for i, name in enumerate(obs_names):
                mart_rows[name].append(pair_rows[name][-1] - p0[name]
                                       - integrals[i])

    if requested[0]:
        record(0)
    for g in range(1, grid.size):
        t_lo, t_hi = grid[g - 1], grid[g]
        count = int(rng.poisson(table.total_rate * (t_hi - t_lo)))
        if resolved:
            if count > _RESOLVED_EVENT_CAP:
                raise MemoryError(
                    "time-resolved run would materialize too many events; "
                    "use shorter windows or the bulk path")
            draws = rng.integers(0, 2 ** 64, size=count, dtype=np.uint64)
            ev_times = t_lo + (t_hi - t_lo) * np.sort(rng.random(count))
            bonds_out = np.empty(count, dtype=np.int64)
            apply_events_timed(eta, table.bond_a, table.bond_b, table.prob,
                               table.alias, draws, ev_times, t_lo, t_hi,
                               weights, integrals, bonds_out)
            if log_events:
                log_times.append(ev_times)
                log_bonds.append(bonds_out)
        else:
            remaining = count
            while remaining > 0:
                m = min(remaining, _CHUNK)
                draws = rng.integers(0, 2 ** 64, size=m, dtype=np.uint64)
                apply_events(eta, table.bond_a, table.bond_b, table.prob,
                             table.alias, draws)
                remaining -= m
        if requested[g]:
            record(g)

    series = ObservableSeries(
        times=times_req,
        pairings={k: np.array(v) for k, v in pair_rows.items()},
        martingales=(None if mart_rows is None
                     else {k: np.array(v) for k, v in mart_rows.items()}))
    events = None
    if log_events:
        events = EventLog(
            eta_initial=config.eta.copy(),
            times=(np.concatenate(log_times) if log_times
                   else np.zeros(0)),
            bonds=(np.concatenate(log_bonds) if log_bonds
                   else np.zeros(0, dtype=np.int64)))
    return RunResult(config=Configuration.from_eta(eta), series=series,
                     events=events)


# -- replica ensembles ---------------------------------------------------------


def _replica_map(plan: ReplicaPlan, worker, threads=1):
    """Evaluate ``worker(replica_index, generator)`` for every replica and
    return results ordered by replica index."""
    out = [None] * plan.replica_count

    def call(i):
        out[i] = worker(i, plan.generator(i))

    if threads <= 1:
        for i in range(plan.replica_count):
            call(i)
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(call, range(plan.replica_count)))
    return out


def mc_density(gamma, lattice: TorusLattice, rates: RateField, T,
               plan: ReplicaPlan, threads=1):
    """Per-site mean occupation at time T across replicas, with standard
    errors.  Requires at least 100 replicas."""
    if plan.replica_count < 100:
        raise ValueError("mc_density requires at least 100 replicas")

    def worker(i, rng):
        cfg = sample_initial(gamma, lattice, rng)
        return run(cfg, rates, T, rng).config.eta.astype(np.int64)

    etas = _replica_map(plan, worker, threads)
    acc = np.zeros(lattice.n_sites, dtype=np.int64)
    for e in etas:
        acc += e
    R = plan.replica_count
    mean = acc / R
    se = np.sqrt(mean * (1.0 - mean) / (R - 1))
    return mean, se


def mc_pairings(gamma, lattice: TorusLattice, rates: RateField, T,
                plan: ReplicaPlan, fields: dict, threads=1):
    """Final-time pairings <pi_T, H> per replica, for each named field."""
    names = list(fields.keys())

    def worker(i, rng):
        cfg = sample_initial(gamma, lattice, rng)
        res = run(cfg, rates, T, rng, observables=fields, sample_times=[T])
        return [res.series.pairings[name][-1] for name in names]

    rows = np.array(_replica_map(plan, worker, threads))
    return {name: rows[:, j].copy() for j, name in enumerate(names)}


def mc_martingale(gamma, lattice: TorusLattice, rates: RateField,
                  generator: SparseGenerator, H, T, plan: ReplicaPlan,
                  threads=1):
    """Martingale values M_T across replicas for one tracked field."""

    def worker(i, rng):
        cfg = sample_initial(gamma, lattice, rng)
        res = run(cfg, rates, T, rng, observables={"H": H}, sample_times=[T],
                  generator=generator, track_martingale=True)
        return res.series.martingales["H"][-1]

    return np.array(_replica_map(plan, worker, threads))


# -- quadratic variation --------------------------------------------------------


def qv_estimate(events: EventLog, H, rates: RateField, T) -> float:
    """Predictable quadratic variation of the pairing martingale along a
    logged trajectory:

        integral_0^T N^2 sum_{bonds} xi N^{-2d}
            [(eta_s(x) - eta_s(y)) (H(y/N) - H(x/N))]^2 ds.
    """
    lat = rates.lattice
    table = bond_table(rates)
    H = np.asarray(H, dtype=float)
    dH = H[table.bond_b] - H[table.bond_a]
    w = (lat.N ** 2) * table.xi * dH ** 2 / float(lat.n_sites) ** 2
    # site -> incident bonds, CSR layout
    counts = np.zeros(lat.n_sites, dtype=np.int64)
    np.add.at(counts, table.bond_a, 1)
    np.add.at(counts, table.bond_b, 1)
    inc_ptr = np.zeros(lat.n_sites + 1, dtype=np.int64)
    np.cumsum(counts, out=inc_ptr[1:])
    inc_idx = np.empty(2 * table.n_bonds, dtype=np.int64)
    cursor = inc_ptr[:-1].copy()
    for b in range(table.n_bonds):
        x, y = table.bond_a[b], table.bond_b[b]
        inc_idx[cursor[x]] = b
        cursor[x] += 1
        inc_idx[cursor[y]] = b
        cursor[y] += 1
    eta = np.ascontiguousarray(events.eta_initial, dtype=np.uint8).copy()
    return float(replay_quadratic_variation(
        eta, table.bond_a, table.bond_b, w, inc_ptr, inc_idx,
        np.ascontiguousarray(events.bonds, dtype=np.int64),
        np.ascontiguousarray(events.times, dtype=float), float(T)))


def qv_bound(T, lattice: TorusLattice, grad_sup_per_axis) -> float:
    """Deterministic upper bound (T d / N^d) max_j sup|dH/du_j|^2, valid for
    smooth fields since every rate is at most one."""
    sup = float(np.max(np.asarray(grad_sup_per_axis, dtype=float)))
    return T * lattice.dim / lattice.n_sites * sup ** 2
