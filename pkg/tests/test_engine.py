"""Event-driven simulation: laws, conservation, martingales, reproducibility."""

import numpy as np
import pytest

import memsep as ms


@pytest.fixture(scope="module")
def chain_16():
    lat = ms.TorusLattice(1, 16)
    rf = ms.build_rate_field(lat, ms.interval(0.25, 0.75))
    return lat, rf


def test_sample_initial_extremes():
    lat = ms.TorusLattice(2, 8)
    full = ms.sample_initial(ms.ConstantProfile(1.0), lat, 0)
    empty = ms.sample_initial(ms.ConstantProfile(0.0), lat, 0)
    assert full.particle_count == lat.n_sites
    assert empty.particle_count == 0


def test_sample_initial_binomial_tail():
    # gamma = 1/2 on 1024 sites: count within 4 sigma of 512 in >= 99%
    lat = ms.TorusLattice(1, 1024)
    gamma = ms.ConstantProfile(0.5)
    sigma4 = 4 * np.sqrt(1024 * 0.25)
    hits = sum(
        abs(ms.sample_initial(gamma, lat, seed).particle_count - 512) <= sigma4
        for seed in range(1000))
    assert hits >= 990


def test_sample_initial_rejects_bad_profile():
    lat = ms.TorusLattice(1, 8)
    with pytest.raises(ValueError):
        ms.sample_initial(lambda u: np.full(u.shape[:-1], 1.5), lat, 0)


def test_pair_examples(chain_16):
    lat, _ = chain_16
    eta = np.zeros(lat.n_sites, dtype=np.uint8)
    eta[:4] = 1
    cfg = ms.Configuration.from_eta(eta)
    assert ms.pair(cfg, np.ones(lat.n_sites)) == pytest.approx(4 / 16)
    empty = ms.Configuration.from_eta(np.zeros(lat.n_sites, dtype=np.uint8))
    H = np.cos(2 * np.pi * lat.points()[:, 0])
    assert ms.pair(empty, H) == 0.0
    ones = ms.Configuration.from_eta(np.ones(lat.n_sites, dtype=np.uint8))
    assert ms.pair(ones, H) == pytest.approx(H.mean())


def test_pair_dimension_mismatch(chain_16):
    lat, _ = chain_16
    cfg = ms.Configuration.from_eta(np.zeros(lat.n_sites, dtype=np.uint8))
    with pytest.raises(ValueError):
        ms.pair(cfg, np.ones(lat.n_sites + 1))


def test_particle_conservation(chain_16):
    lat, rf = chain_16
    cfg = ms.sample_initial(ms.ConstantProfile(0.4), lat, 7)
    res = ms.run(cfg, rf, 2.0, 11)
    assert res.config.particle_count == cfg.particle_count
    assert res.config.eta.sum() == res.config.particle_count


def test_full_lattice_is_fixed_point(chain_16):
    lat, rf = chain_16
    cfg = ms.sample_initial(ms.ConstantProfile(1.0), lat, 0)
    H = np.cos(2 * np.pi * lat.points()[:, 0])
    res = ms.run(cfg, rf, 0.5, 3, observables={"H": H},
                 sample_times=np.linspace(0, 0.5, 6))
    assert np.all(res.config.eta == 1)
    vals = res.series.pairings["H"]
    assert np.max(np.abs(vals - vals[0])) == 0.0


def test_determinism_bit_identical(chain_16):
    lat, rf = chain_16
    gamma = ms.StepProfile(0, 0.5, 1.0, 0.0)
    H = np.cos(2 * np.pi * lat.points()[:, 0])

    def one():
        rng = ms.ReplicaPlan(1, 77).generator(0)
        cfg = ms.sample_initial(gamma, lat, rng)
        return ms.run(cfg, rf, 0.3, rng, observables={"H": H},
                      sample_times=np.linspace(0, 0.3, 7))

    a, b = one(), one()
    assert np.array_equal(a.series.pairings["H"], b.series.pairings["H"])
    assert np.array_equal(a.config.eta, b.config.eta)


def test_replica_streams_distinct():
    plan = ms.ReplicaPlan(8, 123)
    draws = {int(plan.generator(i).integers(0, 2**63)) for i in range(8)}
    assert len(draws) == 8


def test_single_particle_matches_semigroup():
    # site expectation of one walker against the exact semigroup
    lat = ms.TorusLattice(1, 8)
    rf = ms.homogeneous_rates(lat)
    gen = ms.assemble(rf)
    e0 = np.zeros(lat.n_sites)
    e0[0] = 1.0
    T, R = 0.1, 6000
    acc = np.zeros(lat.n_sites, dtype=np.int64)
    plan = ms.ReplicaPlan(R, 314)
    cfg0 = ms.Configuration.from_eta(e0.astype(np.uint8))
    for i in range(R):
        acc += ms.run(cfg0, rf, T, plan.generator(i)).config.eta
    mean = acc / R
    se = np.sqrt(np.maximum(mean * (1 - mean), 1e-12) / (R - 1))
    expected = ms.evolve_density(gen, e0, T)
    assert np.all(np.abs(mean - expected) <= 4 * se)


def test_mc_density_t0_matches_profile(chain_16):
    lat, rf = chain_16
    gamma = ms.CosineProfile(0, 0.5, 0.3)
    mean, se = ms.mc_density(gamma, lat, rf, 0.0, ms.ReplicaPlan(500, 9))
    assert np.all(np.abs(mean - gamma(lat.points()))
                  <= 4 * np.maximum(se, 1e-12))


def test_mc_density_stationarity(chain_16):
    # Bernoulli product measures are invariant
    lat, rf = chain_16
    alpha = 0.5
    mean, se = ms.mc_density(ms.ConstantProfile(alpha), lat, rf, 0.2,
                             ms.ReplicaPlan(2000, 15))
    pooled = mean.mean()
    pooled_se = np.sqrt(alpha * (1 - alpha) / (2000 * lat.n_sites))
    assert abs(pooled - alpha) <= 3 * pooled_se


def test_mc_density_step_profile_matches_semigroup():
    lat = ms.TorusLattice(1, 8)
    rf = ms.build_rate_field(lat, ms.interval(0.25, 0.75))
    gen = ms.assemble(rf)
    gamma = ms.StepProfile(0, 0.5, 1.0, 0.0)
    mean, se = ms.mc_density(gamma, lat, rf, 0.05, ms.ReplicaPlan(3000, 21))
    expected = ms.evolve_density(gen, gamma(lat.points()), 0.05)
    assert np.all(np.abs(mean - expected) <= 4 * np.maximum(se, 1e-12))


def test_mc_density_requires_replicas(chain_16):
    lat, rf = chain_16
    with pytest.raises(ValueError):
        ms.mc_density(ms.ConstantProfile(0.5), lat, rf, 0.1,
                      ms.ReplicaPlan(10, 0))


def test_threaded_reduction_deterministic(chain_16):
    lat, rf = chain_16
    gamma = ms.ConstantProfile(0.5)
    plan = ms.ReplicaPlan(120, 33)
    serial = ms.mc_density(gamma, lat, rf, 0.05, plan, threads=1)
    threaded = ms.mc_density(gamma, lat, rf, 0.05, plan, threads=4)
    assert np.array_equal(serial[0], threaded[0])


def test_martingale_mean_zero(chain_16):
    lat, rf = chain_16
    gen = ms.assemble(rf)
    H = np.cos(2 * np.pi * lat.points()[:, 0])
    M = ms.mc_martingale(ms.ConstantProfile(0.5), lat, rf, gen, H, 0.1,
                         ms.ReplicaPlan(1500, 55))
    se = M.std(ddof=1) / np.sqrt(M.size)
    assert abs(M.mean()) <= 4 * se


def test_martingale_is_pairing_increment_minus_compensator(chain_16):
    lat, rf = chain_16
    gen = ms.assemble(rf)
    H = np.cos(2 * np.pi * lat.points()[:, 0])
    rng = ms.ReplicaPlan(1, 5).generator(0)
    cfg = ms.sample_initial(ms.ConstantProfile(0.5), lat, rng)
    res = ms.run(cfg, rf, 0.2, rng, observables={"H": H},
                 sample_times=[0.0, 0.2], generator=gen,
                 track_martingale=True)
    m = res.series.martingales["H"]
    assert m[0] == 0.0
    assert abs(m[1]) <= 2 * np.max(np.abs(H))  # crude boundedness


def test_qv_constant_field_zero(chain_16):
    lat, rf = chain_16
    rng = ms.ReplicaPlan(1, 66).generator(0)
    cfg = ms.sample_initial(ms.ConstantProfile(0.5), lat, rng)
    res = ms.run(cfg, rf, 0.1, rng, log_events=True)
    assert ms.qv_estimate(res.events, np.ones(lat.n_sites), rf, 0.1) == 0.0


def test_qv_frozen_configuration_zero(chain_16):
    lat, rf = chain_16
    cfg = ms.sample_initial(ms.ConstantProfile(1.0), lat, 0)
    res = ms.run(cfg, rf, 0.1, 8, log_events=True)
    H = np.cos(2 * np.pi * lat.points()[:, 0])
    assert ms.qv_estimate(res.events, H, rf, 0.1) == 0.0


def test_qv_bounded_for_smooth_fields(chain_16):
    lat, rf = chain_16
    tf = ms.make_smooth([("cos", [1], 1.0)])
    H = ms.sample_H(tf, lat)
    T = 0.1
    bound = ms.qv_bound(T, lat, tf.grad_sup_per_axis())
    plan = ms.ReplicaPlan(30, 77)
    for i in range(30):
        rng = plan.generator(i)
        cfg = ms.sample_initial(ms.ConstantProfile(0.5), lat, rng)
        res = ms.run(cfg, rf, T, rng, log_events=True)
        q = ms.qv_estimate(res.events, H, rf, T)
        assert 0.0 <= q <= bound


def test_qv_bound_formula():
    lat = ms.TorusLattice(1, 16)
    assert ms.qv_bound(0.1, lat, [2 * np.pi]) == pytest.approx(
        0.1 * 1 / 16 * (2 * np.pi) ** 2)


def test_event_log_times_sorted(chain_16):
    lat, rf = chain_16
    cfg = ms.sample_initial(ms.ConstantProfile(0.5), lat, 1)
    res = ms.run(cfg, rf, 0.15, 4, log_events=True,
                 sample_times=[0.0, 0.05, 0.15])
    t = res.events.times
    assert t.size > 0
    assert np.all(np.diff(t) >= 0.0)
    assert t[0] >= 0.0 and t[-1] <= 0.15
    assert res.events.bonds.size == t.size


def test_detailed_balance_zero_mean_flux(chain_16):
    # signed particle transfer across one fixed bond, started from the
    # reversible product measure, averages to zero
    lat, rf = chain_16
    bond_id = 7 * lat.dim  # bond (7, 8)
    table_a, table_b = rf.bond_endpoints()
    R = 400
    fluxes = np.empty(R)
    plan = ms.ReplicaPlan(R, 88)
    for i in range(R):
        rng = plan.generator(i)
        cfg = ms.sample_initial(ms.ConstantProfile(0.5), lat, rng)
        res = ms.run(cfg, rf, 0.2, rng, log_events=True)
        eta = cfg.eta.copy()
        flux = 0
        for b in res.events.bonds:
            x, y = table_a[b], table_b[b]
            if b == bond_id:
                flux += int(eta[x]) - int(eta[y])
            eta[x], eta[y] = eta[y], eta[x]
        fluxes[i] = flux
    se = fluxes.std(ddof=1) / np.sqrt(R)
    assert abs(fluxes.mean()) <= 3 * max(se, 1e-12)


def test_variance_scaling_d1():
    gamma = ms.StepProfile(0, 0.5, 1.0, 0.0)
    mem = ms.interval(0.25, 0.75)
    tf = ms.make_smooth([("cos", [1], 1.0)])
    variances = []
    for N in (8, 16, 32):
        lat = ms.TorusLattice(1, N)
        rf = ms.build_rate_field(lat, mem)
        H = ms.sample_H(tf, lat)
        vals = ms.mc_pairings(gamma, lat, rf, 0.05,
                              ms.ReplicaPlan(3000, 2024), {"H": H})["H"]
        variances.append(vals.var(ddof=1))
    assert variances[1] / variances[0] <= 0.5
    assert variances[2] / variances[1] <= 0.5


def test_run_rejects_negative_time(chain_16):
    lat, rf = chain_16
    cfg = ms.sample_initial(ms.ConstantProfile(0.5), lat, 0)
    with pytest.raises(ValueError):
        ms.run(cfg, rf, -1.0, 0)


def test_series_times_strictly_increasing():
    with pytest.raises(ValueError):
        ms.ObservableSeries(times=np.array([0.0, 0.0, 0.1]), pairings={})
