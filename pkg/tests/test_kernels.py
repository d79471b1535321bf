"""Compiled-kernel checks.

The random streams are verified against a pure-Python reference written from
the published xoshiro256++/splitmix64 recipes (explicit 64-bit masking here,
native wrap-around in the kernels), the RK4 drifts against scipy integration
and closed-form harmonic motion, and the ensemble kernel for block-wise
deterministic accumulation.
"""
import numpy as np
import pytest
from scipy.integrate import solve_ivp

from ahdyn._kernels import (
    BLOCK,
    N_CHANNELS,
    N_CONSTS,
    draw_normals,
    draw_uniforms,
    drift_langevin,
    drift_mean_field,
    drift_surface,
    run_trajectories,
    stream_init,
)

MASK = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15

# standard parameter set: omega=0.003, g=0.02, E_d=g^2/(2 hbar omega), kT=0.05,
# Gamma=0.01, single lead at mu=0 — laid out per the documented constant vector
DHDX = 0.02 * np.sqrt(2.0 * 0.003)
E_D = 0.02**2 / (2.0 * 0.003)


def make_consts(gamma=0.01, kT=0.05, slope=DHDX, e_d=E_D, mass=1.0, omega=0.003,
                wl=1.0, mul=0.0, wr=0.0, mur=0.0, gamma_l=None):
    if gamma_l is None:
        gamma_l = wl * gamma
    c = np.zeros(N_CONSTS)
    c[0] = mass
    c[1] = mass * omega**2
    c[2] = slope
    c[3] = e_d
    c[4] = 1.0
    c[5] = gamma
    c[6] = kT
    c[7] = wl
    c[8] = mul
    c[9] = wr
    c[10] = mur
    c[11] = gamma_l
    c[12] = gamma
    c[13] = slope**2 / (gamma * kT)
    c[14] = slope**2 / gamma
    return c


DUMMY_GRID = np.array([-1.0, 1.0])
DUMMY_VALS = np.array([0.0, 0.0])


# --- pure-Python reference streams -----------------------------------------

def mix64(z):
    z &= MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK
    return (z ^ (z >> 31)) & MASK


def ref_stream_init(seed, index):
    base = mix64((seed & MASK) ^ (((index + 1) * GOLDEN) & MASK))
    words = [mix64((base + k * GOLDEN) & MASK) for k in (1, 2, 3, 4)]
    if not any(words):
        words[0] = 1
    return words


def rotl(x, k):
    return ((x << k) | (x >> (64 - k))) & MASK


def ref_next(s):
    out = (rotl((s[0] + s[3]) & MASK, 23) + s[0]) & MASK
    t = (s[1] << 17) & MASK
    s[2] ^= s[0]
    s[3] ^= s[1]
    s[1] ^= s[2]
    s[0] ^= s[3]
    s[2] ^= t
    s[3] = rotl(s[3], 45)
    return out


def ref_uniforms(seed, index, n):
    s = ref_stream_init(seed, index)
    return np.array([(ref_next(s) >> 11) * 2.0**-53 for _ in range(n)])


def ref_normals(seed, index, n):
    s = ref_stream_init(seed, index)
    out = np.empty(n)
    for i in range(n):
        u1 = (ref_next(s) >> 11) * 2.0**-53
        u2 = (ref_next(s) >> 11) * 2.0**-53
        out[i] = np.sqrt(-2.0 * np.log(1.0 - u1)) * np.cos(2.0 * np.pi * u2)
    return out


class TestStreams:
    @pytest.mark.parametrize("seed,index", [(0, 0), (1, 0), (1, 1), (2024, 77), (2**63, 10**6)])
    def test_state_words_match_reference(self, seed, index):
        got = stream_init(np.uint64(seed), np.uint64(index))
        assert [int(w) for w in got] == ref_stream_init(seed, index)

    def test_uniforms_match_reference_exactly(self):
        for seed, index in [(1, 0), (42, 3), (987654321, 500)]:
            assert np.array_equal(draw_uniforms(seed, index, 1000), ref_uniforms(seed, index, 1000))

    def test_normals_match_reference(self):
        got = draw_normals(7, 5, 1000)
        ref = ref_normals(7, 5, 1000)
        assert np.allclose(got, ref, rtol=0, atol=1e-12)

    def test_uniform_statistics(self):
        u = draw_uniforms(123, 0, 200_000)
        assert np.all((u >= 0.0) & (u < 1.0))
        assert abs(u.mean() - 0.5) < 4.0 / np.sqrt(12 * u.size)
        assert abs(u.var() - 1.0 / 12.0) < 0.01 / 12.0

    def test_normal_statistics(self):
        z = draw_normals(123, 0, 200_000)
        assert abs(z.mean()) < 4.0 / np.sqrt(z.size)
        assert abs(z.var() - 1.0) < 0.015
        # fourth moment pins the distribution beyond its variance
        assert abs((z**4).mean() - 3.0) < 0.1

    def test_streams_are_uncorrelated(self):
        a = draw_normals(55, 0, 100_000)
        b = draw_normals(55, 1, 100_000)
        assert abs(np.corrcoef(a, b)[0, 1]) < 4.0 / np.sqrt(a.size)

    def test_streams_are_distinct(self):
        seen = {tuple(int(w) for w in stream_init(9, i)) for i in range(1000)}
        assert len(seen) == 1000


class TestDrifts:
    def test_mean_field_matches_scipy(self):
        c = make_consts()

        def rhs(t, y):
            x, p, r = y
            f = 1.0 / (1.0 + np.exp((c[3] + c[2] * x - c[8]) / c[6]))
            return [p / c[0], -(c[1] * x + c[2] * r), c[5] * (f - r)]

        x, p, r = 120.0, 0.3, 0.1
        n, dt = 400, 1.0
        for _ in range(n):
            x, p, r = drift_mean_field(c, x, p, r, dt)
        sol = solve_ivp(rhs, (0.0, n * dt), [120.0, 0.3, 0.1], rtol=1e-12, atol=1e-14)
        assert np.allclose([x, p, r], sol.y[:, -1], rtol=1e-8, atol=1e-10)

    def test_langevin_drift_matches_scipy(self):
        c = make_consts()

        def rhs(t, y):
            x, p = y
            h = c[3] + c[2] * x
            f = 1.0 / (1.0 + np.exp((h - c[8]) / c[6]))
            gam = c[13] * f * (1.0 - f)
            return [p / c[0], -(c[1] * x + c[2] * f) - gam * p / c[0]]

        x, p = -80.0, 0.5
        n, dt = 400, 1.0
        for _ in range(n):
            x, p = drift_langevin(c, x, p, dt)
        sol = solve_ivp(rhs, (0.0, n * dt), [-80.0, 0.5], rtol=1e-12, atol=1e-14)
        assert np.allclose([x, p], sol.y[:, -1], rtol=1e-8, atol=1e-10)

    def test_surface_drift_is_harmonic(self):
        c = make_consts()
        omega = np.sqrt(c[1] / c[0])
        x, p = 100.0, 0.0
        n, dt = 1000, 1.0
        for _ in range(n):
            x, p = drift_surface(c, x, p, 0.0, dt)
        t = n * dt
        assert np.isclose(x, 100.0 * np.cos(omega * t), rtol=0, atol=1e-8)
        assert np.isclose(p, -100.0 * c[0] * omega * np.sin(omega * t), rtol=0, atol=1e-10)

    def test_occupied_surface_shifts_center(self):
        # occupied-surface motion oscillates about x = -dh/dx / (m w^2)
        c = make_consts()
        center = -c[2] / c[1]
        x, p = center, 0.0
        for _ in range(500):
            x, p = drift_surface(c, x, p, 1.0, dt=1.0)
        assert np.isclose(x, center, rtol=0, atol=1e-9)
        assert np.isclose(p, 0.0, rtol=0, atol=1e-12)

def run_sums(method_id, n_traj, n_steps, rec_stride=None, seed=11, c=None,
             x0_std=1.0, p0_std=1.0, rho0=0.0, dt=1.0, update_stride=1):
    if c is None:
        c = make_consts()
    if rec_stride is None:
        rec_stride = max(1, n_steps)
    n_blocks = -(-n_traj // BLOCK)
    n_frames = n_steps // rec_stride + 1
    sums = np.zeros((n_blocks, n_frames, N_CHANNELS))
    flags = np.zeros(n_blocks, dtype=np.int64)
    run_trajectories(method_id, n_traj, n_steps, rec_stride, update_stride,
                     dt, seed, 0.0, x0_std, p0_std, rho0,
                     c, False, DUMMY_GRID, DUMMY_VALS, DUMMY_VALS, sums, flags)
    return sums, flags


class TestEnsembleKernel:
    def test_repeat_runs_are_identical(self):
        a, _ = run_sums(2, 130, 50, rec_stride=10)
        b, _ = run_sums(2, 130, 50, rec_stride=10)
        assert np.array_equal(a, b)

    def test_blocks_are_independent(self):
        big, _ = run_sums(3, 2 * BLOCK, 50, rec_stride=10)
        small, _ = run_sums(3, BLOCK, 50, rec_stride=10)
        assert np.array_equal(big[0], small[0])

    def test_initial_conditions_shared_across_methods(self):
        # frame 0 kinetic-energy sums agree for every method at equal seed
        frames = [run_sums(m, 100, 1, rec_stride=1)[0][:, 0, 0] for m in range(5)]
        for other in frames[1:]:
            assert np.array_equal(frames[0], other)

    def test_initial_frame_statistics(self):
        c = make_consts()
        n = 20_000
        sums, _ = run_sums(0, n, 1, rec_stride=1, p0_std=0.5, x0_std=3.0, seed=4)
        ke = sums[:, 0, 0].sum() / n
        # <p^2>/2m = 0.125 for p ~ N(0, 0.5)
        assert np.isclose(ke, 0.125, rtol=0.02)

    def test_population_channel_tracks_initial_rho(self):
        sums, _ = run_sums(0, 64, 1, rec_stride=1, rho0=0.37)
        assert np.isclose(sums[0, 0, 2], 64 * 0.37, rtol=0, atol=1e-12)

    def test_equilibrium_electronic_start(self):
        # rho0 < 0 initializes rho at the instantaneous equilibrium f(h(x0))
        from ahdyn.model import BathSpec, ModelParams, fermi_effective, level

        n = 64
        sums, _ = run_sums(0, n, 1, rec_stride=1, rho0=-1.0, x0_std=200.0, seed=3)
        x0 = np.array([200.0 * draw_normals(3, i, 1)[0] for i in range(n)])
        params = ModelParams(omega=0.003, g=0.02, e_d=E_D)
        bath = BathSpec.single(0.01, 0.05)
        expected = fermi_effective(bath, level(params, x0)).sum()
        assert np.isclose(sums[0, 0, 2], expected, rtol=0, atol=1e-12)

    def test_surface_initialization_fraction(self):
        sums, _ = run_sums(4, 50_000, 1, rec_stride=1, rho0=0.25, seed=8)
        frac = sums[:, 0, 2].sum() / 50_000
        assert abs(frac - 0.25) < 4 * np.sqrt(0.25 * 0.75 / 50_000)

    def test_divergent_trajectory_is_flagged(self):
        # an absurd timestep blows up the explicit integrator immediately
        _, flags = run_sums(0, 10, 120, rec_stride=120, dt=1e155, x0_std=1.0)
        assert flags[0] == 1

    def test_quiet_run_raises_no_flags(self):
        _, flags = run_sums(1, 70, 100, rec_stride=100)
        assert np.all(flags == 0)
