"""Compiled trajectory kernels.

Everything here is numba-jitted and deliberately scalar: one trajectory is a
tight loop over RK4 drifts plus method-specific stochastic updates, and the
ensemble kernel runs fixed blocks of 64 trajectories so that per-frame
accumulators are summed in a thread-count-independent order.

Randomness: each trajectory owns a xoshiro256++ stream whose four state words
come from a splitmix64 sequence keyed by (seed, trajectory index).  Normals
use Box-Muller with two fresh uniforms each and no spare caching, so every
draw site consumes a fixed number of stream values — trajectories with the
same (seed, index) see identical initial conditions in every method.

Constant vector layout (float64[15]):
    0 mass          5 lam = Gamma/hbar      10 mu_R
    1 m*omega^2     6 kT                    11 Gamma_L/hbar
    2 dh/dx         7 w_L = Gamma_L/Gamma   12 Gamma
    3 E_d           8 mu_L                  13 hbar*(dh/dx)^2/(Gamma*kT)
    4 hbar          9 w_R (0 if one lead)   14 (hbar/Gamma)*(dh/dx)^2

Method ids: 0 mean-field, 1 friction-Langevin, 2 mean-field + white force,
3 mean-field + colored force, 4 surface hopping.
"""
from __future__ import annotations

import numba as nb
import numpy as np
from numba import njit, prange

N_CONSTS = 15
BLOCK = 64
N_CHANNELS = 6  # ke, ke^2, population, population^2, current, current^2

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)


# ---------------------------------------------------------------------------
# per-trajectory random streams
# ---------------------------------------------------------------------------

@njit(inline="always", cache=True)
def _mix64(z):
    z = np.uint64((z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9))
    z = np.uint64((z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB))
    return np.uint64(z ^ (z >> np.uint64(31)))


@njit(inline="always", cache=True)
def _rotl(x, k):
    return np.uint64((x << k) | (x >> np.uint64(64 - k)))


@njit(cache=True)
def stream_init(seed, index):
    """Four xoshiro256++ state words from a splitmix64 run keyed by (seed, index)."""
    base = _mix64(np.uint64(seed) ^ np.uint64((np.uint64(index) + np.uint64(1)) * _GOLDEN))
    s0 = _mix64(np.uint64(base + _GOLDEN))
    s1 = _mix64(np.uint64(base + np.uint64(2) * _GOLDEN))
    s2 = _mix64(np.uint64(base + np.uint64(3) * _GOLDEN))
    s3 = _mix64(np.uint64(base + np.uint64(4) * _GOLDEN))
    if s0 == np.uint64(0) and s1 == np.uint64(0) and s2 == np.uint64(0) and s3 == np.uint64(0):
        s0 = np.uint64(1)
    return s0, s1, s2, s3


@njit(inline="always", cache=True)
def _next_uint64(s0, s1, s2, s3):
    out = np.uint64(_rotl(np.uint64(s0 + s3), np.uint64(23)) + s0)
    t = np.uint64(s1 << np.uint64(17))
    s2 = np.uint64(s2 ^ s0)
    s3 = np.uint64(s3 ^ s1)
    s1 = np.uint64(s1 ^ s2)
    s0 = np.uint64(s0 ^ s3)
    s2 = np.uint64(s2 ^ t)
    s3 = _rotl(s3, np.uint64(45))
    return s0, s1, s2, s3, out


@njit(inline="always", cache=True)
def _next_uniform(s0, s1, s2, s3):
    s0, s1, s2, s3, z = _next_uint64(s0, s1, s2, s3)
    return s0, s1, s2, s3, (z >> np.uint64(11)) * 2.0**-53


@njit(inline="always", cache=True)
def _next_normal(s0, s1, s2, s3):
    """One standard normal from two uniforms (Box-Muller, cosine branch only)."""
    s0, s1, s2, s3, u1 = _next_uniform(s0, s1, s2, s3)
    s0, s1, s2, s3, u2 = _next_uniform(s0, s1, s2, s3)
    radius = np.sqrt(-2.0 * np.log(1.0 - u1))
    return s0, s1, s2, s3, radius * np.cos(2.0 * np.pi * u2)


@njit(cache=True)
def draw_uniforms(seed, index, n):
    out = np.empty(n)
    s0, s1, s2, s3 = stream_init(seed, index)
    for i in range(n):
        s0, s1, s2, s3, out[i] = _next_uniform(s0, s1, s2, s3)
    return out


@njit(cache=True)
def draw_normals(seed, index, n):
    out = np.empty(n)
    s0, s1, s2, s3 = stream_init(seed, index)
    for i in range(n):
        s0, s1, s2, s3, out[i] = _next_normal(s0, s1, s2, s3)
    return out


# ---------------------------------------------------------------------------
# scalar model pieces
# ---------------------------------------------------------------------------

@njit(inline="always", cache=True)
def _fermi(eps, mu, kT):
    t = (eps - mu) / kT
    if t >= 0.0:
        e = np.exp(-t)
        return e / (1.0 + e)
    return 1.0 / (1.0 + np.exp(t))


@njit(inline="always", cache=True)
def _feff(c, h):
    f = c[7] * _fermi(h, c[8], c[6])
    if c[9] > 0.0:
        f += c[9] * _fermi(h, c[10], c[6])
    return f


@njit(inline="always", cache=True)
def _wf1mf(c, h):
    fl = _fermi(h, c[8], c[6])
    q = c[7] * fl * (1.0 - fl)
    if c[9] > 0.0:
        fr = _fermi(h, c[10], c[6])
        q += c[9] * fr * (1.0 - fr)
    return q


@njit(inline="always", cache=True)
def _feff_and_wf1mf(c, h):
    """(f_eff, sum_l w_l f_l (1-f_l)) with one Fermi evaluation per lead."""
    fl = _fermi(h, c[8], c[6])
    f = c[7] * fl
    q = c[7] * fl * (1.0 - fl)
    if c[9] > 0.0:
        fr = _fermi(h, c[10], c[6])
        f += c[9] * fr
        q += c[9] * fr * (1.0 - fr)
    return f, q


@njit(inline="always", cache=True)
def _amp_analytic(c, x):
    """Analytic (white-noise strength, memory decay rate) at position x."""
    f = _feff(c, c[3] + c[2] * x)
    return c[14] * f * (1.0 - f), c[5]


@njit(inline="always", cache=True)
def _amp_fitted(x, gx, gd, gr):
    return np.interp(x, gx, gd), np.interp(x, gx, gr)


# ---------------------------------------------------------------------------
# single-step RK4 drifts (also the cores behind the public steppers)
# ---------------------------------------------------------------------------

@njit(cache=True)
def drift_mean_field(c, x, p, r, dt):
    """RK4 step of the deterministic mean-field equations.

    dx/dt = p/m,  dp/dt = -m w^2 x - r dh/dx,
    dr/dt = (Gamma/hbar) (f_eff(h(x)) - r).

    Stochastic forces are applied by the caller as a separate additive
    momentum kick after the drift.
    """
    inv_m = 1.0 / c[0]
    k1x = p * inv_m
    k1p = -(c[1] * x + c[2] * r)
    k1r = c[5] * (_feff(c, c[3] + c[2] * x) - r)
    x2 = x + 0.5 * dt * k1x
    p2 = p + 0.5 * dt * k1p
    r2 = r + 0.5 * dt * k1r
    k2x = p2 * inv_m
    k2p = -(c[1] * x2 + c[2] * r2)
    k2r = c[5] * (_feff(c, c[3] + c[2] * x2) - r2)
    x3 = x + 0.5 * dt * k2x
    p3 = p + 0.5 * dt * k2p
    r3 = r + 0.5 * dt * k2r
    k3x = p3 * inv_m
    k3p = -(c[1] * x3 + c[2] * r3)
    k3r = c[5] * (_feff(c, c[3] + c[2] * x3) - r3)
    x4 = x + dt * k3x
    p4 = p + dt * k3p
    r4 = r + dt * k3r
    k4x = p4 * inv_m
    k4p = -(c[1] * x4 + c[2] * r4)
    k4r = c[5] * (_feff(c, c[3] + c[2] * x4) - r4)
    x_new = x + dt * (k1x + 2.0 * k2x + 2.0 * k3x + k4x) / 6.0
    p_new = p + dt * (k1p + 2.0 * k2p + 2.0 * k3p + k4p) / 6.0
    r_new = r + dt * (k1r + 2.0 * k2r + 2.0 * k3r + k4r) / 6.0
    return x_new, p_new, r_new


@njit(inline="always", cache=True)
def _efld_force(c, x, p):
    h = c[3] + c[2] * x
    f, q = _feff_and_wf1mf(c, h)
    return -(c[1] * x + c[2] * f) - c[13] * q * p / c[0]


@njit(cache=True)
def drift_langevin(c, x, p, dt):
    """RK4 step of the adiabatic Langevin drift: mean force plus
    position-dependent friction (random kick applied separately)."""
    inv_m = 1.0 / c[0]
    k1x = p * inv_m
    k1p = _efld_force(c, x, p)
    x2 = x + 0.5 * dt * k1x
    p2 = p + 0.5 * dt * k1p
    k2x = p2 * inv_m
    k2p = _efld_force(c, x2, p2)
    x3 = x + 0.5 * dt * k2x
    p3 = p + 0.5 * dt * k2p
    k3x = p3 * inv_m
    k3p = _efld_force(c, x3, p3)
    x4 = x + dt * k3x
    p4 = p + dt * k3p
    k4x = p4 * inv_m
    k4p = _efld_force(c, x4, p4)
    x_new = x + dt * (k1x + 2.0 * k2x + 2.0 * k3x + k4x) / 6.0
    p_new = p + dt * (k1p + 2.0 * k2p + 2.0 * k3p + k4p) / 6.0
    return x_new, p_new


@njit(cache=True)
def drift_surface(c, x, p, occupied, dt):
    """RK4 step on a single adiabat: force -m w^2 x - occupied * dh/dx."""
    inv_m = 1.0 / c[0]
    pull = occupied * c[2]
    k1x = p * inv_m
    k1p = -(c[1] * x) - pull
    x2 = x + 0.5 * dt * k1x
    p2 = p + 0.5 * dt * k1p
    k2x = p2 * inv_m
    k2p = -(c[1] * x2) - pull
    x3 = x + 0.5 * dt * k2x
    p3 = p + 0.5 * dt * k2p
    k3x = p3 * inv_m
    k3p = -(c[1] * x3) - pull
    x4 = x + dt * k3x
    p4 = p + dt * k3p
    k4x = p4 * inv_m
    k4p = -(c[1] * x4) - pull
    x_new = x + dt * (k1x + 2.0 * k2x + 2.0 * k3x + k4x) / 6.0
    p_new = p + dt * (k1p + 2.0 * k2p + 2.0 * k3p + k4p) / 6.0
    return x_new, p_new


@njit(inline="always", cache=True)
def _hop_update(zeta, f_here, lam_dt, u):
    """First-order hop test: 0->1 at rate (Gamma/hbar) f, 1->0 at (Gamma/hbar)(1-f)."""
    if zeta == 0.0:
        if u < lam_dt * f_here:
            return 1.0
        return 0.0
    if u < lam_dt * (1.0 - f_here):
        return 0.0
    return 1.0


@njit(cache=True)
def frozen_hop_chain(c, x, n_steps, dt, seed, start_occupied):
    """Drive the two-state hop chain at fixed x; returns (up hops, down hops,
    steps spent occupied before each hop test)."""
    s0, s1, s2, s3 = stream_init(np.uint64(seed), np.uint64(0))
    f_here = _feff(c, c[3] + c[2] * x)
    lam_dt = c[5] * dt
    zeta = 1.0 if start_occupied else 0.0
    up = 0
    down = 0
    occupied = 0
    for _ in range(n_steps):
        if zeta == 1.0:
            occupied += 1
        s0, s1, s2, s3, u = _next_uniform(s0, s1, s2, s3)
        new = _hop_update(zeta, f_here, lam_dt, u)
        if new > zeta:
            up += 1
        elif new < zeta:
            down += 1
        zeta = new
    return up, down, occupied


# ---------------------------------------------------------------------------
# ensemble megakernel
# ---------------------------------------------------------------------------

@njit(inline="always", cache=True)
def _accumulate(c, method_id, x, p, r, zeta, sums, b, f):
    ke = 0.5 * p * p / c[0]
    h = c[3] + c[2] * x
    if method_id == 1:
        n = _feff(c, h)
    elif method_id == 4:
        n = zeta
    else:
        n = r
    cur = c[11] * (_fermi(h, c[8], c[6]) - n)
    sums[b, f, 0] += ke
    sums[b, f, 1] += ke * ke
    sums[b, f, 2] += n
    sums[b, f, 3] += n * n
    sums[b, f, 4] += cur
    sums[b, f, 5] += cur * cur


@njit(parallel=True, cache=True)
def run_trajectories(method_id, n_traj, n_steps, rec_stride, update_stride,
                     dt, seed, x0_mean, x0_std, p0_std, rho0,
                     c, use_fitted, gx, gd, gr, sums, flags):
    """Run the full ensemble, accumulating per-frame sums in fixed 64-trajectory
    blocks.  sums has shape (n_blocks, n_frames, 6); flags (n_blocks,) records
    1 + the index of the first trajectory whose state left the finite range.
    """
    n_blocks = sums.shape[0]
    needs_noise = method_id == 1 or method_id == 2 or method_id == 3
    for b in prange(n_blocks):
        lo = b * BLOCK
        hi = min(n_traj, lo + BLOCK)
        for ti in range(lo, hi):
            s0, s1, s2, s3 = stream_init(np.uint64(seed), np.uint64(ti))
            s0, s1, s2, s3, n1 = _next_normal(s0, s1, s2, s3)
            s0, s1, s2, s3, n2 = _next_normal(s0, s1, s2, s3)
            x = x0_mean + x0_std * n1
            p = p0_std * n2
            # rho0 < 0 selects the instantaneous-equilibrium electronic start
            r = _feff(c, c[3] + c[2] * x) if rho0 < 0.0 else rho0
            zeta = 0.0
            xi_n = 0.0
            d_cache = 0.0
            rate_cache = c[5]
            age = 0

            if needs_noise:
                if use_fitted:
                    d_cache, rate_cache = _amp_fitted(x, gx, gd, gr)
                else:
                    d_cache, rate_cache = _amp_analytic(c, x)
                if method_id == 3:
                    # colored force starts in its stationary distribution
                    lamdt = rate_cache * dt
                    var = lamdt * lamdt * (2.0 * d_cache / dt) / (2.0 * lamdt - lamdt * lamdt)
                    s0, s1, s2, s3, n3 = _next_normal(s0, s1, s2, s3)
                    xi_n = np.sqrt(var) * n3
            elif method_id == 4:
                s0, s1, s2, s3, u = _next_uniform(s0, s1, s2, s3)
                zeta = 1.0 if u < r else 0.0

            _accumulate(c, method_id, x, p, r, zeta, sums, b, 0)

            for step in range(n_steps):
                xi = 0.0
                if needs_noise:
                    if age >= update_stride:
                        if use_fitted:
                            d_cache, rate_cache = _amp_fitted(x, gx, gd, gr)
                        else:
                            d_cache, rate_cache = _amp_analytic(c, x)
                        age = 0
                    age += 1
                    s0, s1, s2, s3, z = _next_normal(s0, s1, s2, s3)
                    xi_m = np.sqrt(2.0 * d_cache / dt) * z
                    if method_id == 3:
                        xi_n += rate_cache * dt * (xi_m - xi_n)
                        xi = xi_n
                    else:
                        xi = xi_m

                if method_id == 1:
                    x, p = drift_langevin(c, x, p, dt)
                elif method_id == 4:
                    x, p = drift_surface(c, x, p, zeta, dt)
                else:
                    x, p, r = drift_mean_field(c, x, p, r, dt)
                if needs_noise:
                    p += xi * dt

                if method_id == 4:
                    s0, s1, s2, s3, u = _next_uniform(s0, s1, s2, s3)
                    zeta = _hop_update(zeta, _feff(c, c[3] + c[2] * x), c[5] * dt, u)

                if not (np.isfinite(x) and np.isfinite(p) and np.isfinite(r)):
                    if flags[b] == 0:
                        flags[b] = ti + 1
                    break

                if (step + 1) % rec_stride == 0:
                    _accumulate(c, method_id, x, p, r, zeta, sums, b, (step + 1) // rec_stride)
