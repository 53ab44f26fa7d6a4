"""Compiled inner loop of the pulse-by-pulse simulation.

Arrays are updated in place. Energies are accumulated per unit mass and
scaled by the caller. Uniform and Gaussian variates are drawn by the
caller, chunk by chunk, from one numpy Generator, so a run is a pure
function of its seed.
"""

import math

import numpy as np
from numba import njit


@njit(cache=True)
def sech2(x):
    e = math.exp(-2.0 * abs(x))
    return 4.0 * e / ((1.0 + e) * (1.0 + e))


@njit(cache=True)
def rotate(x, v, omega, c, s):
    # free motion rotates (omega x, v); the rescale pins omega^2 x^2 + v^2 per step
    for a in range(3):
        w = omega[a]
        u = x[a] * w
        va = v[a]
        before = u * u + va * va
        u_new = u * c[a] + va * s[a]
        v_new = va * c[a] - u * s[a]
        after = u_new * u_new + v_new * v_new
        if after > 0.0:
            f = math.sqrt(before / after)
            u_new *= f
            v_new *= f
        x[a] = u_new / w
        v[a] = v_new


@njit(cache=True)
def _rotate_by(x, v, omega, dt, c, s):
    for a in range(3):
        c[a] = math.cos(omega[a] * dt)
        s[a] = math.sin(omega[a] * dt)
    rotate(x, v, omega, c, s)


@njit(cache=True)
def advance_chunk(x, v, omega, cos_p, sin_p, center, beam,
                  drive, half_tau, delta, k, recoil,
                  heat_sigma, sampled, period,
                  u_abs, u_z, u_phi, normals, delays,
                  start, burn_in, block_len, n_blocks,
                  block_kin, block_pot, block_count,
                  impulse_abs, impulse_emit, counters,
                  energy_stride, trace, trajectory_stride, trajectory):
    """Advance `len(u_abs)` pulses; returns the first non-finite pulse index or -1."""
    c_d = np.empty(3)
    s_d = np.empty(3)
    for i in range(u_abs.shape[0]):
        index = start + i

        if index >= burn_in:
            block = (index - burn_in) // block_len
            if block >= n_blocks:
                block = n_blocks - 1
            for a in range(3):
                d = omega[a] * (x[a] - center[a])
                block_kin[block, a] += 0.5 * v[a] * v[a]
                block_pot[block, a] += 0.5 * d * d
            block_count[block] += 1
        if energy_stride > 0 and index % energy_stride == 0:
            row = index // energy_stride
            for a in range(3):
                d = omega[a] * (x[a] - center[a])
                trace[row, a] = 0.5 * (v[a] * v[a] + d * d)
        if trajectory_stride > 0 and index % trajectory_stride == 0:
            row = index // trajectory_stride
            trajectory[row, 0] = index
            for a in range(3):
                trajectory[row, 2 + a] = x[a]
                trajectory[row, 5 + a] = v[a]
            trajectory[row, 8] = counters[0]

        v_beam = v[0] * beam[0] + v[1] * beam[1] + v[2] * beam[2]
        p_exc = drive * sech2(half_tau * (delta - k * v_beam))
        if u_abs[i] < p_exc:
            counters[0] += 1
            for a in range(3):
                kick = recoil * beam[a]
                v[a] += kick
                impulse_abs[a] += kick
            z = 2.0 * u_z[i] - 1.0
            r = math.sqrt(max(0.0, 1.0 - z * z))
            phi = 2.0 * math.pi * u_phi[i]
            ex = r * math.cos(phi)
            ey = r * math.sin(phi)
            t_d = 0.0
            if sampled:
                t_d = min(delays[i], period)
                _rotate_by(x, v, omega, t_d, c_d, s_d)
            v[0] += recoil * ex
            v[1] += recoil * ey
            v[2] += recoil * z
            impulse_emit[0] += recoil * ex
            impulse_emit[1] += recoil * ey
            impulse_emit[2] += recoil * z
            if sampled:
                _rotate_by(x, v, omega, period - t_d, c_d, s_d)
            else:
                rotate(x, v, omega, cos_p, sin_p)
        else:
            rotate(x, v, omega, cos_p, sin_p)

        if heat_sigma > 0.0:
            for a in range(3):
                v[a] += heat_sigma * normals[i, a]

        for a in range(3):
            if not (math.isfinite(x[a]) and math.isfinite(v[a])):
                return index
    return -1
