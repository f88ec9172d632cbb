"""Numba update kernels: Yee leapfrog, CPML slab corrections, NTFF faces.

All kernels are plain nested loops with no reductions, so results are
bit-identical from run to run. Spatial derivatives appear as raw
neighbour differences; the 1/delta is folded into the update
coefficients. `cache=True` persists the compiled code across processes.
"""

import numpy as np
from numba import njit

_JIT = dict(cache=True, fastmath=True, nogil=True)


@njit(**_JIT)
def update_h(ex, ey, ez, hx, hy, hz, dh, ikhx, ikhy, ikhz):
    nxp, ny, nz = hx.shape
    for i in range(nxp):
        for j in range(ny):
            for k in range(nz):
                hx[i, j, k] += dh * (
                    (ey[i, j, k + 1] - ey[i, j, k]) * ikhz[k]
                    - (ez[i, j + 1, k] - ez[i, j, k]) * ikhy[j]
                )
    nx, nyp, nz = hy.shape
    for i in range(nx):
        for j in range(nyp):
            for k in range(nz):
                hy[i, j, k] += dh * (
                    (ez[i + 1, j, k] - ez[i, j, k]) * ikhx[i]
                    - (ex[i, j, k + 1] - ex[i, j, k]) * ikhz[k]
                )
    nx, ny, nzp = hz.shape
    for i in range(nx):
        for j in range(ny):
            for k in range(nzp):
                hz[i, j, k] += dh * (
                    (ex[i, j + 1, k] - ex[i, j, k]) * ikhy[j]
                    - (ey[i + 1, j, k] - ey[i, j, k]) * ikhx[i]
                )


@njit(**_JIT)
def update_e(ex, ey, ez, hx, hy, hz, ca_x, cb_x, ca_y, cb_y, ca_z, cb_z, ikex, ikey, ikez):
    nx, nyp, nzp = ex.shape
    for i in range(nx):
        for j in range(1, nyp - 1):
            for k in range(1, nzp - 1):
                ex[i, j, k] = ca_x[i, j, k] * ex[i, j, k] + cb_x[i, j, k] * (
                    (hz[i, j, k] - hz[i, j - 1, k]) * ikey[j]
                    - (hy[i, j, k] - hy[i, j, k - 1]) * ikez[k]
                )
    nxp, ny, nzp = ey.shape
    for i in range(1, nxp - 1):
        for j in range(ny):
            for k in range(1, nzp - 1):
                ey[i, j, k] = ca_y[i, j, k] * ey[i, j, k] + cb_y[i, j, k] * (
                    (hx[i, j, k] - hx[i, j, k - 1]) * ikez[k]
                    - (hz[i, j, k] - hz[i - 1, j, k]) * ikex[i]
                )
    nxp, nyp, nz = ez.shape
    for i in range(1, nxp - 1):
        for j in range(1, nyp - 1):
            for k in range(nz):
                ez[i, j, k] = ca_z[i, j, k] * ez[i, j, k] + cb_z[i, j, k] * (
                    (hy[i, j, k] - hy[i - 1, j, k]) * ikex[i]
                    - (hx[i, j, k] - hx[i, j - 1, k]) * ikey[j]
                )


# --- CPML slab corrections -------------------------------------------------
# Each kernel advances the psi recursions of one axis over one slab and adds
# the correction to the two affected field components. `i_start` maps slab
# index 0 to its grid index; b/c profile arrays are indexed by grid index.


@njit(**_JIT)
def cpml_e_x(ey, ez, hy, hz, cb_y, cb_z, psi_eyx, psi_ezx, b_e, c_e, i_start):
    npml = psi_eyx.shape[0]
    _, ny, nzp = psi_eyx.shape
    for ii in range(npml):
        i = i_start + ii
        for j in range(ny):
            for k in range(1, nzp - 1):
                d = hz[i, j, k] - hz[i - 1, j, k]
                p = b_e[i] * psi_eyx[ii, j, k] + c_e[i] * d
                psi_eyx[ii, j, k] = p
                ey[i, j, k] -= cb_y[i, j, k] * p
    _, nyp, nz = psi_ezx.shape
    for ii in range(npml):
        i = i_start + ii
        for j in range(1, nyp - 1):
            for k in range(nz):
                d = hy[i, j, k] - hy[i - 1, j, k]
                p = b_e[i] * psi_ezx[ii, j, k] + c_e[i] * d
                psi_ezx[ii, j, k] = p
                ez[i, j, k] += cb_z[i, j, k] * p


@njit(**_JIT)
def cpml_e_y(ex, ez, hx, hz, cb_x, cb_z, psi_exy, psi_ezy, b_e, c_e, j_start):
    nx, npml, nzp = psi_exy.shape
    for i in range(nx):
        for jj in range(npml):
            j = j_start + jj
            for k in range(1, nzp - 1):
                d = hz[i, j, k] - hz[i, j - 1, k]
                p = b_e[j] * psi_exy[i, jj, k] + c_e[j] * d
                psi_exy[i, jj, k] = p
                ex[i, j, k] += cb_x[i, j, k] * p
    nxp, npml, nz = psi_ezy.shape
    for i in range(1, nxp - 1):
        for jj in range(npml):
            j = j_start + jj
            for k in range(nz):
                d = hx[i, j, k] - hx[i, j - 1, k]
                p = b_e[j] * psi_ezy[i, jj, k] + c_e[j] * d
                psi_ezy[i, jj, k] = p
                ez[i, j, k] -= cb_z[i, j, k] * p


@njit(**_JIT)
def cpml_e_z(ex, ey, hx, hy, cb_x, cb_y, psi_exz, psi_eyz, b_e, c_e, k_start):
    nx, nyp, npml = psi_exz.shape
    for i in range(nx):
        for j in range(1, nyp - 1):
            for kk in range(npml):
                k = k_start + kk
                d = hy[i, j, k] - hy[i, j, k - 1]
                p = b_e[k] * psi_exz[i, j, kk] + c_e[k] * d
                psi_exz[i, j, kk] = p
                ex[i, j, k] -= cb_x[i, j, k] * p
    nxp, ny, npml = psi_eyz.shape
    for i in range(1, nxp - 1):
        for j in range(ny):
            for kk in range(npml):
                k = k_start + kk
                d = hx[i, j, k] - hx[i, j, k - 1]
                p = b_e[k] * psi_eyz[i, j, kk] + c_e[k] * d
                psi_eyz[i, j, kk] = p
                ey[i, j, k] += cb_y[i, j, k] * p


@njit(**_JIT)
def cpml_h_x(hy, hz, ey, ez, dh, psi_hyx, psi_hzx, b_h, c_h, i_start):
    npml, nyp, nz = psi_hyx.shape
    for ii in range(npml):
        i = i_start + ii
        for j in range(nyp):
            for k in range(nz):
                d = ez[i + 1, j, k] - ez[i, j, k]
                p = b_h[i] * psi_hyx[ii, j, k] + c_h[i] * d
                psi_hyx[ii, j, k] = p
                hy[i, j, k] += dh * p
    npml, ny, nzp = psi_hzx.shape
    for ii in range(npml):
        i = i_start + ii
        for j in range(ny):
            for k in range(nzp):
                d = ey[i + 1, j, k] - ey[i, j, k]
                p = b_h[i] * psi_hzx[ii, j, k] + c_h[i] * d
                psi_hzx[ii, j, k] = p
                hz[i, j, k] -= dh * p


@njit(**_JIT)
def cpml_h_y(hx, hz, ex, ez, dh, psi_hxy, psi_hzy, b_h, c_h, j_start):
    nxp, npml, nz = psi_hxy.shape
    for i in range(nxp):
        for jj in range(npml):
            j = j_start + jj
            for k in range(nz):
                d = ez[i, j + 1, k] - ez[i, j, k]
                p = b_h[j] * psi_hxy[i, jj, k] + c_h[j] * d
                psi_hxy[i, jj, k] = p
                hx[i, j, k] -= dh * p
    nx, npml, nzp = psi_hzy.shape
    for i in range(nx):
        for jj in range(npml):
            j = j_start + jj
            for k in range(nzp):
                d = ex[i, j + 1, k] - ex[i, j, k]
                p = b_h[j] * psi_hzy[i, jj, k] + c_h[j] * d
                psi_hzy[i, jj, k] = p
                hz[i, j, k] += dh * p


@njit(**_JIT)
def cpml_h_z(hx, hy, ex, ey, dh, psi_hxz, psi_hyz, b_h, c_h, k_start):
    nxp, ny, npml = psi_hxz.shape
    for i in range(nxp):
        for j in range(ny):
            for kk in range(npml):
                k = k_start + kk
                d = ey[i, j, k + 1] - ey[i, j, k]
                p = b_h[k] * psi_hxz[i, j, kk] + c_h[k] * d
                psi_hxz[i, j, kk] = p
                hx[i, j, k] += dh * p
    nx, nyp, npml = psi_hyz.shape
    for i in range(nx):
        for j in range(nyp):
            for kk in range(npml):
                k = k_start + kk
                d = ex[i, j, k + 1] - ex[i, j, k]
                p = b_h[k] * psi_hyz[i, j, kk] + c_h[k] * d
                psi_hyz[i, j, kk] = p
                hy[i, j, k] -= dh * p


# --- NTFF running-DFT face accumulation -------------------------------------
# Tangential fields are interpolated to face-cell centres; `acc_*` has shape
# (n_freq, n1, n2) and `ph` is the per-frequency complex phase of this step.


@njit(**_JIT)
def ntff_face_x_e(ey, ez, i0, j0, j1, k0, k1, acc_ey, acc_ez, ph):
    nf = ph.shape[0]
    for j in range(j0, j1):
        for k in range(k0, k1):
            vy = 0.5 * (ey[i0, j, k] + ey[i0, j, k + 1])
            vz = 0.5 * (ez[i0, j, k] + ez[i0, j + 1, k])
            for f in range(nf):
                acc_ey[f, j - j0, k - k0] += vy * ph[f]
                acc_ez[f, j - j0, k - k0] += vz * ph[f]


@njit(**_JIT)
def ntff_face_x_h(hy, hz, i0, j0, j1, k0, k1, acc_hy, acc_hz, ph):
    nf = ph.shape[0]
    for j in range(j0, j1):
        for k in range(k0, k1):
            vy = 0.25 * (hy[i0 - 1, j, k] + hy[i0, j, k] + hy[i0 - 1, j + 1, k] + hy[i0, j + 1, k])
            vz = 0.25 * (hz[i0 - 1, j, k] + hz[i0, j, k] + hz[i0 - 1, j, k + 1] + hz[i0, j, k + 1])
            for f in range(nf):
                acc_hy[f, j - j0, k - k0] += vy * ph[f]
                acc_hz[f, j - j0, k - k0] += vz * ph[f]


@njit(**_JIT)
def ntff_face_y_e(ex, ez, j0, i0, i1, k0, k1, acc_ex, acc_ez, ph):
    nf = ph.shape[0]
    for i in range(i0, i1):
        for k in range(k0, k1):
            vx = 0.5 * (ex[i, j0, k] + ex[i, j0, k + 1])
            vz = 0.5 * (ez[i, j0, k] + ez[i + 1, j0, k])
            for f in range(nf):
                acc_ex[f, i - i0, k - k0] += vx * ph[f]
                acc_ez[f, i - i0, k - k0] += vz * ph[f]


@njit(**_JIT)
def ntff_face_y_h(hx, hz, j0, i0, i1, k0, k1, acc_hx, acc_hz, ph):
    nf = ph.shape[0]
    for i in range(i0, i1):
        for k in range(k0, k1):
            vx = 0.25 * (hx[i, j0 - 1, k] + hx[i, j0, k] + hx[i + 1, j0 - 1, k] + hx[i + 1, j0, k])
            vz = 0.25 * (hz[i, j0 - 1, k] + hz[i, j0, k] + hz[i, j0 - 1, k + 1] + hz[i, j0, k + 1])
            for f in range(nf):
                acc_hx[f, i - i0, k - k0] += vx * ph[f]
                acc_hz[f, i - i0, k - k0] += vz * ph[f]


@njit(**_JIT)
def ntff_face_z_e(ex, ey, k0, i0, i1, j0, j1, acc_ex, acc_ey, ph):
    nf = ph.shape[0]
    for i in range(i0, i1):
        for j in range(j0, j1):
            vx = 0.5 * (ex[i, j, k0] + ex[i, j + 1, k0])
            vy = 0.5 * (ey[i, j, k0] + ey[i + 1, j, k0])
            for f in range(nf):
                acc_ex[f, i - i0, j - j0] += vx * ph[f]
                acc_ey[f, i - i0, j - j0] += vy * ph[f]


@njit(**_JIT)
def ntff_face_z_h(hx, hy, k0, i0, i1, j0, j1, acc_hx, acc_hy, ph):
    nf = ph.shape[0]
    for i in range(i0, i1):
        for j in range(j0, j1):
            vx = 0.25 * (hx[i, j, k0 - 1] + hx[i, j, k0] + hx[i + 1, j, k0 - 1] + hx[i + 1, j, k0])
            vy = 0.25 * (hy[i, j, k0 - 1] + hy[i, j, k0] + hy[i, j + 1, k0 - 1] + hy[i, j + 1, k0])
            for f in range(nf):
                acc_hx[f, i - i0, j - j0] += vx * ph[f]
                acc_hy[f, i - i0, j - j0] += vy * ph[f]
