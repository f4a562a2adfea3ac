"""Per-trial simulation loops, compiled with numba when available.

Each kernel runs one complete closed-loop tracking trial (truth, observation,
filter, re-pointing) over pre-drawn noise arrays and fills per-block absolute
pointing errors.  The double sums are evaluated in factored form, one sum per
array, which is algebraically identical to the full (p, q) grid.

Setting the environment variable ``BEAMTRACK_DISABLE_NUMBA=1`` before import
selects the plain Python path; the same source runs either way, so results
agree between paths to floating-point roundoff.
"""

from __future__ import annotations

import math
import os

import numpy as np

try:
    from numba import njit

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    HAS_NUMBA = False

USE_NUMBA = HAS_NUMBA and os.environ.get("BEAMTRACK_DISABLE_NUMBA", "") != "1"


def _run_trial_proposed(d0, v0, h, dt, rho, sigma_w, sigma_n2, kappa,
                        n_r, n_t, gain_decay,
                        a_re0, a_im0, w, xi1, xi2, n_re, n_im,
                        err_phi, err_theta):
    n_blocks = w.shape[0]
    g_diag = rho if gain_decay else 1.0
    rvar = sigma_n2 / 2.0

    d_t = d0
    v_t = v0
    a_re_t = a_re0
    a_im_t = a_im0

    x = np.empty(4)
    x[0] = d0
    x[1] = v0
    x[2] = a_re0
    x[3] = a_im0

    q_dd = (dt * sigma_w) ** 2
    q_vv = sigma_w ** 2
    q_aa = 1.0 - rho ** 2
    p_mat = np.zeros((4, 4))
    p_mat[0, 0] = q_dd
    p_mat[1, 1] = q_vv
    p_mat[2, 2] = q_aa
    p_mat[3, 3] = q_aa

    ahead = x[0] + x[1] * dt
    theta_bar = math.atan2(-h, -ahead)
    phi_bar = math.atan2(h, ahead)

    pp = np.empty((4, 4))
    h2 = np.empty((2, 4))
    u = np.empty((4, 2))
    vv = np.empty((2, 4))
    kk = np.empty((4, 2))
    norm = float(n_r * n_t)

    for k in range(n_blocks):
        d_t = d_t + v_t * dt + w[k] * dt
        v_t = v_t + w[k]
        a_re_t = rho * a_re_t + xi1[k]
        a_im_t = rho * a_im_t + xi2[k]

        theta_k = math.atan2(-h, -d_t)
        phi_k = math.atan2(h, d_t)
        e_phi = phi_k - phi_bar
        e_theta = theta_k - theta_bar
        err_phi[k] = abs(math.atan2(math.sin(e_phi), math.cos(e_phi)))
        err_theta[k] = abs(math.atan2(math.sin(e_theta), math.cos(e_theta)))

        ct_bar = math.cos(theta_bar)
        cp_bar = math.cos(phi_bar)

        # observation at the truth's exact angles
        arg_r = kappa * (ct_bar - math.cos(theta_k))
        s_r = complex(0.0, 0.0)
        for p in range(n_r):
            s_r += complex(math.cos(arg_r * p), math.sin(arg_r * p))
        arg_t = kappa * (math.cos(phi_k) - cp_bar)
        s_t = complex(0.0, 0.0)
        for q in range(n_t):
            s_t += complex(math.cos(arg_t * q), math.sin(arg_t * q))
        alpha_t = complex(a_re_t, a_im_t)
        z = alpha_t * s_r * s_t / norm + complex(n_re[k], n_im[k])

        # predict
        xp0 = x[0] + x[1] * dt
        xp1 = x[1]
        xp2 = g_diag * x[2]
        xp3 = g_diag * x[3]
        for i in range(4):
            r0 = p_mat[0, i] + dt * p_mat[1, i]
            pp[0, i] = r0
            pp[1, i] = p_mat[1, i]
            pp[2, i] = g_diag * p_mat[2, i]
            pp[3, i] = g_diag * p_mat[3, i]
        for i in range(4):
            c0 = pp[i, 0] + dt * pp[i, 1]
            pp[i, 0] = c0
            pp[i, 2] = g_diag * pp[i, 2]
            pp[i, 3] = g_diag * pp[i, 3]
        pp[0, 0] += q_dd
        pp[1, 1] += q_vv
        pp[2, 2] += q_aa
        pp[3, 3] += q_aa

        # measurement linearization; the evaluation distance is the
        # predicted position xp0 = d + v*dt
        r_eval = math.sqrt(h * h + xp0 * xp0)
        c_eval = xp0 / r_eval
        arg_fr = kappa * (c_eval + ct_bar)
        f_r = complex(0.0, 0.0)
        g_r = complex(0.0, 0.0)
        for p in range(n_r):
            term = complex(math.cos(arg_fr * p), math.sin(arg_fr * p))
            f_r += term
            g_r += p * term
        arg_ft = kappa * (c_eval - cp_bar)
        f_t = complex(0.0, 0.0)
        g_t = complex(0.0, 0.0)
        for q in range(n_t):
            term = complex(math.cos(arg_ft * q), math.sin(arg_ft * q))
            f_t += term
            g_t += q * term
        e_sum = f_r * f_t
        pqe_sum = g_r * f_t + f_r * g_t
        alpha_p = complex(xp2, xp3)
        gain_part = e_sum / norm
        z_hat = alpha_p * gain_part
        j_d = alpha_p * 1j * kappa * (h * h / (r_eval ** 3)) * pqe_sum / norm

        h2[0, 0] = j_d.real
        h2[1, 0] = j_d.imag
        h2[0, 1] = dt * j_d.real
        h2[1, 1] = dt * j_d.imag
        h2[0, 2] = gain_part.real
        h2[1, 2] = gain_part.imag
        h2[0, 3] = -gain_part.imag
        h2[1, 3] = gain_part.real

        nu0 = z.real - z_hat.real
        nu1 = z.imag - z_hat.imag

        for i in range(4):
            u[i, 0] = 0.0
            u[i, 1] = 0.0
            for j in range(4):
                u[i, 0] += pp[i, j] * h2[0, j]
                u[i, 1] += pp[i, j] * h2[1, j]
        s00 = rvar
        s01 = 0.0
        s11 = rvar
        for j in range(4):
            s00 += h2[0, j] * u[j, 0]
            s01 += h2[0, j] * u[j, 1]
            s11 += h2[1, j] * u[j, 1]
        det = s00 * s11 - s01 * s01
        if not (det > 0.0) or not math.isfinite(det):
            for kk_rest in range(k, n_blocks):
                err_phi[kk_rest] = math.pi
                err_theta[kk_rest] = math.pi
            return
        i00 = s11 / det
        i01 = -s01 / det
        i11 = s00 / det
        for i in range(4):
            kk[i, 0] = u[i, 0] * i00 + u[i, 1] * i01
            kk[i, 1] = u[i, 0] * i01 + u[i, 1] * i11

        x[0] = xp0 + kk[0, 0] * nu0 + kk[0, 1] * nu1
        x[1] = xp1 + kk[1, 0] * nu0 + kk[1, 1] * nu1
        x[2] = xp2 + kk[2, 0] * nu0 + kk[2, 1] * nu1
        x[3] = xp3 + kk[3, 0] * nu0 + kk[3, 1] * nu1

        for j in range(4):
            vv[0, j] = 0.0
            vv[1, j] = 0.0
            for i in range(4):
                vv[0, j] += h2[0, i] * pp[i, j]
                vv[1, j] += h2[1, i] * pp[i, j]
        for i in range(4):
            for j in range(4):
                p_mat[i, j] = pp[i, j] - kk[i, 0] * vv[0, j] - kk[i, 1] * vv[1, j]
        for i in range(4):
            for j in range(i + 1, 4):
                avg = 0.5 * (p_mat[i, j] + p_mat[j, i])
                p_mat[i, j] = avg
                p_mat[j, i] = avg

        ok = True
        for i in range(4):
            if not math.isfinite(x[i]):
                ok = False
        if not ok:
            for kk_rest in range(k, n_blocks):
                err_phi[kk_rest] = math.pi
                err_theta[kk_rest] = math.pi
            return

        ahead = x[0] + x[1] * dt
        theta_bar = math.atan2(-h, -ahead)
        phi_bar = math.atan2(h, ahead)


def _run_trial_baseline(d0, v0, h, dt, rho, sigma_w, sigma_n2, kappa,
                        n_r, n_t, angle_noise_std,
                        a_re0, a_im0, w, xi1, xi2, n_re, n_im,
                        err_phi, err_theta):
    n_blocks = w.shape[0]
    rvar = sigma_n2 / 2.0

    d_t = d0
    v_t = v0
    a_re_t = a_re0
    a_im_t = a_im0

    x = np.empty(4)
    x[0] = math.atan2(-h, -d0)
    x[1] = math.atan2(h, d0)
    x[2] = a_re0
    x[3] = a_im0

    q_ang = angle_noise_std ** 2
    q_aa = 1.0 - rho ** 2
    p_mat = np.zeros((4, 4))
    p_mat[0, 0] = q_ang
    p_mat[1, 1] = q_ang
    p_mat[2, 2] = q_aa
    p_mat[3, 3] = q_aa

    theta_bar = x[0]
    phi_bar = x[1]

    h2 = np.empty((2, 4))
    u = np.empty((4, 2))
    vv = np.empty((2, 4))
    kk = np.empty((4, 2))
    pp = np.empty((4, 4))
    norm = float(n_r * n_t)

    for k in range(n_blocks):
        d_t = d_t + v_t * dt + w[k] * dt
        v_t = v_t + w[k]
        a_re_t = rho * a_re_t + xi1[k]
        a_im_t = rho * a_im_t + xi2[k]

        theta_k = math.atan2(-h, -d_t)
        phi_k = math.atan2(h, d_t)
        e_phi = phi_k - phi_bar
        e_theta = theta_k - theta_bar
        err_phi[k] = abs(math.atan2(math.sin(e_phi), math.cos(e_phi)))
        err_theta[k] = abs(math.atan2(math.sin(e_theta), math.cos(e_theta)))

        ct_bar = math.cos(theta_bar)
        cp_bar = math.cos(phi_bar)

        arg_r = kappa * (ct_bar - math.cos(theta_k))
        s_r = complex(0.0, 0.0)
        for p in range(n_r):
            s_r += complex(math.cos(arg_r * p), math.sin(arg_r * p))
        arg_t = kappa * (math.cos(phi_k) - cp_bar)
        s_t = complex(0.0, 0.0)
        for q in range(n_t):
            s_t += complex(math.cos(arg_t * q), math.sin(arg_t * q))
        alpha_t = complex(a_re_t, a_im_t)
        z = alpha_t * s_r * s_t / norm + complex(n_re[k], n_im[k])

        # predict: identity transition, additive covariance
        for i in range(4):
            for j in range(4):
                pp[i, j] = p_mat[i, j]
        pp[0, 0] += q_ang
        pp[1, 1] += q_ang
        pp[2, 2] += q_aa
        pp[3, 3] += q_aa

        th_e = x[0]
        ph_e = x[1]
        alpha_e = complex(x[2], x[3])

        arg_fr = kappa * (ct_bar - math.cos(th_e))
        f_r = complex(0.0, 0.0)
        g_r = complex(0.0, 0.0)
        for p in range(n_r):
            term = complex(math.cos(arg_fr * p), math.sin(arg_fr * p))
            f_r += term
            g_r += p * term
        arg_ft = kappa * (math.cos(ph_e) - cp_bar)
        f_t = complex(0.0, 0.0)
        g_t = complex(0.0, 0.0)
        for q in range(n_t):
            term = complex(math.cos(arg_ft * q), math.sin(arg_ft * q))
            f_t += term
            g_t += q * term

        gain_part = f_r * f_t / norm
        z_hat = alpha_e * gain_part
        j_theta = alpha_e * 1j * kappa * math.sin(th_e) * (g_r * f_t) / norm
        j_phi = alpha_e * (-1j) * kappa * math.sin(ph_e) * (f_r * g_t) / norm

        h2[0, 0] = j_theta.real
        h2[1, 0] = j_theta.imag
        h2[0, 1] = j_phi.real
        h2[1, 1] = j_phi.imag
        h2[0, 2] = gain_part.real
        h2[1, 2] = gain_part.imag
        h2[0, 3] = -gain_part.imag
        h2[1, 3] = gain_part.real

        nu0 = z.real - z_hat.real
        nu1 = z.imag - z_hat.imag

        for i in range(4):
            u[i, 0] = 0.0
            u[i, 1] = 0.0
            for j in range(4):
                u[i, 0] += pp[i, j] * h2[0, j]
                u[i, 1] += pp[i, j] * h2[1, j]
        s00 = rvar
        s01 = 0.0
        s11 = rvar
        for j in range(4):
            s00 += h2[0, j] * u[j, 0]
            s01 += h2[0, j] * u[j, 1]
            s11 += h2[1, j] * u[j, 1]
        det = s00 * s11 - s01 * s01
        if not (det > 0.0) or not math.isfinite(det):
            for kk_rest in range(k, n_blocks):
                err_phi[kk_rest] = math.pi
                err_theta[kk_rest] = math.pi
            return
        i00 = s11 / det
        i01 = -s01 / det
        i11 = s00 / det
        for i in range(4):
            kk[i, 0] = u[i, 0] * i00 + u[i, 1] * i01
            kk[i, 1] = u[i, 0] * i01 + u[i, 1] * i11

        for i in range(4):
            x[i] = x[i] + kk[i, 0] * nu0 + kk[i, 1] * nu1

        for j in range(4):
            vv[0, j] = 0.0
            vv[1, j] = 0.0
            for i in range(4):
                vv[0, j] += h2[0, i] * pp[i, j]
                vv[1, j] += h2[1, i] * pp[i, j]
        for i in range(4):
            for j in range(4):
                p_mat[i, j] = pp[i, j] - kk[i, 0] * vv[0, j] - kk[i, 1] * vv[1, j]
        for i in range(4):
            for j in range(i + 1, 4):
                avg = 0.5 * (p_mat[i, j] + p_mat[j, i])
                p_mat[i, j] = avg
                p_mat[j, i] = avg

        ok = True
        for i in range(4):
            if not math.isfinite(x[i]):
                ok = False
        if not ok:
            for kk_rest in range(k, n_blocks):
                err_phi[kk_rest] = math.pi
                err_theta[kk_rest] = math.pi
            return

        theta_bar = x[0]
        phi_bar = x[1]


# plain-Python references are always importable, e.g. for benchmarking
run_trial_proposed_py = _run_trial_proposed
run_trial_baseline_py = _run_trial_baseline

if USE_NUMBA:
    run_trial_proposed = njit(cache=True, nogil=True)(_run_trial_proposed)
    run_trial_baseline = njit(cache=True, nogil=True)(_run_trial_baseline)
else:
    run_trial_proposed = _run_trial_proposed
    run_trial_baseline = _run_trial_baseline
