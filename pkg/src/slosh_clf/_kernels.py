"""Compiled inner loops. Must agree with the numpy reference in ``solver.py``."""
import math

import numpy as np
from numba import njit

# no nnan/ninf: the blow-up checks must still see NaN levels
FAST = {"nsz", "arcp", "contract", "afn", "reassoc"}
# the stepper relies on compensated summation, which reassociation would fold away
SAFE = {"nsz", "arcp", "afn"}


@njit(cache=True, fastmath=FAST)
def rhs_kernel(h, v, f, g, mu, sigma, dx, dh, dv, kap, hvx, flux):
    n = h.size
    inv_dx = 1.0 / dx
    inv_dx2 = inv_dx * inv_dx
    # mass: each face flux is computed once so the cell updates telescope;
    # wall fluxes are zero because v[0] = v[n] = 0
    flux[0] = 0.0
    flux[n] = 0.0
    for j in range(1, n):
        flux[j] = 0.5 * (h[j - 1] + h[j]) * v[j]
    for i in range(n):
        dh[i] = (flux[i] - flux[i + 1]) * inv_dx
    # curvature with mirror ghosts h[-1] = h[0], h[n] = h[n-1]
    hx = (h[1] - h[0]) * 0.5 * inv_dx
    s = 1.0 + hx * hx
    kap[0] = (h[1] - h[0]) * inv_dx2 / (s * math.sqrt(s))
    for i in range(1, n - 1):
        hx = (h[i + 1] - h[i - 1]) * 0.5 * inv_dx
        s = 1.0 + hx * hx
        kap[i] = (h[i + 1] - 2.0 * h[i] + h[i - 1]) * inv_dx2 / (s * math.sqrt(s))
    hx = (h[n - 1] - h[n - 2]) * 0.5 * inv_dx
    s = 1.0 + hx * hx
    kap[n - 1] = (h[n - 2] - h[n - 1]) * inv_dx2 / (s * math.sqrt(s))
    for i in range(n):
        hvx[i] = h[i] * (v[i + 1] - v[i]) * inv_dx
    dv[0] = 0.0
    dv[n] = 0.0
    for j in range(1, n):
        hf = 0.5 * (h[j - 1] + h[j])
        adv = v[j] * (v[j + 1] - v[j - 1]) * 0.5 * inv_dx
        grav = g * (h[j] - h[j - 1]) * inv_dx
        cap = sigma * (kap[j] - kap[j - 1]) * inv_dx
        visc = mu * (hvx[j] - hvx[j - 1]) * inv_dx / hf
        dv[j] = -adv - grav + cap + visc + f


@njit(cache=True, fastmath=FAST)
def feedback_kernel(h, v, xi, w, dx, mu, omega, k, q, delta):
    mom = 0.0
    for i in range(h.size):
        mom += h[i] * 0.5 * (v[i] + v[i + 1])
    mom *= dx
    return -omega * ((delta + 1.0) * mom + mu * (h[h.size - 1] - h[0]) - q * (w + k * xi))


@njit(cache=True, fastmath=SAFE)
def rk4_kernel(h, v, xi, w, n_steps, dt, g, mu, sigma, dx, closed_loop, f_open,
               omega, k, q, delta):
    """Advance (h, v) in place by ``n_steps`` RK4 steps.

    Returns (status, xi, w) with status = -1 on success, otherwise the index of
    the step whose stage produced a nonpositive level.
    """
    n = h.size
    kh = np.empty((4, n))
    kv = np.empty((4, n + 1))
    kxi = np.empty(4)
    kw = np.empty(4)
    hs = np.empty(n)
    vs = np.empty(n + 1)
    kap = np.empty(n)
    hvx = np.empty(n)
    flux = np.empty(n + 1)
    comp = np.zeros(n)  # Kahan compensation for the level update
    coef = (0.0, 0.5, 0.5, 1.0)
    for step in range(n_steps):
        for st in range(4):
            c = coef[st] * dt
            if st == 0:
                for i in range(n):
                    hs[i] = h[i]
                for j in range(n + 1):
                    vs[j] = v[j]
                xs = xi
                ws = w
            else:
                for i in range(n):
                    hs[i] = h[i] + c * kh[st - 1, i]
                for j in range(n + 1):
                    vs[j] = v[j] + c * kv[st - 1, j]
                xs = xi + c * kxi[st - 1]
                ws = w + c * kw[st - 1]
            for i in range(n):
                if not hs[i] > 0.0:
                    return step, xi, w
            if closed_loop:
                f = feedback_kernel(hs, vs, xs, ws, dx, mu, omega, k, q, delta)
            else:
                f = f_open
            rhs_kernel(hs, vs, f, g, mu, sigma, dx, kh[st], kv[st], kap, hvx, flux)
            kxi[st] = ws
            kw[st] = -f
        d6 = dt / 6.0
        # compensated: near rest the same tiny increment repeats every step and
        # plain rounding drifts the total mass
        for i in range(n):
            y = d6 * (kh[0, i] + 2.0 * kh[1, i] + 2.0 * kh[2, i] + kh[3, i]) - comp[i]
            t = h[i] + y
            comp[i] = (t - h[i]) - y
            h[i] = t
        for j in range(1, n):
            v[j] += d6 * (kv[0, j] + 2.0 * kv[1, j] + 2.0 * kv[2, j] + kv[3, j])
        xi += d6 * (kxi[0] + 2.0 * kxi[1] + 2.0 * kxi[2] + kxi[3])
        w += d6 * (kw[0] + 2.0 * kw[1] + 2.0 * kw[2] + kw[3])
        for i in range(n):
            if not h[i] > 0.0:
                return step, xi, w
    return -1, xi, w
