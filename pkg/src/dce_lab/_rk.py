"""Compiled adaptive Runge-Kutta core for the oscillatory linear system.

The right-hand side is d v/dt = sum_q amps_q * exp(i * freqs_q * t) *
v[cols_q] scattered into rows_q; phases are grouped by unique frequency so
each evaluation costs one complex exponential per distinct frequency. The
stepper is the Cash-Karp 5(4) embedded pair with a standard proportional
controller, clamped so the trajectory lands exactly on every output time.

Status codes: 0 ok, 1 step-size underflow, 2 step budget exhausted.
"""

from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True)
def _rhs(t, v, out, rows, cols, amps, fidx, ufreqs, phases):
    for q in range(ufreqs.shape[0]):
        phases[q] = np.exp(1j * ufreqs[q] * t)
    for i in range(out.shape[0]):
        out[i] = 0.0 + 0.0j
    for n in range(rows.shape[0]):
        out[rows[n]] += amps[n] * phases[fidx[n]] * v[cols[n]]


@njit(cache=True)
def integrate_ck54(rows, cols, amps, fidx, ufreqs, v0, t_out,
                   rtol, atol, max_step, max_steps):
    d = v0.shape[0]
    nt = t_out.shape[0]
    out = np.zeros((nt, d), dtype=np.complex128)
    phases = np.empty(ufreqs.shape[0], dtype=np.complex128)

    # Cash-Karp 5(4) tableau
    c2 = 1.0 / 5.0
    c3 = 3.0 / 10.0
    c4 = 3.0 / 5.0
    c5 = 1.0
    c6 = 7.0 / 8.0
    a21 = 1.0 / 5.0
    a31 = 3.0 / 40.0
    a32 = 9.0 / 40.0
    a41 = 3.0 / 10.0
    a42 = -9.0 / 10.0
    a43 = 6.0 / 5.0
    a51 = -11.0 / 54.0
    a52 = 5.0 / 2.0
    a53 = -70.0 / 27.0
    a54 = 35.0 / 27.0
    a61 = 1631.0 / 55296.0
    a62 = 175.0 / 512.0
    a63 = 575.0 / 13824.0
    a64 = 44275.0 / 110592.0
    a65 = 253.0 / 4096.0
    b1 = 37.0 / 378.0
    b3 = 250.0 / 621.0
    b4 = 125.0 / 594.0
    b6 = 512.0 / 1771.0
    e1 = -277.0 / 64512.0
    e3 = 6925.0 / 370944.0
    e4 = -6925.0 / 202752.0
    e5 = -277.0 / 14336.0
    e6 = 277.0 / 7084.0

    y = v0.copy()
    k1 = np.empty(d, np.complex128)
    k2 = np.empty(d, np.complex128)
    k3 = np.empty(d, np.complex128)
    k4 = np.empty(d, np.complex128)
    k5 = np.empty(d, np.complex128)
    k6 = np.empty(d, np.complex128)
    ytmp = np.empty(d, np.complex128)
    y5 = np.empty(d, np.complex128)

    t = t_out[0]
    t_end = t_out[nt - 1]
    out[0] = y
    idx_out = 1

    steps = 0
    rejected = 0
    max_err = 0.0
    status = 0

    h = max_step * 1e-2
    if h <= 0.0:
        h = (t_end - t) * 1e-3

    while idx_out < nt:
        if steps + rejected > max_steps:
            status = 2
            break
        if h > max_step:
            h = max_step
        # clamp onto the next output time
        clamped = False
        ht = h
        t_next = t_out[idx_out]
        if t + ht >= t_next:
            ht = t_next - t
            clamped = True
        if (not clamped) and ht < 1e-14 * max(1.0, abs(t)):
            status = 1
            break

        _rhs(t, y, k1, rows, cols, amps, fidx, ufreqs, phases)
        for i in range(d):
            ytmp[i] = y[i] + ht * a21 * k1[i]
        _rhs(t + c2 * ht, ytmp, k2, rows, cols, amps, fidx, ufreqs, phases)
        for i in range(d):
            ytmp[i] = y[i] + ht * (a31 * k1[i] + a32 * k2[i])
        _rhs(t + c3 * ht, ytmp, k3, rows, cols, amps, fidx, ufreqs, phases)
        for i in range(d):
            ytmp[i] = y[i] + ht * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i])
        _rhs(t + c4 * ht, ytmp, k4, rows, cols, amps, fidx, ufreqs, phases)
        for i in range(d):
            ytmp[i] = y[i] + ht * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i]
                                   + a54 * k4[i])
        _rhs(t + c5 * ht, ytmp, k5, rows, cols, amps, fidx, ufreqs, phases)
        for i in range(d):
            ytmp[i] = y[i] + ht * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i]
                                   + a64 * k4[i] + a65 * k5[i])
        _rhs(t + c6 * ht, ytmp, k6, rows, cols, amps, fidx, ufreqs, phases)

        errsum = 0.0
        for i in range(d):
            y5[i] = y[i] + ht * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b6 * k6[i])
            err_i = abs(ht * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i]
                              + e5 * k5[i] + e6 * k6[i]))
            sc = atol + rtol * max(abs(y[i]), abs(y5[i]))
            if sc > 0.0:
                q = err_i / sc
                errsum += q * q
        err = np.sqrt(errsum / d)

        if err <= 1.0:
            steps += 1
            if err > max_err:
                max_err = err
            for i in range(d):
                y[i] = y5[i]
            if clamped:
                t = t_next
                out[idx_out] = y
                idx_out += 1
            else:
                t = t + ht
            if err == 0.0:
                factor = 5.0
            else:
                factor = 0.9 * err ** -0.2
                if factor > 5.0:
                    factor = 5.0
                elif factor < 0.2:
                    factor = 0.2
            # grow from the controller's h, not the clamped one
            if clamped and ht < h:
                h = h * factor if factor > 1.0 else h
            else:
                h = ht * factor
        else:
            rejected += 1
            factor = 0.9 * err ** -0.2
            if factor < 0.1:
                factor = 0.1
            h = ht * factor

    return out, steps, rejected, max_err, status, t
